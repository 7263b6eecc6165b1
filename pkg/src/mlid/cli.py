"""Command-line interface.

Every subcommand writes its primary outputs plus one JSON run manifest
(``<first output>.manifest.json`` unless ``--manifest`` is given). Exit
status is 0 on success, 2 on input errors and 3 on computation errors; on
failure any partially written outputs are removed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from collections.abc import Sequence
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from mlid import corpus as corpus_mod
from mlid import lexicon as lexicon_mod
from mlid import lm as lm_mod
from mlid import mapping as mapping_mod
from mlid import metrics as metrics_mod
from mlid import p12 as p12_mod
from mlid import principles as principles_mod
from mlid import synth as synth_mod
from mlid.errors import ComputationError, InputError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_COMPUTE = 3


def tool_version() -> str:
    try:
        return f"mlid {version('mlid')}"
    except PackageNotFoundError:
        return "mlid (unknown version)"


def sha256_of(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


class Run:
    """Tracks inputs and outputs of one command and writes its manifest."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[Path] = []
        self.seeds: dict[str, int] = {}
        self.extra: dict = {}

    def input(self, path: str | Path | None) -> str | Path | None:
        if path is not None:
            p = Path(path)
            if not p.is_file():
                raise InputError(f"input file not found: {path}")
            self.inputs[str(path)] = sha256_of(p)
        return path

    def output(self, path: str | Path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(p)
        return p

    def cleanup(self) -> None:
        for p in self.outputs:
            p.unlink(missing_ok=True)
        if self.manifest_path is not None:
            self.manifest_path.unlink(missing_ok=True)

    @property
    def manifest_path(self) -> Path | None:
        if self.args.manifest:
            return Path(self.args.manifest)
        if self.outputs:
            first = self.outputs[0]
            return first.with_name(first.name + ".manifest.json")
        return None

    def config(self) -> dict:
        skip = {"func", "config", "manifest"}
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in skip}

    def write_manifest(self) -> None:
        path = self.manifest_path
        if path is None:
            return
        manifest = {
            "command": self.args.command,
            "config": self.config(),
            "inputs": self.inputs,
            "seeds": self.seeds,
            "tool_version": tool_version(),
            "outputs": [str(p) for p in self.outputs],
            **self.extra,
        }
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")


def _pair(args) -> corpus_mod.LanguagePair:
    return corpus_mod.LanguagePair.parse(args.pair)


def _load_corpus(run: Run, args, path=None) -> corpus_mod.Corpus:
    path = path or args.corpus
    run.input(path)
    splits = getattr(args, "splits", None)
    run.input(splits)
    return corpus_mod.load_corpus(path, _pair(args), splits)


def _select(corpus: corpus_mod.Corpus, split: str | None) -> list[corpus_mod.Utterance]:
    return corpus.split(split) if split else list(corpus)


def _write_json(path: Path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _translation_lexicon(run: Run, args, pair) -> lexicon_mod.TranslationLexicon:
    if args.lexicon:
        run.input(args.lexicon)
        return lexicon_mod.load_translation_lexicon(args.lexicon, pair)
    return lexicon_mod.bundled_translation_lexicon(pair)


def _function_lexicons(run: Run, args) -> dict[str, lexicon_mod.FunctionWordLexicon]:
    run.input(args.function_lexicon)
    return lexicon_mod.load_function_lexicons(args.function_lexicon)


def _load_lm(run: Run, path) -> lm_mod.NGramLM:
    run.input(path)
    return lm_mod.NGramLM.load(path)


def _log_alpha(run: Run, args) -> float:
    if args.alpha:
        run.input(args.alpha)
        with open(args.alpha, encoding="utf-8") as fh:
            data = json.load(fh)
        return float(data["log_alpha"])
    return float(args.log_alpha)


def _reference_labels(run: Run, path: str) -> dict[str, str]:
    """Labels from a verdict JSONL or a truth CSV."""
    run.input(path)
    if str(path).endswith(".csv"):
        return synth_mod.read_truth(path)
    return metrics_mod.as_label_map(principles_mod.read_verdicts(path))


# -- subcommands ---------------------------------------------------------


def cmd_ingest(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    corpus_mod.dump_corpus(corpus, run.output(args.out))
    if corpus.splits:
        corpus_mod.dump_splits(corpus, run.output(Path(args.out).with_suffix(".splits.json")))
    counts = {k.value: sum(1 for u in corpus if u.kind is k) for k in corpus_mod.Kind}
    run.extra["counts"] = counts
    print(" ".join(f"{k}={v}" for k, v in counts.items()))


def cmd_annotate(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    pair = corpus.pair
    cs = corpus.code_switched()
    if args.principle == "p11":
        fn = principles_mod.determine_p11
    elif args.principle == "baseline":
        fn = principles_mod.determine_baseline
    elif args.principle == "p2":
        lexicons = _function_lexicons(run, args)

        def fn(u):
            return principles_mod.determine_p2(u, lexicons)
    else:
        if not args.lm1 or not args.lm2:
            raise InputError("--principle p12 needs --lm1 and --lm2")
        lex = _translation_lexicon(run, args, pair)
        lm1, lm2 = _load_lm(run, args.lm1), _load_lm(run, args.lm2)
        log_alpha = _log_alpha(run, args)
        run.extra["log_alpha"] = log_alpha
        scores = [p12_mod.score_utterance(u, lex, lm1, lm2) for u in cs]

        verdicts = [p12_mod.decide(s, log_alpha, pair.languages) for s in scores]
        principles_mod.write_verdicts(verdicts, run.output(args.out))
        if args.scores_out:
            p12_mod.write_scores(scores, run.output(args.scores_out))
        _summarize(corpus, verdicts, run)
        return
    verdicts = principles_mod.annotate(cs, fn, jobs=args.jobs)
    principles_mod.write_verdicts(verdicts, run.output(args.out))
    _summarize(corpus, verdicts, run)


def _summarize(corpus, verdicts, run: Run) -> None:
    if not verdicts:
        print("no code-switched utterances")
        return
    cov = metrics_mod.coverage_of(verdicts)
    run.extra["coverage"] = cov
    print(f"annotated {len(verdicts)} code-switched utterances, coverage {cov:.1%}")


def cmd_train_lm(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    pool = _select(corpus, args.split)
    lang = args.language
    mono = {u.id for u in corpus.monolingual(lang)}
    data = [u for u in pool if u.id in mono]
    if not data:
        raise InputError(f"no monolingual {lang!r} utterances to train on")
    model = lm_mod.train_lm(data, lang, order=args.order, min_count=args.min_count)
    model.save(run.output(args.out))
    run.extra["training_utterances"] = len(data)
    print(f"trained order-{args.order} {lang} LM on {len(data)} utterances, vocabulary {len(model.vocabulary)}")


def _mono_for_model(corpus, model, split):
    mono = {u.id for u in corpus.monolingual(model.language)}
    data = [u for u in _select(corpus, split) if u.id in mono]
    if not data:
        raise InputError(f"no monolingual {model.language!r} utterances to score")
    return data


def cmd_perplexity(args, run: Run) -> None:
    model = _load_lm(run, args.model)
    corpus = _load_corpus(run, args)
    data = _mono_for_model(corpus, model, args.split)
    ppl = lm_mod.perplexity(model, data)
    result = {"language": model.language, "utterances": len(data), "perplexity": ppl}
    if args.out:
        _write_json(run.output(args.out), result)
    print(f"perplexity {ppl:.4f} over {len(data)} utterances")


def cmd_wo_probe(args, run: Run) -> None:
    model = _load_lm(run, args.model)
    corpus = _load_corpus(run, args)
    run.seeds["probe"] = args.seed
    data = [u for u in _mono_for_model(corpus, model, args.split) if len(u) >= 2]
    if not data:
        raise InputError("no utterance with at least two words to probe")
    path = run.output(args.out)
    hits = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "original", "predicted", "correct"])
        for i, u in enumerate(data):
            seq = lm_mod.tokenize_morphemes(u, model.language)
            pred = lm_mod.word_order_probe(model, seq, args.max_permutations, args.seed + i)
            ok = pred.words() == seq.words()
            hits += ok
            writer.writerow([u.id, " ".join(seq.morphemes), " ".join(pred.morphemes), int(ok)])
    acc = hits / len(data)
    run.extra["accuracy"] = acc
    print(f"word-order probe accuracy {acc:.1%} over {len(data)} utterances")


def cmd_translate(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    lex = _translation_lexicon(run, args, corpus.pair)
    path = run.output(args.out)
    total_oov = 0
    with open(path, "w", encoding="utf-8") as fh:
        for u in _select(corpus, args.split):
            words, oov = lexicon_mod.translate_word_by_word(u, args.target, lex)
            total_oov += oov
            rec = {"id": u.id, "target": args.target, "tokens": words, "oov": oov}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    run.extra["oov_total"] = total_oov
    print(f"translated into {args.target}; {total_oov} out-of-vocabulary tokens")


def cmd_estimate_alpha(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    lm1, lm2 = _load_lm(run, args.lm1), _load_lm(run, args.lm2)
    pool = {u.id for u in _select(corpus, args.split)}
    mono1 = [u for u in corpus.monolingual(corpus.pair.l1) if u.id in pool]
    mono2 = [u for u in corpus.monolingual(corpus.pair.l2) if u.id in pool]
    est = p12_mod.estimate_alpha(mono1, mono2, lm1, lm2, args.normalization)
    _write_json(run.output(args.out), est.to_dict())
    run.extra["alpha"] = est.to_dict()
    print(f"log alpha = {est.log_alpha:.6f} ({args.normalization}, n1={est.n1}, n2={est.n2})")


def cmd_det(args, run: Run) -> None:
    run.input(args.scores)
    scores = p12_mod.read_scores(args.scores)
    ref = _reference_labels(run, args.reference)
    pair = _pair(args)
    kept = [s for s in scores if ref.get(s.id) in pair.languages]
    if not kept:
        raise InputError("no scored utterance has a determined reference label")
    points = p12_mod.det_curve(kept, [ref[s.id] for s in kept], pair.languages)
    p12_mod.write_det(points, run.output(args.out))
    print(f"{len(points)} DET points from {len(kept)} utterances")


def _dataset(args, run: Run):
    corpus = _load_corpus(run, args)
    run.input(args.posteriors)
    posteriors = mapping_mod.load_posteriors(args.posteriors)
    verdicts = None
    if args.source != "lid":
        if not args.verdicts:
            raise InputError(f"--verdicts is required for source {args.source!r}")
        verdicts = _reference_labels(run, args.verdicts)
    return mapping_mod.assemble_dataset(corpus, posteriors, args.source, verdicts)


def _train_kwargs(args) -> dict:
    return {
        "hidden": args.hidden,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "patience": args.patience,
        "balance_classes": not args.no_balance,
    }


def cmd_train_map(args, run: Run) -> None:
    dataset = _dataset(args, run)
    run.seeds["init"] = args.seed
    model = mapping_mod.train_mapping(dataset, seed=args.seed, **_train_kwargs(args))
    model.hyperparameters["provenance"] = dataset.provenance.value
    model.save(run.output(args.out))
    print(f"trained mapping on {len(dataset)} samples, final loss {model.loss_history[-1]:.4f}")


_MAP_PRINCIPLE = {
    "lid": principles_mod.LID_MAP,
    "p11": principles_mod.MLID_P11,
    "p12": principles_mod.MLID_P12,
    "p2": principles_mod.MLID_P2,
}


def cmd_predict_map(args, run: Run) -> None:
    run.input(args.model)
    model = mapping_mod.MappingModel.load(args.model)
    run.input(args.posteriors)
    posteriors = mapping_mod.load_posteriors(args.posteriors)
    name = _MAP_PRINCIPLE[model.hyperparameters.get("provenance", "lid")]
    verdicts = []
    rows = []
    for uid, rec in posteriors.items():
        label, probs = mapping_mod.predict(model, rec)
        verdicts.append(principles_mod.MLVerdict(uid, name, label))
        rows.append([uid, label, repr(float(probs[0])), repr(float(probs[1]))])
    principles_mod.write_verdicts(verdicts, run.output(args.out))
    if args.probs_out:
        with open(run.output(args.probs_out), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", "label", f"p_{model.classes[0]}", f"p_{model.classes[1]}"])
            writer.writerows(rows)
    print(f"predicted {len(verdicts)} utterances with {name}")


def cmd_cv_map(args, run: Run) -> None:
    dataset = _dataset(args, run)
    run.seeds["folds"] = args.seed
    result = mapping_mod.cross_validate(dataset, k=args.k, seed=args.seed, **_train_kwargs(args))
    _write_json(run.output(args.out), result.to_dict())
    folds = ", ".join(f"{f:.3f}" for f in result.fold_f1)
    print(f"{args.k}-fold F1-macro: mean {result.mean_f1:.4f} (folds: {folds})")


def _verdict_sets(run: Run, specs: Sequence[str]) -> dict[str, dict[str, str]]:
    """Parse ``name=path`` or bare ``path`` (named after its principle)."""
    sets: dict[str, dict[str, str]] = {}
    for spec in specs:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = "", spec
        run.input(path)
        verdicts = principles_mod.read_verdicts(path)
        if not name:
            name = verdicts[0].principle if verdicts else Path(path).stem
        if name in sets:
            name = f"{name}@{Path(path).stem}"
        sets[name] = metrics_mod.as_label_map(verdicts)
    return sets


def cmd_eval(args, run: Run) -> None:
    sets = _verdict_sets(run, args.verdicts)
    lines = []
    for name, labels in sets.items():
        lines.append(f"coverage {name}: {metrics_mod.coverage_of(labels):.1%}")
    if len(sets) >= 2:
        matrix = metrics_mod.agreement_matrix(sets, with_unknown=args.with_unknown)
        matrix.to_csv(run.output(args.out))
        lines.append("MCC agreement" + (" (unknown classes)" if args.with_unknown else " (covered pairs)"))
        lines.append(matrix.to_text())
    if args.truth:
        truth = _reference_labels(run, args.truth)
        rows = []
        for name, labels in sets.items():
            ids = sorted(i for i in labels if i in truth)
            if args.with_unknown:
                pred = [labels[i] for i in ids]
            else:
                ids = [i for i in ids if labels[i] != principles_mod.UNDETERMINED]
                pred = [labels[i] for i in ids]
            gold = [truth[i] for i in ids]
            if len(ids) < 2:
                continue
            f1 = metrics_mod.f1_macro(pred, gold, sorted(set(truth.values())))
            m = metrics_mod.mcc_with_unknown(pred, gold, (name, "truth")) if args.with_unknown else metrics_mod.mcc(pred, gold)
            rows.append([name, len(ids), f1, m])
            lines.append(f"{name} vs truth: n={len(ids)} F1-macro={f1:.4f} MCC={m:.4f}")
        if len(sets) < 2:
            path = run.output(args.out)
        else:
            path = run.output(Path(args.out).with_suffix(".truth.csv"))
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["system", "n", "f1_macro", "mcc"])
            writer.writerows([[r[0], r[1], f"{r[2]:.6f}", f"{r[3]:.6f}"] for r in rows])
    elif len(sets) < 2:
        raise InputError("eval needs two verdict files or --truth")
    print("\n".join(lines))


def cmd_report(args, run: Run) -> None:
    corpus = _load_corpus(run, args)
    sets = _verdict_sets(run, args.verdicts or [])
    report = metrics_mod.distribution_report(corpus, sets)
    report.to_csv(run.output(args.out))
    print(report.to_text())


def cmd_synth(args, run: Run) -> None:
    pair = _pair(args)
    grammars = synth_mod.make_grammar_pair(pair, args.word_order, seed=args.grammar_seed)
    spec = synth_mod.SynthSpec(
        grammars,
        count=args.count,
        rate=args.rate,
        matrix_language=args.matrix_language,
        p_l1=args.p_l1,
        singleton_only=args.singleton_only,
        seed=args.seed,
    )
    run.seeds.update({"grammar": args.grammar_seed, "corpus": args.seed})
    corpus, truth = synth_mod.generate(spec)
    lex, fn_lex = synth_mod.generate_lexicons(spec)
    out = Path(args.out_dir)
    corpus_mod.dump_corpus(corpus, run.output(out / "corpus.jsonl"))
    lexicon_mod.dump_translation_lexicon(lex, run.output(out / "lexicon.tsv"))
    lexicon_mod.dump_function_lexicons(fn_lex, run.output(out / "function_words.tsv"))
    synth_mod.write_truth(truth, corpus, run.output(out / "truth.csv"))
    cs = len(corpus.code_switched())
    print(f"generated {len(corpus)} utterances ({cs} code-switched) in {out}")


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlid", description="Matrix language identification for code-switched text.")
    parser.add_argument("--version", action="version", version=tool_version())
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pair", default="en,zh", help="language pair L1,L2 (default: en,zh)")
    common.add_argument("--config", help="JSON file of option defaults; flags override it")
    common.add_argument("--manifest", help="manifest path (default: <first output>.manifest.json)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for per-utterance work")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    def corpus_args(p, splits=True):
        p.add_argument("--corpus", required=True, help="JSONL corpus")
        if splits:
            p.add_argument("--splits", help="JSON file mapping split names to utterance ids")
            p.add_argument("--split", help="restrict to one named split")

    p = add("ingest", cmd_ingest, "load, script-tag and classify a corpus")
    corpus_args(p)
    p.add_argument("--out", required=True)

    p = add("annotate", cmd_annotate, "determine the matrix language of code-switched utterances")
    corpus_args(p)
    p.add_argument("--principle", required=True, choices=["p11", "p2", "baseline", "p12"])
    p.add_argument("--function-lexicon", help="function-word TSV (default: bundled en/zh/es lists)")
    p.add_argument("--lexicon", help="translation TSV (default: bundled lexicon for the pair)")
    p.add_argument("--lm1", help="L1 language model (p12)")
    p.add_argument("--lm2", help="L2 language model (p12)")
    p.add_argument("--log-alpha", type=float, default=0.0, help="decision threshold (p12, default 0)")
    p.add_argument("--alpha", help="JSON from estimate-alpha; overrides --log-alpha")
    p.add_argument("--scores-out", help="also write the p12 score CSV here")
    p.add_argument("--out", required=True)

    p = add("train-lm", cmd_train_lm, "train a morpheme n-gram LM on monolingual utterances")
    corpus_args(p)
    p.add_argument("--language", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--min-count", type=int, default=2)
    p.add_argument("--seed", type=int, default=0, help="unused by training; recorded for uniformity")
    p.add_argument("--out", required=True)

    p = add("perplexity", cmd_perplexity, "LM perplexity on monolingual utterances")
    corpus_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out")

    p = add("wo-probe", cmd_wo_probe, "recover the original word order among permutations")
    corpus_args(p)
    p.add_argument("--model", required=True)
    p.add_argument("--max-permutations", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("translate", cmd_translate, "word-by-word translation into one language")
    corpus_args(p)
    p.add_argument("--lexicon")
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)

    p = add("estimate-alpha", cmd_estimate_alpha, "estimate log alpha from monolingual utterances")
    corpus_args(p)
    p.add_argument("--lm1", required=True)
    p.add_argument("--lm2", required=True)
    p.add_argument("--normalization", choices=[n.value for n in p12_mod.Normalization], default="total")
    p.add_argument("--out", required=True)

    p = add("det", cmd_det, "DET curve points from p12 scores and reference labels")
    p.add_argument("--scores", required=True, help="score CSV written by annotate --scores-out")
    p.add_argument("--reference", required=True, help="verdict JSONL or truth CSV")
    p.add_argument("--out", required=True)

    def map_args(p):
        corpus_args(p)
        p.add_argument("--posteriors", required=True, help="CSV id,p_0..p_{D-1}")
        p.add_argument("--source", required=True, choices=[s.value for s in mapping_mod.Provenance])
        p.add_argument("--verdicts", help="verdict JSONL providing pseudo-labels (p11/p12/p2)")
        p.add_argument("--hidden", type=int, default=mapping_mod.DEFAULTS["hidden"])
        p.add_argument("--epochs", type=int, default=mapping_mod.DEFAULTS["epochs"])
        p.add_argument("--lr", type=float, default=mapping_mod.DEFAULTS["learning_rate"])
        p.add_argument("--patience", type=int, default=mapping_mod.DEFAULTS["patience"])
        p.add_argument("--no-balance", action="store_true", help="disable inverse-frequency weighting")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)

    map_args(add("train-map", cmd_train_map, "train a posterior-to-language mapping"))
    p = add("cv-map", cmd_cv_map, "stratified k-fold cross-validation of the mapping")
    map_args(p)
    p.add_argument("--k", type=int, default=5)

    p = add("predict-map", cmd_predict_map, "apply a trained mapping to posteriors")
    p.add_argument("--model", required=True)
    p.add_argument("--posteriors", required=True)
    p.add_argument("--probs-out")
    p.add_argument("--out", required=True)

    p = add("eval", cmd_eval, "coverage, MCC agreement matrix and F1/MCC against truth")
    p.add_argument("--verdicts", nargs="+", required=True, help="verdict JSONL files, optionally name=path")
    p.add_argument("--truth", help="truth CSV or verdict JSONL with reference labels")
    p.add_argument("--with-unknown", action="store_true", help="keep undetermined labels as unknown classes")
    p.add_argument("--out", required=True)

    p = add("report", cmd_report, "language distributions and M-index")
    corpus_args(p)
    p.add_argument("--verdicts", nargs="*", help="verdict JSONL files, optionally name=path")
    p.add_argument("--out", required=True)

    p = add("synth", cmd_synth, "generate a synthetic corpus with lexicons and ground truth")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--word-order", choices=["distinct", "same"], default="distinct")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--rate", type=float, default=0.3)
    p.add_argument("--matrix-language", help="fix the matrix language instead of sampling it")
    p.add_argument("--p-l1", type=float, default=0.5)
    p.add_argument("--singleton-only", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grammar-seed", type=int, default=0)

    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise InputError("config must be a JSON object")
        subparser = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
        known = {a.dest for a in subparser._actions}  # noqa: SLF001
        unknown = sorted(set(config) - known)
        if unknown:
            raise InputError(f"unknown config keys for {args.command}: {unknown}")
        subparser.set_defaults(**config)
        args = parser.parse_args(argv)
    return args


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = parse_args(argv)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    run = Run(args)
    try:
        args.func(args, run)
        run.write_manifest()
    except (InputError, OSError, ValueError) as exc:
        run.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ComputationError, ArithmeticError) as exc:
        run.cleanup()
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
