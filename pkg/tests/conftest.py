from pathlib import Path

import pytest

from mlid.corpus import LanguagePair, load_corpus, make_utterance

DATA = Path(__file__).parent / "data"


@pytest.fixture
def en_zh():
    return LanguagePair("en", "zh")


@pytest.fixture
def worked_examples_path():
    return DATA / "worked_examples.jsonl"


@pytest.fixture
def worked_examples(en_zh, worked_examples_path):
    return load_corpus(worked_examples_path, en_zh).by_id()


@pytest.fixture
def utt(en_zh):
    """Build a script-tagged utterance from whitespace-separated text."""

    def _make(text, uid="u", pair=None):
        return make_utterance(uid, text.split(), pair or en_zh)

    return _make


# -- acceptance reporting ----------------------------------------------------

_ACCEPTANCE: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when not in ("setup", "call"):
        return
    number, title = marker.args
    if report.when == "call" or report.failed:
        _ACCEPTANCE[number] = (title, report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}")
