import sys

from mlid.cli import main

sys.exit(main())
