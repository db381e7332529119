import sys

from reclens.cli import run

sys.exit(run(sys.argv))
