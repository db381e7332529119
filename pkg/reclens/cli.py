"""
Single command-line entry point.

`reclens <subcommand> [flags]` maps onto the management commands of this
app. Exit codes: 0 success, 1 input error, 2 usage error.
"""

import os
import sys
from pathlib import Path

SUBCOMMANDS = {
    "validate": "validate",
    "metrics": "metrics",
    "ttest": "ttest",
    "correlate": "correlate",
    "behavior": "behavior",
    "filter-sim": "filter_sim",
    "generate": "generate",
    "report": "report",
    "convert-csv": "convert_csv",
}

SYNOPSIS = """\
usage: reclens <subcommand> [options]

subcommands:
  validate      check a log and summarize it
  metrics       CTR, CTR-NoRepeat, ATC-TR, ATC-TR-NoRepeat, BTR, Click & Buy
  ttest         two-sample t-tests between metrics
  correlate     Pearson correlation of daily metric series
  behavior      behavior indicators of recommended customers
  filter-sim    replay the recommendation filters over a log
  generate      write a seeded synthetic log
  report        everything above in one report
  convert-csv   convert a CSV export to JSON Lines

Run 'reclens <subcommand> --help' for the flags of a subcommand.
"""


def run(argv):
    """Runs one subcommand and returns its exit code."""
    args = list(argv[1:])
    if args and args[0] in ("-h", "--help", "help"):
        sys.stdout.write(SYNOPSIS)
        return 0
    if not args or args[0] not in SUBCOMMANDS:
        if args:
            sys.stderr.write(f"reclens: unknown subcommand {args[0]!r}\n")
        sys.stderr.write(SYNOPSIS)
        return 2

    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "reclens_site.settings")
    from django.core.management import execute_from_command_line

    prog = Path(argv[0]).name if argv else "reclens"
    try:
        execute_from_command_line([prog, SUBCOMMANDS[args[0]], *args[1:]])
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0
