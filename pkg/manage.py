#!/usr/bin/env python
"""reclens command-line utility; see reclens/cli.py for the subcommands."""
import os
import sys


def main():
    """Run one reclens subcommand."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "reclens_site.settings")
    try:
        import django  # noqa: F401
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    from reclens.cli import run

    sys.exit(run(sys.argv))


if __name__ == "__main__":
    main()
