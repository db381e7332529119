"""
Shared plumbing for the reclens management commands: common flags, config
validation, log loading, output handling and error mapping.
"""

import json
import logging
from contextlib import contextmanager
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
from joblib import cpu_count

from reclens.events import load_log
from reclens.exceptions import InvalidConfig, ReclensError
from reclens.forms import FilterConfigForm, WindowConfigForm, bind

logger = logging.getLogger(__name__)

# exit codes
INPUT_ERROR = 1
USAGE_ERROR = 2


class ReclensCommand(BaseCommand):
    requires_system_checks = []
    default_format = "table"

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.prog = f"reclens {subcommand.replace('_', '-')}"
        return parser

    # argument groups

    def add_input_argument(self, parser):
        parser.add_argument(
            "--input", required=True, metavar="PATH",
            help="JSON Lines event log; '-' reads standard input.",
        )

    def add_window_arguments(self, parser):
        group = parser.add_argument_group("attribution windows")
        group.add_argument("--click-window", metavar="DURATION", help="Click window (default 5m).")
        group.add_argument("--atc-window", metavar="DURATION", help="Add-to-cart window (default 30m).")
        group.add_argument("--buy-window", metavar="DURATION", help="Buy window (default 24h).")
        group.add_argument(
            "--norepeat-scope", choices=["log", "day"],
            help="Scope of first-click deduplication (default log).",
        )
        group.add_argument(
            "--candb-leg", choices=["click", "atc"],
            help="Action that opens a Click & Buy chain (default click).",
        )
        group.add_argument(
            "--tz-offset", metavar="OFFSET",
            help="UTC offset for day boundaries, e.g. +02:00 (default RECLENS_TZ_OFFSET).",
        )

    def add_filter_arguments(self, parser):
        group = parser.add_argument_group("recommendation filters")
        group.add_argument(
            "--no-clicked-today", action="store_true",
            help="Keep products the customer already clicked that day.",
        )
        group.add_argument(
            "--atc-days", type=int, metavar="N",
            help="Trailing add-to-cart window in days (default 7, 0 disables).",
        )
        group.add_argument(
            "--no-atc-filter", action="store_true",
            help="Keep products the customer recently added to cart.",
        )

    def add_output_arguments(self, parser, formats=True):
        parser.add_argument(
            "--output", default="-", metavar="PATH",
            help="Where to write the result; '-' is standard output.",
        )
        if formats:
            parser.add_argument(
                "--format", choices=["json", "table", "both"], default=self.default_format,
                help=f"Output format (default {self.default_format}).",
            )

    def add_threads_argument(self, parser):
        parser.add_argument(
            "--threads", type=int, metavar="N",
            help="Worker processes (default RECLENS_THREADS, else every core).",
        )

    # option handling

    def window_config(self, options):
        return bind(WindowConfigForm, {
            "click_window": options.get("click_window"),
            "atc_window": options.get("atc_window"),
            "buy_window": options.get("buy_window"),
            "norepeat_scope": options.get("norepeat_scope"),
            "candb_leg": options.get("candb_leg"),
            "tz_offset": options.get("tz_offset"),
        }).to_config()

    def filter_config(self, options):
        return bind(FilterConfigForm, {
            "clicked_today": False if options.get("no_clicked_today") else None,
            "atc_window_days": options.get("atc_days"),
            "atc_filter_enabled": False if options.get("no_atc_filter") else None,
            "tz_offset": options.get("tz_offset"),
        }).to_config()

    def threads(self, options):
        threads = options.get("threads")
        if threads is None:
            threads = settings.RECLENS_THREADS or cpu_count()
        if threads < 1:
            raise CommandError("--threads must be at least 1", returncode=USAGE_ERROR)
        return threads

    def read_log(self, options):
        return load_log(options["input"])

    # output

    @contextmanager
    def output(self, options):
        target = options.get("output", "-")
        if target == "-":
            previous = self.stdout.ending
            self.stdout.ending = ""
            try:
                yield self.stdout
            finally:
                self.stdout.ending = previous
            return
        try:
            with Path(target).open("w", encoding="utf-8", newline="\n") as handle:
                yield handle
        except OSError as exc:
            raise CommandError(f"cannot write {target}: {exc.strerror}", returncode=INPUT_ERROR)

    def emit(self, options, data, text):
        """Writes `data` as JSON, `text` as a table, or both."""
        fmt = options.get("format", "json")
        with self.output(options) as out:
            if fmt in ("table", "both"):
                out.write(text)
            if fmt == "both":
                out.write("\n")
            if fmt in ("json", "both"):
                out.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")

    # execution

    def handle(self, *args, **options):
        try:
            self.run(**options)
        except InvalidConfig as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)
        except ReclensError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)

    def run(self, **options):
        raise NotImplementedError
