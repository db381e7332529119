from django.core.management.base import CommandError

from reclens.report import build_report, render_json, render_table

from ._base import USAGE_ERROR, ReclensCommand
from .ttest import parse_pair


class Command(ReclensCommand):
    help = "Full evaluation: metrics, t-tests, correlation, behavior and optional filter impact."

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_window_arguments(parser)
        parser.add_argument(
            "--pair", action="append", default=[], metavar="A,B",
            help="Extra metric pair to t-test, on top of the two default pairs.",
        )
        parser.add_argument(
            "--filters", action="store_true", help="Include the filter simulation.",
        )
        self.add_filter_arguments(parser)
        parser.add_argument(
            "--bounce-threshold", type=float, metavar="X",
            help="Clicks per customer below which bouncing is flagged.",
        )
        self.add_threads_argument(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        try:
            pairs = [parse_pair(value) for value in options["pair"]]
        except ValueError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)
        windows = self.window_config(options)
        wants_filters = (
            options["filters"] or options["no_clicked_today"] or options["no_atc_filter"]
            or options["atc_days"] is not None
        )
        filter_cfg = self.filter_config(options) if wants_filters else None
        log = self.read_log(options)
        report = build_report(
            log, windows, pairs=pairs, filter_cfg=filter_cfg,
            bounce_threshold=options["bounce_threshold"], n_jobs=self.threads(options),
        )
        fmt = options["format"]
        with self.output(options) as out:
            if fmt in ("table", "both"):
                out.write(render_table(report))
            if fmt == "both":
                out.write("\n")
            if fmt in ("json", "both"):
                out.write(render_json(report))
