from django.core.management.base import CommandError

from reclens.attribution import attribute
from reclens.metrics import MetricKind, bucket_all
from reclens.report import correlation_table
from reclens.stats import DEFAULT_CORRELATION_KINDS, correlation_matrix

from ._base import USAGE_ERROR, ReclensCommand


class Command(ReclensCommand):
    help = "Pearson correlation between daily metric series."

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_window_arguments(parser)
        parser.add_argument(
            "--metrics", metavar="LIST",
            help="Comma-separated metrics (default CTR,CTR-NoRepeat,BTR,Click & Buy).",
        )
        self.add_threads_argument(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        kinds = DEFAULT_CORRELATION_KINDS
        if options["metrics"]:
            try:
                kinds = tuple(MetricKind.parse(name) for name in options["metrics"].split(","))
            except ValueError as exc:
                raise CommandError(str(exc), returncode=USAGE_ERROR)
        windows = self.window_config(options)
        log = self.read_log(options)
        attr = attribute(log, windows, n_jobs=self.threads(options))
        daily = bucket_all(attr, log, windows.tz_offset, kinds)
        matrix = correlation_matrix([daily[kind] for kind in kinds])
        self.emit(options, matrix.to_dict(), correlation_table(matrix) + "\n")
