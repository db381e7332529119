from django.core.management.base import CommandError

from reclens.attribution import attribute
from reclens.metrics import MetricKind, bucket_all
from reclens.report import PAPER_PAIRS, ttest_table
from reclens.stats import compare_metrics

from ._base import USAGE_ERROR, ReclensCommand


def parse_pair(value):
    first, sep, second = value.partition(",")
    if not sep:
        raise ValueError(f"expected two metrics separated by a comma, got {value!r}")
    return MetricKind.parse(first), MetricKind.parse(second)


class Command(ReclensCommand):
    help = (
        "Two-sample t-tests between metrics: CTR vs CTR-NoRepeat and BTR vs "
        "Click & Buy unless --pair is given."
    )

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_window_arguments(parser)
        parser.add_argument(
            "--pair", action="append", default=[], metavar="A,B",
            help="Metrics to compare, e.g. CTR,CTR-NoRepeat. Repeatable.",
        )
        self.add_threads_argument(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        try:
            pairs = [parse_pair(value) for value in options["pair"]] or list(PAPER_PAIRS)
        except ValueError as exc:
            raise CommandError(str(exc), returncode=USAGE_ERROR)
        windows = self.window_config(options)
        log = self.read_log(options)
        attr = attribute(log, windows, n_jobs=self.threads(options))
        daily = bucket_all(attr, log, windows.tz_offset)
        reports = [compare_metrics(daily[a], daily[b]) for a, b in pairs]
        text = "\n\n".join(ttest_table(r) for r in reports) + "\n"
        self.emit(options, {"ttests": [r.to_dict() for r in reports]}, text)
