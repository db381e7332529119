from reclens.behavior import behavior_report, bounce_indicator
from reclens.report import behavior_table

from ._base import ReclensCommand


class Command(ReclensCommand):
    help = "Behavior indicators of the customers who were shown recommendations."

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        parser.add_argument(
            "--bounce-threshold", type=float, metavar="X",
            help="Clicks per customer below which bouncing is flagged "
                 "(default RECLENS_BOUNCE_THRESHOLD).",
        )
        self.add_output_arguments(parser)

    def run(self, **options):
        report = behavior_report(self.read_log(options))
        bounce = bounce_indicator(report, options["bounce_threshold"])
        data = {**report.to_dict(), "bounce_indicator": bounce}
        self.emit(options, data, behavior_table(report, bounce) + "\n")
