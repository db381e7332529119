from reclens.events import dump_log
from reclens.filters import simulate_filters
from reclens.report import filter_table

from ._base import ReclensCommand


class Command(ReclensCommand):
    help = (
        "Replay a log through the recommendation filters and report how many "
        "products they remove and how CTR changes."
    )
    default_format = "json"

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_window_arguments(parser)
        self.add_filter_arguments(parser)
        parser.add_argument(
            "--counterfactual", metavar="PATH",
            help="Also write the filtered log as JSON Lines.",
        )
        self.add_threads_argument(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        windows = self.window_config(options)
        cfg = self.filter_config(options)
        log = self.read_log(options)
        impact = simulate_filters(log, cfg, windows, n_jobs=self.threads(options))
        if options["counterfactual"]:
            with self.output({"output": options["counterfactual"]}) as out:
                dump_log(impact.counterfactual_log, out)
        self.emit(options, impact.to_dict(), filter_table(impact) + "\n")
