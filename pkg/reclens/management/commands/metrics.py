from reclens.attribution import attribute
from reclens.metrics import bucket_all, compute_all
from reclens.report import daily_table, metrics_table

from ._base import ReclensCommand


class Command(ReclensCommand):
    help = "Attribute actions to hits and print the six through-rate metrics."

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_window_arguments(parser)
        self.add_threads_argument(parser)
        self.add_output_arguments(parser)
        parser.add_argument(
            "--daily", action="store_true", help="Also print the per-day series.",
        )

    def run(self, **options):
        windows = self.window_config(options)
        log = self.read_log(options)
        attr = attribute(log, windows, n_jobs=self.threads(options))
        metrics = compute_all(attr)
        daily = bucket_all(attr, log, windows.tz_offset)

        data = {
            "source_name": log.source_name,
            "windows": windows.to_dict(),
            "metrics": [value.to_dict() for value in metrics],
            "unattributed_actions": {
                kind.value: count for kind, count in attr.unattributed_actions.items()
            },
        }
        text = metrics_table(metrics) + "\n"
        if options["daily"]:
            data["daily"] = {
                kind.value: [
                    {"date": day.isoformat(), "successes": v.successes, "trials": v.trials}
                    for day, v in series.days
                ]
                for kind, series in daily.items()
            }
            text += "\n" + daily_table(daily) + "\n"
        self.emit(options, data, text)
