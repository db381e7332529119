from tabulate import tabulate

from reclens.events import format_timestamp, validate_log

from ._base import ReclensCommand


class Command(ReclensCommand):
    help = "Parse an event log and report counts, time span and warnings."

    def add_arguments(self, parser):
        self.add_input_argument(parser)
        self.add_output_arguments(parser)

    def run(self, **options):
        report = validate_log(self.read_log(options))
        rows = [[name, value] for name, value in report.counts().items()]
        rows.append(["customers", report.customers])
        if report.first_ts is not None:
            rows.append(["first event", format_timestamp(report.first_ts)])
            rows.append(["last event", format_timestamp(report.last_ts)])
        text = tabulate(rows, headers=["field", "value"], tablefmt="simple", disable_numparse=True)
        if report.warnings:
            warnings = [[w.message, w.count, w.example] for w in report.warnings]
            text += "\n\n" + tabulate(
                warnings, headers=["warning", "count", "example"], tablefmt="simple",
                disable_numparse=True,
            )
        self.emit(options, report.to_dict(), text + "\n")
