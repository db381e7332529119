from reclens.events import convert_csv

from ._base import ReclensCommand


class Command(ReclensCommand):
    help = "Convert a flat CSV export into a canonical JSON Lines event log."

    def add_arguments(self, parser):
        parser.add_argument(
            "--input", required=True, metavar="PATH",
            help="CSV with columns type,hit_id,customer,widget,ts,products,product.",
        )
        self.add_output_arguments(parser, formats=False)

    def run(self, **options):
        with self.output(options) as out:
            convert_csv(options["input"], out)
