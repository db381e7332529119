import json

from django.core.management.base import CommandError

from reclens.events import dump_log
from reclens.forms import GeneratorConfigForm, bind, load_generator_file
from reclens.generator import PRESETS, generate, verify_ground_truth

from ._base import INPUT_ERROR, ReclensCommand

# flags that map one to one onto generator settings
PARAMETERS = (
    ("seed", int), ("customers", int), ("days", int),
    ("hits_per_customer_per_day", float), ("products_per_hit", int), ("catalog_size", int),
    ("click_prob", float), ("repeat_click_prob", float), ("atc_given_click_prob", float),
    ("buy_given_click_prob", float), ("stray_buy_prob", float),
    ("latency_quantile_in_window", float), ("engagement_jitter", float),
    ("repeat_jitter", float),
)


class Command(ReclensCommand):
    help = "Write a seeded synthetic event log with known metric rates."

    def add_arguments(self, parser):
        parser.add_argument("--preset", choices=sorted(PRESETS), help="Start from a preset.")
        parser.add_argument(
            "--config", metavar="PATH", help="YAML or JSON file with generator settings.",
        )
        for name, kind in PARAMETERS:
            parser.add_argument(f"--{name.replace('_', '-')}", type=kind, dest=name)
        parser.add_argument("--start", metavar="TIMESTAMP", help="First day, RFC 3339.")
        parser.add_argument("--click-window", metavar="DURATION")
        parser.add_argument("--atc-window", metavar="DURATION")
        parser.add_argument("--buy-window", metavar="DURATION")
        parser.add_argument(
            "--verify", action="store_true",
            help="Check the measured metrics against the expected ones on standard error.",
        )
        self.add_threads_argument(parser)
        self.add_output_arguments(parser, formats=False)

    def run(self, **options):
        data = load_generator_file(options["config"]) if options["config"] else {}
        for name in ("preset", "start", "click_window", "atc_window", "buy_window") + tuple(
            name for name, _ in PARAMETERS
        ):
            if options.get(name) is not None:
                data[name] = options[name]
        cfg = bind(GeneratorConfigForm, data).to_config()
        n_jobs = self.threads(options)
        log, truth = generate(cfg, n_jobs=n_jobs)
        with self.output(options) as out:
            dump_log(log, out)
        if options["verify"]:
            report = verify_ground_truth(log, truth, n_jobs=n_jobs)
            self.stderr.write(json.dumps(report.to_dict(), indent=2))
            if not report.passed:
                raise CommandError(
                    "generated log is outside its expected bands", returncode=INPUT_ERROR
                )
