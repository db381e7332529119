"""
Assembles every evaluation output into one EvaluationReport and renders it.

JSON is the machine contract: keys come out in a fixed order, optional
sections are omitted rather than null-filled, and `report_from_json`
rebuilds the exact report so that render -> parse -> render is stable.
The text rendering is for people and rounds for display only.
"""

import json
import logging
from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

from tabulate import tabulate

from .attribution import WindowConfig, attribute
from .behavior import BehaviorReport, behavior_report, bounce_indicator
from .exceptions import EmptyPopulation, InvalidSample, LengthMismatch, SeriesMismatch
from .filters import FilterImpactReport, simulate_filters
from .metrics import DailyMetricSeries, MetricKind, MetricValue, bucket_all, compute_all
from .stats import (
    DEFAULT_CORRELATION_KINDS, CorrelationMatrix, TTestReport, compare_metrics,
    correlation_matrix,
)

logger = logging.getLogger(__name__)

PAPER_PAIRS = (
    (MetricKind.CTR, MetricKind.CTR_NoRepeat),
    (MetricKind.BTR, MetricKind.ClickAndBuy),
)
P_VALUE_FLOOR = 1e-12


@dataclass(frozen=True)
class EvaluationReport:
    source_name: str
    first_day: date
    last_day: date
    windows: WindowConfig
    metrics: tuple
    daily: dict
    ttests: tuple = ()
    correlation: Optional[CorrelationMatrix] = None
    behavior: Optional[BehaviorReport] = None
    filter_impact: Optional[FilterImpactReport] = None
    bounce: Optional[bool] = field(default=None)

    def metric(self, kind):
        for value in self.metrics:
            if value.kind is kind:
                return value
        raise KeyError(kind)

    def to_dict(self):
        data = {
            "source_name": self.source_name,
            "date_range": [self.first_day.isoformat(), self.last_day.isoformat()],
            "windows": self.windows.to_dict(),
            "metrics": [value.to_dict() for value in self.metrics],
            "daily": {
                kind.value: [
                    {"date": day.isoformat(), "successes": v.successes, "trials": v.trials}
                    for day, v in series.days
                ]
                for kind, series in self.daily.items()
            },
            "ttests": [t.to_dict() for t in self.ttests],
        }
        if self.correlation is not None:
            data["correlation"] = self.correlation.to_dict()
        if self.behavior is not None:
            data["behavior"] = self.behavior.to_dict()
            data["bounce_indicator"] = self.bounce
        if self.filter_impact is not None:
            data["filter_impact"] = self.filter_impact.to_dict()
        return data

    @classmethod
    def from_dict(cls, data):
        daily = {}
        for name, days in data["daily"].items():
            kind = MetricKind(name)
            daily[kind] = DailyMetricSeries(kind, tuple(
                (date.fromisoformat(d["date"]), MetricValue(kind, d["successes"], d["trials"]))
                for d in days
            ))
        first, last = data["date_range"]
        return cls(
            source_name=data["source_name"],
            first_day=date.fromisoformat(first),
            last_day=date.fromisoformat(last),
            windows=WindowConfig.from_dict(data["windows"]),
            metrics=tuple(
                MetricValue(MetricKind(m["kind"]), m["successes"], m["trials"])
                for m in data["metrics"]
            ),
            daily=daily,
            ttests=tuple(TTestReport.from_dict(t) for t in data["ttests"]),
            correlation=(
                CorrelationMatrix.from_dict(data["correlation"]) if "correlation" in data else None
            ),
            behavior=BehaviorReport.from_dict(data["behavior"]) if "behavior" in data else None,
            filter_impact=(
                FilterImpactReport.from_dict(data["filter_impact"])
                if "filter_impact" in data else None
            ),
            bounce=data.get("bounce_indicator"),
        )


def build_report(
    log, windows=None, pairs=(), filter_cfg=None, correlation_kinds=DEFAULT_CORRELATION_KINDS,
    bounce_threshold=None, n_jobs=1,
):
    """
    Runs the whole pipeline over a normalized log. Sections that cannot be
    computed for this log (too few days to correlate, no recommended
    customers) are skipped with a warning.
    """
    windows = windows or WindowConfig()
    attr = attribute(log, windows, n_jobs=n_jobs)
    metrics = tuple(compute_all(attr))
    daily = bucket_all(attr, log, windows.tz_offset)
    days = daily[MetricKind.CTR].dates()

    ttests = []
    for a, b in tuple(PAPER_PAIRS) + tuple(p for p in pairs if p not in PAPER_PAIRS):
        try:
            ttests.append(compare_metrics(daily[a], daily[b]))
        except InvalidSample as exc:
            logger.warning("Skipping t-test %s vs %s: %s", a.label, b.label, exc)

    correlation = None
    try:
        correlation = correlation_matrix([daily[kind] for kind in correlation_kinds])
    except (LengthMismatch, SeriesMismatch) as exc:
        logger.warning("Skipping correlation: %s", exc)

    behavior = bounce = None
    try:
        behavior = behavior_report(log)
        bounce = bounce_indicator(behavior, bounce_threshold)
    except EmptyPopulation as exc:
        logger.warning("Skipping behavior: %s", exc)

    impact = None
    if filter_cfg is not None:
        impact = simulate_filters(log, filter_cfg, windows, n_jobs=n_jobs)

    return EvaluationReport(
        source_name=log.source_name,
        first_day=days[0],
        last_day=days[-1],
        windows=windows,
        metrics=metrics,
        daily=daily,
        ttests=tuple(ttests),
        correlation=correlation,
        behavior=behavior,
        filter_impact=impact,
        bounce=bounce,
    )


def render_json(report):
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def report_from_json(text):
    return EvaluationReport.from_dict(json.loads(text))


def significant(value, digits):
    """Fixed-point text with `digits` significant digits, rounded half-even."""
    if value == 0:
        return "0." + "0" * digits
    number = Decimal(repr(float(value)))
    exponent = number.adjusted() - (digits - 1)
    return format(number.quantize(Decimal(1).scaleb(exponent), rounding=ROUND_HALF_EVEN), "f")


def format_rate(value):
    return significant(value, 4)


def format_p_value(value):
    if value < P_VALUE_FLOOR:
        return "<1e-12"
    if value < 1e-3:
        return format(Decimal(repr(float(value))), ".2e")
    return significant(value, 3)


def format_r(value):
    if value is None:
        return "undefined"
    return format(Decimal(repr(float(value))).quantize(Decimal("0.01"), ROUND_HALF_EVEN), "f")


def metrics_table(metrics):
    rows = [
        [v.kind.label, format_rate(v.rate), format_rate(v.std_dev), v.successes, v.trials]
        for v in metrics
    ]
    return tabulate(rows, headers=["metric", "rate", "std.dev", "hits", "n"], tablefmt="simple",
                    disable_numparse=True)


def ttest_table(ttest):
    a, b = ttest.a, ttest.b
    t = "degenerate" if ttest.t is None else significant(ttest.t, 4)
    rows = [
        [ttest.labels[0], format_rate(a.mean), format_rate(a.std_dev), a.n, t,
         format_p_value(ttest.p_value)],
        [ttest.labels[1], format_rate(b.mean), format_rate(b.std_dev), b.n, "", ""],
    ]
    table = tabulate(rows, headers=["metric", "mean", "std.dev", "n", "t", "p-value"],
                     tablefmt="simple", disable_numparse=True)
    ratio = "n/a" if ttest.sd_ratio is None else significant(ttest.sd_ratio, 3)
    verdict = "reject H0" if ttest.reject_at_05 else "keep H0"
    footer = (
        f"{ttest.variant.value} t-test, df {significant(ttest.df, 6)}, "
        f"sd ratio {ratio}, {verdict} at 0.05"
    )
    return f"{table}\n{footer}"


def correlation_table(matrix):
    labels = [kind.label for kind in matrix.labels]
    rows = [[label] + [format_r(value) for value in row] for label, row in zip(labels, matrix.r)]
    table = tabulate(rows, headers=[""] + labels, tablefmt="simple", disable_numparse=True)
    return f"{table}\nPearson r over {matrix.days} days"


def daily_table(daily):
    kinds = list(daily)
    axis = daily[kinds[0]].days
    rows = []
    for index, (day, first) in enumerate(axis):
        rows.append(
            [day.isoformat(), first.trials]
            + [format_rate(daily[kind].days[index][1].rate) for kind in kinds]
        )
    headers = ["date", "hits"] + [kind.label for kind in kinds]
    return tabulate(rows, headers=headers, tablefmt="simple", disable_numparse=True)


def _optional(value):
    return "n/a" if value is None else significant(value, 4)


def behavior_table(behavior, bounce=None):
    rows = [
        ["customers", behavior.customers],
        ["hits", behavior.hits],
        ["clicks", behavior.clicks],
        ["atcs", behavior.atcs],
        ["buys", behavior.buys],
        ["buyers", behavior.buyers],
        ["hits per customer", significant(behavior.hits_per_customer, 4)],
        ["buyers per customer", significant(behavior.buyers_per_customer, 4)],
        ["clicks per customer", significant(behavior.clicks_per_customer, 4)],
        ["clicks per buy", _optional(behavior.clicks_per_buy)],
        ["buys per customer", significant(behavior.buys_per_customer, 4)],
        ["atcs per customer", significant(behavior.atcs_per_customer, 4)],
    ]
    if bounce is not None:
        rows.append(["bounce indicator", "yes" if bounce else "no"])
    table = tabulate(rows, headers=["indicator", "value"], tablefmt="simple", disable_numparse=True)
    return f"{table}\nnote: {behavior.caveat}"


def filter_table(impact):
    rows = [
        ["hits", impact.hits],
        ["hit-product pairs", impact.pairs],
        ["removed pairs", impact.removed_pairs],
        ["  clicked today", impact.removed_clicked_today],
        ["  added to cart", impact.removed_atc],
        ["emptied hits", impact.emptied_hits],
        ["removed pair fraction", format_rate(impact.removed_pair_fraction)],
        ["emptied hit fraction", format_rate(impact.emptied_hit_fraction)],
    ]
    for value in impact.original:
        rows.append([f"{value.kind.label} before", format_rate(value.rate)])
    for value in impact.counterfactual or ():
        rows.append([f"{value.kind.label} after", format_rate(value.rate)])
    return tabulate(rows, headers=["filter impact", "value"], tablefmt="simple",
                    disable_numparse=True)


def render_table(report):
    w = report.windows
    sections = [
        f"source: {report.source_name or '-'}\n"
        f"days: {report.first_day.isoformat()} .. {report.last_day.isoformat()}\n"
        f"windows: click {w.click_window}, atc {w.atc_window}, buy {w.buy_window}, "
        f"norepeat scope {w.norepeat_scope.value}, click & buy leg {w.candb_leg.value}",
        metrics_table(report.metrics),
    ]
    sections.extend(ttest_table(t) for t in report.ttests)
    if report.correlation is not None:
        sections.append(correlation_table(report.correlation))
    if report.daily:
        sections.append(daily_table(report.daily))
    if report.behavior is not None:
        sections.append(behavior_table(report.behavior, report.bounce))
    if report.filter_impact is not None:
        sections.append(filter_table(report.filter_impact))
    return "\n\n".join(sections) + "\n"
