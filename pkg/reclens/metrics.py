"""
Through-rate metrics computed from an attribution, for the whole log and per day.
"""

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, time, timedelta, timezone
from enum import Enum
from operator import attrgetter

from .exceptions import EmptyDenominator

logger = logging.getLogger(__name__)

ONE_DAY = timedelta(days=1)


class MetricKind(str, Enum):
    CTR = "CTR"
    CTR_NoRepeat = "CTR_NoRepeat"
    ATC_TR = "ATC_TR"
    ATC_TR_NoRepeat = "ATC_TR_NoRepeat"
    BTR = "BTR"
    ClickAndBuy = "ClickAndBuy"

    @property
    def label(self):
        return _LABELS[self]

    @property
    def flag(self):
        return _FLAGS[self]

    @classmethod
    def parse(cls, text):
        """Accepts the enum value, the display label, or a loose spelling of either."""
        key = "".join(ch for ch in str(text).lower() if ch.isalnum())
        kind = _ALIASES.get(key)
        if kind is None:
            raise ValueError(f"unknown metric {text!r}")
        return kind


_LABELS = {
    MetricKind.CTR: "CTR",
    MetricKind.CTR_NoRepeat: "CTR-NoRepeat",
    MetricKind.ATC_TR: "ATC-TR",
    MetricKind.ATC_TR_NoRepeat: "ATC-TR-NoRepeat",
    MetricKind.BTR: "BTR",
    MetricKind.ClickAndBuy: "Click & Buy",
}

_FLAGS = {
    MetricKind.CTR: "clicked",
    MetricKind.CTR_NoRepeat: "clicked_norepeat",
    MetricKind.ATC_TR: "atc",
    MetricKind.ATC_TR_NoRepeat: "atc_norepeat",
    MetricKind.BTR: "bought",
    MetricKind.ClickAndBuy: "clicked_and_bought",
}

_ALIASES = {}
for _kind in MetricKind:
    for _name in (_kind.value, _LABELS[_kind]):
        _ALIASES["".join(ch for ch in _name.lower() if ch.isalnum())] = _kind
_ALIASES["candb"] = MetricKind.ClickAndBuy
_ALIASES["atctr"] = MetricKind.ATC_TR


@dataclass(frozen=True)
class MetricValue:
    kind: MetricKind
    successes: int
    trials: int

    @property
    def rate(self):
        if self.trials == 0:
            raise EmptyDenominator(f"{self.kind.label} over zero hits")
        return self.successes / self.trials

    @property
    def variance_of_mean(self):
        p = self.rate
        return p * (1.0 - p) / self.trials

    @property
    def std_dev(self):
        return math.sqrt(self.variance_of_mean)

    def __add__(self, other):
        return MetricValue(self.kind, self.successes + other.successes, self.trials + other.trials)

    def to_dict(self):
        return {
            "kind": self.kind.value,
            "successes": self.successes,
            "trials": self.trials,
            "rate": self.rate,
            "variance_of_mean": self.variance_of_mean,
        }


@dataclass(frozen=True)
class DailyMetricSeries:
    kind: MetricKind
    days: tuple = ()

    def dates(self):
        return [day for day, _ in self.days]

    def rates(self):
        return [value.rate for _, value in self.days]

    def total(self):
        successes = sum(value.successes for _, value in self.days)
        trials = sum(value.trials for _, value in self.days)
        return MetricValue(self.kind, successes, trials)


def _count(per_hit, kind):
    return sum(map(attrgetter(kind.flag), per_hit))


def compute_metric(attr, kind):
    trials = len(attr.per_hit)
    if trials == 0:
        raise EmptyDenominator(f"{kind.label} over zero hits")
    return MetricValue(kind, _count(attr.per_hit, kind), trials)


def compute_all(attr):
    return [compute_metric(attr, kind) for kind in MetricKind]


def hit_date(hit, tz_offset):
    return (hit.ts + tz_offset).date()


def _day_runs(hits, tz_offset):
    """Yields (day, start, stop) for each run of consecutive hits on the same local day."""
    start = 0
    day = None
    opens = closes = None
    for index, hit in enumerate(hits):
        ts = hit.ts
        if day is not None and opens <= ts < closes:
            continue
        if day is not None:
            yield day, start, index
        day = hit_date(hit, tz_offset)
        opens = datetime.combine(day, time(), tzinfo=timezone.utc) - tz_offset
        closes = opens + ONE_DAY
        start = index
    if day is not None:
        yield day, start, len(hits)


def bucket_all(attr, log, tz_offset=timedelta(0), kinds=tuple(MetricKind)):
    """Daily series for several metrics in a single pass over the hits."""
    if not attr.per_hit:
        raise EmptyDenominator("no hits to bucket")
    trials = defaultdict(int)
    successes = {kind: defaultdict(int) for kind in kinds}
    getters = [(kind, attrgetter(kind.flag)) for kind in kinds]
    per_hit = attr.per_hit
    for day, start, stop in _day_runs(log.hits, tz_offset):
        trials[day] += stop - start
        run = per_hit[start:stop]
        for kind, getter in getters:
            successes[kind][day] += sum(map(getter, run))
    days = sorted(trials)
    series = {
        kind: DailyMetricSeries(
            kind, tuple((day, MetricValue(kind, successes[kind][day], trials[day])) for day in days)
        )
        for kind in kinds
    }
    logger.debug("Bucketed %d hits into %d days", len(per_hit), len(days))
    return series


def bucket_daily(attr, log, kind, tz_offset=timedelta(0)):
    return bucket_all(attr, log, tz_offset, (kind,))[kind]
