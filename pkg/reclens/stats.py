"""
Two-sample t-tests between metric rates and Pearson correlation of daily series.

Rates are Bernoulli means, so a sample is summarised by (p, sqrt(p(1-p)/n), n).
The pooled test is used when the standard deviations are within a factor of
two of each other and Welch's test otherwise.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np
from scipy import stats as sps

from .exceptions import (
    ConstantSeries, DegenerateVariance, InvalidSample, LengthMismatch, SeriesMismatch,
)
from .metrics import MetricKind

logger = logging.getLogger(__name__)

ALPHA = 0.05


class TestVariant(str, Enum):
    POOLED = "pooled"
    UNPOOLED = "unpooled"

    # keep pytest from collecting this enum
    __test__ = False


@dataclass(frozen=True)
class SampleSummary:
    mean: float
    std_dev: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidSample(f"sample needs n >= 2, got {self.n}")
        if not 0.0 <= self.mean <= 1.0:
            raise InvalidSample(f"mean {self.mean} outside [0, 1]")
        if not self.std_dev >= 0.0:
            raise InvalidSample(f"negative standard deviation {self.std_dev}")

    @classmethod
    def from_counts(cls, successes, trials):
        if trials < 2:
            raise InvalidSample(f"sample needs n >= 2, got {trials}")
        p = successes / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials)

    @classmethod
    def from_metric(cls, value):
        return cls.from_counts(value.successes, value.trials)

    def to_dict(self):
        return {"mean": self.mean, "std_dev": self.std_dev, "n": self.n}

    @classmethod
    def from_dict(cls, data):
        return cls(data["mean"], data["std_dev"], data["n"])


@dataclass(frozen=True)
class TTestReport:
    a: SampleSummary
    b: SampleSummary
    variant: TestVariant
    sd_ratio: Optional[float]
    t: Optional[float]
    df: float
    p_value: float
    reject_at_05: bool
    degenerate: bool = False
    labels: tuple = ("a", "b")

    def to_dict(self):
        return {
            "labels": list(self.labels),
            "a": self.a.to_dict(),
            "b": self.b.to_dict(),
            "variant": self.variant.value,
            "sd_ratio": self.sd_ratio,
            "t": self.t,
            "df": self.df,
            "p_value": self.p_value,
            "reject_at_05": self.reject_at_05,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            a=SampleSummary.from_dict(data["a"]),
            b=SampleSummary.from_dict(data["b"]),
            variant=TestVariant(data["variant"]),
            sd_ratio=data["sd_ratio"],
            t=data["t"],
            df=data["df"],
            p_value=data["p_value"],
            reject_at_05=data["reject_at_05"],
            degenerate=data["degenerate"],
            labels=tuple(data["labels"]),
        )


def sd_ratio(a, b):
    if b.std_dev == 0.0:
        return None
    return a.std_dev / b.std_dev


def _finish(a, b, variant, diff, se, df, labels, strict):
    if se == 0.0:
        if strict:
            raise DegenerateVariance(f"{variant.value} test has zero variance")
        logger.warning("Degenerate %s t-test for %s vs %s", variant.value, *labels)
        p_value = 1.0 if diff == 0.0 else 0.0
        return TTestReport(
            a, b, variant, sd_ratio(a, b), None, df, p_value, p_value < ALPHA, True, labels,
        )
    t = diff / se
    p_value = min(1.0, 2.0 * float(sps.t.sf(abs(t), df)))
    return TTestReport(a, b, variant, sd_ratio(a, b), t, df, p_value, p_value < ALPHA, False, labels)


def pooled_ttest(a, b, labels=("a", "b"), strict=False):
    df = a.n + b.n - 2
    sp2 = ((a.n - 1) * a.std_dev ** 2 + (b.n - 1) * b.std_dev ** 2) / df
    se = math.sqrt(sp2 * (1.0 / a.n + 1.0 / b.n))
    return _finish(a, b, TestVariant.POOLED, a.mean - b.mean, se, float(df), tuple(labels), strict)


def unpooled_ttest(a, b, labels=("a", "b"), strict=False):
    va = a.std_dev ** 2 / a.n
    vb = b.std_dev ** 2 / b.n
    total = va + vb
    if total == 0.0:
        df = float(a.n + b.n - 2)
    else:
        df = total ** 2 / (va ** 2 / (a.n - 1) + vb ** 2 / (b.n - 1))
    return _finish(
        a, b, TestVariant.UNPOOLED, a.mean - b.mean, math.sqrt(total), df, tuple(labels), strict,
    )


def choose_test(a, b):
    if a.std_dev == 0.0 or b.std_dev == 0.0:
        logger.warning(
            "Zero standard deviation (%g, %g); using the unpooled test", a.std_dev, b.std_dev
        )
        return TestVariant.UNPOOLED
    ratio = a.std_dev / b.std_dev
    return TestVariant.POOLED if 0.5 <= ratio <= 2.0 else TestVariant.UNPOOLED


def ttest(a, b, labels=("a", "b"), variant=None, strict=False):
    """
    Runs the test `choose_test` picks, or `variant` when given. A sample with
    zero standard deviation marks the report degenerate even when the other
    sample keeps t finite.
    """
    variant = variant or choose_test(a, b)
    if variant is TestVariant.POOLED:
        report = pooled_ttest(a, b, labels, strict)
    else:
        report = unpooled_ttest(a, b, labels, strict)
    if not report.degenerate and (a.std_dev == 0.0 or b.std_dev == 0.0):
        report = replace(report, degenerate=True)
    return report


def compare_metrics(series_a, series_b):
    """T-test between two metrics from whole-log counts of their daily series."""
    a = SampleSummary.from_metric(series_a.total())
    b = SampleSummary.from_metric(series_b.total())
    return ttest(a, b, labels=(series_a.kind.label, series_b.kind.label))


def pearson(x, y):
    if len(x) != len(y):
        raise LengthMismatch(f"series lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise LengthMismatch("correlation needs at least two points")
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if np.ptp(xs) == 0.0 or np.ptp(ys) == 0.0:
        raise ConstantSeries("a correlated series has zero variance")
    r = np.corrcoef(xs, ys)[0, 1]
    return float(np.clip(r, -1.0, 1.0))


DEFAULT_CORRELATION_KINDS = (
    MetricKind.CTR, MetricKind.CTR_NoRepeat, MetricKind.BTR, MetricKind.ClickAndBuy,
)


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple
    r: tuple
    undefined: tuple = ()
    days: int = 0

    def entry(self, row, col):
        return self.r[self.labels.index(row)][self.labels.index(col)]

    def to_dict(self):
        return {
            "labels": [kind.value for kind in self.labels],
            "days": self.days,
            "r": [list(row) for row in self.r],
            "undefined": [kind.value for kind in self.undefined],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            labels=tuple(MetricKind(v) for v in data["labels"]),
            r=tuple(tuple(row) for row in data["r"]),
            undefined=tuple(MetricKind(v) for v in data["undefined"]),
            days=data["days"],
        )


def correlation_matrix(series):
    """
    Pairwise Pearson r over daily rates. Rows of a constant series are left
    undefined (None) instead of failing the whole matrix.
    """
    if not series:
        raise LengthMismatch("no series to correlate")
    axis = series[0].dates()
    for s in series[1:]:
        if s.dates() != axis:
            raise SeriesMismatch(f"{s.kind.label} does not share the date axis")
    if len(axis) < 2:
        raise LengthMismatch("correlation needs at least two days")
    rates = [s.rates() for s in series]
    constant = [max(values) == min(values) for values in rates]
    size = len(series)
    matrix = [[1.0] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            value = None if constant[i] or constant[j] else pearson(rates[i], rates[j])
            matrix[i][j] = matrix[j][i] = value
    undefined = tuple(s.kind for s, flat in zip(series, constant) if flat)
    for kind in undefined:
        logger.warning("%s is constant across days; its correlations are undefined", kind.label)
    return CorrelationMatrix(
        labels=tuple(s.kind for s in series),
        r=tuple(tuple(row) for row in matrix),
        undefined=undefined,
        days=len(axis),
    )
