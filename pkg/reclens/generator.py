"""
Seeded synthetic event logs with analytically known metric rates.

Each customer gets an independent PCG64 stream spawned from one SeedSequence,
so a log is a pure function of its config and can be produced in any number
of worker processes. Hits sit in fixed slots spaced three ATC windows apart;
this keeps every in-window action attached to the Hit that caused it and is
what makes the expected rates below exact.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timedelta, timezone

import numpy as np
from joblib import Parallel, delayed, effective_n_jobs
from scipy import stats as sps

from .attribution import WindowConfig, attribute
from .events import Action, ActionKind, EventLog, Hit
from .exceptions import InvalidConfig
from .metrics import MetricKind, compute_all

logger = logging.getLogger(__name__)

DEFAULT_START = datetime(2023, 1, 1, tzinfo=timezone.utc)
SLOT_PADDING = timedelta(minutes=10)
WIDGETS = ("w1", "w2", "w3")
BAND_SIGMAS = 5.0

_PROBABILITIES = (
    "click_prob", "repeat_click_prob", "atc_given_click_prob", "buy_given_click_prob",
    "stray_buy_prob", "latency_quantile_in_window",
)
_JITTERS = ("engagement_jitter", "repeat_jitter")
_COUNTS = ("customers", "days", "products_per_hit", "catalog_size")


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 0
    customers: int = 500
    days: int = 11
    hits_per_customer_per_day: float = 4.0
    products_per_hit: int = 5
    catalog_size: int = 5000
    click_prob: float = 0.1
    repeat_click_prob: float = 0.45
    atc_given_click_prob: float = 0.3
    buy_given_click_prob: float = 0.3
    stray_buy_prob: float = 0.0
    latency_quantile_in_window: float = 0.9
    engagement_jitter: float = 0.3
    repeat_jitter: float = 0.9
    start: datetime = DEFAULT_START
    windows: WindowConfig = field(default_factory=WindowConfig)

    def __post_init__(self):
        errors = {}
        for name in _PROBABILITIES:
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors[name] = ["must be within [0, 1]"]
        for name in _JITTERS:
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors[name] = ["must be within [0, 1]"]
        for name in _COUNTS:
            if getattr(self, name) < 1:
                errors[name] = ["must be at least 1"]
        if self.hits_per_customer_per_day < 0:
            errors["hits_per_customer_per_day"] = ["must not be negative"]
        if self.slots_per_day < 1:
            errors["windows"] = ["ATC window too long to fit a hit slot in one day"]
        elif self.catalog_size < self.products_per_hit + self.days * self.slots_per_day:
            errors["catalog_size"] = ["catalog too small for the number of hits per customer"]
        if self.stray_buy_prob > 0 and self.products_per_hit < 2:
            errors["stray_buy_prob"] = ["stray buys need at least 2 products per hit"]
        if self.start.tzinfo is None:
            errors["start"] = ["start must carry a timezone"]
        if errors:
            raise InvalidConfig(errors)

    @property
    def slot(self):
        return 3 * self.windows.atc_window + SLOT_PADDING

    @property
    def slots_per_day(self):
        return int(timedelta(days=1) // self.slot)

    @classmethod
    def from_preset(cls, name, **overrides):
        try:
            values = dict(PRESETS[name])
        except KeyError:
            raise InvalidConfig({"preset": [f"unknown preset {name!r}"]}) from None
        values.update(overrides)
        return cls(**values)

    def to_dict(self):
        data = asdict(self)
        data["start"] = self.start.isoformat()
        data["windows"] = self.windows.to_dict()
        return data


PRESETS = {
    "default": {},
    # CTR 0.09 and CTR-NoRepeat 0.07 over ~99k hits
    "table1": {
        "customers": 1800, "hits_per_customer_per_day": 5.0, "click_prob": 0.1,
        "repeat_click_prob": 0.278, "buy_given_click_prob": 0.05, "stray_buy_prob": 0.0,
        "engagement_jitter": 0.0, "repeat_jitter": 0.0,
    },
    # table1 plus BTR 0.0042 and Click & Buy 0.0026
    "table2": {
        "customers": 1800, "hits_per_customer_per_day": 5.0, "click_prob": 0.1,
        "repeat_click_prob": 0.278, "buy_given_click_prob": 0.04127,
        "stray_buy_prob": 0.001782, "engagement_jitter": 0.0, "repeat_jitter": 0.0,
    },
    # CTR 0.08, CTR-NoRepeat 0.06, BTR 0.0035, Click & Buy 0.0021
    "case2": {
        "customers": 2000, "hits_per_customer_per_day": 5.0, "click_prob": 0.08889,
        "repeat_click_prob": 0.3224, "buy_given_click_prob": 0.03889,
        "stray_buy_prob": 0.001559, "engagement_jitter": 0.0, "repeat_jitter": 0.0,
    },
    # CTR 0.105, CTR-NoRepeat 0.084, BTR 0.003, Click & Buy 0.0019
    "case3": {
        "customers": 2000, "hits_per_customer_per_day": 5.0, "click_prob": 0.11667,
        "repeat_click_prob": 0.2417, "buy_given_click_prob": 0.02513,
        "stray_buy_prob": 0.001225, "engagement_jitter": 0.0, "repeat_jitter": 0.0,
    },
}


@dataclass(frozen=True)
class GroundTruth:
    expected: dict
    expected_hits: float
    windows: WindowConfig = field(default_factory=WindowConfig)
    band_sigmas: float = BAND_SIGMAS

    def band(self, kind):
        p = self.expected[kind]
        half = self.band_sigmas * math.sqrt(p * (1.0 - p) / self.expected_hits)
        return max(0.0, p - half), min(1.0, p + half)

    def with_band_sigmas(self, sigmas):
        return replace(self, band_sigmas=sigmas)

    def to_dict(self):
        return {
            "expected_hits": self.expected_hits,
            "band_sigmas": self.band_sigmas,
            "expected": {kind.value: rate for kind, rate in self.expected.items()},
        }


def _day_multipliers(cfg, seq):
    rng = np.random.Generator(np.random.PCG64(seq))
    ej, rj = cfg.engagement_jitter, cfg.repeat_jitter
    engagement = rng.uniform(1.0 - ej, 1.0 + ej, size=cfg.days)
    repeat = rng.uniform(1.0 - rj, 1.0 + rj, size=cfg.days)
    click = np.minimum(1.0, cfg.click_prob * engagement)
    again = np.minimum(1.0, cfg.repeat_click_prob * repeat)
    return click.tolist(), again.tolist()


def _seconds(delta):
    return int(delta.total_seconds())


class _Customer:
    """Draws one customer's hits and actions from its own PRNG stream."""

    def __init__(self, index, seq, cfg, click_by_day, repeat_by_day):
        self.rng = np.random.Generator(np.random.PCG64(seq))
        self.cfg = cfg
        self.name = f"c{index:05d}"
        self.hit_prefix = f"h{index:05d}"
        self.click_by_day = click_by_day
        self.repeat_by_day = repeat_by_day
        self.excluded = set()
        self.hits = []
        self.actions = []

    def _latency(self, in_window, low, window):
        """Seconds after the hit: uniform on [low, W] in window, on (W, 3W] outside."""
        if in_window:
            return int(self.rng.integers(low, window + 1))
        return int(self.rng.integers(window + 1, 3 * window + 1))

    def _draw_products(self):
        rng, catalog = self.rng, self.cfg.catalog_size
        chosen = []
        while len(chosen) < self.cfg.products_per_hit:
            product = int(rng.integers(catalog))
            if product not in self.excluded and product not in chosen:
                chosen.append(product)
        return chosen

    def _act(self, kind, product, ts):
        self.actions.append(Action(kind, self.name, f"p{product:05d}", ts))

    def run(self):
        cfg, rng = self.cfg, self.rng
        slot = cfg.slot
        per_day = cfg.slots_per_day
        q = cfg.latency_quantile_in_window
        click_w = _seconds(cfg.windows.click_window)
        atc_w = _seconds(cfg.windows.atc_window)
        buy_w = _seconds(cfg.windows.buy_window)
        last_credited = None
        k = 0

        for day in range(cfg.days):
            count = min(int(rng.poisson(cfg.hits_per_customer_per_day)), per_day)
            if count == 0:
                continue
            day_start = cfg.start + timedelta(days=day)
            for index in sorted(rng.choice(per_day, size=count, replace=False).tolist()):
                ts = day_start + index * slot + timedelta(seconds=int(rng.integers(0, 601)))
                engaged = rng.random() < self.click_by_day[day]
                in_window = engaged and rng.random() < q
                repeat = (
                    in_window and last_credited is not None
                    and rng.random() < self.repeat_by_day[day]
                )
                products = self._draw_products()
                target = None
                if repeat:
                    products[int(rng.integers(len(products)))] = last_credited
                    target = last_credited
                elif engaged:
                    target = products[int(rng.integers(len(products)))]

                self.hits.append(Hit(
                    f"{self.hit_prefix}-{k}", self.name, WIDGETS[int(rng.integers(len(WIDGETS)))],
                    ts, tuple(f"p{p:05d}" for p in products),
                ))
                k += 1

                if engaged:
                    click_lat = self._latency(in_window, 1, click_w)
                    self._act(ActionKind.CLICK, target, ts + timedelta(seconds=click_lat))
                    self.excluded.add(target)
                    if in_window:
                        last_credited = target
                        if rng.random() < cfg.atc_given_click_prob:
                            lat = self._latency(rng.random() < q, click_lat, atc_w)
                            self._act(ActionKind.ATC, target, ts + timedelta(seconds=lat))
                        if not repeat and rng.random() < cfg.buy_given_click_prob:
                            lat = self._latency(rng.random() < q, click_lat, buy_w)
                            self._act(ActionKind.BUY, target, ts + timedelta(seconds=lat))

                if cfg.stray_buy_prob > 0 and rng.random() < cfg.stray_buy_prob:
                    others = [p for p in products if p != target]
                    product = others[int(rng.integers(len(others)))]
                    lat = self._latency(rng.random() < q, 1, buy_w)
                    self._act(ActionKind.BUY, product, ts + timedelta(seconds=lat))

        return self.hits, self.actions


def _generate_range(indices, seqs, cfg, click_by_day, repeat_by_day):
    hits, actions = [], []
    for index, seq in zip(indices, seqs):
        h, a = _Customer(index, seq, cfg, click_by_day, repeat_by_day).run()
        hits.extend(h)
        actions.extend(a)
    return hits, actions


def _expected_hits_per_day(cfg):
    """Mean of a Poisson draw capped at the number of slots in a day."""
    lam = cfg.hits_per_customer_per_day
    return float(sum(sps.poisson.sf(k - 1, lam) for k in range(1, cfg.slots_per_day + 1)))


def ground_truth(cfg, click_by_day=None, repeat_by_day=None):
    """
    Expected value of every metric. Day multipliers, when given, are the ones
    actually drawn for the log, so jitter never biases the truth.
    """
    if click_by_day is None:
        click_by_day = [cfg.click_prob] * cfg.days
        repeat_by_day = [cfg.repeat_click_prob] * cfg.days
    q = cfg.latency_quantile_in_window
    per_day = _expected_hits_per_day(cfg)
    hits_per_customer = per_day * cfg.days

    credited = [c * q for c in click_by_day]
    a = sum(credited) / cfg.days
    total = sum(credited)
    r = (
        sum(c * rr for c, rr in zip(credited, repeat_by_day)) / total
        if total > 0 else cfg.repeat_click_prob
    )

    mu = hits_per_customer * a
    first = -math.expm1(-mu)
    if hits_per_customer > 0:
        norepeat = (first + (1.0 - r) * (mu - first)) / hits_per_customer
    else:
        norepeat = 0.0

    gamma = cfg.atc_given_click_prob * q
    s = r * (1.0 - gamma)
    atc_first = 0.0
    for k in range(1, cfg.days * cfg.slots_per_day + 1):
        tail = float(sps.poisson.sf(k - 1, mu))
        if tail < 1e-16:
            break
        chain = (k - 1) if s == 1.0 else (1.0 - s ** (k - 1)) / (1.0 - s)
        atc_first += tail * gamma * ((1.0 - r) * chain + s ** (k - 1))
    atc_norepeat = atc_first / hits_per_customer if hits_per_customer > 0 else 0.0

    click_and_buy = norepeat * cfg.buy_given_click_prob * q
    btr = 1.0 - (1.0 - click_and_buy) * (1.0 - cfg.stray_buy_prob * q)
    expected = {
        MetricKind.CTR: a,
        MetricKind.CTR_NoRepeat: norepeat,
        MetricKind.ATC_TR: a * gamma,
        MetricKind.ATC_TR_NoRepeat: atc_norepeat,
        MetricKind.BTR: btr,
        MetricKind.ClickAndBuy: click_and_buy,
    }
    return GroundTruth(
        expected=expected,
        expected_hits=max(1.0, cfg.customers * hits_per_customer),
        windows=cfg.windows,
    )


def generate(cfg, n_jobs=1):
    """Returns (EventLog, GroundTruth); the log depends only on cfg."""
    root = np.random.SeedSequence(cfg.seed)
    day_seq, *customer_seqs = root.spawn(cfg.customers + 1)
    click_by_day, repeat_by_day = _day_multipliers(cfg, day_seq)

    indices = list(range(1, cfg.customers + 1))
    parts = max(1, min(effective_n_jobs(n_jobs), cfg.customers))
    if parts == 1:
        chunks = [_generate_range(indices, customer_seqs, cfg, click_by_day, repeat_by_day)]
    else:
        bounds = np.linspace(0, cfg.customers, parts + 1).astype(int).tolist()
        chunks = Parallel(n_jobs=n_jobs)(
            delayed(_generate_range)(
                indices[lo:hi], customer_seqs[lo:hi], cfg, click_by_day, repeat_by_day,
            )
            for lo, hi in zip(bounds, bounds[1:])
        )
    hits = [hit for chunk_hits, _ in chunks for hit in chunk_hits]
    actions = [action for _, chunk_actions in chunks for action in chunk_actions]
    log = EventLog.build(hits, actions, f"generated-seed{cfg.seed}")
    logger.info(
        "Generated %d hits and %d actions for %d customers over %d days",
        len(log.hits), len(log.actions), cfg.customers, cfg.days,
    )
    return log, ground_truth(cfg, click_by_day, repeat_by_day)


@dataclass(frozen=True)
class VerificationRow:
    kind: MetricKind
    measured: float
    expected: float
    low: float
    high: float

    @property
    def passed(self):
        return self.low <= self.measured <= self.high

    def to_dict(self):
        return {
            "metric": self.kind.label,
            "measured": self.measured,
            "expected": self.expected,
            "band": [self.low, self.high],
            "pass": self.passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    rows: tuple

    @property
    def passed(self):
        return all(row.passed for row in self.rows)

    def violations(self):
        return [row for row in self.rows if not row.passed]

    def to_dict(self):
        return {"pass": self.passed, "metrics": [row.to_dict() for row in self.rows]}


def verify_ground_truth(log, truth, cfg_windows=None, n_jobs=1):
    attr = attribute(log, cfg_windows or truth.windows, n_jobs=n_jobs)
    rows = []
    for value in compute_all(attr):
        low, high = truth.band(value.kind)
        rows.append(VerificationRow(value.kind, value.rate, truth.expected[value.kind], low, high))
    report = VerificationReport(tuple(rows))
    for row in report.violations():
        logger.warning(
            "%s measured %.5f outside [%.5f, %.5f]", row.kind.label, row.measured, row.low, row.high
        )
    return report
