"""
Recommendation filters and their replayed impact on a log.

Two filters exist: drop products the customer already clicked on the same
calendar day, and drop products the customer added to cart within a trailing
window of whole days. The second one is optional since for some catalogs
(groceries) re-showing carted products works as a reminder.
"""

import logging
from dataclasses import dataclass, field
from datetime import timedelta
from typing import Optional

from .attribution import attribute
from .events import ActionKind, EventLog, Hit
from .exceptions import InvalidConfig
from .metrics import MetricKind, MetricValue, compute_metric

logger = logging.getLogger(__name__)

CLICKED_TODAY = "clicked_today"
ATC_WINDOW = "atc_window"

IMPACT_KINDS = (MetricKind.CTR, MetricKind.CTR_NoRepeat)


@dataclass(frozen=True)
class FilterConfig:
    clicked_today: bool = True
    atc_window_days: int = 7
    atc_filter_enabled: bool = True
    tz_offset: timedelta = timedelta(0)

    def __post_init__(self):
        if self.atc_window_days < 0:
            raise InvalidConfig({"atc_window_days": ["must be zero or positive"]})

    @property
    def atc_active(self):
        return self.atc_filter_enabled and self.atc_window_days > 0

    def to_dict(self):
        return {
            "clicked_today": self.clicked_today,
            "atc_window_days": self.atc_window_days,
            "atc_filter_enabled": self.atc_filter_enabled,
            "tz_offset_seconds": self.tz_offset.total_seconds(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            clicked_today=data["clicked_today"],
            atc_window_days=data["atc_window_days"],
            atc_filter_enabled=data["atc_filter_enabled"],
            tz_offset=timedelta(seconds=data["tz_offset_seconds"]),
        )


@dataclass(frozen=True)
class CustomerHistory:
    customer: str
    clicks: tuple = ()
    atcs: tuple = ()


def _latest_before(entries, now):
    latest = {}
    for product, ts in entries:
        if ts < now and (product not in latest or ts > latest[product]):
            latest[product] = ts
    return latest


def _removal_cause(last_click, last_atc, now, cfg):
    """Which filter, if any, removes a product given its latest prior click and ATC."""
    if cfg.clicked_today and last_click is not None:
        if (last_click + cfg.tz_offset).date() == (now + cfg.tz_offset).date():
            return CLICKED_TODAY
    if cfg.atc_active and last_atc is not None:
        if last_atc >= now - timedelta(days=cfg.atc_window_days):
            return ATC_WINDOW
    return None


def filter_recommendations(products, history, now, cfg=None):
    cfg = cfg or FilterConfig()
    clicks = _latest_before(history.clicks, now)
    atcs = _latest_before(history.atcs, now)
    return [
        product for product in products
        if _removal_cause(clicks.get(product), atcs.get(product), now, cfg) is None
    ]


@dataclass(frozen=True)
class FilterImpactReport:
    config: FilterConfig
    hits: int
    pairs: int
    removed_pairs: int
    removed_clicked_today: int
    removed_atc: int
    emptied_hits: int
    original: tuple = ()
    counterfactual: Optional[tuple] = None
    counterfactual_log: Optional[EventLog] = field(default=None, compare=False, repr=False)

    @property
    def removed_pair_fraction(self):
        return self.removed_pairs / self.pairs if self.pairs else 0.0

    @property
    def emptied_hit_fraction(self):
        return self.emptied_hits / self.hits if self.hits else 0.0

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "hits": self.hits,
            "pairs": self.pairs,
            "removed_pairs": self.removed_pairs,
            "removed_clicked_today": self.removed_clicked_today,
            "removed_atc": self.removed_atc,
            "emptied_hits": self.emptied_hits,
            "removed_pair_fraction": self.removed_pair_fraction,
            "emptied_hit_fraction": self.emptied_hit_fraction,
            "original": [value.to_dict() for value in self.original],
            "counterfactual": (
                [value.to_dict() for value in self.counterfactual]
                if self.counterfactual is not None else None
            ),
        }

    @classmethod
    def from_dict(cls, data):
        def values(items):
            return tuple(
                MetricValue(MetricKind(item["kind"]), item["successes"], item["trials"])
                for item in items
            )

        return cls(
            config=FilterConfig.from_dict(data["config"]),
            hits=data["hits"],
            pairs=data["pairs"],
            removed_pairs=data["removed_pairs"],
            removed_clicked_today=data["removed_clicked_today"],
            removed_atc=data["removed_atc"],
            emptied_hits=data["emptied_hits"],
            original=values(data["original"]),
            counterfactual=(
                values(data["counterfactual"]) if data["counterfactual"] is not None else None
            ),
        )


def _impact_metrics(log, windows, n_jobs):
    if not log.hits:
        return None
    attr = attribute(log, windows, n_jobs=n_jobs)
    return tuple(compute_metric(attr, kind) for kind in IMPACT_KINDS)


def simulate_filters(log, cfg=None, windows=None, n_jobs=1):
    """
    Replays the log and applies the filters to every Hit using only history
    strictly before it. The counterfactual log keeps the surviving products,
    drops Hits left empty and keeps every action.
    """
    cfg = cfg or FilterConfig()
    last_click = {}
    last_atc = {}
    kept = []
    pairs = removed = by_today = by_atc = emptied = 0

    # events() yields hits ahead of actions at equal instants
    for event in log.events():
        if isinstance(event, Hit):
            survivors = []
            for product in event.products:
                key = (event.customer, product)
                cause = _removal_cause(last_click.get(key), last_atc.get(key), event.ts, cfg)
                if cause is None:
                    survivors.append(product)
                elif cause == CLICKED_TODAY:
                    by_today += 1
                else:
                    by_atc += 1
            pairs += len(event.products)
            removed += len(event.products) - len(survivors)
            if not survivors:
                emptied += 1
            elif len(survivors) == len(event.products):
                kept.append(event)
            else:
                kept.append(event._replace(products=tuple(survivors)))
        elif event.kind is ActionKind.CLICK:
            last_click[(event.customer, event.product)] = event.ts
        elif event.kind is ActionKind.ATC:
            last_atc[(event.customer, event.product)] = event.ts

    counterfactual_log = EventLog(tuple(kept), log.actions, log.source_name)
    logger.info(
        "Filters removed %d of %d hit-product pairs and emptied %d of %d hits",
        removed, pairs, emptied, len(log.hits),
    )
    return FilterImpactReport(
        config=cfg,
        hits=len(log.hits),
        pairs=pairs,
        removed_pairs=removed,
        removed_clicked_today=by_today,
        removed_atc=by_atc,
        emptied_hits=emptied,
        original=_impact_metrics(log, windows, n_jobs) or (),
        counterfactual=_impact_metrics(counterfactual_log, windows, n_jobs),
        counterfactual_log=counterfactual_log,
    )
