"""
Customer-behavior indicators over the customers who were shown recommendations.

Actions are counted raw, not window-attributed: these figures describe how the
recommended population behaves on the site as a whole.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from django.conf import settings

from .events import ActionKind
from .exceptions import EmptyPopulation

logger = logging.getLogger(__name__)

COVERAGE_CAVEAT = (
    "hits per customer is only meaningful when recommendations are shown on "
    "a large proportion of the site's pages"
)


@dataclass(frozen=True)
class BehaviorReport:
    customers: int
    hits: int
    clicks: int
    atcs: int
    buys: int
    buyers: int
    caveat: str = COVERAGE_CAVEAT

    @property
    def hits_per_customer(self):
        return self.hits / self.customers

    @property
    def buyers_per_customer(self):
        return self.buyers / self.customers

    @property
    def clicks_per_customer(self):
        return self.clicks / self.customers

    @property
    def clicks_per_buy(self) -> Optional[float]:
        if self.buys == 0:
            return None
        return self.clicks / self.buys

    @property
    def buys_per_customer(self):
        return self.buys / self.customers

    @property
    def atcs_per_customer(self):
        return self.atcs / self.customers

    def to_dict(self):
        return {
            "customers": self.customers,
            "hits": self.hits,
            "clicks": self.clicks,
            "atcs": self.atcs,
            "buys": self.buys,
            "buyers": self.buyers,
            "hits_per_customer": self.hits_per_customer,
            "buyers_per_customer": self.buyers_per_customer,
            "clicks_per_customer": self.clicks_per_customer,
            "clicks_per_buy": self.clicks_per_buy,
            "buys_per_customer": self.buys_per_customer,
            "atcs_per_customer": self.atcs_per_customer,
            "caveat": self.caveat,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            customers=data["customers"],
            hits=data["hits"],
            clicks=data["clicks"],
            atcs=data["atcs"],
            buys=data["buys"],
            buyers=data["buyers"],
            caveat=data.get("caveat", COVERAGE_CAVEAT),
        )


def behavior_report(log):
    population = {hit.customer for hit in log.hits}
    if not population:
        raise EmptyPopulation("no customer received a recommendation")
    counts = {kind: 0 for kind in ActionKind}
    buyers = set()
    for action in log.actions:
        if action.customer not in population:
            continue
        counts[action.kind] += 1
        if action.kind is ActionKind.BUY:
            buyers.add(action.customer)
    return BehaviorReport(
        customers=len(population),
        hits=len(log.hits),
        clicks=counts[ActionKind.CLICK],
        atcs=counts[ActionKind.ATC],
        buys=counts[ActionKind.BUY],
        buyers=len(buyers),
    )


def bounce_indicator(report, threshold=None):
    """True when customers click so little that most of them likely bounce."""
    if threshold is None:
        threshold = settings.RECLENS_BOUNCE_THRESHOLD
    flagged = report.clicks_per_customer < threshold
    if flagged:
        logger.warning(
            "clicks per customer %.3f below bounce threshold %.2f",
            report.clicks_per_customer, threshold,
        )
    return flagged
