"""
Window attribution of actions to recommendation Hits.

An action on product p by customer c is credited to the most recent Hit of c
that listed p and happened strictly before the action, provided the action
falls inside the window for its kind. The efficient implementation is one
sweep over the time-ordered log; `attribution_oracle` is the quadratic
reference used to cross-check it.
"""

import logging
from bisect import bisect_left
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from itertools import chain
from operator import attrgetter
from typing import NamedTuple

from joblib import Parallel, delayed, effective_n_jobs

from .events import ActionKind
from .exceptions import InvalidConfig

logger = logging.getLogger(__name__)

DEFAULT_CLICK_WINDOW = timedelta(minutes=5)
DEFAULT_ATC_WINDOW = timedelta(minutes=30)
DEFAULT_BUY_WINDOW = timedelta(hours=24)

# Below this many events the process pool costs more than it saves.
PARALLEL_MIN_EVENTS = 50_000

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_MICROSECOND = timedelta(microseconds=1)


class NoRepeatScope(str, Enum):
    LOG = "log"
    DAY = "day"


@dataclass(frozen=True)
class WindowConfig:
    click_window: timedelta = DEFAULT_CLICK_WINDOW
    atc_window: timedelta = DEFAULT_ATC_WINDOW
    buy_window: timedelta = DEFAULT_BUY_WINDOW
    norepeat_scope: NoRepeatScope = NoRepeatScope.LOG
    candb_leg: ActionKind = ActionKind.CLICK
    tz_offset: timedelta = timedelta(0)

    def __post_init__(self):
        errors = {}
        try:
            object.__setattr__(self, "norepeat_scope", NoRepeatScope(self.norepeat_scope))
        except ValueError:
            errors["norepeat_scope"] = [f"unknown scope {self.norepeat_scope!r}"]
        try:
            leg = ActionKind(self.candb_leg)
        except ValueError:
            leg = None
        if leg not in (ActionKind.CLICK, ActionKind.ATC):
            errors["candb_leg"] = ["must be 'click' or 'atc'"]
        else:
            object.__setattr__(self, "candb_leg", leg)
        for name in ("click_window", "atc_window", "buy_window"):
            if getattr(self, name) <= timedelta(0):
                errors[name] = ["must be strictly positive"]
        if not errors and not (self.click_window <= self.atc_window <= self.buy_window):
            errors["__all__"] = ["windows must satisfy click <= atc <= buy"]
        if errors:
            raise InvalidConfig(errors)

    def window(self, kind):
        if kind is ActionKind.CLICK:
            return self.click_window
        if kind is ActionKind.ATC:
            return self.atc_window
        return self.buy_window

    def to_dict(self):
        return {
            "click_window_seconds": self.click_window.total_seconds(),
            "atc_window_seconds": self.atc_window.total_seconds(),
            "buy_window_seconds": self.buy_window.total_seconds(),
            "norepeat_scope": self.norepeat_scope.value,
            "candb_leg": self.candb_leg.value,
            "tz_offset_seconds": self.tz_offset.total_seconds(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            click_window=timedelta(seconds=data["click_window_seconds"]),
            atc_window=timedelta(seconds=data["atc_window_seconds"]),
            buy_window=timedelta(seconds=data["buy_window_seconds"]),
            norepeat_scope=NoRepeatScope(data["norepeat_scope"]),
            candb_leg=ActionKind(data["candb_leg"]),
            tz_offset=timedelta(seconds=data["tz_offset_seconds"]),
        )


class Credit(NamedTuple):
    kind: ActionKind
    product: str
    ts: object


class AttributedActions(NamedTuple):
    hit_id: str
    clicked: bool = False
    clicked_norepeat: bool = False
    atc: bool = False
    atc_norepeat: bool = False
    bought: bool = False
    clicked_and_bought: bool = False
    credited: tuple = ()


@dataclass(frozen=True)
class AttributionResult:
    per_hit: tuple = ()
    unattributed_actions: dict = field(default_factory=lambda: {kind: 0 for kind in ActionKind})

    def credited_counts(self):
        credits = chain.from_iterable(map(attrgetter("credited"), self.per_hit))
        counts = Counter(map(attrgetter("kind"), credits))
        return {kind: counts[kind] for kind in ActionKind}

    def credited_count(self, kind):
        return self.credited_counts()[kind]


def _micros(ts):
    return (ts - _EPOCH) // _MICROSECOND


def _scope_key(cfg, customer, product, ts):
    if cfg.norepeat_scope is NoRepeatScope.DAY:
        return customer, product, (ts + cfg.tz_offset).date()
    return customer, product


class _Flags:
    """Per-hit accumulators shared by the sweep and the oracle."""

    def __init__(self, n):
        self.clicked = [False] * n
        self.clicked_norepeat = [False] * n
        self.atc = [False] * n
        self.atc_norepeat = [False] * n
        self.bought = [False] * n
        self.clicked_and_bought = [False] * n
        self.credited = [()] * n

    def credit(self, pos, action, first):
        self.credited[pos] += (Credit(action.kind, action.product, action.ts),)
        if action.kind is ActionKind.CLICK:
            self.clicked[pos] = True
            if first:
                self.clicked_norepeat[pos] = True
        elif action.kind is ActionKind.ATC:
            self.atc[pos] = True
            if first:
                self.atc_norepeat[pos] = True
        else:
            self.bought[pos] = True

    def freeze(self, hits):
        return tuple(map(
            AttributedActions,
            map(attrgetter("hit_id"), hits),
            self.clicked, self.clicked_norepeat, self.atc, self.atc_norepeat,
            self.bought, self.clicked_and_bought, self.credited,
        ))


def _legs(credited, leg_kind):
    """Earliest credited leg per product, in credited order."""
    seen = set()
    for credit in credited:
        if credit.kind is leg_kind and credit.product not in seen:
            seen.add(credit.product)
            yield credit


def _sweep(hits, actions, cfg):
    n = len(hits)
    flags = _Flags(n)
    windows = {kind: cfg.window(kind) // _MICROSECOND for kind in ActionKind}
    unattributed = {kind: 0 for kind in ActionKind}
    by_day = cfg.norepeat_scope is NoRepeatScope.DAY
    hit_stamps = [_micros(hit.ts) for hit in hits]
    last_touch = defaultdict(dict)
    first_seen = {ActionKind.CLICK: set(), ActionKind.ATC: set()}
    buys = defaultdict(list)
    i = 0

    for action in actions:
        now = _micros(action.ts)
        # hits at exactly the action instant are not eligible
        while i < n and hit_stamps[i] < now:
            hit = hits[i]
            last_touch[hit.customer].update(dict.fromkeys(hit.products, i))
            i += 1
        kind = action.kind
        if kind is ActionKind.BUY:
            buys[action.customer, action.product].append(action.ts)
        touches = last_touch.get(action.customer)
        pos = touches.get(action.product) if touches else None
        if pos is None or now - hit_stamps[pos] > windows[kind]:
            unattributed[kind] += 1
            continue
        first = False
        if kind is not ActionKind.BUY:
            if by_day:
                scope = _scope_key(cfg, action.customer, action.product, action.ts)
            else:
                scope = action.customer, action.product
            seen = first_seen[kind]
            if scope not in seen:
                seen.add(scope)
                first = True
        flags.credit(pos, action, first)

    # Hits are visited in order and the lower bound for a given pair never
    # decreases, so every buy before the stored pointer is already consumed.
    pointer = {}
    for pos, hit in enumerate(hits):
        if not flags.bought[pos]:
            continue
        limit = hit.ts + cfg.buy_window
        for leg in _legs(flags.credited[pos], cfg.candb_leg):
            key = (hit.customer, leg.product)
            stamps = buys.get(key)
            if not stamps:
                continue
            k = max(bisect_left(stamps, leg.ts), pointer.get(key, 0))
            if k < len(stamps) and stamps[k] <= limit:
                pointer[key] = k + 1
                flags.clicked_and_bought[pos] = True
                break

    return flags.freeze(hits), unattributed


def _partition(log, parts):
    """Splits a log by customer into `parts` sub-logs, keeping global hit positions."""
    bucket_of = {}
    for hit in log.hits:
        if hit.customer not in bucket_of:
            bucket_of[hit.customer] = len(bucket_of) % parts
    chunks = [([], [], []) for _ in range(parts)]
    for pos, hit in enumerate(log.hits):
        positions, hits, _ = chunks[bucket_of[hit.customer]]
        positions.append(pos)
        hits.append(hit)
    orphans = []
    for action in log.actions:
        bucket = bucket_of.get(action.customer)
        if bucket is None:
            orphans.append(action)
        else:
            chunks[bucket][2].append(action)
    return [chunk for chunk in chunks if chunk[1]], orphans


def _log_summary(result):
    if not logger.isEnabledFor(logging.INFO):
        return
    credited = result.credited_counts()
    logger.info(
        "Attributed %d hits: credited %s, unattributed %s",
        len(result.per_hit),
        {k.value: v for k, v in credited.items()},
        {k.value: v for k, v in result.unattributed_actions.items()},
    )


def attribute(log, cfg=None, n_jobs=1):
    """
    Credits the actions of a normalized log to its Hits.

    With n_jobs other than 1 the log is split by customer and the partitions
    are attributed in worker processes; since no rule crosses customers the
    merged result is identical to the sequential one.
    """
    cfg = cfg or WindowConfig()
    if n_jobs == 1 or log.size < PARALLEL_MIN_EVENTS:
        per_hit, unattributed = _sweep(log.hits, log.actions, cfg)
        result = AttributionResult(per_hit, unattributed)
        _log_summary(result)
        return result

    chunks, orphans = _partition(log, effective_n_jobs(n_jobs))
    logger.debug("Attributing %d customer partitions", len(chunks))
    outputs = Parallel(n_jobs=n_jobs)(
        delayed(_sweep)(hits, actions, cfg) for _, hits, actions in chunks
    )
    per_hit = [None] * len(log.hits)
    unattributed = {kind: 0 for kind in ActionKind}
    for action in orphans:
        unattributed[action.kind] += 1
    for (positions, _, _), (entries, missing) in zip(chunks, outputs):
        for pos, entry in zip(positions, entries):
            per_hit[pos] = entry
        for kind, count in missing.items():
            unattributed[kind] += count
    result = AttributionResult(tuple(per_hit), unattributed)
    _log_summary(result)
    return result


def attribution_oracle(log, cfg=None):
    """
    Naive reference for `attribute`: every rule is checked by scanning all
    Hits for every action. Quadratic; meant for logs of a few thousand events.
    """
    cfg = cfg or WindowConfig()
    hits = log.hits
    flags = _Flags(len(hits))
    unattributed = {kind: 0 for kind in ActionKind}
    credited_log = []

    for index, action in enumerate(log.actions):
        window = cfg.window(action.kind)
        best = None
        for pos, hit in enumerate(hits):
            if hit.customer != action.customer or action.product not in hit.products:
                continue
            delta = action.ts - hit.ts
            if not (timedelta(0) < delta <= window):
                continue
            if best is None or (hit.ts, pos) > (hits[best].ts, best):
                best = pos
        if best is None:
            unattributed[action.kind] += 1
            continue
        first = False
        if action.kind is not ActionKind.BUY:
            scope = _scope_key(cfg, action.customer, action.product, action.ts)
            first = not any(
                kind is action.kind and earlier_scope == scope
                for kind, earlier_scope in credited_log
            )
            credited_log.append((action.kind, scope))
        flags.credit(best, action, first)

    buys = [
        (index, action) for index, action in enumerate(log.actions)
        if action.kind is ActionKind.BUY
    ]
    consumed = set()
    for pos, hit in enumerate(hits):
        if not flags.bought[pos]:
            continue
        for leg in _legs(flags.credited[pos], cfg.candb_leg):
            candidates = [
                (buy.ts, index) for index, buy in buys
                if index not in consumed
                and buy.customer == hit.customer
                and buy.product == leg.product
                and buy.ts > hit.ts
                and leg.ts <= buy.ts <= hit.ts + cfg.buy_window
            ]
            if candidates:
                consumed.add(min(candidates)[1])
                flags.clicked_and_bought[pos] = True
                break

    return AttributionResult(flags.freeze(hits), unattributed)
