"""
Event data model, the canonical JSON Lines format, parsing and validation.

A log holds two kinds of records: Hits (a widget impression listing the
recommended products) and Actions (a click, add-to-cart or buy on a single
product). Both are immutable tuples; an EventLog keeps them in two separately
sorted sequences.
"""

import heapq
import json
import logging
import sys
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from operator import attrgetter
from pathlib import Path
from typing import NamedTuple, Optional, Union

import pandas as pd
from django.utils.dateparse import parse_datetime

from .exceptions import DuplicateHitId, LogIOError, MalformedRecord

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    CLICK = "click"
    ATC = "atc"
    BUY = "buy"


class Hit(NamedTuple):
    hit_id: str
    customer: str
    widget_id: str
    ts: datetime
    products: tuple


class Action(NamedTuple):
    kind: ActionKind
    customer: str
    product: str
    ts: datetime


Event = Union[Hit, Action]

_ACTION_TAGS = {kind.value: kind for kind in ActionKind}
_by_ts = attrgetter("ts")
_CANONICAL_LENGTHS = (20, 24, 27)
_raw_decode = json.JSONDecoder().raw_decode


def parse_timestamp(value):
    """
    Parses an RFC 3339 timestamp into an aware UTC datetime.

    Raises ValueError for anything unparseable and for timestamps that carry
    no offset, because day bucketing must be unambiguous.
    """
    if not isinstance(value, str):
        raise ValueError("bad timestamp")
    # canonical form: YYYY-MM-DDTHH:MM:SS[.fff|.ffffff]Z
    if len(value) in _CANONICAL_LENGTHS and value[10] == "T" and value[-1] == "Z":
        try:
            parsed = datetime.fromisoformat(value[:-1])
        except ValueError:
            parsed = None
        if parsed is not None and parsed.tzinfo is None:
            return parsed.replace(tzinfo=timezone.utc)
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        parsed = parse_datetime(text)
    except ValueError:
        parsed = None
    if parsed is None:
        raise ValueError(f"bad timestamp {value!r}")
    if parsed.tzinfo is None or parsed.utcoffset() is None:
        raise ValueError(f"timestamp without offset {value!r}")
    return parsed.astimezone(timezone.utc)


def format_timestamp(ts):
    text = ts.astimezone(timezone.utc).isoformat()
    # isoformat of a UTC datetime always ends in +00:00
    return text[:-6] + "Z"


def _required_id(record, name, line_no):
    value = record.get(name)
    if value is None:
        raise MalformedRecord(line_no, f"missing field '{name}'")
    if not isinstance(value, str) or not value.strip():
        raise MalformedRecord(line_no, f"field '{name}' must be a non-empty string")
    return value.strip()


def _required_ts(record, line_no):
    if "ts" not in record:
        raise MalformedRecord(line_no, "missing field 'ts'")
    try:
        return parse_timestamp(record["ts"])
    except ValueError as exc:
        raise MalformedRecord(line_no, str(exc)) from None


def parse_event_record(record, line_no):
    """Decodes one already-deserialized record. Unknown fields are ignored."""
    if not isinstance(record, dict):
        raise MalformedRecord(line_no, "record is not a JSON object")
    tag = record.get("type")
    if tag is None:
        raise MalformedRecord(line_no, "missing field 'type'")
    if tag == "hit":
        hit_id = _required_id(record, "hit_id", line_no)
        customer = _required_id(record, "customer", line_no)
        widget = record.get("widget")
        if widget is None:
            raise MalformedRecord(line_no, "missing field 'widget'")
        if not isinstance(widget, str):
            raise MalformedRecord(line_no, "field 'widget' must be a string")
        ts = _required_ts(record, line_no)
        products = record.get("products")
        if products is None:
            raise MalformedRecord(line_no, "missing field 'products'")
        if not isinstance(products, list):
            raise MalformedRecord(line_no, "field 'products' must be a list")
        if not products:
            raise MalformedRecord(line_no, "empty products")
        cleaned = []
        seen = set()
        for product in products:
            if not isinstance(product, str) or not product.strip():
                raise MalformedRecord(line_no, "products must be non-empty strings")
            product = product.strip()
            if product in seen:
                raise MalformedRecord(line_no, f"duplicate product {product!r}")
            seen.add(product)
            cleaned.append(product)
        return Hit(hit_id, customer, widget, ts, tuple(cleaned))

    kind = _ACTION_TAGS.get(tag) if isinstance(tag, str) else None
    if kind is None:
        raise MalformedRecord(line_no, f"unknown type {tag!r}")
    customer = _required_id(record, "customer", line_no)
    product = _required_id(record, "product", line_no)
    ts = _required_ts(record, line_no)
    return Action(kind, customer, product, ts)


def parse_event_line(line, line_no):
    """Decodes one canonical JSON Lines record into a Hit or an Action."""
    try:
        record = json.loads(line)
    except ValueError as exc:
        raise MalformedRecord(line_no, f"invalid JSON: {exc}") from None
    return parse_event_record(record, line_no)


def serialize_event(event):
    if isinstance(event, Hit):
        record = {
            "type": "hit",
            "hit_id": event.hit_id,
            "customer": event.customer,
            "widget": event.widget_id,
            "ts": format_timestamp(event.ts),
            "products": list(event.products),
        }
    else:
        record = {
            "type": event.kind.value,
            "customer": event.customer,
            "product": event.product,
            "ts": format_timestamp(event.ts),
        }
    return json.dumps(record, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class EventLog:
    hits: tuple = ()
    actions: tuple = ()
    source_name: str = ""

    @classmethod
    def build(cls, hits, actions, source_name=""):
        """Returns a normalized log; the sort is stable, so ties keep input order."""
        return cls(
            hits=tuple(sorted(hits, key=_by_ts)),
            actions=tuple(sorted(actions, key=_by_ts)),
            source_name=source_name,
        )

    def normalize(self):
        return EventLog.build(self.hits, self.actions, self.source_name)

    @property
    def size(self):
        return len(self.hits) + len(self.actions)

    def actions_of(self, kind):
        return [a for a in self.actions if a.kind is kind]

    def events(self):
        """All events in time order, hits first among equal timestamps."""
        return heapq.merge(self.hits, self.actions, key=_by_ts)


def _collect(records, source_name):
    hits = []
    actions = []
    first_line = {}
    for line_no, event in records:
        if isinstance(event, Hit):
            if event.hit_id in first_line:
                raise DuplicateHitId(event.hit_id, line_no)
            first_line[event.hit_id] = line_no
            hits.append(event)
        else:
            actions.append(event)
    log = EventLog.build(hits, actions, source_name)
    logger.info(
        "Loaded %s: %d hits, %d actions", source_name or "<log>", len(log.hits), len(log.actions)
    )
    return log


def _clean_id(value):
    return type(value) is str and value != "" and value.strip() == value


def _fast_event(line):
    """
    Decodes a line already in canonical form, or returns None so the caller
    can fall back to the validating path and its error messages.
    """
    try:
        record, end = _raw_decode(line)
    except ValueError:
        return None
    if end != len(line) or type(record) is not dict:
        return None
    tag = record.get("type")
    customer = record.get("customer")
    ts = record.get("ts")
    if type(tag) is not str or not _clean_id(customer) or type(ts) is not str:
        return None
    try:
        ts = parse_timestamp(ts)
    except ValueError:
        return None
    if tag == "hit":
        hit_id = record.get("hit_id")
        widget = record.get("widget")
        products = record.get("products")
        if not _clean_id(hit_id) or type(widget) is not str or type(products) is not list:
            return None
        products = tuple(products)
        try:
            clean = products and tuple(map(str.strip, products)) == products
        except TypeError:
            return None
        if not clean or "" in products or len(frozenset(products)) != len(products):
            return None
        return Hit(hit_id, customer, widget, ts, products)
    kind = _ACTION_TAGS.get(tag)
    product = record.get("product")
    if kind is None or not _clean_id(product):
        return None
    return Action(kind, customer, product, ts)


def _parse_lines(lines):
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped[0] == "#":
            continue
        event = _fast_event(stripped)
        if event is None:
            event = parse_event_line(stripped, line_no)
        yield line_no, event


def read_log(stream, source_name=""):
    """Parses an open text stream of canonical JSON Lines."""
    try:
        return _collect(_parse_lines(stream), source_name)
    except UnicodeDecodeError as exc:
        raise LogIOError(source_name or "<stream>", exc) from None


def load_log(path):
    """
    Loads and normalizes a JSON Lines log. `-` reads standard input.

    Raises LogIOError when the file cannot be read, MalformedRecord for the
    first bad line and DuplicateHitId when a hit_id repeats.
    """
    if str(path) == "-":
        return read_log(sys.stdin, "<stdin>")
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as handle:
            return read_log(handle, path.name)
    except OSError as exc:
        raise LogIOError(path, exc.strerror or exc) from None


def dump_log(log, stream):
    for event in log.events():
        stream.write(serialize_event(event))
        stream.write("\n")


def load_csv(path):
    """
    Converts a flat CSV export into an EventLog.

    Columns: type, hit_id, customer, widget, ts, products, product. Hit rows
    list their products separated by `|`. Row numbers in errors count the
    header as line 1.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, ValueError) as exc:
        raise LogIOError(path, exc) from None

    def records():
        for offset, row in enumerate(frame.to_dict("records")):
            line_no = offset + 2
            record = {k: v for k, v in row.items() if v != ""}
            if record.get("type") == "hit":
                raw = record.get("products", "")
                record["products"] = [p for p in raw.split("|") if p != ""]
            yield line_no, parse_event_record(record, line_no)

    return _collect(records(), Path(str(path)).name)


def convert_csv(path, stream):
    """Writes a CSV export to `stream` as canonical JSON Lines; returns the log."""
    log = load_csv(path)
    dump_log(log, stream)
    return log


@dataclass(frozen=True)
class LogWarning:
    message: str
    count: int
    example: str = ""

    def to_dict(self):
        return {"message": self.message, "count": self.count, "example": self.example}


@dataclass(frozen=True)
class ValidationReport:
    source_name: str
    hits: int
    clicks: int
    atcs: int
    buys: int
    customers: int
    first_ts: Optional[datetime]
    last_ts: Optional[datetime]
    warnings: tuple = field(default=())

    def counts(self):
        return {"hits": self.hits, "clicks": self.clicks, "atcs": self.atcs, "buys": self.buys}

    def to_dict(self):
        return {
            "source_name": self.source_name,
            **self.counts(),
            "customers": self.customers,
            "first_ts": format_timestamp(self.first_ts) if self.first_ts else None,
            "last_ts": format_timestamp(self.last_ts) if self.last_ts else None,
            "warnings": [w.to_dict() for w in self.warnings],
        }


def validate_log(log):
    """
    Summarizes a log and flags legal-but-suspicious records.

    Two warnings exist: actions earlier than the acting customer's first Hit
    (or by a customer with no Hit at all), and actions on products that no
    Hit in the log ever showed.
    """
    counts = defaultdict(int)
    first_hit = {}
    shown = set()
    for hit in log.hits:
        first_hit.setdefault(hit.customer, hit.ts)
        shown.update(hit.products)
    customers = set(first_hit)

    early = []
    unattributable = []
    for action in log.actions:
        counts[action.kind] += 1
        customers.add(action.customer)
        start = first_hit.get(action.customer)
        if start is None or action.ts < start:
            early.append(action)
        if action.product not in shown:
            unattributable.append(action)

    warnings = []
    if early:
        a = early[0]
        warnings.append(LogWarning(
            "action precedes first hit", len(early),
            f"{a.kind.value} by {a.customer} at {format_timestamp(a.ts)}",
        ))
    if unattributable:
        a = unattributable[0]
        warnings.append(LogWarning(
            "unattributable product", len(unattributable),
            f"{a.kind.value} of {a.product} by {a.customer}",
        ))
    for warning in warnings:
        logger.warning("%s: %d action(s), e.g. %s", warning.message, warning.count, warning.example)

    stamps = [e.ts for e in (log.hits[:1] + log.hits[-1:] + log.actions[:1] + log.actions[-1:])]
    return ValidationReport(
        source_name=log.source_name,
        hits=len(log.hits),
        clicks=counts[ActionKind.CLICK],
        atcs=counts[ActionKind.ATC],
        buys=counts[ActionKind.BUY],
        customers=len(customers),
        first_ts=min(stamps) if stamps else None,
        last_ts=max(stamps) if stamps else None,
        warnings=tuple(warnings),
    )
