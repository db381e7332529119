from datetime import datetime, timedelta, timezone

import pytest

from reclens.events import Action, ActionKind, EventLog, Hit

DAY0 = datetime(2023, 1, 1, tzinfo=timezone.utc)


def at(hours=0, minutes=0, seconds=0, days=0):
    return DAY0 + timedelta(days=days, hours=hours, minutes=minutes, seconds=seconds)


def hit(hit_id, ts, products, customer="c1", widget="w1"):
    return Hit(hit_id, customer, widget, ts, tuple(products))


def click(product, ts, customer="c1"):
    return Action(ActionKind.CLICK, customer, product, ts)


def atc(product, ts, customer="c1"):
    return Action(ActionKind.ATC, customer, product, ts)


def buy(product, ts, customer="c1"):
    return Action(ActionKind.BUY, customer, product, ts)


def make_log(*events, source_name="test"):
    hits = [e for e in events if isinstance(e, Hit)]
    actions = [e for e in events if not isinstance(e, Hit)]
    return EventLog.build(hits, actions, source_name)


@pytest.fixture
def log_dir(tmp_path, settings):
    settings.RECLENS_LOG_DIR = tmp_path
    return tmp_path
