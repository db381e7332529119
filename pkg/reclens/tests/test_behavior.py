import logging

import pytest

from reclens.behavior import BehaviorReport, behavior_report, bounce_indicator
from reclens.events import EventLog
from reclens.exceptions import EmptyPopulation

from .conftest import at, buy, click, hit, make_log


def test_counts_per_customer():
    log = make_log(
        hit("h1", at(10), ["p1"], customer="a"), hit("h2", at(11), ["p1"], customer="a"),
        hit("h3", at(10), ["p2"], customer="b"), hit("h4", at(11), ["p2"], customer="b"),
        *[click("p1", at(10, k), customer="a") for k in range(1, 5)],
        click("p2", at(10, 1), customer="b"), click("p2", at(10, 2), customer="b"),
        buy("p1", at(12), customer="a"),
    )
    report = behavior_report(log)
    assert report.hits_per_customer == 2.0
    assert report.buyers_per_customer == 0.5
    assert report.clicks_per_customer == 3.0
    assert report.clicks_per_buy == 6.0


def test_clicks_per_buy_undefined_without_buys():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 1)))
    assert behavior_report(log).clicks_per_buy is None
    assert behavior_report(log).to_dict()["clicks_per_buy"] is None


def test_single_customer_without_actions():
    report = behavior_report(make_log(hit("h1", at(10), ["p1"])))
    assert (
        report.hits_per_customer, report.buyers_per_customer,
        report.clicks_per_customer, report.clicks_per_buy,
    ) == (1.0, 0.0, 0.0, None)


def test_actions_outside_population_are_ignored():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 1), customer="stranger"))
    assert behavior_report(log).clicks == 0


def test_empty_population():
    with pytest.raises(EmptyPopulation):
        behavior_report(EventLog())


def report_with_clicks(clicks, customers=10):
    return BehaviorReport(customers=customers, hits=customers, clicks=clicks, atcs=0, buys=0, buyers=0)


@pytest.mark.parametrize("clicks, expected", [(11, True), (30, False), (15, False)])
def test_bounce_indicator(clicks, expected):
    assert bounce_indicator(report_with_clicks(clicks), threshold=1.5) is expected


def test_bounce_threshold_comes_from_settings(settings, caplog, monkeypatch):
    settings.RECLENS_BOUNCE_THRESHOLD = 4.0
    monkeypatch.setattr(logging.getLogger("reclens"), "propagate", True)
    with caplog.at_level(logging.WARNING, logger="reclens"):
        assert bounce_indicator(report_with_clicks(30))
    assert "below bounce threshold" in caplog.text


def test_report_dict_round_trip():
    report = report_with_clicks(12)
    assert BehaviorReport.from_dict(report.to_dict()) == report
