from datetime import date, timedelta

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from reclens.attribution import AttributedActions, AttributionResult, attribute
from reclens.exceptions import EmptyDenominator
from reclens.generator import GeneratorConfig, generate
from reclens.metrics import (
    MetricKind, MetricValue, bucket_all, bucket_daily, compute_all, compute_metric,
)

from .conftest import at, click, hit, make_log
from .test_attribution import event_logs, window_configs


def result_with(clicked):
    return AttributionResult(tuple(
        AttributedActions(f"h{k}", clicked=flag) for k, flag in enumerate(clicked)
    ))


def test_no_clicks_gives_zero_ctr():
    assert compute_metric(result_with([False] * 10), MetricKind.CTR).rate == 0.0


def test_ctr_is_the_fraction_of_clicked_hits():
    value = compute_metric(result_with([True, True, False, False]), MetricKind.CTR)
    assert value.rate == 0.5
    assert value.variance_of_mean == pytest.approx(0.25 / 4)
    assert value.std_dev == pytest.approx(0.25)


def test_zero_hits_has_no_rate():
    with pytest.raises(EmptyDenominator):
        compute_metric(AttributionResult(), MetricKind.CTR)
    with pytest.raises(EmptyDenominator):
        MetricValue(MetricKind.BTR, 0, 0).rate


def test_all_rates_zero_without_flags():
    assert [v.rate for v in compute_all(result_with([False] * 3))] == [0.0] * 6


def test_values_add_their_counts():
    total = MetricValue(MetricKind.CTR, 1, 4) + MetricValue(MetricKind.CTR, 2, 6)
    assert (total.successes, total.trials) == (3, 10)


@hsettings(max_examples=300, deadline=None)
@given(log=event_logs())
def test_deduplicated_metrics_never_exceed_their_plain_form(log):
    attr = attribute(log)
    if not attr.per_hit:
        return
    rates = {v.kind: v.rate for v in compute_all(attr)}
    assert rates[MetricKind.CTR_NoRepeat] <= rates[MetricKind.CTR]
    assert rates[MetricKind.ATC_TR_NoRepeat] <= rates[MetricKind.ATC_TR]
    assert rates[MetricKind.ClickAndBuy] <= rates[MetricKind.BTR]


@hsettings(max_examples=1000, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32),
    cfg=window_configs(max_atc_minutes=7 * 60),
    click_prob=st.floats(min_value=0.0, max_value=0.6),
    repeat_click_prob=st.floats(min_value=0.0, max_value=1.0),
)
def test_metric_ordering_holds_on_generated_logs(seed, cfg, click_prob, repeat_click_prob):
    log, _ = generate(GeneratorConfig(
        seed=seed, customers=6, days=2, click_prob=click_prob,
        repeat_click_prob=repeat_click_prob, stray_buy_prob=0.05, windows=cfg,
    ))
    attr = attribute(log, cfg)
    if not attr.per_hit:
        return
    rates = {v.kind: v.rate for v in compute_all(attr)}
    assert rates[MetricKind.CTR_NoRepeat] <= rates[MetricKind.CTR]
    assert rates[MetricKind.ATC_TR_NoRepeat] <= rates[MetricKind.ATC_TR]
    assert rates[MetricKind.ClickAndBuy] <= rates[MetricKind.BTR]


@hsettings(max_examples=200, deadline=None)
@given(log=event_logs(), hours=st.integers(min_value=-12, max_value=14))
def test_daily_buckets_add_up_to_the_whole_log(log, hours):
    attr = attribute(log)
    if not attr.per_hit:
        return
    offset = timedelta(hours=hours)
    series = bucket_all(attr, log, offset)
    for value in compute_all(attr):
        days = series[value.kind]
        assert days.total() == value
        assert days.dates() == sorted({(h.ts + offset).date() for h in log.hits})


@pytest.mark.parametrize("text, kind", [
    ("CTR", MetricKind.CTR),
    ("ctr-norepeat", MetricKind.CTR_NoRepeat),
    ("ATC_TR_NoRepeat", MetricKind.ATC_TR_NoRepeat),
    ("Click & Buy", MetricKind.ClickAndBuy),
    ("candb", MetricKind.ClickAndBuy),
])
def test_parse_metric_names(text, kind):
    assert MetricKind.parse(text) is kind


def test_parse_unknown_metric():
    with pytest.raises(ValueError):
        MetricKind.parse("revenue")


def three_day_log():
    return make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)),
        hit("h2", at(10, days=1), ["p1"]),
        hit("h3", at(10, days=2), ["p2"]), click("p2", at(10, 2, days=2)),
    )


def test_one_bucket_per_date():
    log = three_day_log()
    series = bucket_daily(attribute(log), log, MetricKind.CTR)
    assert series.dates() == [date(2023, 1, 1), date(2023, 1, 2), date(2023, 1, 3)]
    assert series.rates() == [1.0, 0.0, 1.0]


def test_offset_moves_late_hits_to_the_next_date():
    log = make_log(hit("h1", at(23, 59), ["p1"]))
    series = bucket_daily(attribute(log), log, MetricKind.CTR, tz_offset=timedelta(hours=2))
    assert series.dates() == [date(2023, 1, 2)]


def test_single_day_series_equals_whole_log_metric():
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)), hit("h2", at(12), ["p2"]),
    )
    attr = attribute(log)
    series = bucket_all(attr, log)
    for kind in MetricKind:
        assert len(series[kind].days) == 1
        assert series[kind].total() == compute_metric(attr, kind)


def test_bucketing_empty_attribution_fails():
    with pytest.raises(EmptyDenominator):
        bucket_all(AttributionResult(), make_log())
