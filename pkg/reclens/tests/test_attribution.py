from datetime import timedelta

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from reclens import attribution
from reclens.attribution import NoRepeatScope, WindowConfig, attribute, attribution_oracle
from reclens.events import ActionKind, EventLog, Hit, Action
from reclens.exceptions import InvalidConfig
from reclens.generator import GeneratorConfig, generate

from .conftest import DAY0, at, atc, buy, click, hit, make_log


def by_id(result):
    return {entry.hit_id: entry for entry in result.per_hit}


def test_click_inside_window_is_credited():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 4)))
    assert by_id(attribute(log))["h1"].clicked


def test_click_after_window_is_not_credited():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 6)))
    result = attribute(log)
    assert not by_id(result)["h1"].clicked
    assert result.unattributed_actions[ActionKind.CLICK] == 1


def test_window_bound_is_inclusive():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 5)))
    assert by_id(attribute(log))["h1"].clicked


def test_action_at_hit_instant_is_not_credited():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10)))
    assert not by_id(attribute(log))["h1"].clicked


def test_repeat_click_is_not_a_first_click():
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)),
        hit("h2", at(11), ["p1"]), click("p1", at(11, 1)),
    )
    entries = by_id(attribute(log))
    assert entries["h1"].clicked and entries["h1"].clicked_norepeat
    assert entries["h2"].clicked and not entries["h2"].clicked_norepeat


def test_norepeat_day_scope_resets_each_day():
    cfg = WindowConfig(norepeat_scope=NoRepeatScope.DAY)
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)),
        hit("h2", at(10, days=1), ["p1"]), click("p1", at(10, 1, days=1)),
    )
    assert by_id(attribute(log, cfg))["h2"].clicked_norepeat


def test_click_and_buy_next_day():
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 3)), buy("p1", at(9, days=1)),
    )
    entry = by_id(attribute(log))["h1"]
    assert entry.bought and entry.clicked_and_bought


def test_buy_without_click_is_not_click_and_buy():
    log = make_log(hit("h1", at(10), ["p1"]), buy("p1", at(12)))
    entry = by_id(attribute(log))["h1"]
    assert entry.bought and not entry.clicked_and_bought


def test_click_and_buy_needs_the_same_product():
    log = make_log(
        hit("h1", at(10), ["p1", "p2"]), click("p1", at(10, 1)), buy("p2", at(11)),
    )
    entry = by_id(attribute(log))["h1"]
    assert entry.bought and not entry.clicked_and_bought


def test_atc_leg_for_click_and_buy():
    cfg = WindowConfig(candb_leg=ActionKind.ATC)
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)), buy("p1", at(11)),
        hit("h2", at(12), ["p2"]), atc("p2", at(12, 10)), buy("p2", at(13)),
    )
    entries = by_id(attribute(log, cfg))
    assert not entries["h1"].clicked_and_bought
    assert entries["h2"].clicked_and_bought


def test_one_buy_backs_one_click_and_buy():
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10, 1)),
        hit("h2", at(11), ["p1"]), click("p1", at(11, 1)), buy("p1", at(12)),
    )
    entries = by_id(attribute(log))
    # the buy is credited to h2 only
    assert not entries["h1"].bought
    assert entries["h2"].clicked_and_bought


def test_click_and_buy_can_use_a_buy_credited_to_a_later_hit():
    log = make_log(
        hit("h1", at(10), ["p1", "p2"]), click("p1", at(10, 1)), buy("p2", at(10, 30)),
        hit("h2", at(11), ["p1"]), buy("p1", at(11, 30)),
    )
    entries = by_id(attribute(log))
    assert entries["h1"].clicked_and_bought
    assert entries["h2"].bought and not entries["h2"].clicked_and_bought
    assert attribute(log) == attribution_oracle(log)


def test_latest_hit_takes_the_credit():
    log = make_log(
        hit("h1", at(10), ["p1"]), hit("h2", at(10, 2), ["p1"]), click("p1", at(10, 3)),
    )
    entries = by_id(attribute(log))
    assert entries["h2"].clicked and not entries["h1"].clicked


def test_other_customers_hits_do_not_count():
    log = make_log(hit("h1", at(10), ["p1"], customer="c2"), click("p1", at(10, 1)))
    result = attribute(log)
    assert not by_id(result)["h1"].clicked
    assert result.unattributed_actions[ActionKind.CLICK] == 1


def test_credited_actions_are_listed():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(10, 1)), atc("p1", at(10, 2)))
    entry = by_id(attribute(log))["h1"]
    assert [c.kind for c in entry.credited] == [ActionKind.CLICK, ActionKind.ATC]
    assert attribute(log).credited_count(ActionKind.ATC) == 1


def test_empty_log():
    assert attribute(EventLog()).per_hit == ()
    assert attribution_oracle(EventLog()).per_hit == ()


def test_single_hit_without_actions():
    entry = attribute(make_log(hit("h1", at(10), ["p1"]))).per_hit[0]
    assert not any([
        entry.clicked, entry.clicked_norepeat, entry.atc, entry.atc_norepeat,
        entry.bought, entry.clicked_and_bought,
    ])


@pytest.mark.parametrize("kwargs", [
    {"click_window": timedelta(0)},
    {"click_window": timedelta(hours=1)},
    {"norepeat_scope": "week"},
    {"candb_leg": "buy"},
])
def test_invalid_windows(kwargs):
    with pytest.raises(InvalidConfig):
        WindowConfig(**kwargs)


def test_window_config_dict_round_trip():
    cfg = WindowConfig(atc_window=timedelta(minutes=45), tz_offset=timedelta(hours=2))
    assert WindowConfig.from_dict(cfg.to_dict()) == cfg


CUSTOMERS = ["c1", "c2", "c3"]
PRODUCTS = ["p1", "p2", "p3", "p4"]
minutes = st.integers(min_value=0, max_value=3 * 24 * 60)


@st.composite
def event_logs(draw):
    hit_count = draw(st.integers(min_value=0, max_value=25))
    hits = [
        Hit(
            f"h{k}", draw(st.sampled_from(CUSTOMERS)), "w1",
            DAY0 + timedelta(minutes=draw(minutes)),
            tuple(draw(st.lists(st.sampled_from(PRODUCTS), min_size=1, max_size=3, unique=True))),
        )
        for k in range(hit_count)
    ]
    actions = draw(st.lists(
        st.builds(
            Action, st.sampled_from(list(ActionKind)), st.sampled_from(CUSTOMERS),
            st.sampled_from(PRODUCTS), minutes.map(lambda m: DAY0 + timedelta(minutes=m)),
        ),
        max_size=60,
    ))
    return EventLog.build(hits, actions, "random")


@st.composite
def window_configs(draw, max_atc_minutes=600):
    click_w = draw(st.integers(min_value=1, max_value=120))
    atc_w = draw(st.integers(min_value=click_w, max_value=max_atc_minutes))
    buy_w = draw(st.integers(min_value=atc_w, max_value=2 * 24 * 60))
    return WindowConfig(
        click_window=timedelta(minutes=click_w),
        atc_window=timedelta(minutes=atc_w),
        buy_window=timedelta(minutes=buy_w),
        norepeat_scope=draw(st.sampled_from(list(NoRepeatScope))),
        candb_leg=draw(st.sampled_from([ActionKind.CLICK, ActionKind.ATC])),
        tz_offset=timedelta(hours=draw(st.integers(min_value=-12, max_value=14))),
    )


@hsettings(max_examples=500, deadline=None)
@given(log=event_logs(), cfg=window_configs())
def test_sweep_matches_oracle_on_random_logs(log, cfg):
    assert attribute(log, cfg) == attribution_oracle(log, cfg)


# the generator needs at least one hit slot of 3 * atc_window + 10m per day
@hsettings(max_examples=500, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32), cfg=window_configs(max_atc_minutes=7 * 60))
def test_sweep_matches_oracle_on_generated_logs(seed, cfg):
    gen = GeneratorConfig(
        seed=seed, customers=15, days=3, repeat_click_prob=0.5, click_prob=0.4,
        buy_given_click_prob=0.4, stray_buy_prob=0.05, windows=cfg,
    )
    log, _ = generate(gen)
    assert attribute(log, cfg) == attribution_oracle(log, cfg)


@hsettings(max_examples=200, deadline=None)
@given(log=event_logs())
def test_norepeat_flags_imply_plain_flags(log):
    for entry in attribute(log).per_hit:
        assert entry.clicked or not entry.clicked_norepeat
        assert entry.atc or not entry.atc_norepeat
        assert entry.bought or not entry.clicked_and_bought


@pytest.mark.slow
def test_parallel_attribution_equals_sequential(monkeypatch):
    log, _ = generate(GeneratorConfig(seed=3, customers=80, days=4))
    monkeypatch.setattr(attribution, "PARALLEL_MIN_EVENTS", 0)
    assert attribute(log, n_jobs=2) == attribute(log, n_jobs=1)


def test_partition_counts_actions_of_unknown_customers():
    log = make_log(
        hit("h1", at(10), ["p1"]), hit("h2", at(10), ["p1"], customer="c2"),
        click("p1", at(10, 1), customer="c9"),
    )
    chunks, orphans = attribution._partition(log, 2)
    assert len(chunks) == 2
    assert [a.customer for a in orphans] == ["c9"]
