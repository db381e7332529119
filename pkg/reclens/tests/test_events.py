import io
import json

import pytest

from reclens.events import (
    Action, ActionKind, EventLog, Hit, dump_log, format_timestamp, load_csv, load_log,
    parse_event_line, parse_timestamp, read_log, serialize_event, validate_log,
)
from reclens.exceptions import DuplicateHitId, LogIOError, MalformedRecord

from .conftest import at, buy, click, hit, make_log

HIT_LINE = (
    '{"type":"hit","hit_id":"h1","customer":"c1","widget":"w1",'
    '"ts":"2023-01-01T10:00:00Z","products":["p1","p2"]}'
)
CLICK_LINE = '{"type":"click","customer":"c1","product":"p1","ts":"2023-01-01T10:03:00Z"}'


def test_parse_hit_line():
    event = parse_event_line(HIT_LINE, 1)
    assert event == Hit("h1", "c1", "w1", at(10), ("p1", "p2"))


def test_parse_click_line():
    event = parse_event_line(CLICK_LINE, 1)
    assert event == Action(ActionKind.CLICK, "c1", "p1", at(10, 3))


def test_unknown_fields_are_ignored():
    record = json.loads(CLICK_LINE)
    record["referrer"] = "home"
    assert parse_event_line(json.dumps(record), 1).product == "p1"


@pytest.mark.parametrize("line, reason", [
    (HIT_LINE.replace('["p1","p2"]', "[]"), "empty products"),
    (HIT_LINE.replace('["p1","p2"]', '["p1","p1"]'), "duplicate product"),
    ('{"type":"view","customer":"c1","product":"p1","ts":"2023-01-01T10:00:00Z"}', "unknown type"),
    ('{"type":"click","customer":"c1","ts":"2023-01-01T10:00:00Z"}', "missing field 'product'"),
    ('{"type":"click","customer":"c1","product":"p1","ts":"2023-01-01T10:00:00"}', "without offset"),
    ('{"type":"click","customer":"c1","product":"p1","ts":"yesterday"}', "bad timestamp"),
    ('{"type":"click","customer":" ","product":"p1","ts":"2023-01-01T10:00:00Z"}', "non-empty"),
    ("[1, 2]", "not a JSON object"),
    ("{not json", "invalid JSON"),
])
def test_malformed_records(line, reason):
    with pytest.raises(MalformedRecord) as info:
        parse_event_line(line, 7)
    assert info.value.line_no == 7
    assert reason in str(info.value)
    assert str(info.value).startswith("line 7:")


def test_timestamps_normalize_to_utc():
    assert parse_timestamp("2023-01-01T12:00:00+02:00") == at(10)
    assert format_timestamp(at(10, 0, 5)) == "2023-01-01T10:00:05Z"


@pytest.mark.parametrize("ts", ["2023-01-01T10:00:00.250Z", "2023-01-01T10:00:00.250000Z"])
def test_fractional_canonical_timestamps(ts):
    assert parse_timestamp(ts) == at(10).replace(microsecond=250_000)


def test_loose_lines_read_like_canonical_ones():
    loose = (
        '{"type": "hit", "hit_id": " h1", "customer": "c1 ", "widget": "w1",'
        ' "ts": "2023-01-01T12:00:00+02:00", "products": ["p1", " p2"]}'
    )
    canonical = read_log(io.StringIO(HIT_LINE + "\n"))
    assert read_log(io.StringIO(loose + "\n")) == canonical


def test_read_log_reports_the_failing_line():
    text = HIT_LINE + "\n" + HIT_LINE.replace('"h1"', '"h2"').replace('"p2"', '"p1"') + "\n"
    with pytest.raises(MalformedRecord) as info:
        read_log(io.StringIO(text))
    assert info.value.line_no == 2
    assert "duplicate product" in str(info.value)


def test_serialize_then_parse_is_identity():
    for line in (HIT_LINE, CLICK_LINE):
        event = parse_event_line(line, 1)
        assert parse_event_line(serialize_event(event), 1) == event
        assert serialize_event(event) == line


def test_load_log_sorts_and_keeps_ties_in_input_order(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text("\n".join([
        '{"type":"click","customer":"c2","product":"p9","ts":"2023-01-01T10:05:00Z"}',
        "# a comment",
        "",
        '{"type":"buy","customer":"c1","product":"p1","ts":"2023-01-01T10:05:00Z"}',
        HIT_LINE,
    ]) + "\n")
    log = load_log(path)
    assert [h.hit_id for h in log.hits] == ["h1"]
    assert [a.kind for a in log.actions] == [ActionKind.CLICK, ActionKind.BUY]
    assert log.source_name == "log.jsonl"


def test_load_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    log = load_log(path)
    assert log.hits == () and log.actions == ()


def test_duplicate_hit_id(tmp_path):
    path = tmp_path / "dup.jsonl"
    path.write_text(HIT_LINE + "\n" + HIT_LINE + "\n")
    with pytest.raises(DuplicateHitId) as info:
        load_log(path)
    assert info.value.hit_id == "h1"
    assert info.value.line_no == 2


def test_missing_file_is_io_error(tmp_path):
    with pytest.raises(LogIOError):
        load_log(tmp_path / "missing.jsonl")


def test_malformed_line_reports_its_number():
    with pytest.raises(MalformedRecord) as info:
        read_log(io.StringIO(HIT_LINE + "\n{}\n"))
    assert info.value.line_no == 2


def test_dump_then_read_round_trips():
    log = make_log(
        hit("h1", at(10), ["p1"]), click("p1", at(10)), hit("h2", at(11), ["p2"], customer="c2"),
        buy("p2", at(12), customer="c2"),
    )
    out = io.StringIO()
    dump_log(log, out)
    lines = out.getvalue().splitlines()
    # hits go first at equal timestamps
    assert json.loads(lines[0])["type"] == "hit"
    assert read_log(io.StringIO(out.getvalue()), "test") == log


def test_events_merge_in_time_order():
    log = make_log(hit("h1", at(10), ["p1"]), click("p1", at(9)), click("p1", at(11)))
    assert [e.ts for e in log.events()] == [at(9), at(10), at(11)]


def test_load_csv(tmp_path):
    path = tmp_path / "export.csv"
    path.write_text(
        "type,hit_id,customer,widget,ts,products,product\n"
        "hit,h1,c1,w1,2023-01-01T10:00:00Z,p1|p2,\n"
        "click,,c1,,2023-01-01T10:01:00Z,,p2\n"
    )
    log = load_csv(path)
    assert log.hits == (Hit("h1", "c1", "w1", at(10), ("p1", "p2")),)
    assert log.actions == (Action(ActionKind.CLICK, "c1", "p2", at(10, 1)),)


def test_load_csv_reports_row_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(
        "type,hit_id,customer,widget,ts,products,product\n"
        "hit,h1,c1,w1,2023-01-01T10:00:00Z,p1,\n"
        "hit,h2,c1,w1,2023-01-01T10:00:00Z,,\n"
    )
    with pytest.raises(MalformedRecord) as info:
        load_csv(path)
    assert info.value.line_no == 3


def test_validate_counts():
    log = make_log(hit("h1", at(10), ["p1"]), hit("h2", at(11), ["p1"]), click("p1", at(10, 1)))
    report = validate_log(log)
    assert report.counts() == {"hits": 2, "clicks": 1, "atcs": 0, "buys": 0}
    assert report.customers == 1
    assert report.warnings == ()


def test_validate_flags_action_before_first_hit():
    log = make_log(click("p1", at(9)), hit("h1", at(10), ["p1"]))
    messages = [w.message for w in validate_log(log).warnings]
    assert messages == ["action precedes first hit"]


def test_validate_flags_unattributable_product():
    log = make_log(hit("h1", at(10), ["p1"]), buy("p7", at(11)))
    warnings = validate_log(log).warnings
    assert [w.message for w in warnings] == ["unattributable product"]
    assert warnings[0].count == 1


def test_empty_log_validates():
    report = validate_log(EventLog())
    assert report.first_ts is None and report.hits == 0
