import io
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entroclust.event_log import (
    BOS,
    EOS,
    CsvConfig,
    Event,
    FormatError,
    ReservedLabelError,
    VariantLog,
    XesParseError,
    augment_bos_eos,
    parse_csv,
    parse_xes,
    read_log,
    to_variant_log,
    variant_log_from_json,
    variant_log_to_json,
)

from conftest import make_log


def csv_bytes(text: str) -> io.BytesIO:
    return io.BytesIO(text.encode("utf-8"))


class TestParseCsv:
    def test_three_rows(self):
        data = "case,activity,ts\n1,A,2020-01-01T00:00:00\n1,B,2020-01-01T00:01:00\n2,A,2020-01-02T00:00:00\n"
        events = parse_csv(csv_bytes(data), CsvConfig(order_col="ts"))
        assert [(e.case_id, e.activity) for e in events] == [("1", "A"), ("1", "B"), ("2", "A")]
        log = to_variant_log(events)
        assert log.total_cases == 2

    def test_missing_activity_column(self):
        data = "case,act,ts\n1,A,1\n"
        with pytest.raises(FormatError, match="activity"):
            parse_csv(csv_bytes(data), CsvConfig(order_col="ts", order_kind="index"))

    def test_bad_timestamp_reports_row(self):
        data = "case,activity,timestamp\n1,A,2020-01-01\n1,B,yesterday\n"
        with pytest.raises(FormatError) as info:
            parse_csv(csv_bytes(data))
        assert info.value.row == 3

    def test_equal_timestamps_keep_file_order(self):
        data = "case,activity,timestamp\n1,B,2020-01-01T10:00:00Z\n1,A,2020-01-01T10:00:00Z\n"
        log = to_variant_log(parse_csv(csv_bytes(data)))
        assert log[0].trace == ("B", "A")

    def test_index_ordering_and_delimiter(self):
        data = "c;a;i\nx;B;2\nx;A;1\n"
        cfg = CsvConfig("c", "a", "i", order_kind="index", delimiter=";")
        log = to_variant_log(parse_csv(csv_bytes(data), cfg))
        assert log[0].trace == ("A", "B")

    def test_accepts_path(self, tmp_path):
        p = tmp_path / "log.csv"
        p.write_text("case,activity,timestamp\n1,A,2020-01-01 10:00:00\n", encoding="utf-8")
        assert len(parse_csv(p)) == 1


XES_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0" xmlns="http://www.xes-standard.org/">
{traces}
</log>"""


def xes_trace(name, events):
    parts = [f'<trace><string key="concept:name" value="{name}"/>']
    for act, ts in events:
        parts.append("<event>")
        if act is not None:
            parts.append(f'<string key="concept:name" value="{act}"/>')
        if ts is not None:
            parts.append(f'<date key="time:timestamp" value="{ts}"/>')
        parts.append('<string key="org:resource" value="ignored"/></event>')
    parts.append("</trace>")
    return "".join(parts)


class TestParseXes:
    def test_one_trace(self):
        doc = XES_TEMPLATE.format(traces=xes_trace("c1", [("A", None), ("B", None)]))
        events = parse_xes(doc.encode())
        assert [(e.case_id, e.activity) for e in events] == [("c1", "A"), ("c1", "B")]

    def test_zero_traces(self):
        assert parse_xes(XES_TEMPLATE.format(traces="").encode()) == []

    def test_timestamps_reorder(self):
        doc = XES_TEMPLATE.format(traces=xes_trace("c1", [
            ("A", "2020-01-01T10:02:00.000+00:00"),
            ("B", "2020-01-01T10:00:00.000+00:00"),
            ("C", "2020-01-01T10:01:00.000+00:00"),
        ]))
        log = to_variant_log(parse_xes(io.BytesIO(doc.encode())))
        # sort-by-timestamp oracle
        assert log[0].trace == ("B", "C", "A")

    def test_malformed(self):
        with pytest.raises(XesParseError, match="line"):
            parse_xes(b"<log><trace></log>")

    def test_event_without_name(self):
        doc = XES_TEMPLATE.format(traces=xes_trace("c9", [("A", None), (None, None)]))
        with pytest.raises(XesParseError, match="c9"):
            parse_xes(doc.encode())


class TestVariantLog:
    def test_counting(self):
        events = [Event("1", "A", 0), Event("1", "B", 1), Event("2", "A", 0), Event("2", "B", 1),
                  Event("3", "A", 0), Event("3", "C", 1)]
        log = to_variant_log(events)
        assert [(v.trace, v.multiplicity) for v in log] == [(("A", "B"), 2), (("A", "C"), 1)]
        assert log.total_cases == 3
        assert log.vocabulary == {"A", "B", "C"}

    def test_empty(self):
        log = to_variant_log([])
        assert len(log) == 0 and log.total_cases == 0

    def test_ten_identical(self):
        events = [Event(str(c), a, i) for c in range(10) for i, a in enumerate("XYZ")]
        log = to_variant_log(events)
        assert len(log) == 1 and log[0].multiplicity == 10

    def test_order_ties_by_first_seen(self):
        events = [Event("1", "B", 0), Event("2", "A", 0), Event("3", "A", 0), Event("4", "C", 0), Event("5", "B", 0)]
        log = to_variant_log(events)
        # A and B both have 2 cases; B's first case precedes A's
        assert [v.trace for v in log] == [("B",), ("A",), ("C",)]
        assert [v.first_seen_index for v in log] == [0, 1, 3]

    def test_duplicate_traces_rejected(self):
        with pytest.raises(ValueError):
            make_log([(("A",), 1), (("A",), 2)])


class TestAugment:
    def test_wraps(self):
        log = augment_bos_eos(make_log([(("A", "B"), 3)], augment=False))
        assert log[0].trace == (BOS, "A", "B", EOS)
        assert log[0].multiplicity == 3

    def test_empty_trace(self):
        log = augment_bos_eos(make_log([((), 1)], augment=False))
        assert log[0].trace == (BOS, EOS)

    def test_collision(self):
        with pytest.raises(ReservedLabelError, match=BOS):
            augment_bos_eos(make_log([(("A", BOS), 1)], augment=False))


class TestJson:
    def test_roundtrip_strips_sentinels(self, worked_log):
        data = variant_log_to_json(worked_log)
        assert data == {"variants": [{"trace": ["A", "B"], "multiplicity": 2},
                                     {"trace": ["A", "C"], "multiplicity": 1}], "total_cases": 3}
        back = variant_log_from_json(json.dumps(data))
        assert back.augmented and back.pairs() == worked_log.pairs()

    def test_total_mismatch(self):
        with pytest.raises(FormatError):
            variant_log_from_json({"variants": [{"trace": ["A"], "multiplicity": 2}], "total_cases": 3})

    def test_read_log_formats(self, tmp_path):
        p = tmp_path / "v.json"
        p.write_text(json.dumps({"variants": [{"trace": ["A"], "multiplicity": 2}], "total_cases": 2}))
        assert read_log(p, "variants-json").total_cases == 2
        with pytest.raises(ValueError):
            read_log(p, "parquet")


case_traces = st.lists(st.lists(st.sampled_from("ABCD"), max_size=6), max_size=25)


@given(case_traces)
def test_variant_compression_roundtrip(traces):
    events = [Event(f"c{c}", a, i) for c, t in enumerate(traces) for i, a in enumerate(t)]
    log = to_variant_log(events)
    non_empty = [tuple(t) for t in traces if t]
    assert sorted(log.expand()) == sorted(non_empty)
    assert log.total_cases == len({e.case_id for e in events})
    again = to_variant_log(events)
    assert [v.trace for v in again] == [v.trace for v in log]
    keys = [(-v.multiplicity, v.first_seen_index) for v in log]
    assert keys == sorted(keys)
