"""Event log ingestion and variant-log construction.

Raw events (CSV or XES) are grouped per case, ordered, and compressed into a
:class:`VariantLog`: the distinct control-flow traces with their
multiplicities.  Variants are always kept in decreasing multiplicity order,
ties broken by first appearance, so every downstream algorithm sees the same
deterministic ordering.
"""

from __future__ import annotations

import csv
import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

BOS = "__BOS__"
EOS = "__EOS__"
SENTINELS = frozenset((BOS, EOS))

Trace = tuple  # tuple[str, ...]
OrderKey = Union[datetime, int]


class FormatError(ValueError):
    """Raised when an input file does not match the expected layout."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class XesParseError(FormatError):
    pass


class ReservedLabelError(ValueError):
    def __init__(self, label: str):
        self.label = label
        super().__init__(f"activity label {label!r} collides with a reserved sentinel")


@dataclass(frozen=True)
class Event:
    case_id: str
    activity: str
    order_key: OrderKey

    def __post_init__(self):
        if not self.activity:
            raise ValueError(f"empty activity label in case {self.case_id!r}")


@dataclass(frozen=True)
class Variant:
    trace: Trace
    multiplicity: int
    first_seen_index: int
    case_ids: tuple = ()

    def expanded_case_ids(self, variant_index: int) -> list[str]:
        """Case ids of this variant, synthesized when the source had none."""
        if self.case_ids:
            return list(self.case_ids)
        return [f"v{variant_index}-{i}" for i in range(self.multiplicity)]


@dataclass(frozen=True)
class VariantLog:
    variants: tuple
    augmented: bool = False
    vocabulary: frozenset = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        variants = tuple(sorted(self.variants, key=lambda v: (-v.multiplicity, v.first_seen_index)))
        object.__setattr__(self, "variants", variants)
        if self.vocabulary is None:
            vocab = {a for v in variants for a in v.trace}
            if self.augmented:
                vocab -= SENTINELS
            object.__setattr__(self, "vocabulary", frozenset(vocab))
        traces = [v.trace for v in variants]
        if len(set(traces)) != len(traces):
            raise ValueError("variant traces must be pairwise distinct")
        for v in variants:
            if v.multiplicity < 1:
                raise ValueError(f"non-positive multiplicity for {v.trace!r}")

    def __len__(self) -> int:
        return len(self.variants)

    def __iter__(self):
        return iter(self.variants)

    def __getitem__(self, i: int) -> Variant:
        return self.variants[i]

    @property
    def total_cases(self) -> int:
        return sum(v.multiplicity for v in self.variants)

    @property
    def traces(self) -> list:
        return [v.trace for v in self.variants]

    @property
    def multiplicities(self) -> list[int]:
        return [v.multiplicity for v in self.variants]

    def pairs(self) -> list[tuple]:
        return [(v.trace, v.multiplicity) for v in self.variants]

    def subset(self, indices: Sequence[int]) -> "VariantLog":
        """Sub-log holding the given variants.

        Indices must be in ascending order so that local index ``i`` maps back
        to ``indices[i]`` (the sort invariant is preserved by construction).
        """
        if list(indices) != sorted(indices):
            raise ValueError("subset indices must be ascending")
        return VariantLog(
            tuple(self.variants[i] for i in indices),
            augmented=self.augmented,
            vocabulary=self.vocabulary,
        )

    def expand(self) -> list:
        """One trace per case, the inverse of variant compression."""
        return [v.trace for v in self.variants for _ in range(v.multiplicity)]


def to_variant_log(events: Iterable[Event]) -> VariantLog:
    """Group events by case, order them, and merge identical traces."""
    cases: dict[str, list[tuple[OrderKey, int, str]]] = {}
    for pos, ev in enumerate(events):
        cases.setdefault(ev.case_id, []).append((ev.order_key, pos, ev.activity))

    # dict preserves first-appearance order of case ids
    by_trace: dict[Trace, list] = {}
    for case_index, (case_id, evs) in enumerate(cases.items()):
        evs.sort(key=lambda e: (e[0], e[1]))
        trace = tuple(a for _, _, a in evs)
        entry = by_trace.get(trace)
        if entry is None:
            by_trace[trace] = [case_index, [case_id]]
        else:
            entry[1].append(case_id)

    variants = tuple(
        Variant(trace, len(ids), first, tuple(ids)) for trace, (first, ids) in by_trace.items()
    )
    return VariantLog(variants)


def augment_bos_eos(log: VariantLog) -> VariantLog:
    """Wrap every trace in the BOS/EOS sentinels."""
    if log.augmented:
        return log
    clash = sorted(log.vocabulary & SENTINELS)
    if clash:
        raise ReservedLabelError(clash[0])
    variants = tuple(replace(v, trace=(BOS,) + tuple(v.trace) + (EOS,)) for v in log.variants)
    return VariantLog(variants, augmented=True, vocabulary=log.vocabulary)


def strip_sentinels(trace: Trace) -> Trace:
    return tuple(a for a in trace if a not in SENTINELS)


# -- CSV ---------------------------------------------------------------------


@dataclass(frozen=True)
class CsvConfig:
    case_col: str = "case"
    activity_col: str = "activity"
    order_col: str = "timestamp"
    order_kind: str = "timestamp"  # or "index"
    delimiter: str = ","

    def __post_init__(self):
        if self.order_kind not in ("timestamp", "index"):
            raise ValueError(f"order_kind must be 'timestamp' or 'index', got {self.order_kind!r}")


def parse_timestamp(text: str) -> datetime:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def _text_stream(source) -> IO[str]:
    if isinstance(source, (str, Path)):
        return open(source, encoding="utf-8", newline="")
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(bytes(source).decode("utf-8"), newline="")
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8", newline="")


def parse_csv(source, config: CsvConfig = CsvConfig()) -> list[Event]:
    """Read one event per data row.

    ``source`` may be a path, raw bytes, or a binary/text stream.  Row numbers
    in errors are 1-based file lines (the header is line 1).
    """
    stream = _text_stream(source)
    try:
        reader = csv.reader(stream, delimiter=config.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("missing header row") from None
        header = [h.strip().lstrip("\ufeff") for h in header]
        cols = []
        for name in (config.case_col, config.activity_col, config.order_col):
            if name not in header:
                raise FormatError(f"missing column {name!r}")
            cols.append(header.index(name))
        ci, ai, oi = cols

        events = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < len(header):
                raise FormatError(f"expected {len(header)} fields, got {len(row)}", row=lineno)
            raw = row[oi]
            try:
                key: OrderKey = int(raw) if config.order_kind == "index" else parse_timestamp(raw)
            except ValueError as exc:
                raise FormatError(f"bad {config.order_kind} value {raw!r}: {exc}", row=lineno) from None
            activity = row[ai]
            if not activity:
                raise FormatError("empty activity", row=lineno)
            events.append(Event(row[ci], activity, key))
        return events
    except csv.Error as exc:
        raise FormatError(str(exc)) from None
    finally:
        if isinstance(source, (str, Path)):
            stream.close()


# -- XES ---------------------------------------------------------------------


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _string_attr(elem, key: str) -> str | None:
    for child in elem:
        if _local(child.tag) == "string" and child.get("key") == key:
            return child.get("value")
    return None


def parse_xes(source) -> list[Event]:
    """Read events from an XES document (log > trace > event)."""
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(bytes(source))
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        line, col = exc.position
        raise XesParseError(f"malformed XES at line {line}, column {col}: {exc}") from None

    events: list[Event] = []
    for t_index, trace in enumerate(el for el in root if _local(el.tag) == "trace"):
        case_id = _string_attr(trace, "concept:name") or f"trace-{t_index}"
        rows = []
        for e_index, ev in enumerate(el for el in trace if _local(el.tag) == "event"):
            activity = _string_attr(ev, "concept:name")
            if not activity:
                raise XesParseError(f"event {e_index} in trace {case_id!r} lacks concept:name")
            stamp = None
            for child in ev:
                if _local(child.tag) == "date" and child.get("key") == "time:timestamp":
                    stamp = parse_timestamp(child.get("value", ""))
            rows.append((activity, stamp, e_index))
        timed = all(stamp is not None for _, stamp, _ in rows)
        for activity, stamp, e_index in rows:
            events.append(Event(case_id, activity, stamp if timed else e_index))
    return events


# -- variant-log JSON ----------------------------------------------------------


def variant_log_to_json(log: VariantLog) -> dict:
    return {
        "variants": [
            {"trace": list(strip_sentinels(v.trace) if log.augmented else v.trace), "multiplicity": v.multiplicity}
            for v in log.variants
        ],
        "total_cases": log.total_cases,
    }


def variant_log_from_json(data: Union[dict, str, bytes]) -> VariantLog:
    """Load a variant log; the result is BOS/EOS-augmented."""
    if not isinstance(data, dict):
        data = json.loads(data)
    try:
        entries = data["variants"]
        variants = tuple(
            Variant(tuple(e["trace"]), int(e["multiplicity"]), i) for i, e in enumerate(entries)
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"invalid variant-log JSON: {exc}") from None
    log = VariantLog(variants)
    declared = data.get("total_cases")
    if declared is not None and declared != log.total_cases:
        raise FormatError(f"total_cases {declared} disagrees with multiplicities ({log.total_cases})")
    return augment_bos_eos(log)


def read_log(path: Union[str, Path], fmt: str, csv_config: CsvConfig = CsvConfig()) -> VariantLog:
    """Load any supported input format into an augmented variant log."""
    path = Path(path)
    if fmt == "csv":
        return augment_bos_eos(to_variant_log(parse_csv(path, csv_config)))
    if fmt == "xes":
        with open(path, "rb") as fh:
            return augment_bos_eos(to_variant_log(parse_xes(fh)))
    if fmt == "variants-json":
        return variant_log_from_json(path.read_text(encoding="utf-8"))
    raise ValueError(f"unknown input format {fmt!r}")
