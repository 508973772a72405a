"""Time-span grids, case bucketing, and intervention-phase classification.

Spans partition the study window into 7- or 14-day buckets (a shorter final
span is kept and flagged).  Phase labels are derived from event text by
ordered keyword lists; within a span the most restrictive label wins and
event-free spans inherit the previous label.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

from .config import PhaseRules
from .ingest import CaseRecord, EventLine, QuarantinedRow

SPAN_DAYS = {"weekly": 7, "fortnightly": 14}

PHASE_ORDER = ("uncontrolled", "eased", "restrict_controlled")
_SEVERITY = {label: i for i, label in enumerate(PHASE_ORDER)}


@dataclass(frozen=True)
class TimeSpan:
    x: int
    start: date
    end: date          # inclusive
    short: bool = False

    @property
    def days(self) -> int:
        return (self.end - self.start).days + 1


@dataclass(frozen=True)
class TimeSpanGrid:
    start: date
    end: date
    granularity: str
    spans: tuple[TimeSpan, ...]

    def __len__(self):
        return len(self.spans)

    def span_of(self, when: date) -> int | None:
        """Span index containing `when`, or None outside the window."""
        if not (self.start <= when <= self.end):
            return None
        return (when - self.start).days // SPAN_DAYS[self.granularity]

    def to_json_dict(self) -> dict:
        return {
            "granularity": self.granularity,
            "window": {"start": self.start.isoformat(), "end": self.end.isoformat()},
            "spans": [{"x": s.x, "start": s.start.isoformat(),
                       "end": s.end.isoformat(), "short": s.short}
                      for s in self.spans],
        }


@dataclass(frozen=True)
class CaseSeries:
    community_code: str
    counts: tuple[int, ...]  # one entry per grid span

    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class PhaseTimeline:
    labels: tuple[str, ...]
    # per span: matched events as (date, text, keyword)
    triggering_events: tuple[tuple[tuple[date, str, str], ...], ...]
    unmatched: tuple[tuple[date, str], ...] = ()


def build_grid(window: tuple[date, date], granularity: str) -> TimeSpanGrid:
    """Partition the inclusive window into consecutive spans."""
    if granularity not in SPAN_DAYS:
        raise ValueError(f"granularity must be one of {sorted(SPAN_DAYS)}")
    start, end = window
    if end < start:
        raise ValueError("window end precedes start")
    step = SPAN_DAYS[granularity]
    spans = []
    cursor = start
    x = 0
    while cursor <= end:
        span_end = min(cursor + timedelta(days=step - 1), end)
        spans.append(TimeSpan(x=x, start=cursor, end=span_end,
                              short=(span_end - cursor).days + 1 < step))
        cursor = span_end + timedelta(days=1)
        x += 1
    return TimeSpanGrid(start=start, end=end, granularity=granularity,
                        spans=tuple(spans))


def bucket_cases(cases, grid: TimeSpanGrid, known_codes, level: str = "lga"):
    """Bucket cases into per-community series over the grid.

    Returns ({code: CaseSeries}, quarantined) where quarantined holds cases
    dated outside the grid window.  Every known code receives a series, all
    zeros included, so zero-case spans render explicitly.
    """
    if level not in ("lga", "postal_area"):
        raise ValueError("level must be 'lga' or 'postal_area'")
    counts = {code: [0] * len(grid) for code in known_codes}
    quarantined: list[QuarantinedRow] = []
    for i, c in enumerate(cases, start=1):
        x = grid.span_of(c.notification_date)
        raw = (c.notification_date.isoformat(), c.postal_code, c.community_code,
               c.age_band, c.likely_source or "")
        if x is None:
            quarantined.append(QuarantinedRow(
                "cases", i, "out_of_window",
                f"{c.notification_date} outside {grid.start}..{grid.end}", raw))
            continue
        key = c.community_code if level == "lga" else c.postal_code
        if key not in counts:
            quarantined.append(QuarantinedRow(
                "cases", i, "unknown_community", f"{key!r} not a known {level} code", raw))
            continue
        counts[key][x] += 1
    series = {code: CaseSeries(code, tuple(v)) for code, v in counts.items()}
    return series, quarantined


def _match(text: str, rules: PhaseRules):
    """Most restrictive matching label for one event text, or None."""
    lowered = text.lower()
    for kw in rules.restrict_controlled:
        if kw in lowered:
            return "restrict_controlled", kw
    for kw in rules.eased:
        if kw in lowered:
            return "eased", kw
    return None


def classify_phases(events, grid: TimeSpanGrid, rules: PhaseRules) -> PhaseTimeline:
    """Label every span from event keywords.

    Within a span the most restrictive matched label wins; spans without
    matched events carry the previous span's label forward, and the timeline
    starts uncontrolled.
    """
    matched_per_span: list[list[tuple[date, str, str]]] = [[] for _ in grid.spans]
    best_per_span: list[str | None] = [None] * len(grid)
    unmatched: list[tuple[date, str]] = []

    for ev in events:
        x = grid.span_of(ev.date)
        hit = _match(ev.text, rules)
        if hit is None or x is None:
            unmatched.append((ev.date, ev.text))
            continue
        label, keyword = hit
        matched_per_span[x].append((ev.date, ev.text, keyword))
        if best_per_span[x] is None or _SEVERITY[label] > _SEVERITY[best_per_span[x]]:
            best_per_span[x] = label

    labels = []
    current = "uncontrolled"
    for x in range(len(grid)):
        if best_per_span[x] is not None:
            current = best_per_span[x]
        labels.append(current)

    return PhaseTimeline(
        labels=tuple(labels),
        triggering_events=tuple(tuple(v) for v in matched_per_span),
        unmatched=tuple(unmatched),
    )
