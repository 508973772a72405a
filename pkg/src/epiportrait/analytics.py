"""Read-only queries over a snapshot: sums, rankings, heatmap intensities,
parallel-coordinate datasets, brushing, and name search.

Every operation is a pure function over immutable inputs, so all are safe to
run concurrently and easy to cross-check against brute force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .config import INDICATOR_NAMES, KEY_FACTORS

MDC_AXES = INDICATOR_NAMES + ("total_cases",)

RANK_METRICS = ("total_cases", "cases_per_10k") + KEY_FACTORS + INDICATOR_NAMES


@dataclass(frozen=True)
class RankedList:
    metric: str
    entries: tuple[tuple[str, float, int], ...]  # (code, value, rank), rank 1 = largest
    exclusions: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "metric": self.metric,
            "entries": [{"code": c, "value": v, "rank": r} for c, v, r in self.entries],
            "exclusions": list(self.exclusions),
        }


@dataclass(frozen=True)
class HeatmapFrame:
    window: tuple[int, int]
    sums: dict                    # code -> case sum
    intensity: dict               # code -> [0, 1]
    max_sum: int | None           # None when the whole window is zero

    def to_json_dict(self) -> dict:
        return {
            "window": {"from": self.window[0], "to": self.window[1]},
            "sums": dict(self.sums),
            "intensity": dict(self.intensity),
            "max_sum": self.max_sum,
        }


@dataclass(frozen=True)
class MdcDataset:
    axes: tuple[str, ...]
    codes: tuple[str, ...]
    raw: dict                     # code -> tuple of axis values
    normalized: dict              # code -> tuple in [0, 1]
    axis_range: dict              # axis -> (min, max)
    constant_axes: tuple[str, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "axes": list(self.axes),
            "ranges": {a: {"min": self.axis_range[a][0], "max": self.axis_range[a][1]}
                       for a in self.axes},
            "constant_axes": list(self.constant_axes),
            "communities": [
                {"code": c, "raw": list(self.raw[c]), "norm": list(self.normalized[c])}
                for c in self.codes
            ],
        }


def window_sum(series_map: dict, span_range: tuple[int, int]) -> dict:
    """Per-community case sum over an inclusive span-index range.

    An empty range (lo > hi) yields all zeros.
    """
    lo, hi = span_range
    return {code: sum(s.counts[lo:hi + 1]) if lo <= hi else 0
            for code, s in series_map.items()}


def first_case_spans(series_map: dict) -> dict:
    """Index of each community's first non-zero span, None when all-zero."""
    out = {}
    for code, s in series_map.items():
        out[code] = next((i for i, v in enumerate(s.counts) if v > 0), None)
    return out


def _dense_rank(pairs) -> list[tuple[str, float, int]]:
    """pairs sorted by value desc, code asc; ranks dense, ties share a rank."""
    ordered = sorted(pairs, key=lambda p: (-p[1], p[0]))
    out = []
    rank = 0
    previous = None
    for code, value in ordered:
        if previous is None or value < previous:
            rank += 1
            previous = value
        out.append((code, value, rank))
    return out


def rank_by(metric: str, profiles: dict, series_map: dict,
            span_range: tuple[int, int],
            per_capita_divisor: float = 10000.0) -> RankedList:
    """Rank communities by a case metric over the window or by a static
    census factor/indicator.  Zero-population communities are excluded from
    per-capita ranking and reported, never silently dropped."""
    if metric not in RANK_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    exclusions: tuple[str, ...] = ()
    if metric == "total_cases":
        sums = window_sum(series_map, span_range)
        pairs = [(code, float(v)) for code, v in sums.items()]
    elif metric == "cases_per_10k":
        sums = window_sum(series_map, span_range)
        pairs = []
        excluded = []
        for code, v in sums.items():
            population = profiles[code].population if code in profiles else 0
            if population <= 0:
                excluded.append(code)
            else:
                pairs.append((code, per_capita_divisor * v / population))
        exclusions = tuple(sorted(excluded))
    elif metric in KEY_FACTORS:
        pairs = [(code, float(p.key_factor(metric))) for code, p in profiles.items()]
    else:
        pairs = [(code, float(p.indicators[metric])) for code, p in profiles.items()]
    return RankedList(metric=metric, entries=tuple(_dense_rank(pairs)),
                      exclusions=exclusions)


def heatmap(series_map: dict, span_range: tuple[int, int]) -> HeatmapFrame:
    """Windowed sums with log1p intensity against the window maximum."""
    sums = window_sum(series_map, span_range)
    max_sum = max(sums.values(), default=0)
    if max_sum <= 0:
        return HeatmapFrame(span_range, sums, {c: 0.0 for c in sums}, None)
    denominator = math.log1p(max_sum)
    intensity = {c: (math.log1p(v) / denominator if v > 0 else 0.0)
                 for c, v in sums.items()}
    return HeatmapFrame(span_range, sums, intensity, max_sum)


def mdc_dataset(profiles: dict, series_map: dict,
                span_range: tuple[int, int]) -> MdcDataset:
    """Vectors over the 12 census indicators plus windowed total cases,
    min-max normalized per axis.  Constant axes normalize to 0.5 and are
    flagged so the view can grey them out."""
    sums = window_sum(series_map, span_range)
    codes = tuple(sorted(profiles))
    raw = {}
    for code in codes:
        p = profiles[code]
        raw[code] = tuple(float(p.indicators[a]) for a in INDICATOR_NAMES) \
            + (float(sums.get(code, 0)),)

    axis_range = {}
    constant = []
    for k, axis in enumerate(MDC_AXES):
        values = [raw[c][k] for c in codes]
        lo, hi = min(values), max(values)
        axis_range[axis] = (lo, hi)
        if lo == hi:
            constant.append(axis)

    normalized = {}
    for code in codes:
        vec = []
        for k, axis in enumerate(MDC_AXES):
            lo, hi = axis_range[axis]
            vec.append(0.5 if lo == hi else (raw[code][k] - lo) / (hi - lo))
        normalized[code] = tuple(vec)

    return MdcDataset(axes=MDC_AXES, codes=codes, raw=raw, normalized=normalized,
                      axis_range=axis_range, constant_axes=tuple(constant))


def brush_filter(dataset: MdcDataset, intervals: dict) -> set:
    """Codes whose normalized value lies in [lo, hi] on every brushed axis.

    Unbrushed axes are unconstrained; an inverted interval (lo > hi) matches
    nothing.
    """
    for axis in intervals:
        if axis not in dataset.axes:
            raise ValueError(f"unknown brush axis {axis!r}")
    index = {a: k for k, a in enumerate(dataset.axes)}
    out = set()
    for code in dataset.codes:
        vec = dataset.normalized[code]
        if all(lo <= vec[index[a]] <= hi for a, (lo, hi) in intervals.items()):
            out.add(code)
    return out


def search(query: str, names: dict) -> list[tuple[str, str]]:
    """Case-insensitive community search over {code: name}.

    Prefix matches (on name or code) rank before substring matches; ties
    order by name then code.
    """
    q = query.strip().lower()
    if not q:
        return []
    prefix, substring = [], []
    for code, name in names.items():
        lname, lcode = name.lower(), code.lower()
        if lname.startswith(q) or lcode.startswith(q):
            prefix.append((code, name))
        elif q in lname or q in lcode:
            substring.append((code, name))
    key = lambda cn: (cn[1], cn[0])
    return sorted(prefix, key=key) + sorted(substring, key=key)
