"""Runtime configuration: study window, glyph tuning, phase keyword rules.

Everything is overridable from one JSON config file; CLI flags override the
file.  Keyword rules live here (not in code) so other jurisdictions can be
encoded without touching the classifier.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from datetime import date
from pathlib import Path


# Ordered exactly as served on MDC axes (total_cases is appended by analytics).
INDICATOR_NAMES = (
    "median_age",
    "population",
    "area_size",
    "population_density",
    "median_rent",
    "median_mortgage",
    "median_personal_income",
    "median_family_income",
    "median_household_income",
    "avg_bedrooms_per_person",
    "avg_bedrooms_per_household",
    "public_transport_rate",
)

KEY_FACTORS = ("aged_male_70p", "aged_female_70p", "lower_income", "lone_person")

DEFAULT_EASED_KEYWORDS = ("social distance", "mask", "masks required", "gathering limit")
DEFAULT_RESTRICT_KEYWORDS = ("lockdown", "curfew", "bubble restriction", "stay-at-home")


@dataclass(frozen=True)
class PortraitConfig:
    """Tuning knobs for the crown glyph.

    All values are rendering defaults, not measured quantities; override via
    the "portrait" section of the config file.
    """

    core_radius: float = 12.0        # R_c, hosts the community label
    crown_radius: float = 40.0       # R'_c, base circle carrying the bars
    base_height: float = 4.0         # h, zero-case bar height
    scale_a: float = 1.0             # a, additive log offset
    scale_b: float = 0.05            # b, log gain
    min_arc: float = 0.15            # radians, floor so tiny factors stay visible
    wave_count: float = 24.0         # W, base wave frequency along an arc
    amplitude_factor: float = 0.8    # alpha in (0,1], keeps waves inside the crown
    samples_per_arc: int = 256       # angular subdivisions per RNA path

    def __post_init__(self):
        if not (self.crown_radius > self.core_radius > 0):
            raise ValueError("need crown_radius > core_radius > 0")
        if self.base_height <= 0:
            raise ValueError("base_height must be positive")
        if self.scale_a < 0:
            raise ValueError("scale_a must be >= 0")
        if self.scale_b <= 0:
            raise ValueError("scale_b must be positive")
        if self.min_arc <= 0:
            raise ValueError("min_arc must be positive")
        if self.wave_count < 1:
            raise ValueError("wave_count must be >= 1")
        if not (0 < self.amplitude_factor <= 1):
            raise ValueError("amplitude_factor must lie in (0, 1]")
        if self.samples_per_arc < 8:
            raise ValueError("samples_per_arc must be >= 8")

    @property
    def span(self) -> float:
        """Radial width of the crown annulus, R'_c - R_c."""
        return self.crown_radius - self.core_radius


@dataclass(frozen=True)
class PhaseRules:
    """Ordered keyword lists; matching is case-insensitive substring."""

    eased: tuple[str, ...] = DEFAULT_EASED_KEYWORDS
    restrict_controlled: tuple[str, ...] = DEFAULT_RESTRICT_KEYWORDS

    @classmethod
    def from_dict(cls, d: dict) -> "PhaseRules":
        return cls(
            eased=tuple(str(k).lower() for k in d.get("eased", DEFAULT_EASED_KEYWORDS)),
            restrict_controlled=tuple(
                str(k).lower() for k in d.get("restrict_controlled", DEFAULT_RESTRICT_KEYWORDS)
            ),
        )

    @classmethod
    def empty(cls) -> "PhaseRules":
        return cls(eased=(), restrict_controlled=())


@dataclass(frozen=True)
class ExcludeRule:
    """Generic row-exclusion predicate: quarantine a case row when the named
    field contains the given substring (case-insensitive)."""

    field: str
    contains: str

    def matches(self, row: dict) -> bool:
        value = row.get(self.field)
        return value is not None and self.contains.lower() in str(value).lower()


@dataclass(frozen=True)
class AppConfig:
    window_start: date = date(2020, 1, 1)
    window_end: date = date(2022, 1, 11)
    granularity: str = "weekly"
    per_capita_divisor: float = 10000.0
    portrait: PortraitConfig = field(default_factory=PortraitConfig)
    phase_rules: PhaseRules = field(default_factory=PhaseRules)
    code_aliases: dict = field(default_factory=dict)
    exclude_rules: tuple[ExcludeRule, ...] = ()

    @property
    def window(self) -> tuple[date, date]:
        return (self.window_start, self.window_end)


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> AppConfig:
    """Build an AppConfig from an optional JSON file plus flat overrides.

    Recognized override keys: window_start, window_end, granularity,
    per_capita_divisor (strings are parsed).  Unknown keys are rejected.
    """
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))

    cfg = AppConfig(
        window_start=_parse_date(raw.get("window", {}).get("start", "2020-01-01")),
        window_end=_parse_date(raw.get("window", {}).get("end", "2022-01-11")),
        granularity=raw.get("granularity", "weekly"),
        per_capita_divisor=float(raw.get("per_capita_divisor", 10000.0)),
        portrait=PortraitConfig(**raw.get("portrait", {})),
        phase_rules=PhaseRules.from_dict(raw.get("phase_rules", {})),
        code_aliases=dict(raw.get("code_aliases", {})),
        exclude_rules=tuple(
            ExcludeRule(field=r["field"], contains=r["contains"])
            for r in raw.get("exclude_rules", [])
        ),
    )

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("window_start", "window_end"):
            cfg = replace(cfg, **{key: _parse_date(value)})
        elif key == "granularity":
            cfg = replace(cfg, granularity=str(value))
        elif key == "per_capita_divisor":
            cfg = replace(cfg, per_capita_divisor=float(value))
        else:
            raise ValueError(f"unknown config override {key!r}")

    if cfg.granularity not in ("weekly", "fortnightly"):
        raise ValueError(f"granularity must be weekly or fortnightly, got {cfg.granularity!r}")
    if cfg.window_end < cfg.window_start:
        raise ValueError("window end precedes start")
    if not (cfg.per_capita_divisor > 0 and math.isfinite(cfg.per_capita_divisor)):
        raise ValueError("per_capita_divisor must be positive and finite")
    return cfg


def _parse_date(s) -> date:
    if isinstance(s, date):
        return s
    return date.fromisoformat(str(s))
