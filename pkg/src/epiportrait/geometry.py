"""Crown-glyph geometry: protein bar heights, RNA arcs, and wave paths.

Angles are radians measured clockwise from the top of the crown.  Each
portrait divides its circle evenly among the selected time spans (S bars for
case counts, M bars for zero spans, E segments on the filter trigger) and
hosts up to four factor strands in three concentric channels.

The literal wave formula (`eq4_literal`) keeps the published point form for
oracle testing; rendered paths treat the arc angle as a running variable and
dip inward from the channel base so every sample stays inside the crown.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import KEY_FACTORS, PortraitConfig
from .errors import DegenerateCategoryError, ZeroPopulationError
from .ingest import CommunityProfile
from .temporal import CaseSeries, PhaseTimeline

TAU = 2.0 * math.pi

PHASE_GRAY = {
    "uncontrolled": "normal_gray",
    "eased": "silver_gray",
    "restrict_controlled": "dark_gray",
}


# ---------------------------------------------------------------------------
# the four encoding equations

def protein_height(f_x: float, cfg: PortraitConfig) -> float:
    """Bar height for a span's case value: base height for zero, log-scaled
    growth otherwise.  Strictly increasing for f_x >= 1."""
    if f_x < 0:
        raise ValueError("case value must be non-negative")
    if f_x == 0:
        return cfg.base_height
    return cfg.base_height + cfg.crown_radius * (cfg.scale_a + math.log(f_x)) * cfg.scale_b


def rna_arc_angle(n_value: float, max_value: float, share_n: int,
                  min_arc: float, category: str = "") -> float:
    """Arc angle for one strand: affine in the value, floored at min_arc/n.

    At n_value == max_value this exceeds the channel's full extent by
    min_arc/n; rendering clamps, data keeps the raw angle.
    """
    if max_value <= 0:
        raise DegenerateCategoryError(category or "<unnamed>")
    if not (0 <= n_value <= max_value):
        raise ValueError("need 0 <= n_value <= max_value")
    if share_n not in (1, 2):
        raise ValueError("share_n must be 1 or 2")
    return (n_value / max_value) * (TAU / share_n) + min_arc / share_n


def rna_arc_length(theta: float, channel: int, cfg: PortraitConfig) -> float:
    """Arc length along the channel radius: ((R'_c - R_c)/m) * theta."""
    if channel not in (1, 2, 3):
        raise ValueError("channel must be 1, 2 or 3")
    if theta < 0:
        raise ValueError("theta must be non-negative")
    return (cfg.span / channel) * theta


def eq4_literal(theta: float, freq_share: float, channel: int,
                cfg: PortraitConfig) -> float:
    """Published point form of the wave: amplitude |cos(theta * share)| over
    the channel base, no core offset.  Kept verbatim for oracle tests."""
    if channel not in (1, 2, 3):
        raise ValueError("channel must be 1, 2 or 3")
    amp = cfg.span / 3.0
    return amp * abs(math.cos(theta * freq_share)) + cfg.span / channel


def rna_wave_path(theta: float, freq_share: float, channel: int,
                  cfg: PortraitConfig) -> tuple[tuple[float, float], ...]:
    """Sample the rendered wave as (phi, r) pairs for phi in [0, theta].

    r(phi) = R_c + span/m - alpha*(span/3)*|cos(phi * W * share)|: the wave
    hangs inward from the channel base radius, so radii stay within
    [R_c, R'_c] for any channel as long as alpha <= 1.  Larger freq_share
    packs more oscillations into the same arc.
    """
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if channel not in (1, 2, 3):
        raise ValueError("channel must be 1, 2 or 3")
    base = cfg.core_radius + cfg.span / channel
    amp = cfg.amplitude_factor * cfg.span / 3.0
    k = cfg.samples_per_arc
    step = theta / k
    pts = []
    for i in range(k + 1):
        phi = i * step
        r = base - amp * abs(math.cos(phi * cfg.wave_count * freq_share))
        pts.append((phi, r))
    return tuple(pts)


# ---------------------------------------------------------------------------
# channel plan

@dataclass(frozen=True)
class ChannelAssignment:
    category: str        # a key-factor name
    channel: int         # 1 = outermost channel, 3 = innermost
    share_n: int         # 1 = full channel, 2 = half channel
    color: str
    origin: float = 0.0  # radians clockwise from top
    clockwise: bool = True


DEFAULT_CHANNELS = (
    ChannelAssignment("aged_male_70p", channel=1, share_n=2, color="azure_blue",
                      clockwise=True),
    ChannelAssignment("aged_female_70p", channel=1, share_n=2, color="mint_pink",
                      clockwise=False),
    ChannelAssignment("lower_income", channel=2, share_n=1, color="gold_yellow"),
    ChannelAssignment("lone_person", channel=3, share_n=1, color="pale_purple"),
)


def validate_channels(channels) -> None:
    """Shared channels host exactly two strands with distinct origins;
    unshared channels host one."""
    by_channel: dict[int, list[ChannelAssignment]] = {}
    for a in channels:
        by_channel.setdefault(a.channel, []).append(a)
    for ch, members in by_channel.items():
        ns = {a.share_n for a in members}
        if len(ns) != 1:
            raise ValueError(f"channel {ch}: mixed share_n values {sorted(ns)}")
        n = ns.pop()
        if n == 1 and len(members) != 1:
            raise ValueError(f"channel {ch}: unshared channel must host exactly one strand")
        if n == 2:
            if len(members) != 2:
                raise ValueError(f"channel {ch}: shared channel must host exactly two strands")
            if len({(a.origin, a.clockwise) for a in members}) != 2:
                raise ValueError(f"channel {ch}: shared strands need distinct origins")


@dataclass(frozen=True)
class CategoryStats:
    """Per key-factor max and sum over all communities (the denominators of
    the arc-angle and frequency encodings)."""
    max_value: dict
    sum_value: dict


def category_stats(profiles: dict) -> CategoryStats:
    maxv = {k: 0.0 for k in KEY_FACTORS}
    sumv = {k: 0.0 for k in KEY_FACTORS}
    for p in profiles.values():
        for k in KEY_FACTORS:
            v = float(p.key_factor(k))
            maxv[k] = max(maxv[k], v)
            sumv[k] += v
    return CategoryStats(max_value=maxv, sum_value=sumv)


# ---------------------------------------------------------------------------
# assembled glyphs

@dataclass(frozen=True)
class ProteinGlyph:
    x: int               # original span index
    kind: str            # "S" | "M" | "E"
    height: float
    theta0: float
    theta1: float
    phase: str | None

    @property
    def color_class(self) -> str:
        if self.kind == "S":
            return "bright_red"
        if self.kind == "M":
            return "light_grey"
        return PHASE_GRAY[self.phase or "uncontrolled"]


@dataclass(frozen=True)
class RnaGlyph:
    category: str
    channel: int
    share_n: int
    theta: float              # rendered (clamped) arc angle
    theta_unclamped: float    # raw value from the arc-angle formula
    length: float
    freq_share: float
    path: tuple[tuple[float, float], ...]
    color: str
    origin: float = 0.0
    clockwise: bool = True


@dataclass(frozen=True)
class PortraitGeometry:
    code: str
    label: str
    mode: str
    crown_rc: float
    crown_rc_prime: float
    proteins: tuple[ProteinGlyph, ...]
    rnas: tuple[RnaGlyph, ...]

    def max_protein_height(self) -> float:
        return max((p.height for p in self.proteins), default=0.0)

    def to_json_dict(self) -> dict:
        return {
            "code": self.code,
            "label": self.label,
            "mode": self.mode,
            "crown": {"rc": self.crown_rc, "rc_prime": self.crown_rc_prime},
            "proteins": [
                {"x": p.x, "kind": p.kind, "height": p.height,
                 "theta0": p.theta0, "theta1": p.theta1, "phase": p.phase}
                for p in self.proteins
            ],
            "rnas": [
                {"category": r.category, "channel": r.channel, "share_n": r.share_n,
                 "theta": r.theta, "length": r.length, "freq_share": r.freq_share,
                 "path": [[phi, rad] for phi, rad in r.path], "color": r.color}
                for r in self.rnas
            ],
        }


def _protein_ring(values, xs, cfg, phases, kind_of) -> tuple[ProteinGlyph, ...]:
    k = len(values)
    width = TAU / k
    out = []
    for slot, (x, v) in enumerate(zip(xs, values)):
        label = phases.labels[x] if phases is not None else None
        out.append(ProteinGlyph(
            x=x, kind=kind_of(v), height=protein_height(v, cfg),
            theta0=slot * width, theta1=(slot + 1) * width, phase=label))
    return tuple(out)


def build_portrait(series: CaseSeries, profile: CommunityProfile,
                   stats: CategoryStats, cfg: PortraitConfig,
                   channels=DEFAULT_CHANNELS, mode: str = "actual",
                   phases: PhaseTimeline | None = None,
                   window: tuple[int, int] | None = None,
                   per_capita_divisor: float = 10000.0) -> PortraitGeometry:
    """Assemble one community's full glyph.

    `window` selects an inclusive span-index range (default: all spans); the
    circle divides evenly among the selected spans, which keep their original
    indices.  per_10k mode rescales counts to per-capita before the height
    encoding and is the only difference between modes.
    """
    if mode not in ("actual", "per_10k"):
        raise ValueError("mode must be 'actual' or 'per_10k'")
    validate_channels(channels)

    lo, hi = window if window is not None else (0, len(series.counts) - 1)
    if not (0 <= lo <= hi < len(series.counts)):
        raise ValueError(f"window {window} out of range for {len(series.counts)} spans")
    xs = range(lo, hi + 1)
    raw = [series.counts[x] for x in xs]

    if mode == "per_10k":
        if profile.population <= 0:
            raise ZeroPopulationError(profile.code)
        values = [v * per_capita_divisor / profile.population for v in raw]
    else:
        values = [float(v) for v in raw]

    proteins = _protein_ring(values, xs, cfg, phases,
                             kind_of=lambda v: "M" if v == 0 else "S")

    rnas = []
    for a in channels:
        n_value = float(profile.key_factor(a.category))
        theta_raw = rna_arc_angle(n_value, stats.max_value[a.category],
                                  a.share_n, cfg.min_arc, a.category)
        theta = min(theta_raw, TAU / a.share_n)
        total = stats.sum_value[a.category]
        share = n_value / total if total > 0 else 0.0
        rnas.append(RnaGlyph(
            category=a.category, channel=a.channel, share_n=a.share_n,
            theta=theta, theta_unclamped=theta_raw,
            length=rna_arc_length(theta, a.channel, cfg),
            freq_share=share,
            path=rna_wave_path(theta, share, a.channel, cfg),
            color=a.color, origin=a.origin, clockwise=a.clockwise))

    return PortraitGeometry(
        code=profile.code, label=profile.name, mode=mode,
        crown_rc=cfg.core_radius, crown_rc_prime=cfg.crown_radius,
        proteins=proteins, rnas=tuple(rnas))


TRIGGER_INDICATORS = (
    ("aged", ("aged_male_70p", "aged_female_70p"), 1, "azure_blue"),
    ("lower_income", ("lower_income",), 2, "gold_yellow"),
    ("lone_person", ("lone_person",), 3, "pale_purple"),
)


def build_filter_trigger(phases: PhaseTimeline, totals: dict,
                         cfg: PortraitConfig) -> PortraitGeometry:
    """The Control Panel's sample portrait: one grayscale E segment per span
    plus three full-circle indicator strands, one per channel.

    `totals` maps the four key factors to their state-wide sums; indicator
    wave frequency encodes each group's share of the combined totals.
    """
    k = len(phases.labels)
    if k == 0:
        raise ValueError("phase timeline is empty")
    width = TAU / k
    proteins = tuple(
        ProteinGlyph(x=x, kind="E", height=cfg.base_height,
                     theta0=x * width, theta1=(x + 1) * width, phase=label)
        for x, label in enumerate(phases.labels))

    grand = sum(float(totals[f]) for group in TRIGGER_INDICATORS for f in group[1])
    rnas = []
    for name, factors, channel, color in TRIGGER_INDICATORS:
        value = sum(float(totals[f]) for f in factors)
        share = value / grand if grand > 0 else 0.0
        rnas.append(RnaGlyph(
            category=name, channel=channel, share_n=1,
            theta=TAU, theta_unclamped=TAU,
            length=rna_arc_length(TAU, channel, cfg),
            freq_share=share,
            path=rna_wave_path(TAU, share, channel, cfg),
            color=color))

    return PortraitGeometry(
        code="_trigger", label="All communities", mode="actual",
        crown_rc=cfg.core_radius, crown_rc_prime=cfg.crown_radius,
        proteins=proteins, rnas=tuple(rnas))
