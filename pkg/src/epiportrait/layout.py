"""Deterministic force-directed placement of portrait discs.

Bodies repel proportionally to overlap depth with a weak, cooling centering
pull, velocity damping 0.9, fixed step.  Unpinned bodies without an explicit
start position are seeded on a golden-angle spiral rotated by the seed, so
identical inputs always produce identical layouts.  Pinned bodies never move.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace

import numpy as np

from .errors import LayoutAreaError, UnknownCodeError

OVERLAP_EPS = 1e-6
_DAMPING = 0.9
_K_REPEL = 0.09
_K_CENTER = 0.02
_COOL_ITERS = 60  # centering fades out by here so contacts can fully resolve
_GOLDEN = math.pi * (3.0 - math.sqrt(5.0))


@dataclass(frozen=True)
class LayoutBody:
    code: str
    radius: float
    position: tuple[float, float] | None = None
    pinned: bool = False
    pin_position: tuple[float, float] | None = None

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"body {self.code!r}: radius must be positive")


@dataclass(frozen=True)
class LayoutResult:
    bodies: tuple[LayoutBody, ...]
    converged: bool
    iterations: int

    def to_json_dict(self) -> dict:
        return {
            "bodies": [{"code": b.code, "x": b.position[0], "y": b.position[1],
                        "r": b.radius, "pinned": b.pinned} for b in self.bodies],
            "converged": self.converged,
            "iterations": self.iterations,
        }


def pin(bodies, code: str, position: tuple[float, float]):
    """Return a new body list with `code` pinned at `position`."""
    out, found = [], False
    for b in bodies:
        if b.code == code:
            out.append(replace(b, pinned=True, position=tuple(position),
                               pin_position=tuple(position)))
            found = True
        else:
            out.append(b)
    if not found:
        raise UnknownCodeError(code)
    return out


def unpin(bodies, code: str):
    """Return a new body list with `code` free to move again."""
    out, found = [], False
    for b in bodies:
        if b.code == code:
            out.append(replace(b, pinned=False, pin_position=None))
            found = True
        else:
            out.append(b)
    if not found:
        raise UnknownCodeError(code)
    return out


def _tiebreak_angle(seed: int, i: int, j: int) -> float:
    return random.Random((seed * 1_000_003 + i) * 8_191 + j).random() * 2.0 * math.pi


def run_layout(bodies, viewport: tuple[float, float], seed: int = 0,
               max_iter: int = 600) -> LayoutResult:
    """Place bodies so no two discs overlap (within 1e-6).

    Deterministic for identical (bodies, seed).  Returns a best-effort layout
    flagged unconverged when max_iter is exhausted (e.g. overlapping pins).
    Raises LayoutAreaError when total disc area exceeds 70% of the viewport.
    """
    w, h = float(viewport[0]), float(viewport[1])
    n = len(bodies)
    if n == 0:
        return LayoutResult((), True, 0)

    radii = np.array([b.radius for b in bodies], dtype=np.float64)
    total_area = float(np.sum(np.pi * radii ** 2))
    if total_area > 0.7 * w * h:
        raise LayoutAreaError(total_area, w * h,
                              math.sqrt(total_area / (0.7 * w * h)))

    pinned = np.array([b.pinned for b in bodies], dtype=bool)
    pos = np.zeros((n, 2), dtype=np.float64)
    rot = random.Random(seed).random() * 2.0 * math.pi
    spread = 0.42 * min(w, h)
    spiral_count = sum(1 for b in bodies if not b.pinned and b.position is None)
    spiral_i = 0
    for i, b in enumerate(bodies):
        if b.pinned:
            target = b.pin_position or b.position
            if target is None:
                raise ValueError(f"pinned body {b.code!r} has no position")
            pos[i] = target
        elif b.position is not None:
            pos[i] = b.position
        else:
            frac = (spiral_i + 0.5) / max(spiral_count, 1)
            ang = spiral_i * _GOLDEN + rot
            pos[i] = (w / 2 + spread * math.sqrt(frac) * math.cos(ang),
                      h / 2 + spread * math.sqrt(frac) * math.sin(ang))
            spiral_i += 1

    free = ~pinned
    lo = radii[:, None].repeat(2, axis=1)
    hi = np.stack([np.full(n, w) - radii, np.full(n, h) - radii], axis=1)
    degenerate = lo > hi  # body wider than the viewport axis: park it centered
    mid = (lo + hi) / 2.0
    lo[degenerate] = mid[degenerate]
    hi[degenerate] = mid[degenerate]
    pos[free] = np.minimum(np.maximum(pos[free], lo[free]), hi[free])

    vel = np.zeros_like(pos)
    center = np.array([w / 2, h / 2])
    sum_r = radii[:, None] + radii[None, :]
    cool_until = min(_COOL_ITERS, max(1, max_iter // 3))

    converged = False
    iterations = 0
    for it in range(max_iter):
        diff = pos[:, None, :] - pos[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=2))
        overlap = sum_r - dist
        np.fill_diagonal(overlap, 0.0)
        overlap = np.maximum(overlap, 0.0)

        iterations = it
        if overlap.max() <= OVERLAP_EPS:
            converged = True
            break

        # unit directions; exactly coincident pairs get a seeded direction
        safe = np.where(dist > 1e-12, dist, 1.0)
        unit = diff / safe[:, :, None]
        coincident = np.argwhere((dist <= 1e-12) & (overlap > 0))
        for i, j in coincident:
            if i < j:
                a = _tiebreak_angle(seed, int(i), int(j))
                u = (math.cos(a), math.sin(a))
                unit[i, j] = u
                unit[j, i] = (-u[0], -u[1])

        force = _K_REPEL * np.sum(overlap[:, :, None] * unit, axis=1)
        if n > 1 and it < cool_until:
            force += _K_CENTER * (1.0 - it / cool_until) * (center - pos)

        vel = (vel + force) * _DAMPING
        vel[pinned] = 0.0
        pos = pos + vel
        pos[free] = np.minimum(np.maximum(pos[free], lo[free]), hi[free])
    else:
        iterations = max_iter

    out = tuple(
        replace(b, position=(float(pos[i, 0]), float(pos[i, 1])))
        for i, b in enumerate(bodies))
    return LayoutResult(out, converged, iterations)
