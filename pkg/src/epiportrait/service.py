"""HTTP API over one immutable snapshot.

The app holds a SnapshotBundle (snapshot + derived grids, series, phases);
replacing it is a single attribute swap, so readers always see a consistent
dataset.  The API adds transport only: every numeric field equals the
corresponding in-process call, and identical requests against the same
snapshot id return byte-identical bodies (canonical JSON, 17-digit floats).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import analytics
from .config import AppConfig, KEY_FACTORS
from .errors import EpiPortraitError, UnknownCodeError
from .geometry import build_filter_trigger, build_portrait, category_stats
from .ingest import DatasetSnapshot, snapshot_id
from .jsonutil import canonical_bytes
from .layout import LayoutBody, pin, run_layout
from .temporal import build_grid, bucket_cases, classify_phases

GRANULARITIES = ("weekly", "fortnightly")


@dataclass(frozen=True)
class SnapshotHandle:
    id: str
    built_at: datetime
    grids: tuple[str, ...]


class SnapshotBundle:
    """A snapshot plus everything derived from it, computed once."""

    def __init__(self, snapshot: DatasetSnapshot, config: AppConfig):
        self.snapshot = snapshot
        self.config = config
        self.id = snapshot_id(snapshot)
        self.handle = SnapshotHandle(self.id, datetime.now(timezone.utc), GRANULARITIES)
        self.stats = category_stats(snapshot.communities)
        self.totals = {k: self.stats.sum_value[k] for k in KEY_FACTORS}
        self.grids = {g: build_grid(snapshot.window, g) for g in GRANULARITIES}
        self.series = {}
        self.phases = {}
        for g, grid in self.grids.items():
            lga_series, _ = bucket_cases(snapshot.cases, grid,
                                         sorted(snapshot.communities), "lga")
            self.series[(g, "lga")] = lga_series
            if "postal_area" in snapshot.boundaries:
                postal_codes = sorted(snapshot.boundaries["postal_area"].codes())
                postal_series, _ = bucket_cases(snapshot.cases, grid,
                                                postal_codes, "postal_area")
                self.series[(g, "postal_area")] = postal_series
            self.phases[g] = classify_phases(snapshot.events, grid,
                                             config.phase_rules)

    def grid(self, granularity: str):
        if granularity not in self.grids:
            raise ValueError(f"granularity must be one of {GRANULARITIES}")
        return self.grids[granularity]

    def series_for(self, granularity: str, level: str):
        self.grid(granularity)
        if (granularity, level) not in self.series:
            raise ValueError(f"no {level!r} series (postal boundaries absent?)")
        return self.series[(granularity, level)]

    def clamp_window(self, granularity: str, lo, hi) -> tuple[int, int]:
        grid = self.grid(granularity)
        last = len(grid) - 1
        lo = 0 if lo is None else int(lo)
        hi = last if hi is None else int(hi)
        if not (0 <= lo <= last and 0 <= hi <= last):
            raise ValueError(f"span indices must lie in 0..{last}")
        return lo, hi

    def portraits(self, granularity: str, mode: str, lo, hi) -> list[dict]:
        lo, hi = self.clamp_window(granularity, lo, hi)
        series = self.series_for(granularity, "lga")
        phases = self.phases[granularity]
        out = []
        for code in sorted(self.snapshot.communities):
            g = build_portrait(
                series[code], self.snapshot.communities[code], self.stats,
                self.config.portrait, mode=mode, phases=phases, window=(lo, hi),
                per_capita_divisor=self.config.per_capita_divisor)
            out.append(g.to_json_dict())
        return out

    def filter_trigger(self, granularity: str) -> dict:
        self.grid(granularity)
        portrait = build_filter_trigger(self.phases[granularity], self.totals,
                                        self.config.portrait)
        return portrait.to_json_dict()

    def layout_bodies(self) -> list[LayoutBody]:
        """One disc per community; radius from the full-window actual
        portrait so discs never clip their own bars."""
        series = self.series_for(self.config.granularity, "lga")
        bodies = []
        for code in sorted(self.snapshot.communities):
            g = build_portrait(series[code], self.snapshot.communities[code],
                               self.stats, self.config.portrait, mode="actual")
            bodies.append(LayoutBody(code=code,
                                     radius=g.crown_rc_prime + g.max_protein_height()))
        return bodies


def _json(payload, bundle_id: str, status: int = 200) -> Response:
    return Response(content=canonical_bytes(payload), status_code=status,
                    media_type="application/json",
                    headers={"X-Snapshot-Id": bundle_id})


def create_app(bundle: SnapshotBundle) -> FastAPI:
    app = FastAPI(title="epiportrait", docs_url=None, redoc_url=None)
    app.state.bundle = bundle
    app.state.layout_lock = threading.Lock()
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])

    def current() -> SnapshotBundle:
        return app.state.bundle

    @app.exception_handler(ValueError)
    async def bad_request(request: Request, exc: ValueError):
        return JSONResponse({"error": str(exc), "snapshot": current().id},
                            status_code=400)

    @app.exception_handler(EpiPortraitError)
    async def domain_error(request: Request, exc: EpiPortraitError):
        status = 404 if isinstance(exc, UnknownCodeError) else 400
        return JSONResponse({"error": str(exc), "snapshot": current().id},
                            status_code=status)

    @app.get("/health")
    def health():
        b = current()
        return _json({"status": "ok", "snapshot": b.id}, b.id)

    @app.get("/grid")
    def grid(granularity: str | None = None):
        b = current()
        payload = b.grid(granularity or b.config.granularity).to_json_dict()
        payload["snapshot"] = b.id
        return _json(payload, b.id)

    @app.get("/communities")
    def communities():
        b = current()
        rows = []
        for code in sorted(b.snapshot.communities):
            p = b.snapshot.communities[code]
            rows.append({
                "code": p.code, "name": p.name, "population": p.population,
                "area_km2": p.area_km2,
                **{k: p.key_factor(k) for k in KEY_FACTORS},
                "indicators": dict(p.indicators),
            })
        return _json({"snapshot": b.id, "communities": rows}, b.id)

    @app.get("/search")
    def search_route(q: str = "", level: str = "lga"):
        b = current()
        if level == "lga":
            names = {c: p.name for c, p in b.snapshot.communities.items()}
        elif level == "postal_area":
            if "postal_area" not in b.snapshot.boundaries:
                raise ValueError("no postal_area boundaries in this snapshot")
            names = {c: c for c in b.snapshot.boundaries["postal_area"].codes()}
        else:
            raise ValueError("level must be 'lga' or 'postal_area'")
        results = analytics.search(q, names)
        return _json({"snapshot": b.id,
                      "results": [{"code": c, "name": n} for c, n in results]}, b.id)

    @app.get("/portraits")
    def portraits(granularity: str | None = None, mode: str = "actual",
                  from_: int | None = Query(None, alias="from"),
                  to: int | None = None):
        b = current()
        return _json(b.portraits(granularity or b.config.granularity, mode,
                                 from_, to), b.id)

    @app.get("/filter_trigger")
    def filter_trigger(granularity: str | None = None):
        b = current()
        return _json(b.filter_trigger(granularity or b.config.granularity), b.id)

    @app.get("/heatmap")
    def heatmap_route(level: str = "lga", granularity: str | None = None,
                      from_: int | None = Query(None, alias="from"),
                      to: int | None = None):
        b = current()
        g = granularity or b.config.granularity
        lo, hi = b.clamp_window(g, from_, to)
        frame = analytics.heatmap(b.series_for(g, level), (lo, hi))
        payload = frame.to_json_dict()
        payload["level"] = level
        payload["snapshot"] = b.id
        return _json(payload, b.id)

    @app.get("/rankings")
    def rankings(metric: str = "total_cases", granularity: str | None = None,
                 from_: int | None = Query(None, alias="from"),
                 to: int | None = None):
        b = current()
        g = granularity or b.config.granularity
        lo, hi = b.clamp_window(g, from_, to)
        ranked = analytics.rank_by(metric, b.snapshot.communities,
                                   b.series_for(g, "lga"), (lo, hi),
                                   b.config.per_capita_divisor)
        payload = ranked.to_json_dict()
        payload["snapshot"] = b.id
        return _json(payload, b.id)

    @app.get("/mdc")
    def mdc(granularity: str | None = None,
            from_: int | None = Query(None, alias="from"),
            to: int | None = None):
        b = current()
        g = granularity or b.config.granularity
        lo, hi = b.clamp_window(g, from_, to)
        dataset = analytics.mdc_dataset(b.snapshot.communities,
                                        b.series_for(g, "lga"), (lo, hi))
        payload = dataset.to_json_dict()
        payload["snapshot"] = b.id
        return _json(payload, b.id)

    @app.post("/brush")
    async def brush(request: Request):
        b = current()
        body = await request.json()
        intervals = {a: (float(v[0]), float(v[1]))
                     for a, v in (body.get("intervals") or {}).items()}
        g = body.get("granularity") or b.config.granularity
        lo, hi = b.clamp_window(g, body.get("from"), body.get("to"))
        dataset = analytics.mdc_dataset(b.snapshot.communities,
                                        b.series_for(g, "lga"), (lo, hi))
        codes = sorted(analytics.brush_filter(dataset, intervals))
        return _json({"snapshot": b.id, "codes": codes}, b.id)

    async def layout_route(request: Request, seed: int = 0,
                           viewport_w: float = 1600.0, viewport_h: float = 900.0):
        b = current()
        bodies = b.layout_bodies()
        if request.method == "POST":
            body = await request.json()
            for p in body.get("pins", []):
                bodies = pin(bodies, p["code"], (float(p["x"]), float(p["y"])))
        with app.state.layout_lock:
            result = run_layout(bodies, (viewport_w, viewport_h), seed=seed)
        payload = result.to_json_dict()
        payload["snapshot"] = b.id
        return _json(payload, b.id)

    app.get("/layout")(layout_route)
    app.post("/layout")(layout_route)

    @app.get("/boundaries")
    def boundaries(level: str = "lga"):
        b = current()
        if level not in b.snapshot.boundaries:
            raise ValueError(f"no {level!r} boundaries in this snapshot")
        bset = b.snapshot.boundaries[level]
        features = [{
            "type": "Feature",
            "properties": {"code": f.code, "level": bset.level},
            "geometry": f.geometry,
        } for f in bset.features]
        return _json({"type": "FeatureCollection", "bbox": list(bset.bbox),
                      "features": features}, b.id)

    return app
