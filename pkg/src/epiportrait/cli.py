"""Command-line entry point: build snapshots, export batch artifacts, serve
the API, and generate desk-scale fixtures.

Exit codes: 0 success, 2 fatal input error (report printed as JSON on
stderr).  Configuration comes from one JSON file plus flag overrides; only
the bind address may come from the environment (EPIPORTRAIT_BIND).
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import analytics
from .config import AppConfig, load_config
from .errors import EpiPortraitError, FormatError
from .ingest import (build_snapshot, fixture_files, load_snapshot, parse_boundaries,
                     parse_cases, parse_events, parse_profiles, snapshot_bytes,
                     snapshot_id)
from .jsonutil import canonical_json, format_float
from .svg import portrait_svg

DEFAULT_BIND = "127.0.0.1:8600"


def _config_from_args(args) -> AppConfig:
    overrides = {
        "window_start": getattr(args, "window_start", None),
        "window_end": getattr(args, "window_end", None),
        "granularity": getattr(args, "granularity", None),
    }
    return load_config(getattr(args, "config", None), overrides)


def cmd_build(args) -> int:
    cfg = _config_from_args(args)
    window = cfg.window

    cases, q_cases = parse_cases(Path(args.cases).read_bytes(), window,
                                 cfg.exclude_rules)
    profiles = parse_profiles(Path(args.profiles).read_bytes())
    boundaries = {"lga": parse_boundaries(Path(args.boundaries_lga).read_bytes(), "lga")}
    if args.boundaries_postal:
        boundaries["postal_area"] = parse_boundaries(
            Path(args.boundaries_postal).read_bytes(), "postal_area")
    events, q_events = ([], [])
    if args.events:
        events, q_events = parse_events(Path(args.events).read_bytes(), window)

    snapshot = build_snapshot(cases, q_cases + q_events, profiles, boundaries,
                              events, window, cfg.code_aliases)
    data = snapshot_bytes(snapshot)
    Path(args.out).write_bytes(data)

    raw_rows = len(cases) + len(q_cases)
    summary = {
        "snapshot": snapshot_id(snapshot),
        "window": {"start": window[0].isoformat(), "end": window[1].isoformat()},
        "case_rows": raw_rows,
        "accepted_cases": len(snapshot.cases),
        "quarantined": len(snapshot.quarantined),
        "communities": len(snapshot.communities),
        "events": len(snapshot.events),
        "boundaries": {level: len(b.features) for level, b in snapshot.boundaries.items()},
    }
    print(canonical_json(summary))
    return 0


def _csv_bytes(rows) -> bytes:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue().encode()


def cmd_export(args) -> int:
    from .service import SnapshotBundle  # deferred: pulls in fastapi

    cfg = _config_from_args(args)
    snapshot = load_snapshot(Path(args.snapshot).read_bytes())
    bundle = SnapshotBundle(snapshot, cfg)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    granularity = cfg.granularity
    lo, hi = bundle.clamp_window(granularity, args.window_from, args.window_to)
    written = []

    if args.what == "portraits_svg":
        from .geometry import build_portrait
        series = bundle.series_for(granularity, "lga")
        for code in sorted(snapshot.communities):
            g = build_portrait(series[code], snapshot.communities[code],
                               bundle.stats, cfg.portrait, mode=args.mode,
                               phases=bundle.phases[granularity], window=(lo, hi),
                               per_capita_divisor=cfg.per_capita_divisor)
            path = outdir / f"{code}.svg"
            path.write_text(portrait_svg(g), encoding="utf-8")
            written.append(path.name)
    elif args.what == "portraits_json":
        path = outdir / "portraits.json"
        path.write_text(canonical_json(bundle.portraits(granularity, args.mode, lo, hi))
                        + "\n", encoding="utf-8")
        written.append(path.name)
    elif args.what == "rankings_csv":
        metric = "cases_per_10k" if args.mode == "per_10k" else "total_cases"
        ranked = analytics.rank_by(metric, snapshot.communities,
                                   bundle.series_for(granularity, "lga"), (lo, hi),
                                   cfg.per_capita_divisor)
        rows = [("rank", "code", "name", "value")]
        rows += [(r, c, snapshot.communities[c].name, format_float(float(v)))
                 for c, v, r in ranked.entries]
        path = outdir / "rankings.csv"
        path.write_bytes(_csv_bytes(rows))
        written.append(path.name)
    elif args.what == "mdc_csv":
        dataset = analytics.mdc_dataset(snapshot.communities,
                                        bundle.series_for(granularity, "lga"), (lo, hi))
        rows = [("code",) + dataset.axes]
        for code in dataset.codes:
            rows.append((code,) + tuple(format_float(v) for v in dataset.raw[code]))
        path = outdir / "mdc.csv"
        path.write_bytes(_csv_bytes(rows))
        written.append(path.name)
    else:
        raise ValueError(f"unknown export kind {args.what!r}")

    print(canonical_json({"snapshot": bundle.id, "what": args.what,
                          "outdir": str(outdir), "files": sorted(written)}))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import SnapshotBundle, create_app

    cfg = _config_from_args(args)
    snapshot = load_snapshot(Path(args.snapshot).read_bytes())
    app = create_app(SnapshotBundle(snapshot, cfg))
    bind = args.bind or os.environ.get("EPIPORTRAIT_BIND", DEFAULT_BIND)
    host, _, port = bind.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8600),
                log_level="warning")
    return 0


def cmd_fixture(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = fixture_files(args.seed, args.communities, args.days)
    for name, data in files.items():
        (outdir / name).write_bytes(data)

    from datetime import date, timedelta
    start = date(2020, 1, 1)
    end = start + timedelta(days=args.days - 1)
    config = {
        "window": {"start": start.isoformat(), "end": end.isoformat()},
        "granularity": args.granularity,
    }
    (outdir / "config.json").write_text(canonical_json(config) + "\n", encoding="utf-8")
    print(canonical_json({"outdir": str(outdir), "seed": args.seed,
                          "communities": args.communities, "days": args.days,
                          "files": sorted(list(files) + ["config.json"])}))
    return 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="epiportrait",
                                description="community epidemic portrait toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--window-start", dest="window_start")
        sp.add_argument("--window-end", dest="window_end")
        sp.add_argument("--granularity", choices=("weekly", "fortnightly"))

    b = sub.add_parser("build", help="parse + validate inputs into a snapshot")
    common(b)
    b.add_argument("--cases", required=True)
    b.add_argument("--profiles", required=True)
    b.add_argument("--boundaries-lga", dest="boundaries_lga", required=True)
    b.add_argument("--boundaries-postal", dest="boundaries_postal")
    b.add_argument("--events")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("export", help="batch-render artifacts from a snapshot")
    common(e)
    e.add_argument("--snapshot", required=True)
    e.add_argument("--what", required=True,
                   choices=("portraits_svg", "portraits_json", "rankings_csv", "mdc_csv"))
    e.add_argument("--outdir", required=True)
    e.add_argument("--mode", default="actual", choices=("actual", "per_10k"))
    e.add_argument("--from", dest="window_from", type=int)
    e.add_argument("--to", dest="window_to", type=int)
    e.set_defaults(func=cmd_export)

    s = sub.add_parser("serve", help="serve the read-only API")
    common(s)
    s.add_argument("--snapshot", required=True)
    s.add_argument("--bind", help=f"host:port (default {DEFAULT_BIND}, "
                                  "or EPIPORTRAIT_BIND)")
    s.set_defaults(func=cmd_serve)

    f = sub.add_parser("fixture", help="generate synthetic input files")
    f.add_argument("--seed", type=int, default=42)
    f.add_argument("--communities", type=int, default=10)
    f.add_argument("--days", type=int, default=140)
    f.add_argument("--granularity", choices=("weekly", "fortnightly"), default="weekly")
    f.add_argument("--outdir", required=True)
    f.set_defaults(func=cmd_fixture)

    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(canonical_json({"error": {"type": "format", "message": str(e)}}),
              file=sys.stderr)
        return 2
    except (EpiPortraitError, FileNotFoundError, ValueError) as e:
        print(canonical_json({"error": {"type": type(e).__name__, "message": str(e)}}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
