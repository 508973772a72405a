"""Parsing and validation of the four raw inputs into an immutable snapshot.

Sources: case CSV, community profile CSV, boundary GeoJSON (one file per
level), and event JSON-lines.  Bad case/event rows are quarantined with a
machine-readable reason, never dropped; structural problems (missing header,
duplicate codes, broken rings) are fatal.  A seeded generator produces
desk-scale fixtures in exactly the same file formats.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import random
from dataclasses import dataclass, field
from datetime import date, timedelta

from .config import INDICATOR_NAMES, ExcludeRule
from .errors import FormatError
from .jsonutil import canonical_bytes

CASE_COLUMNS = ("notification_date", "postal_code", "lga_code", "age_band", "likely_source")

AGE_BANDS = ("0-9", "10-19", "20-29", "30-39", "40-49", "50-59", "60-69", "70+", "unknown")

# population doubles as a census indicator, so it appears once in the CSV;
# population_density is carried but recomputed, never trusted.
PROFILE_COLUMNS = (
    "code", "name", "population", "area_km2",
    "aged_male_70p", "aged_female_70p", "lower_income", "lone_person",
) + tuple(n for n in INDICATOR_NAMES if n != "population")

BOUNDARY_LEVELS = ("lga", "postal_area")


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class CaseRecord:
    notification_date: date
    postal_code: str
    community_code: str
    age_band: str
    likely_source: str | None = None


@dataclass(frozen=True)
class QuarantinedRow:
    source: str          # "cases" | "events" | "join"
    row_number: int      # 1-based data row in the source file
    reason: str          # machine-readable code
    detail: str
    raw: tuple[str, ...]


@dataclass(frozen=True)
class CommunityProfile:
    code: str
    name: str
    population: int
    area_km2: float
    aged_male_70p: int
    aged_female_70p: int
    lower_income: int
    lone_person: int
    indicators: dict = field(default_factory=dict)  # all 12 INDICATOR_NAMES

    def key_factor(self, name: str) -> int:
        return getattr(self, name)


@dataclass(frozen=True)
class BoundaryFeature:
    code: str
    geometry: dict  # {"type": "Polygon"|"MultiPolygon", "coordinates": [...]}


@dataclass(frozen=True)
class BoundarySet:
    level: str
    features: tuple[BoundaryFeature, ...]
    bbox: tuple[float, float, float, float]  # minx, miny, maxx, maxy

    def codes(self) -> list[str]:
        return [f.code for f in self.features]


@dataclass(frozen=True)
class EventLine:
    date: date
    text: str


@dataclass(frozen=True)
class DatasetSnapshot:
    cases: tuple[CaseRecord, ...]
    communities: dict            # code -> CommunityProfile
    boundaries: dict             # level -> BoundarySet
    events: tuple[EventLine, ...]
    window: tuple[date, date]    # inclusive
    quarantined: tuple[QuarantinedRow, ...] = ()


# ---------------------------------------------------------------------------
# parsers

def _as_text(source) -> io.TextIOBase:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8")


def parse_cases(source, window: tuple[date, date],
                exclude_rules: tuple[ExcludeRule, ...] = ()):
    """Parse the case CSV into (accepted records, quarantined rows).

    Accepted + quarantined always equals the number of data rows.
    """
    reader = csv.reader(_as_text(source))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("case file is empty; expected header "
                          + ",".join(CASE_COLUMNS)) from None
    if tuple(h.strip() for h in header) != CASE_COLUMNS:
        raise FormatError(f"case header {header!r} does not match {list(CASE_COLUMNS)}")

    accepted: list[CaseRecord] = []
    quarantined: list[QuarantinedRow] = []
    start, end = window

    for i, row in enumerate(reader, start=1):
        raw = tuple(row)

        def bad(reason, detail):
            quarantined.append(QuarantinedRow("cases", i, reason, detail, raw))

        if len(row) != len(CASE_COLUMNS):
            bad("column_count", f"expected {len(CASE_COLUMNS)} columns, got {len(row)}")
            continue
        date_s, postal, lga, band, source_text = (v.strip() for v in row)
        try:
            when = date.fromisoformat(date_s)
        except ValueError:
            bad("bad_date", f"unparseable ISO date {date_s!r}")
            continue
        if not (start <= when <= end):
            bad("out_of_window", f"{date_s} outside {start}..{end}")
            continue
        if band == "":
            band = "unknown"
        if band not in AGE_BANDS:
            bad("bad_age_band", f"unknown age band {band!r}")
            continue
        if lga == "":
            bad("missing_community", "empty lga_code")
            continue
        fields = {"notification_date": date_s, "postal_code": postal,
                  "lga_code": lga, "age_band": band, "likely_source": source_text}
        rule = next((r for r in exclude_rules if r.matches(fields)), None)
        if rule is not None:
            bad("excluded", f"{rule.field} contains {rule.contains!r}")
            continue
        accepted.append(CaseRecord(when, postal, lga, band, source_text or None))

    return accepted, quarantined


def parse_profiles(source) -> dict:
    """Parse the community profile CSV into {code: CommunityProfile}.

    population_density is recomputed from population/area_km2; its column is
    only validated as numeric.
    """
    reader = csv.reader(_as_text(source))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError("profile file is empty") from None
    if tuple(h.strip() for h in header) != PROFILE_COLUMNS:
        raise FormatError(f"profile header does not match {list(PROFILE_COLUMNS)}")

    profiles: dict[str, CommunityProfile] = {}
    for i, row in enumerate(reader, start=1):
        if len(row) != len(PROFILE_COLUMNS):
            raise FormatError(f"profile row {i}: expected {len(PROFILE_COLUMNS)} columns")
        rec = dict(zip(PROFILE_COLUMNS, (v.strip() for v in row)))
        code = rec["code"]
        if not code:
            raise FormatError(f"profile row {i}: empty code")
        if code in profiles:
            raise FormatError(f"profile row {i}: duplicate code {code!r}")
        try:
            population = int(rec["population"])
            area = float(rec["area_km2"])
            counts = {k: int(rec[k]) for k in
                      ("aged_male_70p", "aged_female_70p", "lower_income", "lone_person")}
            numeric = {k: float(rec[k]) for k in PROFILE_COLUMNS[8:]}
        except ValueError as e:
            raise FormatError(f"profile row {i} ({code}): {e}") from None
        if population < 0:
            raise FormatError(f"profile row {i} ({code}): negative population")
        if area <= 0:
            raise FormatError(f"profile row {i} ({code}): area_km2 must be positive")
        for k, v in counts.items():
            if v < 0:
                raise FormatError(f"profile row {i} ({code}): negative {k}")
            if v > population:
                raise FormatError(f"profile row {i} ({code}): {k}={v} exceeds population")

        indicators = {n: numeric[n] for n in INDICATOR_NAMES if n in numeric}
        indicators["population"] = float(population)
        indicators["population_density"] = population / area
        profiles[code] = CommunityProfile(
            code=code, name=rec["name"], population=population, area_km2=area,
            indicators=indicators, **counts)
    return profiles


def _iter_rings(geometry, feature_index):
    gtype = geometry.get("type")
    coords = geometry.get("coordinates")
    if gtype == "Polygon":
        polygons = [coords]
    elif gtype == "MultiPolygon":
        polygons = coords
    else:
        raise FormatError(f"feature {feature_index}: unsupported geometry type {gtype!r}")
    for poly in polygons:
        for ring in poly:
            yield ring


def parse_boundaries(source, level: str) -> BoundarySet:
    """Parse a GeoJSON FeatureCollection into a validated BoundarySet."""
    if level not in BOUNDARY_LEVELS:
        raise ValueError(f"level must be one of {BOUNDARY_LEVELS}")
    text = _as_text(source).read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"boundaries are not valid JSON: {e}") from None
    if data.get("type") != "FeatureCollection" or not isinstance(data.get("features"), list):
        raise FormatError("boundaries must be a GeoJSON FeatureCollection")

    missing_code = [i for i, f in enumerate(data["features"])
                    if not (f.get("properties") or {}).get("code")]
    if missing_code:
        raise FormatError(f"features without a code property at indices {missing_code}")

    features: list[BoundaryFeature] = []
    seen: set[str] = set()
    minx = miny = float("inf")
    maxx = maxy = float("-inf")
    for i, f in enumerate(data["features"]):
        props = f.get("properties") or {}
        code = str(props["code"])
        if props.get("level") is not None and props["level"] != level:
            raise FormatError(f"feature {i} ({code}): level {props['level']!r} != {level!r}")
        if code in seen:
            raise FormatError(f"feature {i}: duplicate code {code!r}")
        seen.add(code)
        geometry = f.get("geometry") or {}
        for ring in _iter_rings(geometry, i):
            if len(ring) < 4:
                raise FormatError(f"feature {i} ({code}): ring with fewer than 4 points")
            if list(ring[0]) != list(ring[-1]):
                raise FormatError(f"feature {i} ({code}): ring not closed")
            for x, y in ring:
                minx, miny = min(minx, x), min(miny, y)
                maxx, maxy = max(maxx, x), max(maxy, y)
        features.append(BoundaryFeature(code=code, geometry={
            "type": geometry["type"],
            "coordinates": geometry["coordinates"],
        }))
    if not features:
        raise FormatError("boundary file contains no features")
    return BoundarySet(level=level, features=tuple(features),
                       bbox=(minx, miny, maxx, maxy))


def parse_events(source, window: tuple[date, date]):
    """Parse JSON-lines events into (accepted, quarantined)."""
    accepted: list[EventLine] = []
    quarantined: list[QuarantinedRow] = []
    start, end = window
    for i, line in enumerate(_as_text(source), start=1):
        line = line.strip()
        if not line:
            continue
        raw = (line,)
        try:
            obj = json.loads(line)
            when = date.fromisoformat(str(obj["date"]))
            text = str(obj["text"])
        except (json.JSONDecodeError, KeyError, ValueError, TypeError) as e:
            quarantined.append(QuarantinedRow("events", i, "bad_event", str(e), raw))
            continue
        if not (start <= when <= end):
            quarantined.append(QuarantinedRow(
                "events", i, "out_of_window", f"{when} outside {start}..{end}", raw))
            continue
        accepted.append(EventLine(when, text))
    return accepted, quarantined


# ---------------------------------------------------------------------------
# snapshot assembly and serialization

def build_snapshot(cases, quarantined, profiles, boundaries, events,
                   window, code_aliases=None) -> DatasetSnapshot:
    """Join parsed pieces into one validated snapshot.

    Case community codes are passed through the alias table (merged councils
    etc.); cases whose code still does not resolve move to quarantine.
    """
    aliases = code_aliases or {}
    quarantined = list(quarantined)

    if "lga" not in boundaries:
        raise FormatError("an lga boundary set is required")
    lga_codes = set(boundaries["lga"].codes())
    profile_codes = set(profiles)
    if lga_codes != profile_codes:
        only_b = sorted(lga_codes - profile_codes)[:5]
        only_p = sorted(profile_codes - lga_codes)[:5]
        raise FormatError(
            f"boundary/profile code mismatch (boundary-only {only_b}, profile-only {only_p})")

    resolved: list[CaseRecord] = []
    for i, c in enumerate(cases, start=1):
        code = aliases.get(c.community_code, c.community_code)
        if code not in profiles:
            quarantined.append(QuarantinedRow(
                "join", i, "unknown_community", f"code {code!r} not in profiles",
                (c.notification_date.isoformat(), c.postal_code, c.community_code,
                 c.age_band, c.likely_source or "")))
            continue
        if code != c.community_code:
            c = CaseRecord(c.notification_date, c.postal_code, code,
                           c.age_band, c.likely_source)
        resolved.append(c)

    return DatasetSnapshot(
        cases=tuple(resolved),
        communities=dict(profiles),
        boundaries=dict(boundaries),
        events=tuple(events),
        window=window,
        quarantined=tuple(quarantined),
    )


def snapshot_to_dict(s: DatasetSnapshot) -> dict:
    return {
        "window": {"start": s.window[0].isoformat(), "end": s.window[1].isoformat()},
        "cases": [[c.notification_date.isoformat(), c.postal_code, c.community_code,
                   c.age_band, c.likely_source] for c in s.cases],
        "communities": {
            code: {
                "name": p.name, "population": p.population, "area_km2": p.area_km2,
                "aged_male_70p": p.aged_male_70p, "aged_female_70p": p.aged_female_70p,
                "lower_income": p.lower_income, "lone_person": p.lone_person,
                "indicators": dict(p.indicators),
            } for code, p in s.communities.items()
        },
        "boundaries": {
            level: {
                "level": b.level,
                "bbox": list(b.bbox),
                "features": [{"code": f.code, "geometry": f.geometry} for f in b.features],
            } for level, b in s.boundaries.items()
        },
        "events": [[e.date.isoformat(), e.text] for e in s.events],
        "quarantined": [
            {"source": q.source, "row": q.row_number, "reason": q.reason,
             "detail": q.detail, "raw": list(q.raw)} for q in s.quarantined
        ],
    }


def snapshot_from_dict(d: dict) -> DatasetSnapshot:
    window = (date.fromisoformat(d["window"]["start"]),
              date.fromisoformat(d["window"]["end"]))
    cases = tuple(CaseRecord(date.fromisoformat(r[0]), r[1], r[2], r[3], r[4])
                  for r in d["cases"])
    communities = {
        code: CommunityProfile(
            code=code, name=p["name"], population=p["population"],
            area_km2=p["area_km2"], aged_male_70p=p["aged_male_70p"],
            aged_female_70p=p["aged_female_70p"], lower_income=p["lower_income"],
            lone_person=p["lone_person"], indicators=dict(p["indicators"]))
        for code, p in d["communities"].items()
    }
    boundaries = {
        level: BoundarySet(
            level=b["level"], bbox=tuple(b["bbox"]),
            features=tuple(BoundaryFeature(f["code"], f["geometry"])
                           for f in b["features"]))
        for level, b in d["boundaries"].items()
    }
    events = tuple(EventLine(date.fromisoformat(r[0]), r[1]) for r in d["events"])
    quarantined = tuple(
        QuarantinedRow(q["source"], q["row"], q["reason"], q["detail"], tuple(q["raw"]))
        for q in d["quarantined"])
    return DatasetSnapshot(cases, communities, boundaries, events, window, quarantined)


def snapshot_bytes(s: DatasetSnapshot) -> bytes:
    return canonical_bytes(snapshot_to_dict(s))


def snapshot_id(s: DatasetSnapshot) -> str:
    return hashlib.sha256(snapshot_bytes(s)).hexdigest()


def load_snapshot(source) -> DatasetSnapshot:
    return snapshot_from_dict(json.loads(_as_text(source).read()))


# ---------------------------------------------------------------------------
# fixture generation

_SYLLABLES = (
    "syd", "ney", "bar", "ran", "wick", "park", "field", "burn", "wood",
    "glen", "mount", "north", "west", "bay", "hill", "dale", "ford", "ton",
    "ham", "ley", "cliff", "vale", "brook", "stone", "marsh", "water",
    "fair", "liver", "pen", "rith", "black", "castle", "kirra", "cum",
)

_SOURCES = ("locally acquired", "overseas", "interstate", "under investigation", "")

_EVENT_TEMPLATES = (
    ("Public gathering limit of {n} announced", "eased"),
    ("Masks required on public transport", "eased"),
    ("Keep social distance urged for {place}", "eased"),
    ("Greater {place} lockdown extended", "restrict"),
    ("Night curfew declared in {place}", "restrict"),
    ("Stay-at-home order issued for {place}", "restrict"),
    ("New testing clinic opens in {place}", None),
    ("Vaccination hub expands in {place}", None),
    ("Restrictions reviewed for {place} next month", None),
)


def _fixture_name(rng: random.Random, used: set[str]) -> str:
    while True:
        k = rng.randrange(2, 4)
        name = "".join(rng.choice(_SYLLABLES) for _ in range(k)).capitalize()
        if name not in used:
            used.add(name)
            return name


def fixture_files(seed: int, n_communities: int, n_days: int) -> dict[str, bytes]:
    """Generate the four raw inputs as {filename: bytes}.

    Deterministic for a given (seed, n_communities, n_days); the files use
    exactly the production formats so the whole pipeline runs unchanged at
    desk scale.  Case counts follow a multi-wave profile over the window.
    """
    if n_communities < 1 or n_days < 1:
        raise ValueError("need n_communities >= 1 and n_days >= 1")
    rng = random.Random(seed)
    start = date(2020, 1, 1)
    end = start + timedelta(days=n_days - 1)

    used_names: set[str] = set()
    cols = max(1, int(n_communities ** 0.5))
    communities = []
    for i in range(n_communities):
        code = f"C{i + 1:03d}"
        name = _fixture_name(rng, used_names)
        population = rng.randrange(3_000, 400_000)
        area = round(20 + rng.random() * 3800, 2)
        aged_m = rng.randrange(0, max(1, population // 18))
        aged_f = rng.randrange(0, max(1, population // 16))
        lower = rng.randrange(population // 40, max(population // 40 + 1, population // 5))
        lone = rng.randrange(0, max(1, population // 8))
        col, rowi = i % cols, i // cols
        x0, y0 = 150.0 + 0.12 * col, -34.0 - 0.1 * rowi
        indicators = {
            "median_age": round(25 + rng.random() * 30, 1),
            "median_rent": round(180 + rng.random() * 550, 2),
            "median_mortgage": round(900 + rng.random() * 2200, 2),
            "median_personal_income": round(350 + rng.random() * 900, 2),
            "median_family_income": round(900 + rng.random() * 1900, 2),
            "median_household_income": round(800 + rng.random() * 1700, 2),
            "avg_bedrooms_per_person": round(0.7 + rng.random() * 1.6, 3),
            "avg_bedrooms_per_household": round(1.8 + rng.random() * 2.4, 3),
            "public_transport_rate": round(rng.random() * 0.6, 4),
        }
        postal = (f"2{(2 * i) % 1000:03d}", f"2{(2 * i + 1) % 1000:03d}")
        communities.append({
            "code": code, "name": name, "population": population, "area": area,
            "aged_male_70p": aged_m, "aged_female_70p": aged_f,
            "lower_income": lower, "lone_person": lone,
            "indicators": indicators, "cell": (x0, y0), "postal": postal,
        })

    # state-wide infection waves; each community scales and jitters them
    n_waves = 2 + rng.randrange(0, 3)
    waves = [(rng.randrange(n_days // 8, n_days), 8 + rng.random() * max(6, n_days / 12))
             for _ in range(n_waves)]

    case_rows = []
    for c in communities:
        scale = (c["population"] ** 0.7) / 2200.0
        offsets = [rng.randrange(-n_days // 20 - 1, n_days // 20 + 1) for _ in waves]
        skip = rng.random() < 0.2  # some communities miss the first wave entirely
        for d in range(n_days):
            lam = 0.0
            for (center, width), off in zip(waves, offsets):
                if skip and center == waves[0][0]:
                    continue
                z = (d - center - off) / width
                lam += scale * 6.0 * (2.718281828 ** (-z * z))
            k = int(lam * (0.5 + rng.random()))
            for _ in range(k):
                when = start + timedelta(days=d)
                band = rng.choice(AGE_BANDS[:-1])
                case_rows.append((when.isoformat(), rng.choice(c["postal"]),
                                  c["code"], band, rng.choice(_SOURCES)))
    rng.shuffle(case_rows)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CASE_COLUMNS)
    w.writerows(case_rows)
    cases_csv = buf.getvalue().encode()

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_COLUMNS)
    for c in communities:
        ind = c["indicators"]
        w.writerow([
            c["code"], c["name"], c["population"], f"{c['area']:.2f}",
            c["aged_male_70p"], c["aged_female_70p"], c["lower_income"], c["lone_person"],
            f"{ind['median_age']:.1f}", f"{c['area']:.2f}",
            f"{c['population'] / c['area']:.4f}",
            f"{ind['median_rent']:.2f}", f"{ind['median_mortgage']:.2f}",
            f"{ind['median_personal_income']:.2f}", f"{ind['median_family_income']:.2f}",
            f"{ind['median_household_income']:.2f}", f"{ind['avg_bedrooms_per_person']:.3f}",
            f"{ind['avg_bedrooms_per_household']:.3f}", f"{ind['public_transport_rate']:.4f}",
        ])
    profiles_csv = buf.getvalue().encode()

    def square(x0, y0, w_, h_):
        return [[[x0, y0], [x0 + w_, y0], [x0 + w_, y0 - h_], [x0, y0 - h_], [x0, y0]]]

    lga_features = []
    postal_features = []
    for c in communities:
        x0, y0 = c["cell"]
        lga_features.append({
            "type": "Feature",
            "properties": {"code": c["code"], "level": "lga", "name": c["name"]},
            "geometry": {"type": "Polygon", "coordinates": square(x0, y0, 0.12, 0.1)},
        })
        for half, pc in enumerate(c["postal"]):
            postal_features.append({
                "type": "Feature",
                "properties": {"code": pc, "level": "postal_area"},
                "geometry": {"type": "Polygon",
                             "coordinates": square(x0 + 0.06 * half, y0, 0.06, 0.1)},
            })
    lga_geojson = canonical_bytes({"type": "FeatureCollection", "features": lga_features})
    postal_geojson = canonical_bytes({"type": "FeatureCollection", "features": postal_features})

    event_lines = []
    n_events = max(3, n_days // 30)
    places = [c["name"] for c in communities]
    for _ in range(n_events):
        day = rng.randrange(n_days)
        tpl, _kind = _EVENT_TEMPLATES[rng.randrange(len(_EVENT_TEMPLATES))]
        text = tpl.format(n=rng.randrange(2, 500), place=rng.choice(places))
        event_lines.append({"date": (start + timedelta(days=day)).isoformat(), "text": text})
    event_lines.sort(key=lambda e: (e["date"], e["text"]))
    events_jsonl = b"".join(canonical_bytes(e) + b"\n" for e in event_lines)

    return {
        "cases.csv": cases_csv,
        "profiles.csv": profiles_csv,
        "boundaries_lga.geojson": lga_geojson,
        "boundaries_postal.geojson": postal_geojson,
        "events.jsonl": events_jsonl,
    }


def generate_fixture(seed: int, n_communities: int, n_days: int) -> DatasetSnapshot:
    """Generate a synthetic snapshot by parsing generated fixture files.

    Going through the parsers keeps fixtures format-identical to real inputs.
    """
    files = fixture_files(seed, n_communities, n_days)
    window = (date(2020, 1, 1), date(2020, 1, 1) + timedelta(days=n_days - 1))
    cases, q_cases = parse_cases(files["cases.csv"], window)
    profiles = parse_profiles(files["profiles.csv"])
    boundaries = {
        "lga": parse_boundaries(files["boundaries_lga.geojson"], "lga"),
        "postal_area": parse_boundaries(files["boundaries_postal.geojson"], "postal_area"),
    }
    events, q_events = parse_events(files["events.jsonl"], window)
    return build_snapshot(cases, q_cases + q_events, profiles, boundaries,
                          events, window)
