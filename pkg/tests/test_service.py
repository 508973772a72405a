"""API surface: transport equals in-process math, byte-stable responses."""

import json

import pytest
from fastapi.testclient import TestClient

from epiportrait import analytics
from epiportrait.jsonutil import canonical_bytes
from epiportrait.service import create_app


@pytest.fixture(scope="module")
def client(bundle10):
    return TestClient(create_app(bundle10))


def test_health(client, bundle10):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json() == {"status": "ok", "snapshot": bundle10.id}


def test_snapshot_id_on_every_response(client, bundle10):
    for path in ("/health", "/grid", "/communities", "/portraits",
                 "/filter_trigger", "/heatmap", "/rankings", "/mdc",
                 "/boundaries", "/search?q=a", "/layout"):
        r = client.get(path)
        assert r.status_code == 200, path
        assert r.headers["x-snapshot-id"] == bundle10.id, path


def test_grid_endpoint(client, bundle10):
    weekly = client.get("/grid?granularity=weekly").json()
    assert len(weekly["spans"]) == len(bundle10.grids["weekly"])
    fortnightly = client.get("/grid?granularity=fortnightly").json()
    assert len(fortnightly["spans"]) == len(bundle10.grids["fortnightly"])


def test_portraits_match_in_process(client, bundle10):
    r = client.get("/portraits?granularity=weekly&mode=per_10k&from=0&to=9")
    body = r.json()
    assert len(body) == len(bundle10.snapshot.communities)
    direct = bundle10.portraits("weekly", "per_10k", 0, 9)
    assert r.content == canonical_bytes(direct)


def test_portraits_byte_stable(client):
    q = "/portraits?granularity=weekly&mode=actual&from=0&to=5"
    assert client.get(q).content == client.get(q).content


def test_filter_trigger_schema(client, bundle10):
    body = client.get("/filter_trigger?granularity=weekly").json()
    assert len(body["proteins"]) == len(bundle10.grids["weekly"])
    assert {p["kind"] for p in body["proteins"]} == {"E"}
    assert len(body["rnas"]) == 3


def test_rankings_match_in_process(client, bundle10):
    r = client.get("/rankings?metric=total_cases&from=0&to=10")
    sm = bundle10.series_for("weekly", "lga")
    want = analytics.rank_by("total_cases", bundle10.snapshot.communities,
                             sm, (0, 10))
    got = r.json()
    assert got["entries"] == want.to_json_dict()["entries"]


def test_heatmap_levels(client, bundle10):
    lga = client.get("/heatmap?level=lga").json()
    assert set(lga["sums"]) == set(bundle10.snapshot.communities)
    postal = client.get("/heatmap?level=postal_area").json()
    assert set(postal["sums"]) == set(bundle10.snapshot.boundaries["postal_area"].codes())
    assert max(lga["intensity"].values()) == 1.0


def test_mdc_and_brush_roundtrip(client):
    mdc = client.get("/mdc").json()
    assert len(mdc["axes"]) == 13
    full = {a: [0.0, 1.0] for a in mdc["axes"]}
    r = client.post("/brush", json={"intervals": full})
    assert sorted(r.json()["codes"]) == sorted(c["code"] for c in mdc["communities"])
    r2 = client.post("/brush", json={"intervals": {"median_age": [0.6, 0.2]}})
    assert r2.json()["codes"] == []


def test_brush_matches_in_process(client, bundle10):
    intervals = {"median_age": (0.1, 0.8), "total_cases": (0.0, 0.7)}
    r = client.post("/brush", json={"intervals": {k: list(v) for k, v in intervals.items()}})
    sm = bundle10.series_for("weekly", "lga")
    grid = bundle10.grids["weekly"]
    dataset = analytics.mdc_dataset(bundle10.snapshot.communities, sm,
                                    (0, len(grid) - 1))
    want = sorted(analytics.brush_filter(dataset, intervals))
    assert r.json()["codes"] == want


def test_layout_endpoint_and_pins(client):
    r = client.get("/layout?seed=11&viewport_w=4000&viewport_h=3000").json()
    assert r["converged"] is True
    assert len(r["bodies"]) == 10
    r2 = client.post("/layout?seed=11&viewport_w=4000&viewport_h=3000",
                     json={"pins": [{"code": "C003", "x": 444.5, "y": 333.25}]})
    b = next(x for x in r2.json()["bodies"] if x["code"] == "C003")
    assert (b["x"], b["y"], b["pinned"]) == (444.5, 333.25, True)


def test_layout_deterministic_bytes(client):
    q = "/layout?seed=7&viewport_w=4000&viewport_h=3000"
    assert client.get(q).content == client.get(q).content


def test_search_endpoint(client, bundle10):
    some_name = next(iter(bundle10.snapshot.communities.values())).name
    r = client.get(f"/search?q={some_name[:3].lower()}")
    assert any(x["name"] == some_name for x in r.json()["results"])
    postal = client.get("/search?q=2&level=postal_area").json()
    assert postal["results"]


def test_boundaries_endpoint(client, bundle10):
    r = client.get("/boundaries?level=lga").json()
    assert r["type"] == "FeatureCollection"
    assert len(r["features"]) == 10
    assert all(f["properties"]["code"] for f in r["features"])


def test_bad_requests(client):
    assert client.get("/portraits?granularity=hourly").status_code == 400
    assert client.get("/rankings?metric=bogus").status_code == 400
    assert client.get("/heatmap?from=9999").status_code == 400
    assert client.get("/boundaries?level=bogus").status_code == 400
    assert client.get("/unknown_route").status_code == 404


def test_communities_endpoint(client, bundle10):
    body = client.get("/communities").json()
    rows = body["communities"]
    assert len(rows) == 10
    assert set(rows[0]) == {"code", "name", "population", "area_km2",
                            "aged_male_70p", "aged_female_70p", "lower_income",
                            "lone_person", "indicators"}
    assert len(rows[0]["indicators"]) == 12
