"""Canonical JSON: byte stability and lossless float round-trips."""

import json
import math
import random

import pytest

from epiportrait.jsonutil import canonical_json, format_float


def test_sorted_keys_and_compactness():
    assert canonical_json({"b": 1, "a": [True, None, "x"]}) == '{"a":[true,null,"x"],"b":1}'


def test_int_float_distinction_survives():
    s = canonical_json({"i": 4, "f": 4.0})
    assert s == '{"f":4.0,"i":4}'
    back = json.loads(s)
    assert isinstance(back["i"], int) and isinstance(back["f"], float)


def test_float_roundtrip_random():
    rng = random.Random(0)
    for _ in range(500):
        x = rng.uniform(-1e6, 1e6) * 10 ** rng.randrange(-12, 12)
        assert float(format_float(x)) == x


def test_escapes():
    assert canonical_json({"k": 'a"b\\c\n'}) == '{"k":"a\\"b\\\\c\\n"}'


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        canonical_json(math.inf)
    with pytest.raises(ValueError):
        canonical_json({"x": math.nan})


def test_reserialization_stable():
    obj = {"z": [1.5, 2, {"y": 0.1}], "a": "text"}
    once = canonical_json(obj)
    again = canonical_json(json.loads(once))
    assert once == again
