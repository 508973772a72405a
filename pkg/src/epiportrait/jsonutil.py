"""Canonical JSON serialization.

Snapshot hashing, golden exports and API bodies all need byte-stable output,
so one serializer is used everywhere: keys sorted, floats rendered with 17
significant digits (lossless for IEEE doubles), no insignificant whitespace.
"""

from __future__ import annotations

import math


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite float cannot be serialized canonically")
    if x == int(x) and abs(x) < 1e16:
        # keep a ".0" so the value round-trips as a float
        return f"{int(x)}.0"
    return format(x, ".17g")


def _escape(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def canonical_json(obj) -> str:
    """Render obj (dict/list/tuple/str/int/float/bool/None) canonically."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, str):
        return _escape(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = []
        for k in sorted(obj):
            if not isinstance(k, str):
                raise TypeError(f"non-string key {k!r}")
            items.append(_escape(k) + ":" + canonical_json(obj[k]))
        return "{" + ",".join(items) + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")
