"""JSON encoding for reports and checkpoint metadata (orjson when available)."""

from __future__ import annotations

from typing import Any

try:
    import orjson as json_lib

    def dumps(obj: Any, *, pretty: bool = False) -> bytes:
        option = json_lib.OPT_SORT_KEYS | json_lib.OPT_SERIALIZE_NUMPY
        if pretty:
            option |= json_lib.OPT_INDENT_2
        return json_lib.dumps(obj, option=option)

    def loads(raw: bytes | str) -> Any:
        return json_lib.loads(raw)

except ImportError:
    import json as json_lib_fallback

    def dumps(obj: Any, *, pretty: bool = False) -> bytes:
        return json_lib_fallback.dumps(obj, sort_keys=True, indent=2 if pretty else None).encode("utf-8")

    def loads(raw: bytes | str) -> Any:
        return json_lib_fallback.loads(raw)


_BIG_INT_KEY = "__int__"
_INT64_LIMIT = 2**63


def encode_big_ints(obj: Any) -> Any:
    """Wrap integers outside int64 (e.g. 128-bit PCG64 state) as decimal strings."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, int) and not -_INT64_LIMIT <= obj < _INT64_LIMIT:
        return {_BIG_INT_KEY: str(obj)}
    if isinstance(obj, dict):
        return {key: encode_big_ints(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode_big_ints(value) for value in obj]
    return obj


def decode_big_ints(obj: Any) -> Any:
    if isinstance(obj, dict):
        if set(obj) == {_BIG_INT_KEY}:
            return int(obj[_BIG_INT_KEY])
        return {key: decode_big_ints(value) for key, value in obj.items()}
    if isinstance(obj, list):
        return [decode_big_ints(value) for value in obj]
    return obj


__all__ = ["dumps", "loads", "encode_big_ints", "decode_big_ints"]
