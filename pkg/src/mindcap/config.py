"""Shared configuration file format.

Budgets, bias weights and scenarios all use the same flat text format: one
``key = value`` pair per line, ``#`` starts a comment.  Values may carry a
unit suffix; the loader normalizes every size to bits and every duration to
milliseconds:

    size        ``b`` = bit, ``B`` = byte (8 bits), SI prefixes k/M/G/T
                (powers of ten), e.g. ``10Mb`` = 10^7 bits, ``10GB`` = 8x10^10 bits
    duration    ``ms`` = millisecond, ``s`` = 1000 ms
    frequency   ``Hz`` passes through unchanged
    bare        plain integer/float, including scientific notation (``1e7``)

Anything that does not parse as a number is kept as a string.
"""

from __future__ import annotations

import re
from typing import Dict, Union

Value = Union[int, float, str]

_NUMBER_RE = re.compile(
    r"^([+-]?(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)\s*([A-Za-z]+)?$"
)

_SI = {"": 1, "k": 10**3, "K": 10**3, "M": 10**6, "G": 10**9, "T": 10**12}

# suffix -> multiplier into the canonical unit (bits or milliseconds)
_UNITS: Dict[str, float] = {"ms": 1, "s": 1000, "Hz": 1, "hz": 1}
for prefix, scale in _SI.items():
    _UNITS[prefix + "b"] = scale          # bits
    _UNITS[prefix + "B"] = scale * 8      # bytes, normalized to bits

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


def parse_value(raw: str) -> Value:
    """Parse one config value, normalizing unit suffixes; strings pass through."""
    text = raw.strip()
    m = _NUMBER_RE.match(text)
    if not m:
        return text
    number, suffix = m.group(1), m.group(2)
    if suffix is not None and suffix not in _UNITS:
        return text
    if suffix is None and re.fullmatch(r"[+-]?[0-9]+", number):
        return int(number)  # keep plain integers exact beyond float precision
    value = float(number) * (_UNITS[suffix] if suffix else 1)
    if value == int(value) and abs(value) < 2**63:
        return int(value)
    return value


def parse_config_text(text: str) -> Dict[str, Value]:
    """Parse the flat key=value format into a dict of normalized values."""
    out: Dict[str, Value] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ValueError(f"line {lineno}: bad key {key!r}")
        out[key] = parse_value(raw)
    return out


def load_config(path: str) -> Dict[str, Value]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        raise TypeError("booleans are not part of the config format")
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config_text(pairs: Dict[str, Value]) -> str:
    """Render a mapping in the config format, keys in the given order."""
    return "".join(f"{k} = {format_value(v)}\n" for k, v in pairs.items())
