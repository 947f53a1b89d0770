"""Flat config format: unit normalization and round trips."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mindcap.config import (
    dump_config_text,
    format_value,
    parse_config_text,
    parse_value,
)


@pytest.mark.parametrize(
    "raw,expected",
    [
        ("10Mb", 10**7),
        ("10GB", 8 * 10**10),
        ("1kB", 8000),
        ("1b", 1),
        ("2B", 16),
        ("500ms", 500),
        ("2s", 2000),
        ("1000Hz", 1000),
        ("1e7", 10**7),
        ("42", 42),
        ("3.5", 3.5),
        ("-7", -7),
        ("  250 ms ", 250),
    ],
)
def test_parse_value_units(raw, expected):
    value = parse_value(raw)
    assert value == expected
    assert type(value) is type(expected)


def test_parse_value_strings_pass_through():
    assert parse_value("gridworld") == "gridworld"
    assert parse_value("10 parsecs") == "10 parsecs"
    assert parse_value("1.2.3") == "1.2.3"


def test_parse_config_text_basic():
    text = "storage = 10Mb\n# a comment\nagent = quiz  # trailing\n\nrate=0.5\n"
    pairs = parse_config_text(text)
    assert pairs == {"storage": 10**7, "agent": "quiz", "rate": 0.5}


def test_parse_config_text_rejects_bad_lines():
    with pytest.raises(ValueError, match="line 1"):
        parse_config_text("no equals sign here")
    with pytest.raises(ValueError, match="bad key"):
        parse_config_text("9lives = 3")


def test_format_value_rejects_bool():
    with pytest.raises(TypeError):
        format_value(True)


def test_dump_and_reparse_round_trip():
    pairs = {"a": 7, "b": 2.5, "c": "quiz", "big": 8 * 10**10}
    assert parse_config_text(dump_config_text(pairs)) == pairs


_keys = st.from_regex(r"[A-Za-z_][A-Za-z0-9_.\-]{0,15}", fullmatch=True)
_value = st.one_of(
    st.integers(min_value=-(2**60), max_value=2**60),
    st.floats(allow_nan=False, allow_infinity=False, width=64).filter(
        lambda x: x != int(x) or abs(x) >= 2**63
    ),
)


@given(st.dictionaries(_keys, _value, max_size=8))
def test_numeric_round_trip_property(pairs):
    assert parse_config_text(dump_config_text(pairs)) == pairs
