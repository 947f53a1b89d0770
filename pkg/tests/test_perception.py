"""Perception: stimulus validation, box-filter downscale, glance cap, loaders."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindcap.errors import GlanceCapExceeded
from mindcap.perception import (
    GLANCE_CAP_BITS,
    MAX_HEIGHT,
    MAX_WIDTH,
    Stimulus,
    downscale,
    load_portable_image,
)


def _gray(width, height, value=128):
    return Stimulus(width=width, height=height, payload=bytes([value]) * (width * height))


def test_stimulus_validation():
    with pytest.raises(ValueError, match="payload is"):
        Stimulus(width=4, height=4, payload=b"short")
    with pytest.raises(ValueError, match="kind"):
        Stimulus(width=1, height=1, payload=b"x", kind="sound")
    with pytest.raises(ValueError, match="8 bits"):
        Stimulus(width=1, height=1, depth=16, payload=b"xx")
    with pytest.raises(ValueError, match="positive"):
        Stimulus(width=0, height=1, payload=b"")


def test_complexity_bits():
    assert _gray(75, 50).complexity_bits == 75 * 50 * 8 == 30_000
    rgb = Stimulus(width=2, height=2, channels=3, payload=bytes(12))
    assert rgb.complexity_bits == 96


def test_from_text_blob():
    stim = Stimulus.from_text("12+34")
    assert stim.kind == "blob"
    assert stim.payload == b"12+34"
    assert stim.complexity_bits == 40
    with pytest.raises(ValueError, match="raster"):
        stim.to_array()


def test_from_gray_round_trip():
    pixels = np.arange(12, dtype=np.uint8).reshape(3, 4)
    stim = Stimulus.from_gray(pixels)
    assert (stim.width, stim.height) == (4, 3)
    assert np.array_equal(stim.to_array()[:, :, 0], pixels)
    with pytest.raises(ValueError):
        Stimulus.from_gray(np.zeros((2, 2, 3)))


def test_downscale_spec_dimensions():
    # 750x500 lands exactly on the 75x50 output grid
    big = _gray(750, 500)
    small = downscale(big)
    assert (small.width, small.height) == (75, 50)
    assert small.complexity_bits == 30_000


def test_small_images_pass_unchanged():
    tiny = _gray(28, 28)
    assert downscale(tiny) is tiny
    exact = _gray(MAX_WIDTH, MAX_HEIGHT)
    assert downscale(exact) is exact


def test_blob_passes_unchanged():
    blob = Stimulus.from_text("hello")
    assert downscale(blob) is blob


def test_downscale_is_idempotent():
    once = downscale(_gray(640, 480, value=77))
    assert downscale(once) is once


def test_constant_image_stays_constant():
    flat = downscale(_gray(750, 500, value=201))
    assert set(flat.payload) == {201}


def test_mean_preserved_within_quantization():
    rng = np.random.default_rng(7)
    pixels = rng.integers(0, 256, size=(500, 750), dtype=np.uint8)
    small = downscale(Stimulus.from_gray(pixels))
    # equal 10x10 boxes: the mean of box means is the image mean, so only
    # the final rounding can move it
    assert abs(float(pixels.mean()) - float(small.to_array().mean())) <= 0.5


def test_downscale_non_divisible_dimensions():
    small = downscale(_gray(100, 77))
    # limiting side is height: scale 50/77
    assert small.height == 50
    assert small.width == round(100 * 50 / 77)
    assert len(small.payload) == small.width * small.height


def test_downscale_preserves_channels():
    rgb = Stimulus(width=300, height=200, channels=3, payload=bytes(300 * 200 * 3))
    small = downscale(rgb)
    assert small.channels == 3
    assert (small.width, small.height) == (75, 50)


def test_glance_cap_enforced_at_downscale():
    stim = _gray(200, 100)
    cap = stim.complexity_bits - 1
    with pytest.raises(GlanceCapExceeded):
        downscale(stim, glance_cap_bits=cap)
    # exactly at the cap is allowed
    assert downscale(stim, glance_cap_bits=stim.complexity_bits).width == 75


def test_glance_cap_default_is_576_megabytes():
    assert GLANCE_CAP_BITS == 576 * 10**6 * 8


@settings(max_examples=25)
@given(
    st.integers(min_value=76, max_value=400),
    st.integers(min_value=51, max_value=300),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_downscale_properties(width, height, seed):
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(height, width), dtype=np.uint8)
    small = downscale(Stimulus.from_gray(pixels))
    assert 1 <= small.width <= MAX_WIDTH
    assert 1 <= small.height <= MAX_HEIGHT
    assert downscale(small) is small
    # global mean survives averaging to within box-size imbalance + rounding
    assert abs(float(pixels.mean()) - float(small.to_array().mean())) <= 3.0


def test_load_p2_ascii(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_text("P2\n# comment line\n3 2\n255\n0 10 20\n30 40 50\n")
    stim = load_portable_image(path)
    assert (stim.width, stim.height, stim.channels) == (3, 2, 1)
    assert stim.payload == bytes([0, 10, 20, 30, 40, 50])


def test_load_p5_binary(tmp_path):
    path = tmp_path / "img.pgm"
    path.write_bytes(b"P5\n4 1\n255\n" + bytes([9, 8, 7, 6]))
    stim = load_portable_image(path)
    assert (stim.width, stim.height) == (4, 1)
    assert stim.payload == bytes([9, 8, 7, 6])


def test_load_p6_rgb(tmp_path):
    path = tmp_path / "img.ppm"
    path.write_bytes(b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 255, 0]))
    stim = load_portable_image(path)
    assert stim.channels == 3
    assert stim.to_array()[0, 0, 0] == 255


def test_load_rejects_bad_files(tmp_path):
    bad_magic = tmp_path / "a.img"
    bad_magic.write_bytes(b"P9\n1 1\n255\n\x00")
    with pytest.raises(ValueError, match="magic"):
        load_portable_image(bad_magic)
    short = tmp_path / "b.pgm"
    short.write_bytes(b"P5\n4 4\n255\n\x00\x00")
    with pytest.raises(ValueError, match="truncated"):
        load_portable_image(short)
    deep = tmp_path / "c.pgm"
    deep.write_bytes(b"P5\n1 1\n65535\n\x00\x00")
    with pytest.raises(ValueError, match="8-bit"):
        load_portable_image(deep)
