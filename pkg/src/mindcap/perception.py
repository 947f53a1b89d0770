"""Visual processing unit: stimuli are downscaled before the agent sees them.

Recognition works at surprisingly low resolutions, so every image stimulus
is box-filtered down to at most 75x50 pixels, and any single glance larger
than the hard cap is rejected outright.  Non-image observations pass through
unresized but still carry a complexity figure for the perceptual delay.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import GlanceCapExceeded

GLANCE_CAP_BITS = 576 * 10**6 * 8  # 576 megabytes in a single glance
MAX_WIDTH = 75
MAX_HEIGHT = 50


@dataclass(frozen=True)
class Stimulus:
    """One observation: raster image or opaque blob, sized in bits.

    The glance cap is enforced at the downscale chokepoint, not here, so an
    over-cap stimulus can exist just long enough to be rejected.
    """

    width: int
    height: int
    channels: int = 1
    depth: int = 8
    payload: bytes = b""
    kind: str = "image"

    def __post_init__(self) -> None:
        if self.kind not in ("image", "blob"):
            raise ValueError(f"unknown stimulus kind {self.kind!r}")
        if self.width < 1 or self.height < 1 or self.channels < 1 or self.depth < 1:
            raise ValueError("stimulus dimensions must be positive")
        if self.kind == "image":
            if self.depth != 8:
                raise ValueError("image stimuli are 8 bits per channel")
            expected = self.width * self.height * self.channels
            if len(self.payload) != expected:
                raise ValueError(
                    f"payload is {len(self.payload)} bytes, expected {expected}"
                )

    @property
    def complexity_bits(self) -> int:
        return self.width * self.height * self.channels * self.depth

    @classmethod
    def from_text(cls, text: str) -> "Stimulus":
        """Wrap a discrete observation; complexity is its encoded bit length."""
        data = text.encode("utf-8")
        return cls(
            width=max(1, len(data)), height=1, channels=1, depth=8,
            payload=data, kind="blob",
        )

    @classmethod
    def from_gray(cls, pixels: np.ndarray) -> "Stimulus":
        """Build an 8-bit grayscale stimulus from a (height, width) array."""
        arr = np.asarray(pixels)
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array")
        data = np.ascontiguousarray(arr, dtype=np.uint8)
        return cls(width=arr.shape[1], height=arr.shape[0], payload=data.tobytes())

    def to_array(self) -> np.ndarray:
        """Pixels as (height, width, channels) uint8; images only."""
        if self.kind != "image":
            raise ValueError("blob stimuli have no raster form")
        flat = np.frombuffer(self.payload, dtype=np.uint8)
        return flat.reshape(self.height, self.width, self.channels)


def _partition_bounds(in_dim: int, out_dim: int) -> np.ndarray:
    return (np.arange(out_dim + 1) * in_dim) // out_dim


def downscale(
    stimulus: Stimulus,
    max_w: int = MAX_WIDTH,
    max_h: int = MAX_HEIGHT,
    glance_cap_bits: int = GLANCE_CAP_BITS,
) -> Stimulus:
    """Box-filter an image stimulus to fit (max_w, max_h), cap-checking first.

    Blobs and already-fitting images come back as the same object, which
    makes the operation idempotent by construction.
    """
    if stimulus.complexity_bits > glance_cap_bits:
        raise GlanceCapExceeded(
            f"stimulus carries {stimulus.complexity_bits} bits, "
            f"single-glance cap is {glance_cap_bits}"
        )
    if stimulus.kind != "image":
        return stimulus
    if stimulus.width <= max_w and stimulus.height <= max_h:
        return stimulus

    scale = min(max_w / stimulus.width, max_h / stimulus.height)
    out_w = max(1, round(stimulus.width * scale))
    out_h = max(1, round(stimulus.height * scale))

    pixels = stimulus.to_array().astype(np.float64)
    row_bounds = _partition_bounds(stimulus.height, out_h)
    col_bounds = _partition_bounds(stimulus.width, out_w)
    out = np.empty((out_h, out_w, stimulus.channels), dtype=np.float64)
    for r in range(out_h):
        band = pixels[row_bounds[r] : row_bounds[r + 1]]
        for c in range(out_w):
            box = band[:, col_bounds[c] : col_bounds[c + 1]]
            out[r, c] = box.mean(axis=(0, 1))
    quantized = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return Stimulus(
        width=out_w,
        height=out_h,
        channels=stimulus.channels,
        payload=quantized.tobytes(),
    )


def load_portable_image(path: "str | Path") -> Stimulus:
    """Read a P2/P5 graymap or P6 pixmap into a Stimulus (CLI demo path)."""
    raw = Path(path).read_bytes()
    magic, rest = raw.split(None, 1)
    if magic not in (b"P2", b"P5", b"P6"):
        raise ValueError(f"unsupported image magic {magic!r}")

    tokens = []
    pos = 0
    # Header tokens with '#' comment lines; binary formats then carry raster
    # bytes immediately after the single whitespace ending maxval.
    while len(tokens) < 3:
        while pos < len(rest) and rest[pos : pos + 1].isspace():
            pos += 1
        if pos < len(rest) and rest[pos : pos + 1] == b"#":
            while pos < len(rest) and rest[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(rest) and not rest[pos : pos + 1].isspace():
            pos += 1
        tokens.append(rest[start:pos])
    width, height, maxval = (int(t) for t in tokens)
    if not 0 < maxval < 256:
        raise ValueError("only 8-bit images supported")
    pos += 1  # single whitespace after maxval

    channels = 3 if magic == b"P6" else 1
    count = width * height * channels
    if magic == b"P2":
        values = rest[pos:].split()
        if len(values) != count:
            raise ValueError("truncated ASCII raster")
        data = bytes(int(v) for v in values)
    else:
        data = rest[pos : pos + count]
        if len(data) != count:
            raise ValueError("truncated binary raster")
    return Stimulus(width=width, height=height, channels=channels, payload=data)
