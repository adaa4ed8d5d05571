"""Shared raster grid, deterministic palette, and binary PPM output."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

UNDECIDED = -1
DIVERGED = -2
ESCAPED = 0


@dataclass(frozen=True)
class Raster:
    """Pixel grid of orbit outcomes over a complex-plane viewport.

    codes: UNDECIDED, DIVERGED, or a non-negative attractor/outcome id.
    counts: steps used per pixel.  Row 0 is the top of the viewport.
    """
    width: int
    height: int
    viewport: Tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    codes: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("raster dimensions must be >= 1")

    def undecided_fraction(self) -> float:
        return float(np.mean(self.codes == UNDECIDED))


def pixel_grid(viewport: Tuple[float, float, float, float],
               width: int, height: int) -> np.ndarray:
    """Complex pixel centers, row 0 at ymax (image convention)."""
    xmin, xmax, ymin, ymax = viewport
    xs = xmin + (np.arange(width) + 0.5) * (xmax - xmin) / width
    ys = ymax - (np.arange(height) + 0.5) * (ymax - ymin) / height
    return xs[None, :] + 1j * ys[:, None]

# fixed hues for attractor ids 0..7 (cycled beyond that)
_BASE_COLORS = np.array([
    [66, 135, 245],
    [240, 120, 60],
    [80, 200, 120],
    [200, 80, 180],
    [230, 210, 70],
    [90, 210, 220],
    [160, 100, 60],
    [150, 150, 240],
], dtype=np.int64)


def colorize(raster: Raster) -> np.ndarray:
    """Deterministic RGB image: black undecided, gray-scale diverged by
    count, hue by attractor id shaded by count otherwise."""
    codes, counts = raster.codes, raster.counts
    img = np.zeros((raster.height, raster.width, 3), dtype=np.uint8)
    div = codes == DIVERGED
    if np.any(div):
        shade = (255 * (counts[div] % 64)) // 64
        img[div] = np.stack([shade] * 3, axis=-1).astype(np.uint8)
    conv = codes >= 0
    if np.any(conv):
        base = _BASE_COLORS[codes[conv] % len(_BASE_COLORS)]
        # brightness decays with the step count, integer arithmetic only
        fac = 256 - np.minimum(counts[conv].astype(np.int64) * 4, 192)
        img[conv] = ((base * fac[:, None]) // 256).astype(np.uint8)
    return img


def write_ppm(raster: Raster, path: str) -> None:
    """Binary P6 PPM; bit-exact for identical inputs."""
    img = colorize(raster)
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (raster.width, raster.height))
        fh.write(img.tobytes())
