"""Figure output: raw netpbm images plus matplotlib report figures.

The netpbm files are the canonical machine-checkable artifacts (binary P5/P6,
maxval 255, row-major with image row r holding grid cells r*n..r*n+n-1); the
PNG figures carry the same content with axes and colorbars for human eyes.
Everything here is deterministic: the label palette steps the hue by the
golden-ratio conjugate at fixed saturation/value, and PNG metadata is pinned.
"""

from __future__ import annotations

import colorsys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

from .errors import InvalidArgumentError
from .model_problems import Grid

GOLDEN_CONJUGATE = 0.6180339887498949
PALETTE_SATURATION = 0.65
PALETTE_VALUE = 0.95
_PNG_METADATA = {"Software": "dpp-ipa"}
_DPI = 150


def write_pgm(path, image: np.ndarray) -> None:
    """Binary P5 grayscale image, maxval 255."""
    image = np.asarray(image)
    if image.ndim != 2 or image.dtype != np.uint8:
        raise InvalidArgumentError("PGM wants a 2D uint8 array")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def write_ppm(path, image: np.ndarray) -> None:
    """Binary P6 color image, maxval 255."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise InvalidArgumentError("PPM wants an (H, W, 3) uint8 array")
    height, width = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def gray_scale(values: np.ndarray) -> np.ndarray:
    """Linear min-max map to uint8; a constant field maps to mid-gray.

    Fields constant up to 1e-12 relative count as constant, so roundoff noise
    on an analytically flat field is not amplified to full contrast.
    """
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 1e-12 * max(abs(lo), abs(hi), 1e-300):
        return np.full(values.shape, 128, dtype=np.uint8)
    scaled = np.rint((values - lo) / (hi - lo) * 255.0)
    return np.clip(scaled, 0, 255).astype(np.uint8)


def label_palette(k: int) -> np.ndarray:
    """(k, 3) uint8 palette; distinct colors, never black.

    Hue steps by the golden-ratio conjugate at fixed saturation/value; in the
    rare event two hues quantize to the same 8-bit triple, the value channel
    is nudged down until the color is unique.
    """
    if k < 1:
        raise InvalidArgumentError("palette needs k >= 1")
    palette = np.empty((k, 3), dtype=np.uint8)
    used = set()
    for i in range(k):
        hue = (i * GOLDEN_CONJUGATE) % 1.0
        value = PALETTE_VALUE
        while True:
            rgb = tuple(
                int(round(c * 255))
                for c in colorsys.hsv_to_rgb(hue, PALETTE_SATURATION, value)
            )
            if rgb not in used and rgb != (0, 0, 0):
                break
            value -= 1.0 / 255.0
        used.add(rgb)
        palette[i] = rgb
    return palette


def field_image(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Grayscale (n, n) image of a per-cell field; image row r = grid row r."""
    if np.asarray(values).shape != (grid.size,):
        raise InvalidArgumentError("field length must match the grid")
    return gray_scale(np.asarray(values, dtype=float).reshape(grid.n, grid.n))


def partition_image(labels: np.ndarray, grid: Grid, palette: np.ndarray) -> np.ndarray:
    """(n, n, 3) image coloring each cell by its region."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (grid.size,):
        raise InvalidArgumentError("labels length must match the grid")
    return palette[labels].reshape(grid.n, grid.n, 3)


def stamp_points(image: np.ndarray, points: np.ndarray, grid: Grid) -> np.ndarray:
    """Overlay black 3x3 dots at the given flat cell indices (clipped at edges)."""
    out = image.copy()
    n = grid.n
    for flat in np.asarray(points):
        r, c = divmod(int(flat), n)
        out[max(r - 1, 0) : min(r + 2, n), max(c - 1, 0) : min(c + 2, n)] = 0
    return out


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_PNG_METADATA)
    plt.close(fig)


def density_figure(rho: np.ndarray, grid: Grid, path, title: str = "density") -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(np.asarray(rho, dtype=float).reshape(grid.n, grid.n))
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    _save(fig, path)


def partition_figure(
    labels: np.ndarray,
    grid: Grid,
    palette: np.ndarray,
    path,
    title: str = "partition",
    points: np.ndarray | None = None,
) -> None:
    k = palette.shape[0]
    cmap = ListedColormap(palette / 255.0)
    norm = BoundaryNorm(np.arange(k + 1) - 0.5, k)
    fig, ax = plt.subplots(figsize=(4.6, 4.6))
    ax.imshow(np.asarray(labels).reshape(grid.n, grid.n), cmap=cmap, norm=norm)
    if points is not None:
        rows, cols = np.divmod(np.asarray(points), grid.n)
        ax.scatter(cols, rows, s=18, c="black", marker="o")
    ax.set_title(title)
    ax.set_xticks([])
    ax.set_yticks([])
    _save(fig, path)
