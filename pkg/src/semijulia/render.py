"""Image emission: PPM always (no dependencies), PNG when Pillow is there.

Rows are written top-down (max imaginary part first).  The palette is fixed
and versioned so reports can state exactly how an image was colored.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .fiber import FiberGrid
from .julia import BOUNDED_ALL, ESCAPED_ALL, MIXED, UNDECIDED, GridRegion

PALETTE_VERSION = 1

_BLACK = (0, 0, 0)
_RED = (220, 40, 40)
_DEEP_RED = (130, 0, 0)
_GRAY = (128, 128, 128)


def write_ppm(path, rgb: np.ndarray):
    """Binary P6 with the canonical header; rgb is (ny, nx, 3) uint8 with
    row 0 at the bottom of the complex window (flipped on write)."""
    ny, nx, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{nx} {ny}\n255\n".encode())
        f.write(rgb[::-1].tobytes())


def write_png(path, rgb: np.ndarray):
    try:
        from PIL import Image
    except ImportError as exc:
        raise ConfigError("PNG output needs Pillow (pip install semijulia[png])") from exc
    Image.fromarray(rgb[::-1]).save(path)


def region_rgb(region: GridRegion) -> np.ndarray:
    """Label palette: bounded black, escaped white shaded by first escape
    level, mixed red, undecided gray; refined Julia cells deep red on top."""
    lab = region.labels
    ny, nx = lab.shape
    rgb = np.zeros((ny, nx, 3), dtype=np.uint8)
    rgb[lab == MIXED] = _RED
    rgb[lab == UNDECIDED] = _GRAY
    esc = lab == ESCAPED_ALL
    if esc.any():
        lev = region.escape_level.astype(float)
        top = max(1.0, float(lev[esc].max()))
        shade = (255.0 - 135.0 * np.clip((lev - 1.0) / top, 0.0, 1.0)).astype(np.uint8)
        for c in range(3):
            rgb[..., c][esc] = shade[esc]
    if region.julia_cells is not None:
        rgb[region.julia_cells] = _DEEP_RED
    return rgb


def fiber_rgb(fg: FiberGrid) -> np.ndarray:
    """Escape-time shading; the bounded set stays black."""
    it = fg.escape_iteration
    ny, nx = it.shape
    rgb = np.zeros((ny, nx, 3), dtype=np.uint8)
    esc = it > 0
    if esc.any():
        t = np.zeros_like(it, dtype=float)
        t[esc] = np.log1p(it[esc]) / np.log1p(max(1, int(it.max())))
        r = (90 + 165 * (1 - t)).astype(np.uint8)
        g = (110 + 145 * (1 - t)).astype(np.uint8)
        b = (255 * np.ones_like(t)).astype(np.uint8)
        rgb[..., 0][esc] = r[esc]
        rgb[..., 1][esc] = g[esc]
        rgb[..., 2][esc] = b[esc]
    return rgb
