"""Rectangular grid geometry shared by the global and fiberwise renderers.

A window is (re_min, re_max, im_min, im_max); a resolution is (nx, ny).
Arrays are indexed [iy, ix] with iy increasing along the imaginary axis.
Cell centers sit at half-steps, so no center lies on the window edge.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


def check_window(window):
    re_min, re_max, im_min, im_max = map(float, window)
    if not (re_max > re_min and im_max > im_min):
        raise ConfigError("window must have positive extent")
    return (re_min, re_max, im_min, im_max)


def check_resolution(resolution, cap: int = 16384):
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    nx, ny = int(resolution[0]), int(resolution[1])
    if nx < 2 or ny < 2:
        raise ConfigError("resolution must be at least 2 per axis")
    if nx > cap or ny > cap:
        raise ConfigError(f"resolution exceeds cap {cap} per axis")
    return nx, ny


def cell_size(window, resolution):
    re_min, re_max, im_min, im_max = window
    nx, ny = resolution
    return (re_max - re_min) / nx, (im_max - im_min) / ny


def cell_centers(window, resolution) -> np.ndarray:
    """Complex array of shape (ny, nx) holding the cell centers."""
    re_min, re_max, im_min, im_max = window
    nx, ny = resolution
    xs = re_min + (np.arange(nx) + 0.5) / nx * (re_max - re_min)
    ys = im_min + (np.arange(ny) + 0.5) / ny * (im_max - im_min)
    return xs[None, :] + 1j * ys[:, None]


def points_to_cells(window, resolution, pts):
    """Map complex points to (iy, ix) cell indices; -1 marks out-of-window."""
    re_min, re_max, im_min, im_max = window
    nx, ny = resolution
    pts = np.asarray(pts, dtype=np.complex128).ravel()
    ix = np.floor((pts.real - re_min) / (re_max - re_min) * nx).astype(np.int64)
    iy = np.floor((pts.imag - im_min) / (im_max - im_min) * ny).astype(np.int64)
    bad = (ix < 0) | (ix >= nx) | (iy < 0) | (iy >= ny)
    ix[bad] = -1
    iy[bad] = -1
    return iy, ix


def erode(mask: np.ndarray) -> np.ndarray:
    """One-cell 4-neighbour erosion with zero padding."""
    out = mask.copy()
    out[1:, :] &= mask[:-1, :]
    out[:-1, :] &= mask[1:, :]
    out[:, 1:] &= mask[:, :-1]
    out[:, :-1] &= mask[:, 1:]
    out[0, :] = False
    out[-1, :] = False
    out[:, 0] = False
    out[:, -1] = False
    return out


def dilate(mask: np.ndarray, steps: int = 1) -> np.ndarray:
    out = mask.copy()
    for _ in range(steps):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


def adjacent_to(mask: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Cells of mask with a 4-neighbour in other."""
    near = np.zeros_like(other)
    near[1:, :] |= other[:-1, :]
    near[:-1, :] |= other[1:, :]
    near[:, 1:] |= other[:, :-1]
    near[:, :-1] |= other[:, 1:]
    return mask & near


def adjacent8_to(mask: np.ndarray, other: np.ndarray) -> np.ndarray:
    """Cells of mask with an 8-neighbour in other.  The 8-boundary of a
    digital region stays 4-connected along curves, unlike the 4-boundary."""
    near = np.zeros_like(other)
    near[1:, :] |= other[:-1, :]
    near[:-1, :] |= other[1:, :]
    near[:, 1:] |= other[:, :-1]
    near[:, :-1] |= other[:, 1:]
    near[1:, 1:] |= other[:-1, :-1]
    near[1:, :-1] |= other[:-1, 1:]
    near[:-1, 1:] |= other[1:, :-1]
    near[:-1, :-1] |= other[1:, 1:]
    return mask & near


def closing(mask: np.ndarray) -> np.ndarray:
    """Morphological closing (dilate then erode), never losing original
    cells: heals one-cell channels and checkerboard blocks."""
    return erode(dilate(mask, 1)) | mask


def touches_edge(mask: np.ndarray) -> bool:
    return bool(mask[0, :].any() or mask[-1, :].any()
                or mask[:, 0].any() or mask[:, -1].any())
