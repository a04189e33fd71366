"""Plane regions used as certificates and traps.

Each region supports a signed inset (positive inside, in plane units),
boundary sampling, and interior sampling.  Boundary samples are placed at
half-step offsets so that axis-aligned tangency points are dodged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def inset(self, z):
        return self.radius - np.abs(np.asarray(z) - self.center)

    def contains(self, z):
        return self.inset(z) > 0

    def boundary_points(self, n: int) -> np.ndarray:
        theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        return self.center + self.radius * np.exp(1j * theta)

    def interior_points(self, k: int) -> np.ndarray:
        t = (np.arange(k) + 0.5) / k * 2.0 - 1.0
        xs, ys = np.meshgrid(t, t)
        pts = self.center + self.radius * (xs + 1j * ys).ravel()
        return pts[self.contains(pts)]

    def to_json(self):
        return {"type": "disk", "center": [self.center.real, self.center.imag],
                "radius": self.radius}


@dataclass(frozen=True)
class Rect:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ConfigError("rectangle must have positive extent")

    def inset(self, z):
        z = np.asarray(z)
        return np.minimum.reduce([
            z.real - self.re_min, self.re_max - z.real,
            z.imag - self.im_min, self.im_max - z.imag,
        ])

    def contains(self, z):
        return self.inset(z) > 0

    def boundary_points(self, n: int) -> np.ndarray:
        w = self.re_max - self.re_min
        h = self.im_max - self.im_min
        per = 2.0 * (w + h)
        t = (np.arange(n) + 0.5) / n * per
        pts = np.empty(n, dtype=np.complex128)
        for i, s in enumerate(t):
            if s < w:
                pts[i] = complex(self.re_min + s, self.im_min)
            elif s < w + h:
                pts[i] = complex(self.re_max, self.im_min + (s - w))
            elif s < 2 * w + h:
                pts[i] = complex(self.re_max - (s - w - h), self.im_max)
            else:
                pts[i] = complex(self.re_min, self.im_max - (s - 2 * w - h))
        return pts

    def interior_points(self, k: int) -> np.ndarray:
        xs = self.re_min + (np.arange(k) + 0.5) / k * (self.re_max - self.re_min)
        ys = self.im_min + (np.arange(k) + 0.5) / k * (self.im_max - self.im_min)
        gx, gy = np.meshgrid(xs, ys)
        return (gx + 1j * gy).ravel()

    def to_json(self):
        return {"type": "rect", "re": [self.re_min, self.re_max],
                "im": [self.im_min, self.im_max]}


@dataclass(frozen=True)
class Annulus:
    center: complex
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0 <= self.r_inner < self.r_outer):
            raise ConfigError("annulus needs 0 <= r_inner < r_outer")

    def inset(self, z):
        r = np.abs(np.asarray(z) - self.center)
        return np.minimum(r - self.r_inner, self.r_outer - r)

    def contains(self, z):
        return self.inset(z) > 0

    def boundary_points(self, n: int) -> np.ndarray:
        half = n // 2
        theta = 2.0 * np.pi * (np.arange(half) + 0.5) / half
        inner = self.center + self.r_inner * np.exp(1j * theta)
        outer = self.center + self.r_outer * np.exp(1j * theta)
        return np.concatenate([inner, outer])

    def interior_points(self, k: int) -> np.ndarray:
        t = (np.arange(k) + 0.5) / k * 2.0 - 1.0
        xs, ys = np.meshgrid(t, t)
        pts = self.center + self.r_outer * (xs + 1j * ys).ravel()
        return pts[self.contains(pts)]

    def to_json(self):
        return {"type": "annulus", "center": [self.center.real, self.center.imag],
                "r_inner": self.r_inner, "r_outer": self.r_outer}


class BallUnion:
    """Finite union of disks; the workhorse witness for orbits that settle
    onto cycles rather than into one round trap."""

    def __init__(self, centers, radii):
        self.centers = np.asarray(centers, dtype=np.complex128).ravel()
        self.radii = np.asarray(radii, dtype=float).ravel()
        if self.centers.size != self.radii.size or self.centers.size == 0:
            raise ConfigError("ball union needs matching nonempty centers/radii")

    def __len__(self):
        return self.centers.size

    def inset(self, z):
        z = np.asarray(z, dtype=np.complex128)
        d = np.abs(z.reshape(-1, 1) - self.centers.reshape(1, -1))
        out = np.max(self.radii.reshape(1, -1) - d, axis=1)
        return out.reshape(z.shape) if z.shape else out[0]

    def contains(self, z):
        return self.inset(z) > 0

    def boundary_points(self, n: int) -> np.ndarray:
        per = max(32, n // len(self))
        theta = 2.0 * np.pi * (np.arange(per) + 0.5) / per
        ring = np.exp(1j * theta)
        return (self.centers[:, None] + self.radii[:, None] * ring[None, :]).ravel()

    def interior_points(self, k: int) -> np.ndarray:
        per = max(4, int(np.ceil(k / np.sqrt(len(self)))))
        t = (np.arange(per) + 0.5) / per * 2.0 - 1.0
        xs, ys = np.meshgrid(t, t)
        cell = (xs + 1j * ys).ravel()
        pts = (self.centers[:, None] + self.radii[:, None] * cell[None, :]).ravel()
        return pts[self.contains(pts)]

    def to_json(self):
        return {"type": "ball_union",
                "centers": [[c.real, c.imag] for c in self.centers],
                "radii": [float(r) for r in self.radii]}

    def __repr__(self):
        return f"BallUnion({len(self)} balls, max radius {self.radii.max():.3g})"


class RegionUnion:
    """Union of regions; invariant whenever every member is invariant."""

    def __init__(self, members):
        self.members = list(members)
        if not self.members:
            raise ConfigError("empty region union")

    def inset(self, z):
        return np.maximum.reduce([m.inset(z) for m in self.members])

    def contains(self, z):
        return self.inset(z) > 0

    def boundary_points(self, n: int) -> np.ndarray:
        per = max(64, n // len(self.members))
        return np.concatenate([m.boundary_points(per) for m in self.members])

    def interior_points(self, k: int) -> np.ndarray:
        return np.concatenate([m.interior_points(k) for m in self.members])

    def to_json(self):
        return {"type": "union", "members": [m.to_json() for m in self.members]}

    def __repr__(self):
        return f"RegionUnion({self.members!r})"


def region_from_json(obj):
    kind = obj.get("type")
    if kind == "disk":
        return Disk(complex(*obj["center"]), float(obj["radius"]))
    if kind == "rect":
        return Rect(obj["re"][0], obj["re"][1], obj["im"][0], obj["im"][1])
    if kind == "annulus":
        return Annulus(complex(*obj["center"]), float(obj["r_inner"]), float(obj["r_outer"]))
    if kind == "ball_union":
        return BallUnion([complex(*c) for c in obj["centers"]], obj["radii"])
    if kind == "union":
        return RegionUnion([region_from_json(m) for m in obj["members"]])
    raise ConfigError(f"unknown region type {kind!r}")
