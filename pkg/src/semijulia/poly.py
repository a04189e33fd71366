"""Complex polynomial arithmetic.

Polynomials are stored dense, constant term first.  Everything here is pure
and immutable, so values can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegreeCapError, EvalOverflowError, NumericError

DEGREE_CAP = 4096
LEAD_MIN = 1e-300

# Residual tolerance for the all-roots solver: |p(r)| < ROOT_TOL * scale.
ROOT_TOL = 1e-9


def _trim(coeffs):
    cs = [complex(c) for c in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return tuple(cs)


@dataclass(frozen=True)
class Polynomial:
    """Dense complex polynomial c0 + c1 z + ... + cd z^d with d >= 1."""

    coeffs: tuple

    def __post_init__(self):
        cs = _trim(self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) < 2:
            raise ConfigError("polynomial must have degree >= 1")
        if abs(cs[-1]) <= LEAD_MIN:
            raise ConfigError("leading coefficient too small (|c_d| <= 1e-300)")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        return self.eval(z)

    def eval(self, z: complex) -> complex:
        """Horner evaluation.  Raises EvalOverflowError instead of returning
        a non-finite value, so callers can treat overflow as escape."""
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        if not (math.isfinite(acc.real) and math.isfinite(acc.imag)):
            raise EvalOverflowError(f"non-finite value at z={z!r}")
        return acc

    def eval_array(self, z: np.ndarray) -> np.ndarray:
        """Vectorised Horner; non-finite entries are returned as-is (callers
        prune by modulus before they can overflow)."""
        acc = np.zeros_like(z, dtype=np.complex128)
        for c in reversed(self.coeffs):
            acc *= z
            acc += c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            raise ConfigError("cannot differentiate a constant")
        cs = [i * c for i, c in enumerate(self.coeffs)][1:]
        if all(c == 0 for c in cs):
            # derivative of degree-1 with zero slope cannot happen (lead != 0)
            raise ConfigError("zero derivative")
        return Polynomial(tuple(cs))

    def compose(self, inner: "Polynomial") -> "Polynomial":
        """self(inner(z)), expanded.  Degrees multiply."""
        out_deg = self.degree * inner.degree
        if out_deg > DEGREE_CAP:
            raise DegreeCapError(
                f"composition degree {out_deg} exceeds cap {DEGREE_CAP}"
            )
        inner_c = np.asarray(inner.coeffs, dtype=np.complex128)
        acc = np.array([self.coeffs[-1]], dtype=np.complex128)
        for c in reversed(self.coeffs[:-1]):
            acc = np.polynomial.polynomial.polymul(acc, inner_c)
            acc[0] += c
        return Polynomial(tuple(acc))

    def scale(self) -> float:
        """Magnitude scale of the coefficients (for residual tolerances)."""
        return max(abs(c) for c in self.coeffs)

    def __repr__(self):
        return f"Polynomial({format_poly(self)!r})"


@dataclass(frozen=True)
class CriticalData:
    """Critical points of a degree >= 2 polynomial and their finite images."""

    critical_points: tuple
    critical_values_finite: tuple


def parse_complex(text: str) -> complex:
    """Parse 'a+bi' (also plain 'a' or 'bi') into a complex number."""
    t = text.strip().replace(" ", "")
    if not t:
        raise ConfigError("empty complex literal")
    try:
        return complex(t.replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"bad complex literal {text!r}") from exc


def format_complex(z: complex) -> str:
    """Render a complex number as 'a+bi' with 17 significant digits, so the
    text form round-trips exactly."""
    re = format(z.real, ".17g")
    im = format(z.imag, ".17g")
    if z.imag < 0 or (z.imag == 0 and math.copysign(1.0, z.imag) < 0):
        return f"{re}{im}i"
    return f"{re}+{im}i"


def parse_poly(text: str) -> Polynomial:
    """Parse the plain-text form 'c0 c1 ... cd' of complex literals."""
    parts = text.split()
    if not parts:
        raise ConfigError("empty polynomial text")
    return Polynomial(tuple(parse_complex(p) for p in parts))


def format_poly(p: Polynomial) -> str:
    return " ".join(format_complex(c) for c in p.coeffs)


def _aberth_batch(coeff_rows: np.ndarray, max_iter: int = 160, seed: int = 0):
    """All roots of a batch of same-degree polynomials (rows of coefficients,
    constant term first) by simultaneous Newton iteration with the mutual
    repulsion correction.  Returns an (m, d) array of roots."""
    rows = np.atleast_2d(np.asarray(coeff_rows, dtype=np.complex128))
    m, n = rows.shape
    d = n - 1
    if d < 1:
        raise ConfigError("degree must be >= 1 for root finding")
    lead = rows[:, -1]
    if np.any(np.abs(lead) <= LEAD_MIN):
        raise ConfigError("leading coefficient vanishes in root batch")
    monic = rows / lead[:, None]

    if d == 1:
        return (-monic[:, 0])[:, None]

    deriv = monic[:, 1:] * np.arange(1, n)
    diag = np.arange(d)

    # Cauchy-style radius per row; initial guesses on an irregular circle
    # around the root barycenter.
    radius = 1.0 + np.max(np.abs(monic[:, :-1]), axis=1)
    angles = 2.0 * np.pi * (np.arange(d) + 0.35) / d + 0.17
    center = -monic[:, -2][:, None] / d
    z = center + radius[:, None] * np.exp(1j * angles[None, :])

    scale = np.max(np.abs(rows), axis=1)
    rng = np.random.default_rng(seed ^ 0x5EED)

    for _attempt in range(4):
        for _ in range(max_iter):
            pv = np.zeros_like(z)
            for c in monic[:, ::-1].T:
                pv = pv * z + c[:, None]
            dv = np.zeros_like(z)
            for c in deriv[:, ::-1].T:
                dv = dv * z + c[:, None]
            dv = np.where(dv == 0, 1e-300, dv)
            w = pv / dv
            diff = z[:, :, None] - z[:, None, :]
            diff = np.where(diff == 0, 1e-300, diff)
            diff[:, diag, diag] = np.inf   # self-term contributes nothing
            rep = np.sum(1.0 / diff, axis=2)
            denom = 1.0 - w * rep
            denom = np.where(denom == 0, 1e-300, denom)
            corr = w / denom
            z = z - corr
            if np.max(np.abs(corr)) < 1e-14 * (1.0 + np.max(np.abs(z))):
                break

        residual = _poly_residual(rows, z)
        bound = ROOT_TOL * scale[:, None] * np.maximum(1.0, np.abs(z)) ** d
        if np.all(residual <= bound):
            return z
        # perturb the failing rows and retry
        bad = np.any(residual > bound, axis=1)
        nbad = int(bad.sum())
        z[bad] += 0.05 * radius[bad][:, None] * (
            rng.standard_normal((nbad, d)) + 1j * rng.standard_normal((nbad, d))
        )

    raise NumericError("root finder did not converge within the retry budget")


def _poly_residual(rows: np.ndarray, z: np.ndarray) -> np.ndarray:
    pv = np.zeros_like(z)
    for c in rows[:, ::-1].T:
        pv = pv * z + c[:, None]
    return np.abs(pv)


def roots(p: Polynomial) -> list:
    """All degree-many roots of p, with multiplicity."""
    return list(_aberth_batch(np.asarray(p.coeffs))[0])


def roots_batch(p: Polynomial, targets: np.ndarray) -> np.ndarray:
    """Solutions z of p(z) = w for every w in targets; shape (len(targets), d).

    Only the constant term varies across the batch, which keeps the
    simultaneous iteration fully vectorised."""
    targets = np.asarray(targets, dtype=np.complex128).ravel()
    rows = np.tile(np.asarray(p.coeffs, dtype=np.complex128), (targets.size, 1))
    rows[:, 0] -= targets
    return _aberth_batch(rows)


def critical_data(p: Polynomial) -> CriticalData:
    """Roots of p' and their images under p (infinity excluded)."""
    if p.degree < 2:
        raise ConfigError("critical data needs degree >= 2")
    pts = roots(p.derivative())
    vals = tuple(p.eval(z) for z in pts)
    return CriticalData(tuple(pts), vals)


def escape_radius(gens) -> float:
    """A radius R with |h(z)| >= 2|z| for every generator h on |z| = R.

    Computed from the coefficients, then validated on 4096 sampled boundary
    points; on failure R doubles, at most 60 times.  Beyond R escape is
    permanent, which is what makes word-tree pruning sound."""
    gens = list(gens)
    if not gens:
        raise ConfigError("empty generator list")
    r0 = 1.0
    for h in gens:
        if h.degree < 2:
            raise ConfigError("escape radius needs all degrees >= 2")
        cd = abs(h.coeffs[-1])
        tail = sum(abs(c) for c in h.coeffs[:-1]) / cd
        cand = max(1.0, 2.0 + tail) * cd ** (-1.0 / (h.degree - 1))
        r0 = max(r0, cand)

    theta = 2.0 * np.pi * (np.arange(4096) + 0.5) / 4096
    ring = np.exp(1j * theta)
    r = r0
    for _ in range(60):
        z = r * ring
        ok = True
        for h in gens:
            if np.min(np.abs(h.eval_array(z)) - 2.0 * np.abs(z)) < 0:
                ok = False
                break
        if ok:
            return float(r)
        r *= 2.0
    raise ConfigError("no validated escape radius after 60 doublings")
