"""Finitely generated polynomial semigroups and postcritical certificates.

The planar postcritical set is explored as an orbit tree over words in the
generators.  Escape beyond the validated radius is a permanent certificate of
unboundedness; boundedness is certified either by an exactly stabilised
finite orbit or by a sampled forward-invariant region that contains every
finite critical value.  When neither certificate appears within the depth
and point budgets the honest answer is Undecided.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from . import poly as P
from .errors import ConfigError, NumericError
from .regions import BallUnion, Disk, RegionUnion, region_from_json

CONFIG_SCHEMA = "sjg-config/1"

DEDUP_CELL = 1e-6          # hash-grid cell for orbit deduplication
STABLE_TOL = 1e-9          # residual for the exact-stabilisation certificate
WITNESS_MARGIN = 1e-9      # minimum sampled inset for invariant witnesses
BOUNDARY_SAMPLES = 1024
INTERIOR_GRID = 32


@dataclass(frozen=True)
class GeneratorSet:
    """Finite family of degree >= 2 polynomials with a validated common
    escape radius."""

    gens: tuple
    escape_radius: float
    labels: tuple

    def __post_init__(self):
        for g in self.gens:
            if g.degree < 2:
                raise ConfigError("all generators must have degree >= 2")
        if len(self.labels) != len(self.gens):
            raise ConfigError("labels/generators length mismatch")

    def __len__(self):
        return len(self.gens)

    def degrees(self):
        return [g.degree for g in self.gens]

    def critical_values(self) -> np.ndarray:
        vals = []
        for g in self.gens:
            vals.extend(P.critical_data(g).critical_values_finite)
        return np.asarray(vals, dtype=np.complex128)


def make_generator_set(gens, labels=None) -> GeneratorSet:
    gens = tuple(gens)
    if not gens:
        raise ConfigError("generator set must be nonempty")
    if labels is None:
        labels = tuple(f"g{i}" for i in range(len(gens)))
    radius = P.escape_radius(gens)
    return GeneratorSet(gens, radius, tuple(labels))


def load_generator_config(source):
    """Load a generator config (path, JSON text, or dict).

    Returns (GeneratorSet, weights-or-None)."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text() if Path(str(source)).exists() else str(source)
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"generator config is not valid JSON: {exc}") from exc
    else:
        obj = source
    if obj.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"config field 'schema' must be {CONFIG_SCHEMA!r}")
    entries = obj.get("generators")
    if not entries:
        raise ConfigError("config field 'generators' missing or empty")
    gens, labels = [], []
    for i, e in enumerate(entries):
        if "coeffs" not in e:
            raise ConfigError(f"generator {i}: field 'coeffs' missing")
        gens.append(P.parse_poly(e["coeffs"]))
        labels.append(e.get("label", f"g{i}"))
    weights = obj.get("weights")
    if weights is not None:
        if len(weights) != len(gens):
            raise ConfigError("config field 'weights' length mismatch")
        weights = [float(w) for w in weights]
    return make_generator_set(gens, labels), weights


def generator_config_json(gs: GeneratorSet, weights=None) -> dict:
    out = {
        "schema": CONFIG_SCHEMA,
        "generators": [
            {"coeffs": P.format_poly(g), "label": lab}
            for g, lab in zip(gs.gens, gs.labels)
        ],
    }
    if weights is not None:
        out["weights"] = list(weights)
    return out


# ---------------------------------------------------------------------------
# postcritical orbit exploration


BOUNDED = "BoundedCertified"
UNBOUNDED = "UnboundedCertified"
UNDECIDED = "Undecided"


@dataclass
class PostcriticalReport:
    status: str
    witness: object            # region, dict (finite orbit / escape), or None
    explored_points: np.ndarray
    depth: int
    truncated: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def point_count(self):
        return int(self.explored_points.size)

    def to_json(self) -> dict:
        if self.witness is None:
            wit = None
        elif isinstance(self.witness, dict):
            wit = self.witness
        else:
            wit = self.witness.to_json()
        return {
            "status": self.status,
            "witness": wit,
            "depth": self.depth,
            "points": self.point_count,
            "truncated": self.truncated,
            "notes": list(self.notes),
        }


class _OrbitTree:
    """Deduplicated orbit points with parent links for word reconstruction."""

    def __init__(self):
        self.points = []       # complex
        self.parent = []       # index of parent point, -1 for roots
        self.letter = []       # generator index applied to the parent
        self._grid = {}

    def _key(self, z):
        return (round(z.real / DEDUP_CELL), round(z.imag / DEDUP_CELL))

    def add(self, z, parent, letter):
        """Insert if no point shares the hash cell; returns (index, new)."""
        k = self._key(z)
        hit = self._grid.get(k)
        if hit is not None:
            return hit, False
        idx = len(self.points)
        self.points.append(z)
        self.parent.append(parent)
        self.letter.append(letter)
        self._grid[k] = idx
        return idx, True

    def word_of(self, idx):
        """Letters applied to the root critical value, outermost last."""
        letters = []
        while self.parent[idx] >= 0:
            letters.append(self.letter[idx])
            idx = self.parent[idx]
        return list(reversed(letters)), self.points[idx]

    def array(self):
        return np.asarray(self.points, dtype=np.complex128)


@dataclass
class _Exploration:
    tree: _OrbitTree
    escape: dict | None
    level: int
    stabilized_at: int | None
    truncated: bool


def _explore_orbit(gs: GeneratorSet, depth: int, point_cap: int) -> _Exploration:
    R = gs.escape_radius
    tree = _OrbitTree()
    frontier = []
    for v in gs.critical_values():
        z = complex(v)
        if abs(z) > R:
            tree.add(z, -1, -1)
            esc = {"type": "escape", "word": [], "value": [z.real, z.imag],
                   "modulus": abs(z)}
            return _Exploration(tree, esc, 0, None, False)
        idx, new = tree.add(z, -1, -1)
        if new:
            frontier.append(idx)

    truncated = False
    stabilized_at = None
    level = 0
    for level in range(1, depth + 1):
        if not frontier:
            stabilized_at = level - 1
            break
        next_frontier = []
        for idx in frontier:
            z = tree.points[idx]
            for gi, h in enumerate(gs.gens):
                w = h.eval(z)
                if abs(w) > R:
                    word, root = tree.word_of(idx)
                    word.append(gi)
                    esc = {"type": "escape", "word": word,
                           "value": [root.real, root.imag],
                           "modulus": abs(w)}
                    return _Exploration(tree, esc, level, None, False)
                widx, new = tree.add(w, idx, gi)
                if new:
                    next_frontier.append(widx)
        frontier = next_frontier
        if len(tree.points) > point_cap:
            truncated = True
            break
    else:
        if not frontier:
            stabilized_at = depth
    return _Exploration(tree, None, level, stabilized_at, truncated)


def postcritical_orbit(gs: GeneratorSet, depth: int, point_cap: int = 200_000,
                       candidates=None) -> PostcriticalReport:
    """Breadth-first expansion of the finite critical values under all words
    up to the given depth, with escape pruning and certificate search."""
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    ex = _explore_orbit(gs, depth, point_cap)
    cloud = ex.tree.array()
    if ex.escape is not None:
        return PostcriticalReport(UNBOUNDED, ex.escape, cloud, ex.level)

    notes = []
    if ex.truncated:
        return PostcriticalReport(UNDECIDED, None, cloud, ex.level, truncated=True,
                                  notes=("point cap exceeded",))

    if ex.stabilized_at is not None:
        residual = _stabilization_residual(gs, cloud)
        if residual <= STABLE_TOL * max(1.0, float(np.max(np.abs(cloud)))):
            wit = {"type": "finite_orbit",
                   "points": [[z.real, z.imag] for z in cloud],
                   "max_residual": residual}
            return PostcriticalReport(BOUNDED, wit, cloud, ex.stabilized_at,
                                      notes=("orbit stabilised exactly",))
        notes.append(f"orbit merged on the dedup grid but residual {residual:.2e} "
                     "is above the exact-stabilisation tolerance")

    region = find_bounded_witness(gs, cloud, candidates=candidates)
    if region is not None:
        return PostcriticalReport(BOUNDED, region, cloud, depth, notes=tuple(notes))

    return PostcriticalReport(UNDECIDED, None, cloud, depth, notes=tuple(notes))


def _stabilization_residual(gs: GeneratorSet, cloud: np.ndarray) -> float:
    """Max distance from any one-step image of the cloud back to the cloud."""
    tree = cKDTree(np.column_stack([cloud.real, cloud.imag]))
    worst = 0.0
    for h in gs.gens:
        img = h.eval_array(cloud)
        d, _ = tree.query(np.column_stack([img.real, img.imag]))
        worst = max(worst, float(d.max()))
    return worst


# ---------------------------------------------------------------------------
# invariant witnesses and traps


def verify_invariant_region(gs: GeneratorSet, region,
                            n_boundary: int = BOUNDARY_SAMPLES,
                            interior: int = INTERIOR_GRID,
                            required_points=None):
    """Sampled check that h(closure of region) lands inside the region for
    every generator.  Returns (ok, margin); margin is the smallest inset of
    any image sample (or of a required point), negative when the check fails.

    Sampling-based: tangencies between samples can go unseen, which is why
    results are certificates at sampling resolution, not proofs."""
    pts = np.concatenate([region.boundary_points(n_boundary),
                          region.interior_points(interior)])
    margin = math.inf
    for h in gs.gens:
        img = h.eval_array(pts)
        margin = min(margin, float(np.min(region.inset(img))))
        if margin < WITNESS_MARGIN:
            return False, margin
    if required_points is not None and len(required_points):
        inc = float(np.min(region.inset(np.asarray(required_points))))
        margin = min(margin, inc)
    return margin >= WITNESS_MARGIN, margin


def find_invariant_disk(gs: GeneratorSet, candidates,
                        require_critical_values: bool = False):
    """First candidate disk mapped inside itself by every generator.

    Containment of the critical values is optional: the useful trap regions
    for word pruning only need forward invariance."""
    required = gs.critical_values() if require_critical_values else None
    for d in candidates:
        ok, _ = verify_invariant_region(gs, d, required_points=required)
        if ok:
            return d
    return None


def default_disk_candidates(gs: GeneratorSet, cloud=None):
    """Disk ladder around natural centers, plus disks whose boundary passes
    through a non-repelling fixed point (the tangent disks that certify
    orbits creeping into a neutral point)."""
    cvs = gs.critical_values()
    centers = [0j]
    if cvs.size:
        centers.append(complex(np.mean(cvs)))
    if cloud is not None and len(cloud):
        centers.append(complex(np.mean(cloud)))
    radii = [0.05 * 2.0 ** k for k in range(8)]
    cands = []
    for c in centers:
        for r in radii:
            cands.append(Disk(c, r))
    for fix, mult in _fixed_points(gs):
        if abs(mult) <= 1.02:
            for c in centers:
                r = abs(fix - c)
                if r > 0:
                    cands.append(Disk(c, r))
    return cands


def _fixed_points(gs: GeneratorSet):
    out = []
    for h in gs.gens:
        shifted = list(h.coeffs)
        shifted[1] -= 1.0
        try:
            fixes = P.roots(P.Polynomial(tuple(shifted)))
        except NumericError:
            continue
        dh = h.derivative()
        for f in fixes:
            out.append((f, dh.eval(f)))
    return out


def find_bounded_witness(gs: GeneratorSet, cloud: np.ndarray, candidates=None):
    """Invariant region containing all finite critical values, or None."""
    cvs = gs.critical_values()
    cands = list(candidates) if candidates is not None else []
    cands += default_disk_candidates(gs, cloud)
    for d in cands:
        ok, _ = verify_invariant_region(gs, d, required_points=cvs)
        if ok:
            return d
    for rho in (1e-3, 4e-3, 1.6e-2, 6.4e-2, 0.256):
        reg = _grow_ball_cover(gs, cloud, rho)
        if reg is not None:
            ok, _ = verify_invariant_region(gs, reg, required_points=cvs)
            if ok:
                return reg
    return None


def find_trap_region(gs: GeneratorSet, depth: int = 24):
    """Forward-invariant open region for pruning bounded word branches, or
    None.  Critical values need not be inside.

    Returns the union of everything that certifies: the largest invariant
    disk around each natural center plus a ball cover of the orbit cloud, so
    orbits settling onto any part of the bounded attractor get absorbed."""
    ex = _explore_orbit(gs, depth, point_cap=50_000)
    cloud = ex.tree.array() if ex.escape is None else np.asarray([], dtype=complex)
    pieces = []
    best_by_center = {}
    for d in default_disk_candidates(gs, cloud):
        key = (round(d.center.real, 12), round(d.center.imag, 12))
        cur = best_by_center.get(key)
        if cur is not None and cur.radius >= d.radius:
            continue
        ok, _ = verify_invariant_region(gs, d)
        if ok:
            best_by_center[key] = d
    pieces.extend(best_by_center.values())
    if cloud.size:
        for rho in (1e-3, 4e-3, 1.6e-2, 6.4e-2, 0.256):
            reg = _grow_ball_cover(gs, cloud, rho)
            if reg is not None:
                ok, _ = verify_invariant_region(gs, reg)
                if ok:
                    pieces.append(reg)
                    break
    if not pieces:
        return None
    if len(pieces) == 1:
        return pieces[0]
    return RegionUnion(pieces)


def _thin_points(cloud: np.ndarray, spacing: float) -> np.ndarray:
    """One representative per spacing-sized hash cell, capped at 4096."""
    kept = []
    seen = set()
    for z in cloud:
        key = (round(z.real / spacing), round(z.imag / spacing))
        if key in seen:
            continue
        seen.add(key)
        kept.append(z)
        if len(kept) >= 4096:
            break
    return np.asarray(kept, dtype=np.complex128)


def _grow_ball_cover(gs: GeneratorSet, cloud: np.ndarray, rho: float,
                     max_rounds: int = 40):
    """Adaptive union-of-balls invariant region seeded on the orbit cloud.

    Each round maps coarse boundary samples of every ball forward and grows
    the receiving ball so the samples fit; a fixpoint is then re-verified at
    full sampling density by the caller."""
    if not cloud.size:
        return None
    centers = _thin_points(cloud, rho / 2.0)
    if centers.size == 0 or centers.size >= 4096:
        return None
    radii = np.full(centers.size, rho)
    cap = max(1.0, 8.0 * rho)
    theta = 2.0 * np.pi * (np.arange(64) + 0.5) / 64
    ring = np.exp(1j * theta)
    for _ in range(max_rounds):
        grown = False
        pts = (centers[:, None] + radii[:, None] * ring[None, :]).ravel()
        for h in gs.gens:
            img = h.eval_array(pts)
            d = np.abs(img[:, None] - centers[None, :])
            nearest = np.argmin(d, axis=1)
            need = d[np.arange(d.shape[0]), nearest]
            for b in range(centers.size):
                req = need[nearest == b]
                if req.size == 0:
                    continue
                want = float(req.max()) * 1.02 + 1e-12
                if want > radii[b]:
                    radii[b] = want
                    grown = True
        if np.any(radii > cap):
            return None
        if not grown:
            return BallUnion(centers, radii)
    return None


# ---------------------------------------------------------------------------
# example generator builders


def realpcb_generator(a: int, b: int, c: float) -> P.Polynomial:
    """The interval family c z^a (1-z)^b; parameters are constrained so the
    critical value inside (0,1) stays at most 1, hence the unit interval maps
    into itself and every finite critical value is real in [0, 1]."""
    if a < 1 or b < 1 or a + b < 2:
        raise ConfigError("need a, b >= 1 and a + b >= 2")
    if c <= 0:
        raise ConfigError("need c > 0")
    peak = c * (a / (a + b)) ** a * (b / (a + b)) ** b
    if peak > 1.0 + 1e-12:
        raise ConfigError(f"parameter constraint violated: c*(a/(a+b))^a*(b/(a+b))^b = {peak:.6g} > 1")
    coeffs = np.zeros(a + b + 1, dtype=np.complex128)
    for k in range(b + 1):
        coeffs[a + k] = c * math.comb(b, k) * (-1.0) ** k
    h = P.Polynomial(tuple(coeffs))
    xs = (np.arange(1024) + 0.5) / 1024
    img = h.eval_array(xs.astype(np.complex128))
    if np.max(np.abs(img.imag)) > 1e-12 or img.real.min() < -1e-9 or img.real.max() > 1.0 + 1e-9:
        raise ConfigError("unit interval is not preserved (unexpected for valid parameters)")
    cvs = np.asarray(P.critical_data(h).critical_values_finite)
    if np.max(np.abs(cvs.imag)) > 1e-6 or cvs.real.min() < -1e-6 or cvs.real.max() > 1.0 + 1e-6:
        raise ConfigError("critical values left [0, 1] (unexpected for valid parameters)")
    return h


def constprop_generator(b: complex, d: int, a: complex) -> P.Polynomial:
    """a (z - b)^d + b, expanded."""
    if d < 2:
        raise ConfigError("need d >= 2")
    if a == 0:
        raise ConfigError("need a != 0")
    coeffs = np.zeros(d + 1, dtype=np.complex128)
    for k in range(d + 1):
        coeffs[k] = a * math.comb(d, k) * (-b) ** (d - k)
    coeffs[0] += b
    return P.Polynomial(tuple(coeffs))


def hyperbolicity_gap(gs: GeneratorSet, pcloud: np.ndarray, jcloud: np.ndarray) -> float:
    """Min distance between the postcritical cloud and the Julia cloud.

    A clearly positive gap is numerical evidence for hyperbolicity, never a
    proof; a near-zero gap is evidence against."""
    pcloud = np.asarray(pcloud, dtype=np.complex128).ravel()
    jcloud = np.asarray(jcloud, dtype=np.complex128).ravel()
    if pcloud.size == 0 or jcloud.size == 0:
        raise ConfigError("both clouds must be nonempty")
    tree = cKDTree(np.column_stack([jcloud.real, jcloud.imag]))
    d, _ = tree.query(np.column_stack([pcloud.real, pcloud.imag]))
    return float(d.min())


def witness_from_json(obj):
    if obj is None:
        return None
    if obj.get("type") in ("finite_orbit", "escape"):
        return obj
    return region_from_json(obj)
