"""Global semigroup Julia sets on grids and as point clouds.

Two independent approximations are kept deliberately separate so they can
cross-check each other: the word-tree grid classifier (forward dynamics over
all words, with escape and trap pruning) and the inverse-iteration chaos
game (backward dynamics seeded on a repelling fixed point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from . import grid as G
from .errors import (ClassificationError, ConfigError, IndeterminateError,
                     OrderViolationError, SeedPointError)
from .poly import roots, roots_batch
from .semigroup import GeneratorSet, find_trap_region

LABEL_NAMES = ("BOUNDED_ALL", "ESCAPED_ALL", "MIXED", "UNDECIDED")
BOUNDED_ALL, ESCAPED_ALL, MIXED, UNDECIDED = range(4)

FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

LESS, GREATER, INCOMPARABLE, EQUAL = "LESS", "GREATER", "INCOMPARABLE", "EQUAL"


@dataclass
class PointCloud:
    points: np.ndarray
    source: str

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("re,im\n")
            for z in self.points:
                f.write(f"{z.real:.17g},{z.imag:.17g}\n")


@dataclass
class GridRegion:
    window: tuple
    resolution: tuple          # (nx, ny)
    labels: np.ndarray         # int8, shape (ny, nx)
    depth: int
    escape_level: np.ndarray   # first level any branch escaped; 0 = none
    julia_cells: np.ndarray = None   # optional refined Julia mask

    @property
    def cell_size(self):
        return G.cell_size(self.window, self.resolution)

    def mask(self, label: int) -> np.ndarray:
        return self.labels == label

    def boundary_band(self) -> np.ndarray:
        """Non-escaped cells with an ESCAPED_ALL 8-neighbour: the silhouette
        of the escaping region.  For a single generator this is the classic
        escape-grid Julia boundary."""
        esc = self.mask(ESCAPED_ALL)
        return G.adjacent8_to(~esc, esc)

    def julia_mask(self) -> np.ndarray:
        """Julia approximation.

        When a refined mask (rasterised inverse-iteration cloud) is attached
        it wins; otherwise fall back to the escaping-region silhouette plus
        MIXED cells, which is only faithful when the word behaviour is not
        mixed on fat open sets (single generators, Cantor-free inputs)."""
        if self.julia_cells is not None:
            return self.julia_cells
        return self.mask(MIXED) | self.boundary_band()

    def label_histogram(self) -> dict:
        return {name: int(np.count_nonzero(self.labels == i))
                for i, name in enumerate(LABEL_NAMES)}


@dataclass
class ComponentRecord:
    id: int
    cells: np.ndarray          # flat indices into the (ny, nx) grid
    shape: tuple               # (ny, nx)
    bbox: tuple                # (re_min, re_max, im_min, im_max) of cell centers
    order_relations: dict = field(default_factory=dict)
    representative_curve: object = None

    def mask(self) -> np.ndarray:
        m = np.zeros(self.shape[0] * self.shape[1], dtype=bool)
        m[self.cells] = True
        return m.reshape(self.shape)

    def touches_edge(self) -> bool:
        ny, nx = self.shape
        iy, ix = np.unravel_index(self.cells, (ny, nx))
        return bool((iy == 0).any() or (iy == ny - 1).any()
                    or (ix == 0).any() or (ix == nx - 1).any())


# ---------------------------------------------------------------------------
# chaos game (inverse iteration)


def repelling_fixed_point(gs: GeneratorSet):
    """A repelling fixed point of some generator; these lie on the Julia set
    and make sound seeds for inverse iteration."""
    from .poly import Polynomial

    for h in gs.gens:
        shifted = list(h.coeffs)
        shifted[1] -= 1.0
        fixes = roots(Polynomial(tuple(shifted)))
        dh = h.derivative()
        fixes = sorted(fixes, key=lambda z: (round(z.real, 9), round(z.imag, 9)))
        for f in fixes:
            if abs(dh.eval(f)) > 1.0 + 1e-9:
                return f
    raise SeedPointError("no generator has a repelling fixed point")


def chaos_game_julia(gs: GeneratorSet, iterations: int, burn_in: int = 100,
                     seed: int = 0, walkers: int = 512,
                     branch_mode: str = "degree") -> PointCloud:
    """Inverse-iteration sampling of the semigroup Julia set.

    Walkers start on a repelling fixed point, then repeatedly pick a
    generator (by degree weight or uniformly) and one uniformly random root
    of h(w) = z.  The recorded tail approximates the attractor of the
    inverse system; backward invariance keeps every iterate on the Julia
    set, the burn-in just decorrelates the walkers."""
    if burn_in < 100 or iterations <= burn_in:
        raise ConfigError("need iterations > burn_in >= 100")
    if branch_mode not in ("degree", "uniform"):
        raise ConfigError("branch_mode must be 'degree' or 'uniform'")
    degrees = np.asarray(gs.degrees(), dtype=float)
    probs = degrees / degrees.sum() if branch_mode == "degree" \
        else np.full(len(gs), 1.0 / len(gs))

    z0 = repelling_fixed_point(gs)
    steps = int(math.ceil((iterations - burn_in) / walkers))
    rng = np.random.default_rng(seed)
    z = np.full(walkers, z0, dtype=np.complex128)
    recorded = []
    for step in range(burn_in + steps):
        gen_pick = rng.choice(len(gs), size=walkers, p=probs)
        u = rng.random(walkers)
        nz = z.copy()
        for gi, h in enumerate(gs.gens):
            m = gen_pick == gi
            if not m.any():
                continue
            branch = (u[m] * h.degree).astype(np.int64)
            rts = roots_batch(h, z[m])
            nz[m] = rts[np.arange(branch.size), branch]
        z = nz
        if step >= burn_in:
            recorded.append(z.copy())
    pts = np.concatenate(recorded)[: iterations - burn_in]
    return PointCloud(pts, "CHAOS_GAME")


# ---------------------------------------------------------------------------
# word-tree grid classification


def word_tree_classify(gs: GeneratorSet, window, resolution, depth: int,
                       budget: int = 1_000_000, trap="auto",
                       chunk: int = 4_000_000) -> GridRegion:
    """Classify every cell center against all words of length <= depth.

    A branch beyond the escape radius is escaping permanently; a branch
    inside the trap region is bounded permanently.  The tree is walked level
    by level over the whole grid so that numpy does the heavy lifting; cells
    stop expanding as soon as both kinds of evidence are seen (MIXED) or the
    per-cell expansion budget runs out (UNDECIDED)."""
    window = G.check_window(window)
    resolution = G.check_resolution(resolution)
    if depth < 1:
        raise ConfigError("depth must be >= 1")
    if trap == "auto":
        trap = find_trap_region(gs)

    nx, ny = resolution
    centers = G.cell_centers(window, resolution).ravel()
    ncells = centers.size
    R = gs.escape_radius

    any_escape = np.zeros(ncells, dtype=bool)
    any_bounded = np.zeros(ncells, dtype=bool)
    undecided = np.zeros(ncells, dtype=bool)
    expansions = np.zeros(ncells, dtype=np.int64)
    first_escape = np.zeros(ncells, dtype=np.int32)

    live = np.abs(centers) <= R
    any_escape[~live] = True
    if trap is not None:
        trapped0 = np.zeros(ncells, dtype=bool)
        trapped0[live] = trap.contains(centers[live])
        any_bounded[trapped0] = True
        live &= ~trapped0

    cells = np.nonzero(live)[0]
    vals = centers[cells]

    for level in range(1, depth + 1):
        if cells.size == 0:
            break
        next_cells = []
        next_vals = []
        np.add.at(expansions, cells, len(gs))
        for lo in range(0, cells.size, chunk):
            c = cells[lo:lo + chunk]
            v = vals[lo:lo + chunk]
            for h in gs.gens:
                w = h.eval_array(v)
                esc = np.abs(w) > R
                if esc.any():
                    hit = c[esc]
                    fresh = hit[first_escape[hit] == 0]
                    first_escape[fresh] = level
                    any_escape[hit] = True
                if trap is not None:
                    inside = np.zeros(w.shape, dtype=bool)
                    rem = ~esc
                    if rem.any():
                        inside[rem] = trap.contains(w[rem])
                    any_bounded[c[inside]] = True
                    keep = ~(esc | inside)
                else:
                    keep = ~esc
                if keep.any():
                    next_cells.append(c[keep])
                    next_vals.append(w[keep])
        if not next_cells:
            cells = np.empty(0, dtype=np.int64)
            break
        cells = np.concatenate(next_cells)
        vals = np.concatenate(next_vals)

        over = expansions > budget
        resolved = (any_escape & any_bounded) | over
        undecided |= over & ~(any_escape & any_bounded)
        if resolved.any():
            keep = ~resolved[cells]
            cells = cells[keep]
            vals = vals[keep]

    # nodes alive at full depth never escaped: bounded evidence
    if cells.size:
        any_bounded[cells] = True

    labels = np.full(ncells, UNDECIDED, dtype=np.int8)
    labels[any_escape & ~any_bounded] = ESCAPED_ALL
    labels[any_bounded & ~any_escape] = BOUNDED_ALL
    labels[any_escape & any_bounded] = MIXED
    labels[undecided] = UNDECIDED

    return GridRegion(window, resolution, labels.reshape(ny, nx), depth,
                      first_escape.reshape(ny, nx))


def rasterize_cloud(window, resolution, pts, pad: int = 1) -> np.ndarray:
    """Boolean grid of cells hit by the points, dilated pad cells."""
    nx, ny = resolution
    iy, ix = G.points_to_cells(window, resolution, pts)
    keep = iy >= 0
    mask = np.zeros((ny, nx), dtype=bool)
    mask[iy[keep], ix[keep]] = True
    return G.dilate(mask, pad) if pad else mask


def julia_grid(gs: GeneratorSet, window, resolution, depth: int,
               budget: int = 1_000_000, chaos_points: int = 400_000,
               seed: int = 11, trap="auto"):
    """Grid approximation of the semigroup Julia set.

    The word-tree classifier supplies the cell labels (smallest filled-in
    Julia set, basin of infinity, mixed middle); the Julia set itself is
    sampled by inverse iteration and rasterised, because with two or more
    generators the mixed-word region is a fat open set and its cells say
    nothing about where the actual Julia curves sit.  The two views
    cross-check each other: the rasterised cloud must stay inside the
    non-escaped part of the grid.

    Returns (GridRegion with julia_cells attached, PointCloud)."""
    region = word_tree_classify(gs, window, resolution, depth, budget=budget,
                                trap=trap)
    cloud = chaos_game_julia(gs, chaos_points, seed=seed)
    region.julia_cells = rasterize_cloud(region.window, region.resolution,
                                         cloud.points, pad=1)
    return region, cloud


# ---------------------------------------------------------------------------
# components and the surrounding order


def extract_components(region: GridRegion, label, min_cells: int = 1) -> list:
    """4-connected components of the cell set carrying the given label.

    label may be one of the four cell labels or "JULIA" for the Julia
    approximation.  Ids are deterministic in scanline order.  min_cells
    drops fragments below a sampling-noise floor (undersampled pieces of
    curves whose main loops are already present); ids are reassigned
    contiguously after the filter."""
    if label == "JULIA":
        mask = region.julia_mask()
    elif isinstance(label, str):
        if label not in LABEL_NAMES:
            raise ConfigError(f"unknown label {label!r}")
        mask = region.mask(LABEL_NAMES.index(label))
    else:
        mask = region.mask(int(label))
    lab, n = ndimage.label(mask, structure=FOUR_CONN)
    ny, nx = mask.shape
    dx, dy = region.cell_size
    re_min, _, im_min, _ = region.window
    flat_lab = lab.ravel()
    order = np.argsort(flat_lab, kind="stable")
    sorted_lab = flat_lab[order]
    comps = []
    for i in range(1, n + 1):
        lo = np.searchsorted(sorted_lab, i)
        hi = np.searchsorted(sorted_lab, i, side="right")
        if hi - lo < min_cells:
            continue
        flat = np.sort(order[lo:hi])
        iy, ix = np.unravel_index(flat, (ny, nx))
        bbox = (re_min + (ix.min() + 0.5) * dx, re_min + (ix.max() + 0.5) * dx,
                im_min + (iy.min() + 0.5) * dy, im_min + (iy.max() + 0.5) * dy)
        comps.append(ComponentRecord(len(comps), flat, (ny, nx), bbox))
    return comps


def julia_components(region: GridRegion, min_fraction: float = 1e-3) -> list:
    """Julia components with the sampling-noise floor scaled to the mask."""
    total = int(np.count_nonzero(region.julia_mask()))
    floor = max(32, int(total * min_fraction))
    return extract_components(region, "JULIA", min_cells=floor)


def _outside_reach(block_mask: np.ndarray) -> np.ndarray:
    """Complement cells 4-reachable from the window edge around the blocker."""
    comp = ~block_mask
    lab, _ = ndimage.label(comp, structure=FOUR_CONN)
    edge_ids = np.unique(np.concatenate([
        lab[0, :], lab[-1, :], lab[:, 0], lab[:, -1]]))
    edge_ids = edge_ids[edge_ids > 0]
    return np.isin(lab, edge_ids)


def surrounding_compare(a: ComponentRecord, b: ComponentRecord) -> str:
    """Surrounding order verdict for two components of the same grid."""
    if a.shape != b.shape:
        raise ConfigError("components come from different grids")
    if a.id == b.id:
        return EQUAL
    am, bm = a.mask(), b.mask()
    if G.touches_edge(am) or G.touches_edge(bm):
        raise IndeterminateError(
            "component touches the window boundary; enlarge the window")
    if _inside_of(am, bm):
        return LESS
    if _inside_of(bm, am):
        return GREATER
    return INCOMPARABLE


def _inside_of(am: np.ndarray, bm: np.ndarray) -> bool:
    reach = _outside_reach(bm)
    return not reach[am].any()


def compute_order_relations(comps) -> dict:
    """Fill order_relations on every component; returns the verdict matrix
    keyed by (a.id, b.id)."""
    for c in comps:
        if c.touches_edge():
            raise IndeterminateError(
                f"component {c.id} touches the window boundary; enlarge the window")
    matrix = {}
    inside = {}  # inside[(a, b)]: a lies in a bounded complement component of b
    for b in comps:
        reach = _outside_reach(b.mask()).ravel()
        for a in comps:
            if a.id != b.id:
                inside[(a.id, b.id)] = not reach[a.cells].any()
    for a in comps:
        for b in comps:
            if a.id == b.id:
                matrix[(a.id, b.id)] = EQUAL
                continue
            if inside[(a.id, b.id)]:
                verdict = LESS
            elif inside[(b.id, a.id)]:
                verdict = GREATER
            else:
                verdict = INCOMPARABLE
            matrix[(a.id, b.id)] = verdict
            a.order_relations[b.id] = verdict
    return matrix


def identify_extremes(comps) -> tuple:
    """(min_id, max_id) under the surrounding order; raises when the order
    is not total enough to name them."""
    if not comps:
        raise ConfigError("no components")
    if len(comps) == 1:
        return comps[0].id, comps[0].id
    if not comps[0].order_relations:
        compute_order_relations(comps)
    bad = [(a.id, bid) for a in comps for bid, v in a.order_relations.items()
           if v == INCOMPARABLE and a.id < bid]
    min_id = max_id = None
    for c in comps:
        rels = set(c.order_relations.values())
        if rels <= {LESS}:
            min_id = c.id
        if rels <= {GREATER}:
            max_id = c.id
    if min_id is None or max_id is None:
        raise OrderViolationError(
            "no unique minimal/maximal component; evidence against a "
            "postcritically bounded disconnected input", pairs=bad)
    return min_id, max_id


def gamma_min(gs: GeneratorSet, comps, min_id, region: GridRegion,
              points: int = 10_000, seed: int = 7) -> list:
    """Indices of generators whose own Julia set sits in the minimal
    component (within 2 cells)."""
    ny, nx = region.labels.shape
    comp_grid = np.full(ny * nx, -1, dtype=np.int64)
    for c in comps:
        comp_grid[c.cells] = c.id
    comp_grid = comp_grid.reshape(ny, nx)

    member = []
    for gi, h in enumerate(gs.gens):
        sub = GeneratorSet((h,), gs.escape_radius, (gs.labels[gi],))
        cloud = chaos_game_julia(sub, points + 200, burn_in=200, seed=seed + gi)
        votes = _component_votes(cloud.points, comp_grid, region)
        total = sum(votes.values())
        if total < 0.95 * cloud.points.size or not votes:
            raise ClassificationError(
                f"generator {gs.labels[gi]}: Julia cloud not within 2 cells of "
                "any component")
        best_id, best = max(votes.items(), key=lambda kv: kv[1])
        if best < 0.99 * total:
            raise ClassificationError(
                f"generator {gs.labels[gi]}: Julia cloud splits across "
                f"components {sorted(votes)}")
        if best_id == min_id:
            member.append(gi)
    return member


def _component_votes(pts, comp_grid, region) -> dict:
    ny, nx = comp_grid.shape
    iy, ix = G.points_to_cells(region.window, region.resolution, pts)
    votes = {}
    for y, x in zip(iy, ix):
        if y < 0:
            continue
        found = None
        for ring in range(3):
            ids = comp_grid[max(0, y - ring): y + ring + 1,
                            max(0, x - ring): x + ring + 1]
            ids = np.unique(ids[ids >= 0])
            if ids.size == 1:
                found = int(ids[0])
                break
            if ids.size > 1:
                found = None
                break
        if found is not None:
            votes[found] = votes.get(found, 0) + 1
    return votes


# ---------------------------------------------------------------------------
# two-generator separation check


def cantor_family_verify(gs: GeneratorSet, region, n_boundary: int = 4096,
                         interior: int = 64) -> dict:
    """Sample the region, pull it back under both generators, and check that
    both preimages land inside with the two preimage sets disjoint."""
    if len(gs) != 2:
        raise ConfigError("exactly two generators required")
    samples = np.concatenate([region.boundary_points(n_boundary),
                              region.interior_points(interior)])
    scale = float(np.max(np.abs(samples)))
    pre = []
    margins = []
    for h in gs.gens:
        z = roots_batch(h, samples).ravel()
        pre.append(z)
        margins.append(float(np.min(region.inset(z))))
    t0 = cKDTree(np.column_stack([pre[0].real, pre[0].imag]))
    d, _ = t0.query(np.column_stack([pre[1].real, pre[1].imag]))
    separation = float(d.min())
    tol = -1e-9 * max(1.0, scale)
    return {
        "containment_margins": margins,
        "separation": separation,
        "containment_passed": bool(min(margins) >= tol),
        "separation_passed": bool(separation > 0),
        "passed": bool(min(margins) >= tol and separation > 0),
        "samples": int(samples.size),
    }


# ---------------------------------------------------------------------------
# distances


def hausdorff_distance(a, b) -> float:
    """Symmetric Hausdorff distance between two finite complex point sets."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.size == 0 or b.size == 0:
        raise ConfigError("empty point set")
    ta = cKDTree(np.column_stack([a.real, a.imag]))
    tb = cKDTree(np.column_stack([b.real, b.imag]))
    d_ab, _ = tb.query(np.column_stack([a.real, a.imag]))
    d_ba, _ = ta.query(np.column_stack([b.real, b.imag]))
    return float(max(d_ab.max(), d_ba.max()))


def mask_centers(region: GridRegion, mask: np.ndarray) -> np.ndarray:
    """Complex centers of the cells set in mask."""
    return G.cell_centers(region.window, region.resolution)[mask]
