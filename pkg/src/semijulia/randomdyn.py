"""Monte Carlo checks of the almost-sure statements about random fibers.

Sequences are drawn i.i.d. from a weight vector over the generators; every
trial gets its own counter-derived seed so runs are reproducible and
embarrassingly parallel.  Fractions come with Wilson 95% intervals; finite
resolution makes the measure-one statements show up as fractions near one,
never exactly one.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import grid as G
from .errors import ConfigError, ContradictionError, IndeterminateError
from .fiber import (ExplicitPrefix, area_estimate, bounded_components_count,
                    fiber_grid, jordan_evidence, orbit_enters_khat,
                    trace_boundary)
from .julia import BOUNDED_ALL, FOUR_CONN, GridRegion, word_tree_classify
from .semigroup import GeneratorSet

from scipy import ndimage


@dataclass(frozen=True)
class IidModel:
    weights: tuple
    master_seed: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or np.any(w < 0):
            raise ConfigError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError("weights must sum to 1")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    def trial_rng(self, trial: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(trial,))
        return np.random.default_rng(ss)


@dataclass
class TrialStats:
    trials: int
    frac_single_bounded_component: float
    frac_jordan: float
    frac_entered_khat: float
    area_ratio_by_resolution: list = field(default_factory=list)
    excluded_indeterminate: int = 0
    wilson_intervals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "frac_single_bounded_component": self.frac_single_bounded_component,
            "frac_jordan": self.frac_jordan,
            "frac_entered_khat": self.frac_entered_khat,
            "area_ratio_by_resolution": list(self.area_ratio_by_resolution),
            "excluded_indeterminate": self.excluded_indeterminate,
            "wilson_intervals": self.wilson_intervals,
        }


def wilson_interval(successes: int, n: int, z: float = 1.959964) -> tuple:
    """Wilson score interval for a binomial fraction."""
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def sample_sequences(model: IidModel, gs: GeneratorSet, count: int,
                     length: int) -> list:
    """count prefixes of the given length, realized as explicit words."""
    if count < 1 or length < 1:
        raise ConfigError("count and length must be >= 1")
    if len(model.weights) != len(gs):
        raise ConfigError("weights length must match generator count")
    if any(w == 0 for w in model.weights):
        # the almost-sure statements assume the support is the whole family
        pass
    w = np.asarray(model.weights)
    specs = []
    for trial in range(count):
        rng = model.trial_rng(trial)
        word = tuple(int(x) for x in rng.choice(len(gs), size=length, p=w))
        specs.append(ExplicitPrefix(word, word[-1]))
    return specs


def _khat_region(gs: GeneratorSet, window, resolution: int = 256,
                 depth: int = 16) -> GridRegion:
    return word_tree_classify(gs, window, (resolution, resolution), depth)


def _component_barycenter(fg) -> complex:
    interior = G.erode(fg.k_mask)
    lab, n = ndimage.label(interior, structure=FOUR_CONN)
    if n == 0:
        raise IndeterminateError("no interior component")
    sizes = ndimage.sum_labels(np.ones_like(lab), lab, index=range(1, n + 1))
    big = int(np.argmax(sizes)) + 1
    centers = G.cell_centers(fg.window, fg.resolution)
    return complex(np.mean(centers[lab == big]))


def fitted_window(gs: GeneratorSet, spec, window, max_iter: int,
                  coarse: int = 64) -> tuple:
    """Window snugly around this fiber's bounded set (coarse probe plus
    margin).  Fibers whose first letters contract hard live in a small part
    of the generic window; refitting buys real resolution at the same grid
    size."""
    probe = fiber_grid(gs, spec, window, (coarse, coarse), min(max_iter, 64))
    k = probe.k_mask
    if not k.any():
        return window
    centers = G.cell_centers(probe.window, probe.resolution)
    re = centers.real[k]
    im = centers.imag[k]
    dx, dy = probe.cell_size
    pad_x = max(0.15 * (re.max() - re.min() + dx), 3 * dx)
    pad_y = max(0.15 * (im.max() - im.min() + dy), 3 * dy)
    return (max(window[0], re.min() - pad_x), min(window[1], re.max() + pad_x),
            max(window[2], im.min() - pad_y), min(window[3], im.max() + pad_y))


def run_one_trial(gs: GeneratorSet, spec, window, resolution: int,
                  max_iter: int, khat: GridRegion,
                  adaptive_window: bool = True) -> dict:
    """Single-fiber statistics: component count, Jordan flag, orbit entry."""
    if adaptive_window:
        window = fitted_window(gs, spec, window, max_iter)
    fg = fiber_grid(gs, spec, window, (resolution, resolution), max_iter)
    ev = jordan_evidence(fg)
    if ev.get("indeterminate"):
        return {"indeterminate": True}
    out = {
        "bounded_components": ev["floored_components"],
        "jordan": ev["jordan"],
    }
    try:
        y0 = _component_barycenter(fg)
        n = orbit_enters_khat(gs, spec, y0, khat, max_n=max_iter)
        out["entered_khat"] = n is not None
    except (IndeterminateError, ContradictionError):
        out["entered_khat"] = False
    return out


def monte_carlo_fiber_stats(model: IidModel, gs: GeneratorSet, trials: int,
                            window=(-4.5, 4.5, -4.5, 4.5), resolution: int = 512,
                            length: int = 256, workers: int = 1,
                            adaptive_window: bool = True) -> TrialStats:
    """Fractions of sampled fibers with exactly one bounded component, a
    Jordan interface, and an orbit entering the interior of the smallest
    filled-in set.  Indeterminate grids are excluded and counted."""
    if trials < 10:
        raise ConfigError("need at least 10 trials")
    specs = sample_sequences(model, gs, trials, length)
    khat = _khat_region(gs, window)
    max_iter = length   # truncation is exact: only letters 1..length are used

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_one_trial, gs, s, window, resolution,
                                   max_iter, khat, adaptive_window)
                       for s in specs]
            results = [f.result() for f in futures]
    else:
        results = [run_one_trial(gs, s, window, resolution, max_iter, khat,
                                 adaptive_window) for s in specs]

    valid = [r for r in results if not r.get("indeterminate")]
    excluded = trials - len(valid)
    n = len(valid)
    single = sum(1 for r in valid if r["bounded_components"] == 1)
    jordan = sum(1 for r in valid if r["jordan"])
    entered = sum(1 for r in valid if r["entered_khat"])
    stats = TrialStats(
        trials=n,
        frac_single_bounded_component=single / n if n else 0.0,
        frac_jordan=jordan / n if n else 0.0,
        frac_entered_khat=entered / n if n else 0.0,
        excluded_indeterminate=excluded,
    )
    stats.wilson_intervals = {
        "single_bounded_component": wilson_interval(single, n),
        "jordan": wilson_interval(jordan, n),
        "entered_khat": wilson_interval(entered, n),
    }
    return stats


def area_resolution_ladder(model: IidModel, gs: GeneratorSet, trial: int,
                           resolutions, window=(-4.5, 4.5, -4.5, 4.5),
                           length: int = 256) -> list:
    """Area estimates of one sampled fiber's interface across a doubling
    resolution ladder; appending the ratios to trial statistics shows the
    measure-zero trend (ratios well below 1) or refutes it (near 1)."""
    resolutions = list(resolutions)
    if len(resolutions) < 2:
        raise ConfigError("need at least 2 resolutions")
    for a, b in zip(resolutions, resolutions[1:]):
        if b != 2 * a:
            raise ConfigError("each resolution must double the previous")
    spec = sample_sequences(model, gs, trial + 1, length)[trial]
    areas = []
    for res in resolutions:
        fg = fiber_grid(gs, spec, window, (res, res), max_iter=length)
        dx, dy = fg.cell_size
        areas.append(area_estimate(fg.boundary_cells(), max(dx, dy)))
    return areas


def stats_to_json_bytes(stats: TrialStats, config: dict) -> bytes:
    """Canonical JSON encoding; identical runs give identical bytes."""
    doc = {"config": config, "stats": stats.to_json()}
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode()
