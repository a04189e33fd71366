"""Julia sets of polynomial semigroups.

Global semigroup Julia sets, sequence-wise (fiberwise) Julia sets of the
associated skew product, postcritical boundedness certificates, component
ordering, Jordan/quasicircle diagnostics, and Monte Carlo checks of the
almost-sure statements about random fibers.
"""

__version__ = "0.1.0"

from .poly import (  # noqa: F401
    Polynomial, CriticalData, critical_data, escape_radius, roots, roots_batch,
    parse_poly, format_poly, parse_complex, format_complex,
)
from .semigroup import (  # noqa: F401
    GeneratorSet, PostcriticalReport, make_generator_set, load_generator_config,
    postcritical_orbit, find_invariant_disk, find_trap_region,
    realpcb_generator, constprop_generator, hyperbolicity_gap,
    BOUNDED, UNBOUNDED, UNDECIDED,
)
from .regions import Disk, Rect, Annulus, BallUnion  # noqa: F401
