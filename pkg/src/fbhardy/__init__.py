"""Fourier-Bessel expansions, semigroup kernels, maximal operators, and
atomic Hardy-space decompositions on the unit interval and the half line,
with desk-scale numerical verification of the kernel estimates and norm
equivalences that connect them."""

from .basis import EigenBasis, coefficients, hankel_transform, synthesize
from .config import RunConfig, load_config
from .covers import DyadicCover, Interval, FAMILY_ONE_END, FAMILY_TWO_END
from .errors import ConfigError, NumericsError
from .hardy import (Atom, PiecewiseLinear, atomic_decompose, build_partition,
                    cascade_decompose, case3_split, chord_product,
                    h1_norm_report, haar_atom, random_atoms, special_atom,
                    two_atom_split, validate_atom)
from .kernels import (UnitIntervalKernels, bessel_heat, bessel_poisson,
                      check_all_estimates, check_sharp_estimate, mu_ball)
from .maximal import (CutoffRho, SpectralExpansion, TimeGrid,
                      apply_halfline, apply_heat, apply_poisson,
                      compare_semigroups, duhamel_closure, maximal_function,
                      split_maximal, uchiyama_families, uchiyama_kernel)
from .quadrature import (Grid, SampledFunction, grid_on_interval,
                         make_quadrature, mu_distance, MEASURE_LEBESGUE,
                         MEASURE_MU)
from .specfun import Order, bessel_zeros

__version__ = "0.1.0"

__all__ = [
    "Atom", "ConfigError", "CutoffRho", "DyadicCover", "EigenBasis",
    "FAMILY_ONE_END", "FAMILY_TWO_END", "Grid", "Interval",
    "MEASURE_LEBESGUE", "MEASURE_MU", "NumericsError", "Order",
    "PiecewiseLinear", "RunConfig", "SampledFunction", "SpectralExpansion",
    "TimeGrid", "UnitIntervalKernels", "apply_halfline", "apply_heat",
    "apply_poisson", "atomic_decompose", "bessel_heat", "bessel_poisson",
    "bessel_zeros", "build_partition", "cascade_decompose", "case3_split",
    "check_all_estimates", "check_sharp_estimate", "chord_product",
    "coefficients", "compare_semigroups", "duhamel_closure",
    "grid_on_interval", "h1_norm_report", "haar_atom", "hankel_transform",
    "load_config", "make_quadrature", "maximal_function", "mu_ball",
    "mu_distance", "random_atoms", "special_atom", "split_maximal",
    "synthesize", "two_atom_split", "uchiyama_families", "uchiyama_kernel",
    "validate_atom",
]
