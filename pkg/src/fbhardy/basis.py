"""Orthonormal Fourier-Bessel eigensystems on (0, 1) and the Hankel transform.

For order nu > -1/2 and the n-th positive zero lam_n of J_nu, the functions

    phi_n(x) = c_n J_nu(lam_n x) x^-nu,        c_n = sqrt(2) / |J_{nu+1}(lam_n)|,

form an orthonormal basis of L^2((0,1), x^(2nu+1) dx); the conjugated system
psi_n = x^(nu+1/2) phi_n is orthonormal in plain L^2(0, 1).  The prefactor
c_n is forced by the classical norm identity
int_0^1 J_nu(lam_n x)^2 x dx = J_{nu+1}(lam_n)^2 / 2 and is verified here by
quadrature at construction time.

The basis also owns the numerical constants used to certify series tails for
the kernel evaluators: a margin M with c_n <= M sqrt(pi lam_n) checked on the
whole table, and s_rho = sup_z sqrt(z) |J_rho(z)| for rho = nu, nu + 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError
from .quadrature import (SampledFunction, make_quadrature,
                         MEASURE_LEBESGUE, MEASURE_MU)
from . import specfun
from .specfun import BesselZeroTable, Order

_NORM_CHECK_MODES = 64   # quadrature norm check capped here; higher modes rely
                         # on the classical identity, which tests probe directly


def _sup_sqrtz_j(order: Order) -> float:
    """Numerical sup of sqrt(z)|J_nu(z)|, with a safety margin.

    Beyond the scan window the envelope sqrt(2/pi)(1 + O(1/z)) applies, so the
    max over [grid, asymptotic envelope] inflated by 2 percent is a safe desk
    constant."""
    z = np.linspace(1e-3, 260.0, 26000)
    vals = np.sqrt(z) * np.abs(np.asarray(specfun.bessel_j(order, z)))
    envelope = math.sqrt(2.0 / math.pi) * 1.01
    return 1.02 * max(float(vals.max()), envelope)


@dataclass(frozen=True)
class EigenBasis:
    order: Order
    table: BesselZeroTable
    norm_constants: np.ndarray
    c_margin: float
    s_nu: float
    s_nu1: float
    norm_check_errors: np.ndarray

    def __post_init__(self):
        self.norm_constants.setflags(write=False)

    # -- construction -------------------------------------------------------

    @classmethod
    def build(cls, order: Order, n_zeros: int, zero_tol: float = 1e-12,
              quad_nodes: int = 1024, norm_tol: float = 1e-8) -> "EigenBasis":
        table = specfun.bessel_zeros(order, n_zeros, zero_tol=zero_tol)
        jnext = np.abs(np.asarray(specfun.bessel_j(Order(order.nu + 1.0), table.zeros)))
        if np.any(jnext == 0.0):
            raise NumericsError("eigenbasis", "J_{nu+1} vanishes at a computed zero")
        c = math.sqrt(2.0) / jnext
        margin = float(np.max(c / np.sqrt(math.pi * table.zeros)))
        if margin > 2.0:
            raise NumericsError("eigenbasis",
                                f"norm-constant margin {margin:.3f} too large for tail bounds")
        basis = cls(order=order, table=table, norm_constants=c,
                    c_margin=1.05 * margin, s_nu=_sup_sqrtz_j(order),
                    s_nu1=_sup_sqrtz_j(Order(order.nu + 1.0)),
                    norm_check_errors=cls._norm_check(order, table, c, quad_nodes))
        if np.max(basis.norm_check_errors) > norm_tol:
            raise NumericsError(
                "eigenbasis",
                f"unit-norm quadrature check failed: {np.max(basis.norm_check_errors):.3e}")
        return basis

    @staticmethod
    def _norm_check(order, table, c, quad_nodes) -> np.ndarray:
        n_check = min(len(table.zeros), _NORM_CHECK_MODES)
        lam = table.zeros[:n_check]
        # resolve the fastest oscillation: ~10 nodes per period of J_nu(lam x)
        nodes = max(quad_nodes, int(10 * lam[-1] / math.pi) + 64)
        grid = make_quadrature("unit_interval", nodes, MEASURE_MU, order.nu)
        jov = specfun.besselj_over_xnu(order, np.outer(lam, grid.nodes))
        phi = (c[:n_check] * lam**order.nu)[:, None] * jov
        norms = (phi * phi) @ grid.weights
        return np.abs(norms - 1.0)

    # -- basic data ----------------------------------------------------------

    @property
    def nu(self) -> float:
        return self.order.nu

    def __len__(self) -> int:
        return len(self.table.zeros)

    @property
    def eigenvalues_sqrt(self) -> np.ndarray:
        """lam_n: the square roots of the eigenvalues of the second-order
        operator, i.e. the Bessel zeros."""
        return self.table.zeros

    def phi_matrix(self, x, n: int | None = None) -> np.ndarray:
        """Rows phi_1 .. phi_n sampled at x (shape (n, len(x)))."""
        n = len(self) if n is None else n
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.table.zeros[:n]
        jov = specfun.besselj_over_xnu(self.order, np.outer(lam, x))
        return (self.norm_constants[:n] * lam**self.nu)[:, None] * jov

    def psi_matrix(self, x, n: int | None = None) -> np.ndarray:
        """Rows of the conjugated (Lebesgue-orthonormal) system
        psi_n(x) = c_n sqrt(x) J_nu(lam_n x)."""
        n = len(self) if n is None else n
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.table.zeros[:n]
        j = np.asarray(specfun.bessel_j(self.order, np.outer(lam, x)))
        return self.norm_constants[:n, None] * np.sqrt(x)[None, :] * j

    def phi(self, n: int, x):
        """phi_n pointwise (n is 1-based)."""
        if not 1 <= n <= len(self):
            raise ValueError(f"mode index {n} outside table of size {len(self)}")
        out = self.phi_matrix(np.atleast_1d(x), n)[n - 1]
        return float(out[0]) if np.ndim(x) == 0 else out

    def psi(self, n: int, x):
        if not 1 <= n <= len(self):
            raise ValueError(f"mode index {n} outside table of size {len(self)}")
        out = self.psi_matrix(np.atleast_1d(x), n)[n - 1]
        return float(out[0]) if np.ndim(x) == 0 else out

    # -- certified series tails ----------------------------------------------
    #
    # With theta = 0.9 the spacing lam_{n+k} >= lam_n + k pi theta holds for
    # every order nu > -1/2 (the table is checked at build time), and
    #   sup_x |phi_n(x)|                   <= c_margin sqrt(pi) s_nu lam_n^... / x^(nu+1/2)
    #   sup_x |phi_n(x)| (global)          <= c_n lam_n^nu / (2^nu Gamma(nu+1)).
    # Both bounds are combined; the local one wins away from the origin.

    _THETA = 0.9

    def _coeff_bound(self, xy_floor: float | None) -> float:
        """Bound on sup |phi_n(x) phi_n(y)| / lam_n^p with the power p returned
        implicitly: for the global bound p = 2 nu + 1, for the local bound
        p = 0.  We return the local bound when a floor on xy is available,
        otherwise infinity (callers then use the global variant)."""
        if xy_floor is None or xy_floor <= 0:
            return math.inf
        k = (self.c_margin**2) * math.pi * self.s_nu**2
        return k * xy_floor ** -(self.nu + 0.5)

    def _global_coeff(self) -> float:
        g = 2.0**self.nu * math.gamma(self.nu + 1.0)
        return (self.c_margin**2) * math.pi / g**2

    def poisson_terms_needed(self, t: float, tol: float,
                             xy_floor: float | None = None) -> int:
        """Smallest N so the tail of sum exp(-t lam_n) |phi phi| past N is
        below tol, or a NumericsError if the table cannot certify it."""
        if t <= 0:
            raise ValueError("t must be positive")
        lam = self.table.zeros
        pt = math.pi * self._THETA
        local = self._coeff_bound(xy_floor)
        glob = self._global_coeff()
        for n in range(0, len(lam)):
            lam_next = lam[n]          # first term of the tail is index n
            q_loc = math.exp(-t * pt)
            bound_loc = local * math.exp(-t * lam_next) / max(1.0 - q_loc, 1e-300)
            lg = math.log(lam_next)
            q_glob = math.exp(-t * pt + (2 * self.nu + 1) * pt / lam_next)
            if q_glob < 1.0:
                bound_glob = (glob * lam_next ** (2 * self.nu + 1)
                              * math.exp(-t * lam_next) / (1.0 - q_glob))
            else:
                bound_glob = math.inf
            if min(bound_loc, bound_glob) < tol:
                return n
        raise NumericsError(
            "poisson_kernel",
            f"tail not certified at t={t:.3e} with table of {len(lam)} zeros; "
            "enlarge the zero table or raise t")

    def heat_terms_needed(self, t: float, tol: float,
                          xy_floor: float | None = None) -> int:
        if t <= 0:
            raise ValueError("t must be positive")
        lam = self.table.zeros
        pt = math.pi * self._THETA
        local = self._coeff_bound(xy_floor)
        glob = self._global_coeff()
        for n in range(0, len(lam)):
            lam_next = lam[n]
            decay = math.exp(-t * lam_next**2)
            q = math.exp(-2.0 * t * lam_next * pt + (2 * self.nu + 1) * pt / lam_next)
            if q >= 1.0:
                continue
            bound = min(local, glob * lam_next ** (2 * self.nu + 1)) * decay / (1.0 - q)
            if bound < tol:
                return n
        raise NumericsError(
            "heat_kernel",
            f"tail not certified at t={t:.3e} with table of {len(lam)} zeros")

    def delta_terms_needed(self, t: float, tol: float) -> int:
        """Truncation index for the gradient-type series with terms bounded by
        K lam_n exp(-t lam_n), K = c_margin^2 pi s_nu s_{nu+1}."""
        if t <= 0:
            raise ValueError("t must be positive")
        lam = self.table.zeros
        pt = math.pi * self._THETA
        coeff = (self.c_margin**2) * math.pi * self.s_nu * self.s_nu1
        for n in range(0, len(lam)):
            lam_next = lam[n]
            q = math.exp(-t * pt + pt / lam_next)
            if q >= 1.0:
                continue
            bound = coeff * lam_next * math.exp(-t * lam_next) / (1.0 - q)
            if bound < tol:
                return n
        raise NumericsError(
            "gradient_kernel",
            f"tail not certified at t={t:.3e} with table of {len(lam)} zeros")

    def min_poisson_time(self, tol: float, xy_floor: float | None = None) -> float:
        """Smallest t the full table certifies for the weighted Poisson kernel
        (used as a floor for t-grids in supremum sweeps)."""
        lo, hi = 1e-8, 10.0
        def ok(t):
            try:
                self.poisson_terms_needed(t, tol, xy_floor)
                return True
            except NumericsError:
                return False
        if ok(lo):
            return lo
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return hi

    def min_heat_time(self, tol: float, xy_floor: float | None = None) -> float:
        lo, hi = 1e-10, 10.0
        def ok(t):
            try:
                self.heat_terms_needed(t, tol, xy_floor)
                return True
            except NumericsError:
                return False
        if ok(lo):
            return lo
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if ok(mid):
                hi = mid
            else:
                lo = mid
        return hi


# ---------------------------------------------------------------------------
# coefficients and synthesis


def coeff_mu(f: SampledFunction, basis: EigenBasis, n: int) -> float:
    """<f, phi_n> against the weighted measure."""
    if f.measure != MEASURE_MU:
        raise ValueError("coeff_mu expects a mu-tagged sampled function")
    row = basis.phi_matrix(f.nodes, n)[n - 1]
    return float((f.grid.weights * row) @ f.values)


def coeff_lebesgue(g: SampledFunction, basis: EigenBasis, n: int) -> float:
    """<g, psi_n> against Lebesgue measure."""
    if g.measure != MEASURE_LEBESGUE:
        raise ValueError("coeff_lebesgue expects a lebesgue-tagged sampled function")
    row = basis.psi_matrix(g.nodes, n)[n - 1]
    return float((g.grid.weights * row) @ g.values)


def coefficients(f: SampledFunction, basis: EigenBasis,
                 n_max: int | None = None) -> np.ndarray:
    """All coefficients up to n_max in the system matching f's measure tag,
    truncated at the grid's resolvable frequency so unresolved modes are not
    polluted by quadrature noise (they are returned as exact zeros)."""
    n_max = len(basis) if n_max is None else n_max
    lam = basis.table.zeros[:n_max]
    resol = f.grid.resolution_frequency()
    n_ok = int(np.searchsorted(lam, resol))
    n_ok = min(max(n_ok, 1), n_max)
    mat = (basis.phi_matrix(f.nodes, n_ok) if f.measure == MEASURE_MU
           else basis.psi_matrix(f.nodes, n_ok))
    out = np.zeros(n_max)
    out[:n_ok] = mat @ (f.grid.weights * f.values)
    return out


def synthesize(basis: EigenBasis, coeffs: np.ndarray, x,
               system: str = "phi") -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=float)
    n = len(coeffs)
    if n > len(basis):
        raise ValueError("more coefficients than table entries")
    mat = basis.phi_matrix(x, n) if system == "phi" else basis.psi_matrix(x, n)
    return coeffs @ mat


# ---------------------------------------------------------------------------
# Hankel transform on the half-line


def hankel_transform(f: SampledFunction, xi) -> np.ndarray:
    """Modified Hankel transform H f(xi) = int (xi y)^-nu J_nu(xi y) f(y) dmu(y).

    Self-inverse and an L^2(mu) isometry with unit constant; f must be
    mu-tagged and supported inside its (truncated) grid domain."""
    if f.measure != MEASURE_MU:
        raise ValueError("hankel_transform expects a mu-tagged sampled function")
    scalar = np.ndim(xi) == 0
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if np.any(xi <= 0):
        raise ValueError("transform variable must be positive")
    order = Order(f.grid.nu)
    kernel = specfun.besselj_over_xnu(order, np.outer(xi, f.nodes))
    out = kernel @ (f.grid.weights * f.values)
    return float(out[0]) if scalar else out
