"""Poisson and heat kernels for the Bessel operator, with sharp-bound checks.

Six kernels are covered.  On (0, 1), with lam_n the positive zeros of J_nu and
phi_n / psi_n the weighted and flat orthonormal systems from `basis`:

    weighted Poisson   sum_n exp(-t lam_n)   phi_n(x) phi_n(y)
    flat Poisson       sum_n exp(-t lam_n)   psi_n(x) psi_n(y)
    weighted heat      sum_n exp(-t lam_n^2) phi_n(x) phi_n(y)
    flat heat, ext.    the flat heat kernel extended by zero outside (0,1)^2

On (0, inf) the heat kernel of the Bessel operator has the closed form

    T_t(x, y) = (2t)^(-1-nu) exp(-(x^2+y^2)/4t) h_nu(xy/2t),
    h_nu(u) = I_nu(u)/u^nu,

and the Poisson kernel is produced from it by one-sided subordination,

    P_t(x, y) = pi^(-1/2) int_0^inf exp(-u) u^(-1/2) T_{t^2/4u}(x, y) du.

Series kernels are truncated with certified geometric tail bounds owned by the
basis object, so every value carries an absolute-accuracy guarantee; when a
requested time is too small for the available zero table a NumericsError is
raised rather than returning an uncertified number.

`check_sharp_estimate` measures two-sided comparability (or a one-sided bound)
against the closed-form comparand of each estimate on a deterministic
(t, x, y) box and reports min/max ratios together with their drift under a
twofold grid refinement.  The refined grid is a superset of the base grid, so
the extremes can only widen; an estimate passes when the ratios are finite and
widen by less than ten percent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import EigenBasis
from .errors import NumericsError
from .quadrature import MeasureMu
from . import specfun
from .specfun import Order

GAUSS_DECAY_C = 0.2   # exponent constant used by every Gaussian comparand


# ---------------------------------------------------------------------------
# series kernels on (0, 1)


class UnitIntervalKernels:
    """Certified evaluators for the four series kernels on (0, 1).

    Pointwise methods broadcast x against y elementwise; matrix methods return
    the full outer table (len(x), len(y)).  `series_tol` is an absolute
    accuracy target per value.
    """

    def __init__(self, basis: EigenBasis, series_tol: float = 1e-10):
        self.basis = basis
        self.series_tol = float(series_tol)

    @property
    def nu(self) -> float:
        return self.basis.nu

    @property
    def lam1(self) -> float:
        return float(self.basis.table.zeros[0])

    # -- truncation ----------------------------------------------------------

    def _n_poisson(self, t: float, tol: float | None = None) -> int:
        tol = self.series_tol if tol is None else tol
        n = self.basis.poisson_terms_needed(t, tol)
        return min(len(self.basis), max(n, 1) + 8)

    def _n_heat(self, t: float, tol: float | None = None) -> int:
        tol = self.series_tol if tol is None else tol
        n = self.basis.heat_terms_needed(t, tol)
        return min(len(self.basis), max(n, 1) + 8)

    def _n_delta(self, t: float, tol: float | None = None) -> int:
        tol = self.series_tol if tol is None else tol
        n = self.basis.delta_terms_needed(t, tol)
        return min(len(self.basis), max(n, 1) + 8)

    def poisson_floor(self, tol: float | None = None) -> float:
        """Smallest time the zero table certifies for Poisson-type series."""
        return self.basis.min_poisson_time(self.series_tol if tol is None else tol)

    def heat_floor(self, tol: float | None = None) -> float:
        return self.basis.min_heat_time(self.series_tol if tol is None else tol)

    def derivative_floor(self, x_min: float, y_min: float,
                         tol: float | None = None) -> float:
        """Smallest time certified for both derivative series when the
        evaluation grid stays inside [x_min, 1) x [y_min, 1).  The derivative
        kernels tighten the requested tolerance by grid-dependent factors, so
        their floor sits above the plain Poisson one."""
        tol = self.series_tol if tol is None else tol
        tol_dx = tol * min(1.0, (x_min * y_min) ** (self.nu + 0.5))
        tol_dy = tol * min(1.0, y_min / (self.nu + 0.5))

        def certified(t: float) -> bool:
            try:
                self.basis.delta_terms_needed(t, tol_dx)
                self.basis.poisson_terms_needed(t, tol_dy)
                return True
            except NumericsError:
                return False

        lo, hi = 1e-8, 10.0
        if certified(lo):
            return lo
        for _ in range(60):
            mid = math.sqrt(lo * hi)
            if certified(mid):
                hi = mid
            else:
                lo = mid
        return 1.02 * hi

    # -- evaluation cores ----------------------------------------------------

    def _chi_matrix(self, x, n: int) -> np.ndarray:
        """Rows c_n lam_n sqrt(x) J_{nu+1}(lam_n x): the image of psi_n under
        the first-order factor  -d/dx + (nu + 1/2)/x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lam = self.basis.table.zeros[:n]
        up = Order(self.nu + 1.0)
        j1 = np.asarray(specfun.bessel_j(up, np.outer(lam, x)))
        return (self.basis.norm_constants[:n] * lam)[:, None] * np.sqrt(x)[None, :] * j1

    @staticmethod
    def _pointwise(weights, rows_x, rows_y):
        return np.einsum("np,np->p", rows_x * weights[:, None], rows_y)

    def _eval(self, weight_fn, rows_fn_x, rows_fn_y, n, x, y, matrix):
        w = weight_fn(self.basis.table.zeros[:n])
        if matrix:
            x = np.atleast_1d(np.asarray(x, dtype=float))
            y = np.atleast_1d(np.asarray(y, dtype=float))
            return (rows_fn_x(x, n) * w[:, None]).T @ rows_fn_y(y, n)
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                     np.asarray(y, dtype=float))
        shape = xb.shape
        out = self._pointwise(w, rows_fn_x(xb.ravel(), n), rows_fn_y(yb.ravel(), n))
        return float(out[0]) if shape == () else out.reshape(shape)

    # -- public kernels ------------------------------------------------------

    def poisson_mu(self, t: float, x, y, matrix: bool = False, tol=None):
        n = self._n_poisson(t, tol)
        return self._eval(lambda lam: np.exp(-t * lam),
                          self.basis.phi_matrix, self.basis.phi_matrix,
                          n, x, y, matrix)

    def poisson_lebesgue(self, t: float, x, y, matrix: bool = False, tol=None):
        n = self._n_poisson(t, tol)
        return self._eval(lambda lam: np.exp(-t * lam),
                          self.basis.psi_matrix, self.basis.psi_matrix,
                          n, x, y, matrix)

    def heat_mu(self, t: float, x, y, matrix: bool = False, tol=None):
        n = self._n_heat(t, tol)
        return self._eval(lambda lam: np.exp(-t * lam**2),
                          self.basis.phi_matrix, self.basis.phi_matrix,
                          n, x, y, matrix)

    def heat_lebesgue(self, t: float, x, y, matrix: bool = False, tol=None):
        n = self._n_heat(t, tol)
        return self._eval(lambda lam: np.exp(-t * lam**2),
                          self.basis.psi_matrix, self.basis.psi_matrix,
                          n, x, y, matrix)

    def heat_lebesgue_ext(self, t: float, x, y, tol=None):
        """Flat heat kernel extended by zero outside the open unit square."""
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                     np.asarray(y, dtype=float))
        scalar = xb.shape == ()
        xb = np.atleast_1d(xb).astype(float)
        yb = np.atleast_1d(yb).astype(float)
        inside = (xb > 0) & (xb < 1) & (yb > 0) & (yb < 1)
        out = np.zeros(xb.shape)
        if np.any(inside):
            out[inside] = self.heat_lebesgue(t, xb[inside], yb[inside], tol=tol)
        return float(out[0]) if scalar else out

    def delta_poisson(self, t: float, x, y, matrix: bool = False, tol=None):
        """First-order factor applied in x to the flat Poisson kernel:
        sum_n exp(-t lam_n) c_n^2 lam_n sqrt(xy) J_{nu+1}(lam_n x) J_nu(lam_n y)."""
        n = self._n_delta(t, tol)
        return self._eval(lambda lam: np.exp(-t * lam),
                          self._chi_matrix, self.basis.psi_matrix,
                          n, x, y, matrix)

    def dx_poisson_mu(self, t: float, x, y, matrix: bool = False, tol=None):
        """x-derivative of the weighted Poisson kernel, equal to
        -(xy)^(-nu-1/2) times the delta_poisson series."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        ya = np.atleast_1d(np.asarray(y, dtype=float))
        floor = float(np.min(xa) * np.min(ya)) ** (self.nu + 0.5)
        tol_eff = (self.series_tol if tol is None else tol) * min(floor, 1.0)
        d = self.delta_poisson(t, x, y, matrix=matrix, tol=tol_eff)
        if matrix:
            pw = np.outer(xa ** (self.nu + 0.5), ya ** (self.nu + 0.5))
            return -d / pw
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                     np.asarray(y, dtype=float))
        return -d / (xb * yb) ** (self.nu + 0.5)

    def dy_poisson_lebesgue(self, t: float, x, y, matrix: bool = False, tol=None):
        """y-derivative of the flat Poisson kernel,
        (nu + 1/2)/y P_t(x, y) - [delta series with the roles of x, y swapped]."""
        tol = self.series_tol if tol is None else tol
        ya = np.atleast_1d(np.asarray(y, dtype=float))
        scale = min(1.0, float(np.min(ya)) / (self.nu + 0.5))
        n = max(self._n_delta(t, tol), self._n_poisson(t, tol * scale))
        w = np.exp(-t * self.basis.table.zeros[:n])
        if matrix:
            xa = np.atleast_1d(np.asarray(x, dtype=float))
            psi_x = self.basis.psi_matrix(xa, n)
            p = (psi_x * w[:, None]).T @ self.basis.psi_matrix(ya, n)
            d = (psi_x * w[:, None]).T @ self._chi_matrix(ya, n)
            return (self.nu + 0.5) * p / ya[None, :] - d
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                     np.asarray(y, dtype=float))
        shape = xb.shape
        psi_x = self.basis.psi_matrix(xb.ravel(), n)
        p = self._pointwise(w, psi_x, self.basis.psi_matrix(yb.ravel(), n))
        d = self._pointwise(w, psi_x, self._chi_matrix(yb.ravel(), n))
        out = (self.nu + 0.5) * p / yb.ravel() - d
        return float(out[0]) if shape == () else out.reshape(shape)


# ---------------------------------------------------------------------------
# closed-form kernels on the half-line

_IVE_SWITCH = 100.0   # h_nu route below, exponentially-scaled route above


def bessel_heat(nu: float, t, x, y):
    """Heat kernel of the Bessel operator on (0, inf) against x^(2nu+1) dx.

    Two algebraically identical routes are used: the h_nu form for moderate
    xy/2t, and an exponentially scaled form that stays finite when xy/2t is
    large and the unscaled I_nu would overflow."""
    order = Order(nu)
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    scalar = t.shape == ()
    t = np.atleast_1d(t).astype(float)
    x = np.atleast_1d(x).astype(float)
    y = np.atleast_1d(y).astype(float)
    if np.any(t <= 0) or np.any(x < 0) or np.any(y < 0):
        raise ValueError("bessel_heat needs t > 0 and x, y >= 0")
    u = x * y / (2.0 * t)
    out = np.empty(t.shape)
    small = u <= _IVE_SWITCH
    if np.any(small):
        ts, xs, ys = t[small], x[small], y[small]
        h = np.asarray(specfun.besseli_over_xnu(order, u[small]))
        out[small] = (2.0 * ts) ** (-1.0 - nu) * \
            np.exp(-(xs**2 + ys**2) / (4.0 * ts)) * h
    big = ~small
    if np.any(big):
        tb, xb, yb = t[big], x[big], y[big]
        ive = np.asarray(specfun.bessel_i_scaled(order, u[big]))
        out[big] = (xb * yb) ** (-nu) / (2.0 * tb) * \
            np.exp(-((xb - yb) ** 2) / (4.0 * tb)) * ive
    return float(out[0]) if scalar else out


def dy_bessel_heat(nu: float, t, x, y):
    """Derivative of the half-line heat kernel in its second argument."""
    order = Order(nu)
    up = Order(nu + 1.0)
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    scalar = t.shape == ()
    t = np.atleast_1d(t).astype(float)
    x = np.atleast_1d(x).astype(float)
    y = np.atleast_1d(y).astype(float)
    if np.any(t <= 0) or np.any(x < 0) or np.any(y < 0):
        raise ValueError("dy_bessel_heat needs t > 0 and x, y >= 0")
    u = x * y / (2.0 * t)
    out = np.empty(t.shape)
    small = u <= _IVE_SWITCH
    if np.any(small):
        ts, xs, ys, us = t[small], x[small], y[small], u[small]
        h0 = np.asarray(specfun.besseli_over_xnu(order, us))
        h1 = np.asarray(specfun.besseli_over_xnu(up, us))
        out[small] = (2.0 * ts) ** (-1.0 - nu) * \
            np.exp(-(xs**2 + ys**2) / (4.0 * ts)) * \
            ((xs / (2.0 * ts)) * us * h1 - (ys / (2.0 * ts)) * h0)
    big = ~small
    if np.any(big):
        tb, xb, yb, ub = t[big], x[big], y[big], u[big]
        i0 = np.asarray(specfun.bessel_i_scaled(order, ub))
        i1 = np.asarray(specfun.bessel_i_scaled(up, ub))
        out[big] = (xb * yb) ** (-nu) / (2.0 * tb) * \
            np.exp(-((xb - yb) ** 2) / (4.0 * tb)) * \
            ((xb / (2.0 * tb)) * i1 - (yb / (2.0 * tb)) * i0)
    return float(out[0]) if scalar else out


_SUBORD_PANELS = ((0.0, 0.5, 64), (0.5, 1.0, 64), (1.0, 2.0, 64),
                  (2.0, 4.0, 64), (4.0, 8.0, 64), (8.0, 12.0, 32))


def _subordination_nodes():
    nodes, weights = [], []
    for a, b, n in _SUBORD_PANELS:
        z, w = np.polynomial.legendre.leggauss(n)
        nodes.append(0.5 * (b - a) * z + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


_SUB_V, _SUB_W = _subordination_nodes()


def bessel_poisson(nu: float, t: float, x, y):
    """Poisson kernel of the Bessel operator on (0, inf) by subordination.

    After the substitution u = v^2 the defining integral becomes
    2 pi^(-1/2) int_0^inf exp(-v^2) T_{t^2/4v^2}(x, y) dv; the integrand is
    smooth on each panel and dies like exp(-v^2), so fixed Gauss-Legendre
    panels out to v = 12 give near machine accuracy."""
    if not np.isscalar(t) and np.ndim(t) != 0:
        raise ValueError("bessel_poisson takes a scalar time")
    t = float(t)
    if t <= 0:
        raise ValueError("bessel_poisson needs t > 0")
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float))
    scalar = xb.shape == ()
    acc = np.zeros(np.atleast_1d(xb).shape)
    xf = np.atleast_1d(xb).astype(float)
    yf = np.atleast_1d(yb).astype(float)
    for v, w in zip(_SUB_V, _SUB_W):
        s = t * t / (4.0 * v * v)
        acc += w * math.exp(-v * v) * bessel_heat(nu, s, xf, yf)
    acc *= 2.0 / math.sqrt(math.pi)
    return float(acc[0]) if scalar else acc.reshape(xb.shape)


# ---------------------------------------------------------------------------
# comparands for the sharp estimates


def mu_ball(nu: float, x, r, right_edge: float | None = None):
    """Measure of the interval ball B(x, r) intersected with (0, right_edge)."""
    m = MeasureMu(nu)
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    lo = np.maximum(x - r, 0.0)
    hi = x + r if right_edge is None else np.minimum(x + r, right_edge)
    p = m.power
    return (hi**p - lo**p) / p


def comparand_poisson_mu(nu: float, lam1: float, t, x, y):
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    small = (t**2 + x**2 + y**2) ** (-nu - 0.5) * \
        ((1 - x) * (1 - y) / (t**2 + (1 - x) ** 2 + (1 - y) ** 2)) * \
        t / (t**2 + (x - y) ** 2)
    large = (1 - x) * (1 - y) * np.exp(-t * lam1)
    return np.where(t <= 1.0, small, large)


def comparand_poisson_lebesgue(nu: float, lam1: float, t, x, y):
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    small = (x * y / (t**2 + x**2 + y**2)) ** (nu + 0.5) * \
        ((1 - x) * (1 - y) / (t**2 + (1 - x) ** 2 + (1 - y) ** 2)) * \
        t / (t**2 + (x - y) ** 2)
    large = (x * y) ** (nu + 0.5) * (1 - x) * (1 - y) * np.exp(-t * lam1)
    return np.where(t <= 1.0, small, large)


def comparand_gradient(t, x, y):
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    return 1.0 / (t**2 + (x - y) ** 2)


def comparand_heat_gauss(nu: float, t, x, y, c: float = GAUSS_DECAY_C):
    """Gaussian upper comparand exp(-c(x-y)^2/t) / (sqrt(t) (t v xy)^(nu+1/2))
    for the weighted heat kernel on (0, 1), times in (0, 1)."""
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    return np.exp(-c * (x - y) ** 2 / t) / \
        (np.sqrt(t) * np.maximum(t, x * y) ** (nu + 0.5))


def comparand_heat_large(lam1: float, t, x, y):
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    return (1 - x) * (1 - y) * np.exp(-t * lam1**2)


def comparand_bessel_heat_gauss(nu: float, t, x, y, c: float = GAUSS_DECAY_C):
    """exp(-c(x-y)^2/t) / mu(B(x, sqrt(t))) on the half-line."""
    t, x, y = np.broadcast_arrays(np.asarray(t, dtype=float),
                                  np.asarray(x, dtype=float),
                                  np.asarray(y, dtype=float))
    return np.exp(-c * (x - y) ** 2 / t) / mu_ball(nu, x, np.sqrt(t))


def comparand_dy_bessel_heat(nu: float, t, x, y, c: float = GAUSS_DECAY_C):
    return comparand_bessel_heat_gauss(nu, t, x, y, c) / np.sqrt(t)


# ---------------------------------------------------------------------------
# estimate checking


LEMMA_IDS = ("sharp-P", "sharp-Pmu", "grad-P", "dy-P",
             "heat-gauss", "heat-large-t", "bessel-heat-gauss", "dy-bessel-heat")

_TWO_SIDED = {"sharp-P": True, "sharp-Pmu": True, "grad-P": False,
              "dy-P": False, "heat-gauss": False, "heat-large-t": True,
              "bessel-heat-gauss": False, "dy-bessel-heat": False}


def _json_float(v: float):
    return float(v) if math.isfinite(v) else None


@dataclass
class EstimateReport:
    lemma: str
    kind: str                 # "two_sided" or "upper"
    nu: float
    t_range: tuple
    n_samples: int
    n_masked: int
    ratio_min: float
    ratio_max: float
    refined_min: float
    refined_max: float
    drift_min: float
    drift_max: float
    passed: bool
    witness_min: dict = field(default_factory=dict)
    witness_max: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma, "kind": self.kind, "nu": self.nu,
            "t_range": list(self.t_range), "n_samples": self.n_samples,
            "n_masked": self.n_masked,
            "ratio_min": _json_float(self.ratio_min),
            "ratio_max": _json_float(self.ratio_max),
            "refined_min": _json_float(self.refined_min),
            "refined_max": _json_float(self.refined_max),
            "drift_min": _json_float(self.drift_min),
            "drift_max": _json_float(self.drift_max),
            "passed": self.passed,
            "witness_min": self.witness_min, "witness_max": self.witness_max,
        }


def _refine_linear(a: np.ndarray) -> np.ndarray:
    mid = 0.5 * (a[:-1] + a[1:])
    return np.sort(np.concatenate([a, mid]))


def _refine_geometric(a: np.ndarray) -> np.ndarray:
    mid = np.sqrt(a[:-1] * a[1:])
    return np.sort(np.concatenate([a, mid]))


def _unit_space_grid(n: int = 18) -> np.ndarray:
    inner = np.linspace(0.03, 0.97, n)
    return np.sort(np.concatenate([[0.008], inner, [0.992]]))


def _halfline_space_grid(n: int = 16) -> np.ndarray:
    return np.geomspace(0.03, 7.5, n)


class _RatioScan:
    """Tracks extreme kernel/comparand ratios with their witnesses.

    Pairs whose comparand sits below a floor are skipped and counted: there
    the bound is numerically vacuous (both sides are under the accuracy of
    the kernel evaluation, or underflow outright)."""

    def __init__(self):
        self.rmin = math.inf
        self.rmax = -math.inf
        self.wmin = {}
        self.wmax = {}
        self.count = 0
        self.masked = 0

    def update(self, t, xg, yg, kernel, comparand, floor):
        valid = comparand > floor
        self.masked += int(np.sum(~valid))
        if not np.any(valid):
            return
        ratio = np.where(valid, kernel / np.where(valid, comparand, 1.0), np.nan)
        self.count += int(np.sum(valid))
        if not np.all(np.isfinite(ratio[valid])):
            bad = np.argwhere(valid & ~np.isfinite(ratio))[0]
            raise NumericsError(
                "sharp_estimate",
                f"non-finite ratio at t={t}, x={xg[bad[0]]}, y={yg[bad[1]]}")
        i, j = np.unravel_index(np.nanargmin(ratio), ratio.shape)
        if ratio[i, j] < self.rmin:
            self.rmin = float(ratio[i, j])
            self.wmin = {"t": float(t), "x": float(xg[i]), "y": float(yg[j]),
                         "kernel": float(kernel[i, j]),
                         "comparand": float(comparand[i, j]),
                         "ratio": float(ratio[i, j])}
        i, j = np.unravel_index(np.nanargmax(ratio), ratio.shape)
        if ratio[i, j] > self.rmax:
            self.rmax = float(ratio[i, j])
            self.wmax = {"t": float(t), "x": float(xg[i]), "y": float(yg[j]),
                         "kernel": float(kernel[i, j]),
                         "comparand": float(comparand[i, j]),
                         "ratio": float(ratio[i, j])}


def _scan_lemma(lemma: str, kernels: UnitIntervalKernels | None, nu: float,
                t_grid: np.ndarray, x_grid: np.ndarray, y_grid: np.ndarray) -> _RatioScan:
    scan = _RatioScan()
    for t in t_grid:
        t = float(t)
        floor = 1e-280   # closed-form kernels only need a guard against underflow
        if lemma == "sharp-P":
            tol = None if t <= 1.0 else kernels.series_tol * math.exp(-t * kernels.lam1)
            k = kernels.poisson_lebesgue(t, x_grid, y_grid, matrix=True, tol=tol)
            comp = comparand_poisson_lebesgue(nu, kernels.lam1, t,
                                              x_grid[:, None], y_grid[None, :])
            floor = 1e3 * (kernels.series_tol if tol is None else tol)
        elif lemma == "sharp-Pmu":
            tol = None if t <= 1.0 else kernels.series_tol * math.exp(-t * kernels.lam1)
            k = kernels.poisson_mu(t, x_grid, y_grid, matrix=True, tol=tol)
            comp = comparand_poisson_mu(nu, kernels.lam1, t,
                                        x_grid[:, None], y_grid[None, :])
            floor = 1e3 * (kernels.series_tol if tol is None else tol)
        elif lemma == "grad-P":
            k = np.abs(kernels.delta_poisson(t, x_grid, y_grid, matrix=True))
            comp = comparand_gradient(t, x_grid[:, None], y_grid[None, :])
            floor = 1e3 * kernels.series_tol
        elif lemma == "dy-P":
            k = np.abs(kernels.dy_poisson_lebesgue(t, x_grid, y_grid, matrix=True))
            comp = comparand_gradient(t, x_grid[:, None], y_grid[None, :])
            floor = 1e3 * kernels.series_tol
        elif lemma == "heat-gauss":
            k = kernels.heat_mu(t, x_grid, y_grid, matrix=True)
            comp = comparand_heat_gauss(nu, t, x_grid[:, None], y_grid[None, :])
            floor = 1e3 * kernels.series_tol
        elif lemma == "heat-large-t":
            tol = kernels.series_tol * math.exp(-t * kernels.lam1**2)
            k = kernels.heat_mu(t, x_grid, y_grid, matrix=True, tol=tol)
            comp = comparand_heat_large(kernels.lam1, t,
                                        x_grid[:, None], y_grid[None, :])
            floor = 1e3 * tol
        elif lemma == "bessel-heat-gauss":
            k = bessel_heat(nu, t, x_grid[:, None], y_grid[None, :])
            comp = comparand_bessel_heat_gauss(nu, t, x_grid[:, None], y_grid[None, :])
        elif lemma == "dy-bessel-heat":
            k = np.abs(dy_bessel_heat(nu, t, x_grid[:, None], y_grid[None, :]))
            comp = comparand_dy_bessel_heat(nu, t, x_grid[:, None], y_grid[None, :])
        else:
            raise ValueError(f"unknown estimate id {lemma!r}")
        scan.update(t, x_grid, y_grid, np.asarray(k, dtype=float), comp, floor)
    return scan


def check_sharp_estimate(lemma: str, kernels: UnitIntervalKernels | None = None,
                         nu: float | None = None, n_t: int = 14,
                         n_space: int = 18, drift_tol: float = 0.10) -> EstimateReport:
    """Measure one sharp estimate over a deterministic (t, x, y) box.

    Unit-interval estimates need `kernels`; half-line ones only need `nu`.
    Two-sided estimates must have both ratio extremes finite and stable under
    refinement; one-sided (upper) estimates only constrain the maximum, but
    the minimum is still reported for the record.
    """
    if lemma not in LEMMA_IDS:
        raise ValueError(f"unknown estimate id {lemma!r}; choose from {LEMMA_IDS}")
    halfline = lemma in ("bessel-heat-gauss", "dy-bessel-heat")
    if halfline:
        if nu is None:
            raise ValueError("half-line estimates need nu")
        x_grid = _halfline_space_grid(n_space)
        t_grid = np.geomspace(1e-4, 10.0, n_t)
    else:
        if kernels is None:
            raise ValueError(f"estimate {lemma!r} needs a UnitIntervalKernels instance")
        nu = kernels.nu
        x_grid = _unit_space_grid(n_space)
        if lemma in ("sharp-P", "sharp-Pmu"):
            floor = kernels.poisson_floor()
            t_grid = np.concatenate([np.geomspace(max(floor, 1e-4), 1.0, n_t),
                                     np.geomspace(1.25, 3.0, max(n_t // 2, 4))])
        elif lemma in ("grad-P", "dy-P"):
            floor = kernels.derivative_floor(x_grid[0], x_grid[0])
            t_grid = np.geomspace(max(floor, 1e-4), 1.0, n_t)
        elif lemma == "heat-gauss":
            floor = kernels.heat_floor()
            t_grid = np.geomspace(max(floor, 1e-6), 1.0, n_t)
        else:  # heat-large-t
            t_grid = np.geomspace(1.0, 6.0, n_t)
    y_grid = x_grid.copy()

    base = _scan_lemma(lemma, kernels, nu, t_grid, x_grid, y_grid)
    fine = _scan_lemma(lemma, kernels, nu, _refine_geometric(t_grid),
                       _refine_linear(x_grid), _refine_linear(y_grid))

    # the refined grid is a superset, so extremes only widen
    drift_max = fine.rmax / base.rmax - 1.0 if base.rmax > 0 else math.inf
    drift_min = base.rmin / fine.rmin - 1.0 if fine.rmin > 0 else math.inf
    two_sided = _TWO_SIDED[lemma]
    ok = math.isfinite(fine.rmax) and abs(drift_max) <= drift_tol
    if two_sided:
        ok = ok and fine.rmin > 0 and abs(drift_min) <= drift_tol
    return EstimateReport(
        lemma=lemma, kind="two_sided" if two_sided else "upper", nu=nu,
        t_range=(float(t_grid[0]), float(t_grid[-1])),
        n_samples=base.count + fine.count, n_masked=base.masked + fine.masked,
        ratio_min=base.rmin, ratio_max=base.rmax,
        refined_min=fine.rmin, refined_max=fine.rmax,
        drift_min=drift_min, drift_max=drift_max, passed=bool(ok),
        witness_min=base.wmin, witness_max=base.wmax)


def check_all_estimates(kernels: UnitIntervalKernels,
                        drift_tol: float = 0.10) -> dict:
    """Run every estimate id at the basis order; returns {id: EstimateReport}."""
    out = {}
    for lemma in LEMMA_IDS:
        out[lemma] = check_sharp_estimate(lemma, kernels=kernels, nu=kernels.nu,
                                          drift_tol=drift_tol)
    return out
