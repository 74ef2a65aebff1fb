"""Semigroups applied to functions, maximal operators, and comparison tools.

The semigroup action on a sampled function goes through its expansion in the
eigenbasis: the coefficients are computed once by quadrature (truncated at the
grid's resolvable frequency), and each time slice is a weighted synthesis.
This route stays accurate for every t > 0, unlike pointwise kernel series
which need small-time certification.

The module also contains:

  * the discretized maximal operator (sup over a geometric TimeGrid, with the
    split at t = 1 separating the local and global regimes),
  * the Uchiyama condition checker: on-diagonal lower bound, size bound with
    exponent -2, and a Lipschitz bound on admissible triples, for kernel
    families on intervals of (0, 1) and for the time-reparametrized half-line
    Poisson kernel,
  * Duhamel residuals comparing the unit-interval heat semigroup with the
    half-line one through a smooth cutoff, at operator and at kernel level,
  * the sup-t comparison of the two Poisson semigroups on functions living
    near the origin, and the commutator kernels built from a partition of
    unity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .basis import EigenBasis, coefficients
from .covers import DyadicCover, Interval, FAMILY_ONE_END, FAMILY_TWO_END
from .errors import NumericsError
from .kernels import UnitIntervalKernels, bessel_heat, bessel_poisson, dy_bessel_heat
from .quadrature import (SampledFunction, grid_on_interval,
                         MEASURE_LEBESGUE, MEASURE_MU)


# ---------------------------------------------------------------------------
# time grids


@dataclass(frozen=True)
class TimeGrid:
    values: np.ndarray
    split: float = 1.0

    def __post_init__(self):
        v = self.values
        if v.ndim != 1 or len(v) < 2 or np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("time grid must be increasing and positive")
        below = v[v < 1.0]
        if len(below) > 1:
            r = np.max(below[1:] / below[:-1])
            if r > 1.2500001:
                raise ValueError(f"grid ratio {r:.4f} exceeds 1.25 below t=1")
        self.values.setflags(write=False)

    @classmethod
    def build(cls, t_min: float = 1e-6, t_max: float = 10.0,
              ratio: float = 1.25, split: float = 1.0) -> "TimeGrid":
        if not (0 < t_min < split < t_max):
            raise ValueError("need t_min < split < t_max")
        n = int(math.ceil(math.log(t_max / t_min) / math.log(ratio))) + 1
        vals = np.geomspace(t_min, t_max, n)
        vals = np.unique(np.concatenate([vals, [split]]))
        return cls(values=vals, split=split)

    def refine(self) -> "TimeGrid":
        """Insert geometric midpoints; the result contains this grid."""
        mids = np.sqrt(self.values[:-1] * self.values[1:])
        return TimeGrid(values=np.unique(np.concatenate([self.values, mids])),
                        split=self.split)

    def restricted(self, lo: float, hi: float) -> "TimeGrid":
        mask = (self.values >= lo) & (self.values <= hi)
        if np.sum(mask) < 2:
            raise ValueError(f"restriction to [{lo}, {hi}] leaves fewer than 2 nodes")
        return TimeGrid(values=self.values[mask], split=self.split)

    def __len__(self) -> int:
        return len(self.values)


# ---------------------------------------------------------------------------
# spectral application of the semigroups


_SEMIGROUP_WEIGHTS = {
    "poisson": lambda lam, t: np.exp(-t * lam),
    "heat": lambda lam, t: np.exp(-t * lam**2),
}


class SpectralExpansion:
    """Eigen-coefficients of a sampled function, reusable across times.

    The measure tag picks the system: mu-tagged functions expand in phi
    (weighted Poisson/heat), Lebesgue-tagged ones in psi."""

    def __init__(self, f: SampledFunction, basis: EigenBasis):
        self.basis = basis
        self.measure = f.measure
        self.system = "phi" if f.measure == MEASURE_MU else "psi"
        c = coefficients(f, basis)
        nz = np.nonzero(c)[0]
        self.n_active = int(nz[-1]) + 1 if len(nz) else 1
        self.coeffs = c[:self.n_active]

    def _matrix(self, x) -> np.ndarray:
        if self.system == "phi":
            return self.basis.phi_matrix(x, self.n_active)
        return self.basis.psi_matrix(x, self.n_active)

    def at_time(self, t: float, x, kind: str = "poisson") -> np.ndarray:
        return self.sweep([t], x, kind)[0]

    def sweep(self, t_values, x, kind: str = "poisson") -> np.ndarray:
        """Rows: the semigroup at each t evaluated on x (shape (nt, nx))."""
        wfun = _SEMIGROUP_WEIGHTS[kind]
        lam = self.basis.table.zeros[:self.n_active]
        mat = self._matrix(np.atleast_1d(np.asarray(x, dtype=float)))
        out = np.empty((len(t_values), mat.shape[1]))
        for i, t in enumerate(t_values):
            out[i] = (self.coeffs * wfun(lam, float(t))) @ mat
        return out


def apply_poisson(basis: EigenBasis, f: SampledFunction, t: float) -> SampledFunction:
    """One Poisson time slice of f, sampled back on f's own grid."""
    if t <= 0:
        raise ValueError("time must be positive")
    vals = SpectralExpansion(f, basis).at_time(t, f.nodes, "poisson")
    return SampledFunction(grid=f.grid, values=vals)


def apply_heat(basis: EigenBasis, f: SampledFunction, t: float) -> SampledFunction:
    if t <= 0:
        raise ValueError("time must be positive")
    vals = SpectralExpansion(f, basis).at_time(t, f.nodes, "heat")
    return SampledFunction(grid=f.grid, values=vals)


def apply_halfline(nu: float, f: SampledFunction, t: float, x,
                   kind: str = "poisson") -> np.ndarray:
    """Half-line semigroups applied by kernel quadrature against f's grid."""
    if f.measure != MEASURE_MU:
        raise ValueError("half-line semigroups act on mu-tagged functions")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if kind == "poisson":
        kmat = bessel_poisson(nu, t, x[:, None], f.nodes[None, :])
    elif kind == "heat":
        kmat = bessel_heat(nu, t, x[:, None], f.nodes[None, :])
    else:
        raise ValueError(f"unknown half-line semigroup {kind!r}")
    return kmat @ (f.grid.weights * f.values)


# ---------------------------------------------------------------------------
# maximal operators


@dataclass
class MaximalResult:
    x: np.ndarray
    values: np.ndarray        # sup over the whole grid
    argmax_t: np.ndarray
    small: np.ndarray         # sup over t <= split
    large: np.ndarray         # sup over t >= split
    grid: TimeGrid

    def l1_norm(self, weights: np.ndarray) -> float:
        return float(weights @ self.values)


def maximal_function(basis: EigenBasis, f: SampledFunction,
                     grid: TimeGrid, x=None) -> MaximalResult:
    """Discretized sup over t of |Poisson of f| with per-node argmax times."""
    x = f.nodes if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    sweep = np.abs(SpectralExpansion(f, basis).sweep(grid.values, x, "poisson"))
    idx = np.argmax(sweep, axis=0)
    lo = grid.values <= grid.split
    hi = grid.values >= grid.split
    zeros = np.zeros(sweep.shape[1])
    return MaximalResult(
        x=x, values=sweep[idx, np.arange(sweep.shape[1])],
        argmax_t=grid.values[idx],
        small=sweep[lo].max(axis=0) if lo.any() else zeros,
        large=sweep[hi].max(axis=0) if hi.any() else zeros, grid=grid)


def split_maximal(basis: EigenBasis, f: SampledFunction,
                  grid: TimeGrid, x=None):
    """(sup_{t<=1}, sup_{t>=1}) pair; their max is the full maximal function."""
    res = maximal_function(basis, f, grid, x)
    return res.small, res.large


# ---------------------------------------------------------------------------
# Uchiyama conditions


def uchiyama_time(nu: float, r, x):
    """Radius-to-time reparametrization: r x^(-2nu-1) while r <= x^(2nu+2),
    the (2nu+2)-th root of r beyond; continuous at the branch point."""
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    p = 2.0 * nu + 2.0
    return np.where(r <= x**p, r * x ** (-(2.0 * nu + 1.0)), r ** (1.0 / p))


def uchiyama_kernel(nu: float, r: float, x, y, sigma_total: float | None = None):
    """Half-line Poisson kernel at the reparametrized time t(x, r)."""
    if sigma_total is not None and not (0 < r < sigma_total):
        raise ValueError(f"radius {r} outside (0, {sigma_total})")
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                 np.asarray(y, dtype=float))
    scalar = xb.ndim == 0
    xf = np.atleast_1d(xb).ravel()
    yf = np.atleast_1d(yb).ravel()
    tf = np.atleast_1d(uchiyama_time(nu, float(r), xf))
    out = np.empty_like(xf)
    # the time depends on x only, so group the evaluations by time value
    for tv in np.unique(tf):
        m = tf == tv
        out[m] = np.atleast_1d(bessel_poisson(nu, float(tv), xf[m], yf[m]))
    return float(out[0]) if scalar else out.reshape(xb.shape)


@dataclass(frozen=True)
class HomogeneousSpace:
    """Interval space (X, d, sigma) with Euclidean or measure-cdf distance."""
    interval: Interval
    metric: str            # "euclidean" or "mu_cdf"
    measure: str           # MEASURE_MU or MEASURE_LEBESGUE
    nu: float

    def _cdf(self, x):
        p = 2.0 * self.nu + 2.0
        return np.asarray(x, dtype=float) ** p / p

    def _quantile(self, m):
        p = 2.0 * self.nu + 2.0
        return np.maximum(np.asarray(m, dtype=float) * p, 0.0) ** (1.0 / p)

    def distance(self, u, v):
        if self.metric == "euclidean":
            return np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float))
        return np.abs(self._cdf(u) - self._cdf(v))

    def sigma_total(self) -> float:
        if self.measure == MEASURE_MU:
            return self.interval.mu_measure(self.nu)
        return self.interval.length

    def sigma_interval(self, a: float, b: float) -> float:
        a = max(a, self.interval.a)
        b = min(b, self.interval.b)
        if b <= a:
            return 0.0
        if self.measure == MEASURE_MU:
            return Interval(a, b).mu_measure(self.nu)
        return b - a

    def ball_sigma(self, x, r):
        """sigma(B_d(x, r) intersected with the interval)."""
        x = np.asarray(x, dtype=float)
        r = np.asarray(r, dtype=float)
        if self.metric == "euclidean":
            lo, hi = x - r, x + r
        else:
            m = self._cdf(x)
            lo, hi = self._quantile(m - r), self._quantile(m + r)
        lo = np.maximum(lo, self.interval.a)
        hi = np.minimum(hi, self.interval.b)
        width = np.maximum(hi - lo, 0.0)
        if self.measure == MEASURE_LEBESGUE:
            return width
        p = 2.0 * self.nu + 2.0
        return np.where(width > 0, (hi**p - np.minimum(lo, hi) ** p) / p, 0.0)

    def shift(self, y, delta, sign: int):
        """A point at metric distance delta from y (before clipping into X)."""
        if self.metric == "euclidean":
            z = y + sign * delta
        else:
            z = self._quantile(self._cdf(y) + sign * delta)
        return np.clip(z, self.interval.a + 1e-12, self.interval.b - 1e-12)

    def inner_points(self, n: int, margin: float = 0.02) -> np.ndarray:
        a, b = self.interval.a, self.interval.b
        pad = margin * (b - a)
        return np.linspace(a + pad, b - pad, n)


@dataclass
class UchiyamaReport:
    label: str
    r_range: tuple
    a_ball: float
    a_lower: float
    a_size: float
    a_lipschitz: float
    n_samples: int
    min_kernel: float

    @property
    def a_total(self) -> float:
        return max(self.a_ball, self.a_lower, self.a_size, self.a_lipschitz)

    def to_dict(self) -> dict:
        return {"label": self.label, "r_range": list(self.r_range),
                "A_ball": self.a_ball, "A_lower": self.a_lower,
                "A_size": self.a_size, "A_lipschitz": self.a_lipschitz,
                "A": self.a_total, "n_samples": self.n_samples,
                "min_kernel": self.min_kernel}


def check_uchiyama_conditions(kernel_fn, space: HomogeneousSpace,
                              r_values, label: str,
                              n_space: int = 12) -> UchiyamaReport:
    """Empirical constants for the three kernel conditions on one space.

    kernel_fn(r, x, y) evaluates the family member pointwise (broadcasting).
    The Lipschitz constant is measured only on admissible triples, i.e.
    d(y, z) <= (r + d(x, y)) / (4A) with A taken from the first two
    conditions.
    """
    pts = space.inner_points(n_space)
    r_values = np.asarray(r_values, dtype=float)
    a_ball = 0.0
    for r in r_values:
        s = space.ball_sigma(pts, r)
        if np.any(s <= 0):
            raise NumericsError("uchiyama", f"empty ball at r={r}")
        a_ball = max(a_ball, float(np.max(s / r)), float(np.max(r / s)))

    a_lower = 0.0
    a_size = 0.0
    min_kernel = math.inf
    n_samples = 0
    xg, yg = np.meshgrid(pts, pts, indexing="ij")
    for r in r_values:
        diag = np.asarray(kernel_fn(float(r), pts, pts))
        if np.any(diag <= 0):
            raise NumericsError("uchiyama", f"non-positive diagonal at r={r}")
        a_lower = max(a_lower, float(np.max(1.0 / (r * diag))))
        kmat = np.asarray(kernel_fn(float(r), xg, yg))
        n_samples += kmat.size
        min_kernel = min(min_kernel, float(np.min(kmat)))
        d = space.distance(xg, yg)
        a_size = max(a_size, float(np.max(kmat * r * (1.0 + d / r) ** 2)))

    a0 = max(a_ball, a_lower, a_size)
    a_lip = 0.0
    for r in r_values:
        d = space.distance(xg, yg)
        adm = (r + d) / (4.0 * a0)
        base = np.asarray(kernel_fn(float(r), xg, yg))
        for frac in (0.35, 0.9):
            for sign in (+1, -1):
                z = space.shift(yg, frac * adm, sign)
                dyz = space.distance(yg, z)
                ok = (dyz > 1e-13) & (dyz <= adm)
                if not np.any(ok):
                    continue
                shifted = np.asarray(kernel_fn(float(r), xg, z))
                n_samples += int(np.sum(ok))
                num = np.abs(base - shifted) * r**2 * (1.0 + d / r) ** 2
                val = np.where(ok, num / np.where(ok, dyz, 1.0), 0.0)
                a_lip = max(a_lip, float(np.max(val)))
    return UchiyamaReport(label=label,
                          r_range=(float(r_values[0]), float(r_values[-1])),
                          a_ball=a_ball, a_lower=a_lower, a_size=a_size,
                          a_lipschitz=a_lip, n_samples=n_samples,
                          min_kernel=min_kernel)


def uchiyama_families(kernels: UnitIntervalKernels, zeta: float = 0.02,
                      unit_js=(1, 2, 3, 4, 5, 6),
                      flat_js=(-5, -4, -3, -2, -1, 1, 2, 3, 4, 5),
                      n_r: int = 7, n_space: int = 12) -> list:
    """Reports for the three kernel families of the H1 equivalence proofs.

    Series-kernel families need small times, so the radius grid starts at the
    certified series floor; the report records the actual range used."""
    nu = kernels.nu
    reports = []
    one_end = DyadicCover(FAMILY_ONE_END, zeta=zeta)
    two_end = DyadicCover(FAMILY_TWO_END, zeta=zeta)
    floor_p = kernels.poisson_floor()

    for j in unit_js:
        iv = one_end.starred(j, 2)
        space = HomogeneousSpace(iv, "euclidean", MEASURE_MU, nu)
        cap = 0.9 * space.sigma_total()
        lo = max(1.02 * floor_p, cap / 64.0)
        if lo >= cap:
            raise NumericsError(
                "uchiyama", f"series floor {floor_p:.2e} too high for piece {j}; "
                "build the basis with a larger zero table")
        r_vals = np.geomspace(lo, cap, n_r)
        fn = lambda r, x, y: kernels.poisson_mu(r, x, y)
        reports.append(check_uchiyama_conditions(
            fn, space, r_vals, label=f"unit-mu-{j}", n_space=n_space))

    for j in flat_js:
        iv = two_end.starred(j, 2)
        space = HomogeneousSpace(iv, "euclidean", MEASURE_LEBESGUE, nu)
        cap = 0.9 * space.sigma_total()
        lo = max(1.02 * floor_p, cap / 64.0)
        if lo >= cap:
            raise NumericsError(
                "uchiyama", f"series floor {floor_p:.2e} too high for piece {j}; "
                "build the basis with a larger zero table")
        r_vals = np.geomspace(lo, cap, n_r)
        fn = lambda r, x, y: kernels.poisson_lebesgue(r, x, y)
        reports.append(check_uchiyama_conditions(
            fn, space, r_vals, label=f"unit-flat-{j}", n_space=n_space))

    iv0 = one_end.starred(0, 2)
    space0 = HomogeneousSpace(iv0, "mu_cdf", MEASURE_MU, nu)
    cap0 = 0.9 * space0.sigma_total()
    r_vals = np.geomspace(cap0 / 4096.0, cap0, n_r + 3)
    fn0 = lambda r, x, y: uchiyama_kernel(nu, r, x, y)
    reports.append(check_uchiyama_conditions(
        fn0, space0, r_vals, label="halfline-0", n_space=n_space))
    return reports


# ---------------------------------------------------------------------------
# Duhamel residuals


def _smoothstep(u):
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (6.0 * u**2 - 15.0 * u + 10.0)


def _smoothstep_d1(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 30.0 * u**2 * (u - 1.0) ** 2, 0.0)


def _smoothstep_d2(u):
    inside = (u > 0.0) & (u < 1.0)
    u = np.clip(u, 0.0, 1.0)
    return np.where(inside, 60.0 * u * (2.0 * u - 1.0) * (u - 1.0), 0.0)


@dataclass(frozen=True)
class CutoffRho:
    """Smooth cutoff: 1 on (0, inner], 0 on [outer, infinity), a degree-5
    smoothstep ramp in between (two continuous derivatives)."""
    inner: float
    outer: float

    @classmethod
    def build(cls, zeta: float = 0.02) -> "CutoffRho":
        cover = DyadicCover(FAMILY_ONE_END, zeta=zeta)
        return cls(inner=cover.starred(0, 2).b, outer=cover.starred(0, 3).b)

    def _u(self, x):
        return (self.outer - np.asarray(x, dtype=float)) / (self.outer - self.inner)

    def value(self, x):
        return _smoothstep(self._u(x))

    def derivative(self, x):
        return -_smoothstep_d1(self._u(x)) / (self.outer - self.inner)

    def second_derivative(self, x):
        return _smoothstep_d2(self._u(x)) / (self.outer - self.inner) ** 2


def _s_panel_nodes(t: float, n_mid: int = 24, n_end: int = 24):
    """Quadrature nodes/weights for int_0^t ds with square-root substitutions
    on the endpoint panels (integrands may have boundary layers there)."""
    breaks = [0.01 * t, 0.1 * t, 0.5 * t, 0.9 * t, 0.99 * t]
    nodes, weights = [], []
    z, w = np.polynomial.legendre.leggauss(n_end)
    # s = v^2 on [0, 0.01 t]
    vmax = math.sqrt(breaks[0])
    v = 0.5 * vmax * (z + 1.0)
    nodes.append(v**2)
    weights.append(0.5 * vmax * w * 2.0 * v)
    zm, wm = np.polynomial.legendre.leggauss(n_mid)
    for a, b in zip(breaks[:-1], breaks[1:]):
        nodes.append(0.5 * (b - a) * zm + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * wm)
    # t - s = v^2 on [0.99 t, t]
    vmax = math.sqrt(t - breaks[-1])
    v = 0.5 * vmax * (z + 1.0)
    nodes.append(t - v**2)
    weights.append(0.5 * vmax * w * 2.0 * v)
    return np.concatenate(nodes), np.concatenate(weights)


def duhamel_residuals(basis: EigenBasis, rho: CutoffRho, f: SampledFunction,
                      t: float, x, n_z: int = 48,
                      n_mid: int = 24) -> tuple:
    """The three residual terms of the heat-semigroup comparison at time t.

    R1 pairs the half-line kernel with the second derivative of the cutoff,
    R2 (with its factor 2) pairs the kernel's derivative with the first
    derivative, and R3 carries the first-order drift (2nu+1)/z. All three
    integrate over the ramp of rho in space and over (0, t) in time with
    endpoint-regularized panels. Requires supp f inside the region where
    rho = 1."""
    if not 0 < t < 1:
        raise ValueError("duhamel residuals are set up for 0 < t < 1")
    if f.measure != MEASURE_MU:
        raise ValueError("duhamel residuals need a mu-tagged function")
    if np.any((f.nodes >= rho.inner) & (np.abs(f.values) > 0)):
        raise ValueError("f must be supported where the cutoff equals 1")
    nu = basis.nu
    x = np.atleast_1d(np.asarray(x, dtype=float))
    exp = SpectralExpansion(f, basis)

    zg = grid_on_interval(rho.inner, rho.outer, n_z, MEASURE_MU, nu)
    znodes, zw = zg.nodes, zg.weights
    rp = rho.derivative(znodes)
    rpp = rho.second_derivative(znodes)
    drift = (2.0 * nu + 1.0) / znodes * rp
    heat_rows = exp._matrix(znodes)   # (n_active, n_z), reused across s
    lam = basis.table.zeros[:exp.n_active]

    s_nodes, s_weights = _s_panel_nodes(t, n_mid=n_mid)
    r1 = np.zeros(len(x))
    r2 = np.zeros(len(x))
    r3 = np.zeros(len(x))
    for s, w in zip(s_nodes, s_weights):
        g = (exp.coeffs * np.exp(-s * lam**2)) @ heat_rows   # heat of f at s
        big = bessel_heat(nu, t - s, x[:, None], znodes[None, :])
        dbig = dy_bessel_heat(nu, t - s, x[:, None], znodes[None, :])
        r1 += w * (big @ (zw * rpp * g))
        r2 += 2.0 * w * (dbig @ (zw * rp * g))
        r3 += w * (big @ (zw * drift * g))
    return r1, r2, r3


def duhamel_closure(basis: EigenBasis, rho: CutoffRho, f: SampledFunction,
                    t: float, x, **kw) -> dict:
    """Compare both sides of the semigroup-difference identity at time t.

    Left side: (cutoff times unit-interval heat of f) minus (half-line heat
    of f), evaluated spectrally and by kernel quadrature respectively.  Right
    side: R1 + R2 + R3."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    exp = SpectralExpansion(f, basis)
    lhs = rho.value(x) * exp.at_time(t, x, "heat") - \
        apply_halfline(basis.nu, f, t, x, kind="heat")
    r1, r2, r3 = duhamel_residuals(basis, rho, f, t, x, **kw)
    rhs = r1 + r2 + r3
    return {"x": x, "lhs": lhs, "rhs": rhs, "r1": r1, "r2": r2, "r3": r3,
            "max_error": float(np.max(np.abs(lhs - rhs)))}


def duhamel_residual_kernels(basis: EigenBasis,
                             kernels: UnitIntervalKernels, rho: CutoffRho,
                             t: float, x, y, n_z: int = 48,
                             n_mid: int = 24) -> tuple:
    """Pointwise residual kernels R[j](x, y) on a grid, for the uniform
    boundedness check.

    The inner factor is the unit-interval heat kernel at time s; below the
    certified series floor it is replaced by the half-line heat kernel, whose
    deviation (a boundary reflection term) is exponentially negligible at
    those times for arguments left of the ramp."""
    nu = basis.nu
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    zg = grid_on_interval(rho.inner, rho.outer, n_z, MEASURE_MU, nu)
    znodes, zw = zg.nodes, zg.weights
    rp = rho.derivative(znodes)
    rpp = rho.second_derivative(znodes)
    drift = (2.0 * nu + 1.0) / znodes * rp
    floor = kernels.heat_floor()

    s_nodes, s_weights = _s_panel_nodes(t, n_mid=n_mid)
    r1 = np.zeros((len(x), len(y)))
    r2 = np.zeros((len(x), len(y)))
    r3 = np.zeros((len(x), len(y)))
    for s, w in zip(s_nodes, s_weights):
        if s > 1.05 * floor:
            inner = kernels.heat_mu(s, znodes, y, matrix=True)
        else:
            inner = bessel_heat(nu, s, znodes[:, None], y[None, :])
        big = bessel_heat(nu, t - s, x[:, None], znodes[None, :])
        dbig = dy_bessel_heat(nu, t - s, x[:, None], znodes[None, :])
        r1 += w * (big * (zw * rpp)[None, :]) @ inner
        r2 += 2.0 * w * (dbig * (zw * rp)[None, :]) @ inner
        r3 += w * (big * (zw * drift)[None, :]) @ inner
    return r1, r2, r3


# ---------------------------------------------------------------------------
# semigroup comparison near the origin


def compare_semigroups(basis: EigenBasis, fs, t_grid=None,
                       n_x: int = 48, zeta: float = 0.02) -> list:
    """Ratio ||sup_t |halfline Poisson - unit Poisson| of f||_L1 / ||f||_L1
    on the origin piece, for a batch of mu-tagged inputs sharing one grid.

    The half-line kernel matrices are built once per time and reused across
    the batch."""
    if isinstance(fs, SampledFunction):
        fs = [fs]
    cover = DyadicCover(FAMILY_ONE_END, zeta=zeta)
    edge = cover.starred(0, 2).b
    if t_grid is None:
        t_grid = np.geomspace(1e-3, 0.999, 20)
    xg = grid_on_interval(1e-9, edge, n_x, MEASURE_MU, basis.nu)
    xw, xn = xg.weights, xg.nodes

    grid0 = fs[0].grid
    exps = []
    for f in fs:
        if f.measure != MEASURE_MU:
            raise ValueError("comparison inputs must be mu-tagged")
        if f.grid is not grid0:
            raise ValueError("batch inputs must share one grid")
        if np.any((f.nodes >= edge) & (np.abs(f.values) > 0)):
            raise ValueError("inputs must be supported in the origin piece")
        exps.append(SpectralExpansion(f, basis))

    sup = np.zeros((len(fs), len(xn)))
    for t in t_grid:
        kmat = bessel_poisson(basis.nu, float(t), xn[:, None], grid0.nodes[None, :])
        for i, (f, exp) in enumerate(zip(fs, exps)):
            half = kmat @ (grid0.weights * f.values)
            unit = exp.at_time(float(t), xn, "poisson")
            sup[i] = np.maximum(sup[i], np.abs(half - unit))

    out = []
    for i, f in enumerate(fs):
        fnorm = float(f.grid.weights @ np.abs(f.values))
        out.append({"sup_norm_l1": float(xw @ sup[i]), "f_norm_l1": fnorm,
                    "ratio": float(xw @ sup[i]) / fnorm if fnorm > 0 else 0.0})
    return out


# ---------------------------------------------------------------------------
# commutator kernels


def commutator_matrix(kernels: UnitIntervalKernels, members, x, y,
                      n_t: int = 10) -> np.ndarray:
    """Sum over partition members of sup_{t < t_cap} |(eta(x)-eta(y)) K_t(x,y)|.

    `members` is an iterable of (eta callable, t_cap, family) with family
    "mu" or "lebesgue"; the time sup runs over a geometric grid from the
    certified series floor (the reported value is grid-limited below that)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    floor = kernels.poisson_floor()
    total = np.zeros((len(x), len(y)))
    for eta, t_cap, family in members:
        diff = np.abs(eta(x)[:, None] - eta(y)[None, :])
        if not np.any(diff > 0):
            continue
        lo = min(max(floor * 1.02, t_cap / 256.0), 0.9 * t_cap)
        if lo <= floor:
            raise NumericsError(
                "commutator", f"series floor {floor:.2e} too high for cap {t_cap:.2e}")
        best = np.zeros_like(total)
        for t in np.geomspace(lo, t_cap, n_t):
            if family == "mu":
                k = kernels.poisson_mu(float(t), x, y, matrix=True)
            else:
                k = kernels.poisson_lebesgue(float(t), x, y, matrix=True)
            best = np.maximum(best, np.abs(k))
        total += diff * best
    return total
