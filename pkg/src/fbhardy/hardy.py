"""Atoms for the two atomic Hardy spaces on (0, 1), and the decomposition
pipeline that produces them.

Atoms are represented exactly as piecewise-linear functions, so sup norms,
integrals, and cancellation defects are computed in closed form rather than
by quadrature. There are two families, tagged by the measure: the weighted
family uses the measure x^(2 nu + 1) dx and the dyadic cover accumulating at
the endpoint 1; the flat family uses Lebesgue measure and the two-end cover.

A cancellative atom is supported in an interval I inside (0, 1), has sup norm
at most sigma(I)^(-1), and integrates to zero; a special atom is the
normalized indicator of one cover interval. The splitting identities
implemented here (two-atom split, wide-atom split across cover cells, bump
split into a cancellative part plus a special multiple) are the constructive
steps that turn an arbitrary localized piece into a combination of valid
atoms with controlled coefficient mass.

The local decomposition on an enlarged cover piece is a Haar cascade on
measure-median cells: each cell splits where the measure is halved, the
detail coefficient is the difference of the two half-cell integrals, and the
two-bar detail function is itself a valid atom. Cells are refined adaptively
(a cell stays active while it contains a breakpoint of the input or its
linear-oscillation bound exceeds the cut), so piecewise inputs terminate with
a handful of atoms per level instead of 2^d; every cell that stops closes
with its exact remainder, itself a valid atom after normalization, so the
finite expansion reproduces the input to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covers import DyadicCover, Interval, FAMILY_ONE_END, FAMILY_TWO_END
from .errors import NumericsError
from .quadrature import SampledFunction, MEASURE_LEBESGUE, MEASURE_MU

KIND_CANCELLATIVE = "cancellative"
KIND_SPECIAL = "special"

_FAMILY_OF_MEASURE = {MEASURE_MU: FAMILY_ONE_END,
                      MEASURE_LEBESGUE: FAMILY_TWO_END}


def _power(measure: str, nu: float) -> float:
    return 2.0 * nu + 2.0 if measure == MEASURE_MU else 1.0


def _cdf(x, measure: str, nu: float):
    p = _power(measure, nu)
    return np.asarray(x, dtype=float) ** p / p


def _quantile(m, measure: str, nu: float):
    p = _power(measure, nu)
    return np.maximum(p * np.asarray(m, dtype=float), 0.0) ** (1.0 / p)


def sigma_interval(a: float, b: float, measure: str, nu: float) -> float:
    if b <= a:
        return 0.0
    return float(_cdf(b, measure, nu) - _cdf(a, measure, nu))


# ---------------------------------------------------------------------------
# exact piecewise-linear functions


@dataclass(frozen=True)
class PiecewiseLinear:
    """slope * x + intercept on [breaks[i], breaks[i+1]), zero outside."""

    breaks: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breaks, dtype=float)
        if b.ndim != 1 or len(b) < 2 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must be strictly increasing, length >= 2")
        if len(self.slopes) != len(b) - 1 or len(self.intercepts) != len(b) - 1:
            raise ValueError("one slope and intercept per piece")
        for arr in (self.breaks, self.slopes, self.intercepts):
            np.asarray(arr).setflags(write=False)

    # -- constructors

    @classmethod
    def constant(cls, a: float, b: float, value: float) -> "PiecewiseLinear":
        return cls(np.array([a, b]), np.zeros(1), np.array([float(value)]))

    @classmethod
    def from_breaks_levels(cls, breaks, levels) -> "PiecewiseLinear":
        breaks = np.asarray(breaks, dtype=float)
        levels = np.asarray(levels, dtype=float)
        return cls(breaks, np.zeros(len(levels)), levels)

    @classmethod
    def from_node_values(cls, nodes, values) -> "PiecewiseLinear":
        """Continuous interpolant through (nodes, values)."""
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        slopes = np.diff(values) / np.diff(nodes)
        intercepts = values[:-1] - slopes * nodes[:-1]
        return cls(nodes, slopes, intercepts)

    @classmethod
    def tent(cls, a: float, b: float, height: float = 1.0) -> "PiecewiseLinear":
        c = 0.5 * (a + b)
        s1 = height / (c - a)
        s2 = -height / (b - c)
        return cls(np.array([a, c, b]), np.array([s1, s2]),
                   np.array([-s1 * a, -s2 * b]))

    # -- basic queries

    @property
    def support(self) -> Interval:
        return Interval(float(self.breaks[0]), float(self.breaks[-1]))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        inside = (idx >= 0) & (x <= self.breaks[-1])
        idx = np.clip(idx, 0, len(self.slopes) - 1)
        out = np.where(inside, self.slopes[idx] * x + self.intercepts[idx], 0.0)
        return float(out) if out.ndim == 0 else out

    def sup_norm(self) -> float:
        left = self.slopes * self.breaks[:-1] + self.intercepts
        right = self.slopes * self.breaks[1:] + self.intercepts
        return float(np.max(np.abs(np.concatenate([left, right]))))

    # -- exact integrals

    def _antideriv(self, pts, measure: str, nu: float):
        """Integral of each piece's linear form against the measure density,
        evaluated as the antiderivative at pts (same piece index as pts)."""
        pts = np.asarray(pts, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, pts, side="right") - 1,
                      0, len(self.slopes) - 1)
        s, c = self.slopes[idx], self.intercepts[idx]
        p = _power(measure, nu)
        return s * pts ** (p + 1.0) / (p + 1.0) + c * pts**p / p

    def cumulative(self, pts, measure: str, nu: float):
        """Exact integral from the support's left end to each point."""
        pts = np.clip(np.asarray(pts, dtype=float), self.breaks[0], self.breaks[-1])
        p = _power(measure, nu)
        lo, hi = self.breaks[:-1], self.breaks[1:]
        piece_full = (self.slopes * (hi ** (p + 1) - lo ** (p + 1)) / (p + 1)
                      + self.intercepts * (hi**p - lo**p) / p)
        prefix = np.concatenate([[0.0], np.cumsum(piece_full)])
        idx = np.clip(np.searchsorted(self.breaks, pts, side="right") - 1,
                      0, len(self.slopes) - 1)
        start = self.breaks[idx]
        s, c = self.slopes[idx], self.intercepts[idx]
        partial = (s * (pts ** (p + 1) - start ** (p + 1)) / (p + 1)
                   + c * (pts**p - start**p) / p)
        return prefix[idx] + partial

    def integral(self, measure: str, nu: float) -> float:
        return float(self.cumulative(np.array([self.breaks[-1]]), measure, nu)[0])

    def integral_between(self, a, b, measure: str, nu: float):
        return self.cumulative(b, measure, nu) - self.cumulative(a, measure, nu)

    def l1_norm(self, measure: str, nu: float) -> float:
        """Exact integral of |f|: linear pieces are split at sign changes."""
        cuts = [self.breaks]
        s, c = self.slopes, self.intercepts
        with np.errstate(divide="ignore", invalid="ignore"):
            roots = -c / s
        inside = (s != 0) & (roots > self.breaks[:-1]) & (roots < self.breaks[1:])
        cuts.append(roots[inside])
        pts = np.unique(np.concatenate(cuts))
        vals = self.integral_between(pts[:-1], pts[1:], measure, nu)
        return float(np.sum(np.abs(vals)))

    # -- exact algebra

    def scaled(self, c: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.breaks.copy(), c * self.slopes,
                               c * self.intercepts)

    def restricted(self, a: float, b: float) -> "PiecewiseLinear | None":
        a = max(a, float(self.breaks[0]))
        b = min(b, float(self.breaks[-1]))
        if b <= a:
            return None
        pts = np.unique(np.concatenate([[a, b],
                                        self.breaks[(self.breaks > a)
                                                    & (self.breaks < b)]]))
        mids = 0.5 * (pts[:-1] + pts[1:])
        idx = np.clip(np.searchsorted(self.breaks, mids, side="right") - 1,
                      0, len(self.slopes) - 1)
        return PiecewiseLinear(pts, self.slopes[idx], self.intercepts[idx])

    def extended(self, a: float, b: float) -> "PiecewiseLinear":
        """Pad with zero pieces so the support becomes [a, b]."""
        out = self
        if a < self.breaks[0]:
            out = PiecewiseLinear(np.concatenate([[a], out.breaks]),
                                  np.concatenate([[0.0], out.slopes]),
                                  np.concatenate([[0.0], out.intercepts]))
        if b > out.breaks[-1]:
            out = PiecewiseLinear(np.concatenate([out.breaks, [b]]),
                                  np.concatenate([out.slopes, [0.0]]),
                                  np.concatenate([out.intercepts, [0.0]]))
        return out

    def plus_constant(self, c: float) -> "PiecewiseLinear":
        """Add c on the whole support (the support does not change)."""
        return PiecewiseLinear(self.breaks.copy(), self.slopes.copy(),
                               self.intercepts + c)


def chord_product(f: PiecewiseLinear, g: PiecewiseLinear,
                  points: np.ndarray) -> PiecewiseLinear:
    """Piecewise-linear chord of the product f * g on the given breakpoints.

    On each interval between consecutive points the product is replaced by
    the straight line through its one-sided endpoint values. When the points
    contain the breaks of both factors, the chords of a partition of unity
    against a fixed f sum exactly to f: linear interpolation is linear in
    the values."""
    points = np.asarray(points, dtype=float)
    mids = 0.5 * (points[:-1] + points[1:])

    def _piece(h, x):
        idx = np.clip(np.searchsorted(h.breaks, x, side="right") - 1,
                      0, len(h.slopes) - 1)
        outside = (x < h.breaks[0]) | (x > h.breaks[-1])
        s = np.where(outside, 0.0, h.slopes[idx])
        c = np.where(outside, 0.0, h.intercepts[idx])
        return s, c

    sf, cf = _piece(f, mids)
    sg, cg = _piece(g, mids)
    lo, hi = points[:-1], points[1:]
    v_lo = (sf * lo + cf) * (sg * lo + cg)
    v_hi = (sf * hi + cf) * (sg * hi + cg)
    slopes = (v_hi - v_lo) / (hi - lo)
    return PiecewiseLinear(points, slopes, v_lo - slopes * lo)


# ---------------------------------------------------------------------------
# atoms


@dataclass(frozen=True)
class Atom:
    fn: PiecewiseLinear
    measure: str
    nu: float
    kind: str
    label: str = ""

    @property
    def interval(self) -> Interval:
        return self.fn.support

    def sigma(self) -> float:
        return sigma_interval(self.interval.a, self.interval.b,
                              self.measure, self.nu)

    def evaluate(self, x):
        return self.fn.evaluate(x)

    def sup_norm(self) -> float:
        return self.fn.sup_norm()

    def cancellation(self) -> float:
        return self.fn.integral(self.measure, self.nu)

    def l1_norm(self) -> float:
        return self.fn.l1_norm(self.measure, self.nu)


def special_atom(cover: DyadicCover, j: int, nu: float, measure: str,
                 label: str = "") -> Atom:
    cell = cover.interval(j)
    s = sigma_interval(cell.a, cell.b, measure, nu)
    fn = PiecewiseLinear.constant(cell.a, cell.b, 1.0 / s)
    return Atom(fn=fn, measure=measure, nu=nu, kind=KIND_SPECIAL,
                label=label or f"special[{j}]")


def haar_atom(a: float, m: float, b: float, nu: float, measure: str,
              label: str = "") -> Atom:
    """Two-bar cancellative atom: opposite-sign constants balanced so the
    integral vanishes exactly, scaled so the sup norm is 1/sigma(a, b)."""
    s = sigma_interval(a, b, measure, nu)
    s1 = sigma_interval(a, m, measure, nu)
    s2 = sigma_interval(m, b, measure, nu)
    h1 = 1.0 / s
    h2 = h1 * s1 / s2
    scale = 1.0 / max(1.0, h2 * s)   # an off-median split peaks on the right
    fn = PiecewiseLinear.from_breaks_levels([a, m, b],
                                            [scale * h1, -scale * h2])
    return Atom(fn=fn, measure=measure, nu=nu, kind=KIND_CANCELLATIVE,
                label=label or "haar")


def validate_atom(atom: Atom, cover: DyadicCover | None = None,
                  cancel_tol: float = 1e-10, size_slack: float = 1e-9) -> dict:
    """Defect report for one atom; 'valid' aggregates the individual checks."""
    iv = atom.interval
    sigma = atom.sigma()
    sup = atom.sup_norm()
    report = {
        "kind": atom.kind,
        "measure": atom.measure,
        "label": atom.label,
        "support": (iv.a, iv.b),
        "support_ok": bool(0.0 <= iv.a < iv.b <= 1.0),
        "sigma": sigma,
        "sup_norm": sup,
        "size_limit": 1.0 / sigma,
        "size_ok": bool(sup <= (1.0 + size_slack) / sigma),
    }
    if atom.kind == KIND_CANCELLATIVE:
        defect = atom.cancellation()
        report["cancellation"] = defect
        report["cancellation_ok"] = bool(abs(defect) <= cancel_tol)
    else:
        # a special atom is the exact normalized indicator of a cover cell
        flat = bool(np.all(atom.fn.slopes == 0.0)
                    and np.ptp(atom.fn.intercepts) == 0.0)
        value_ok = flat and abs(atom.fn.intercepts[0] * sigma - 1.0) < 1e-12
        report["constant_ok"] = value_ok
        if cover is not None:
            match = False
            for j in cover.indices():
                cell = cover.interval(j)
                if abs(cell.a - iv.a) < 1e-12 and abs(cell.b - iv.b) < 1e-12:
                    match = True
                    break
            report["cell_match_ok"] = match
    checks = [v for k, v in report.items() if k.endswith("_ok")]
    report["valid"] = bool(all(checks))
    return report


# ---------------------------------------------------------------------------
# splitting identities


def two_atom_split(cover: DyadicCover, j: int, nu: float, measure: str) -> dict:
    """Split the cell's special atom as lam1 * a1 + (local special atom).

    The difference between the cell indicator atom and the normalized
    indicator of the doubly enlarged cell is cancellative; dividing by lam1
    (its sup norm times the enlarged measure) makes it a valid atom. Read
    backwards, this writes the local special atom of the enlarged piece as a
    combination of two valid global atoms."""
    cell = cover.interval(j)
    big = cover.starred(j, 2)
    s_cell = sigma_interval(cell.a, cell.b, measure, nu)
    s_big = sigma_interval(big.a, big.b, measure, nu)
    pts = np.unique(np.array([big.a, cell.a, cell.b, big.b]))
    levels = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        inside = cell.a <= lo and hi <= cell.b
        levels.append((1.0 / s_cell if inside else 0.0) - 1.0 / s_big)
    diff = PiecewiseLinear.from_breaks_levels(pts, levels)
    lam1 = s_big * diff.sup_norm()
    a1 = Atom(fn=diff.scaled(1.0 / lam1), measure=measure, nu=nu,
              kind=KIND_CANCELLATIVE, label=f"two-atom-corrector[{j}]")
    local_special = Atom(
        fn=PiecewiseLinear.constant(big.a, big.b, 1.0 / s_big),
        measure=measure, nu=nu, kind=KIND_SPECIAL,
        label=f"local-special[{j}]")
    return {"lam1": lam1, "cancellative": a1,
            "cell_special": special_atom(cover, j, nu, measure),
            "local_special": local_special}


def globalize_special(cover: DyadicCover, j: int, nu: float, measure: str,
                      coef: float) -> list:
    """Rewrite coef times the enlarged piece's special atom as a combination
    of two global atoms; returns [(coef, atom), ...]."""
    split = two_atom_split(cover, j, nu, measure)
    return [(coef, split["cell_special"]),
            (-coef * split["lam1"], split["cancellative"])]


def bump_split(fn: PiecewiseLinear, cover: DyadicCover, j: int, nu: float,
               measure: str) -> list:
    """A bounded bump supported in one cover cell splits into a cancellative
    atom plus a multiple of the cell's special atom; returns [(coef, atom)]."""
    cell = cover.interval(j)
    s_cell = sigma_interval(cell.a, cell.b, measure, nu)
    mass = fn.integral(measure, nu)
    centered = fn.extended(cell.a, cell.b).plus_constant(-mass / s_cell)
    out = []
    sup = centered.sup_norm()
    if sup > 0:
        lam = sup * s_cell
        out.append((lam, Atom(fn=centered.scaled(1.0 / lam), measure=measure,
                              nu=nu, kind=KIND_CANCELLATIVE,
                              label=f"bump-centered[{j}]")))
    if mass != 0.0:
        out.append((mass, special_atom(cover, j, nu, measure)))
    return out


def case3_split(atom: Atom, cover: DyadicCover) -> tuple:
    """Split a wide cancellative atom along the cover cells it touches.

    The atom is written as a sum over cells of scaled restrictions; each
    restriction has sup norm comparable to the reciprocal cell measure and is
    then bump-split into valid atoms. Returns (pieces, info) where pieces is
    a list of (coefficient, atom) and info records the damping exponents."""
    if atom.kind != KIND_CANCELLATIVE:
        raise ValueError("the wide-atom split applies to cancellative atoms")
    iv = atom.interval
    js = [j for j in cover.positions_sorted()
          if atom.fn.restricted(cover.interval(j).a, cover.interval(j).b)
          is not None]
    if not js:
        raise ValueError("atom support misses the cover")
    if cover.family == FAMILY_ONE_END:
        base = min(js)
        damp = {j: j - base for j in js}
    else:
        lo, hi = min(js), max(js)
        base = 1 if lo < 0 < hi else min(abs(lo), abs(hi))
        damp = {j: abs(j) - base for j in js}
    pieces = []
    for j in js:
        cell = cover.interval(j)
        part = atom.fn.restricted(cell.a, cell.b)
        grow = 2.0 ** damp[j]
        coef = 1.0 / grow
        for lam, sub in bump_split(part.scaled(grow), cover, j, atom.nu,
                                   atom.measure):
            pieces.append((coef * lam, sub))
    info = {"indices": js, "base_index": base,
            "coef_l1": float(sum(abs(c) for c, _ in pieces))}
    return pieces, info


# ---------------------------------------------------------------------------
# partition of unity (piecewise-linear ramps on the star overlaps)


@dataclass(frozen=True)
class PartitionMember:
    j: int
    cell: Interval
    star: Interval
    star2: Interval
    eta: PiecewiseLinear
    t_cap: float

    def eta_values(self, x):
        return self.eta.evaluate(x)

    @property
    def derivative_bound(self) -> float:
        return float(np.max(np.abs(self.eta.slopes)))


def build_partition(cover: DyadicCover, nu: float, measure: str) -> list:
    """Partition of unity subordinate to the starred cover.

    Each member ramps linearly inside the overlap of consecutive starred
    intervals (shrunk 10 percent on each side), so the members sum to one
    exactly between the first ramp and the start of the last member's
    closing ramp, and the slope of member j is of order 2^j as required.
    The time cap stored with each member is the doubly-starred measure of
    its cell."""
    order = cover.positions_sorted()
    ramps = []
    for a, b in zip(order[:-1], order[1:]):
        star_a = cover.starred(a, 1)
        star_b = cover.starred(b, 1)
        lo, hi = star_b.a, star_a.b
        if hi <= lo:
            raise NumericsError("partition",
                                f"starred intervals {a} and {b} do not overlap")
        width = hi - lo
        ramps.append((lo + 0.1 * width, hi - 0.1 * width))

    members = []
    for pos, j in enumerate(order):
        cell = cover.interval(j)
        left = ramps[pos - 1] if pos > 0 else None
        right = ramps[pos] if pos < len(ramps) else None
        if left is None:
            pts, vals = [cell.a], [1.0]
        else:
            pts, vals = [left[0], left[1]], [0.0, 1.0]
        if right is not None:
            pts += [right[0], right[1]]
            vals += [1.0, 0.0]
        else:
            pts += [cell.b - 0.1 * cell.length, cell.b]
            vals += [1.0, 0.0]
        eta = PiecewiseLinear.from_node_values(np.asarray(pts, dtype=float),
                                               np.asarray(vals, dtype=float))
        star2 = cover.starred(j, 2)
        t_cap = sigma_interval(star2.a, star2.b, measure, nu)
        members.append(PartitionMember(j=j, cell=cell, star=cover.starred(j, 1),
                                       star2=star2, eta=eta, t_cap=t_cap))
    return members


def partition_coverage(members) -> Interval:
    """Interval on which the members provably sum to one.

    The last member closes with a ramp down to zero inside its own cell
    (the truncated cover has nothing beyond it to hand mass to), so the
    guaranteed region ends where that ramp starts, not at the cell edge."""
    return Interval(members[0].eta.breaks[0],
                    float(members[-1].eta.breaks[-2]))


# ---------------------------------------------------------------------------
# local Haar cascade


@dataclass
class CascadeLevel:
    depth: int
    idx: np.ndarray     # sorted cell indices at this depth with detail != 0
    lam: np.ndarray     # detail coefficients (half-integral differences)


@dataclass(frozen=True)
class ClosingPiece:
    """Exact remainder of one deactivated cell: the input minus its cell
    average, a zero-mean bump that normalizes to a valid atom."""
    depth: int
    cell: int
    lam: float                  # sup norm times the cell measure
    fn: PiecewiseLinear


@dataclass
class LocalCascade:
    """Measure-median detail expansion of one localized piece.

    The expansion is exact: levels hold the retained Haar details, and each
    cell deactivated by the cut (or stopped by the depth cap) contributes a
    closing piece carrying the remainder there, so evaluate() reproduces the
    input to rounding."""
    space: Interval
    measure: str
    nu: float
    sigma_total: float
    mean_coef: float            # integral of the piece over the space
    levels: list
    closers: list
    depth: int
    closure_l1: float           # coefficient mass of the closing pieces

    def _u(self, x):
        c0 = _cdf(self.space.a, self.measure, self.nu)
        return np.clip((_cdf(x, self.measure, self.nu) - c0) / self.sigma_total,
                       0.0, 1.0 - 1e-15)

    def evaluate(self, x):
        """Mean part, all retained details, and the closing remainders."""
        x = np.asarray(x, dtype=float)
        inside = (x > self.space.a) & (x <= self.space.b)
        out = np.where(inside, self.mean_coef / self.sigma_total, 0.0)
        u = self._u(x)
        for lev in self.levels:
            cell = np.floor(u * 2.0**lev.depth).astype(np.int64)
            pos = np.searchsorted(lev.idx, cell)
            pos_c = np.clip(pos, 0, len(lev.idx) - 1)
            hit = inside & (lev.idx[pos_c] == cell)
            sign = np.where(np.floor(u * 2.0 ** (lev.depth + 1)) % 2 == 0,
                            1.0, -1.0)
            sigma_cell = self.sigma_total / 2.0**lev.depth
            out = out + np.where(hit, sign * lev.lam[pos_c] / sigma_cell, 0.0)
        for cp in self.closers:
            # gate with the same cell assignment the detail levels use, so a
            # point landing exactly on a cell edge is counted on one side
            # only; the gate owns membership, so clamp into the remainder's
            # break range (the quantile edges can sit one ulp away)
            cell = np.floor(u * 2.0**cp.depth).astype(np.int64)
            hit = inside & (cell == cp.cell)
            xc = np.clip(x, cp.fn.breaks[0], cp.fn.breaks[-1])
            out = out + np.where(hit, cp.fn.evaluate(xc), 0.0)
        return out

    def coeff_l1(self) -> float:
        details = sum(np.sum(np.abs(lev.lam)) for lev in self.levels)
        return float(details) + self.closure_l1

    def edges(self, depth: int, cells) -> tuple:
        """(left, median, right) x-coordinates of the given cells."""
        c0 = _cdf(self.space.a, self.measure, self.nu)
        k = np.asarray(cells, dtype=float)
        scale = self.sigma_total / 2.0**depth
        left = _quantile(c0 + k * scale, self.measure, self.nu)
        med = _quantile(c0 + (k + 0.5) * scale, self.measure, self.nu)
        right = _quantile(c0 + (k + 1.0) * scale, self.measure, self.nu)
        return left, med, right

    def materialize(self, max_atoms: int | None = None) -> list:
        """Largest-coefficient pieces as explicit atoms: two-bar atoms for
        the Haar details, normalized remainders for the closers."""
        entries = []
        for lev in self.levels:
            for k, lam in zip(lev.idx, lev.lam):
                entries.append((abs(lam), lev.depth, int(k), float(lam), None))
        for cp in self.closers:
            entries.append((abs(cp.lam), cp.depth, cp.cell, cp.lam, cp))
        entries.sort(key=lambda e: (-e[0], e[1], e[2]))
        if max_atoms is not None:
            entries = entries[:max_atoms]
        out = []
        for _, depth, k, lam, cp in entries:
            if cp is None:
                left, med, right = self.edges(depth, np.array([k]))
                atom = haar_atom(float(left[0]), float(med[0]), float(right[0]),
                                 self.nu, self.measure,
                                 label=f"haar[d{depth},k{k}]")
            else:
                atom = Atom(fn=cp.fn.scaled(1.0 / cp.lam), measure=self.measure,
                            nu=self.nu, kind=KIND_CANCELLATIVE,
                            label=f"closer[d{depth},k{k}]")
            out.append((lam, atom))
        return out


def cascade_decompose(fn: PiecewiseLinear, space: Interval, measure: str,
                      nu: float, depth_cap: int = 26,
                      detail_cut: float | None = None) -> LocalCascade:
    """Adaptive Haar cascade of fn on the space, in measure-median cells.

    A cell splits at the point halving its measure; the detail coefficient is
    the difference of the two half integrals, and a child stays active while
    it contains a breakpoint of fn or while the oscillation bound of its
    linear piece exceeds the cut. A cell that stops (by the cut or by the
    depth cap) emits its exact remainder as a closing piece, so the cascade
    reproduces fn to rounding whatever the cut; the cut only trades the
    number of detail levels against the coefficient mass of the closers."""
    sigma_total = sigma_interval(space.a, space.b, measure, nu)
    if sigma_total <= 0:
        raise ValueError("empty cascade space")
    mean_coef = float(fn.integral(measure, nu))
    if detail_cut is None:
        # the active front on a sloped stretch grows like cut^(-1/2); this
        # default keeps a bare call near 1e4 cells with closer mass around
        # 1e-4 of the input's scale
        detail_cut = 1e-8 * max(abs(mean_coef), fn.sup_norm() * sigma_total, 1e-300)

    inner_breaks = fn.breaks[(fn.breaks > space.a) & (fn.breaks < space.b)]
    levels = []
    closers = []
    closure_l1 = 0.0
    active = np.array([0], dtype=np.int64)
    cascade = LocalCascade(space=space, measure=measure, nu=nu,
                           sigma_total=sigma_total, mean_coef=mean_coef,
                           levels=levels, closers=closers, depth=0,
                           closure_l1=0.0)

    def close(depth: int, k: int, a: float, b: float, sigma_cell: float):
        r = fn.restricted(a, b)
        if r is None:
            return 0.0
        avg = float(r.integral(measure, nu)) / sigma_cell
        rem = r.extended(a, b).plus_constant(-avg)
        s = rem.sup_norm()
        if s <= 0.0:
            return 0.0
        closers.append(ClosingPiece(depth=depth, cell=int(k),
                                    lam=s * sigma_cell, fn=rem))
        return s * sigma_cell

    for d in range(depth_cap):
        if len(active) == 0:
            break
        left, med, right = cascade.edges(d, active)
        half1 = fn.integral_between(left, med, measure, nu)
        half2 = fn.integral_between(med, right, measure, nu)
        lam = half1 - half2
        keep = lam != 0.0
        if np.any(keep):
            levels.append(CascadeLevel(depth=d, idx=active[keep],
                                       lam=lam[keep]))
        # children either stay active, close, or vanish with the function
        child_idx = []
        sigma_child = sigma_total / 2.0 ** (d + 1)
        for k, el, em, er in zip(active, left, med, right):
            for child, (a, b) in ((2 * k, (el, em)), (2 * k + 1, (em, er))):
                if b <= fn.breaks[0] or a >= fn.breaks[-1]:
                    continue   # the function vanishes on this cell
                has_break = bool(np.any((inner_breaks > a) & (inner_breaks < b)))
                mids = 0.5 * (a + b)
                slope = fn.slopes[min(max(np.searchsorted(fn.breaks, mids,
                                                          side="right") - 1, 0),
                                      len(fn.slopes) - 1)]
                osc = abs(slope) * (b - a)
                if (has_break or osc * sigma_child > detail_cut) \
                        and d + 1 < depth_cap:
                    child_idx.append(child)
                else:
                    closure_l1 += close(d + 1, child, a, b, sigma_child)
        active = np.asarray(sorted(child_idx), dtype=np.int64)
        cascade.depth = d + 1
    cascade.levels = levels
    cascade.closure_l1 = closure_l1
    return cascade


# ---------------------------------------------------------------------------
# the decomposition pipeline


@dataclass
class Decomposition:
    measure: str
    nu: float
    cover: DyadicCover
    members: list
    pieces: list          # (member, cascade, special_pairs)
    max_atoms: int | None

    def reconstruct(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for _, cascade, _ in self.pieces:
            out = out + cascade.evaluate(x)
        return out

    def atoms(self) -> list:
        """Materialized (coefficient, atom) pairs: cascade details plus the
        globalized special parts."""
        out = []
        for _, cascade, special_pairs in self.pieces:
            out.extend(cascade.materialize(self.max_atoms))
            out.extend(special_pairs)
        return out

    def coeff_l1(self) -> float:
        total = 0.0
        for _, cascade, special_pairs in self.pieces:
            total += cascade.coeff_l1()
            total += sum(abs(c) for c, _ in special_pairs)
        return total

    def residual_l1(self, f: SampledFunction) -> float:
        rec = self.reconstruct(f.nodes)
        return float(f.grid.weights @ np.abs(f.values - rec))

    def summary(self, f: SampledFunction | None = None) -> dict:
        n_details = sum(len(lev.idx) for _, c, _ in self.pieces
                        for lev in c.levels)
        n_closers = sum(len(c.closers) for _, c, _ in self.pieces)
        n_special = sum(len(sp) for _, _, sp in self.pieces)
        out = {"measure": self.measure, "n_pieces": len(self.pieces),
               "n_details": int(n_details), "n_closers": int(n_closers),
               "n_special_pairs": int(n_special),
               "coeff_l1": self.coeff_l1(),
               "closure_l1": float(sum(c.closure_l1
                                       for _, c, _ in self.pieces))}
        if f is not None:
            res = self.residual_l1(f)
            norm = f.l1_norm()
            out["residual_l1"] = res
            out["residual_rel"] = res / norm if norm > 0 else 0.0
        return out


def _as_piecewise_linear(f) -> PiecewiseLinear:
    if isinstance(f, PiecewiseLinear):
        return f
    if isinstance(f, SampledFunction):
        return PiecewiseLinear.from_node_values(f.nodes, f.values)
    raise TypeError("expected a PiecewiseLinear or SampledFunction")


def atomic_decompose(f, nu: float, measure: str | None = None,
                     cover: DyadicCover | None = None,
                     depth_cap: int = 26, reconstruct_tol: float = 1e-6,
                     max_atoms: int | None = None,
                     zeta: float = 0.02) -> Decomposition:
    """Full atomic decomposition of a function on (0, 1).

    The function is cut by the partition of unity, each piece is expanded by
    the Haar cascade on its doubly-starred interval, and each piece's mean
    part is rewritten through the two-atom split as a combination of global
    atoms. The pieces are chord products on one shared breakpoint set, so
    they sum back to the input exactly; the cascades close their remainders
    exactly as well, so the reconstruction holds to rounding and
    reconstruct_tol only steers how the coefficient mass splits between
    Haar details and closers."""
    if measure is None:
        if isinstance(f, SampledFunction):
            measure = f.measure
        else:
            raise ValueError("measure tag required for raw piecewise input")
    fn = _as_piecewise_linear(f)
    family = _FAMILY_OF_MEASURE[measure]
    supp = fn.support
    if cover is None:
        j_need = []
        for endpoint in (supp.a, supp.b):
            if 0.0 < endpoint < 1.0:
                j_need.append(abs(DyadicCover(family, zeta=zeta, j_max=60)
                                  .index_of(endpoint)))
        j_max = max(8, max(j_need, default=8) + 2)
        cover = DyadicCover(family, zeta=zeta, j_max=j_max)
    members = build_partition(cover, nu, measure)
    coverage = partition_coverage(members)
    if supp.a < coverage.a or supp.b > coverage.b:
        raise ValueError(
            f"support ({supp.a:.3g}, {supp.b:.3g}) leaves the partition "
            f"coverage ({coverage.a:.3g}, {coverage.b:.3g}); enlarge j_max")

    points = np.unique(np.concatenate(
        [fn.breaks] + [m.eta.breaks for m in members]))
    norm_l1 = fn.l1_norm(measure, nu)
    # The closers keep every cascade exact whatever the cut; tying the cut
    # to the tolerance keeps their coefficient mass (which scales like
    # sqrt(cut)) well below reconstruct_tol relative to the input.
    cut = 1e-2 * reconstruct_tol * max(norm_l1, 1e-300)
    pieces = []
    for m in members:
        window = m.eta.support
        piece_pts = points[(points >= window.a) & (points <= window.b)]
        if len(piece_pts) < 2:
            continue
        piece = chord_product(fn, m.eta, piece_pts)
        if piece.sup_norm() == 0.0:
            continue
        cascade = cascade_decompose(piece, m.star2, measure, nu,
                                    depth_cap=depth_cap, detail_cut=cut)
        special_pairs = []
        if cascade.mean_coef != 0.0:
            special_pairs = globalize_special(cover, m.j, nu, measure,
                                              cascade.mean_coef)
        pieces.append((m, cascade, special_pairs))
    return Decomposition(measure=measure, nu=nu, cover=cover, members=members,
                         pieces=pieces, max_atoms=max_atoms)


# ---------------------------------------------------------------------------
# random atoms and reports


_PROFILES = ("haar", "tent", "twobar")


def random_atoms(rng, measure: str, nu: float, count: int,
                 scale_max: int = 8, zeta: float = 0.02) -> list:
    """Seeded atoms of the three cancellative profiles plus occasional
    special atoms, at dyadic cover scales up to scale_max."""
    family = _FAMILY_OF_MEASURE[measure]
    cover = DyadicCover(family, zeta=zeta, j_max=max(scale_max, 8))
    out = []
    for i in range(count):
        if family == FAMILY_ONE_END:
            j = int(rng.integers(0, scale_max + 1))
        else:
            j = int(rng.integers(1, scale_max + 1)) * (1 if rng.random() < 0.5
                                                       else -1)
        cell = cover.interval(j)
        if i % 7 == 6:
            out.append(special_atom(cover, j, nu, measure,
                                    label=f"special-j{j}-{i}"))
            continue
        frac = 2.0 ** -int(rng.integers(0, 3))
        width = frac * cell.length
        a = cell.a + float(rng.random()) * (cell.length - width)
        b = a + width
        profile = _PROFILES[int(rng.integers(0, len(_PROFILES)))]
        label = f"{profile}-j{j}-{i}"
        if profile == "haar":
            med = _quantile(0.5 * (_cdf(a, measure, nu) + _cdf(b, measure, nu)),
                            measure, nu)
            out.append(haar_atom(a, float(med), b, nu, measure, label=label))
        elif profile == "twobar":
            q = 0.3 + 0.4 * float(rng.random())
            m = _quantile(_cdf(a, measure, nu)
                          + q * (_cdf(b, measure, nu) - _cdf(a, measure, nu)),
                          measure, nu)
            out.append(haar_atom(a, float(m), b, nu, measure, label=label))
        else:
            tent = PiecewiseLinear.tent(a, b, 1.0)
            s_ab = sigma_interval(a, b, measure, nu)
            mean = tent.integral(measure, nu) / s_ab
            centered = tent.plus_constant(-mean)
            scale = 1.0 / (centered.sup_norm() * s_ab)
            out.append(Atom(fn=centered.scaled(scale), measure=measure, nu=nu,
                            kind=KIND_CANCELLATIVE, label=label))
    return out


def h1_norm_report(f: SampledFunction, basis, time_grid, nu: float,
                   depth_cap: int = 26) -> dict:
    """Atomic coefficient mass against the maximal-function L1 norm.

    The two numbers estimate the same Hardy-space norm through its two
    characterizations; their ratio is the quantity tracked for stability."""
    from .maximal import maximal_function

    dec = atomic_decompose(f, nu=nu, measure=f.measure, depth_cap=depth_cap)
    res = maximal_function(basis, f, time_grid)
    maximal_l1 = float(f.grid.weights @ res.values)
    coeff = dec.coeff_l1()
    return {"coeff_l1": coeff, "maximal_l1": maximal_l1,
            "ratio": maximal_l1 / coeff if coeff > 0 else math.inf,
            "residual_rel": dec.summary(f).get("residual_rel", None),
            "n_details": dec.summary()["n_details"]}
