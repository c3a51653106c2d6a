"""Regularity and geometry: double points, address coding, Lipschitz and
derivative series, dimensions, composed IFSs and the uniqueness probe."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize, stats

from .attractor import PointCloud, chaos_game, evaluate_many, hausdorff_distance
from .continuation import Address, continue_many, domain_interval, ensemble, ensemble_clouds
from .errors import (
    AttractorsDiffer,
    ConditionViolated,
    DoublePoint,
    HypothesisViolated,
    NonAffineUnsupported,
    OutOfDomain,
    TooFewPoints,
    TooFewScales,
)
from .ifs import AffineBranch, AffineMap1D, InterpolationIFS, Interval

NODE_TOL = 1e-12


# -- double points and addresses -------------------------------------------------------

@dataclass(frozen=True)
class DoublePointSet:
    depth: int
    xs: tuple

    def __len__(self):
        return len(self.xs)

    def __contains__(self, x):
        i = np.searchsorted(self.xs, x)
        return any(abs(self.xs[j] - x) <= NODE_TOL for j in (i - 1, i) if 0 <= j < len(self.xs))


def _dedupe(values, tol):
    v = np.sort(np.asarray(values, dtype=float))
    if len(v) == 0:
        return v
    keep = np.concatenate([[True], np.diff(v) > tol])
    return v[keep]


def double_points(ifs: InterpolationIFS, depth: int) -> DoublePointSet:
    """Images of the nodes under all ``L``-words of length ``<= depth``,
    minus the endpoints."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    tol = NODE_TOL * max(1.0, ifs.span)
    level = ifs.xs.copy()
    found = [level]
    for _ in range(depth):
        level = _dedupe(np.concatenate([L(level) for L in ifs.L]), tol)
        found.append(level)
    allx = _dedupe(np.concatenate(found), tol)
    interior = allx[(allx > ifs.x0 + tol) & (allx < ifs.xN - tol)]
    return DoublePointSet(depth, tuple(float(v) for v in interior))


@dataclass(frozen=True)
class DoublePointFlag:
    """``x`` reaches interior node ``node`` after ``level`` descent steps."""

    x: float
    level: int
    node: int

    def __bool__(self):
        return True


def address_of(ifs: InterpolationIFS, x: float, depth: int):
    """Greedy descent word ``sigma|depth`` with ``pi(sigma) = x``, or a
    :class:`DoublePointFlag` when the descent lands on an interior node."""
    tol = NODE_TOL * max(1.0, ifs.span)
    if not (ifs.x0 - tol <= x <= ifs.xN + tol):
        raise OutOfDomain(f"x = {x} outside [{ifs.x0}, {ifs.xN}]")
    u = min(max(float(x), ifs.x0), ifs.xN)
    interior = ifs.xs[1:-1]
    word = []
    for level in range(depth + 1):
        near = np.nonzero(np.abs(interior - u) <= tol)[0]
        if len(near):
            return DoublePointFlag(float(x), level, int(near[0]) + 1)
        if level == depth:
            break
        i = int(ifs.branch_of(u))
        word.append(i + 1)
        u = min(max(ifs.L[i].inverse(u), ifs.x0), ifs.xN)
    return tuple(word)


def point_of(ifs: InterpolationIFS, word, s=None) -> float:
    """``L_{w_1} o ... o L_{w_k}(s)``, the forward re-composition of a word."""
    s = ifs.x0 if s is None else s
    for n in reversed(tuple(word)):
        s = ifs.L[n - 1](s)
    return s


# -- Lipschitz bound and derivative series --------------------------------------------

@dataclass(frozen=True)
class LipschitzBound:
    lam: float
    a_min: float
    c_sup: float
    d_sup: float

    @property
    def value(self):
        return self.lam


def _dy_over_a(ifs):
    return [b[1] / L.a for b, L in zip(ifs.branch_bounds, ifs.L)]


def lipschitz_bound(ifs: InterpolationIFS) -> LipschitzBound:
    """``lambda = c / (a (1 - d))`` with ``c = sup |dF/dx|``,
    ``a = min a_n`` and ``d = max sup |dF_n/dy| / a_n``, which must be < 1."""
    d_sup = max(_dy_over_a(ifs))
    if d_sup >= 1:
        raise HypothesisViolated(
            f"need sup |dF_n/dy| < a_n for every branch; largest ratio is {d_sup:.6g}")
    c_sup = max(b[0] for b in ifs.branch_bounds)
    a_min = min(L.a for L in ifs.L)
    return LipschitzBound(c_sup / (a_min * (1.0 - d_sup)), a_min, c_sup, d_sup)


def derivative_series(ifs: InterpolationIFS, x: float, tol: float = 1e-12,
                      max_terms: int = 4000, double_depth: int = 60) -> float:
    """``f'(x) = sum_m C_m / a_m prod_{l<m} D_l / a_l``.

    Here ``x_m`` is the point after ``m`` descent steps, ``C_m`` and ``D_m``
    are ``dF/dx`` and ``dF/dy`` of the ``m``-th branch at ``(x_m, f(x_m))``.
    Terms are added until the geometric tail bound falls below ``tol``.
    """
    ratio = max(_dy_over_a(ifs))
    if ratio >= 1:
        raise HypothesisViolated(f"need |dF_n/dy| < a_n; largest ratio is {ratio:.6g}")
    c_over_a = max(b[0] / L.a for b, L in zip(ifs.branch_bounds, ifs.L))
    # Every float is dyadic, so under halving maps every x lands on a node
    # eventually.  A node reached after the tail is below tol cannot move
    # the sum by more than tol, so only the levels the sum needs are checked.
    if ratio > 0 and c_over_a > 0:
        needed = math.log(tol * (1.0 - ratio) / c_over_a) / math.log(ratio)
        double_depth = min(double_depth, max(1, math.ceil(needed)))
    flag = address_of(ifs, x, double_depth)
    if isinstance(flag, DoublePointFlag):
        raise DoublePoint(f"x = {x} is a double point (reaches node {flag.node} "
                          f"after {flag.level} steps); f' need not exist there")

    # descent points, computed in blocks and evaluated on the graph in one go
    u = min(max(float(x), ifs.x0), ifs.xN)
    total, weight = 0.0, 1.0
    m = 0
    while m < max_terms:
        block_u, block_i = [], []
        for _ in range(64):
            i = int(ifs.branch_of(u))
            u = min(max(ifs.L[i].inverse(u), ifs.x0), ifs.xN)
            block_u.append(u)
            block_i.append(i)
        fu, _ = evaluate_many(ifs, block_u)
        for uu, fy, i in zip(block_u, fu, block_i):
            a = ifs.L[i].a
            C = float(ifs.F[i].dfdx(uu, fy))
            D = float(ifs.F[i].dfdy(uu, fy))
            total += weight * C / a
            weight *= D / a
            m += 1
            tail = abs(weight) * c_over_a / (1.0 - ratio)
            if tail < tol:
                return total
    return total


# -- dimension --------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionResult:
    value: float
    method: str
    fit: float
    degenerate: bool = False
    scales: tuple = ()
    counts: tuple = ()

    @property
    def r2(self):
        return self.fit if self.method == "box_count" else None

    @property
    def residual(self):
        return self.fit if self.method == "equation_solve" else None


def _dimension_lhs(D, a1, d1, d2):
    return a1 ** (D - 1) * d1 + (1 - a1) ** (D - 1) * d2


def dimension_solve(a1: float, d1: float, d2: float) -> DimensionResult:
    """Root ``D`` in [1, 2) of ``a^(D-1) d1 + (1-a)^(D-1) d2 = 1``."""
    if not 0 < a1 < 1:
        raise ConditionViolated("a must lie in (0, 1)")
    if not (0 < d1 < 1 and 0 < d2 < 1):
        raise ConditionViolated("d1 and d2 must lie in (0, 1)")
    if d1 + d2 == 1:
        return DimensionResult(1.0, "equation_solve", 0.0, degenerate=True)
    if d1 + d2 < 1:
        raise ConditionViolated(f"d1 + d2 = {d1 + d2} <= 1; the graph is not fractal")
    g = lambda D: _dimension_lhs(D, a1, d1, d2) - 1.0
    D = optimize.brentq(g, 1.0, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return DimensionResult(D, "equation_solve", abs(g(D)))


def box_dimension(cloud, scale_exponents=range(4, 11), min_points=10 ** 5,
                  min_count=32, min_occupancy=16) -> DimensionResult:
    """Least-squares slope of ``log N(2^-j)`` against ``j log 2``.

    A scale is fitted only when it has at least ``min_count`` occupied
    boxes (too coarse otherwise) and at least ``min_occupancy`` points per
    occupied box on average (undersampled otherwise).  The scales used are
    reported on the result.
    """
    pts = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if len(pts) < min_points:
        raise TooFewPoints(f"{len(pts)} points; need at least {min_points}")
    exps = list(scale_exponents)
    if len(exps) < 4:
        raise TooFewScales("need at least 4 scales")
    js, counts = [], []
    for j in exps:
        boxes = np.floor(pts * 2.0 ** j).astype(np.int64)
        n = len(np.unique(boxes, axis=0))
        if n >= min_count and n * min_occupancy <= len(pts):
            js.append(j)
            counts.append(n)
    if len(js) < 4:
        raise TooFewScales(f"only {len(js)} scales have at least {min_count} occupied boxes "
                           f"and {min_occupancy} points per box")
    fit = stats.linregress(np.array(js) * math.log(2.0), np.log(counts))
    return DimensionResult(float(fit.slope), "box_count", float(fit.rvalue ** 2),
                           scales=tuple(js), counts=tuple(counts))


# -- composed IFSs and the uniqueness probe ---------------------------------------------

def _compose(w1, w2):
    """Coefficients of ``w1 o w2`` for affine ``(a, b, c, d, e)`` tuples."""
    a1, b1, c1, d1, e1 = w1
    a2, b2, c2, d2, e2 = w2
    return (a1 * a2, a1 * b2 + b1, c1 * a2 + d1 * c2, d1 * d2, c1 * b2 + d1 * e2 + e1)


def compose_ifs(ifs: InterpolationIFS, order: int) -> InterpolationIFS:
    """The ``N^order`` compositions ``w_{i_1} o ... o w_{i_order}`` in
    lexicographic order; same attractor, refined node list."""
    if not all(isinstance(F, AffineBranch) for F in ifs.F):
        raise NonAffineUnsupported("composition is closed-form only for affine branches")
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    if order == 1:
        return ifs
    base = [(L.a, L.b, F.c, F.d, F.e) for L, F in zip(ifs.L, ifs.F)]
    maps = []
    for word in itertools.product(range(ifs.N), repeat=order):
        w = base[word[-1]]
        for i in reversed(word[:-1]):
            w = _compose(base[i], w)
        maps.append(w)
    xN, yN = ifs.xN, ifs.yN
    nodes = [(ifs.x0, ifs.y0)]
    for a, b, c, d, e in maps[:-1]:
        nodes.append((a * xN + b, c * xN + d * yN + e))
    nodes.append((xN, yN))
    L = [AffineMap1D(a, b) for a, b, *_ in maps]
    F = [AffineBranch(c, d, e) for _, _, c, d, e in maps]
    return InterpolationIFS(tuple(nodes), L, F, f"{ifs.name or 'ifs'}^{order}")


@dataclass
class UniquenessReport:
    hausdorff: float
    max_gap_theta1: float
    max_gap_thetaN: float
    grid_theta1: Interval
    grid_thetaN: Interval
    ensemble_gap: Optional[float] = None
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"hausdorff": self.hausdorff, "max_gap_theta1": self.max_gap_theta1,
                "max_gap_thetaN": self.max_gap_thetaN, "ensemble_gap": self.ensemble_gap}


def _ray_gap(A, B, thetaA, thetaB, k, grid, window):
    dA = domain_interval(A, thetaA, k)
    dB = domain_interval(B, thetaB, k)
    lo, hi = max(dA.lo, dB.lo), min(dA.hi, dB.hi)
    if window is not None:
        lo, hi = max(lo, window[0]), min(hi, window[1])
    x = np.linspace(lo, hi, grid)
    vA, _, _ = continue_many(A, thetaA, x, k)
    vB, _, _ = continue_many(B, thetaB, x, k)
    return float(np.max(np.abs(vA - vB))), Interval(lo, hi)


def _union_cloud(ifs, k, count, seed, box):
    clouds = ensemble_clouds(ensemble(ifs, k), count, seed)
    pts = np.concatenate([c.points for c in clouds])
    lo, hi = box
    keep = np.all((pts >= lo) & (pts <= hi), axis=1)
    return pts[keep]


def uniqueness_probe(ifsA: InterpolationIFS, ifsB: InterpolationIFS, grid: int = 200,
                     k: int = 4, count: int = 10 ** 5, seed: int = 0, tol: float = 2e-2,
                     window=None, ensemble_depths=None, ensemble_count: int = 2000,
                     box=(-20.0, 20.0)) -> UniquenessReport:
    """Compare the endpoint continuations of two IFSs with the same attractor.

    Checks the attractors agree (Hausdorff distance of chaos-game clouds at
    most ``tol``), then evaluates ``f_{1-bar}`` and ``f_{N-bar}`` of both on
    ``grid`` points of the common depth-``k`` domains (clipped to
    ``window``).  With ``ensemble_depths = (kA, kB)`` also reports the
    Hausdorff distance between the union clouds of both ensembles inside
    ``box`` squared.
    """
    cA = chaos_game(ifsA, count, seed)
    cB = chaos_game(ifsB, count, seed + 1)
    h = hausdorff_distance(cA, cB)
    if h > tol:
        raise AttractorsDiffer(f"attractor clouds differ by {h:.4g} > {tol}")
    g1, i1 = _ray_gap(ifsA, ifsB, Address.constant(1), Address.constant(1), k, grid, window)
    gN, iN = _ray_gap(ifsA, ifsB, Address.constant(ifsA.N), Address.constant(ifsB.N), k, grid, window)
    report = UniquenessReport(h, g1, gN, i1, iN)
    if ensemble_depths is not None:
        kA, kB = ensemble_depths
        uA = _union_cloud(ifsA, kA, ensemble_count, seed, box)
        uB = _union_cloud(ifsB, kB, ensemble_count, seed, box)
        report.ensemble_gap = hausdorff_distance(uA, uB)
    return report
