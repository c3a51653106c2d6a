"""Interpolation IFSs: branch maps, constructors and validation.

An interpolation IFS is a list of maps ``w_n(x, y) = (L_n(x), F_n(x, y))``
with affine ``L_n`` and ``F_n`` contractive in ``y``; its attractor is the
graph of a continuous function through the data nodes.

Branch indices are 1-based in the public functions (``apply_branch``,
``invert_branch``) and 0-based on the methods of :class:`InterpolationIFS`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import scalar
from .errors import (
    BranchOutOfRange,
    ConditionUnattainable,
    DegenerateInterval,
    DerivativeVanishes,
    InterpolationConditions,
    LengthMismatch,
    NonIncreasingNodes,
    NotContractive,
    NotInvertibleInY,
    NotMonotone,
    OutsideValidityStrip,
    ScalingOutOfRange,
)
from .rng import Xoshiro256

COND_TOL = 1e-12
# sampled suprema are inflated by this factor before they are trusted
SAFETY = 1.1
# ratio limit for the analytic construction; keeps SAFETY * ratio / 2 below 1
RATIO_LIMIT = 2.0 / SAFETY


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DegenerateInterval(f"need lo < hi, got [{self.lo}, {self.hi}]")

    def __contains__(self, x):
        return self.lo <= x <= self.hi

    def __iter__(self):
        yield self.lo
        yield self.hi

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo) & (x <= self.hi)

    def intersect(self, other):
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo < hi else None

    def issuperset(self, other):
        return self.lo <= other.lo and other.hi <= self.hi


class DataNode(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class AffineMap1D:
    a: float
    b: float

    def __call__(self, x):
        return self.a * x + self.b

    def inverse(self, x):
        return (x - self.b) / self.a

    @property
    def fixed_point(self):
        return self.b / (1.0 - self.a)


# -- branch maps ---------------------------------------------------------------

class AffineBranch:
    """``F(x, y) = c x + d y + e``."""

    is_affine = True

    def __init__(self, c, d, e):
        self.c, self.d, self.e = float(c), float(d), float(e)

    def value(self, x, y):
        return self.c * x + self.d * y + self.e

    def dfdx(self, x, y):
        return np.broadcast_to(self.c, np.shape(x)) * 1.0 if np.ndim(x) else self.c

    def dfdy(self, x, y):
        return np.broadcast_to(self.d, np.shape(x)) * 1.0 if np.ndim(x) else self.d

    @property
    def invertible(self):
        return self.d != 0.0

    def solve_y(self, x, target):
        """The ``v`` with ``F(x, v) = target``."""
        if self.d == 0.0:
            raise NotInvertibleInY("affine branch with d = 0 is not invertible in y")
        return (target - self.c * x - self.e) / self.d

    def dy_sup(self, x, ylo, yhi):
        return abs(self.d)

    def inv_dy(self, x, v):
        return 1.0 / abs(self.d)

    def __repr__(self):
        return f"AffineBranch(c={self.c!r}, d={self.d!r}, e={self.e!r})"


class SinusoidalBranch:
    """``F(x, y) = xi y + sign sin(pi x)``."""

    is_affine = False

    def __init__(self, xi, sign):
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        self.xi, self.sign = float(xi), int(sign)

    def value(self, x, y):
        return self.xi * y + self.sign * np.sin(np.pi * x)

    def dfdx(self, x, y):
        return self.sign * np.pi * np.cos(np.pi * x)

    def dfdy(self, x, y):
        return np.broadcast_to(self.xi, np.shape(x)) * 1.0 if np.ndim(x) else self.xi

    @property
    def invertible(self):
        return self.xi != 0.0

    def solve_y(self, x, target):
        if self.xi == 0.0:
            raise NotInvertibleInY("sinusoidal branch with xi = 0 is not invertible in y")
        return (target - self.sign * np.sin(np.pi * x)) / self.xi

    def dy_sup(self, x, ylo, yhi):
        return abs(self.xi)

    def inv_dy(self, x, v):
        return 1.0 / abs(self.xi)

    def __repr__(self):
        return f"SinusoidalBranch(xi={self.xi!r}, sign={self.sign:+d})"


class ConjugateBranch:
    """``F(x, y) = g(L(g^-1(y + s x))) - s L(x)`` with ``g = f + s*id``.

    With shear ``s = 0`` this is the plain conjugate ``f(L(f^-1(y)))``; a
    nonzero shear is the conjugation by ``(x, y) -> (x, y + s x)`` used when
    ``f'`` varies too much over the interval.
    """

    is_affine = False
    invertible = True

    def __init__(self, g: scalar.ScalarFn, L: AffineMap1D, shear=0.0):
        self.g, self.L, self.shear = g, L, float(shear)

    def _ginv(self, z):
        z = np.asarray(z, dtype=float)
        if not np.all(self.g.inverse_defined(z)):
            bad = z[~self.g.inverse_defined(z)] if z.ndim else z
            raise OutsideValidityStrip(
                f"{self.g.name}^-1 undefined at {np.ravel(bad)[:3]}; "
                f"validity strip is {self.g.inverse_domain}")
        with np.errstate(all="ignore"):
            t = self.g.inv(z)
        if not np.all(np.isfinite(t)):
            raise OutsideValidityStrip(f"{self.g.name}^-1 left its validity strip")
        return t

    def _parts(self, x, y):
        t = self._ginv(y + self.shear * x)
        s = self.L(t)
        return t, s

    def value(self, x, y):
        t, s = self._parts(x, y)
        out = self.g(s) - self.shear * self.L(x)
        return out if np.ndim(out) else float(out)

    def dfdy(self, x, y):
        t, s = self._parts(x, y)
        out = self.g.d(s) * self.L.a / self.g.d(t)
        return out if np.ndim(out) else float(out)

    def dfdx(self, x, y):
        k = self.dfdy(x, y)
        return self.shear * k - self.shear * self.L.a

    def solve_y(self, x, target):
        q = self._ginv(target + self.shear * self.L(x))
        out = self.g(self.L.inverse(q)) - self.shear * x
        return out if np.ndim(out) else float(out)

    def dy_sup(self, x, ylo, yhi):
        ys = np.linspace(ylo, yhi, 9)
        xs = np.full_like(ys, x)
        with np.errstate(all="ignore"):
            try:
                vals = np.abs(self.dfdy(xs, ys))
            except OutsideValidityStrip:
                ok = self.g.inverse_defined(ys + self.shear * xs)
                vals = np.abs(self.dfdy(xs[ok], ys[ok])) if ok.any() else np.array([np.inf])
        return SAFETY * float(np.max(vals))

    def inv_dy(self, x, v):
        return 1.0 / abs(self.dfdy(x, v))

    def __repr__(self):
        return f"ConjugateBranch(g={self.g.name}, L={self.L}, shear={self.shear!r})"


# -- the IFS -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InterpolationIFS:
    nodes: tuple
    L: tuple
    F: tuple
    name: str = ""

    def __post_init__(self):
        nodes = tuple(DataNode(float(x), float(y)) for x, y in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "L", tuple(self.L))
        object.__setattr__(self, "F", tuple(self.F))
        n = len(nodes) - 1
        if n < 1:
            raise LengthMismatch("need at least two nodes")
        if len(self.L) != n or len(self.F) != n:
            raise LengthMismatch(f"{n + 1} nodes need {n} x-maps and {n} branches")
        xs = np.array([p.x for p in nodes])
        if np.any(np.diff(xs) <= 0):
            raise NonIncreasingNodes(f"node x values must increase strictly: {xs.tolist()}")
        failures = _condition_failures(self)
        if failures:
            raise InterpolationConditions("; ".join(failures))

    @property
    def N(self):
        return len(self.L)

    @cached_property
    def xs(self):
        return np.array([p.x for p in self.nodes])

    @cached_property
    def ys(self):
        return np.array([p.y for p in self.nodes])

    @property
    def x0(self):
        return self.nodes[0].x

    @property
    def xN(self):
        return self.nodes[-1].x

    @property
    def y0(self):
        return self.nodes[0].y

    @property
    def yN(self):
        return self.nodes[-1].y

    @property
    def domain(self):
        return Interval(self.x0, self.xN)

    @property
    def span(self):
        return self.xN - self.x0

    @property
    def is_affine(self):
        return all(f.is_affine for f in self.F)

    def branch_of(self, u):
        """0-based branch whose subinterval holds ``u``; ties go to the lower branch."""
        idx = np.searchsorted(self.xs, u, side="left")
        return np.clip(idx, 1, self.N) - 1

    def forward(self, i, x, y):
        return self.L[i](x), self.F[i].value(x, y)

    def inverse(self, i, X, Y):
        x = self.L[i].inverse(X)
        return x, self.F[i].solve_y(x, Y)

    def chord(self, x):
        t = (np.asarray(x, dtype=float) - self.x0) / self.span
        return self.y0 + t * (self.yN - self.y0)

    # -- cached geometry used by validation and error certificates ----------
    @cached_property
    def _sample(self):
        """Raw orbit of the branch maps from ``(x0, y0)``; no validation."""
        n = 2048
        rng = Xoshiro256(0x5EED)
        picks = rng.choices(self.N, n)
        pts = np.empty((n, 2))
        x, y = self.x0, self.y0
        for k, i in enumerate(picks):
            pts[k] = x, y
            x, y = self.L[i](x), float(self.F[i].value(x, y))
        return pts

    @cached_property
    def y_extent(self):
        """(ymin, ymax) of the attractor: closed form for affine, else sampled."""
        if self.is_affine:
            s = max(abs(f.d) for f in self.F)
            if s >= 1:
                return (-math.inf, math.inf)
            top = max(max(abs(f.c * self.x0 + f.e), abs(f.c * self.xN + f.e)) for f in self.F)
            bound = top / (1.0 - s)
            return (-bound, bound)
        ys = np.concatenate([self._sample[:, 1], self.ys])
        return (float(ys.min()), float(ys.max()))

    @cached_property
    def vertical_bound(self):
        """Bound on ``sup |f - g|`` for any ``g`` with values in the attractor's y-range."""
        lo, hi = self.y_extent
        if self.is_affine:
            return hi - lo
        return 2.0 * (hi - lo)

    @cached_property
    def branch_bounds(self):
        """Per-branch ``(sup |dF/dx|, sup |dF/dy|)``, exact for affine branches."""
        return tuple(_branch_bounds(self, F) for F in self.F)

    @cached_property
    def strip(self):
        """(ymin, ymax) of the sampling tube around the graph."""
        ys = np.concatenate([self._sample[:, 1], self.ys])
        lo, hi = float(ys.min()), float(ys.max())
        eps = 0.025 * max(hi - lo, 1e-12)
        return lo - eps, hi + eps

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<InterpolationIFS{label} N={self.N} on [{self.x0:g}, {self.xN:g}]>"


def _condition_failures(ifs):
    out = []
    x0, xN = ifs.nodes[0].x, ifs.nodes[-1].x
    y0, yN = ifs.nodes[0].y, ifs.nodes[-1].y

    def close(a, b):
        return abs(a - b) <= COND_TOL * max(1.0, abs(a), abs(b))

    for n, (L, F) in enumerate(zip(ifs.L, ifs.F), start=1):
        if not (close(L(x0), ifs.nodes[n - 1].x) and close(L(xN), ifs.nodes[n].x)):
            out.append(f"(a) fails for L_{n}")
    with np.errstate(all="ignore"):
        try:
            if not close(float(ifs.F[0].value(x0, y0)), y0):
                out.append("(b) fails: F_1(x0, y0) != y0")
            if not close(float(ifs.F[-1].value(xN, yN)), yN):
                out.append("(b) fails: F_N(xN, yN) != yN")
            for n in range(1, ifs.N):
                left = float(ifs.F[n].value(x0, y0))
                right = float(ifs.F[n - 1].value(xN, yN))
                if not (close(left, right) and close(right, ifs.nodes[n].y)):
                    out.append(f"(c) fails between branches {n} and {n + 1}")
        except OutsideValidityStrip as exc:
            out.append(f"branch evaluation left its validity strip: {exc}")
    return out


@dataclass
class ValidationReport:
    conditions_abc: dict
    M_bound: float
    s_bound: float
    metric_e: float
    metric_contraction: float
    invertible_in_y: tuple
    warnings: list = field(default_factory=list)

    @property
    def valid(self):
        return (all(self.conditions_abc[k] for k in "abc")
                and self.s_bound < 1 and math.isfinite(self.M_bound))


def _tube_points(ifs, per=256):
    pts = ifs._sample[:: max(1, len(ifs._sample) // per)]
    lo, hi = ifs.strip
    eps = 0.025 * max(hi - lo, 1e-12) / 1.05
    offs = np.linspace(-eps, eps, 5)
    x = np.repeat(pts[:, 0], len(offs))
    y = (pts[:, 1][:, None] + offs[None, :]).ravel()
    return np.concatenate([x, ifs.xs]), np.concatenate([y, ifs.ys])


def _branch_bounds(ifs, F):
    if isinstance(F, AffineBranch):
        return abs(F.c), abs(F.d)
    if isinstance(F, SinusoidalBranch):
        # sup of |pi cos(pi x)| over the domain, analytically
        lo, hi = ifs.x0, ifs.xN
        if math.floor(hi) >= math.ceil(lo):
            m = math.pi
        else:
            m = math.pi * max(abs(math.cos(math.pi * lo)), abs(math.cos(math.pi * hi)))
        return m, abs(F.xi)
    x, y = _tube_points(ifs)
    with np.errstate(all="ignore"):
        hx = np.abs(F.dfdx(x, y))
        ky = np.abs(F.dfdy(x, y))
    return SAFETY * float(np.max(hx)), SAFETY * float(np.max(ky))


def validate(ifs: InterpolationIFS, require_invertible=True) -> ValidationReport:
    """Check the interpolation conditions and estimate the constants of the
    Lipschitz-type bound ``|F(x,y) - F(x',y')| <= M|x-x'| + s|y-y'|``.

    Affine branches give exact constants; other branches are sampled on a
    thin tube around the graph and inflated by 10%.
    """
    failures = _condition_failures(ifs)
    conditions = {
        "a": not any(f.startswith("(a)") for f in failures),
        "b": not any(f.startswith("(b)") for f in failures),
        "c": not any(f.startswith("(c)") for f in failures),
        "detail": failures,
    }
    bounds = ifs.branch_bounds
    M = max(b[0] for b in bounds)
    s = max(b[1] for b in bounds)
    a_max = max(abs(L.a) for L in ifs.L)
    warnings = []
    if a_max >= 1:
        warnings.append("x-maps are not strict contractions (single branch?); "
                        "the W-operator still converges but the set map does not contract")
        e, contraction = math.inf, max(1.0, s)
    elif M == 0:
        e, contraction = 1.0, max(a_max, s)
    else:
        e = 2.0 * M / (1.0 - a_max)
        contraction = max(a_max + M / e, s)
    invertible = tuple(bool(F.invertible) for F in ifs.F)
    report = ValidationReport(conditions, M, s, e, contraction, invertible, warnings)
    if s >= 1:
        raise NotContractive(f"vertical contraction bound s = {s:.6g} >= 1")
    if require_invertible and not all(invertible):
        bad = [n + 1 for n, ok in enumerate(invertible) if not ok]
        raise NotInvertibleInY(f"branches {bad} are not invertible in y")
    return report


# -- constructors ----------------------------------------------------------------

def _as_nodes(nodes):
    out = [DataNode(float(x), float(y)) for x, y in nodes]
    if len(out) < 2:
        raise LengthMismatch("need at least two nodes")
    xs = [p.x for p in out]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise NonIncreasingNodes(f"node x values must increase strictly: {xs}")
    return out


def ifs_from_data(nodes: Sequence, d: Sequence[float], name="") -> InterpolationIFS:
    """Affine fractal interpolation through ``nodes`` with vertical scalings ``d``."""
    nodes = _as_nodes(nodes)
    d = [float(v) for v in np.atleast_1d(d)]
    n = len(nodes) - 1
    if len(d) != n:
        raise LengthMismatch(f"{n + 1} nodes need {n} vertical scaling factors, got {len(d)}")
    for k, v in enumerate(d, start=1):
        if not abs(v) < 1:
            raise ScalingOutOfRange(f"|d_{k}| = {abs(v)} must be < 1")
    (x0, y0), (xN, yN) = nodes[0], nodes[-1]
    span = xN - x0
    L, F = [], []
    for k in range(1, n + 1):
        (xa, ya), (xb, yb) = nodes[k - 1], nodes[k]
        a = (xb - xa) / span
        b = xa - a * x0
        c = (yb - ya - d[k - 1] * (yN - y0)) / span
        e = ya - c * x0 - d[k - 1] * y0
        L.append(AffineMap1D(a, b))
        F.append(AffineBranch(c, d[k - 1], e))
    return InterpolationIFS(tuple(nodes), L, F, name)


def ifs_from_affine_maps(maps, name="") -> InterpolationIFS:
    """IFS from explicit ``(a, b, c, d, e)`` tuples, i.e.
    ``w(x, y) = (a x + b, c x + d y + e)``.

    Nodes are derived from the maps: ``(x0, y0)`` is the fixed point of the
    first map, ``(xN, yN)`` that of the last, and ``(x_n, y_n) = w_n(xN, yN)``.
    """
    L = [AffineMap1D(a, b) for a, b, *_ in maps]
    F = [AffineBranch(c, d, e) for _, _, c, d, e in maps]
    x0, xN = L[0].fixed_point, L[-1].fixed_point
    y0 = (F[0].c * x0 + F[0].e) / (1.0 - F[0].d)
    yN = (F[-1].c * xN + F[-1].e) / (1.0 - F[-1].d)
    nodes = [(x0, y0)]
    for Ln, Fn in zip(L[:-1], F[:-1]):
        nodes.append((Ln(xN), Fn.value(xN, yN)))
    nodes.append((xN, yN))
    return InterpolationIFS(tuple(nodes), L, F, name)


def apply_branch(ifs: InterpolationIFS, n: int, p):
    """``w_n(p)`` with 1-based ``n``."""
    if not 1 <= n <= ifs.N:
        raise BranchOutOfRange(f"branch {n} not in 1..{ifs.N}")
    x, y = p
    return ifs.forward(n - 1, x, y)


def invert_branch(ifs: InterpolationIFS, n: int, p):
    """``w_n^{-1}(p) = (L_n^{-1}(x), F_n^*(x, y))`` with 1-based ``n``."""
    if not 1 <= n <= ifs.N:
        raise BranchOutOfRange(f"branch {n} not in 1..{ifs.N}")
    X, Y = p
    return ifs.inverse(n - 1, X, Y)


def _halves(domain):
    lo, hi = domain
    return AffineMap1D(0.5, 0.5 * lo), AffineMap1D(0.5, 0.5 * hi)


def _ratio_max(dg, grid, maps):
    base = dg(grid)
    return max(float(np.max(np.abs(dg(L(grid)) / base))) for L in maps)


def ifs_from_analytic(f: scalar.ScalarFn, domain, grid=1024, max_shear_exp=30, name="") -> InterpolationIFS:
    """Two-branch IFS whose attractor is the graph of ``f`` on ``domain``.

    Branches are ``(L_n(x), f(L_n(f^-1(y))))`` with ``L_1, L_2`` mapping the
    domain onto its halves.  When ``|f'(L_n x) / f'(x)| < 2`` fails on the
    grid (with the sampling safety margin, so the bound is ``2 / 1.1``),
    ``f`` is sheared to ``g = f + c x`` with ``c`` the first power of two
    (signed like ``f'``) that satisfies it, and the result is conjugated back.
    """
    domain = domain if isinstance(domain, Interval) else Interval(*domain)
    if f.deriv is None or f.inverse is None:
        raise ValueError("f needs a derivative and an inverse")
    # odd point count so the midpoint is on the grid
    t = np.linspace(domain.lo, domain.hi, grid + 1)
    df = np.asarray(f.d(t), dtype=float)
    vals = np.asarray(f(t), dtype=float)
    scale = float(np.max(np.abs(df)))
    if np.any(np.sign(df) * np.sign(df[0]) < 0) or not (
            np.all(np.diff(vals) > 0) or np.all(np.diff(vals) < 0)):
        raise NotMonotone(f"{f.name} is not strictly monotone on [{domain.lo}, {domain.hi}]")
    if scale == 0 or np.any(np.abs(df) <= 1e-12 * scale):
        raise DerivativeVanishes(f"{f.name}' vanishes on [{domain.lo}, {domain.hi}]")
    maps = _halves(domain)
    shear = 0.0
    if _ratio_max(f.d, t, maps) >= RATIO_LIMIT:
        sign = 1.0 if df[0] > 0 else -1.0
        for k in range(max_shear_exp + 1):
            c = sign * 2.0 ** k
            dg = lambda x, c=c: f.d(x) + c
            g_t = dg(t)
            if np.any(np.abs(g_t) <= 1e-12 * np.max(np.abs(g_t))) or np.any(np.sign(g_t) != sign):
                continue
            if _ratio_max(dg, t, maps) < RATIO_LIMIT:
                shear = c
                break
        else:
            raise ConditionUnattainable(f"no shear up to 2^{max_shear_exp} satisfies the ratio test")
    if shear:
        pad = 64.0 * domain.width
        g = scalar.sheared(f, shear, (domain.lo - pad, domain.hi + pad))
    else:
        g = f
    mid = 0.5 * (domain.lo + domain.hi)
    nodes = [(x, float(f(x))) for x in (domain.lo, mid, domain.hi)]
    F = [ConjugateBranch(g, L, shear) for L in maps]
    return InterpolationIFS(tuple(nodes), maps, F, name or f"analytic:{f.name}")


# -- planar affine IFS (not of interpolation form) --------------------------------

@dataclass(frozen=True, eq=False)
class GeneralAffineIFS2D:
    matrices: np.ndarray
    translations: np.ndarray
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.matrices, dtype=float).reshape(-1, 2, 2)
        t = np.asarray(self.translations, dtype=float).reshape(-1, 2)
        if len(A) != len(t):
            raise LengthMismatch("one translation per matrix")
        if np.any(np.abs(np.linalg.det(A)) == 0):
            raise NotInvertibleInY("every planar map must be invertible")
        object.__setattr__(self, "matrices", A)
        object.__setattr__(self, "translations", t)

    @property
    def N(self):
        return len(self.matrices)

    def forward(self, i, p):
        return self.matrices[i] @ np.asarray(p, dtype=float) + self.translations[i]

    def fixed_point(self, i):
        return np.linalg.solve(np.eye(2) - self.matrices[i], self.translations[i])

    def certify(self):
        """(contractive, weight, norm): the best ``max_n ||D A_n D^-1||_2`` over
        diagonal weightings ``D = diag(1, w)``, ``w`` a power of two."""
        best = (math.inf, None)
        for k in range(-12, 13):
            w = 2.0 ** k
            D, Dinv = np.diag([1.0, w]), np.diag([1.0, 1.0 / w])
            norm = max(np.linalg.norm(D @ A @ Dinv, 2) for A in self.matrices)
            if norm < best[0]:
                best = (norm, w)
        return best[0] < 1, best[1], best[0]

    def require_contractive(self):
        ok, w, norm = self.certify()
        if not ok:
            raise NotContractive(f"no diagonal weighting makes every map contract (best {norm:.4g})")
        return w, norm
