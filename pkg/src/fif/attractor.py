"""Attractors: chaos game, Hutchinson and W-operator steps, pointwise
evaluation with an error certificate, and Hausdorff distances."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyCloud, GridMismatch, NotContractive, OutOfDomain
from .ifs import (
    AffineBranch,
    GeneralAffineIFS2D,
    InterpolationIFS,
    SinusoidalBranch,
    validate,
)
from .rng import Xoshiro256

DEFAULT_BURN_IN = 64


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Sampled graph points; ``tags[i]`` is the 1-based branch that produced
    point ``i`` (0 for a start point)."""

    points: np.ndarray
    tags: np.ndarray
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        tags = np.asarray(self.tags, dtype=np.int64).reshape(-1)
        if len(tags) != len(pts):
            raise ValueError("one tag per point")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tags", tags)

    @classmethod
    def empty(cls, seed=0):
        return cls(np.empty((0, 2)), np.empty(0, dtype=np.int64), seed)

    @property
    def count(self):
        return len(self.points)

    def __len__(self):
        return len(self.points)

    @property
    def xs(self):
        return self.points[:, 0]

    @property
    def ys(self):
        return self.points[:, 1]

    def shifted(self, dx=0.0, dy=0.0):
        return PointCloud(self.points + [dx, dy], self.tags, self.seed, self.stream)

    @staticmethod
    def concat(clouds):
        clouds = list(clouds)
        if not clouds:
            return PointCloud.empty()
        return PointCloud(np.concatenate([c.points for c in clouds]),
                          np.concatenate([c.tags for c in clouds]),
                          clouds[0].seed, clouds[0].stream)


@dataclass(frozen=True, eq=False)
class PolylineApproximant:
    xs: np.ndarray
    ys: np.ndarray
    sup_error_bound: float

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
            raise GridMismatch("xs and ys must be equal-length 1-d arrays of length >= 2")
        if np.any(np.diff(xs) <= 0):
            raise GridMismatch("polyline grid must be strictly increasing")
        if not self.sup_error_bound >= 0:
            raise ValueError("sup_error_bound must be >= 0")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __call__(self, x):
        return np.interp(x, self.xs, self.ys)


# -- chaos game ------------------------------------------------------------------

def _require_contractive(ifs):
    report = validate(ifs, require_invertible=False)
    if report.metric_contraction >= 1:
        raise NotContractive(
            f"metric contraction {report.metric_contraction:.6g} >= 1; "
            "the chaos game would not converge to a graph")
    return report


def _orbit(ifs, picks, x, y):
    """Iterate from ``(x, y)`` along the branch indices ``picks``."""
    n = len(picks)
    out_x = [0.0] * n
    out_y = [0.0] * n
    if all(isinstance(F, AffineBranch) for F in ifs.F):
        A = [L.a for L in ifs.L]
        B = [L.b for L in ifs.L]
        C = [F.c for F in ifs.F]
        D = [F.d for F in ifs.F]
        E = [F.e for F in ifs.F]
        for k, i in enumerate(picks):
            x, y = A[i] * x + B[i], C[i] * x + D[i] * y + E[i]
            out_x[k] = x
            out_y[k] = y
    elif all(isinstance(F, SinusoidalBranch) for F in ifs.F):
        A = [L.a for L in ifs.L]
        B = [L.b for L in ifs.L]
        XI = [F.xi for F in ifs.F]
        SG = [F.sign for F in ifs.F]
        sin, pi = math.sin, math.pi
        for k, i in enumerate(picks):
            x, y = A[i] * x + B[i], XI[i] * y + SG[i] * sin(pi * x)
            out_x[k] = x
            out_y[k] = y
    else:
        for k, i in enumerate(picks):
            x, y = ifs.L[i](x), float(ifs.F[i].value(x, y))
            out_x[k] = x
            out_y[k] = y
    return np.column_stack([out_x, out_y]) if n else np.empty((0, 2))


def chaos_game(ifs: InterpolationIFS, count: int, seed: int = 0,
               burn_in: int = DEFAULT_BURN_IN, stream: int = 0) -> PointCloud:
    """Random iteration from ``(x0, y0)`` with uniformly chosen branches.

    The orbit is ``p_0 = (x0, y0), p_j = w_{i_j}(p_{j-1})`` with
    ``i_j = next() mod N`` from xoshiro256**; the first ``burn_in`` points
    are discarded and the next ``count`` returned.  Since ``(x0, y0)`` lies
    on the attractor, so does every emitted point, up to rounding.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    _require_contractive(ifs)
    rng = Xoshiro256(seed, stream)
    steps = burn_in + count - 1
    picks = rng.choices(ifs.N, steps)
    orbit = _orbit(ifs, picks, ifs.x0, ifs.y0)
    pts = np.vstack([[ifs.x0, ifs.y0], orbit])
    tags = np.concatenate([[0], np.asarray(picks, dtype=np.int64) + 1])
    return PointCloud(pts[burn_in:], tags[burn_in:], seed, stream)


def worker_count(default=None):
    env = os.environ.get("FIF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default or os.cpu_count() or 1


def chaos_game_sharded(ifs, count, seed=0, burn_in=DEFAULT_BURN_IN, shards=4, workers=None):
    """Chaos game split over ``shards`` PRNG streams of the same seed.

    Shard ``s`` uses stream ``s``; results are concatenated in stream order,
    so the output does not depend on ``workers``.
    """
    _require_contractive(ifs)
    shards = max(1, min(shards, count))
    sizes = [count // shards + (1 if s < count % shards else 0) for s in range(shards)]
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        parts = list(pool.map(
            lambda s: chaos_game(ifs, sizes[s], seed, burn_in, stream=s), range(shards)))
    out = PointCloud.concat(parts)
    return PointCloud(out.points, out.tags, seed, 0)


def attractor_general(ifs: GeneralAffineIFS2D, count: int, seed: int = 0,
                      burn_in: int = DEFAULT_BURN_IN, start=None) -> PointCloud:
    """Chaos game for planar affine maps ``p -> A_n p + t_n``."""
    ifs.require_contractive()
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = Xoshiro256(seed)
    picks = rng.choices(ifs.N, burn_in + count - 1)
    coeffs = [(A[0, 0], A[0, 1], A[1, 0], A[1, 1], t[0], t[1])
              for A, t in zip(ifs.matrices, ifs.translations)]
    x, y = (ifs.fixed_point(0) if start is None else np.asarray(start, dtype=float)).tolist()
    xs, ys = [x], [y]
    for i in picks:
        p, q, r, s, u, v = coeffs[i]
        x, y = p * x + q * y + u, r * x + s * y + v
        xs.append(x)
        ys.append(y)
    pts = np.column_stack([xs, ys])
    tags = np.concatenate([[0], np.asarray(picks, dtype=np.int64) + 1])
    return PointCloud(pts[burn_in:], tags[burn_in:], seed)


# -- set and function operators ------------------------------------------------------

def hutchinson_step(ifs: InterpolationIFS, cloud: PointCloud) -> PointCloud:
    """``W(K) = union of w_n(K)``, branch-major order, tagged by branch."""
    if len(cloud) == 0:
        return PointCloud.empty(cloud.seed)
    x, y = cloud.xs, cloud.ys
    pts, tags = [], []
    for i in range(ifs.N):
        X, Y = ifs.forward(i, x, y)
        pts.append(np.column_stack([X, np.broadcast_to(Y, X.shape)]))
        tags.append(np.full(len(x), i + 1))
    return PointCloud(np.concatenate(pts), np.concatenate(tags), cloud.seed)


def hutchinson_cloud(ifs: InterpolationIFS, level: int) -> PointCloud:
    """``W^level({(x0, y0)})``: ``N**level`` points of G, no randomness.

    ``(x0, y0)`` is fixed by ``w_1``, so each level contains the previous one
    and the images ``w_n(C)`` of a level are all in the next level.
    """
    if level < 0 or ifs.N ** level > 2**26:
        raise ValueError(f"level {level} out of range for N={ifs.N}")
    cloud = PointCloud(np.array([[ifs.x0, ifs.y0]]), np.array([0]))
    for _ in range(level):
        cloud = hutchinson_step(ifs, cloud)
    return cloud


def chord_polyline(ifs: InterpolationIFS) -> PolylineApproximant:
    """Straight line through the end nodes with a bound on its distance to f."""
    lo, hi = ifs.y_extent
    a, b = min(ifs.y0, ifs.yN), max(ifs.y0, ifs.yN)
    bound = max(hi - a, b - lo)
    return PolylineApproximant(np.array([ifs.x0, ifs.xN]), np.array([ifs.y0, ifs.yN]), bound)


def w_operator(ifs: InterpolationIFS, f0: PolylineApproximant) -> PolylineApproximant:
    """``(Wg)(x) = F_n(L_n^-1 x, g(L_n^-1 x))`` on the refined grid."""
    tol = 1e-12 * max(1.0, abs(ifs.x0), abs(ifs.xN))
    if abs(f0.xs[0] - ifs.x0) > tol or abs(f0.xs[-1] - ifs.xN) > tol:
        raise GridMismatch(f"grid spans [{f0.xs[0]}, {f0.xs[-1]}], expected [{ifs.x0}, {ifs.xN}]")
    ytol = 1e-12 * max(1.0, abs(ifs.y0), abs(ifs.yN))
    if abs(f0.ys[0] - ifs.y0) > ytol or abs(f0.ys[-1] - ifs.yN) > ytol:
        raise GridMismatch("polyline must pass through the end nodes")
    t = f0.xs.copy()
    t[0], t[-1] = ifs.x0, ifs.xN
    s = validate(ifs, require_invertible=False).s_bound
    xs, ys = [], []
    for i in range(ifs.N):
        X, Y = ifs.forward(i, t, f0.ys)
        Y = np.array(Y, dtype=float)
        Y[0], Y[-1] = ifs.ys[i], ifs.ys[i + 1]
        X = np.array(X, dtype=float)
        X[0], X[-1] = ifs.xs[i], ifs.xs[i + 1]
        if i:
            X, Y = X[1:], Y[1:]
        xs.append(X)
        ys.append(Y)
    return PolylineApproximant(np.concatenate(xs), np.concatenate(ys), s * f0.sup_error_bound)


# -- pointwise evaluation -----------------------------------------------------------

def evaluate_many(ifs: InterpolationIFS, x, depth: int = 40):
    """Vectorised :func:`evaluate`; returns ``(y, error_bound)`` arrays."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    tol = 1e-12 * ifs.span
    if np.any(~np.isfinite(x)) or np.any(x < ifs.x0 - tol) or np.any(x > ifs.xN + tol):
        bad = x[~((x >= ifs.x0 - tol) & (x <= ifs.xN + tol))]
        raise OutOfDomain(f"x = {bad[:3].tolist()} outside [{ifs.x0}, {ifs.xN}]")
    u = np.clip(x, ifs.x0, ifs.xN)
    n = len(u)
    A = np.array([L.a for L in ifs.L])
    Bx = np.array([L.b for L in ifs.L])
    s_n = np.array([b[1] for b in ifs.branch_bounds])

    us = np.empty((depth + 1, n))
    path = np.zeros((depth, n), dtype=np.int64)
    us[0] = u
    # level at which the descent stopped on a node (exact value known)
    stop = np.full(n, depth)
    seed = np.full(n, np.nan)
    hit = np.searchsorted(ifs.xs, u)
    on_node = (hit <= ifs.N) & (ifs.xs[np.minimum(hit, ifs.N)] == u)
    stop[on_node] = 0
    seed[on_node] = ifs.ys[hit[on_node]]
    active = ~on_node
    for j in range(depth):
        i = ifs.branch_of(us[j])
        path[j] = i
        nxt = np.clip((us[j] - Bx[i]) / A[i], ifs.x0, ifs.xN)
        us[j + 1] = np.where(active, nxt, us[j])
        if not active.any():
            continue
        hit = np.searchsorted(ifs.xs, us[j + 1])
        landed = active & (ifs.xs[np.minimum(hit, ifs.N)] == us[j + 1])
        stop[landed] = j + 1
        seed[landed] = ifs.ys[hit[landed]]
        active &= ~landed
    exact = ~np.isnan(seed)
    last = us[stop, np.arange(n)]
    y = np.where(exact, seed, ifs.chord(last))
    err = np.where(exact, 0.0, ifs.vertical_bound)
    for j in range(depth - 1, -1, -1):
        live = stop > j
        if not live.any():
            continue
        for i in range(ifs.N):
            m = live & (path[j] == i)
            if m.any():
                y[m] = ifs.F[i].value(us[j + 1][m], y[m])
                err[m] *= s_n[i]
    # exact node values at the query points themselves
    y[on_node] = seed[on_node]
    return y, err


def evaluate(ifs: InterpolationIFS, x: float, depth: int = 40):
    """``f(x)`` by address descent, with a bound on ``|y - f(x)|``.

    Descends ``depth`` levels through ``u -> L_n^-1(u)`` (ties go to the
    lower branch), seeds with the chord value, and unwinds through the
    ``F_n``.  The bound is the attractor's vertical spread times the
    product of the per-branch ``sup |dF/dy|`` along the path; when the
    descent lands on a node the seed is exact and the bound is 0.
    """
    y, err = evaluate_many(ifs, [x], depth)
    return float(y[0]), float(err[0])


# -- Hausdorff distance ---------------------------------------------------------------

def _as_points(c):
    pts = c.points if isinstance(c, PointCloud) else np.asarray(c, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise EmptyCloud("Hausdorff distance needs nonempty point sets")
    return pts


def directed_hausdorff(A, B) -> float:
    """``max_{a in A} min_{b in B} |a - b|`` (exact, via a k-d tree on B)."""
    a, b = _as_points(A), _as_points(B)
    dist, _ = cKDTree(b).query(a, k=1)
    return float(np.max(dist))


def hausdorff_distance(A, B) -> float:
    """Symmetric Euclidean Hausdorff distance between two point sets."""
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))
