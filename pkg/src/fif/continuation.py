"""Fractal continuation along address strings.

For an address ``theta = theta_1 theta_2 ...`` the continuation on depth
``k`` has graph ``w_{theta_1}^-1 o ... o w_{theta_k}^-1 (G)``; the innermost
inverse ``w_{theta_k}^-1`` is applied first.  Its domain is
``I_{theta|k} = L_{theta_1}^-1 o ... o L_{theta_k}^-1 (I)``.
"""
from __future__ import annotations

import itertools
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .attractor import PointCloud, chaos_game, evaluate_many, worker_count, DEFAULT_BURN_IN
from .errors import (
    AddressSyntaxError,
    AddressTooShort,
    EmptyPeriodParens,
    EnsembleTooLarge,
    NonAffineUnsupported,
    OutOfDomainAtCap,
    SymbolOutOfRange,
    UnsupportedBranchCount,
)
from .ifs import AffineBranch, AffineMap1D, InterpolationIFS, Interval

MAX_ENSEMBLE = 10 ** 6


@dataclass(frozen=True)
class Address:
    """Word over ``1..N`` with an optional periodic tail."""

    head: tuple = ()
    period: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "head", tuple(int(s) for s in self.head))
        if self.period is not None:
            period = tuple(int(s) for s in self.period)
            if not period:
                raise EmptyPeriodParens("period must be nonempty")
            object.__setattr__(self, "period", period)
        if any(s < 1 for s in self.symbols()):
            raise SymbolOutOfRange("address symbols start at 1")

    @classmethod
    def constant(cls, n):
        return cls((), (n,))

    def symbols(self):
        return self.head + (self.period or ())

    @property
    def is_periodic(self):
        return self.period is not None

    def __getitem__(self, j):
        """0-based symbol access into the infinite word."""
        if j < len(self.head):
            return self.head[j]
        if self.period is None:
            raise AddressTooShort(f"address {self} has no symbol at position {j + 1}")
        return self.period[(j - len(self.head)) % len(self.period)]

    def prefix(self, k):
        return tuple(self[j] for j in range(k))

    def check(self, n):
        bad = [s for s in self.symbols() if not 1 <= s <= n]
        if bad:
            raise SymbolOutOfRange(f"symbols {bad} not in 1..{n}")
        return self

    def then(self, tail: "Address") -> "Address":
        """Finite head of ``self`` followed by ``tail``."""
        if self.period is not None:
            raise ValueError("cannot append to an infinite address")
        return Address(self.head + tail.head, tail.period)

    def __str__(self):
        return format_address(self)


_PERIOD = re.compile(r"^(?P<head>[^()]*)(\((?P<period>[^()]*)\))?\s*$")


def _symbols(text, n):
    text = text.strip()
    if not text:
        return ()
    if "," in text:
        parts = [p.strip() for p in text.split(",")]
    elif re.search(r"\s", text):
        parts = text.split()
    elif n is not None and n > 9 and len(text) > 1:
        raise AddressSyntaxError(f"{text!r}: separate symbols with commas when N > 9")
    else:
        parts = list(text)
    out = []
    for p in parts:
        if not re.fullmatch(r"\d+", p):
            raise AddressSyntaxError(f"bad symbol {p!r}")
        out.append(int(p))
    return tuple(out)


def parse_address(text: str, n: Optional[int] = None) -> Address:
    """Parse ``"221(1)"``, ``"(2)"`` or ``"10,3(1,2)"``.

    Symbols are single digits when unseparated, otherwise whitespace- or
    comma-separated; an optional trailing parenthesised group is the period.
    """
    m = _PERIOD.match(text)
    if not m:
        raise AddressSyntaxError(f"cannot parse address {text!r}")
    head = _symbols(m.group("head"), n)
    period = None
    if m.group(2) is not None:
        period = _symbols(m.group("period"), n)
        if not period:
            raise EmptyPeriodParens(f"empty period in {text!r}")
    addr = Address(head, period)
    return addr.check(n) if n is not None else addr


def format_address(addr: Address, n: Optional[int] = None) -> str:
    wide = (n is not None and n > 9) or any(s > 9 for s in addr.symbols())
    sep = "," if wide else ""
    out = sep.join(map(str, addr.head))
    if addr.period is not None:
        out += "(" + sep.join(map(str, addr.period)) + ")"
    return out


def _as_address(theta, n=None):
    if isinstance(theta, Address):
        addr = theta
    elif isinstance(theta, str):
        addr = parse_address(theta, n)
    else:
        addr = Address(tuple(theta))
    return addr.check(n) if n is not None else addr


# -- domains ----------------------------------------------------------------------

def domain_interval(ifs: InterpolationIFS, theta, k: int) -> Interval:
    """``I_{theta|k}``; nested increasing in ``k``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    theta = _as_address(theta, ifs.N)
    lo, hi = ifs.x0, ifs.xN
    for j in range(k - 1, -1, -1):
        L = ifs.L[theta[j] - 1]
        lo, hi = sorted((L.inverse(lo), L.inverse(hi)))
    return Interval(lo, hi)


def domain_limit_kind(ifs: InterpolationIFS, theta) -> str:
    """``right_ray`` for the constant word 1, ``left_ray`` for the constant
    word N, ``full_line`` for every other eventually periodic address."""
    theta = _as_address(theta, ifs.N)
    if not theta.is_periodic:
        raise AddressTooShort("the limit domain needs an eventually periodic address")
    syms = set(theta.symbols())
    if syms == {1}:
        return "right_ray"
    if syms == {ifs.N}:
        return "left_ray"
    return "full_line"


# -- pointwise continuation -----------------------------------------------------------

@dataclass(frozen=True)
class ContinuationResult:
    value: float
    depth_used: int
    error_bound: float
    domain_at_depth: Interval


def _forward_images(ifs, theta, x, cap):
    """Rows ``p_0 = x, p_j = L_{theta_j}(p_{j-1})`` and the minimal depth per column."""
    tol = 1e-12 * ifs.span
    p = np.empty((cap + 1, len(x)))
    p[0] = x
    depth = np.full(len(x), -1)
    inside = (x >= ifs.x0 - tol) & (x <= ifs.xN + tol)
    depth[inside] = 0
    for j in range(1, cap + 1):
        L = ifs.L[theta[j - 1] - 1]
        p[j] = L(p[j - 1])
        newly = (depth < 0) & (p[j] >= ifs.x0 - tol) & (p[j] <= ifs.xN + tol)
        depth[newly] = j
        if (depth >= 0).all():
            return p[: j + 1], depth
    return p, depth


def continue_many(ifs: InterpolationIFS, theta, x, depth_cap: int = 64, anchor_depth: int = 40):
    """Vectorised :func:`continue_eval`: ``(values, depths, error_bounds)``."""
    theta = _as_address(theta, ifs.N)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    p, k = _forward_images(ifs, theta, x, depth_cap)
    if np.any(k < 0):
        bad = x[k < 0]
        raise OutOfDomainAtCap(
            f"x = {bad[:3].tolist()} not in I_theta|{depth_cap} = {domain_interval(ifs, theta, depth_cap)}")
    cols = np.arange(len(x))
    u = np.clip(p[k, cols], ifs.x0, ifs.xN)
    v, err = evaluate_many(ifs, u, anchor_depth)
    for j in range(int(k.max()) if len(k) else 0, 0, -1):
        m = k >= j
        F = ifs.F[theta[j - 1] - 1]
        v[m] = F.solve_y(p[j - 1][m], v[m])
        err[m] = err[m] * np.abs(F.inv_dy(p[j - 1][m], v[m]))
    return v, k, err


def continue_eval(ifs: InterpolationIFS, theta, x: float, depth_cap: int = 64) -> ContinuationResult:
    """``f_theta(x)`` using the smallest ``k`` with ``x`` in ``I_{theta|k}``.

    The anchor ``f(u)``, ``u = L_{theta_k}(... L_{theta_1}(x))``, comes from
    :func:`evaluate` at depth 40 and is pulled back through
    ``F_{theta_k}^*, ..., F_{theta_1}^*``.  Its error bound is multiplied by
    ``1 / |dF/dy|`` at each step: exact for affine and sinusoidal branches,
    a first-order estimate otherwise.
    """
    theta = _as_address(theta, ifs.N)
    v, k, err = continue_many(ifs, theta, [x], depth_cap)
    depth = int(k[0])
    return ContinuationResult(float(v[0]), depth, float(err[0]), domain_interval(ifs, theta, depth))


def continuation_cloud(ifs: InterpolationIFS, theta, k: int, count: int, seed: int = 0,
                       burn_in: int = DEFAULT_BURN_IN, base: Optional[PointCloud] = None) -> PointCloud:
    """Chaos-game sample of ``G`` pulled back through ``w_{theta|k}^-1``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    theta = _as_address(theta, ifs.N)
    cloud = base if base is not None else chaos_game(ifs, count, seed, burn_in)
    x, y = cloud.xs.copy(), cloud.ys.copy()
    for j in range(k, 0, -1):
        i = theta[j - 1] - 1
        x = ifs.L[i].inverse(x)
        y = np.asarray(ifs.F[i].solve_y(x, y), dtype=float)
    return PointCloud(np.column_stack([x, y]), cloud.tags, cloud.seed, cloud.stream)


def _homogeneous(L, F):
    return np.array([[L.a, 0.0, L.b], [F.c, F.d, F.e], [0.0, 0.0, 1.0]])


def conjugated_ifs(ifs: InterpolationIFS, theta, k: int) -> InterpolationIFS:
    """Affine IFS ``T w_n T^-1`` with ``T = w_{theta|k}^-1``; its attractor
    is ``G_{theta|k}`` and its nodes are the ``T``-images of the nodes."""
    if not all(isinstance(F, AffineBranch) for F in ifs.F):
        raise NonAffineUnsupported("conjugation is closed-form only for affine branches")
    theta = _as_address(theta, ifs.N)
    if k == 0:
        return ifs
    mats = [_homogeneous(L, F) for L, F in zip(ifs.L, ifs.F)]
    T = np.eye(3)
    T_inv = np.eye(3)
    for j in range(k):
        M = mats[theta[j] - 1]
        T = T @ np.linalg.inv(M)
        T_inv = M @ T_inv
    # T_inv is w_{theta_k} o ... o w_{theta_1}, the exact inverse of T
    L, F = [], []
    for M in mats:
        C = T @ M @ T_inv
        L.append(AffineMap1D(C[0, 0], C[0, 2]))
        F.append(AffineBranch(C[1, 0], C[1, 1], C[1, 2]))
    nodes = [tuple((T @ [x, y, 1.0])[:2]) for x, y in ifs.nodes]
    name = f"{ifs.name or 'ifs'}|{format_address(Address(theta.prefix(k)), ifs.N)}"
    return InterpolationIFS(tuple(nodes), L, F, name)


# -- ensembles -----------------------------------------------------------------------

@dataclass(frozen=True)
class EnsembleMember:
    ifs: InterpolationIFS
    prefix: tuple

    @property
    def address(self):
        return Address(self.prefix)

    @property
    def label(self):
        return format_address(self.address, self.ifs.N)

    @property
    def domain(self):
        return domain_interval(self.ifs, self.address, len(self.prefix))

    def evaluate(self, x):
        """Values of ``f_{prefix}`` at ``x`` (array in, array out)."""
        v, _, _ = continue_many(self.ifs, self.address, x, len(self.prefix))
        return v

    def cloud(self, count, seed=0, burn_in=DEFAULT_BURN_IN, base=None):
        return continuation_cloud(self.ifs, self.address, len(self.prefix), count, seed, burn_in, base)


def ensemble(ifs: InterpolationIFS, k: int) -> list:
    """One member per word in ``{1..N}^k``, in lexicographic order."""
    if ifs.N ** k > MAX_ENSEMBLE:
        raise EnsembleTooLarge(f"{ifs.N}^{k} members exceeds the limit of {MAX_ENSEMBLE}")
    return [EnsembleMember(ifs, w) for w in itertools.product(range(1, ifs.N + 1), repeat=k)]


def ensemble_clouds(members, count, seed=0, burn_in=DEFAULT_BURN_IN, workers=None):
    """Clouds for all members from one shared base sample, computed in parallel."""
    if not members:
        return []
    base = chaos_game(members[0].ifs, count, seed, burn_in)
    with ThreadPoolExecutor(max_workers=workers or worker_count()) as pool:
        return list(pool.map(lambda m: m.cloud(count, seed, burn_in, base), members))


def agreement_check(ifs: InterpolationIFS, sigma, theta1, theta2, samples: int = 100,
                    with_bound: bool = False):
    """Largest ``|f_{sigma theta1}(x) - f_{sigma theta2}(x)|`` over a uniform
    grid in ``I_sigma``; with ``with_bound`` also the summed error bounds."""
    sigma = _as_address(sigma, ifs.N)
    if sigma.is_periodic:
        raise ValueError("sigma must be a finite word")
    t1 = sigma.then(_as_address(theta1, ifs.N))
    t2 = sigma.then(_as_address(theta2, ifs.N))
    dom = domain_interval(ifs, sigma, len(sigma.head))
    x = np.linspace(dom.lo, dom.hi, samples)
    cap = len(sigma.head)
    v1, _, e1 = continue_many(ifs, t1, x, cap)
    v2, _, e2 = continue_many(ifs, t2, x, cap)
    diff = float(np.max(np.abs(v1 - v2)))
    if with_bound:
        return diff, float(np.max(e1 + e2))
    return diff


def continuation_probability_bound(prefix, n_branches: int = 2) -> float:
    """Lower bound ``2^-(len(prefix) + 1)`` on the chance that a random
    address matches the continuation fixed by ``prefix`` then constant 1."""
    if n_branches != 2:
        raise UnsupportedBranchCount("the bound is stated for two branches with a_1 = a_2 = 1/2")
    word = _as_address(prefix, 2) if isinstance(prefix, str) else Address(tuple(prefix)).check(2)
    return 2.0 ** -(len(word.head) + 1)
