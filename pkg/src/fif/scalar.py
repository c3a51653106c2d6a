"""Closed-form real functions with derivative and inverse.

These back the analytic-function construction: a branch of the form
``F(x, y) = f(L(f^-1(y)))`` needs ``f``, ``f'`` and ``f^-1`` as vectorised
callables.  Inverses that have no closed form fall back to bracketed
bisection on a declared monotone interval.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

_INF = math.inf


@dataclass(frozen=True)
class ScalarFn:
    name: str
    fn: Callable
    deriv: Optional[Callable] = None
    inverse: Optional[Callable] = None
    # interval of y on which ``inverse`` is defined; open unless inverse_closed
    inverse_domain: tuple = (-_INF, _INF)
    params: dict = field(default_factory=dict, compare=False)
    inverse_closed: bool = False

    def __call__(self, x):
        return self.fn(x)

    def d(self, x):
        if self.deriv is None:
            raise NotImplementedError(f"{self.name} declares no derivative")
        return self.deriv(x)

    def inv(self, y):
        if self.inverse is None:
            raise NotImplementedError(f"{self.name} declares no inverse")
        return self.inverse(y)

    def inverse_defined(self, y):
        lo, hi = self.inverse_domain
        y = np.asarray(y, dtype=float)
        if self.inverse_closed:
            return (y >= lo) & (y <= hi)
        return (y > lo) & (y < hi)

    def __repr__(self):
        return f"ScalarFn({self.name})"


def bisect_inverse(fn, lo, hi, iterations=200):
    """Vectorised inverse of a function monotone on ``[lo, hi]``.

    Targets outside ``fn([lo, hi])`` map to NaN.
    """
    f_lo, f_hi = float(fn(lo)), float(fn(hi))
    increasing = f_hi > f_lo

    def inverse(y):
        y = np.asarray(y, dtype=float)
        a = np.full(y.shape, float(lo))
        b = np.full(y.shape, float(hi))
        ymin, ymax = min(f_lo, f_hi), max(f_lo, f_hi)
        bad = ~((y >= ymin) & (y <= ymax))
        for _ in range(iterations):
            mid = 0.5 * (a + b)
            with np.errstate(all="ignore"):
                below = fn(mid) < y
            if not increasing:
                below = ~below
            a = np.where(below, mid, a)
            b = np.where(below, b, mid)
            if np.all((b - a) <= 4e-16 * np.maximum(1.0, np.abs(a))):
                break
        x = 0.5 * (a + b)
        return np.where(bad, np.nan, x) if x.ndim else (np.nan if bad else float(x))

    return inverse, (min(f_lo, f_hi), max(f_lo, f_hi))


# -- registry ----------------------------------------------------------------

def exp(rate=1.0):
    r = float(rate)
    if r == 0:
        raise ValueError("rate must be nonzero")
    return ScalarFn(
        f"exp({r:g}x)" if r != 1 else "exp",
        lambda x: np.exp(r * np.asarray(x, dtype=float)),
        lambda x: r * np.exp(r * np.asarray(x, dtype=float)),
        lambda y: np.log(np.asarray(y, dtype=float)) / r,
        (0.0, _INF),
        {"rate": r},
    )


def log():
    return ScalarFn(
        "log",
        lambda x: np.log(np.asarray(x, dtype=float)),
        lambda x: 1.0 / np.asarray(x, dtype=float),
        lambda y: np.exp(np.asarray(y, dtype=float)),
    )


def sqrt():
    return ScalarFn(
        "sqrt",
        lambda x: np.sqrt(np.asarray(x, dtype=float)),
        lambda x: 0.5 / np.sqrt(np.asarray(x, dtype=float)),
        lambda y: np.asarray(y, dtype=float) ** 2,
        (0.0, _INF),
        inverse_closed=True,
    )


def power(p):
    """``x**p`` on ``x > 0``."""
    p = float(p)
    if p == 0:
        raise ValueError("exponent must be nonzero")
    return ScalarFn(
        f"x^{p:g}",
        lambda x: np.asarray(x, dtype=float) ** p,
        lambda x: p * np.asarray(x, dtype=float) ** (p - 1),
        lambda y: np.asarray(y, dtype=float) ** (1.0 / p),
        (0.0, _INF),
        {"p": p},
    )


def affine(a, b=0.0):
    a, b = float(a), float(b)
    if a == 0:
        raise ValueError("slope must be nonzero")
    return ScalarFn(
        f"{a:g}x+{b:g}",
        lambda x: a * np.asarray(x, dtype=float) + b,
        lambda x: np.full(np.shape(x), a) if np.ndim(x) else a,
        lambda y: (np.asarray(y, dtype=float) - b) / a,
        params={"a": a, "b": b},
    )


def identity():
    f = affine(1.0, 0.0)
    return ScalarFn("identity", f.fn, f.deriv, f.inverse, params=f.params)


def sine():
    """``sin`` with the principal-branch inverse."""
    return ScalarFn(
        "sin",
        lambda x: np.sin(np.asarray(x, dtype=float)),
        lambda x: np.cos(np.asarray(x, dtype=float)),
        lambda y: np.arcsin(np.asarray(y, dtype=float)),
        (-1.0, 1.0),
    )


def polynomial(coeffs, monotone_on):
    """Polynomial with coefficients in increasing degree order.

    The inverse is numeric and only valid on ``monotone_on``.
    """
    c = np.asarray(coeffs, dtype=float)
    poly = np.polynomial.Polynomial(c)
    dpoly = poly.deriv()
    fn = lambda x: poly(np.asarray(x, dtype=float))
    inverse, ydom = bisect_inverse(fn, *monotone_on)
    return ScalarFn(
        "poly(" + ",".join(f"{v:g}" for v in c) + ")",
        fn,
        lambda x: dpoly(np.asarray(x, dtype=float)),
        inverse,
        ydom,
        {"coeffs": tuple(c), "monotone_on": tuple(monotone_on)},
        inverse_closed=True,
    )


def sheared(f: ScalarFn, c: float, bracket):
    """``g(x) = f(x) + c x`` with a numeric inverse on ``bracket``."""
    c = float(c)
    fn = lambda x: f.fn(x) + c * np.asarray(x, dtype=float)
    inverse, ydom = bisect_inverse(fn, *bracket)
    return ScalarFn(
        f"{f.name}+{c:g}x",
        fn,
        lambda x: f.deriv(x) + c,
        inverse,
        ydom,
        {"base": f.name, "shear": c},
        inverse_closed=True,
    )


REGISTRY = {
    "exp": exp,
    "log": log,
    "sqrt": sqrt,
    "power": power,
    "affine": affine,
    "identity": identity,
    "sin": sine,
    "polynomial": polynomial,
}


def make(name, **params):
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown function family {name!r}; known: {sorted(REGISTRY)}") from None
    return factory(**params)
