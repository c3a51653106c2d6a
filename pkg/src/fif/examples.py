"""Registry of named example IFSs with closed-form oracles where known.

Select an entry with ``get_example("tent-family", p=0.25)`` or with the
CLI selector form ``"tent-family:p=0.25"``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from . import scalar
from .errors import NoOracle, OutOfOracleDomain, ParamOutOfRange, UnknownExample
from .ifs import (
    AffineMap1D,
    GeneralAffineIFS2D,
    InterpolationIFS,
    Interval,
    SinusoidalBranch,
    ifs_from_analytic,
    ifs_from_data,
)


@dataclass(frozen=True, eq=False)
class ExampleEntry:
    id: str
    ifs: Union[InterpolationIFS, GeneralAffineIFS2D]
    oracle: Optional[scalar.ScalarFn] = None
    oracle_domain: Optional[Interval] = None
    citation: str = ""
    params: dict = field(default_factory=dict)
    # plotting window (x_lo, x_hi, y_lo, y_hi) for ensemble pictures
    window: Optional[tuple] = None

    @property
    def selector(self):
        if not self.params:
            return self.id
        return self.id + ":" + ",".join(f"{k}={v:g}" for k, v in self.params.items())


@dataclass(frozen=True)
class _Recipe:
    build: Callable
    defaults: dict
    citation: str


def _unit_check(name, v, lo=-1.0, hi=1.0, open_zero=False):
    if not lo < v < hi or (open_zero and v == 0):
        zero = " excluding 0" if open_zero else ""
        raise ParamOutOfRange(f"{name} = {v} must lie in ({lo:g}, {hi:g}){zero}")


def _parabola():
    ifs = ifs_from_data([(0, 0), (0.5, 0.25), (1, 1)], [0.25, 0.25], name="parabola")
    return ExampleEntry("parabola", ifs, scalar.power(2), Interval(0.0, 1.0))


def _length_arc(a, c, d1, d2):
    _unit_check("a", a, 0.0, 1.0)
    _unit_check("d1", d1, 0.0, 1.0)
    _unit_check("d2", d2, 0.0, 1.0)
    if not d1 + d2 > 1:
        raise ParamOutOfRange(f"need d1 + d2 > 1, got {d1 + d2}")
    # nodes are the fixed points of w_1 and w_2 and the image w_1(x_N, y_N)
    ifs = ifs_from_data([(0, 0), (2 * a, 2 * c), (2, 0)], [d1, d2], name="length-arc")
    return ExampleEntry("length-arc", ifs, window=(-10, 10, -10, 10))


def _once_diff():
    ifs = ifs_from_data([(0, 0), (2 / 3, 1), (2, 0)], [2 / 9, 2 / 9], name="once-diff")
    return ExampleEntry("once-diff", ifs, window=(-10, 11, -100, 2))


def _c1_general():
    ifs = GeneralAffineIFS2D(
        [[[2 / 5, 1 / 5], [1 / 5, 2 / 5]], [[3 / 5, 0], [-1 / 5, 1 / 5]]],
        [[0, 0], [2 / 5, 1 / 5]],
        name="c1-general-affine",
    )
    return ExampleEntry("c1-general-affine", ifs)


def weierstrass_series(xi, x):
    """``sum_k xi^k sin(2^(k+1) pi x)``, truncated once the tail is below 1e-12."""
    x = np.asarray(x, dtype=float)
    axi = abs(xi)
    terms = 1 if axi == 0 else max(1, math.ceil(math.log(1e-12 * (1 - axi)) / math.log(axi)) + 1)
    # the sum is 1-periodic; reducing first keeps sin arguments small
    r = x - np.floor(x)
    total = np.zeros_like(r)
    for k in range(terms):
        total += xi ** k * np.sin(2.0 ** (k + 1) * np.pi * r)
    return total if total.ndim else float(total)


def _weierstrass(xi):
    _unit_check("xi", xi)
    L = (AffineMap1D(0.5, 0.0), AffineMap1D(0.5, 0.5))
    F = (SinusoidalBranch(xi, 1), SinusoidalBranch(xi, -1))
    ifs = InterpolationIFS(((0.0, 0.0), (0.5, 0.0), (1.0, 0.0)), L, F, name="weierstrass")
    oracle = scalar.ScalarFn(f"weierstrass({xi:g})", lambda x: weierstrass_series(xi, x),
                             params={"xi": xi})
    # the series is defined for every real x
    return ExampleEntry("weierstrass", ifs, oracle, Interval(-math.inf, math.inf),
                        window=(-2, 3, -3, 3))


def _exp():
    ifs = ifs_from_analytic(scalar.exp(), Interval(1.0, 2.0), name="exp")
    return ExampleEntry("exp", ifs, scalar.exp(), Interval(1.0, 2.0), window=(-2, 4, -1, 30))


def _tent(p):
    _unit_check("p", p, open_zero=True)
    ifs = ifs_from_data([(0, 0), (1, 1), (2, 0)], [p, p], name=f"tent-family(p={p:g})")
    oracle = domain = None
    if p == 0.25:
        oracle = scalar.polynomial([0.0, 2.0, -1.0], (0.0, 1.0))
        domain = Interval(0.0, 2.0)
    window = (-10, 10, -10, 10) if abs(p) >= 0.5 else (-20, 20, -20, 20)
    return ExampleEntry("tent-family", ifs, oracle, domain, window=window)


def _four_node():
    nodes = [(0, 0.25), (0.25, 0), (0.5, -0.25), (0.75, 0.5), (1, 0.25)]
    ifs = ifs_from_data(nodes, [0.25] * 4, name="four-node")
    return ExampleEntry("four-node", ifs, window=(-10, 10, -10, 10))


def _four_node_asym():
    nodes = [(0, 0.25), (0.25, 0), (0.5, 0.15), (0.75, 0.6), (1, 0.25)]
    ifs = ifs_from_data(nodes, [0.55, 0.45, 0.45, 0.45], name="four-node-asym")
    return ExampleEntry("four-node-asym", ifs, window=(-20, 20, -20, 20))


_REGISTRY = {
    "parabola": _Recipe(_parabola, {},
                      "graph of x^2 on [0,1]: w1=(x/2, y/4), w2=((x+1)/2, (2x+y+1)/4)"),
    "length-arc": _Recipe(_length_arc, {"a": 0.5, "c": 0.5, "d1": 0.8, "d2": 0.8},
                        "arc of infinite length: w1=(ax, cx+d1 y), w2=((1-a)x+2a, -cx+d2 y+2c), d1+d2>1"),
    "once-diff": _Recipe(_once_diff, {},
                       "once differentiable function through (0,0), (2/3,1), (2,0), d=2/9"),
    "c1-general-affine": _Recipe(_c1_general, {},
                               "C^1 function from planar affine maps whose x-part depends on y"),
    "weierstrass": _Recipe(_weierstrass, {"xi": 0.5},
                         "Weierstrass-type function sum xi^k sin(2^(k+1) pi x), F = xi y +- sin(pi x)"),
    "exp": _Recipe(_exp, {}, "exp on [1,2] as an analytic IFS: w1=(x/2+1/2, sqrt(e y)), w2=(x/2+1, e sqrt(y))"),
    "tent-family": _Recipe(_tent, {"p": 0.3},
                         "w1=(x/2, x/2+py), w2=(x/2+1, -x/2+py+1); p=0.25 gives x(2-x)"),
    "four-node": _Recipe(_four_node, {},
                       "four affine maps through (0,.25),(.25,0),(.5,-.25),(.75,.5),(1,.25), d=0.25"),
    "four-node-asym": _Recipe(_four_node_asym, {},
                            "four affine maps through (0,.25),(.25,0),(.5,.15),(.75,.6),(1,.25), "
                            "d=(.55,.45,.45,.45)"),
}

_ALIASES = {"ξ": "xi"}


def example_ids():
    return list(_REGISTRY)


def get_example(id: str, **params) -> ExampleEntry:
    try:
        spec = _REGISTRY[id]
    except KeyError:
        raise UnknownExample(f"unknown example {id!r}; known: {', '.join(_REGISTRY)}") from None
    merged = dict(spec.defaults)
    for key, value in params.items():
        key = _ALIASES.get(key, key)
        if key not in spec.defaults:
            raise ParamOutOfRange(f"example {id!r} takes no parameter {key!r}")
        merged[key] = float(value)
    entry = spec.build(**merged)
    return ExampleEntry(entry.id, entry.ifs, entry.oracle, entry.oracle_domain,
                        spec.citation, merged, entry.window)


def parse_selector(text: str):
    """``"id:k=v,k=v"`` to ``(id, {k: float(v)})``."""
    id, _, rest = text.partition(":")
    params = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ParamOutOfRange(f"expected key=value in {text!r}, got {item!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ParamOutOfRange(f"parameter {key.strip()!r} needs a number, got {value!r}") from None
    return id.strip(), params


def from_selector(text: str) -> ExampleEntry:
    id, params = parse_selector(text)
    return get_example(id, **params)


def oracle_eval(example, x):
    """Closed-form value of an example's function at ``x``."""
    entry = from_selector(example) if isinstance(example, str) else example
    if entry.oracle is None:
        raise NoOracle(f"{entry.selector} has no closed form")
    xa = np.asarray(x, dtype=float)
    dom = entry.oracle_domain
    if dom is not None and (np.any(xa < dom.lo) or np.any(xa > dom.hi)):
        raise OutOfOracleDomain(f"x outside [{dom.lo}, {dom.hi}] for {entry.selector}")
    out = entry.oracle(xa)
    return out if np.ndim(out) else float(out)


def list_examples():
    """``(id, default parameters, description)`` for every entry."""
    return [(k, dict(s.defaults), s.citation) for k, s in _REGISTRY.items()]
