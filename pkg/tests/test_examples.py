import math

import numpy as np
import pytest

from fif import InterpolationIFS, evaluate_many, get_example, list_examples, oracle_eval, validate
from fif.errors import NoOracle, OutOfOracleDomain, ParamOutOfRange, UnknownExample
from fif.examples import example_ids, from_selector, parse_selector
from fif.ifs import ifs_from_affine_maps


@pytest.mark.parametrize("eid", example_ids())
def test_every_entry_is_valid(eid):
    e = get_example(eid)
    assert e.citation
    if isinstance(e.ifs, InterpolationIFS):
        assert validate(e.ifs).valid
    else:
        assert e.ifs.certify()[0]


ORACLES = ["parabola", "weierstrass", "exp", "tent-family:p=0.25"]


@pytest.mark.parametrize("sel", ORACLES)
def test_oracle_matches_attractor(sel):
    e = from_selector(sel)
    ifs = e.ifs
    x = np.linspace(ifs.x0, ifs.xN, 256)
    y, err = evaluate_many(ifs, x)
    want = oracle_eval(e, x)
    assert np.max(np.abs(y - want)) <= 1e-8
    assert np.all(np.abs(y - want) <= err + 1e-12)


def test_parabola_maps():
    ifs = get_example("parabola").ifs
    assert [(L.a, L.b) for L in ifs.L] == [(0.5, 0.0), (0.5, 0.5)]
    assert [(F.c, F.d, F.e) for F in ifs.F] == [(0.0, 0.25, 0.0), (0.5, 0.25, 0.25)]


def test_four_node_asym():
    ifs = get_example("four-node-asym").ifs
    assert [F.d for F in ifs.F] == [0.55, 0.45, 0.45, 0.45]
    assert [tuple(n) for n in ifs.nodes] == [(0, 0.25), (0.25, 0), (0.5, 0.15), (0.75, 0.6), (1, 0.25)]


def test_length_arc_reproduces_printed_maps():
    a, c, d1, d2 = 0.5, 0.5, 0.8, 0.8
    printed = [(a, 0.0, c, d1, 0.0), (1 - a, 2 * a, -c, d2, 2 * c)]
    ref = ifs_from_affine_maps(printed)
    ifs = get_example("length-arc").ifs
    for (L, F), (Lr, Fr) in zip(zip(ifs.L, ifs.F), zip(ref.L, ref.F)):
        assert (L.a, L.b, F.c, F.d, F.e) == pytest.approx((Lr.a, Lr.b, Fr.c, Fr.d, Fr.e), abs=1e-15)
    np.testing.assert_allclose(ifs.xs, ref.xs, atol=1e-15)
    y, _ = evaluate_many(ifs, ifs.xs)
    np.testing.assert_allclose(y, [0, 2 * c, 0], atol=1e-12)


def test_params_and_errors():
    assert get_example("weierstrass", **{"ξ": 0.3}).params == {"xi": 0.3}
    with pytest.raises(ParamOutOfRange):
        get_example("weierstrass", xi=1.0)
    with pytest.raises(ParamOutOfRange):
        get_example("tent-family", q=0.3)
    with pytest.raises(ParamOutOfRange):
        get_example("length-arc", d1=0.3, d2=0.3)
    with pytest.raises(UnknownExample):
        get_example("koch")
    with pytest.raises(KeyError):
        get_example("koch")


def test_oracle_eval():
    assert oracle_eval("tent-family:p=0.25", 1.0) == pytest.approx(1.0)
    assert oracle_eval("exp", 1.5) == pytest.approx(math.exp(1.5), rel=1e-15)
    with pytest.raises(NoOracle):
        oracle_eval("four-node", 0.5)
    with pytest.raises(NoOracle):
        oracle_eval("tent-family:p=0.3", 0.5)
    with pytest.raises(OutOfOracleDomain):
        oracle_eval("exp", 3.0)


def test_selectors():
    assert parse_selector("tent-family:p=0.25") == ("tent-family", {"p": 0.25})
    assert parse_selector("parabola") == ("parabola", {})
    e = from_selector("length-arc:a=0.4,d1=0.7")
    assert e.params["a"] == 0.4 and e.params["d1"] == 0.7
    assert from_selector(e.selector).params == e.params
    with pytest.raises(ParamOutOfRange):
        parse_selector("tent-family:p")
    with pytest.raises(ParamOutOfRange):
        parse_selector("tent-family:p=x")


def test_list_examples():
    rows = list_examples()
    assert [r[0] for r in rows] == example_ids()
    assert all(desc for _, _, desc in rows)
