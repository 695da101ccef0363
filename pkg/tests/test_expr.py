import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoverify.errors import DomainError, ExprError, UnboundParameterError
from geoverify.expr import Num, eval_jet2, evaluate, parse

COORDS = ["v", "x", "u"]


def test_parse_kundt_component():
    e = parse("2*v*u + exp(-a*x)", COORDS, ["a"])
    assert e.depth() == 4
    assert {"+", "*", "exp", "neg"} <= e.node_kinds()
    assert e.coord_indices() == {0, 1, 2}


@pytest.mark.parametrize("text, message", [
    ("(v +", "unbalanced|empty operand"),
    ("v + )", "unbalanced|empty operand"),
    ("v * * u", "empty operand"),
    ("", "empty"),
    ("w + 1", "unknown symbol"),
    ("x / 0", "zero"),
    ("x / 0.0", "zero"),
    ("x ^ u", "exponent"),
])
def test_parse_errors(text, message):
    with pytest.raises(ExprError, match=message):
        parse(text, COORDS, ["a"])


def test_precedence_and_associativity():
    e = parse("2 - 3 - 4", [], [])
    assert evaluate(e, np.zeros(0)) == -5.0
    assert evaluate(parse("2^3^2", [], []), np.zeros(0)) == 512.0
    assert evaluate(parse("-2^2", [], []), np.zeros(0)) == -4.0
    assert evaluate(parse("8 / 4 / 2", [], []), np.zeros(0)) == 1.0
    assert evaluate(parse("2**3", [], []), np.zeros(0)) == 8.0


def test_pythagorean_identity():
    e = parse("sin(x)^2 + cos(x)^2", ["x"], [])
    assert abs(evaluate(e, [0.37]) - 1.0) < 1e-15


@pytest.mark.parametrize("text, name, pt, value, grad, hess", [
    ("x^2", "x", [3.0], 9.0, [6.0], [[2.0]]),
    ("exp(2*t)", "t", [0.0], 1.0, [2.0], [[4.0]]),
    ("sqrt(x)", "x", [4.0], 2.0, [0.25], [[-1.0 / 32.0]]),
    ("log(x)", "x", [2.0], math.log(2.0), [0.5], [[-0.25]]),
])
def test_jet_examples(text, name, pt, value, grad, hess):
    j = eval_jet2(parse(text, [name], []), np.array(pt))
    assert j.value == pytest.approx(value, abs=1e-15)
    np.testing.assert_allclose(j.gradient, grad, atol=1e-15)
    np.testing.assert_allclose(j.hessian, hess, atol=1e-15)


def test_mixed_hessian_is_symmetric():
    j = eval_jet2(parse("sin(x*y) * exp(y)", ["x", "y"], []), np.array([0.3, -0.7]))
    assert np.array_equal(j.hessian, j.hessian.T)


def test_domain_and_unbound_errors():
    with pytest.raises(DomainError):
        evaluate(parse("log(x)", ["x"], []), [-1.0])
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(x)", ["x"], []), [-0.5])
    with pytest.raises(UnboundParameterError):
        evaluate(parse("a*x", ["x"], ["a"]), [1.0], {})


def test_literal_zero_is_detected():
    assert Num(0.0).is_zero_literal()
    assert not parse("x - x", ["x"], []).is_zero_literal()


def _fd(f, x, h=1e-5):
    d = len(x)
    g = np.zeros(d)
    H = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
        for j in range(d):
            e2 = np.zeros(d)
            e2[j] = h
            H[i, j] = (f(x + e + e2) - f(x + e - e2) - f(x - e + e2) + f(x - e - e2)) / (4 * h * h)
    return g, H


def test_degree4_polynomial_matches_finite_differences():
    rng = np.random.default_rng(5)
    names = ["x", "y", "z"]
    terms = []
    for _ in range(12):
        powers = rng.integers(0, 3, size=3)
        while powers.sum() > 4:
            powers = rng.integers(0, 3, size=3)
        mono = "*".join(f"{n}^{int(p)}" for n, p in zip(names, powers) if p)
        terms.append(f"({rng.normal():.6f})" + (f"*{mono}" if mono else ""))
    e = parse(" + ".join(terms), names, [])
    for pt in rng.uniform(-1, 1, size=(20, 3)):
        j = eval_jet2(e, pt)
        g, H = _fd(lambda p: evaluate(e, p), pt)
        scale = max(1.0, np.max(np.abs(j.hessian)))
        assert np.max(np.abs(j.gradient - g)) / max(1.0, np.max(np.abs(g))) < 1e-6
        assert np.max(np.abs(j.hessian - H)) / scale < 1e-6


# random expression trees over two coordinates, kept inside function domains
_leaf = st.one_of(
    st.sampled_from(["x", "y"]),
    st.floats(min_value=-2, max_value=2, allow_nan=False).map(lambda c: f"({c:.4f})"),
)


def _extend(children):
    unary = st.tuples(st.sampled_from(["sin", "cos", "exp", "sinh", "cosh"]), children).map(
        lambda t: f"{t[0]}(({t[1]})/4)")
    positive = children.map(lambda c: f"sqrt(1 + ({c})^2)")
    logs = children.map(lambda c: f"log(2 + sin({c}))")
    binary = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]}) {t[1]} ({t[2]})")
    quotient = st.tuples(children, children).map(lambda t: f"({t[0]}) / (2 + cos({t[1]}))")
    power = st.tuples(children, st.sampled_from([2, 3])).map(lambda t: f"({t[0]})^{t[1]}")
    return st.one_of(unary, positive, logs, binary, quotient, power)


expressions = st.recursive(_leaf, _extend, max_leaves=8)


@settings(max_examples=60, deadline=None)
@given(expressions, st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
def test_jets_agree_with_finite_differences(text, pt):
    e = parse(text, ["x", "y"], [])
    pt = np.array(pt)
    j = eval_jet2(e, pt)
    g, H = _fd(lambda p: evaluate(e, p), pt, h=1e-4)
    gs = max(1.0, np.max(np.abs(g)))
    hs = max(1.0, np.max(np.abs(H)))
    assert np.max(np.abs(j.gradient - g)) / gs < 1e-6
    assert np.max(np.abs(j.hessian - H)) / hs < 1e-6


@settings(max_examples=40, deadline=None)
@given(expressions)
def test_print_parse_round_trip(text):
    e = parse(text, ["x", "y"], [])
    e2 = parse(e.to_string(), ["x", "y"], [])
    rng = np.random.default_rng(0)
    for pt in rng.uniform(-1, 1, size=(100, 2)):
        assert evaluate(e2, pt) == evaluate(e, pt)
