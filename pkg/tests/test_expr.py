"""Test-function expression language: parsing, printing, evaluation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gasketlab.expr import (
    Add,
    Const,
    Div,
    EvalDomainError,
    ExprSyntaxError,
    Mul,
    Pow,
    Sub,
    TestFunction,
    Var,
    evaluate,
    expr_to_string,
    parse_expr,
)

PTS2 = np.array([[0.0, 0.0], [1.0, 2.0], [0.5, -0.25]])
PTS3 = np.array([[1.0, 2.0, 3.0], [0.0, -1.0, 0.5]])


# -- parsing -----------------------------------------------------------------

def test_single_variable():
    assert parse_expr("x") == Var("x")


def test_precedence():
    assert parse_expr("x^2 + 3*y") == Add(Pow(Var("x"), 2),
                                          Mul(Const(3.0), Var("y")))
    assert parse_expr("2*x+1") == Add(Mul(Const(2.0), Var("x")), Const(1.0))
    assert parse_expr("2*(x+1)") == Mul(Const(2.0), Add(Var("x"), Const(1.0)))
    assert parse_expr("1 - 2 - 3") == Sub(Sub(Const(1.0), Const(2.0)), Const(3.0))


def test_unary_minus_desugars_to_subtraction():
    assert parse_expr("-x") == Sub(Const(0.0), Var("x"))


def test_parse_errors_carry_positions():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("x + w")
    assert err.value.position == 4
    with pytest.raises(ExprSyntaxError):
        parse_expr("(x + 1")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x^1.5")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x^y")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x 1")
    with pytest.raises(ExprSyntaxError):
        parse_expr("x + ?")


# -- evaluation --------------------------------------------------------------

def test_polynomial_evaluation():
    out = evaluate(parse_expr("x^2 + 3*y"), PTS2)
    np.testing.assert_allclose(out, PTS2[:, 0] ** 2 + 3 * PTS2[:, 1], atol=0)


def test_division_guard():
    f = parse_expr("x/(y-y)")
    with pytest.raises(EvalDomainError):
        evaluate(f, PTS2)


def test_zero_base_negative_exponent_guard():
    with pytest.raises(EvalDomainError):
        evaluate(parse_expr("x^-1"), PTS2)


def test_negative_exponent_on_safe_points():
    out = evaluate(parse_expr("y^-2"), PTS3)
    np.testing.assert_allclose(out, PTS3[:, 1] ** -2.0, atol=0)


def test_z_needs_three_dimensions():
    assert evaluate(parse_expr("z"), PTS3)[0] == 3.0
    with pytest.raises(EvalDomainError):
        evaluate(parse_expr("z"), PTS2)


def test_test_function_wrapper():
    f = TestFunction.parse("x*y")
    np.testing.assert_allclose(f(PTS2), PTS2[:, 0] * PTS2[:, 1], atol=0)
    assert f.source == "x*y"


# -- print/parse round-trip ----------------------------------------------------

_consts = st.floats(min_value=0.0, max_value=1e6, allow_nan=False,
                    allow_infinity=False).map(abs).map(Const)
_vars = st.sampled_from(["x", "y", "z"]).map(Var)

_exprs = st.recursive(
    st.one_of(_consts, _vars),
    lambda inner: st.one_of(
        st.builds(Add, inner, inner),
        st.builds(Sub, inner, inner),
        st.builds(Mul, inner, inner),
        st.builds(Div, inner, inner),
        st.builds(Pow, inner, st.integers(-4, 6)),
    ),
    max_leaves=25,
)


@settings(max_examples=200, deadline=None)
@given(_exprs)
def test_print_then_parse_is_identity(tree):
    assert parse_expr(expr_to_string(tree)) == tree
