# Copyright (c) 2023-2024 DepGSA developers
# MIT License

import numpy as np
import pytest

from depgsa.errors import ExpressionError, ModelEvaluationError, ParameterError
from depgsa.models import (NOT_AVAILABLE, ExpressionModel, GSobol,
                           LinearGaussian, Portfolio, analytic_indices,
                           make_model, parse_expression, pretty)
from depgsa.models.analytic import (linear_closed_forms, linear_indices,
                                    portfolio_indices, portfolio_variance)
from depgsa.models.builtin import gsobol_factor_bounds
from depgsa.models.expression import Add, Mul, Num, Pow, Var, tokenize


# --------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------

def test_parse_precedence():
    tree = parse_expression("1 + 2*x1^2")
    assert tree == Add(Num(1), Mul(Num(2), Pow(Var(1), Num(2))))
    # "^" is right associative and binds tighter than unary minus
    assert parse_expression("x1^x2^x3") == \
        Pow(Var(1), Pow(Var(2), Var(3)))
    x = np.array([[3.0]])
    assert parse_expression("-x1^2").evaluate(x)[0] == -9.0
    assert parse_expression("2^-1").evaluate(x)[0] == 0.5


@pytest.mark.parametrize("text", [
    "x1 - (x2 - x3)",
    "x1 - x2 - x3",
    "(x1^x2)^x3",
    "x1^x2^x3",
    "-x1^2",
    "(-x1)^2",
    "2*x1 + 3",
    "x1/(x2*x3)",
    "exp(-x1)/2 + abs(x2 - 0.5)",
    "sqrt(x1*x1 + x2*x2)",
])
def test_pretty_reparses(text):
    tree = parse_expression(text)
    assert parse_expression(pretty(tree)) == tree


def test_pretty_minimal_parentheses():
    assert pretty(parse_expression("((x1)) + ((2*x2))")) == "x1 + 2*x2"
    assert pretty(parse_expression("(x1 - x2) - x3")) == "x1 - x2 - x3"
    assert pretty(parse_expression("x1 - (x2 - x3)")) == "x1 - (x2 - x3)"
    assert pretty(parse_expression("(x1 + x2)*x3")) == "(x1 + x2)*x3"


@pytest.mark.parametrize("text, column, message", [
    ("x1 + ", 6, "unexpected end of input"),
    ("x1 $ 2", 4, "unexpected character"),
    ("y + 1", 1, "unknown identifier"),
    ("2 + foo(x1)", 5, "unknown function"),
    ("abs(x1, x2)", 1, "takes 1 argument"),
    ("(x1 + 2", 8, "unexpected end of input"),
    ("x1 x2", 4, "unexpected"),
])
def test_parse_errors(text, column, message):
    with pytest.raises(ExpressionError, match=message) as excinfo:
        parse_expression(text)
    assert excinfo.value.column == column
    assert excinfo.value.line == 1


def test_parse_variable_out_of_range():
    with pytest.raises(ExpressionError, match="out of range"):
        parse_expression("x1 + x3", dim=2)


def test_tokenize_lines():
    tokens = tokenize("x1 +\n  x2")
    assert [(t.line, t.column) for t in tokens] == [(1, 1), (1, 4), (2, 3),
                                                     (2, 5)]


def test_variables():
    assert parse_expression("x1 + x3*log(x1)").variables() == {1, 3}


def test_evaluation_error_position():
    tree = parse_expression("x1 + log(x2)")
    x = np.array([[1.0, 1.0], [1.0, -1.0]])
    with pytest.raises(ModelEvaluationError) as excinfo:
        tree.evaluate(x)
    assert excinfo.value.row == 1
    assert excinfo.value.position == 6


# --------------------------------------------------------------------
# Built-in models
# --------------------------------------------------------------------

def test_expression_model():
    model = ExpressionModel(["x1 + x2", "x1*x3"])
    assert (model.dim, model.n_outputs) == (3, 2)
    y = model.evaluate(np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 5.0]]))
    assert np.array_equal(y, [[3.0, 3.0], [1.0, 0.0]])
    assert ExpressionModel("x2", dim=4).dim == 4
    assert model.to_dict()["expressions"] == ["x1 + x2", "x1*x3"]
    with pytest.raises(ParameterError):
        ExpressionModel([])
    with pytest.raises(ParameterError):
        model.evaluate(np.zeros((2, 2)))


def test_model_evaluation_error_row():
    model = ExpressionModel(["1/x1"])
    x = np.ones((10, 1))
    x[7, 0] = 0.0
    with pytest.raises(ModelEvaluationError) as excinfo:
        model.evaluate(x, offset=100)
    assert excinfo.value.row == 107


def test_linear_model(linear_model):
    assert linear_model.evaluate([[1.0, 2.0, 3.0]])[0, 0] == 6.0
    assert linear_model.covariance.sum() == pytest.approx(5.0)
    structure = linear_model.structure()
    assert structure.dims == [3]
    with pytest.raises(ParameterError):
        LinearGaussian(sigma=(1.0, 0.0, 1.0))


def test_portfolio_model(portfolio_model):
    x = np.array([[1.0, 2.0, 3.0, 4.0]])
    assert portfolio_model.evaluate(x)[0, 0] == 14.0
    structure = portfolio_model.structure()
    assert [b.kind for b in structure.blocks] == ["gaussian", "student"]
    with pytest.raises(ParameterError):
        Portfolio(nu=4.0)


def test_gsobol_model(gsobol_model):
    assert (gsobol_model.dim, gsobol_model.n_outputs) == (10, 4)
    y = gsobol_model.evaluate(np.full((1, 10), 0.5))
    A = np.array([10.0, 20.0, 50.0, 60.0])
    assert np.allclose(y[0], (A / (1 + A))**10)
    lo, hi = gsobol_factor_bounds(A)
    assert np.allclose(gsobol_model.evaluate(np.zeros((1, 10)))[0],
                       hi**10)
    assert np.all(lo < hi)
    structure = gsobol_model.structure()
    assert structure.independent_indices == (4, 5, 6, 7, 8)
    assert [b.indices for b in structure.blocks] == [(1, 2, 3), (9, 10)]
    with pytest.raises(ParameterError):
        GSobol(A=np.ones((2, 9)))
    assert GSobol(A=np.ones(20)).n_outputs == 2


def test_make_model():
    assert isinstance(make_model("portfolio", nu=6.0), Portfolio)
    with pytest.raises(ParameterError):
        make_model("ishigami")


# --------------------------------------------------------------------
# Closed-form indices
# --------------------------------------------------------------------

def test_linear_closed_forms(linear_model):
    forms = linear_closed_forms(linear_model)
    generic = linear_indices(linear_model, list(forms))
    for u, value in forms.items():
        assert generic[u][0] == pytest.approx(value, rel=1e-12)
    assert forms[(1,)] == pytest.approx(0.578)
    assert forms[(2,)] == pytest.approx(0.648)
    assert forms[(3,)] == pytest.approx(0.45)
    assert forms[(1, 2)] == pytest.approx(0.8187, abs=1e-4)
    full = linear_indices(linear_model, [(1, 2, 3)])
    assert full[(1, 2, 3)] == pytest.approx((1.0, 1.0))


def test_portfolio_closed_forms(portfolio_model):
    # D = 1.25 + 25/9 * (3 + 0.45)
    assert portfolio_variance(portfolio_model) == pytest.approx(10.83333,
                                                                abs=1e-5)
    idx = portfolio_indices(portfolio_model)
    assert idx[(1,)] == pytest.approx((0.046154, 0.115385), abs=1e-6)
    assert idx[(3,)] == pytest.approx((0.184615, 0.884615), abs=1e-6)
    assert idx[(1, 2)][0] == pytest.approx(0.115385, abs=1e-6)
    assert idx[(1, 3)][0] == pytest.approx(0.230769, abs=1e-6)
    assert idx[(1, 2, 3)] == NOT_AVAILABLE
    assert idx[(1, 2, 3, 4)] == (1.0, 1.0)
    # the total indices of the two independent pairs add up to one
    assert idx[(1, 2)][1] + idx[(3, 4)][1] == pytest.approx(1.0)


@pytest.mark.parametrize("nu", [4.5, 8.0, 30.0])
def test_portfolio_indices_in_unit_interval(nu):
    idx = portfolio_indices(Portfolio(nu=nu), [(3,), (4,)])
    for first, total in idx.values():
        assert 0 < first < total < 1


def test_portfolio_variance_direct_sampling(rng):
    # scale-mixture sampling of the bivariate t, independent of the DMs
    model = Portfolio(sigma=(1.0, 2.0, 1.5, 0.5), rho=(0.5, 0.3), nu=10.0)
    s1, s2, s3, s4 = model.sigma
    r12, r34 = model.rho
    n = 1000000
    g = rng.multivariate_normal(
        [0, 0], [[s1**2, r12*s1*s2], [r12*s1*s2, s2**2]], size=n)
    t = rng.multivariate_normal(
        [0, 0], [[s3**2, r34*s3*s4], [r34*s3*s4, s4**2]], size=n)
    t *= np.sqrt(model.nu / rng.chisquare(model.nu, size=n))[:, None]
    y = model.evaluate(np.column_stack([g, t]))[:, 0]
    assert y.var() == pytest.approx(portfolio_variance(model), rel=0.03)
    # E[X3 X4 | X3] = r34 s4/s3 X3^2
    v3 = np.var(r34 * s4 / s3 * t[:, 0]**2)
    expected = portfolio_indices(model, [(3,)])[(3,)][0]
    assert v3 / y.var() == pytest.approx(expected, rel=0.06)


def test_analytic_indices(linear_model, gsobol_model):
    assert analytic_indices(gsobol_model) == NOT_AVAILABLE
    assert analytic_indices(linear_model, [(2,)])[(2,)][0] == \
        pytest.approx(0.648)
