import math

import numpy as np
import pytest

from ksnorm import expr
from ksnorm.errors import CapabilityError
from ksnorm.expr import ExprSyntaxError
from ksnorm.fields import ExprField, field_from_expression


def ev(text, n, *coords):
    node = expr.parse(text, n)
    pts = np.array(coords, dtype=float).reshape(1, n)
    return expr.evaluate(node, pts)[0]


def test_sinc_at_pi_is_zero():
    assert abs(ev("sin(x_1)/x_1", 1, math.pi)) < 1e-15


def test_indicator_inside_outside():
    assert ev("indicator(0,1; x_1)", 1, 0.5) == 1.0
    assert ev("indicator(0,1; x_1)", 1, 2.0) == 0.0


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as ei:
        expr.parse("sin(", 1)
    assert ei.value.position == 4


def test_unknown_identifier():
    with pytest.raises(ExprSyntaxError):
        expr.parse("foo(x_1)", 1)


def test_free_variable_beyond_n():
    with pytest.raises(ExprSyntaxError):
        expr.parse("x_2 + 1", 1)


def test_power_right_associative():
    assert ev("2^3^2", 1, 0.0) == 512.0


def test_imaginary_unit():
    v = ev("exp(i*x_1)", 1, math.pi / 2)
    assert abs(v - 1j) < 1e-15


def test_gamma():
    assert abs(ev("gamma(x_1)", 1, 0.5) - math.sqrt(math.pi)) < 1e-12


def test_piecewise():
    text = "piecewise(x_1; 0, 0 - 1; 1, x_1; 2)"
    assert ev(text, 1, -5.0) == -1.0
    assert ev(text, 1, 0.5) == 0.5
    assert ev(text, 1, 3.0) == 2.0


def test_vector_components():
    field = field_from_expression("x_1, x_2", 2)
    assert len(field.components) == 2
    assert field[1].at(1.0, 3.0) == 3.0


@pytest.mark.parametrize("text", [
    "sin(x_1)*cos(x_1)",
    "exp(-x_1^2/2)",
    "x_1^3 - 2*x_1 + 1",
    "1/(1 + x_1^2)",
    "sqrt(x_1^2 + 1)",
])
def test_symbolic_derivative_matches_finite_difference(text):
    f = ExprField.parse(text, 1)
    df = f.derivative(0)
    h = 1e-5
    for x in (-1.3, -0.2, 0.7, 2.1):
        fd = (f.at(x + h) - f.at(x - h)) / (2 * h)
        assert abs(df.at(x) - fd) < 1e-8


def test_mixed_partial_symbolic():
    f = ExprField.parse("sin(x_1)*sin(x_2)", 2)
    mixed = f.derivative(0).derivative(1)
    assert abs(mixed.at(0.3, 0.4) - math.cos(0.3) * math.cos(0.4)) < 1e-14


def test_gamma_derivative_capability_error():
    f = ExprField.parse("gamma(x_1)", 1)
    with pytest.raises(CapabilityError):
        f.derivative(0)


def test_to_text_round_trip():
    text = "sin(x_1)/x_1 + indicator(0,1; x_1)*x_1^2"
    node = expr.parse(text, 1)
    rendered = expr.to_text(node)
    node2 = expr.parse(rendered, 1)
    pts = np.linspace(-2, 2, 41).reshape(-1, 1)
    with np.errstate(all="ignore"):
        v1 = expr.evaluate(node, pts)
        v2 = expr.evaluate(node2, pts)
    mask = np.isfinite(v1)
    assert np.allclose(v1[mask], v2[mask], atol=0, rtol=0)
