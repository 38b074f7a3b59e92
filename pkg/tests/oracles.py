"""Independent reference values: symbolic and adaptive-quadrature integrals of the banded kernel."""

import sympy as sp
from scipy.integrate import quad

BANDS = ((0, sp.Rational(1, 4), 1), (sp.Rational(1, 4), sp.Rational(3, 4), sp.Rational(9, 10)), (sp.Rational(3, 4), 1, sp.Rational(17, 20)))

_t, _s = sp.symbols("t s", positive=True)


def banded_integral(x_expr):
    """sum_i c_i * int_{a_i t}^{b_i t} x(s) ds as a sympy expression in t."""
    return sp.simplify(sum(c * sp.integrate(x_expr(_s), (_s, a * _t, b * _t)) for a, b, c in BANDS))


def monomial_coefficient(p: int) -> float:
    """f(t) = c * t^(p+1) for x(s) = s^p."""
    expr = banded_integral(lambda s: s**p)
    return float(sp.simplify(expr / _t ** (p + 1)))


def banded_quad(x, t: float) -> float:
    return sum(float(c) * quad(x, float(a) * t, float(b) * t, epsabs=1e-14, epsrel=1e-13)[0] for a, b, c in BANDS)
