import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from volterra_leveling import (
    BoundaryCurve,
    ConfigurationError,
    DomainError,
    KernelSegment,
    PiecewiseKernel,
    identity_kernel,
    voltker_kernel,
)
from volterra_leveling.kernel import kernel_from_parts


def test_voltker_validates_clean():
    assert voltker_kernel().validate().ok


def test_identity_validates_clean():
    assert identity_kernel().validate().ok


def test_swapped_boundaries_reported():
    k = kernel_from_parts([1.0, 0.9, 0.85], [0.75, 0.25], 1.0)
    inv = k.validate().invariants()
    assert "boundary-order" in inv
    assert "slope-order" in inv


def test_vanishing_diagonal_reported():
    k = kernel_from_parts([1.0, 0.0], [0.5], 1.0)
    assert "diagonal-nonzero" in k.validate().invariants()


def test_zero_origin_denominator_reported():
    k = PiecewiseKernel((KernelSegment(lambda t, s: np.asarray(t) - np.asarray(s) + 0.0 * np.asarray(s)),), (), 1.0)
    # K(t,t)=0 too, both should show up
    inv = k.validate().invariants()
    assert {"x0-denominator", "diagonal-nonzero"} <= inv


def test_boundary_not_through_origin():
    curve = BoundaryCurve.general(lambda t: 0.1 + 0.5 * t, lambda t: 0.5)
    k = PiecewiseKernel((KernelSegment.const(1.0), KernelSegment.const(2.0)), (curve,), 1.0)
    assert "boundary-origin" in k.validate().invariants()


def test_slope_bound_reported():
    curve = BoundaryCurve.general(lambda t: t, lambda t: 1.0)
    k = PiecewiseKernel((KernelSegment.const(1.0), KernelSegment.const(2.0)), (curve,), 1.0)
    assert "slope-bound" in k.validate().invariants()


@pytest.mark.parametrize("s, expected", [(0.1, 1.0), (0.5, 0.9), (0.9, 0.85)])
def test_voltker_eval(s, expected):
    assert voltker_kernel().eval(1.0, s) == expected


def test_eval_on_curve_takes_left_band():
    assert voltker_kernel().eval(1.0, 0.25) == 1.0
    assert voltker_kernel().eval(1.0, 0.75) == 0.9


def test_identity_eval():
    k = identity_kernel(5.0)
    for t, s in [(1.0, 0.3), (5.0, 5.0), (2.0, 0.0)]:
        assert k.eval(t, s) == 1.0


def test_eval_domain_errors():
    k = voltker_kernel()
    with pytest.raises(DomainError):
        k.eval(0.5, 0.6)
    with pytest.raises(DomainError):
        k.eval(1.5, 0.1)


def test_segment_bounds_examples():
    k = voltker_kernel()
    np.testing.assert_array_equal(k.segment_bounds(1.0), [0, 0.25, 0.75, 1.0])
    np.testing.assert_array_equal(k.segment_bounds(0.0), [0, 0, 0, 0])
    np.testing.assert_allclose(k.segment_bounds(0.4), [0, 0.1, 0.3, 0.4], rtol=0, atol=1e-15)
    with pytest.raises(DomainError):
        k.segment_bounds(2.0)


def test_constructor_rejects_mismatch():
    with pytest.raises(ConfigurationError):
        PiecewiseKernel((KernelSegment.const(1.0), KernelSegment.const(2.0)), (), 1.0)
    with pytest.raises(ConfigurationError):
        identity_kernel(0.0)
    with pytest.raises(ConfigurationError):
        BoundaryCurve.proportional(1.0)


def test_x0_denominator_voltker():
    assert voltker_kernel().x0_denominator() == pytest.approx(1 * 0.25 + 0.9 * 0.5 + 0.85 * 0.25, abs=1e-15)


@given(
    ratios=st.lists(st.floats(0.01, 0.99), min_size=0, max_size=5, unique=True).map(sorted),
    t=st.floats(1e-6, 1.0),
)
def test_bounds_partition_interval(ratios, t):
    k = kernel_from_parts([1.0] * (len(ratios) + 1), ratios, 1.0)
    b = k.segment_bounds(t)
    assert b[0] == 0.0 and b[-1] == t
    assert np.all(np.diff(b) >= 0)
    assert math.isclose(float(np.sum(np.diff(b))), t, rel_tol=1e-12)
