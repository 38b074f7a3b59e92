import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra_leveling import ConfigurationError, Mesh, auxiliary_mesh, identity_kernel, uniform_mesh, voltker_kernel
from volterra_leveling.mesh import build_cells, cells_for


def test_uniform_mesh_examples():
    np.testing.assert_array_equal(uniform_mesh(1.0, 4).nodes, [0, 0.25, 0.5, 0.75, 1.0])
    week = uniform_mesh(168.0, 168)
    assert week.h == 1.0 and week.N == 168
    np.testing.assert_array_equal(week.nodes, np.arange(169.0))
    np.testing.assert_array_equal(uniform_mesh(1.0, 1).nodes, [0, 1])


def test_mesh_rejects_bad_nodes():
    with pytest.raises(ConfigurationError):
        Mesh(np.array([0.1, 0.5, 1.0]))
    with pytest.raises(ConfigurationError):
        Mesh(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ConfigurationError):
        uniform_mesh(1.0, 0)


def test_aux_breakpoints_aligned():
    aux = auxiliary_mesh(uniform_mesh(1.0, 4), voltker_kernel())
    np.testing.assert_allclose(aux.row(4), [0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)


def test_aux_breakpoints_unaligned():
    aux = auxiliary_mesh(uniform_mesh(1.0, 3), voltker_kernel())
    np.testing.assert_allclose(aux.row(3), [0, 0.25, 1 / 3, 2 / 3, 0.75, 1.0], atol=1e-15)


def test_aux_single_segment_is_nodes():
    mesh = uniform_mesh(2.0, 7)
    aux = auxiliary_mesh(mesh, identity_kernel(2.0))
    for k in range(mesh.N + 1):
        np.testing.assert_array_equal(aux.row(k), mesh.nodes[: k + 1])


def test_aux_horizon_mismatch():
    with pytest.raises(ConfigurationError):
        auxiliary_mesh(uniform_mesh(2.0, 4), voltker_kernel(1.0))


def test_cells_cover_row():
    mids, widths = cells_for(np.array([0.0, 0.25, 1 / 3, 1.0]), h=1 / 3, refine=2)
    assert widths.sum() == pytest.approx(1.0, abs=1e-15)
    assert np.all(widths > 0)
    assert np.all((mids > 0) & (mids < 1))


@settings(max_examples=40, deadline=None)
@given(N=st.integers(1, 40), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_midpoint_exact_on_piecewise_linear(N, a, b):
    # midpoint over the aligned cells must integrate a + b*s exactly
    mesh = uniform_mesh(1.0, N)
    cells = build_cells(auxiliary_mesh(mesh, voltker_kernel()), voltker_kernel())
    got = cells.row_sums(cells.width * (a + b * cells.mid))
    t = mesh.nodes
    np.testing.assert_allclose(got, a * t + b * t * t / 2, rtol=1e-12, atol=1e-13)
