"""Collocation meshes and the discontinuity-aligned quadrature built on them."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError
from .kernel import PiecewiseKernel

MERGE_TOL = 1e-12


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ConfigurationError("mesh needs at least two nodes")
        if nodes[0] != 0.0:
            raise ConfigurationError(f"first mesh node must be 0, got {nodes[0]}")
        if np.any(np.diff(nodes) <= 0):
            raise ConfigurationError("mesh nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def h(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def __eq__(self, other):
        return isinstance(other, Mesh) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


def uniform_mesh(T: float, N: int) -> Mesh:
    if N is None or int(N) != N or N < 1:
        raise ConfigurationError(f"N must be a positive integer, got {N}")
    if not T > 0:
        raise ConfigurationError(f"T must be positive, got {T}")
    nodes = np.arange(N + 1, dtype=float) * (T / N)
    nodes[-1] = T
    return Mesh(nodes)


def merge_points(points: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    pts = np.sort(np.asarray(points, dtype=float))
    keep = np.concatenate(([True], np.diff(pts) > tol))
    return pts[keep]


def row_breakpoints(nodes: np.ndarray, kernel: PiecewiseKernel, t: float) -> np.ndarray:
    """Sorted union of mesh nodes in [0, t], t itself, and the curve values alpha_i(t)."""
    inside = nodes[nodes <= t + MERGE_TOL]
    alphas = kernel.segment_bounds(t)[1:-1]
    pts = merge_points(np.concatenate((inside, alphas, [t])))
    # snap the endpoint so merged rounding cannot leave a value above t
    pts[-1] = t
    return pts


@dataclass(frozen=True)
class AuxiliaryMesh:
    """Per-row quadrature breakpoints; ``rows[k]`` covers [0, t_k]."""

    mesh: Mesh
    rows: tuple[np.ndarray, ...]

    def row(self, k: int) -> np.ndarray:
        return self.rows[k]


def auxiliary_mesh(mesh: Mesh, kernel: PiecewiseKernel) -> AuxiliaryMesh:
    if not np.isclose(mesh.T, kernel.horizon, rtol=1e-12, atol=0.0):
        raise ConfigurationError(f"mesh horizon {mesh.T} differs from kernel horizon {kernel.horizon}")
    rows = tuple(row_breakpoints(mesh.nodes, kernel, float(t)) for t in mesh.nodes)
    return AuxiliaryMesh(mesh, rows)


def cells_for(breakpoints: np.ndarray, h: float, refine: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Midpoints and widths of composite-midpoint subcells.

    Each breakpoint cell gets ``max(1, ceil(width/h)) * refine`` equal subcells.
    """
    a = breakpoints[:-1]
    width = np.diff(breakpoints)
    counts = np.maximum(1, np.ceil(width / h - 1e-9).astype(int)) * refine
    idx = np.repeat(np.arange(a.size), counts)
    # position of each subcell inside its parent cell
    start = np.concatenate(([0], np.cumsum(counts)[:-1]))
    local = np.arange(idx.size) - np.repeat(start, counts)
    sub = width[idx] / counts[idx]
    mids = a[idx] + (local + 0.5) * sub
    return mids, sub


@dataclass(frozen=True)
class CellQuadrature:
    """All midpoint subcells of all rows of an auxiliary mesh, flattened.

    ``row[c]`` is the collocation index k of cell c, ``segment[c]`` the kernel
    band containing its midpoint, ``interval[c]`` the mesh interval j with
    t_{j-1} < mid <= t_j.
    """

    aux: AuxiliaryMesh
    kernel: PiecewiseKernel
    refine: int
    row: np.ndarray
    mid: np.ndarray
    width: np.ndarray
    segment: np.ndarray
    interval: np.ndarray

    @property
    def mesh(self) -> Mesh:
        return self.aux.mesh

    @cached_property
    def t(self) -> np.ndarray:
        return self.mesh.nodes[self.row]

    @cached_property
    def kernel_values(self) -> np.ndarray:
        return kernel_values(self.kernel, self.t, self.mid, self.segment)

    @cached_property
    def hat_right(self) -> np.ndarray:
        """Value at each midpoint of the hat function peaking at t_j (the interval's right node)."""
        nodes = self.mesh.nodes
        j = self.interval
        return (self.mid - nodes[j - 1]) / (nodes[j] - nodes[j - 1])

    def row_sums(self, values: np.ndarray) -> np.ndarray:
        """Sum per collocation row; entry 0 is always 0."""
        return np.bincount(self.row, weights=values, minlength=self.mesh.N + 1)

    def interpolate(self, coefficients: np.ndarray) -> np.ndarray:
        c = np.asarray(coefficients, dtype=float)
        j = self.interval
        w = self.hat_right
        return (1.0 - w) * c[j - 1] + w * c[j]


def kernel_values(kernel: PiecewiseKernel, t: np.ndarray, s: np.ndarray, segment: np.ndarray) -> np.ndarray:
    out = np.empty(s.shape, dtype=float)
    for i in range(kernel.n):
        mask = segment == i
        if mask.any():
            out[mask] = kernel.values_on_segment(i, t[mask], s[mask])
    return out


def build_cells(aux: AuxiliaryMesh, kernel: PiecewiseKernel, refine: int = 1) -> CellQuadrature:
    if refine < 1:
        raise ConfigurationError("quadrature refinement must be a positive integer")
    mesh = aux.mesh
    h = mesh.h
    rows, mids, widths, segs = [], [], [], []
    for k in range(1, mesh.N + 1):
        t = float(mesh.nodes[k])
        m, w = cells_for(aux.rows[k], h, refine)
        rows.append(np.full(m.size, k))
        mids.append(m)
        widths.append(w)
        segs.append(kernel.segment_index(t, m))
    row = np.concatenate(rows)
    mid = np.concatenate(mids)
    interval = np.clip(np.searchsorted(mesh.nodes, mid, side="left"), 1, mesh.N)
    return CellQuadrature(
        aux=aux,
        kernel=kernel,
        refine=int(refine),
        row=row,
        mid=mid,
        width=np.concatenate(widths),
        segment=np.concatenate(segs),
        interval=interval,
    )
