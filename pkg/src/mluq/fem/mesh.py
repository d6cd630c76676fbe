"""Structured beam meshes and the h/p refinement level specifications.

The beam rectangle is discretized with an equidistant grid of Lagrange
quadrilaterals.  Global nodes are numbered lexicographically by (x, y)
(x-column major, y fastest within a column) and each node carries the
interleaved dof pair (u_x, u_y); this fixes the dof counts 410 / 21186 /
5474 quoted for the reference hierarchies.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .elements import MAX_ORDER, local_nodes

__all__ = ["LevelSpec", "Mesh", "MeshError", "build_mesh", "h_level", "p_level"]

BEAM_LENGTH = 2.5
BEAM_HEIGHT = 0.25
BASE_ELEMENTS_X = 40
BASE_ELEMENTS_Y = 4


class MeshError(ValueError):
    """Invalid mesh or level configuration."""


@dataclass(frozen=True)
class LevelSpec:
    """One level of an h- or p-refined mesh hierarchy.

    h-refinement keeps order 1 and multiplies the element count per
    direction by 2 each level (4x elements in 2D); p-refinement keeps the
    base element grid and raises the polynomial order to level + 1.
    """

    index: int
    kind: str  # "h" or "p"
    elements_x: int
    elements_y: int
    order: int

    def __post_init__(self):
        if self.index < 0:
            raise MeshError("level index must be nonnegative")
        if self.kind not in ("h", "p"):
            raise MeshError(f"kind must be 'h' or 'p', got {self.kind!r}")
        if self.elements_x < 1 or self.elements_y < 1:
            raise MeshError("element counts must be positive")
        if not 1 <= self.order <= MAX_ORDER:
            raise MeshError(f"order must lie in [1, {MAX_ORDER}], got {self.order}")

    @property
    def n_elements(self) -> int:
        return self.elements_x * self.elements_y

    def dof_count(self) -> int:
        nnx = self.elements_x * self.order + 1
        nny = self.elements_y * self.order + 1
        return 2 * nnx * nny


def h_level(index: int, base_x: int = BASE_ELEMENTS_X, base_y: int = BASE_ELEMENTS_Y) -> LevelSpec:
    """h-hierarchy level: element count grows like 2^(2 * index)."""
    return LevelSpec(index=index, kind="h",
                     elements_x=base_x * 2**index,
                     elements_y=base_y * 2**index, order=1)


def p_level(index: int, base_x: int = BASE_ELEMENTS_X, base_y: int = BASE_ELEMENTS_Y) -> LevelSpec:
    """p-hierarchy level: fixed base grid, order = index + 1 (max quintic)."""
    return LevelSpec(index=index, kind="p", elements_x=base_x,
                     elements_y=base_y, order=index + 1)


class Mesh:
    """Regular quadrilateral mesh of the beam with supports and load set.

    Parameters
    ----------
    level : LevelSpec
        Refinement level defining grid and order.
    length, height : float
        Beam rectangle in meters.
    support : {"both_ends", "left_end"}
        Clamped edges; both dofs of every node on a clamped edge are fixed.
    load_position : {"midspan", "right_end"}
        Vertical column of nodes carrying the (equally split) point load.
    """

    def __init__(self, level: LevelSpec, length: float = BEAM_LENGTH,
                 height: float = BEAM_HEIGHT, support: str = "both_ends",
                 load_position: str = "midspan"):
        if support not in ("both_ends", "left_end"):
            raise MeshError(f"unknown support {support!r}")
        if load_position not in ("midspan", "right_end"):
            raise MeshError(f"unknown load position {load_position!r}")
        if load_position == "midspan" and level.elements_x % 2 != 0:
            raise MeshError("midspan load needs an even number of elements along x")

        self.level = level
        self.length = float(length)
        self.height = float(height)
        self.support = support
        self.load_position = load_position

        p = level.order
        self.nnx = level.elements_x * p + 1
        self.nny = level.elements_y * p + 1
        xs = np.linspace(0.0, self.length, self.nnx)
        ys = np.linspace(0.0, self.height, self.nny)
        ix, iy = np.meshgrid(np.arange(self.nnx), np.arange(self.nny), indexing="ij")
        self.nodes = np.column_stack([xs[ix.ravel()], ys[iy.ravel()]])

        # connectivity in local tensor ordering (j * (p+1) + i)
        ex, ey = np.meshgrid(np.arange(level.elements_x),
                             np.arange(level.elements_y), indexing="ij")
        ex = ex.ravel()[:, None, None]
        ey = ey.ravel()[:, None, None]
        li, lj = np.meshgrid(np.arange(p + 1), np.arange(p + 1), indexing="xy")
        self.elements = ((ex * p + li[None]) * self.nny + (ey * p + lj[None])).reshape(
            level.n_elements, (p + 1) ** 2
        )

        clamped_cols = [0, self.nnx - 1] if support == "both_ends" else [0]
        self.fixed_nodes = np.sort(np.concatenate(
            [self._column_nodes(c) for c in clamped_cols]
        ))
        load_col = self.nnx // 2 if load_position == "midspan" else self.nnx - 1
        self.load_nodes = self._column_nodes(load_col)

        fixed_dofs = np.concatenate([2 * self.fixed_nodes, 2 * self.fixed_nodes + 1])
        self.fixed_dofs = np.sort(fixed_dofs)
        self.free_dofs = np.setdiff1d(np.arange(self.n_dofs), self.fixed_dofs,
                                      assume_unique=True)
        self._cache: dict = {}

    # -- basic queries -------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_dofs(self) -> int:
        return 2 * self.n_nodes

    @property
    def n_elements(self) -> int:
        return self.level.n_elements

    @property
    def element_size(self):
        return (self.length / self.level.elements_x,
                self.height / self.level.elements_y)

    def node_index(self, x: float, y: float) -> int:
        """Index of the grid node closest to (x, y); exact for grid points."""
        hx = self.length / (self.nnx - 1)
        hy = self.height / (self.nny - 1)
        ix = int(round(x / hx))
        iy = int(round(y / hy))
        if not (0 <= ix < self.nnx and 0 <= iy < self.nny):
            raise MeshError(f"point ({x}, {y}) outside the mesh")
        return ix * self.nny + iy

    @property
    def mid_top_node(self) -> int:
        return self.node_index(0.5 * self.length, self.height)

    def _column_nodes(self, ix: int) -> np.ndarray:
        return ix * self.nny + np.arange(self.nny)

    def top_layer_nodes(self) -> np.ndarray:
        return np.arange(self.nnx) * self.nny + (self.nny - 1)

    # -- material sample support points ---------------------------------

    def element_centroids(self) -> np.ndarray:
        """Midpoints of the elements (midpoint material rule), (nelem, 2)."""
        key = "centroids"
        if key not in self._cache:
            hx, hy = self.element_size
            ex = (np.arange(self.level.elements_x) + 0.5) * hx
            ey = (np.arange(self.level.elements_y) + 0.5) * hy
            X, Y = np.meshgrid(ex, ey, indexing="ij")
            self._cache[key] = np.column_stack([X.ravel(), Y.ravel()])
        return self._cache[key]

    def gauss_points_global(self) -> np.ndarray:
        """Physical Gauss point coordinates (integration-point material rule).

        Shape (nelem, ngp, 2) with the same point ordering used by the
        assembly routines.
        """
        key = "gauss_global"
        if key not in self._cache:
            from .elements import gauss_rule_2d

            p = self.level.order
            pts, _ = gauss_rule_2d(p + 1)
            hx, hy = self.element_size
            cent = self.element_centroids()
            local = pts * np.array([0.5 * hx, 0.5 * hy])
            self._cache[key] = cent[:, None, :] + local[None, :, :]
        return self._cache[key]

    # -- assembly support ------------------------------------------------

    def assembly_indices(self):
        """Flattened (rows, cols) index arrays for element-matrix scatter."""
        key = "assembly_idx"
        if key not in self._cache:
            conn = self.elements
            dofs = np.empty((conn.shape[0], 2 * conn.shape[1]), dtype=np.int64)
            dofs[:, 0::2] = 2 * conn
            dofs[:, 1::2] = 2 * conn + 1
            rows = np.repeat(dofs, dofs.shape[1], axis=1)
            cols = np.tile(dofs, (1, dofs.shape[1]))
            self._cache[key] = (rows.ravel(), cols.ravel(), dofs)
        return self._cache[key]

    def element_node_coords(self, e: int) -> np.ndarray:
        return self.nodes[self.elements[e]]

    def reference_corner_coords(self) -> np.ndarray:
        """Node coordinates of a reference element centered at the origin."""
        hx, hy = self.element_size
        return local_nodes(self.level.order) * np.array([0.5 * hx, 0.5 * hy])

    def dump_csv(self, nodes_path, elements_path) -> None:
        """Debug dump of node coordinates and element connectivity."""
        with open(nodes_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["node", "x", "y"])
            for i, (x, y) in enumerate(self.nodes):
                w.writerow([i, repr(x), repr(y)])
        with open(elements_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["element"] + [f"n{i}" for i in range(self.elements.shape[1])])
            for e, conn in enumerate(self.elements):
                w.writerow([e] + conn.tolist())


def build_mesh(level: LevelSpec, length: float = BEAM_LENGTH,
               height: float = BEAM_HEIGHT, support: str = "both_ends",
               load_position: str = "midspan") -> Mesh:
    """Construct the structured beam mesh for one hierarchy level."""
    return Mesh(level, length=length, height=height, support=support,
                load_position=load_position)
