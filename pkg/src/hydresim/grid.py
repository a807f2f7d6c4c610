"""Axis-aligned tensor-product grid with cell-centered scalars and nodal vectors.

Cells and nodes are stored flattened in C order. 1D/2D grids carry unit
cross-sections on the missing axes so volumes and face areas stay in m3/m2.
"""

import numpy as np

from .errors import ConfigError, InternalError

AXIS_NAMES = ("x", "y", "z")


class StructuredGrid:
    def __init__(self, dim, cell_counts, extents):
        if dim not in (1, 2, 3):
            raise ConfigError(f"dimensionality must be 1, 2 or 3, got {dim}")
        cell_counts = tuple(int(n) for n in cell_counts)
        extents = tuple(float(L) for L in extents)
        if len(cell_counts) != dim or len(extents) != dim:
            raise ConfigError(
                f"expected {dim} cell counts and extents, "
                f"got {len(cell_counts)} and {len(extents)}"
            )
        if any(n < 1 for n in cell_counts):
            raise ConfigError(f"cell counts must be >= 1, got {cell_counts}")
        if any(L <= 0.0 for L in extents):
            raise ConfigError(f"extents must be > 0, got {extents}")

        self.dim = dim
        self.shape = cell_counts
        self.extents = extents
        self.spacing = tuple(L / n for L, n in zip(extents, cell_counts))
        self.n_cells = int(np.prod(cell_counts))
        self.node_shape = tuple(n + 1 for n in cell_counts)
        self.n_nodes = int(np.prod(self.node_shape))
        self.cell_volume = float(np.prod(self.spacing))
        # face area normal to axis d = product of the other spacings
        self.face_area = tuple(
            self.cell_volume / self.spacing[d] for d in range(dim)
        )

        self._build_connectivity()
        self._build_coordinates()

    # ------------------------------------------------------------------
    def _build_connectivity(self):
        idx = np.arange(self.n_cells).reshape(self.shape)
        self.interior_faces = []  # per axis: (left cell ids, right cell ids)
        self.boundary_cells = {}  # tag -> cell ids owning that boundary face
        for d in range(self.dim):
            sl_lo = [slice(None)] * self.dim
            sl_hi = [slice(None)] * self.dim
            sl_lo[d] = slice(None, -1)
            sl_hi[d] = slice(1, None)
            self.interior_faces.append(
                (idx[tuple(sl_lo)].ravel(), idx[tuple(sl_hi)].ravel())
            )
            first = [slice(None)] * self.dim
            last = [slice(None)] * self.dim
            first[d] = 0
            last[d] = -1
            self.boundary_cells[AXIS_NAMES[d] + "-"] = idx[tuple(first)].ravel()
            self.boundary_cells[AXIS_NAMES[d] + "+"] = idx[tuple(last)].ravel()

    def _build_coordinates(self):
        self.axis_centers = tuple(
            (np.arange(n) + 0.5) * h for n, h in zip(self.shape, self.spacing)
        )
        self.axis_nodes = tuple(
            np.arange(n + 1) * h for n, h in zip(self.shape, self.spacing)
        )
        centers = np.meshgrid(*self.axis_centers, indexing="ij")
        self.cell_centers = np.stack([c.ravel() for c in centers], axis=1)
        nodes = np.meshgrid(*self.axis_nodes, indexing="ij")
        self.node_coords = np.stack([c.ravel() for c in nodes], axis=1)

    # ------------------------------------------------------------------
    def cell_index(self, multi_index):
        return int(np.ravel_multi_index(multi_index, self.shape))

    @property
    def faces_info(self):
        """Interior faces per axis with geometry, for FV assemblers."""
        return [
            {"axis": d, "left": lr[0], "right": lr[1],
             "area": self.face_area[d], "dist": self.spacing[d]}
            for d, lr in enumerate(self.interior_faces)
        ]

    def boundary_face_centers(self, tag):
        """Centroids of the boundary faces for a tag like 'x-' or 'z+'."""
        cells = self.boundary_cells[tag]
        d = AXIS_NAMES.index(tag[0])
        pts = self.cell_centers[cells].copy()
        pts[:, d] = 0.0 if tag.endswith("-") else self.extents[d]
        return pts

    def element_node_ids(self):
        """Q1 element connectivity: (n_cells, 2**dim) node ids, C-ordered cells."""
        base = np.arange(self.n_cells).reshape(self.shape)
        corners = []
        offsets = np.array(
            np.meshgrid(*[[0, 1]] * self.dim, indexing="ij")
        ).reshape(self.dim, -1).T  # (2**dim, dim), C-order corner walk
        mi = np.array(np.unravel_index(base.ravel(), self.shape)).T
        for off in offsets:
            corners.append(np.ravel_multi_index((mi + off).T, self.node_shape))
        return np.stack(corners, axis=1)

    def check_field(self, field, kind="cell"):
        n = self.n_cells if kind == "cell" else self.n_nodes
        if np.shape(field)[0] != n:
            raise InternalError(
                f"{kind} field has length {np.shape(field)[0]}, expected {n}"
            )

    def total_volume(self):
        return self.cell_volume * self.n_cells

    def __repr__(self):
        return f"StructuredGrid(dim={self.dim}, shape={self.shape}, extents={self.extents})"


def build_grid(dimensionality, cell_counts, extents):
    """Construct a grid; raises ConfigError on nonpositive counts/extents."""
    return StructuredGrid(dimensionality, cell_counts, extents)
