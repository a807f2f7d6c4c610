"""Quasi-static Q1 finite elements for the composite-matrix momentum balance.

Tension-positive effective stress sigma' = 2 G eps + lambda tr(eps) I with the
pore-pressure coupling sigma_total = sigma' - alpha P_eff I entering the weak
form as an element divergence load. Uniform rectangular elements let the
stiffness be assembled as per-cell weights on two reference matrices.
All elements use full 2-point Gauss quadrature per axis.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigError, InternalError
from .flow import GRAVITY
from .constitutive import lame_parameters


@dataclass
class MechBC:
    tag: str
    component: int
    kind: str            # "fixed" | "traction"
    value: object = 0.0  # displacement [m] or compressive traction [Pa]; may be callable(t)


@dataclass
class ElasticField:
    u: np.ndarray                 # (n_nodes, dim)
    strain: np.ndarray            # (n_cells, 3, 3)
    stress_eff: np.ndarray        # (n_cells, 3, 3), tension positive
    stress_total: np.ndarray     # (n_cells, 3, 3)
    eps_v: np.ndarray             # volumetric strain per cell
    sigma_c: np.ndarray           # mean effective compressive stress, >= 0 in compression
    dev_stress: np.ndarray        # von Mises magnitude per cell
    v_s: np.ndarray = None        # (n_cells, dim) sediment velocity, set by caller


def _reference_element(grid):
    """Reference Q1 matrices for one (uniform) element of the grid."""
    dim = grid.dim
    h = np.asarray(grid.spacing)
    n_corner = 2**dim
    # corner walk matches grid.element_node_ids(): C order, last axis fastest
    offsets = np.array(np.meshgrid(*[[0, 1]] * dim, indexing="ij")).reshape(dim, -1).T
    xi_corner = 2.0 * offsets - 1.0
    gp = np.array(np.meshgrid(*[[-1.0, 1.0]] * dim, indexing="ij")).reshape(dim, -1).T
    gp = gp / np.sqrt(3.0)
    detJ = np.prod(h) / n_corner  # reference volume 2^dim maps to cell volume
    # cross-sections of 1D/2D grids are unit-sized, so detJ already integrates them

    n_strain = {1: 1, 2: 3, 3: 6}[dim]

    def shape_grads(xi):
        """dN_I/dx at local point xi, shape (n_corner, dim)."""
        grads = np.empty((n_corner, dim))
        for I in range(n_corner):
            for d in range(dim):
                g = 2.0 / h[d] * 0.5 * xi_corner[I, d]
                for e in range(dim):
                    if e != d:
                        g *= 0.5 * (1.0 + xi_corner[I, e] * xi[e])
                grads[I, d] = g
        return grads

    def b_matrix(dN):
        B = np.zeros((n_strain, n_corner * dim))
        for I in range(n_corner):
            cols = slice(I * dim, (I + 1) * dim)
            if dim == 1:
                B[0, I] = dN[I, 0]
            elif dim == 2:
                B[0, I * dim + 0] = dN[I, 0]
                B[1, I * dim + 1] = dN[I, 1]
                B[2, I * dim + 0] = dN[I, 1]
                B[2, I * dim + 1] = dN[I, 0]
            else:
                B[0, I * dim + 0] = dN[I, 0]
                B[1, I * dim + 1] = dN[I, 1]
                B[2, I * dim + 2] = dN[I, 2]
                B[3, I * dim + 0] = dN[I, 1]
                B[3, I * dim + 1] = dN[I, 0]
                B[4, I * dim + 1] = dN[I, 2]
                B[4, I * dim + 2] = dN[I, 1]
                B[5, I * dim + 0] = dN[I, 2]
                B[5, I * dim + 2] = dN[I, 0]
        return B

    # constitutive split D = 2G D_G + lambda D_L (engineering shear strains)
    D_G = np.eye(n_strain)
    D_L = np.zeros((n_strain, n_strain))
    D_L[:dim, :dim] = 1.0
    for s in range(dim, n_strain):
        D_G[s, s] = 0.5

    K_G = np.zeros((n_corner * dim, n_corner * dim))
    K_L = np.zeros_like(K_G)
    div_vec = np.zeros(n_corner * dim)
    for xi in gp:
        dN = shape_grads(xi)
        B = b_matrix(dN)
        K_G += 2.0 * (B.T @ D_G @ B) * detJ
        K_L += (B.T @ D_L @ B) * detJ
        div_vec += dN.reshape(-1) * detJ

    grads_center = shape_grads(np.zeros(dim))
    return K_G, K_L, div_vec, grads_center


class GeomechSolver:
    def __init__(self, grid, bcs=(), gravity=False):
        self.grid = grid
        self.dim = grid.dim
        self.gravity = gravity
        self.K_G, self.K_L, self.div_vec, self.grads_center = _reference_element(grid)
        self.elems = grid.element_node_ids()           # (n_cells, 2**dim)
        nd = self.elems.shape[1] * self.dim
        dofs = (self.elems[:, :, None] * self.dim
                + np.arange(self.dim)[None, None, :]).reshape(-1, nd)
        self.elem_dofs = dofs
        self.rows = np.repeat(dofs, nd, axis=1).ravel()
        self.cols = np.tile(dofs, (1, nd)).ravel()
        self.n_dofs = grid.n_nodes * self.dim
        self._setup_bcs(bcs)

    # ------------------------------------------------------------------
    def _setup_bcs(self, bcs):
        g = self.grid
        self.fixed = np.zeros(self.n_dofs, dtype=bool)
        self.fixed_values = np.zeros(self.n_dofs)
        self.tractions = []
        node_mi = np.array(np.unravel_index(np.arange(g.n_nodes), g.node_shape))
        corner_offsets = np.array(
            np.meshgrid(*[[0, 1]] * self.dim, indexing="ij")).reshape(self.dim, -1).T

        for bc in bcs:
            if bc.tag not in g.boundary_cells:
                raise ConfigError(f"unknown boundary tag '{bc.tag}'")
            d = "xyz".index(bc.tag[0])
            if bc.component >= self.dim:
                raise ConfigError(
                    f"component {bc.component} invalid for a {self.dim}D grid")
            side_hi = bc.tag.endswith("+")
            if bc.kind == "fixed":
                plane = g.node_shape[d] - 1 if side_hi else 0
                nodes = np.where(node_mi[d] == plane)[0]
                dof = nodes * self.dim + bc.component
                self.fixed[dof] = True
                self.fixed_values[dof] = bc.value if not callable(bc.value) else bc.value(0.0)
            elif bc.kind == "traction":
                cells = g.boundary_cells[bc.tag]
                mask = corner_offsets[:, d] == (1 if side_hi else 0)
                face_nodes = self.elems[cells][:, mask]
                area = g.face_area[d] / face_nodes.shape[1]
                normal = np.zeros(self.dim)
                normal[d] = 1.0 if side_hi else -1.0
                self.tractions.append({
                    "dofs": (face_nodes * self.dim + bc.component).ravel(),
                    "normal_comp": normal[bc.component],
                    "area_per_node": area,
                    "value": bc.value,
                })
            else:
                raise ConfigError(f"unknown mechanics BC kind '{bc.kind}'")

    # ------------------------------------------------------------------
    def assemble(self, E_cells, nu, alphaP_cells=None, rho_sh_cells=None, t=0.0):
        """Stiffness and load vector; alphaP is the cell-wise alpha * P_eff."""
        E_cells = np.broadcast_to(np.asarray(E_cells, dtype=float),
                                  (self.grid.n_cells,))
        G, lam = lame_parameters(E_cells, nu)
        # K_G carries the shear factor 2 already: K_e = G K_G + lambda K_L
        vals = (G[:, None, None] * self.K_G[None, :, :]
                + lam[:, None, None] * self.K_L[None, :, :])
        K = sp.coo_matrix((vals.ravel(), (self.rows, self.cols)),
                          shape=(self.n_dofs, self.n_dofs)).tocsr()

        f = np.zeros(self.n_dofs)
        if alphaP_cells is not None:
            load = np.asarray(alphaP_cells, dtype=float)[:, None] * self.div_vec[None, :]
            np.add.at(f, self.elem_dofs.ravel(), load.ravel())
        if self.gravity and rho_sh_cells is not None:
            w = -GRAVITY * np.asarray(rho_sh_cells, dtype=float) \
                * self.grid.cell_volume / self.elems.shape[1]
            zcomp = self.elem_dofs.reshape(self.grid.n_cells, -1, self.dim)[:, :, self.dim - 1]
            np.add.at(f, zcomp.ravel(), np.repeat(w, self.elems.shape[1]))
        for tr in self.tractions:
            value = tr["value"](t) if callable(tr["value"]) else tr["value"]
            # compressive magnitude acts against the outward normal
            np.add.at(f, tr["dofs"], -value * tr["normal_comp"] * tr["area_per_node"])
        return K, f

    def solve(self, E_cells, nu, alphaP_cells=None, rho_sh_cells=None, t=0.0):
        if not np.any(self.fixed):
            raise InternalError(
                "no displacement constraints: the elastic system is singular")
        K, f = self.assemble(E_cells, nu, alphaP_cells, rho_sh_cells, t)
        free = ~self.fixed
        u = np.zeros(self.n_dofs)
        u[self.fixed] = self.fixed_values[self.fixed]
        rhs = f[free] - K[free][:, self.fixed] @ u[self.fixed]
        K_ff = K[free][:, free].tocsc()
        try:
            u[free] = spla.splu(K_ff).solve(rhs)
        except RuntimeError as exc:
            raise InternalError(f"singular elastic system: {exc}") from exc
        return u.reshape(self.grid.n_nodes, self.dim)

    # ------------------------------------------------------------------
    def recover(self, u, E_cells, nu, alpha, P_eff):
        """Cell-centered strain/stress from the Q1 gradients at cell centers."""
        dim = self.dim
        n = self.grid.n_cells
        u_flat = u.reshape(-1)
        u_e = u_flat[self.elem_dofs].reshape(n, -1, dim)   # (n, corners, dim)
        # displacement gradient H[c, i, j] = sum_I dN_I/dx_j * u_I_i
        H = np.einsum("nci,cj->nij", u_e, self.grads_center)
        eps3 = np.zeros((n, 3, 3))
        eps3[:, :dim, :dim] = 0.5 * (H + np.transpose(H, (0, 2, 1)))

        E_cells = np.broadcast_to(np.asarray(E_cells, dtype=float), (n,))
        G, lam = lame_parameters(E_cells, nu)
        tr = np.trace(eps3, axis1=1, axis2=2)
        eye = np.eye(3)[None, :, :]
        sig_eff = 2.0 * G[:, None, None] * eps3 + lam[:, None, None] * tr[:, None, None] * eye
        P_eff = np.broadcast_to(np.asarray(P_eff, dtype=float), (n,))
        sig_tot = sig_eff - alpha * P_eff[:, None, None] * eye

        mean_eff = np.trace(sig_eff, axis1=1, axis2=2) / 3.0
        dev = sig_eff - mean_eff[:, None, None] * eye
        q = np.sqrt(1.5 * np.einsum("nij,nij->n", dev, dev))
        return ElasticField(
            u=u, strain=eps3, stress_eff=sig_eff, stress_total=sig_tot,
            eps_v=tr, sigma_c=-mean_eff, dev_stress=q,
        )

    def cell_average_nodal(self, nodal):
        """Average a nodal vector field to cell centers (corner mean)."""
        vals = nodal.reshape(-1, self.dim)[self.elems]   # (n, corners, dim)
        return vals.mean(axis=1)


def sediment_velocity(u_new, u_old, dt):
    """Backward-difference nodal velocity field."""
    if dt <= 0.0:
        raise ConfigError(f"time step must be positive, got {dt}")
    return (np.asarray(u_new, dtype=float) - np.asarray(u_old, dtype=float)) / dt
