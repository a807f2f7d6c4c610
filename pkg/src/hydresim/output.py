"""Output writers: RFC-4180 probe CSVs, legacy ASCII structured-grid snapshots
and the plain-text run log, plus the probe/production recorder."""

import csv
import logging
import os

import numpy as np

from scipy.interpolate import RegularGridInterpolator


def setup_run_log(out_dir, name="run"):
    os.makedirs(out_dir, exist_ok=True)
    log = logging.getLogger("hydresim")
    log.setLevel(logging.INFO)
    for h in list(log.handlers):
        log.removeHandler(h)
    fh = logging.FileHandler(os.path.join(out_dir, f"{name}.log"), mode="w")
    fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(fh)
    sh = logging.StreamHandler()
    sh.setFormatter(logging.Formatter("%(levelname)s %(message)s"))
    log.addHandler(sh)
    return log


def interp_cell_field(grid, field, points):
    """Multilinear interpolation of a cell-centered field at physical points."""
    axes = grid.axis_centers
    data = np.asarray(field, dtype=float).reshape(grid.shape)
    if grid.dim == 1:
        return np.interp([p[0] for p in points], axes[0], data)
    itp = RegularGridInterpolator(axes, data, bounds_error=False,
                                  fill_value=None)
    return itp(np.asarray(points, dtype=float))


class ProbeRecorder:
    """Collects probe time series and cumulative gas production per step."""

    def __init__(self, setup, track_production=True):
        self.setup = setup
        self.track_production = track_production
        self.times = []
        self.records = {}          # field -> list of arrays (n_probes,)
        self.cumulative_gas = []   # m3 at standard conditions
        self.gas_rate = []         # m3/min
        self.reports = []
        self._cum = 0.0

    def fields_from_state(self, state, driver):
        f = driver._flow_fields(state)
        out = {
            "P_g": state.P_g, "P_w": f["P_w"], "P_eff": f["P_eff"],
            "P_c": f["P_c"], "S_g": state.S_g, "S_w": state.S_w,
            "S_h": state.S_h, "T": state.T, "phi": state.phi,
            "phi_eff": state.phi_eff, "K": f["K"],
        }
        return out

    def __call__(self, state, report, driver):
        self.times.append(state.t)
        rate_m3s = 0.0
        if self.track_production and report is not None:
            out = driver.flow.boundary_outflow(state.pack_x1())
            rate_m3s = out["ch4"] / self.setup.params.rho_gas_std \
                * self.setup.cross_section
            self._cum += rate_m3s * report.dt_used
        self.cumulative_gas.append(self._cum)
        self.gas_rate.append(rate_m3s * 60.0)
        if report is not None:
            self.reports.append(report)
        if self.setup.probes:
            fields = self.fields_from_state(state, driver)
            for name in self.setup.probe_fields:
                vals = interp_cell_field(self.setup.grid, fields[name],
                                         self.setup.probes)
                self.records.setdefault(name, []).append(np.atleast_1d(vals))

    # ------------------------------------------------------------------
    def probe_array(self, field):
        return np.array(self.records[field])

    def write_csv(self, out_dir, name):
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        # production series
        path = os.path.join(out_dir, f"{name}_production.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time_s", "cumulative_gas_m3", "gas_rate_m3_per_min"])
            for i, t in enumerate(self.times):
                w.writerow([f"{t:.10g}", f"{self.cumulative_gas[i]:.10g}",
                            f"{self.gas_rate[i]:.10g}"])
        paths.append(path)
        if self.setup.probes:
            path = os.path.join(out_dir, f"{name}_probes.csv")
            labels = ["_".join(f"{c:g}" for c in p) for p in self.setup.probes]
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                header = ["time_s"]
                for fname in self.setup.probe_fields:
                    header += [f"{fname}@{lab}" for lab in labels]
                w.writerow(header)
                for i, t in enumerate(self.times):
                    row = [f"{t:.10g}"]
                    for fname in self.setup.probe_fields:
                        row += [f"{v:.10g}" for v in self.records[fname][i]]
                    w.writerow(row)
            paths.append(path)
        return paths


def write_vtk_snapshot(path, grid, cell_fields, point_fields=None, title="hydresim"):
    """Legacy ASCII structured-points snapshot with cell data (and optional
    nodal vectors)."""
    spacing = list(grid.spacing) + [1.0] * (3 - grid.dim)
    dims = list(grid.node_shape) + [2] * 0 + [1] * (3 - grid.dim)
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\n")
        fh.write("ASCII\n")
        fh.write("DATASET STRUCTURED_POINTS\n")
        fh.write(f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}\n")
        fh.write("ORIGIN 0 0 0\n")
        fh.write(f"SPACING {spacing[0]:.10g} {spacing[1]:.10g} {spacing[2]:.10g}\n")
        fh.write(f"CELL_DATA {grid.n_cells}\n")
        for name, field in cell_fields.items():
            fh.write(f"SCALARS {name} double\nLOOKUP_TABLE default\n")
            # VTK expects x-fastest ordering; our arrays are C-ordered
            data = np.asarray(field, dtype=float).reshape(grid.shape)
            flat = data.transpose().ravel(order="C") if grid.dim > 1 else data
            for v in flat:
                fh.write(f"{v:.10g}\n")
        if point_fields:
            fh.write(f"POINT_DATA {grid.n_nodes}\n")
            for name, field in point_fields.items():
                arr = np.asarray(field, dtype=float).reshape(grid.n_nodes, -1)
                vec = np.zeros((grid.n_nodes, 3))
                vec[:, :arr.shape[1]] = arr
                grid_mi = vec.reshape(*grid.node_shape, 3)
                flat = np.moveaxis(grid_mi, range(grid.dim),
                                   range(grid.dim - 1, -1, -1)).reshape(-1, 3)
                fh.write(f"VECTORS {name} double\n")
                for v in flat:
                    fh.write(f"{v[0]:.10g} {v[1]:.10g} {v[2]:.10g}\n")
