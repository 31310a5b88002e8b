"""Dirichlet heat flow for Hermitian metrics on a grid box in C^3.

The flow evolves a 2x2 positive Hermitian field H (the cohomology metric in
the x-chart holomorphic frame) on a box with Re(x) >= 1, keeping the
boundary pinned to the monad metric H0 and driving the interior mean
curvature to zero:

    H^{-1} dH/dt = -2 i Lambda F_H,
    i Lambda F_H = -2 sum_j H^{-1} (d_j dbar_j H - (dbar_j H) H^{-1} (d_j H)),

so the update is H <- H + dt (Lap6 H - 4 sum_j (dbar_j H) H^{-1} (d_j H))
with Lap6 the six-coordinate discrete Laplacian (explicit Euler, centered
differences).  In the abelian case H = e^u I this is the forward heat
equation du/dt = Lap u, which fixes both sign conventions and the CFL
limit: dt < 1 / (2 sum_axis 1/h_axis^2), i.e. h^2/12 on an isotropic grid.

Axis order of the real grid: (Re x, Im x, Re y, Im y, Re z, Im z).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import monads as mo
from .ansatz import ansatz_monad, chart_frame
from .geometry import coords

__all__ = [
    "FlowConfig",
    "FlowDomain",
    "FlowState",
    "CFL_COEFF",
    "build_domain",
    "default_box",
    "mean_curvature_field",
    "step",
    "run",
    "barrier_check",
    "energy",
    "save_checkpoint",
    "load_checkpoint",
    "write_history_csv",
    "PositivityError",
]

# stability limit for the isotropic 6-axis explicit scheme is 1/12; keep a
# margin for the nonlinear term
CFL_COEFF = 1.0 / 16.0

NODE_BUDGET = 2_000_000


class PositivityError(RuntimeError):
    """Positive-definiteness lost during the flow; carries node diagnostics."""

    def __init__(self, msg, node=None):
        super().__init__(msg)
        self.node = node


@dataclass(frozen=True)
class FlowConfig:
    """JSON-loadable flow configuration."""

    box: tuple = ((1.0, 2.0), (-0.5, 0.5), (-0.5, 0.5),
                  (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5))
    resolution: int = 7
    steps: int = 2000
    dt: float | None = None          # None -> CFL bound
    monitor_cadence: int = 10
    barrier_constant: float = 2.5
    seed: int = 0
    n_barrier_nodes: int = 12

    @classmethod
    def from_json(cls, path) -> "FlowConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown flow config keys: {sorted(unknown)}")
        if "box" in raw:
            box = tuple(tuple(float(v) for v in iv) for iv in raw["box"])
            if len(box) != 6 or any(len(iv) != 2 for iv in box):
                raise ValueError("box must be six [lo, hi] intervals")
            raw["box"] = box
        return cls(**raw)


def default_box():
    return ((1.0, 2.0), (-0.5, 0.5), (-0.5, 0.5),
            (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5))


@dataclass
class FlowDomain:
    box: tuple
    shape: tuple
    spacings: np.ndarray          # (6,)
    h0: np.ndarray                # (..., 2, 2) metric at every node
    interior: tuple               # slice tuple selecting interior nodes
    barrier_nodes: np.ndarray     # (m, 6) integer indices of check nodes
    barrier_g: np.ndarray | None = None

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.shape))

    def grid_points(self) -> np.ndarray:
        """Complex coordinates (..., 3) of every node."""
        axes = [np.linspace(lo, hi, n) for (lo, hi), n in zip(self.box, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.empty(self.shape + (3,), dtype=complex)
        pts[..., 0] = mesh[0] + 1j * mesh[1]
        pts[..., 1] = mesh[2] + 1j * mesh[3]
        pts[..., 2] = mesh[4] + 1j * mesh[5]
        return pts

    def cfl_bound(self) -> float:
        return CFL_COEFF * float(self.spacings.min()) ** 2


def _chart_gram(points: np.ndarray) -> np.ndarray:
    """Closed-form x-chart Gram of the monad metric, batched over (..., 3).

    Frame sections (0,0,1,0) and (0, -z/x, 0, 1); entries are the h1 inner
    products after projecting off the image of alpha.
    """
    x, y, z = points[..., 0], points[..., 1], points[..., 2]
    rho = 1.0 + np.abs(x) ** 2 + np.abs(y) ** 2 + np.abs(z) ** 2
    q = rho**-0.5
    sig = np.abs(x) ** 2 + np.abs(y) ** 2
    ada = sig * q + 1.0
    a1 = np.conj(1.0 + 0 * x)  # alpha^dag s1 = 1
    a2 = -np.conj(y) * q * z / x  # alpha^dag s2
    g = np.empty(points.shape[:-1] + (2, 2), dtype=complex)
    g[..., 0, 0] = 1.0 - np.conj(a1) * a1 / ada
    g[..., 0, 1] = -np.conj(a1) * a2 / ada
    g[..., 1, 0] = np.conj(g[..., 0, 1])
    g[..., 1, 1] = q * np.abs(z / x) ** 2 + 1.0 - np.conj(a2) * a2 / ada
    return g


def build_domain(box=None, resolution: int = 7,
                 n_barrier_nodes: int = 12, seed: int = 0) -> FlowDomain:
    """Grid the box, fill the boundary metric, and pick barrier check nodes."""
    box = tuple(tuple(map(float, iv)) for iv in (box or default_box()))
    if len(box) != 6:
        raise ValueError("box must have six real intervals")
    if box[0][0] < 1.0:
        raise ValueError("x-chart frame requires Re(x) >= 1 on the box")
    if any(hi <= lo for lo, hi in box):
        raise ValueError("empty box interval")
    if resolution < 5:
        raise ValueError("resolution must be at least 5 per axis")
    shape = (resolution,) * 6
    if int(np.prod(shape)) > NODE_BUDGET:
        raise ValueError(f"node budget exceeded: {np.prod(shape)} > {NODE_BUDGET}")
    spacings = np.array([(hi - lo) / (resolution - 1) for lo, hi in box])
    dom = FlowDomain(box=box, shape=shape, spacings=spacings,
                     h0=None, interior=(slice(1, -1),) * 6,
                     barrier_nodes=None)
    pts = dom.grid_points()
    dom.h0 = _chart_gram(pts)
    rng = np.random.default_rng(seed)
    idx = rng.integers(1, resolution - 1, size=(n_barrier_nodes, 6))
    idx[0] = (resolution // 2,) * 6
    dom.barrier_nodes = idx
    return dom


@dataclass
class FlowState:
    domain: FlowDomain
    h: np.ndarray
    t: float = 0.0
    step_count: int = 0
    history: list = field(default_factory=list)  # (step, t, sup |iLamF|, energy)


def initial_state(domain: FlowDomain) -> FlowState:
    return FlowState(domain=domain, h=domain.h0.copy())


def _axis_slices(interior, axis, shift):
    sl = list(interior)
    lo, hi = 1 + shift, -1 + shift
    sl[axis] = slice(lo, hi) if hi != 0 else slice(lo, None)
    return tuple(sl)


def _flow_bracket(state: FlowState):
    """B = Lap6 H - 4 sum_j (dbar_j H) H^{-1} (d_j H) on interior nodes.

    The update is H += dt B and the mean curvature is -H^{-1} B / 2.
    """
    h = state.h
    dom = state.domain
    inner = dom.interior
    hc = h[inner]
    lap = np.zeros_like(hc)
    dre = []
    dim = []
    for axis in range(6):
        hp = h[_axis_slices(inner, axis, 1)]
        hm = h[_axis_slices(inner, axis, -1)]
        sp = dom.spacings[axis]
        lap += (hp + hm - 2.0 * hc) / sp**2
        d = (hp - hm) / (2.0 * sp)
        (dre if axis % 2 == 0 else dim).append(d)
    hinv = np.linalg.inv(hc)
    nonlin = np.zeros_like(hc)
    for j in range(3):
        dj = 0.5 * (dre[j] - 1j * dim[j])       # d_{w_j} H
        djb = np.swapaxes(dj.conj(), -1, -2)    # dbar_{w_j} H for Hermitian H
        nonlin += djb @ hinv @ dj
    return lap - 4.0 * nonlin, hinv


def mean_curvature_field(state: FlowState):
    """i Lambda F_H on interior nodes and its sup metric norm.

    Per node the 2x2 matrix -H^{-1} B / 2 is H-self-adjoint with real
    eigenvalues; the norm is the spectral radius.
    """
    bracket, hinv = _flow_bracket(state)
    chi = -0.5 * hinv @ bracket
    tr = np.real(chi[..., 0, 0] + chi[..., 1, 1])
    det = np.real(chi[..., 0, 0] * chi[..., 1, 1] - chi[..., 0, 1] * chi[..., 1, 0])
    disc = np.sqrt(np.maximum(tr**2 - 4.0 * det, 0.0))
    norms = np.maximum(np.abs(0.5 * (tr + disc)), np.abs(0.5 * (tr - disc)))
    return chi, float(norms.max())


def step(state: FlowState, dt: float | None = None) -> FlowState:
    """One explicit Euler step; boundary nodes are never touched."""
    dom = state.domain
    bound = dom.cfl_bound()
    if dt is None:
        dt = bound
    if dt > bound * (1.0 + 1e-12):
        raise ValueError(f"dt {dt:g} above CFL bound {bound:g}")
    bracket, _ = _flow_bracket(state)
    hn = state.h[dom.interior] + dt * bracket
    hn = 0.5 * (hn + np.swapaxes(hn.conj(), -1, -2))
    state.h[dom.interior] = hn
    state.t += dt
    state.step_count += 1
    return state


def _check_positivity(state: FlowState):
    h = state.h
    tr = np.real(h[..., 0, 0] + h[..., 1, 1])
    det = np.real(h[..., 0, 0] * h[..., 1, 1] - h[..., 0, 1] * h[..., 1, 0])
    bad = (tr <= 0) | (det <= 0)
    if bad.any():
        node = np.unravel_index(int(np.argmax(bad)), bad.shape)
        raise PositivityError(
            f"positivity lost at node {node} (step {state.step_count}, "
            f"tr {tr[node]:.3e}, det {det[node]:.3e})", node=node)


def run(domain: FlowDomain, n_steps: int, dt: float | None = None,
        monitor_cadence: int = 10, with_energy: bool = True) -> FlowState:
    """Run the flow from H0, recording sup |i Lambda F| and interior energy."""
    state = initial_state(domain)
    _, sup0 = mean_curvature_field(state)
    e0 = energy(state) if with_energy else float("nan")
    state.history.append((0, 0.0, sup0, e0))
    for k in range(1, n_steps + 1):
        step(state, dt)
        if k % 50 == 0:
            _check_positivity(state)
        if k % monitor_cadence == 0 or k == n_steps:
            _, sup = mean_curvature_field(state)
            e = energy(state) if with_energy else float("nan")
            state.history.append((k, state.t, sup, e))
    _check_positivity(state)
    return state


def energy(state: FlowState) -> float:
    """Interior L^2 curvature: midpoint-rule integral of |F_H|^2.

    The full (1,1) curvature F[j,k] = -dbar_k(H^{-1} d_j H) is built from
    nested centered differences, so the integral runs over nodes at least
    two layers from the boundary.  Component norms use the metric
    (|N|^2 = tr(N H^{-1} N^dag H)) and the same real-pair form convention
    as the monad engine.
    """
    dom = state.domain
    h = state.h
    inner2 = (slice(2, -2),) * 6

    def d_axis(f, axis):
        sl_p = [slice(1, -1)] * 6
        sl_m = [slice(1, -1)] * 6
        sl_p[axis] = slice(2, None)
        sl_m[axis] = slice(0, -2)
        return (f[tuple(sl_p)] - f[tuple(sl_m)]) / (2.0 * dom.spacings[axis])

    theta = []
    for j in range(3):
        dj = 0.5 * (d_axis(h, 2 * j) - 1j * d_axis(h, 2 * j + 1))  # on 1-in grid
        theta.append(np.linalg.inv(h[(slice(1, -1),) * 6]) @ dj)
    f_raw = np.empty(tuple(s - 4 for s in dom.shape) + (3, 3, 2, 2), dtype=complex)
    for j in range(3):
        for k in range(3):
            dkb = 0.5 * (d_axis(theta[j], 2 * k) + 1j * d_axis(theta[j], 2 * k + 1))
            f_raw[..., j, k, :, :] = -dkb
    hc = h[inner2]
    hcinv = np.linalg.inv(hc)

    def met_norm_sq(m):
        return np.real(np.einsum("...ab,...bc,...cd,...da->...",
                                 m, hcinv, np.swapaxes(m.conj(), -1, -2), hc))

    dens = np.zeros(f_raw.shape[:6])
    for a in range(3):
        dens += 4.0 * met_norm_sq(f_raw[..., a, a, :, :])
    for a in range(3):
        for b in range(3):
            if a == b:
                continue
            dens += met_norm_sq(f_raw[..., a, b, :, :] + f_raw[..., b, a, :, :])
            if a < b:
                dens += 2.0 * met_norm_sq(f_raw[..., a, b, :, :] - f_raw[..., b, a, :, :])
    cell = float(np.prod(dom.spacings))
    return float(dens.sum() * cell)


def barrier_check(state: FlowState, c_barrier: float,
                  g_values: np.ndarray | None = None) -> dict:
    """Check e^{-cG} H0 <= H <= e^{cG} H0 at the domain's barrier nodes.

    The matrix inequality is tested through the eigenvalues of
    H0^{-1/2} H H0^{-1/2}; ``g_values`` defaults to the potentials cached on
    the domain by :func:`attach_barrier_potentials`.
    """
    dom = state.domain
    if g_values is None:
        g_values = dom.barrier_g
    if g_values is None:
        raise ValueError("no barrier potentials: call attach_barrier_potentials")
    results = []
    worst = np.inf
    for (idx, g) in zip(dom.barrier_nodes, g_values):
        node = tuple(int(i) for i in idx)
        h0 = dom.h0[node]
        evals0, evecs0 = np.linalg.eigh(h0)
        inv_sqrt = evecs0 @ np.diag(evals0**-0.5) @ evecs0.conj().T
        m = inv_sqrt @ state.h[node] @ inv_sqrt
        ev = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        lo_band, hi_band = np.exp(-c_barrier * g), np.exp(c_barrier * g)
        ok = bool(ev.min() >= lo_band - 1e-12 and ev.max() <= hi_band + 1e-12)
        margin = min(ev.min() - lo_band, hi_band - ev.max())
        worst = min(worst, margin)
        results.append({"node": node, "eigs": ev.tolist(), "g": float(g),
                        "band": (float(lo_band), float(hi_band)), "pass": ok})
    return {"pass": all(r["pass"] for r in results), "worst_margin": float(worst),
            "nodes": results}


def attach_barrier_potentials(domain: FlowDomain, mc=None) -> np.ndarray:
    """Evaluate the barrier potential at the domain's check nodes and cache it."""
    from .potential import MCParams, eval_G

    mc = mc or MCParams()
    pts = domain.grid_points()
    gs = []
    for i, idx in enumerate(domain.barrier_nodes):
        node = tuple(int(v) for v in idx)
        gv = eval_G(pts[node], MCParams(samples_per_shell=mc.samples_per_shell,
                                        core_delta_rel=mc.core_delta_rel,
                                        seed=mc.seed + 31 * i))
        gs.append(gv.estimate)
    domain.barrier_g = np.asarray(gs)
    return domain.barrier_g


# ---------------------------------------------------------------------------
# IO: checkpoints and histories


def save_checkpoint(state: FlowState, path) -> None:
    """Flat little-endian float64 array, node-major, 8 reals per node.

    Layout per node: [H00.re, H11.re, H01.re, H01.im, 0, 0, 0, 0]; a JSON
    sidecar (same path + '.json') describes the grid.
    """
    path = Path(path)
    h = state.h.reshape(-1, 2, 2)
    out = np.zeros((h.shape[0], 8), dtype="<f8")
    out[:, 0] = h[:, 0, 0].real
    out[:, 1] = h[:, 1, 1].real
    out[:, 2] = h[:, 0, 1].real
    out[:, 3] = h[:, 0, 1].imag
    out.tofile(path)
    sidecar = {
        "box": [list(iv) for iv in state.domain.box],
        "shape": list(state.domain.shape),
        "spacings": state.domain.spacings.tolist(),
        "time": state.t,
        "step": state.step_count,
        "dtype": "<f8",
        "layout": "node-major, 8 reals per node: diag00, diag11, offdiag re, offdiag im, 4x pad",
    }
    with open(path.with_suffix(path.suffix + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)


def load_checkpoint(path) -> tuple[np.ndarray, dict]:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".json")) as fh:
        sidecar = json.load(fh)
    raw = np.fromfile(path, dtype="<f8").reshape(-1, 8)
    shape = tuple(sidecar["shape"])
    h = np.empty((raw.shape[0], 2, 2), dtype=complex)
    h[:, 0, 0] = raw[:, 0]
    h[:, 1, 1] = raw[:, 1]
    h[:, 0, 1] = raw[:, 2] + 1j * raw[:, 3]
    h[:, 1, 0] = raw[:, 2] - 1j * raw[:, 3]
    return h.reshape(shape + (2, 2)), sidecar


def write_history_csv(state: FlowState, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time", "sup_mean_curvature", "energy"])
        for row in state.history:
            writer.writerow([row[0], format(row[1], ".17g"),
                             format(row[2], ".17g"), format(row[3], ".17g")])
