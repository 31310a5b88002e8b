"""ADHM one-instanton family over C^2.

Data (a1, a2, b1, b2) satisfying a1 b1 + a2 b2 = 0 and |a|^2 = |b|^2 > 0
defines the monad

    C --(x, y, a1, a2)^t--> C^4 --(-y, x, b1, b2)--> C

with trivial metrics; the induced connection on the rank-2 cohomology bundle
is an anti-self-dual instanton of charge 1.  The framed moduli space is
C^2/Z_2, with the U(1) action
(a1, a2, b1, b2) -> (a1 e^{it}, a2 e^{it}, b1 e^{-it}, b2 e^{-it}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import monads as mo

__all__ = [
    "ADHMData",
    "FramedModuliPoint",
    "adhm_residual",
    "random_valid_data",
    "instanton_monad",
    "asd_check",
    "curvature_density",
    "charge",
    "curvature_scale",
    "framed_moduli_point",
    "projector_field",
    "projector_curvature_fd",
]

VALID_TOL = 1e-12


@dataclass(frozen=True)
class ADHMData:
    a1: complex
    a2: complex
    b1: complex
    b2: complex

    @property
    def degenerate(self) -> bool:
        return max(abs(self.a1), abs(self.a2), abs(self.b1), abs(self.b2)) == 0.0

    def as_tuple(self):
        return (self.a1, self.a2, self.b1, self.b2)

    def rotated(self, theta: float) -> "ADHMData":
        """Apply the U(1) action by angle theta."""
        u = np.exp(1j * theta)
        return ADHMData(self.a1 * u, self.a2 * u, self.b1 / u, self.b2 / u)


@dataclass(frozen=True)
class FramedModuliPoint:
    """U(1)-normal form plus, for the sub-family (c,0,0,c), its C^2/Z_2 label."""

    normal_form: tuple
    z2_label: complex | None = None
    cone_point: bool = False


def adhm_residual(d: ADHMData):
    """(complex residual a1 b1 + a2 b2, real residual |a|^2 - |b|^2)."""
    cres = d.a1 * d.b1 + d.a2 * d.b2
    rres = (abs(d.a1) ** 2 + abs(d.a2) ** 2) - (abs(d.b1) ** 2 + abs(d.b2) ** 2)
    return cres, rres


def is_valid(d: ADHMData, tol: float = VALID_TOL) -> bool:
    cres, rres = adhm_residual(d)
    scale = max(abs(d.a1), abs(d.a2), abs(d.b1), abs(d.b2), 1.0) ** 2
    return abs(cres) <= tol * scale and abs(rres) <= tol * scale


def random_valid_data(rng: np.random.Generator, scale: float = 1.0) -> ADHMData:
    """Draw valid nondegenerate data: b = e^{i phi} (-a2, a1) solves both equations."""
    a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    a *= scale / np.linalg.norm(a) * (0.5 + rng.random())
    phi = rng.random() * 2 * np.pi
    b = np.exp(1j * phi) * np.array([-a[1], a[0]])
    return ADHMData(a[0], a[1], b[0], b[1])


def instanton_monad(d: ADHMData) -> mo.MonadSpec:
    if d.degenerate:
        raise ValueError("degenerate ADHM data: the connection is flat, no monad")
    if not is_valid(d, tol=1e-9):
        raise ValueError(f"ADHM equations violated: residuals {adhm_residual(d)}")
    a1, a2, b1, b2 = d.as_tuple()

    def alpha(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (4, 1), dtype=complex)
        out[..., 0, 0] = w[..., 0]
        out[..., 1, 0] = w[..., 1]
        out[..., 2, 0] = a1
        out[..., 3, 0] = a2
        return out

    def beta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (1, 4), dtype=complex)
        out[..., 0, 0] = -w[..., 1]
        out[..., 0, 1] = w[..., 0]
        out[..., 0, 2] = b1
        out[..., 0, 3] = b2
        return out

    def dalpha(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (2, 4, 1), dtype=complex)
        out[..., 0, 0, 0] = 1.0
        out[..., 1, 1, 0] = 1.0
        return out

    def dbeta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (2, 1, 4), dtype=complex)
        out[..., 0, 0, 1] = 1.0
        out[..., 1, 0, 0] = -1.0
        return out

    return mo.MonadSpec(
        name=f"adhm({a1:.3g},{a2:.3g},{b1:.3g},{b2:.3g})",
        n=2, k0=1, k1=4, k2=1,
        alpha=alpha, beta=beta,
        h0=mo.constant_metric(np.eye(1)),
        h1=mo.constant_metric(np.eye(4)),
        h2=mo.constant_metric(np.eye(1)),
        dalpha=dalpha, dbeta=dbeta,
    )


def strip_analytic_derivatives(spec: mo.MonadSpec, fd_step: float = 1e-4) -> mo.MonadSpec:
    """Variant of a monad that forces the engine onto finite differences."""
    h1 = spec.h1
    if isinstance(h1, mo.DiagPowerMetric):
        h1 = mo.MetricField(value=h1.value)
    else:
        h1 = mo.MetricField(value=h1.value)
    return mo.MonadSpec(
        name=spec.name + "-fd", n=spec.n, k0=spec.k0, k1=spec.k1, k2=spec.k2,
        alpha=spec.alpha, beta=spec.beta,
        h0=spec.h0, h1=h1, h2=spec.h2,
        dalpha=None, dbeta=None, fd_step=fd_step,
    )


def asd_check(d: ADHMData, p, analytic: bool = True) -> float:
    """|i Lambda F| + |F^{0,2}| + |F^{2,0}| at a point of C^2.

    The induced connection is the Chern connection of the cohomology metric,
    so its curvature is type (1,1) and the (0,2)/(2,0) blocks vanish
    identically; the measured residual is the mean-curvature norm.  With
    ``analytic=False`` the monad derivatives come from finite differences.
    """
    spec = instanton_monad(d)
    if not analytic:
        spec = strip_analytic_derivatives(spec)
    rep = mo.curvature(spec, p)
    return rep.norm_mean


def projector_field(d: ADHMData):
    """p -> orthogonal projector onto ker beta ∩ ker alpha^dag (batched)."""
    spec = instanton_monad(d)

    def proj(w):
        w = np.asarray(w, dtype=complex)
        a = spec.alpha(w)
        b = spec.beta(w)
        ad = np.swapaxes(a.conj(), -1, -2)
        bd = np.swapaxes(b.conj(), -1, -2)
        eye = np.broadcast_to(np.eye(4, dtype=complex), w.shape[:-1] + (4, 4))
        return eye - a @ ad / (ad @ a) - bd @ b / (b @ bd)

    return proj


def projector_curvature_fd(d: ADHMData, p, h: float = 1e-4):
    """Full curvature of the projection connection by finite differences.

    For trivial ambient metrics the induced connection is s -> P d s, whose
    curvature two-form is F(X, Y) = P [d_X P, d_Y P] P.  Returns the six
    independent real components F_{mu nu} restricted to an orthonormal fiber
    basis, an oracle for both the (1,1) machinery and anti-self-duality that
    never touches the complex conventions.  Real coordinate order:
    (u1, v1, u2, v2) with w_j = u_j + i v_j.
    """
    w = np.asarray(p, dtype=complex)
    proj = projector_field(d)
    steps = [np.array([h, 0]), np.array([1j * h, 0]),
             np.array([0, h]), np.array([0, 1j * h])]
    dp = [(proj(w + s) - proj(w - s)) / (2 * h) for s in steps]
    p0 = proj(w)
    fiber = mo.cohomology_frame(instanton_monad(d), p)
    bmat = fiber.basis
    comps = {}
    for mu in range(4):
        for nu in range(mu + 1, 4):
            f = p0 @ (dp[mu] @ dp[nu] - dp[nu] @ dp[mu]) @ p0
            comps[(mu, nu)] = bmat.conj().T @ f @ bmat
    return comps


def asd_defect_fd(a1, a2, b1, b2, p, h: float = 1e-4) -> float:
    """Anti-self-duality defect of the projection connection for raw data.

    Works for arbitrary quadruples (no ADHM equations assumed): the fiber is
    the SVD null space of the stacked constraints, the curvature comes from
    finite differences of its orthogonal projector, and the defect sums the
    three anti-self-duality relations in real components.  Valid data give
    FD-level residuals; data violating the equations give order-one defects.
    """
    def alpha(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (4, 1), dtype=complex)
        out[..., 0, 0] = w[..., 0]
        out[..., 1, 0] = w[..., 1]
        out[..., 2, 0] = a1
        out[..., 3, 0] = a2
        return out

    def beta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (1, 4), dtype=complex)
        out[..., 0, 0] = -w[..., 1]
        out[..., 0, 1] = w[..., 0]
        out[..., 0, 2] = b1
        out[..., 0, 3] = b2
        return out

    def proj(w):
        k = np.concatenate([beta(w), np.swapaxes(alpha(w).conj(), -1, -2)],
                           axis=-2)
        _, _, vh = np.linalg.svd(k)
        b0 = np.swapaxes(vh.conj(), -1, -2)[..., :, 2:]
        return b0 @ np.swapaxes(b0.conj(), -1, -2)

    w = np.asarray(p, dtype=complex)
    steps = [np.array([h, 0]), np.array([1j * h, 0]),
             np.array([0, h]), np.array([0, 1j * h])]
    dp = [(proj(w + s) - proj(w - s)) / (2 * h) for s in steps]
    p0 = proj(w)
    comps = {}
    for m in range(4):
        for n in range(m + 1, 4):
            comps[(m, n)] = p0 @ (dp[m] @ dp[n] - dp[n] @ dp[m]) @ p0
    return float(np.linalg.norm(comps[(0, 1)] + comps[(2, 3)])
                 + np.linalg.norm(comps[(0, 2)] - comps[(1, 3)])
                 + np.linalg.norm(comps[(0, 3)] + comps[(1, 2)]))


def curvature_density(d: ADHMData, points: np.ndarray) -> np.ndarray:
    """|F|^2 at an array of points (..., 2), via the batched curvature engine."""
    spec = instanton_monad(d)
    data = mo.curvature_batch(spec, np.asarray(points, dtype=complex))
    return data["norm_form"] ** 2


def charge(d: ADHMData, r_cut: float = 20.0, n_radial: int = 12,
           n_angular: int = 10) -> dict:
    """Instanton charge (1 / 8 pi^2) * integral of |F|^2 over |p| <= r_cut.

    Dyadic radial panels with Gauss-Legendre nodes, tensor angular rule on S^3
    (Gauss-Legendre in the polar angle, trapezoid in both phases).  Records an
    analytic O(r_cut^{-4}) tail estimate from the charge-1 profile.
    """
    if d.degenerate:
        return {"charge": 0.0, "tail": 0.0, "tail_ok": True}
    scale = curvature_scale(d)
    edges = [0.0]
    lo = min(0.25 * scale, r_cut / 2)
    edges.append(lo)
    while edges[-1] < r_cut:
        edges.append(min(2 * edges[-1], r_cut))
    xs, ws = np.polynomial.legendre.leggauss(n_radial)
    nu_x, nu_w = np.polynomial.legendre.leggauss(n_angular)
    nu = 0.25 * np.pi * (nu_x + 1.0)
    nu_w = nu_w * 0.25 * np.pi
    phis = np.arange(n_angular) * 2 * np.pi / n_angular
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        rr = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
        rw = 0.5 * (hi - lo) * ws
        # (x, y) = r (cos nu e^{i p1}, sin nu e^{i p2}); dV = r^3 cos nu sin nu dr dnu dp1 dp2
        r_g, nu_g, p1_g, p2_g = np.meshgrid(rr, nu, phis, phis, indexing="ij")
        pts = np.stack([r_g * np.cos(nu_g) * np.exp(1j * p1_g),
                        r_g * np.sin(nu_g) * np.exp(1j * p2_g)], axis=-1)
        dens = curvature_density(d, pts)
        wgt = (r_g**3 * np.cos(nu_g) * np.sin(nu_g)
               * rw[:, None, None, None] * nu_w[None, :, None, None]
               * (2 * np.pi / n_angular) ** 2)
        total += float(np.sum(dens * wgt))
    tail = 3.0 * (scale / r_cut) ** 4
    return {"charge": total / (8 * np.pi**2), "tail": tail,
            "tail_ok": bool(tail <= 0.05)}


def curvature_scale(d: ADHMData) -> float:
    """The length scale sqrt(|a1|^2 + |a2|^2) of the instanton bump."""
    return float(np.sqrt(abs(d.a1) ** 2 + abs(d.a2) ** 2))


def _canonical_sign(c: complex) -> complex:
    """Pick the Z_2 representative with Re > 0 (Im >= 0 on the boundary)."""
    c = complex(c.real + 0.0, c.imag + 0.0)  # normalise -0.0
    if c.real > 0 or (c.real == 0 and c.imag >= 0):
        return c
    return complex(-c.real + 0.0, -c.imag + 0.0)


def framed_moduli_point(d: ADHMData) -> FramedModuliPoint:
    """U(1)-normal form with a1 rotated real >= 0 (a2 used when a1 = 0).

    On the sub-family U(1).(c, 0, 0, c) the C^2/Z_2 label (c, 0) mod +- is
    recovered from the invariant a1 b2 = c^2.
    """
    if d.degenerate:
        return FramedModuliPoint(normal_form=(0j, 0j, 0j, 0j), z2_label=0j,
                                 cone_point=True)
    if not is_valid(d, tol=1e-9):
        raise ValueError(f"ADHM equations violated: residuals {adhm_residual(d)}")
    anchor = d.a1 if abs(d.a1) > 0 else d.a2
    theta = -np.angle(anchor)
    nf = d.rotated(theta)
    label = None
    if abs(d.a2) <= 1e-12 * abs(d.a1) and abs(d.b1) <= 1e-12 * abs(d.b2):
        label = _canonical_sign(complex(np.sqrt(d.a1 * d.b2)))
    return FramedModuliPoint(
        normal_form=(complex(nf.a1), complex(nf.a2), complex(nf.b1), complex(nf.b2)),
        z2_label=label,
    )
