"""Generic monad machinery.

A monad is a two-step complex of trivial Hermitian bundles over C^n

    C^{k0} --alpha--> C^{k1} --beta--> C^{k2},     beta(p) alpha(p) = 0,

with alpha fiberwise injective and beta fiberwise surjective away from a
singular locus.  Its cohomology bundle E (rank r = k1 - k0 - k2) is realised
fiberwise as V_p = ker beta(p) ∩ ker alpha^dag(p) inside C^{k1}, and carries
the metric and connection induced from h1.

The curvature of the induced connection, evaluated on harmonic representatives
s, s' in V_p, is

    <F_E s, s'> = <F_{E1} s, s'> - <(beta beta^dag)^{-1} (grad beta) s, (grad beta) s'>
                                 - <(alpha^dag alpha)^{-1} (grad alpha^dag) s, (grad alpha^dag) s'>

where grad alpha^dag = dbar(alpha^dag) is a (0,1)-form, grad beta =
(dbar beta^dag)^dag is a (1,0)-form, and F_{E1} is the Chern curvature of h1.
All pairings and adjoints follow the conventions of :mod:`hymkit.geometry`.

Everything here accepts a single point (shape (n,)) or a batch (..., n); the
batched paths are used by the sampling-heavy diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Point3, Form11, coords, fd_derivative, fd_mixed_second

__all__ = [
    "MetricField",
    "DiagPowerMetric",
    "constant_metric",
    "MonadSpec",
    "ValidityReport",
    "SingularPointError",
    "CohomFiber",
    "CurvatureReport",
    "validate_monad",
    "cohomology_frame",
    "frame_batch",
    "induced_metric",
    "curvature",
    "curvature_batch",
    "curvature_fd_check",
    "form_norm_sq",
]

SINGULAR_TOL = 1e-8


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class DiagPowerMetric:
    """Diagonal metric with entries  c_i (1+|w|^2)^a_i |w|^(2 b_i) |z|^(2 g_i).

    |w|^2 is the full squared norm of the base point and z its last
    coordinate.  Covers every bundled monad (constant, conical and the
    nonstandard diagonal weights) with closed-form first and mixed second
    derivatives.
    """

    consts: tuple
    pow_rho: tuple
    pow_r2: tuple = None
    pow_z2: tuple = None

    def __post_init__(self):
        k = len(self.consts)
        object.__setattr__(self, "consts", tuple(float(c) for c in self.consts))
        object.__setattr__(self, "pow_rho", tuple(float(a) for a in self.pow_rho))
        pr = self.pow_r2 if self.pow_r2 is not None else (0.0,) * k
        pz = self.pow_z2 if self.pow_z2 is not None else (0.0,) * k
        object.__setattr__(self, "pow_r2", tuple(float(a) for a in pr))
        object.__setattr__(self, "pow_z2", tuple(float(a) for a in pz))
        if not (len(self.pow_rho) == len(self.pow_r2) == len(self.pow_z2) == k):
            raise ValueError("exponent tuples must match the number of entries")

    @property
    def dim(self) -> int:
        return len(self.consts)

    def _entries(self, w: np.ndarray):
        rho = 1.0 + np.sum(np.abs(w) ** 2, axis=-1)
        r2 = np.sum(np.abs(w) ** 2, axis=-1)
        z2 = np.abs(w[..., -1]) ** 2
        c = np.asarray(self.consts)
        a = np.asarray(self.pow_rho)
        b = np.asarray(self.pow_r2)
        g = np.asarray(self.pow_z2)
        vals = (c * rho[..., None] ** a
                * np.where(b != 0.0, r2[..., None], 1.0) ** b
                * np.where(g != 0.0, z2[..., None], 1.0) ** g)
        return vals, rho, r2, z2

    def value(self, w: np.ndarray) -> np.ndarray:
        vals, *_ = self._entries(np.asarray(w, dtype=complex))
        k = self.dim
        out = np.zeros(vals.shape[:-1] + (k, k), dtype=complex)
        idx = np.arange(k)
        out[..., idx, idx] = vals
        return out

    def _dlog(self, w: np.ndarray, rho, r2, z2):
        """d_{w_j} log(entry_i) -> (..., n, k)."""
        n = w.shape[-1]
        k = self.dim
        wb = w.conj()
        dlog = np.zeros(w.shape[:-1] + (n, k), dtype=complex)
        a = np.asarray(self.pow_rho)
        b = np.asarray(self.pow_r2)
        g = np.asarray(self.pow_z2)
        for j in range(n):
            term = a * (wb[..., j] / rho)[..., None]
            if np.any(b != 0.0):
                term = term + b * (wb[..., j] / r2)[..., None]
            dlog[..., j, :] = term
        if np.any(g != 0.0):
            dlog[..., n - 1, :] += g * (1.0 / w[..., -1])[..., None]
        return dlog

    def dholo(self, w: np.ndarray) -> np.ndarray:
        """d_{w_j} h -> (..., n, k, k)."""
        w = np.asarray(w, dtype=complex)
        vals, rho, r2, z2 = self._entries(w)
        dlog = self._dlog(w, rho, r2, z2)
        k = self.dim
        n = w.shape[-1]
        out = np.zeros(w.shape[:-1] + (n, k, k), dtype=complex)
        idx = np.arange(k)
        out[..., idx, idx] = vals[..., None, :] * dlog
        return out

    def dmixed(self, w: np.ndarray) -> np.ndarray:
        """d_{w_j} d_{wbar_k} h -> (..., n, n, k, k)."""
        w = np.asarray(w, dtype=complex)
        vals, rho, r2, z2 = self._entries(w)
        dlog = self._dlog(w, rho, r2, z2)  # (..., n, k)
        n = w.shape[-1]
        k = self.dim
        a = np.asarray(self.pow_rho)
        b = np.asarray(self.pow_r2)
        # d_{wbar_k} d_{w_j} log(entry): a*(delta_{jk}/rho - wb_j w_k / rho^2)
        #                              + b*(delta_{jk}/r2  - wb_j w_k / r2^2);
        # the |z|^2 factor is log-pluriharmonic away from z = 0.
        wb = w.conj()
        ddlog = np.zeros(w.shape[:-1] + (n, n, k), dtype=complex)
        for j in range(n):
            for kk in range(n):
                delta = 1.0 if j == kk else 0.0
                term = a * ((delta / rho) - wb[..., j] * w[..., kk] / rho**2)[..., None]
                if np.any(b != 0.0):
                    term = term + b * ((delta / r2) - wb[..., j] * w[..., kk] / r2**2)[..., None]
                ddlog[..., j, kk, :] = term
        # d_j d_kbar h = h * (ddlog + dlog_j * conj(dlog_k))   [entries are real]
        prod = dlog[..., :, None, :] * dlog.conj()[..., None, :, :]
        out = np.zeros(w.shape[:-1] + (n, n, k, k), dtype=complex)
        idx = np.arange(k)
        out[..., idx, idx] = (vals[..., None, None, :] * (ddlog + prod))
        return out


@dataclass(frozen=True)
class MetricField:
    """Callable metric with optional analytic derivatives.

    ``value(w) -> (..., k, k)`` is required.  ``dholo(w) -> (..., n, k, k)``
    and ``dmixed(w) -> (..., n, n, k, k)`` fall back to finite differences in
    the engine when absent.
    """

    value: Callable
    dholo: Optional[Callable] = None
    dmixed: Optional[Callable] = None


def constant_metric(m: np.ndarray) -> MetricField:
    m = np.asarray(m, dtype=complex)
    k, n_ = m.shape

    def value(w):
        w = np.asarray(w)
        return np.broadcast_to(m, w.shape[:-1] + m.shape).copy()

    def dholo(w):
        w = np.asarray(w)
        return np.zeros(w.shape[:-1] + (w.shape[-1],) + m.shape, dtype=complex)

    def dmixed(w):
        w = np.asarray(w)
        n = w.shape[-1]
        return np.zeros(w.shape[:-1] + (n, n) + m.shape, dtype=complex)

    return MetricField(value=value, dholo=dholo, dmixed=dmixed)


def _metric_value(metric, w):
    if isinstance(metric, DiagPowerMetric):
        return metric.value(w)
    return np.asarray(metric.value(w), dtype=complex)


def _metric_dholo(metric, w, fd_step):
    if isinstance(metric, DiagPowerMetric):
        return metric.dholo(w)
    if metric.dholo is not None:
        return np.asarray(metric.dholo(w), dtype=complex)
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    ds = [fd_derivative(metric.value, w, j, "holo", fd_step) for j in range(n)]
    return np.stack(ds, axis=0)


def _metric_dmixed(metric, w, fd_step):
    if isinstance(metric, DiagPowerMetric):
        return metric.dmixed(w)
    if metric.dmixed is not None:
        return np.asarray(metric.dmixed(w), dtype=complex)
    w = np.asarray(w, dtype=complex)
    n = w.shape[-1]
    k = _metric_value(metric, w).shape[-1]
    out = np.zeros((n, n, k, k), dtype=complex)
    for j in range(n):
        for kk in range(n):
            out[j, kk] = fd_mixed_second(metric.value, w, j, kk, fd_step)
    return out


# ---------------------------------------------------------------------------
# monad specification


@dataclass(frozen=True)
class MonadSpec:
    """A monad over C^n with metrics on all three bundles.

    ``alpha(w) -> (..., k1, k0)`` and ``beta(w) -> (..., k2, k1)`` must accept
    batched coordinates.  ``dalpha``/``dbeta`` give the holomorphic coordinate
    derivatives stacked along a leading axis, shape (..., n, k1, k0) resp.
    (..., n, k2, k1); when None the engine uses centered finite differences.
    """

    name: str
    n: int
    k0: int
    k1: int
    k2: int
    alpha: Callable
    beta: Callable
    h0: object
    h1: object
    h2: object
    dalpha: Optional[Callable] = None
    dbeta: Optional[Callable] = None
    fd_step: float = 1e-5

    @property
    def rank(self) -> int:
        return self.k1 - self.k0 - self.k2

    def point(self, p) -> np.ndarray:
        return coords(p, self.n)


class SingularPointError(ValueError):
    """Raised at points where the monad degenerates; carries diagnostics."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class ValidityReport:
    point: np.ndarray
    sigma_min_alpha: float
    sigma_min_beta_dag: float
    beta_alpha_residual: float
    alpha_injective: bool
    beta_surjective: bool

    @property
    def regular(self) -> bool:
        return self.alpha_injective and self.beta_surjective


@dataclass(frozen=True)
class CohomFiber:
    """Orthonormal (w.r.t. h1) basis of V_p = ker beta ∩ ker alpha^dag."""

    point: np.ndarray
    basis: np.ndarray      # (k1, r), columns h1-orthonormal
    projector: np.ndarray  # (k1, k1), h1-orthogonal projector onto V_p
    h1: np.ndarray

    @property
    def rank(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class CurvatureReport:
    point: np.ndarray
    fiber: CohomFiber
    form: Form11           # i F_E as a Hermitian Form11: lambda_contract(form) = mean
    mean: np.ndarray       # (r, r) Hermitian, i Lambda F in the fiber basis
    norm_form: float       # real-component Frobenius norm of F
    norm_mean: float       # spectral norm of i Lambda F


# ---------------------------------------------------------------------------
# pointwise maps


def _alpha_dag(spec, w, h0, h1):
    """alpha^dag = h0^{-1} conj(alpha)^t h1, batched."""
    a = np.asarray(spec.alpha(w), dtype=complex)
    at = np.swapaxes(a.conj(), -1, -2)
    return np.linalg.solve(h0, at @ h1) if spec.k0 > 0 else at @ h1


def _beta_dag(spec, w, h1, h2):
    b = np.asarray(spec.beta(w), dtype=complex)
    bt = np.swapaxes(b.conj(), -1, -2)
    return np.linalg.solve(h1, bt @ h2)


def _dalpha(spec, w):
    if spec.dalpha is not None:
        return np.asarray(spec.dalpha(w), dtype=complex)
    n = spec.n
    w1 = np.asarray(w, dtype=complex)
    if w1.ndim == 1:
        return np.stack([fd_derivative(spec.alpha, w1, j, "holo", spec.fd_step)
                         for j in range(n)], axis=0)
    flat = w1.reshape(-1, n)
    outs = np.stack([
        np.stack([fd_derivative(spec.alpha, q, j, "holo", spec.fd_step) for j in range(n)], axis=0)
        for q in flat
    ])
    return outs.reshape(w1.shape[:-1] + outs.shape[1:])


def _dbeta(spec, w):
    if spec.dbeta is not None:
        return np.asarray(spec.dbeta(w), dtype=complex)
    n = spec.n
    w1 = np.asarray(w, dtype=complex)
    if w1.ndim == 1:
        return np.stack([fd_derivative(spec.beta, w1, j, "holo", spec.fd_step)
                         for j in range(n)], axis=0)
    flat = w1.reshape(-1, n)
    outs = np.stack([
        np.stack([fd_derivative(spec.beta, q, j, "holo", spec.fd_step) for j in range(n)], axis=0)
        for q in flat
    ])
    return outs.reshape(w1.shape[:-1] + outs.shape[1:])


def _grad_alpha_dag(spec, w, h0, h1, dh0, dh1):
    """(0,1)-form dbar(alpha^dag), components along dwbar_j: (..., n, k0, k1).

    dbar_j (h0^{-1} abar^t h1) = -h0^{-1}(dbar_j h0)h0^{-1} abar^t h1
        + h0^{-1} conj(d_j alpha)^t h1 + h0^{-1} abar^t (dbar_j h1),
    with dbar_j h = (d_j h)^dag for Hermitian h.
    """
    a = np.asarray(spec.alpha(w), dtype=complex)
    at = np.swapaxes(a.conj(), -1, -2)
    da = _dalpha(spec, w)                      # (..., n, k1, k0)
    dat = np.swapaxes(da.conj(), -1, -2)       # conj(d_j alpha)^t
    dh0_bar = np.swapaxes(dh0.conj(), -1, -2)  # dbar_j h0
    dh1_bar = np.swapaxes(dh1.conj(), -1, -2)
    h0i = np.linalg.inv(h0)
    term1 = -np.einsum("...ab,...jbc,...cd,...de,...ef->...jaf",
                       h0i, dh0_bar, h0i, at, h1)
    term2 = np.einsum("...ab,...jbc,...cd->...jad", h0i, dat, h1)
    term3 = np.einsum("...ab,...bc,...jcd->...jad", h0i, at, dh1_bar)
    return term1 + term2 + term3


def _grad_beta(spec, w, h1, h2, dh1, dh2):
    """(1,0)-form (dbar beta^dag)^dag, components along dw_j: (..., n, k2, k1)."""
    b = np.asarray(spec.beta(w), dtype=complex)
    bt = np.swapaxes(b.conj(), -1, -2)
    db = _dbeta(spec, w)
    dbt = np.swapaxes(db.conj(), -1, -2)
    dh1_bar = np.swapaxes(dh1.conj(), -1, -2)
    dh2_bar = np.swapaxes(dh2.conj(), -1, -2)
    h1i = np.linalg.inv(h1)
    h2i = np.linalg.inv(h2)
    dbar_bdag = (-np.einsum("...ab,...jbc,...cd,...de,...ef->...jaf",
                            h1i, dh1_bar, h1i, bt, h2)
                 + np.einsum("...ab,...jbc,...cd->...jad", h1i, dbt, h2)
                 + np.einsum("...ab,...bc,...jcd->...jad", h1i, bt, dh2_bar))
    # adjoint per component: h2^{-1} conj(X)^t h1
    xt = np.swapaxes(dbar_bdag.conj(), -1, -2)
    return np.einsum("...ab,...jbc,...cd->...jad", h2i, xt, h1)


def _chern_f1(spec, w, h1, dh1, ddh1):
    """Raw Chern curvature of h1: F[j,k] = -dbar_k(h1^{-1} d_j h1), (..., n,n,k1,k1)."""
    h1i = np.linalg.inv(h1)
    dh1_bar = np.swapaxes(dh1.conj(), -1, -2)
    # -h1^{-1} [ d_j d_kbar h1 - (dbar_k h1) h1^{-1} (d_j h1) ]
    corr = np.einsum("...kab,...bc,...jcd->...jkad", dh1_bar, h1i, dh1)
    return -np.einsum("...ab,...jkbc->...jkac", h1i, ddh1 - corr)


def _pieces(spec, w):
    """All pointwise ingredients needed by the curvature formula."""
    h0 = _metric_value(spec.h0, w)
    h1 = _metric_value(spec.h1, w)
    h2 = _metric_value(spec.h2, w)
    dh0 = _metric_dholo(spec.h0, w, spec.fd_step)
    dh1 = _metric_dholo(spec.h1, w, spec.fd_step)
    dh2 = _metric_dholo(spec.h2, w, spec.fd_step)
    ddh1 = _metric_dmixed(spec.h1, w, spec.fd_step)
    out = {
        "h0": h0, "h1": h1, "h2": h2,
        "beta": np.asarray(spec.beta(w), dtype=complex),
        "beta_dag": _beta_dag(spec, w, h1, h2),
        "grad_beta": _grad_beta(spec, w, h1, h2, dh1, dh2),
        "f1": _chern_f1(spec, w, h1, dh1, ddh1),
    }
    if spec.k0 > 0:
        out["alpha"] = np.asarray(spec.alpha(w), dtype=complex)
        out["alpha_dag"] = _alpha_dag(spec, w, h0, h1)
        out["grad_alpha_dag"] = _grad_alpha_dag(spec, w, h0, h1, dh0, dh1)
    return out


# ---------------------------------------------------------------------------
# validity and fibers


def validate_monad(spec: MonadSpec, p) -> ValidityReport:
    """Check fiberwise injectivity/surjectivity and the complex identity at p.

    Singular values are measured in the h-metrics (via Cholesky congruence),
    so the report is basis-independent.
    """
    w = spec.point(p)
    h0 = _metric_value(spec.h0, w)
    h1 = _metric_value(spec.h1, w)
    h2 = _metric_value(spec.h2, w)
    a = np.asarray(spec.alpha(w), dtype=complex)
    b = np.asarray(spec.beta(w), dtype=complex)
    l0 = np.linalg.cholesky(h0) if spec.k0 > 0 else None
    l1 = np.linalg.cholesky(h1)
    l2 = np.linalg.cholesky(h2)
    if spec.k0 > 0:
        a_std = l1.conj().T @ a @ np.linalg.inv(l0.conj().T)
        smin_a = float(np.linalg.svd(a_std, compute_uv=False).min())
        res = float(np.abs(b @ a).max())
    else:
        smin_a = np.inf
        res = 0.0
    b_std = l2.conj().T @ b @ np.linalg.inv(l1.conj().T)
    smin_b = float(np.linalg.svd(b_std, compute_uv=False).min())
    return ValidityReport(
        point=w,
        sigma_min_alpha=smin_a,
        sigma_min_beta_dag=smin_b,
        beta_alpha_residual=res,
        alpha_injective=bool(smin_a > SINGULAR_TOL),
        beta_surjective=bool(smin_b > SINGULAR_TOL),
    )


def _projector(spec, w, h0, h1, h2):
    """h1-orthogonal projector onto ker beta ∩ ker alpha^dag, batched."""
    k1 = spec.k1
    eye = np.broadcast_to(np.eye(k1, dtype=complex),
                          np.asarray(w).shape[:-1] + (k1, k1))
    b = np.asarray(spec.beta(w), dtype=complex)
    bd = _beta_dag(spec, w, h1, h2)
    bbd = b @ bd
    p = eye - bd @ np.linalg.solve(bbd, b)
    if spec.k0 > 0:
        a = np.asarray(spec.alpha(w), dtype=complex)
        ad = _alpha_dag(spec, w, h0, h1)
        ada = ad @ a
        p = p - a @ np.linalg.solve(ada, ad)
    return p


def cohomology_frame(spec: MonadSpec, p) -> CohomFiber:
    """Deterministic h1-orthonormal basis of the cohomology fiber at p.

    Seeds are the projections of the standard basis vectors e_1..e_{k1}
    (in index order) onto V_p, orthogonalised by modified Gram-Schmidt in the
    h1 inner product; vectors whose residual norm drops below a relative
    threshold are discarded.
    """
    rep = validate_monad(spec, p)
    if not rep.regular:
        raise SingularPointError(
            f"{spec.name}: singular point (sigma_min alpha={rep.sigma_min_alpha:.3e}, "
            f"beta^dag={rep.sigma_min_beta_dag:.3e})", report=rep)
    w = spec.point(p)
    h0 = _metric_value(spec.h0, w)
    h1 = _metric_value(spec.h1, w)
    h2 = _metric_value(spec.h2, w)
    proj = _projector(spec, w, h0, h1, h2)
    r = spec.rank
    basis = []
    for i in range(spec.k1):
        v = proj[:, i].copy()
        for u in basis:
            v -= u * (u.conj() @ h1 @ v)
        nrm = np.sqrt(np.real(v.conj() @ h1 @ v))
        if nrm > 1e-7:
            basis.append(v / nrm)
        if len(basis) == r:
            break
    if len(basis) != r:
        raise SingularPointError(f"{spec.name}: fiber rank deficient at {w}", report=rep)
    return CohomFiber(point=w, basis=np.stack(basis, axis=1), projector=proj, h1=h1)


def frame_batch(spec: MonadSpec, W: np.ndarray) -> np.ndarray:
    """Batched h1-orthonormal fiber bases, (..., k1, r).

    Built from the SVD null space of the stacked constraints [beta; alpha^dag]
    followed by an h1-Gram square root; unlike :func:`cohomology_frame` the
    basis choice is not normative, so use it only for gauge-invariant
    quantities.
    """
    w = np.asarray(W, dtype=complex)
    h0 = _metric_value(spec.h0, w)
    h1 = _metric_value(spec.h1, w)
    h2 = _metric_value(spec.h2, w)
    b = np.asarray(spec.beta(w), dtype=complex)
    rows = [b]
    if spec.k0 > 0:
        rows.append(_alpha_dag(spec, w, h0, h1))
    k = np.concatenate(rows, axis=-2)
    _, _, vh = np.linalg.svd(k)
    b0 = np.swapaxes(vh.conj(), -1, -2)[..., :, spec.k0 + spec.k2:]
    gram = np.swapaxes(b0.conj(), -1, -2) @ h1 @ b0
    evals, evecs = np.linalg.eigh(gram)
    inv_sqrt = evecs @ (evals[..., None] ** -0.5 * np.swapaxes(evecs.conj(), -1, -2))
    return b0 @ inv_sqrt


def induced_metric(spec: MonadSpec, p, sections) -> np.ndarray:
    """Gram matrix of ker-beta representatives after projecting off Im alpha.

    ``sections`` is a list of k1-vectors (or an array (..., k1, m) of columns)
    annihilated by beta at p.  Returns G[a, b] = <s'_a, s'_b>_{h1} with
    s' = s - alpha (alpha^dag alpha)^{-1} alpha^dag s.
    """
    w = spec.point(p)
    if isinstance(sections, (list, tuple)):
        s = np.stack([np.asarray(v, dtype=complex) for v in sections], axis=-1)
    else:
        s = np.asarray(sections, dtype=complex)
    h1 = _metric_value(spec.h1, w)
    b = np.asarray(spec.beta(w), dtype=complex)
    res = np.abs(b @ s)
    scale = max(float(np.abs(s).max()) * max(float(np.abs(b).max()), 1.0), 1e-30)
    if res.max() > 1e-10 * scale:
        raise ValueError(f"section not in ker beta: residual {res.max():.3e}")
    if spec.k0 > 0:
        h0 = _metric_value(spec.h0, w)
        a = np.asarray(spec.alpha(w), dtype=complex)
        ad = _alpha_dag(spec, w, h0, h1)
        s = s - a @ np.linalg.solve(ad @ a, ad @ s)
    return np.swapaxes(s.conj(), -1, -2) @ h1 @ s


# ---------------------------------------------------------------------------
# curvature


def _ambient_forms(spec, w):
    """Sesquilinear-form matrices N[j,k] with <F s, s'> = s'^dag N[j,k] s.

    Restricted to V_p these are the raw dw_j ^ dwbar_k coefficients of the
    induced curvature paired against h-metrics:

        N[j,k] = h1 F1[j,k]
                 - conj(grad_beta_k)^t h2 (beta beta^dag)^{-1} grad_beta_j
                 + conj(grad_adag_j)^t h0 (alpha^dag alpha)^{-1} grad_adag_k.
    """
    pc = _pieces(spec, w)
    h1, h2 = pc["h1"], pc["h2"]
    f1 = pc["f1"]
    n = spec.n
    term1 = np.einsum("...ab,...jkbc->...jkac", h1, f1)
    gb = pc["grad_beta"]                       # (..., n, k2, k1)
    bbd = pc["beta"] @ pc["beta_dag"]
    bbd_inv = np.linalg.inv(bbd)
    gbc = np.swapaxes(gb.conj(), -1, -2)       # (..., n, k1, k2)
    mid = np.einsum("...ab,...bc,...jcd->...jad", h2, bbd_inv, gb)
    term2 = np.einsum("...kab,...jbc->...jkac", gbc, mid)
    out = term1 - term2
    if spec.k0 > 0:
        ga = pc["grad_alpha_dag"]              # (..., n, k0, k1)
        ada = pc["alpha_dag"] @ pc["alpha"]
        ada_inv = np.linalg.inv(ada)
        gac = np.swapaxes(ga.conj(), -1, -2)
        h0 = pc["h0"]
        mid3 = np.einsum("...ab,...bc,...kcd->...kad", h0, ada_inv, ga)
        term3 = np.einsum("...jab,...kbc->...jkac", gac, mid3)
        out = out + term3
    return out


def _restrict(nforms, basis):
    """Project ambient form matrices to the fiber basis: B^dag N B."""
    bd = np.swapaxes(basis.conj(), -1, -2)
    return np.einsum("...ab,...jkbc,...cd->...jkad", bd, nforms, basis)


def form_norm_sq(f_raw: np.ndarray, n: int) -> np.ndarray:
    """Squared norm of a (1,1)-form from its raw coefficients A[j,k].

    Sums squared Frobenius norms of the real 2-form components over all pairs
    of the 2n real coordinates:
        sum_{a<b} 2|A_ab - A_ba|^2 + sum_{a != b} |A_ab + A_ba|^2 + 4 sum_a |A_aa|^2.
    This matches the standard curvature density (an ADHM one-instanton
    integrates to one unit of charge).
    """
    def fro2(m):
        return np.real(np.einsum("...ab,...ab->...", m, m.conj()))

    total = 0.0
    for a in range(n):
        total = total + 4.0 * fro2(f_raw[..., a, a, :, :])
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            s = f_raw[..., a, b, :, :] + f_raw[..., b, a, :, :]
            total = total + fro2(s)
            if a < b:
                d = f_raw[..., a, b, :, :] - f_raw[..., b, a, :, :]
                total = total + 2.0 * fro2(d)
    return total


def curvature(spec: MonadSpec, p, fiber: CohomFiber | None = None) -> CurvatureReport:
    """Curvature of the induced connection at a regular point p.

    The report carries i F_E in the orthonormal fiber basis as a Hermitian
    Form11 (its Lambda-contraction is the mean curvature), the mean
    curvature i Lambda F as an r x r Hermitian matrix, and gauge-invariant
    norms.
    """
    if fiber is None:
        fiber = cohomology_frame(spec, p)
    w = fiber.point
    nf = _ambient_forms(spec, w)
    raw = _restrict(nf, fiber.basis)              # raw coefficients on dw^dwbar
    mean = 2.0 * np.einsum("jjab->ab", raw)       # i Lambda F
    mean = 0.5 * (mean + mean.conj().T)
    norm_mean = float(np.abs(np.linalg.eigvalsh(mean)).max()) if mean.size else 0.0
    norm_form = float(np.sqrt(form_norm_sq(raw, spec.n)))
    # i F = i sum raw[j,k] dw_j ^ dwbar_k, i.e. Form11 coefficients = raw
    return CurvatureReport(
        point=w,
        fiber=fiber,
        form=Form11(raw),
        mean=mean,
        norm_form=norm_form,
        norm_mean=norm_mean,
    )


def curvature_batch(spec: MonadSpec, W: np.ndarray) -> dict:
    """Batched gauge-invariant curvature data at regular points.

    Returns raw form coefficients (..., n, n, r, r) in per-point orthonormal
    bases together with |F| and the spectral norm of i Lambda F.
    """
    w = np.asarray(W, dtype=complex)
    basis = frame_batch(spec, w)
    nf = _ambient_forms(spec, w)
    raw = _restrict(nf, basis)
    mean = 2.0 * np.einsum("...jjab->...ab", raw)
    mean = 0.5 * (mean + np.swapaxes(mean.conj(), -1, -2))
    norm_mean = np.abs(np.linalg.eigvalsh(mean)).max(axis=-1)
    norm_form = np.sqrt(form_norm_sq(raw, spec.n))
    return {"basis": basis, "form_raw": raw, "mean": mean,
            "norm_mean": norm_mean, "norm_form": norm_form}


def curvature_fd_check(spec: MonadSpec, p, frame, h: float = 1e-3) -> float:
    """Relative gap between the curvature formula and its definition.

    ``frame`` maps coordinates to a (k1, m) column stack of holomorphic
    ker-beta representatives valid on the FD stencil around p.  The Chern
    curvature of the induced Gram metric, F = dbar(G^{-1} dG) computed by
    centered differences, is compared against :func:`curvature` transported
    into the same frame.  Returns the max relative entry error over all
    (j, k) components.
    """
    w = spec.point(p)
    n = spec.n

    def gram(q):
        return induced_metric(spec, q, frame(q))

    g0 = gram(w)
    g0_inv = np.linalg.inv(g0)

    def theta(q, j):
        # G^{-1} d_j G at q, via one more FD level
        gq = gram(q)
        dg = fd_derivative(gram, q, j, "holo", h)
        return np.linalg.inv(gq) @ dg

    fd_raw = np.empty((n, n) + g0.shape, dtype=complex)
    for j in range(n):
        for k in range(n):
            fd_raw[j, k] = -fd_derivative(lambda q, jj=j: theta(q, jj), w, k, "anti", h)

    rep = curvature(spec, w)
    fiber = rep.fiber
    # transport: columns of the frame expand in the orthonormal basis as T
    s = np.asarray(frame(w), dtype=complex)
    if spec.k0 > 0:
        h0 = _metric_value(spec.h0, w)
        h1v = _metric_value(spec.h1, w)
        a = np.asarray(spec.alpha(w), dtype=complex)
        ad = _alpha_dag(spec, w, h0, h1v)
        s = s - a @ np.linalg.solve(ad @ a, ad @ s)
    t = fiber.basis.conj().T @ fiber.h1 @ s
    t_inv = np.linalg.inv(t)
    raw = _restrict(_ambient_forms(spec, w), fiber.basis)
    engine_raw = np.einsum("ab,jkbc,cd->jkad", t_inv, raw, t)

    scale = max(float(np.abs(engine_raw).max()), 1e-14)
    return float(np.abs(fd_raw - engine_raw).max() / scale)
