"""The reflexive-sheaf monad family over C^3 and its diagnostics.

The central object is the monad

    C --(x, y, 1, 0)^t--> C^4 --(-y, x, 0, z)--> C

with the nonstandard diagonal weight
h1 = diag((1+|w|^2)^{-1/2}, (1+|w|^2)^{-1/2}, 1, 1) on the middle bundle.
Its cohomology is a rank-2 bundle away from the origin (the kernel sheaf of
(x, y, z): C^3 -> C), and the induced connection has mean curvature decaying
like the weight function :func:`curvature_weight`.

Also here: the twisted monad family near the z-axis, the Fueter map into the
framed one-instanton moduli space, the conical kernel monad whose weight
diag(1/|w|, 1/|w|, 1/|w|) makes the induced connection exactly
Hermitian-Yang-Mills, and sampling diagnostics for all the decay and
cancellation bounds used downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import adhm as adhm_mod
from . import monads as mo
from .geometry import coords

__all__ = [
    "ansatz_monad",
    "cone_monad",
    "flat_metric_cone_monad",
    "twisted_monad",
    "closed_form_ingredients",
    "curvature_weight",
    "mean_curvature_ratio",
    "mean_curvature_ratio_grad",
    "cancellation",
    "section_component_bound",
    "decay_slope",
    "profile_ratio",
    "asymptotic_frame",
    "chart_frame",
    "instanton_comparison",
    "fueter_map",
    "cone_hym_residual",
    "sample_log_uniform",
    "weight_ratio_sup",
]


# ---------------------------------------------------------------------------
# monad constructors


def _alpha_main(w):
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape[:-1] + (4, 1), dtype=complex)
    out[..., 0, 0] = w[..., 0]
    out[..., 1, 0] = w[..., 1]
    out[..., 2, 0] = 1.0
    return out


def _beta_main(w):
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape[:-1] + (1, 4), dtype=complex)
    out[..., 0, 0] = -w[..., 1]
    out[..., 0, 1] = w[..., 0]
    out[..., 0, 3] = w[..., 2]
    return out


def _dalpha_main(w):
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape[:-1] + (3, 4, 1), dtype=complex)
    out[..., 0, 0, 0] = 1.0
    out[..., 1, 1, 0] = 1.0
    return out


def _dbeta_main(w):
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape[:-1] + (3, 1, 4), dtype=complex)
    out[..., 0, 0, 1] = 1.0
    out[..., 1, 0, 0] = -1.0
    out[..., 2, 0, 3] = 1.0
    return out


def ansatz_monad() -> mo.MonadSpec:
    """The rank-2 reflexive family over C^3; singular only at the origin."""
    return mo.MonadSpec(
        name="ansatz",
        n=3, k0=1, k1=4, k2=1,
        alpha=_alpha_main, beta=_beta_main,
        h0=mo.constant_metric(np.eye(1)),
        h1=mo.DiagPowerMetric(consts=(1, 1, 1, 1), pow_rho=(-0.5, -0.5, 0, 0)),
        h2=mo.constant_metric(np.eye(1)),
        dalpha=_dalpha_main, dbeta=_dbeta_main,
    )


def cone_monad() -> mo.MonadSpec:
    """Kernel monad 0 -> C^3 --(x,y,z)--> C with weight |w|^{-1} I.

    The scale-invariant weight exactly cancels the Einstein constant of the
    underlying projective cotangent geometry: i Lambda F = 0 at every
    regular point.
    """

    def calpha(w):
        w = np.asarray(w, dtype=complex)
        return np.zeros(w.shape[:-1] + (3, 0), dtype=complex)

    def cbeta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (1, 3), dtype=complex)
        out[..., 0, :] = w
        return out

    def cdalpha(w):
        w = np.asarray(w, dtype=complex)
        return np.zeros(w.shape[:-1] + (3, 3, 0), dtype=complex)

    def cdbeta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (3, 1, 3), dtype=complex)
        for j in range(3):
            out[..., j, 0, j] = 1.0
        return out

    return mo.MonadSpec(
        name="cone",
        n=3, k0=0, k1=3, k2=1,
        alpha=calpha, beta=cbeta,
        h0=mo.constant_metric(np.zeros((0, 0))),
        h1=mo.DiagPowerMetric(consts=(1, 1, 1), pow_rho=(0, 0, 0),
                              pow_r2=(-0.5, -0.5, -0.5)),
        h2=mo.constant_metric(np.eye(1)),
        dalpha=cdalpha, dbeta=cdbeta,
    )


def flat_metric_cone_monad() -> mo.MonadSpec:
    """Negative control: same kernel monad with the constant metric."""
    cone = cone_monad()
    return mo.MonadSpec(
        name="cone-flat", n=3, k0=0, k1=3, k2=1,
        alpha=cone.alpha, beta=cone.beta,
        h0=cone.h0, h1=mo.constant_metric(np.eye(3)), h2=cone.h2,
        dalpha=cone.dalpha, dbeta=cone.dbeta,
    )


def twisted_monad(zeta: complex, root: complex | None = None) -> mo.MonadSpec:
    """U(1)-twisted monad adapted to the z-axis near (0, 0, zeta), |zeta| >= 1.

    Maps are (x, y, c, 0)^t and (-y, x, 0, c) with c = zeta^{1/2} (principal
    root unless given), and the middle metric is
    diag(1, 1, (1+|w|^2)^{1/2}/|zeta|, |zeta| (1+|w|^2)^{1/2}/|z|^2),
    defined for z != 0.
    """
    if abs(zeta) < 1.0:
        raise ValueError("twisted monad requires |zeta| >= 1")
    c = complex(np.sqrt(complex(zeta))) if root is None else complex(root)
    if abs(c * c - zeta) > 1e-9 * abs(zeta):
        raise ValueError("root is not a square root of zeta")
    az = abs(zeta)

    def alpha(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (4, 1), dtype=complex)
        out[..., 0, 0] = w[..., 0]
        out[..., 1, 0] = w[..., 1]
        out[..., 2, 0] = c
        return out

    def beta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (1, 4), dtype=complex)
        out[..., 0, 0] = -w[..., 1]
        out[..., 0, 1] = w[..., 0]
        out[..., 0, 3] = c
        return out

    def dalpha(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (3, 4, 1), dtype=complex)
        out[..., 0, 0, 0] = 1.0
        out[..., 1, 1, 0] = 1.0
        return out

    def dbeta(w):
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape[:-1] + (3, 1, 4), dtype=complex)
        out[..., 0, 0, 1] = 1.0
        out[..., 1, 0, 0] = -1.0
        return out

    h1 = mo.DiagPowerMetric(
        consts=(1.0, 1.0, 1.0 / az, az),
        pow_rho=(0, 0, 0.5, 0.5),
        pow_z2=(0, 0, 0, -1.0),
    )
    return mo.MonadSpec(
        name=f"twisted(zeta={zeta:.6g})",
        n=3, k0=1, k1=4, k2=1,
        alpha=alpha, beta=beta,
        h0=mo.constant_metric(np.eye(1)), h1=h1, h2=mo.constant_metric(np.eye(1)),
        dalpha=dalpha, dbeta=dbeta,
    )


# ---------------------------------------------------------------------------
# closed forms and weights


def closed_form_ingredients(p) -> dict:
    """Closed-form curvature ingredients of the main family at p.

    Returns alpha^dag alpha, beta beta^dag, the rows of grad alpha^dag per
    dwbar_j and of grad beta per dw_j, and the middle-bundle Chern term
    F1[j,k] = -dbar_k(h1^{-1} d_j h1).
    """
    w = coords(p, 3)
    x, y, z = w
    rho = 1.0 + np.sum(np.abs(w) ** 2)
    sig = abs(x) ** 2 + abs(y) ** 2
    q = rho ** -0.5
    ada = sig * q + 1.0
    bbd = sig / q + abs(z) ** 2

    grad_adag = np.zeros((3, 1, 4), dtype=complex)
    for j in range(3):
        grad_adag[j, 0, 0] = -np.conj(x) * w[j] / (2 * rho**1.5)
        grad_adag[j, 0, 1] = -np.conj(y) * w[j] / (2 * rho**1.5)
    grad_adag[0, 0, 0] += q
    grad_adag[1, 0, 1] += q

    grad_beta = np.zeros((3, 1, 4), dtype=complex)
    for j in range(3):
        grad_beta[j, 0, 0] = -y * np.conj(w[j]) / (2 * rho)
        grad_beta[j, 0, 1] = x * np.conj(w[j]) / (2 * rho)
    grad_beta[1, 0, 0] += -1.0
    grad_beta[0, 0, 1] += 1.0
    grad_beta[2, 0, 3] = 1.0

    f1 = np.zeros((3, 3, 4, 4), dtype=complex)
    for j in range(3):
        for k in range(3):
            cjk = 0.5 * ((1.0 if j == k else 0.0) / rho - np.conj(w[j]) * w[k] / rho**2)
            f1[j, k, 0, 0] = cjk
            f1[j, k, 1, 1] = cjk
    return {"ada": ada, "bbd": bbd, "grad_adag": grad_adag,
            "grad_beta": grad_beta, "f1": f1}


def curvature_weight(p) -> np.ndarray | float:
    """The decay weight bounding |i Lambda F|:

        1 / ((|x|^2 + |y|^2 + |z|) |w|)   for |w| >= 1,
        1 / |w|^2                          for |w| < 1,

    a fixed representative of its uniform-equivalence class (hard switch at
    |w| = 1).  Accepts a single point or an array (..., 3).
    """
    w = np.atleast_2d(np.asarray(p, dtype=complex)) if not hasattr(p, "as_array") \
        else np.atleast_2d(p.as_array())
    r2 = np.sum(np.abs(w) ** 2, axis=-1)
    if np.any(r2 == 0.0):
        raise ValueError("weight undefined at the origin")
    r = np.sqrt(r2)
    sig = np.abs(w[..., 0]) ** 2 + np.abs(w[..., 1]) ** 2
    outer = 1.0 / ((sig + np.abs(w[..., 2])) * r)
    inner = 1.0 / r2
    val = np.where(r >= 1.0, outer, inner)
    return float(val[0]) if val.size == 1 and np.asarray(p).ndim <= 1 else val


def cancellation(p):
    """The two sides of the inverse-factor cancellation inequality.

    lhs = (1+|w|^2)^{-1} (alpha^dag alpha)^{-1} - (beta beta^dag)^{-1},
    rhs = 1 / (beta beta^dag * sqrt(1+|w|^2));  |lhs| <= C rhs with a
    moderate constant uniformly on C^3 \\ {0}.
    """
    w = coords(p, 3)
    ing = closed_form_ingredients(w)
    rho = 1.0 + np.sum(np.abs(w) ** 2)
    lhs = 1.0 / (rho * ing["ada"]) - 1.0 / ing["bbd"]
    rhs = 1.0 / (ing["bbd"] * np.sqrt(rho))
    return float(np.real(lhs)), float(np.real(rhs))


# ---------------------------------------------------------------------------
# sampling helpers


def sample_log_uniform(rng: np.random.Generator, n: int, r_min: float,
                       r_max: float, dim: int = 3) -> np.ndarray:
    """n points of C^dim with log-uniform radius in [r_min, r_max]."""
    g = rng.standard_normal((n, 2 * dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = np.exp(rng.uniform(np.log(r_min), np.log(r_max), size=n))
    pts = g * r[:, None]
    return pts[:, :dim] + 1j * pts[:, dim:]


def weight_ratio_sup(n_points: int = 10_000, seed: int = 0,
                     r_min: float = 1e-2, r_max: float = 1e3) -> float:
    """sup of |i Lambda F| / weight over a log-uniform sample of radii."""
    rng = np.random.default_rng(seed)
    pts = sample_log_uniform(rng, n_points, r_min, r_max)
    spec = ansatz_monad()
    data = mo.curvature_batch(spec, pts)
    ell = curvature_weight(pts)
    return float(np.max(data["norm_mean"] / ell))


def mean_curvature_ratio(p, k: int = 0, fd_scale: float = 1e-2) -> float:
    """|grad^k (i Lambda F)| divided by its decay weight at p.

    k = 0 uses :func:`curvature_weight`; k = 1 uses the gradient weight
    |w|^{-1} (|x| + |y| + |z|^{1/2})^{-3} valid for |x| >= 1, with the
    covariant derivative evaluated in the dominant coordinate chart.
    """
    if k == 0:
        rep = mo.curvature(ansatz_monad(), p)
        return float(rep.norm_mean / curvature_weight(rep.point))
    if k != 1:
        raise ValueError("only k in {0, 1} is supported")
    return mean_curvature_ratio_grad(p, fd_scale=fd_scale)


def _chart_for(w):
    return "x" if abs(w[0]) >= abs(w[1]) else "y"


def chart_frame(chart: str):
    """Holomorphic ker-beta frame valid where the chart coordinate is nonzero.

    x-chart: (0,0,1,0), (0, -z/x, 0, 1);  y-chart: (0,0,1,0), (z/y, 0, 0, 1).
    """
    if chart not in ("x", "y"):
        raise ValueError("chart must be 'x' or 'y'")

    def frame(q):
        q = np.asarray(q, dtype=complex)
        s1 = np.array([0, 0, 1, 0], dtype=complex)
        if chart == "x":
            s2 = np.array([0, -q[2] / q[0], 0, 1], dtype=complex)
        else:
            s2 = np.array([q[2] / q[1], 0, 0, 1], dtype=complex)
        return np.stack([s1, s2], axis=1)

    return frame


def mean_curvature_ratio_grad(p, fd_scale: float = 1e-2) -> float:
    """|grad(i Lambda F)| / (|w|^{-1} (|x|+|y|+|z|^{1/2})^{-3}) at p, |x| >= 1.

    The endomorphism i Lambda F is expressed in the dominant chart frame; its
    covariant derivative is d M + [G^{-1} dG, M] with G the frame Gram, by
    centered differences with step proportional to the local regularity
    scale.  The reported norm sums the Gram-metric operator norms over the
    six real directions.
    """
    spec = ansatz_monad()
    w = coords(p, 3)
    if abs(w[0]) < 1.0 and abs(w[1]) < 1.0:
        raise ValueError("gradient weight is calibrated for max(|x|,|y|) >= 1")
    frame = chart_frame(_chart_for(w))
    reg_scale = abs(w[0]) + abs(w[1]) + np.sqrt(abs(w[2]))
    h = fd_scale * max(1.0, 0.2 * reg_scale)

    def mean_in_frame(q):
        fiber = mo.cohomology_frame(spec, q)
        rep = mo.curvature(spec, q, fiber)
        s = frame(q)
        h0 = mo._metric_value(spec.h0, q)
        h1v = fiber.h1
        a = spec.alpha(q)
        ad = mo._alpha_dag(spec, q, h0, h1v)
        sp = s - a @ np.linalg.solve(ad @ a, ad @ s)
        t = fiber.basis.conj().T @ h1v @ sp
        return np.linalg.inv(t) @ rep.mean @ t

    def gram(q):
        return mo.induced_metric(spec, q, frame(q))

    g0 = gram(w)
    g0_inv = np.linalg.inv(g0)
    m0 = mean_in_frame(w)
    total = 0.0
    evals, evecs = np.linalg.eigh(g0)
    g_half = evecs @ np.diag(np.sqrt(evals)) @ evecs.conj().T
    g_half_inv = evecs @ np.diag(evals ** -0.5) @ evecs.conj().T
    for j in range(3):
        for real_dir in (1.0, 1j):
            delta = np.zeros(3, dtype=complex)
            delta[j] = real_dir * h
            dm = (mean_in_frame(w + delta) - mean_in_frame(w - delta)) / (2 * h)
            dg = (gram(w + delta) - gram(w - delta)) / (2 * h)
            conn = g0_inv @ dg
            # connection form along a real direction: A_j dw_j + A_j^dag dwbar_j
            cov = dm + conn @ m0 - m0 @ conn
            cov_std = g_half @ cov @ g_half_inv
            total += np.linalg.norm(cov_std, 2) ** 2
    grad_norm = float(np.sqrt(total))
    r = float(np.sqrt(np.sum(np.abs(w) ** 2)))
    weight = (1.0 / r) * (abs(w[0]) + abs(w[1]) + np.sqrt(abs(w[2]))) ** -3.0
    return grad_norm / weight


def section_component_bound(p, samples: int = 64, seed: int = 0) -> float:
    """sup over random unit-norm fiber elements of the first-block ratio.

    Ratio: (|s_1| + |s_2|) / min(sqrt(|w|+1), (|w|+1)/(|x|+|y|)) for s of unit
    h-norm in the cohomology fiber.
    """
    spec = ansatz_monad()
    fiber = mo.cohomology_frame(spec, p)
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((samples, fiber.rank)) + 1j * rng.standard_normal((samples, fiber.rank))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    s = c @ fiber.basis.T  # (samples, k1)
    num = np.abs(s[:, 0]) + np.abs(s[:, 1])
    w = fiber.point
    r = np.sqrt(np.sum(np.abs(w) ** 2))
    sig1 = abs(w[0]) + abs(w[1])
    cap = np.sqrt(r + 1.0)
    if sig1 > 0:
        cap = min(cap, (r + 1.0) / sig1)
    return float(num.max() / cap)


def decay_slope(ray, r_values) -> dict:
    """Least-squares slope of log |F| against log r along a ray direction."""
    ray = np.asarray(ray, dtype=complex)
    ray = ray / np.sqrt(np.sum(np.abs(ray) ** 2))
    rs = np.asarray(r_values, dtype=float)
    pts = rs[:, None] * ray[None, :]
    data = mo.curvature_batch(ansatz_monad(), pts)
    logs = np.log(data["norm_form"])
    coeffs, res = np.polyfit(np.log(rs), logs, 1, full=False), None
    slope = float(coeffs[0])
    fit = np.polyval(coeffs, np.log(rs))
    resid = float(np.sqrt(np.mean((fit - logs) ** 2)))
    return {"slope": slope, "residual": resid, "norms": data["norm_form"]}


def profile_ratio(r_values) -> np.ndarray:
    """|F| along (t, t, 0)/sqrt(2)... divided by |w| / (|x|^2+|y|^2)^2."""
    rs = np.asarray(r_values, dtype=float)
    ray = np.array([1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    pts = rs[:, None] * ray[None, :]
    data = mo.curvature_batch(ansatz_monad(), pts)
    sig = np.abs(pts[:, 0]) ** 2 + np.abs(pts[:, 1]) ** 2
    prof = rs / sig**2
    return data["norm_form"] / prof


def asymptotic_frame(p, chart: str) -> dict:
    """Holomorphic chart frame with its Gram matrix and identity deviation.

    Returns the two sections, the induced Gram H0, the spectral deviation
    |H0 - I|, and the reference bound |w| / |chart coord|^2.
    """
    w = coords(p, 3)
    cc = w[0] if chart == "x" else w[1]
    if abs(cc) == 0:
        raise ValueError(f"chart coordinate {chart} vanishes at this point")
    frame = chart_frame(chart)
    s = frame(w)
    g = mo.induced_metric(ansatz_monad(), w, s)
    dev = float(np.linalg.norm(g - np.eye(2), 2))
    r = float(np.sqrt(np.sum(np.abs(w) ** 2)))
    return {"sections": s, "gram": g, "deviation": dev,
            "reference": r / abs(cc) ** 2}


# ---------------------------------------------------------------------------
# bubbling region


def instanton_comparison(zeta: complex, n_samples: int = 24, seed: int = 0) -> dict:
    """Scaled gap between the twisted family and its model instanton.

    Samples the disc |x| + |y| <= |zeta|^{1/2} on the slice z = zeta and
    compares gauge-invariant curvature data of the twisted monad against the
    instanton with parameters (zeta^{1/2}, 0, 0, zeta^{1/2}).  The instanton
    lives on the transverse C^2, so the comparison restricts both curvatures
    to the slice: per-component singular values over the (x, y) form block
    plus the mean-curvature norms.  (The mixed dz components of the twisted
    curvature carry the slow parameter variation along the axis and decay
    at the slower rate |z|^{-3/2}; they are reported separately.)
    Returns sup of the pointwise transverse gap times |zeta|^2.
    """
    if abs(zeta) < 100.0:
        raise ValueError("comparison region requires |zeta| >= 100")
    c = complex(np.sqrt(complex(zeta)))
    tw = twisted_monad(zeta, root=c)
    inst = adhm_mod.instanton_monad(adhm_mod.ADHMData(c, 0, 0, c))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n_samples, 4))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    rad = np.sqrt(abs(zeta)) * rng.random(n_samples) ** 0.25
    xy = (g[:, :2] + 1j * g[:, 2:]) * rad[:, None] / np.sqrt(2.0)
    pts3 = np.concatenate([xy, np.full((n_samples, 1), zeta, dtype=complex)], axis=1)
    d_tw = mo.curvature_batch(tw, pts3)
    d_in = mo.curvature_batch(inst, xy)
    gaps = np.zeros(n_samples)
    for j in range(2):
        for k in range(2):
            sv_t = np.linalg.svd(d_tw["form_raw"][:, j, k], compute_uv=False)
            sv_i = np.linalg.svd(d_in["form_raw"][:, j, k], compute_uv=False)
            gaps += np.abs(sv_t - sv_i).sum(axis=-1)
    gaps += np.abs(d_tw["norm_mean"] - d_in["norm_mean"])
    axial = np.zeros(n_samples)
    for j in range(3):
        for k in range(3):
            if j < 2 and k < 2:
                continue
            sv_t = np.linalg.svd(d_tw["form_raw"][:, j, k], compute_uv=False)
            axial += sv_t.sum(axis=-1)
    return {"scaled_sup": float(np.max(gaps) * abs(zeta) ** 2),
            "sup": float(np.max(gaps)),
            "axial_sup": float(np.max(axial)),
            "n_samples": n_samples}


def fueter_map(zeta: complex, root: complex | None = None) -> adhm_mod.FramedModuliPoint:
    """zeta -> (zeta^{1/2}, 0) in C^2/Z_2, independent of the chosen root."""
    if zeta == 0:
        raise ValueError("the map is defined away from zeta = 0")
    c = complex(np.sqrt(complex(zeta))) if root is None else complex(root)
    if abs(c * c - zeta) > 1e-9 * abs(zeta):
        raise ValueError("root is not a square root of zeta")
    return adhm_mod.framed_moduli_point(adhm_mod.ADHMData(c, 0, 0, c))


def cone_hym_residual(points) -> np.ndarray:
    """|i Lambda F| of the conical kernel monad at an array of points."""
    pts = np.asarray(points, dtype=complex)
    return mo.curvature_batch(cone_monad(), pts)["norm_mean"]
