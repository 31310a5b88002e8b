"""Growth degrees of polynomial holomorphic sections at both ends.

Sections of the kernel sheaf ker((x, y, z): C^3 -> C) are written in the
Koszul generators

    t1 = (z, 0, -x),  t2 = (0, z, -y),  t3 = (y, -x, 0),

subject to the relation x t2 - y t1 + z t3 = 0.  A coefficient triple
(f, g, h) of polynomials defines w = f t1 + g t2 + h t3 and the monad
representative v = (-w2, w1, 0, w3), which lies in ker beta of the main
family identically.

The growth degree of a section at an end is

    d = (1/2) * slope of log integral_{B(r)} |s|^2 w.r.t. log r  -  3,

computed over geometric radius sequences by stratified ball Monte Carlo
with common sampling nodes across radii.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import monads as mo
from .ansatz import ansatz_monad, cone_monad

__all__ = [
    "Poly3",
    "KoszulSection",
    "GrowthReport",
    "section_norm_sq",
    "cone_norm_sq",
    "ball_integral",
    "growth_degree",
    "filtration_table",
    "convexity_check",
    "search_sections",
    "KOSZUL_RELATION",
]


class Poly3:
    """Sparse polynomial in (x, y, z) with complex coefficients.

    Monomials are stored as {(i, j, k): coeff}; evaluation broadcasts over
    coordinate arrays.
    """

    def __init__(self, terms=None):
        self.terms = {}
        for key, val in (terms or {}).items():
            if val != 0:
                self.terms[tuple(int(e) for e in key)] = complex(val)

    @classmethod
    def const(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, i, j, k, c=1.0):
        return cls({(i, j, k): c})

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0.0) + val
        return Poly3(out)

    def __sub__(self, other):
        out = dict(self.terms)
        for key, val in other.terms.items():
            out[key] = out.get(key, 0.0) - val
        return Poly3(out)

    def __mul__(self, other):
        if not isinstance(other, Poly3):
            return Poly3({k: v * other for k, v in self.terms.items()})
        out = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                key = (k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2])
                out[key] = out.get(key, 0.0) + v1 * v2
        return Poly3(out)

    __rmul__ = __mul__

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        x, y, z = w[..., 0], w[..., 1], w[..., 2]
        out = np.zeros(w.shape[:-1], dtype=complex)
        for (i, j, k), c in self.terms.items():
            out = out + c * x**i * y**j * z**k
        return out

    def degree(self):
        return max((sum(k) for k in self.terms), default=-1)

    def __repr__(self):
        return f"Poly3({self.terms!r})"


_T_BASIS = "t1 = (z,0,-x), t2 = (0,z,-y), t3 = (y,-x,0)"
KOSZUL_RELATION = "x*t2 - y*t1 + z*t3 = 0"


def _det_seed(*parts) -> int:
    """Deterministic RNG seed from labels (independent of hash randomisation)."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class KoszulSection:
    """Coefficients (f, g, h) for w = f t1 + g t2 + h t3."""

    f: Poly3 = field(default_factory=Poly3)
    g: Poly3 = field(default_factory=Poly3)
    h: Poly3 = field(default_factory=Poly3)
    label: str = ""

    @classmethod
    def generator(cls, index: int) -> "KoszulSection":
        polys = [Poly3(), Poly3(), Poly3()]
        polys[index - 1] = Poly3.const(1.0)
        return cls(*polys, label=f"t{index}")

    def is_zero(self) -> bool:
        return not (self.f or self.g or self.h)

    def kernel_vector(self, w) -> np.ndarray:
        """w-components (3,) of f t1 + g t2 + h t3 at batched points."""
        w = np.asarray(w, dtype=complex)
        x, y, z = w[..., 0], w[..., 1], w[..., 2]
        fv, gv, hv = self.f(w), self.g(w), self.h(w)
        out = np.empty(w.shape[:-1] + (3,), dtype=complex)
        out[..., 0] = fv * z + hv * y
        out[..., 1] = gv * z - hv * x
        out[..., 2] = -fv * x - gv * y
        return out

    def monad_vector(self, w) -> np.ndarray:
        """Representative (-w2, w1, 0, w3) in ker beta of the main family."""
        kv = self.kernel_vector(w)
        out = np.empty(kv.shape[:-1] + (4,), dtype=complex)
        out[..., 0] = -kv[..., 1]
        out[..., 1] = kv[..., 0]
        out[..., 2] = 0.0
        out[..., 3] = kv[..., 2]
        return out

    def times(self, p: Poly3, label: str | None = None) -> "KoszulSection":
        return KoszulSection(p * self.f, p * self.g, p * self.h,
                             label=label or f"({self.label})*poly")


@dataclass(frozen=True)
class GrowthReport:
    label: str
    end: str                 # "origin" or "infinity"
    radii: tuple
    log_integrals: tuple
    degree: float
    fit_residual: float


def section_norm_sq(section: KoszulSection, w) -> np.ndarray:
    """Squared norm under the main-family metric at batched points.

    |s|^2 = h1(v', v') with v' the projection of the monad representative
    off Im(alpha); in closed form
    |v|^2_h - |alpha^dag v|^2 / (alpha^dag alpha).
    """
    w = np.asarray(w, dtype=complex)
    v = section.monad_vector(w)
    x, y, z = w[..., 0], w[..., 1], w[..., 2]
    rho = 1.0 + np.abs(x) ** 2 + np.abs(y) ** 2 + np.abs(z) ** 2
    q = rho**-0.5
    ada = (np.abs(x) ** 2 + np.abs(y) ** 2) * q + 1.0
    norm_h = (q * (np.abs(v[..., 0]) ** 2 + np.abs(v[..., 1]) ** 2)
              + np.abs(v[..., 2]) ** 2 + np.abs(v[..., 3]) ** 2)
    adag_v = q * (np.conj(x) * v[..., 0] + np.conj(y) * v[..., 1]) + v[..., 2]
    return np.real(norm_h - np.abs(adag_v) ** 2 / ada)


def cone_norm_sq(section: KoszulSection, w) -> np.ndarray:
    """Squared norm under the conical tangent-cone metric |w|^{-1} I."""
    w = np.asarray(w, dtype=complex)
    kv = section.kernel_vector(w)
    r = np.sqrt(np.sum(np.abs(w) ** 2, axis=-1))
    return np.sum(np.abs(kv) ** 2, axis=-1) / r


def _ball_nodes(rng: np.random.Generator, n: int, n_strata: int = 8):
    """Unit-ball nodes stratified over dyadic radial shells.

    Per-stratum counts are proportional to shell volume; returns nodes and
    the constant overall density 1/vol(B_1) absorbed into equal weights.
    """
    edges = np.concatenate([[0.0], 0.5 ** np.arange(n_strata - 1, 0, -1), [1.0]])
    vols = edges[1:] ** 6 - edges[:-1] ** 6
    counts = np.maximum((vols * n).astype(int), 8)
    pts = []
    wts = []
    for (lo, hi), cnt in zip(zip(edges[:-1], edges[1:]), counts):
        d = rng.standard_normal((cnt, 6))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        u = rng.random(cnt)
        rad = (lo**6 + u * (hi**6 - lo**6)) ** (1.0 / 6.0)
        pts.append(rad[:, None] * d)
        wts.append(np.full(cnt, (hi**6 - lo**6) / cnt))
    return np.concatenate(pts), np.concatenate(wts)


def ball_integral(norm_sq_fn, radii, n_samples: int = 4096, seed: int = 0):
    """integral over B(r) of |s|^2 for each r, with common scaled nodes."""
    rng = np.random.default_rng(seed)
    unit, wts = _ball_nodes(rng, n_samples)
    vol1 = np.pi**3 / 6.0
    out = []
    for r in np.asarray(radii, dtype=float):
        pts = r * (unit[:, :3] + 1j * unit[:, 3:])
        vals = norm_sq_fn(pts)
        out.append(float(np.sum(vals * wts) * vol1 * r**6))
    return np.asarray(out)


def growth_degree(section: KoszulSection, end: str, radii=None,
                  n_samples: int = 4096, seed: int = 0,
                  metric: str = "main") -> GrowthReport:
    """Fitted growth degree d = slope/2 - 3 at the origin or infinity."""
    if section.is_zero():
        raise ValueError("zero section has no growth degree")
    if end not in ("origin", "infinity"):
        raise ValueError("end must be 'origin' or 'infinity'")
    if radii is None:
        radii = np.geomspace(0.01, 0.3, 7) if end == "origin" \
            else np.geomspace(10.0, 1000.0, 7)
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 5:
        raise ValueError("need at least five radii for the slope fit")
    if end == "origin" and radii.max() > 0.3:
        raise ValueError("origin-end radii should not exceed 0.3")
    if end == "infinity" and radii.min() < 10.0:
        raise ValueError("infinity-end radii should be at least 10")
    norm_fn = (lambda w: section_norm_sq(section, w)) if metric == "main" \
        else (lambda w: cone_norm_sq(section, w))
    seed_eff = _det_seed(section.label, end, seed)
    ints = ball_integral(norm_fn, radii, n_samples, seed=seed_eff)
    logs = np.log(ints)
    coeffs = np.polyfit(np.log(radii), logs, 1)
    fit = np.polyval(coeffs, np.log(radii))
    resid = float(np.sqrt(np.mean((fit - logs) ** 2)))
    return GrowthReport(label=section.label, end=end, radii=tuple(radii),
                        log_integrals=tuple(logs),
                        degree=float(0.5 * coeffs[0] - 3.0),
                        fit_residual=resid)


def filtration_table(sections, n_samples: int = 4096, seed: int = 0,
                     match_tol: float = 0.25) -> dict:
    """(d_origin, d_infinity) for a family, plus the multiset-difference flag.

    Degrees are rounded to the nearest integer for the multiset comparison
    when within ``match_tol``; otherwise compared as reals on a match_tol
    grid.
    """
    rows = []
    for s in sections:
        if s.is_zero():
            raise ValueError(f"zero section in family: {s.label!r}")
        d0 = growth_degree(s, "origin", n_samples=n_samples, seed=seed)
        di = growth_degree(s, "infinity", n_samples=n_samples, seed=seed)
        rows.append({"label": s.label, "d_origin": d0.degree,
                     "d_infinity": di.degree,
                     "residuals": (d0.fit_residual, di.fit_residual)})

    def snap(v):
        return round(v / match_tol) * match_tol

    m0 = sorted(snap(r["d_origin"]) for r in rows)
    mi = sorted(snap(r["d_infinity"]) for r in rows)
    return {"rows": rows, "filtrations_differ": m0 != mi}


def convexity_check(section: KoszulSection, n_samples: int = 8192,
                    seed: int = 0, radii=(0.25, 0.5, 1.0)) -> dict:
    """Residual I(r1) I(r3) - I(r2)^2 under the cone metric, r2 = sqrt(r1 r3).

    For |s|^2 integrated against a conical structure, log I is convex in
    log r, so the residual is nonnegative (zero for homogeneous sections) up
    to Monte Carlo error.  Replicated for an error bar.
    """
    r1, r2, r3 = radii
    reps = []
    scales = []
    for k in range(4):
        ints = ball_integral(lambda w: cone_norm_sq(section, w),
                             [r1, r2, r3], n_samples,
                             seed=_det_seed(section.label, seed, k))
        reps.append(ints[0] * ints[2] - ints[1] ** 2)
        scales.append(ints[1] ** 2)
    reps = np.asarray(reps)
    return {"residual": float(reps.mean()),
            "stderr": float(reps.std(ddof=1) / 2.0),
            "scale": float(np.mean(scales))}


def search_sections(candidates=None, n_samples: int = 2048, seed: int = 0):
    """Scan candidate sections for the ordering of their two growth degrees.

    Returns rows sorted by d_infinity - d_origin (largest first); utility for
    hunting sections whose growth at infinity exceeds the local growth.
    """
    if candidates is None:
        t1, t2, t3 = (KoszulSection.generator(i) for i in (1, 2, 3))
        z = Poly3.monomial(0, 0, 1)
        x = Poly3.monomial(1, 0, 0)
        candidates = [t1, t2, t3,
                      t3.times(z, "z*t3"), t3.times(x, "x*t3"),
                      t1.times(z, "z*t1"),
                      KoszulSection(Poly3.const(1.0), Poly3(),
                                    Poly3.const(1.0), label="t1+t3")]
    rows = []
    for s in candidates:
        d0 = growth_degree(s, "origin", n_samples=n_samples, seed=seed)
        di = growth_degree(s, "infinity", n_samples=n_samples, seed=seed)
        rows.append({"label": s.label, "d_origin": d0.degree,
                     "d_infinity": di.degree,
                     "gap": di.degree - d0.degree})
    rows.sort(key=lambda r: -r["gap"])
    return rows
