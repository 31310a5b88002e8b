"""Fixed conventions and low-level primitives on Euclidean C^n.

Every module in this package works with one set of conventions, pinned here:

* Complex coordinates w_1..w_n on C^n, identified with R^{2n} via
  w_j = u_j + i v_j.  The flat Kahler form is omega = (i/2) sum dw_j ^ dwbar_j.
* Hermitian pairings are linear in the first slot, antilinear in the second:
  <a, b>_h = b^dag h a for column vectors and a positive matrix h.  The Gram
  matrix of a frame (s_1..s_r) is G[a, b] = s_a^dag h s_b, so |v|^2 = v^dag G v
  for coefficient columns v.
* The adjoint of a linear map M: (C^k, h_src) -> (C^m, h_dst) is
  M^dag = h_src^{-1} conj(M)^t h_dst.
* A (1,1)-form is stored through coefficients c[j, k] with
  phi = i * sum_{j,k} c[j, k] dw_j ^ dwbar_k; the contraction against omega is
  lambda_contract(phi) = 2 * sum_j c[j, j].  With this normalisation
  Lambda(i ddbar u) = (Delta u) / 2 where Delta is the full real Laplacian
  (sum of 2n second coordinate derivatives).
* The Chern curvature of a metric H in a holomorphic frame acts on
  coefficient columns as F = dbar(H^{-1} dH); its raw dw_j ^ dwbar_k
  coefficient is -d_{wbar_k}(H^{-1} d_{w_j} H).  For an abelian H = e^u this
  gives i Lambda F = -Delta u / 2.

Wirtinger derivatives: d_w = (d_u - i d_v)/2 and d_wbar = (d_u + i d_v)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Point3",
    "Form11",
    "lambda_contract",
    "adjoint_wrt",
    "inner",
    "fd_derivative",
    "fd_mixed_second",
    "check_hermitian",
    "check_positive_definite",
    "DEFAULT_FD_STEP",
]

DEFAULT_FD_STEP = 1e-3


@dataclass(frozen=True)
class Point3:
    """A point of C^3 (set z = 0 to work on C^2)."""

    x: complex
    y: complex
    z: complex = 0j

    @property
    def norm_sq(self) -> float:
        return abs(self.x) ** 2 + abs(self.y) ** 2 + abs(self.z) ** 2

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.norm_sq))

    def as_array(self, n: int = 3) -> np.ndarray:
        return np.array([self.x, self.y, self.z][:n], dtype=complex)


def coords(p, n: int = 3) -> np.ndarray:
    """Normalise a Point3 / sequence / array to a complex (n,) array."""
    if isinstance(p, Point3):
        return p.as_array(n)
    w = np.asarray(p, dtype=complex)
    if w.shape[-1] != n:
        raise ValueError(f"expected {n} complex coordinates, got shape {w.shape}")
    return w


@dataclass(frozen=True)
class Form11:
    """A (1,1)-form phi = i sum c[j,k] dw_j ^ dwbar_k.

    ``coeff`` has shape (n, n) for scalar forms or (n, n, r, r) when the
    coefficients are endomorphism valued.  A Hermitian form satisfies
    c[j, k] = c[k, j]^dag in the endomorphism slot.
    """

    coeff: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeff, dtype=complex)
        if c.ndim not in (2, 4) or c.shape[0] != c.shape[1]:
            raise ValueError(f"Form11 coefficients must be (n,n[,r,r]), got {c.shape}")
        if c.ndim == 4 and c.shape[2] != c.shape[3]:
            raise ValueError(f"endomorphism slot must be square, got {c.shape}")
        object.__setattr__(self, "coeff", c)

    @property
    def n(self) -> int:
        return self.coeff.shape[0]

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        c = self.coeff
        if c.ndim == 2:
            dev = np.abs(c - c.conj().T).max()
        else:
            dev = np.abs(c - c.conj().transpose(1, 0, 3, 2)).max()
        scale = max(np.abs(c).max(), 1.0)
        return bool(dev <= tol * scale)


def lambda_contract(phi: Form11 | np.ndarray) -> np.ndarray | complex:
    """Contract a (1,1)-form against the flat Kahler form.

    Returns 2 * sum_j c[j, j]; a scalar for scalar forms, an (r, r) matrix for
    endomorphism-valued ones.
    """
    c = phi.coeff if isinstance(phi, Form11) else np.asarray(phi, dtype=complex)
    if c.ndim not in (2, 4) or c.shape[0] != c.shape[1]:
        raise ValueError(f"expected (n,n[,r,r]) coefficients, got {c.shape}")
    n = c.shape[0]
    tr = sum(c[j, j] for j in range(n))
    return 2.0 * tr


def inner(a: np.ndarray, b: np.ndarray, h: np.ndarray | None = None):
    """<a, b>_h = b^dag h a (linear in a, antilinear in b)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if h is None:
        return np.einsum("...i,...i->...", b.conj(), a)
    return np.einsum("...i,...ij,...j->...", b.conj(), np.asarray(h, dtype=complex), a)


def adjoint_wrt(m: np.ndarray, h_src: np.ndarray, h_dst: np.ndarray) -> np.ndarray:
    """Adjoint of M: (C^k, h_src) -> (C^m, h_dst).

    Defined by <M u, v>_dst = <u, M^dag v>_src, which gives
    M^dag = h_src^{-1} conj(M)^t h_dst.
    """
    m = np.asarray(m, dtype=complex)
    h_src = np.asarray(h_src, dtype=complex)
    h_dst = np.asarray(h_dst, dtype=complex)
    if m.shape[-2] != h_dst.shape[-1] or m.shape[-1] != h_src.shape[-1]:
        raise ValueError(
            f"dimension mismatch: M {m.shape}, h_src {h_src.shape}, h_dst {h_dst.shape}"
        )
    mt = np.swapaxes(m.conj(), -1, -2)
    return np.linalg.solve(h_src, mt @ h_dst)


def _shift(w: np.ndarray, dir: int, delta: complex) -> np.ndarray:
    out = np.array(w, dtype=complex)
    out[dir] += delta
    return out


def fd_derivative(f, p, dir: int, kind: str = "holo", h: float = DEFAULT_FD_STEP):
    """Centered second-order Wirtinger derivative of a matrix-valued field.

    ``kind`` is "holo" for d_w = (d_u - i d_v)/2 or "anti" for
    d_wbar = (d_u + i d_v)/2.  ``f`` maps a complex coordinate array to a
    scalar or ndarray; evaluation failures at stencil points propagate.
    """
    if h <= 0:
        raise ValueError("fd step must be positive")
    if kind not in ("holo", "anti"):
        raise ValueError(f"kind must be 'holo' or 'anti', got {kind!r}")
    w = np.asarray(p, dtype=complex) if not isinstance(p, Point3) else p.as_array()
    du = (np.asarray(f(_shift(w, dir, h)), dtype=complex)
          - np.asarray(f(_shift(w, dir, -h)), dtype=complex)) / (2.0 * h)
    dv = (np.asarray(f(_shift(w, dir, 1j * h)), dtype=complex)
          - np.asarray(f(_shift(w, dir, -1j * h)), dtype=complex)) / (2.0 * h)
    if kind == "holo":
        return 0.5 * (du - 1j * dv)
    return 0.5 * (du + 1j * dv)


def fd_mixed_second(f, p, j: int, k: int, h: float = DEFAULT_FD_STEP):
    """Centered approximation of d_{w_j} d_{wbar_k} f, error O(h^2).

    Built from the four real mixed second derivatives of the pair of real
    coordinate directions underlying w_j and w_k.
    """
    w = np.asarray(p, dtype=complex) if not isinstance(p, Point3) else p.as_array()

    def real_mixed(da: complex, db: complex):
        # second derivative along the real directions da (coord j), db (coord k)
        if j == k and abs(da - db) < 1e-30:
            fp = np.asarray(f(_shift(w, j, da)), dtype=complex)
            fm = np.asarray(f(_shift(w, j, -da)), dtype=complex)
            f0 = np.asarray(f(w), dtype=complex)
            return (fp + fm - 2.0 * f0) / (h * h)
        wpp = np.asarray(f(_shift(_shift(w, j, da), k, db)), dtype=complex)
        wpm = np.asarray(f(_shift(_shift(w, j, da), k, -db)), dtype=complex)
        wmp = np.asarray(f(_shift(_shift(w, j, -da), k, db)), dtype=complex)
        wmm = np.asarray(f(_shift(_shift(w, j, -da), k, -db)), dtype=complex)
        return (wpp - wpm - wmp + wmm) / (4.0 * h * h)

    duu = real_mixed(h, h)
    dvv = real_mixed(1j * h, 1j * h)
    if j == k:
        # d_w d_wbar = (duu + dvv)/4; the u-v cross terms cancel for smooth f
        return 0.25 * (duu + dvv)
    duv = real_mixed(h, 1j * h)
    dvu = real_mixed(1j * h, h)
    # (d_uj - i d_vj)(d_uk + i d_vk) / 4
    return 0.25 * (duu + dvv + 1j * duv - 1j * dvu)


def check_hermitian(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = np.asarray(m, dtype=complex)
    scale = max(np.abs(m).max(), 1.0)
    return bool(np.abs(m - np.swapaxes(m.conj(), -1, -2)).max() <= tol * scale)


def check_positive_definite(m: np.ndarray, tol: float = 1e-12) -> bool:
    m = np.asarray(m, dtype=complex)
    if not check_hermitian(m, tol=1e-8):
        return False
    ev = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m.conj(), -1, -2)))
    return bool(ev.min() > tol * max(ev.max(), 0.0))
