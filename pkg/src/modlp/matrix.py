"""Dense complex-matrix substrate.

Hermitian eigendecomposition, support-aware fractional powers, polar
decomposition, Schatten norms and seeded random generators.  Matrices are
plain ``numpy`` arrays of dtype ``complex128``; positive functionals are
wrapped in :class:`PositiveFunctional`, which caches their spectral data.

Rank decisions follow one rule everywhere: an eigenvalue (or singular value)
``lam`` is retained iff ``lam > d * eps * lam_max``.  Anything below the cutoff
is exactly zero for the purposes of supports and pseudo-inverse powers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidExponent, NonHermitian, NotPositive

EPS = np.finfo(float).eps
HERMITIAN_RTOL = 1e-10
# Negative eigenvalues beyond this (relative) level are rejected rather than clipped.
PSD_RTOL = 1e-10


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def op_norm(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def cutoff(values: np.ndarray, dim: int) -> float:
    """Retention threshold for a list of nonnegative spectral values."""
    top = float(np.max(np.abs(values))) if len(values) else 0.0
    return dim * EPS * top


def _check_hermitian(a: np.ndarray) -> None:
    diff = a - dagger(a)
    # ||.||_F >= ||.||_op and max|a_ij| <= ||a||_op: the cheap test is conservative.
    if a.size == 0 or np.linalg.norm(diff) <= HERMITIAN_RTOL * max(1.0, float(np.max(np.abs(a)))):
        return
    if op_norm(diff) > HERMITIAN_RTOL * max(1.0, op_norm(a)):
        raise NonHermitian(f"matrix is not Hermitian: ||A - A*|| = {op_norm(diff):.3e}")


def herm_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues nonincreasing.

    Raises :class:`NonHermitian` if ``||A - A*||_op`` exceeds
    ``1e-10 * max(1, ||A||_op)``.  Inputs are never silently symmetrized
    beyond rounding level.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    _check_hermitian(a)
    w, v = np.linalg.eigh((a + dagger(a)) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


@dataclass(frozen=True, eq=False)
class PositiveFunctional:
    """A positive functional ``a -> Tr(density @ a)`` with cached spectrum.

    Build instances with :meth:`from_density`; ``eigenvalues`` are
    nonincreasing with below-cutoff entries set to exactly zero.
    """

    density: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    support: np.ndarray

    @classmethod
    def from_density(cls, a) -> "PositiveFunctional":
        if isinstance(a, PositiveFunctional):
            return a
        a = np.asarray(a, dtype=complex)
        w, v = herm_eig(a)
        d = a.shape[0]
        top = max(float(w[0]) if d else 0.0, 0.0)
        if d and w[-1] < -PSD_RTOL * max(1.0, top):
            raise NotPositive(f"matrix has negative eigenvalue {w[-1]:.3e}")
        keep = w > d * EPS * top
        w = np.where(keep, w, 0.0)
        vk = v[:, keep]
        support = vk @ dagger(vk)
        density = (a + dagger(a)) / 2
        for arr in (density, w, v, support):
            arr.setflags(write=False)
        return cls(density, w, v, support)

    @classmethod
    def from_spectrum(cls, w, v) -> "PositiveFunctional":
        """``v diag(w) v*`` for orthonormal columns ``v`` and ``w > 0``.

        No cutoff is applied, so the rank is ``len(w)`` even when ``w``
        spans more than ``1/eps`` (as for ``|m|^p`` with large ``p``).
        """
        w = np.asarray(w, dtype=float)
        v = np.asarray(v, dtype=complex)
        if np.any(w <= 0):
            raise NotPositive("from_spectrum expects strictly positive eigenvalues")
        d = v.shape[0]
        order = np.argsort(w)[::-1]
        w, v = w[order], v[:, order]
        full, _ = np.linalg.qr(np.hstack([v, np.eye(d, dtype=complex)]))
        full[:, :len(w)] = v
        eigvals = np.concatenate([w, np.zeros(d - len(w))])
        density = (v * w) @ dagger(v)
        density = (density + dagger(density)) / 2
        support = v @ dagger(v)
        for arr in (density, eigvals, full, support):
            arr.setflags(write=False)
        return cls(density, eigvals, full, support)

    @property
    def dim(self) -> int:
        return self.density.shape[0]

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.eigenvalues))

    @property
    def trace(self) -> float:
        return float(np.sum(self.eigenvalues))

    @property
    def is_faithful(self) -> bool:
        return self.rank == self.dim

    def is_state(self, tol: float = 1e-12) -> bool:
        return abs(np.trace(self.density).real - 1.0) <= tol

    def power(self, t: float) -> np.ndarray:
        return frac_power(self, t)

    def __call__(self, a: np.ndarray) -> complex:
        return complex(np.trace(self.density @ a))

    def __repr__(self) -> str:
        return f"PositiveFunctional(dim={self.dim}, rank={self.rank}, trace={self.trace:.6g})"


def as_functional(x) -> PositiveFunctional:
    return PositiveFunctional.from_density(x)


MatrixLike = Union[np.ndarray, PositiveFunctional]


def frac_power(a: MatrixLike, t: float) -> np.ndarray:
    """``U diag(lam**t) U*`` over retained eigenvalues, zero elsewhere.

    Negative ``t`` is a pseudo-inverse power on the support and ``t == 0``
    returns the support projection.
    """
    f = as_functional(a)
    w = f.eigenvalues
    keep = w > 0
    vk = f.eigenvectors[:, keep]
    return (vk * (w[keep] ** t)) @ dagger(vk)


def support(a: MatrixLike) -> np.ndarray:
    return as_functional(a).support


@dataclass(frozen=True, eq=False)
class PartialIsometry:
    matrix: np.ndarray
    initial_proj: np.ndarray
    final_proj: np.ndarray


def polar_right(m: np.ndarray) -> tuple[PartialIsometry, np.ndarray]:
    """Right polar decomposition ``m = u |m|`` with ``|m| = (m* m)^(1/2)``.

    ``u`` is the partial isometry from ``support(|m|)`` onto the range of
    ``m``; singular values below the cutoff are treated as zero.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"polar_right expects a square matrix, got {m.shape}")
    w, s, vh = np.linalg.svd(m)
    keep = s > cutoff(s, m.shape[0])
    wk, sk, vk = w[:, keep], s[keep], dagger(vh[keep, :])
    u = wk @ dagger(vk)
    absval = (vk * sk) @ dagger(vk)
    iso = PartialIsometry(u, vk @ dagger(vk), wk @ dagger(wk))
    return iso, absval


def singular_values(a: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm, ``p`` in ``[1, inf]``."""
    p = float(p)
    if not p >= 1.0:
        raise InvalidExponent(f"Schatten norm needs p >= 1, got {p}")
    s = singular_values(a)
    if s.size == 0:
        return 0.0
    top = float(s.max())
    if top == 0.0:
        return 0.0
    if np.isinf(p):
        return top
    # scaled sum avoids overflow for large p
    return top * float(np.sum((s / top) ** p)) ** (1.0 / p)


def conjugate_exponent(p: float) -> float:
    """Hölder conjugate ``q`` with ``1/p + 1/q = 1``; handles 1 and inf exactly."""
    p = float(p)
    if p == 1.0:
        return np.inf
    if np.isinf(p):
        return 1.0
    return p / (p - 1.0)


def inv_exponent(p: float) -> float:
    return 0.0 if np.isinf(p) else 1.0 / float(p)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def ginibre(d_rows: int, d_cols: int | None = None, seed=None) -> np.ndarray:
    rng = _rng(seed)
    d_cols = d_rows if d_cols is None else d_cols
    return (rng.standard_normal((d_rows, d_cols))
            + 1j * rng.standard_normal((d_rows, d_cols))) / np.sqrt(2)


def random_state(d: int, seed=None) -> PositiveFunctional:
    """Ginibre density matrix ``G G* / Tr(G G*)``; full rank almost surely."""
    if d < 1:
        raise ValueError("dimension must be positive")
    g = ginibre(d, seed=seed)
    rho = g @ dagger(g)
    return PositiveFunctional.from_density(rho / np.trace(rho).real)


def random_hs_vector(d: int, seed=None) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    return ginibre(d, seed=seed)


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar unitary via QR of a Ginibre matrix with the phase fix on ``R``."""
    if d < 1:
        raise ValueError("dimension must be positive")
    q, r = np.linalg.qr(ginibre(d, seed=seed))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_isometry(d_rows: int, d_cols: int, seed=None) -> np.ndarray:
    if d_rows < d_cols:
        raise ValueError("an isometry needs d_rows >= d_cols")
    q, r = np.linalg.qr(ginibre(d_rows, d_cols, seed=seed))
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def direct_sum(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i:i + k, i:i + k] = b
        i += k
    return out


def trace_norm(a: np.ndarray) -> float:
    return schatten_norm(a, 1)
