"""Quantum channels with Petz recovery, plus the DPI / equality-case harness.

A channel is stored as a Kraus family ``{K_i}`` of ``d_out x d_in`` matrices
with ``sum K_i* K_i = 1``.  The Stinespring isometry stacks the Kraus
operators against an environment basis, ``V = sum_i K_i (x) e_i``, with the
output factor first.

Sufficiency of a channel for a pair ``{psi, phi}`` is decided by the Petz
recovery map built from ``phi``: the channel is sufficient iff that map
recovers both states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .divergences import check_alpha, d_renyi, support_leq
from .errors import (
    DimensionMismatch,
    IndeterminateGap,
    InvalidAlpha,
    InvalidChannel,
    SupportViolation,
    ZeroFunctional,
)
from .matrix import (
    as_functional,
    dagger,
    frac_power,
    random_isometry,
    trace_norm,
)

TP_TOL = 1e-10
CP_TOL = 1e-10
GAP_TOL = 1e-8
RECOVERY_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple
    d_in: int
    d_out: int

    def __init__(self, kraus_ops: Sequence[np.ndarray], validate: bool = True):
        ops = tuple(np.array(k, dtype=complex) for k in kraus_ops)
        if not ops:
            raise InvalidChannel("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.ndim != 2 or k.shape != shape for k in ops):
            raise InvalidChannel("Kraus operators must share one 2-d shape")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", ops)
        object.__setattr__(self, "d_out", shape[0])
        object.__setattr__(self, "d_in", shape[1])
        if validate:
            self.validate()

    def validate(self) -> None:
        resid = np.linalg.norm(sum(dagger(k) @ k for k in self.kraus_ops)
                               - np.eye(self.d_in), 2)
        if resid > TP_TOL:
            raise InvalidChannel(f"not trace preserving (residual {resid:.3e})")
        w = np.linalg.eigvalsh(self.choi())
        if w[0] < -CP_TOL:
            raise InvalidChannel(f"Choi matrix has eigenvalue {w[0]:.3e}")

    def choi(self) -> np.ndarray:
        """``sum_ij E_ij (x) Phi(E_ij)`` with the input factor first."""
        vecs = [k.T.reshape(-1) for k in self.kraus_ops]  # vec of K_i over (in, out)
        return sum(np.outer(v, v.conj()) for v in vecs)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return apply(self, x)

    def __len__(self) -> int:
        return len(self.kraus_ops)


def _check_dim(x: np.ndarray, d: int, what: str) -> np.ndarray:
    x = np.asarray(x.density if hasattr(x, "density") else x, dtype=complex)
    if x.shape != (d, d):
        raise DimensionMismatch(f"{what} must be {d}x{d}, got {x.shape}")
    return x


def apply(ch: KrausChannel, x) -> np.ndarray:
    x = _check_dim(x, ch.d_in, "channel input")
    return sum(k @ x @ dagger(k) for k in ch.kraus_ops)


def dual_apply(ch: KrausChannel, a) -> np.ndarray:
    """Heisenberg-picture map ``a -> sum K_i* a K_i`` (unital, CP)."""
    a = _check_dim(a, ch.d_out, "dual input")
    return sum(dagger(k) @ a @ k for k in ch.kraus_ops)


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    if second.d_in != first.d_out:
        raise DimensionMismatch("channel dimensions do not chain")
    return KrausChannel([b @ a for b in second.kraus_ops for a in first.kraus_ops])


@dataclass(frozen=True, eq=False)
class StinespringDilation:
    isometry: np.ndarray
    env_dim: int
    d_out: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = self.isometry @ x @ dagger(self.isometry)
        n = self.env_dim
        return np.einsum("aibi->ab", y.reshape(self.d_out, n, self.d_out, n))

    def dual_apply(self, a: np.ndarray) -> np.ndarray:
        big = np.kron(a, np.eye(self.env_dim))
        return dagger(self.isometry) @ big @ self.isometry


def stinespring(ch: KrausChannel) -> StinespringDilation:
    n = len(ch.kraus_ops)
    v = np.stack(ch.kraus_ops, axis=1).reshape(ch.d_out * n, ch.d_in)
    return StinespringDilation(v, n, ch.d_out)


def channel_from_isometry(v: np.ndarray, d_out: int) -> KrausChannel:
    """Inverse of :func:`stinespring`: split ``V`` into Kraus blocks."""
    rows, d_in = v.shape
    if rows % d_out:
        raise DimensionMismatch("isometry rows must be a multiple of d_out")
    n = rows // d_out
    blocks = v.reshape(d_out, n, d_in)
    return KrausChannel([blocks[:, i, :] for i in range(n)])


def petz_recovery(ch: KrausChannel, phi) -> KrausChannel:
    """Petz recovery ``y -> phi^1/2 Phi*(Phi(phi)^-1/2 y Phi(phi)^-1/2) phi^1/2``.

    The Kraus operators are ``phi^1/2 K_i* Phi(phi)^-1/2``; they are trace
    preserving on ``s(Phi(phi))`` only, so the map is completed by sending
    the complement of that support to the fixed state ``phi / Tr phi``.
    """
    phi = as_functional(_check_dim(phi, ch.d_in, "phi"))
    if phi.rank == 0:
        raise ZeroFunctional("Petz recovery needs a nonzero reference functional")
    out = as_functional(apply(ch, phi.density))
    root = frac_power(phi, 0.5)
    inv_root_out = frac_power(out, -0.5)
    ops = [root @ dagger(k) @ inv_root_out for k in ch.kraus_ops]

    w, v = np.linalg.eigh(np.eye(ch.d_out) - out.support)
    comp = v[:, w > 0.5]
    if comp.shape[1]:
        tau_w = phi.eigenvalues / phi.trace
        for j in np.flatnonzero(tau_w):
            e_j = phi.eigenvectors[:, j:j + 1]
            for l in range(comp.shape[1]):
                ops.append(np.sqrt(tau_w[j]) * e_j @ dagger(comp[:, l:l + 1]))
    return KrausChannel(ops)


@dataclass(frozen=True, eq=False)
class SufficiencyReport:
    recovered_psi_error: float
    recovered_phi_error: float
    sufficient: bool
    recovery: KrausChannel
    tol: float = RECOVERY_TOL


def is_sufficient(ch: KrausChannel, psi, phi, tol: float = RECOVERY_TOL) -> SufficiencyReport:
    psi = as_functional(_check_dim(psi, ch.d_in, "psi"))
    phi = as_functional(_check_dim(phi, ch.d_in, "phi"))
    if not support_leq(psi, phi):
        raise SupportViolation("sufficiency test requires s(psi) <= s(phi)")
    rec = petz_recovery(ch, phi)
    err_psi = trace_norm(apply(rec, apply(ch, psi.density)) - psi.density)
    err_phi = trace_norm(apply(rec, apply(ch, phi.density)) - phi.density)
    return SufficiencyReport(err_psi, err_phi, err_psi <= tol and err_phi <= tol, rec, tol)


def divergence_pair(ch: KrausChannel, psi, phi, alpha: float) -> tuple[float, float]:
    psi = _check_dim(psi, ch.d_in, "psi")
    phi = _check_dim(phi, ch.d_in, "phi")
    before = d_renyi(psi, phi, alpha).value
    after = d_renyi(apply(ch, psi), apply(ch, phi), alpha).value
    return before, after


def gap_of(before: float, after: float) -> float:
    if np.isinf(before) and np.isinf(after):
        raise IndeterminateGap("both divergences are infinite")
    return before - after


def dpi_gap(ch: KrausChannel, psi, phi, alpha: float) -> float:
    """``D(psi||phi) - D(Phi(psi)||Phi(phi))``; ``inf - finite = inf``."""
    return gap_of(*divergence_pair(ch, psi, phi, alpha))


@dataclass(frozen=True, eq=False)
class EqualityReport:
    alphas: tuple
    gaps: tuple
    sufficiency: SufficiencyReport
    gap_tol: float
    violation: bool

    @property
    def equality(self) -> bool:
        return any(g <= self.gap_tol for g in self.gaps)


def equality_probe(ch: KrausChannel, psi, phi, alpha_grid: Sequence[float],
                   tol: float = GAP_TOL, recovery_tol: float = RECOVERY_TOL) -> EqualityReport:
    """Compare DPI equality with Petz sufficiency on a grid in (1/2, 1).

    ``violation`` is set when some gap is within ``tol`` of zero although the
    channel is not sufficient, or when a sufficient channel shows a gap
    above ``tol``.
    """
    alphas = tuple(check_alpha(a) for a in alpha_grid)
    if any(not 0.5 < a < 1.0 for a in alphas):
        raise InvalidAlpha("the equality probe works on alpha in (1/2, 1)")
    report = is_sufficient(ch, psi, phi, recovery_tol)
    gaps = tuple(dpi_gap(ch, psi, phi, a) for a in alphas)
    equal = any(g <= tol for g in gaps)
    violation = (equal and not report.sufficient) or (
        report.sufficient and any(g > tol for g in gaps))
    return EqualityReport(alphas, gaps, report, tol, violation)


# Channel families ----------------------------------------------------------

def identity_channel(d: int) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def unitary_channel(u: np.ndarray) -> KrausChannel:
    return KrausChannel([u])


def depolarizing(d: int, p: float = 1.0) -> KrausChannel:
    """``x -> (1-p) x + p Tr(x) 1/d``; ``p = 1`` is completely depolarizing."""
    ops = [np.sqrt(1.0 - p) * np.eye(d)] if p < 1.0 else []
    for i in range(d):
        for j in range(d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = np.sqrt(p / d)
            ops.append(e)
    return KrausChannel(ops)


def dephasing(d: int, basis: np.ndarray | None = None) -> KrausChannel:
    basis = np.eye(d) if basis is None else basis
    return KrausChannel([np.outer(basis[:, i], basis[:, i].conj()) for i in range(d)])


def block_pinching(sizes: Sequence[int]) -> KrausChannel:
    """Projection onto block-diagonal matrices for the given block sizes."""
    d = sum(sizes)
    ops, start = [], 0
    for s in sizes:
        proj = np.zeros((d, d), dtype=complex)
        proj[start:start + s, start:start + s] = np.eye(s)
        ops.append(proj)
        start += s
    return KrausChannel(ops)


def partial_trace_channel(d_keep: int, d_drop: int) -> KrausChannel:
    """Trace out the second tensor factor of ``C^d_keep (x) C^d_drop``."""
    ops = []
    for j in range(d_drop):
        e = np.zeros((1, d_drop))
        e[0, j] = 1.0
        ops.append(np.kron(np.eye(d_keep), e))
    return KrausChannel(ops)


def ancilla_attach(d: int, tau) -> KrausChannel:
    """``x -> x (x) tau`` for a fixed state ``tau``."""
    tau = as_functional(tau)
    ops = []
    for j in np.flatnonzero(tau.eigenvalues):
        vec = tau.eigenvectors[:, j:j + 1] * np.sqrt(tau.eigenvalues[j])
        ops.append(np.kron(np.eye(d), vec))
    return KrausChannel(ops)


def isometric_embedding(v: np.ndarray) -> KrausChannel:
    return KrausChannel([v])


def random_channel(d_in: int, d_out: int, n_kraus: int | None = None, seed=None) -> KrausChannel:
    """Random CPTP map from a Haar-like random Stinespring isometry."""
    n = n_kraus if n_kraus is not None else max(2, -(-d_in // d_out))
    if d_out * n < d_in:
        raise DimensionMismatch("d_out * n_kraus must be at least d_in")
    return channel_from_isometry(random_isometry(d_out * n, d_in, seed=seed), d_out)
