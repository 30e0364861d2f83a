"""Sandwiched Rényi divergences, computed along two independent routes.

``trace_formula``
    ``D_alpha = log Tr (phi^g psi phi^g)^alpha / (alpha - 1)`` with
    ``g = (1 - alpha) / (2 alpha)``, and ``log lambda_max(phi^-1/2 psi phi^-1/2)``
    at ``alpha = inf``.
``norm_route``
    ``D_alpha = 2 alpha / (alpha - 1) * log ||psi^(1/2)||_{2 alpha, phi}`` with the
    BST weighted norm.

The two agree for every ``alpha`` in ``[1/2, 1) U (1, inf]``.  Values are in
nats.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidAlpha, NotAState
from .matrix import PositiveFunctional, as_functional, frac_power, herm_eig
from .standard_form import vector_rep
from .weighted_lp import bst_norm

SUPPORT_RTOL = 1e-10
STATE_TOL = 1e-12


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    alpha: float
    route: str

    def __float__(self) -> float:
        return self.value

    @property
    def is_infinite(self) -> bool:
        return np.isinf(self.value)


def check_alpha(alpha: float, allow_inf: bool = True) -> float:
    alpha = float(alpha)
    if np.isinf(alpha) and alpha > 0:
        if allow_inf:
            return alpha
    elif alpha == 1.0:
        raise InvalidAlpha("alpha = 1 is a pole of 1/(alpha - 1); the Umegaki limit is not provided")
    elif 0.5 <= alpha:
        return alpha
    raise InvalidAlpha(f"alpha must lie in [1/2, 1) U (1, inf], got {alpha}")


def support_leq(psi: PositiveFunctional, phi: PositiveFunctional) -> bool:
    """``s(psi) <= s(phi)``, decided by ``||(1-P) psi (1-P)||_op <= 1e-10 Tr psi``."""
    q = np.eye(phi.dim) - phi.support
    leak = q @ psi.density @ q
    return np.linalg.norm(leak, 2) <= SUPPORT_RTOL * psi.trace


def supports_orthogonal(psi: PositiveFunctional, phi: PositiveFunctional) -> bool:
    p = phi.support
    return np.linalg.norm(p @ psi.density @ p, 2) <= SUPPORT_RTOL * psi.trace


def _as_state(psi) -> PositiveFunctional:
    psi = as_functional(psi)
    if not psi.is_state(STATE_TOL):
        raise NotAState(f"psi has trace {np.trace(psi.density).real!r}, expected 1")
    return psi


def sandwiched_q(psi, phi, alpha: float) -> float:
    """``Tr (phi^g psi phi^g)^alpha`` with ``g = (1 - alpha)/(2 alpha)``.

    For ``alpha > 1`` negative powers of ``phi`` are pseudo-inverse powers;
    the caller is responsible for ``s(psi) <= s(phi)``.
    """
    alpha = check_alpha(alpha, allow_inf=False)
    psi, phi = as_functional(psi), as_functional(phi)
    g = (1.0 - alpha) / (2.0 * alpha)
    side = frac_power(phi, g)
    # cutoff matters for alpha < 1: lam**alpha inflates rounding-level eigenvalues
    w = PositiveFunctional.from_density(side @ psi.density @ side).eigenvalues
    return float(np.sum(w ** alpha))


def _max_sandwich(psi: PositiveFunctional, phi: PositiveFunctional) -> float:
    side = frac_power(phi, -0.5)
    w, _ = herm_eig(side @ psi.density @ side)
    return float(w[0])


def d_renyi(psi, phi, alpha: float) -> DivergenceValue:
    """Sandwiched Rényi divergence by the trace formula."""
    alpha = check_alpha(alpha)
    psi, phi = _as_state(psi), as_functional(phi)
    if alpha > 1.0:
        if not support_leq(psi, phi):
            return DivergenceValue(np.inf, alpha, "trace_formula")
        if np.isinf(alpha):
            return DivergenceValue(float(np.log(_max_sandwich(psi, phi))), alpha, "trace_formula")
    elif supports_orthogonal(psi, phi):
        return DivergenceValue(np.inf, alpha, "trace_formula")
    q = sandwiched_q(psi, phi, alpha)
    return DivergenceValue(float(np.log(q) / (alpha - 1.0)), alpha, "trace_formula")


def d_renyi_norm_route(psi, phi, alpha: float) -> DivergenceValue:
    """Sandwiched Rényi divergence as ``2a/(a-1) log ||psi^(1/2)||_{2a,phi}``."""
    alpha = check_alpha(alpha)
    psi, phi = _as_state(psi), as_functional(phi)
    norm = bst_norm(vector_rep(psi), phi, 2.0 * alpha)
    if np.isinf(norm) or norm == 0.0:
        return DivergenceValue(np.inf, alpha, "norm_route")
    coeff = 2.0 if np.isinf(alpha) else 2.0 * alpha / (alpha - 1.0)
    return DivergenceValue(float(coeff * np.log(norm)), alpha, "norm_route")

