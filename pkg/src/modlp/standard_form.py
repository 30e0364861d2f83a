"""The standard form of a matrix algebra on Hilbert-Schmidt matrices.

``M = M_d(C)`` acts on ``L_2(M)`` (d x d matrices, inner product
``(k, k') = Tr k* k'``) by left multiplication, the positive cone is the PSD
matrices and the modular conjugation is ``J k = k*``.  In this picture

* the relative modular operator acts as ``Delta_{sigma,phi}^z k = sigma^z k phi^-z``;
* the spatial derivative of ``h`` relative to ``phi`` is ``J Delta_{omega,phi} J``
  with ``omega = h h*``, acting as ``k -> phi^-g k omega^g``;
* the commutant (right action) vector functional of ``k`` is the
  left-action functional of ``k*``.

Neither operator is ever materialized as a ``d^2 x d^2`` matrix; both act by
two-sided multiplication.  Negative powers are pseudo-inverse powers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotMajorized
from .matrix import (
    PositiveFunctional,
    as_functional,
    dagger,
    frac_power,
    op_norm,
)

MAJORIZATION_RTOL = 1e-10


def inner(k: np.ndarray, kprime: np.ndarray) -> complex:
    """L_2 inner product ``Tr(k* k')``, antilinear in the first slot."""
    return complex(np.vdot(k, kprime))


def hs_norm(k: np.ndarray) -> float:
    return float(np.linalg.norm(k))


def J(k: np.ndarray) -> np.ndarray:
    return dagger(np.asarray(k))


def vector_rep(psi) -> np.ndarray:
    """The positive-cone representative ``h_psi^(1/2)``."""
    return frac_power(psi, 0.5)


def functional_of_vector(k: np.ndarray) -> PositiveFunctional:
    """``omega_k(a) = (k, a k) = Tr(a k k*)``."""
    k = np.asarray(k, dtype=complex)
    return PositiveFunctional.from_density(k @ dagger(k))


def commutant_functional(k: np.ndarray) -> PositiveFunctional:
    # right action: omega'_k corresponds to omega_{k*} = k* k
    return functional_of_vector(J(k))


@dataclass(frozen=True, eq=False)
class RelativeModular:
    sigma: PositiveFunctional
    phi: PositiveFunctional

    def __init__(self, sigma, phi):
        object.__setattr__(self, "sigma", as_functional(sigma))
        object.__setattr__(self, "phi", as_functional(phi))

    def apply(self, z: float, k: np.ndarray) -> np.ndarray:
        return frac_power(self.sigma, z) @ np.asarray(k) @ frac_power(self.phi, -z)


def rel_modular_apply(dm: RelativeModular, z: float, k: np.ndarray) -> np.ndarray:
    return dm.apply(z, k)


@dataclass(frozen=True, eq=False)
class SpatialDerivative:
    """``Delta(h/phi)``; ``omega`` is the vector functional ``h h*``."""

    h: np.ndarray
    phi: PositiveFunctional
    omega: PositiveFunctional

    def __init__(self, h, phi):
        h = np.asarray(h, dtype=complex)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "phi", as_functional(phi))
        object.__setattr__(self, "omega", functional_of_vector(h))

    def apply(self, gamma: float, k: np.ndarray) -> np.ndarray:
        return frac_power(self.phi, -gamma) @ np.asarray(k) @ frac_power(self.omega, gamma)

    def as_relative_modular(self) -> RelativeModular:
        # Delta(h/phi) = J Delta_{omega,phi} J
        return RelativeModular(self.omega, self.phi)


def spatial_apply(sd: SpatialDerivative, gamma: float, k: np.ndarray) -> np.ndarray:
    return sd.apply(gamma, k)


def r_phi(k: np.ndarray, phi) -> tuple[np.ndarray, float]:
    """Majorization data for ``omega_k <= C phi``.

    Returns ``y`` with ``k = h_phi^(1/2) y`` and ``s(phi) y = y`` (so that
    ``R^phi(k)`` is right multiplication by ``y``) together with the least
    admissible constant ``C_k = ||y||_op^2``.

    Raises
    ------
    NotMajorized
        If ``k`` has a component outside ``s(phi)``, i.e.
        ``||(1 - s(phi)) k||_2 > 1e-10 ||k||_2``.
    """
    phi = as_functional(phi)
    k = np.asarray(k, dtype=complex)
    residual = np.linalg.norm(k - phi.support @ k)
    if residual > MAJORIZATION_RTOL * np.linalg.norm(k):
        raise NotMajorized(f"k leaves the support of phi (residual {residual:.3e})")
    y = frac_power(phi, -0.5) @ k
    return y, op_norm(y) ** 2
