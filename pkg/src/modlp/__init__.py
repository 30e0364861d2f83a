"""Weighted noncommutative Lp norms, sandwiched Rényi divergences and
channel sufficiency on finite-dimensional matrix algebras."""

from .channels import (
    KrausChannel,
    StinespringDilation,
    SufficiencyReport,
    apply,
    dpi_gap,
    dual_apply,
    equality_probe,
    is_sufficient,
    petz_recovery,
    stinespring,
)
from .divergences import DivergenceValue, d_renyi, d_renyi_norm_route, sandwiched_q
from .errors import ModLpError
from .matrix import (
    PartialIsometry,
    PositiveFunctional,
    frac_power,
    herm_eig,
    polar_right,
    random_hs_vector,
    random_state,
    random_unitary,
    schatten_norm,
)
from .standard_form import (
    RelativeModular,
    SpatialDerivative,
    functional_of_vector,
    r_phi,
    rel_modular_apply,
    spatial_apply,
    vector_rep,
)
from .weighted_lp import (
    AMPolarDecomposition,
    VariationalResult,
    am_duality_pair,
    am_norm,
    am_norm_variational,
    am_polar,
    bst_norm,
    dual_optimizer,
    kosaki_norm,
    sigma_eps_witness,
)

__version__ = "0.1.0"
