"""Randomized DPI / equality-case campaigns with byte-reproducible CSV output.

Each trial draws a channel from one family together with a pair of states,
evaluates the divergence gap at every ``alpha`` of the grid and runs the
Petz sufficiency test once.  A row is flagged as a violation when

* the gap is below ``-gap_tol`` (data processing fails), or
* the channel is sufficient but the gap exceeds ``gap_tol``, or
* ``alpha`` lies in (1/2, 1), the gap is within ``gap_tol`` of zero and the
  channel is not sufficient.

Trial ``t`` uses dimension ``dims[t % len(dims)]`` and its own seed, spawned
from the campaign seed, so any row can be reproduced in isolation.
"""

from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channels import (
    GAP_TOL,
    RECOVERY_TOL,
    ancilla_attach,
    dephasing,
    depolarizing,
    divergence_pair,
    gap_of,
    is_sufficient,
    partial_trace_channel,
    random_channel,
    unitary_channel,
)
from .divergences import check_alpha
from .errors import IndeterminateGap, ModLpError
from .matrix import random_state, random_unitary

FAMILIES = ("random_stinespring", "depolarizing", "dephasing",
            "partial_trace", "unitary", "ancilla_attach")
COLUMNS = ("trial", "seed", "d_in", "d_out", "family", "alpha", "d_in_div",
           "d_out_div", "gap", "petz_err_psi", "petz_err_phi", "sufficient",
           "violation")
SEED_ENV = "MODLP_SEED"


class ConfigError(ModLpError):
    pass


@dataclass(frozen=True)
class CampaignConfig:
    seed: int
    trials: int
    dims: tuple
    alpha_grid: tuple
    channel_family: str
    gap_tol: float = GAP_TOL
    recovery_tol: float = RECOVERY_TOL

    @classmethod
    def from_dict(cls, obj: dict, env=None) -> "CampaignConfig":
        env = os.environ if env is None else env
        if not isinstance(obj, dict):
            raise ConfigError("campaign config must be an object")
        try:
            seed = int(env[SEED_ENV]) if env.get(SEED_ENV) else obj["seed"]
            trials = obj["trials"]
            dims = obj["dims"]
            grid = obj["alpha_grid"]
            family = obj["channel_family"]
        except KeyError as exc:
            raise ConfigError(f"missing config key {exc}") from None
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer") from None
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ConfigError("seed must be an integer in [0, 2^64)")
        if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
            raise ConfigError("trials must be a positive integer")
        if (not isinstance(dims, list) or not dims
                or any(not isinstance(d, int) or isinstance(d, bool) or d < 1 for d in dims)):
            raise ConfigError("dims must be a nonempty list of positive integers")
        if not isinstance(grid, list) or not grid:
            raise ConfigError("alpha_grid must be a nonempty list")
        alphas = tuple(check_alpha(parse_real(a)) for a in grid)
        if family not in FAMILIES:
            raise ConfigError(f"channel_family must be one of {FAMILIES}")
        tols = obj.get("tolerances", {}) or {}
        return cls(seed, trials, tuple(dims), alphas, family,
                   float(tols.get("gap", GAP_TOL)),
                   float(tols.get("recovery", RECOVERY_TOL)))


def parse_real(x) -> float:
    """Parse ``2``, ``0.75``, ``"4/3"`` or ``"inf"`` into a float."""
    if isinstance(x, bool):
        raise ConfigError(f"not a number: {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    s = str(x).strip().lower()
    if s in ("inf", "+inf", "infinity"):
        return float("inf")
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {x!r}") from None


def trial_seeds(seed: int, trials: int) -> list[int]:
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def build_instance(family: str, d: int, rng: np.random.Generator, trial: int):
    """Channel and state pair for one trial.

    ``partial_trace`` traces out a qubit; on even trials both states are
    products with a shared qubit factor (a sufficient instance), on odd
    trials they are generic.
    """
    if family == "partial_trace":
        ch = partial_trace_channel(d, 2)
        if trial % 2 == 0:
            tau = random_state(2, rng).density
            psi = np.kron(random_state(d, rng).density, tau)
            phi = np.kron(random_state(d, rng).density, tau)
        else:
            psi = random_state(2 * d, rng).density
            phi = random_state(2 * d, rng).density
        return ch, psi, phi
    if family == "random_stinespring":
        ch = random_channel(d, d, 2, seed=rng)
    elif family == "depolarizing":
        ch = depolarizing(d, 1.0)
    elif family == "dephasing":
        ch = dephasing(d, random_unitary(d, rng))
    elif family == "unitary":
        ch = unitary_channel(random_unitary(d, rng))
    elif family == "ancilla_attach":
        ch = ancilla_attach(d, random_state(2, rng))
    else:
        raise ConfigError(f"unknown channel family {family!r}")
    return ch, random_state(d, rng).density, random_state(d, rng).density


def row_violation(alpha: float, gap: float, sufficient: bool,
                  gap_tol: float) -> bool:
    if np.isnan(gap):
        return False
    if gap < -gap_tol:
        return True
    if sufficient and gap > gap_tol:
        return True
    return 0.5 < alpha < 1.0 and gap <= gap_tol and not sufficient


@dataclass
class CampaignResult:
    rows: list = field(default_factory=list)
    runtime: float = 0.0

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r["violation"])

    @property
    def min_gap(self) -> float:
        gaps = [r["gap"] for r in self.rows if not np.isnan(r["gap"])]
        return min(gaps) if gaps else float("nan")


def run_campaign(config: CampaignConfig) -> CampaignResult:
    start = time.perf_counter()
    result = CampaignResult()
    for t, seed in enumerate(trial_seeds(config.seed, config.trials)):
        d = config.dims[t % len(config.dims)]
        rng = np.random.default_rng(seed)
        ch, psi, phi = build_instance(config.channel_family, d, rng, t)
        report = is_sufficient(ch, psi, phi, config.recovery_tol)
        for alpha in config.alpha_grid:
            before, after = divergence_pair(ch, psi, phi, alpha)
            try:
                gap = gap_of(before, after)
            except IndeterminateGap:
                gap = float("nan")
            result.rows.append({
                "trial": t, "seed": seed, "d_in": ch.d_in, "d_out": ch.d_out,
                "family": config.channel_family, "alpha": alpha,
                "d_in_div": before, "d_out_div": after, "gap": gap,
                "petz_err_psi": report.recovered_psi_error,
                "petz_err_phi": report.recovered_phi_error,
                "sufficient": report.sufficient,
                "violation": row_violation(alpha, gap, report.sufficient, config.gap_tol),
            })
    result.runtime = time.perf_counter() - start
    return result


def format_value(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([format_value(r[c]) for c in COLUMNS])
    return buf.getvalue()
