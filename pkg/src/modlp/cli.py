"""Command-line front-end.

Exit codes: 0 success, 2 parse or validation failure, 3 invalid alpha or
exponent, 4 non-faithful weight where one is required, 5 a campaign produced
a violation row.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import campaign as camp
from .campaign import ConfigError, format_value, parse_real
from .divergences import d_renyi, d_renyi_norm_route
from .errors import InvalidAlpha, InvalidExponent, NotFaithful
from .io import FileFormatError, encode_matrix, read_matrix_file
from .matrix import PositiveFunctional
from .weighted_lp import (
    am_norm,
    am_norm_variational,
    am_polar,
    bst_norm,
    kosaki_norm,
    sigma_eps_witness,
)

EXIT_OK, EXIT_INPUT, EXIT_ALPHA, EXIT_FAITHFUL, EXIT_VIOLATION = 0, 2, 3, 4, 5


def _state(path) -> PositiveFunctional:
    mf = read_matrix_file(path)
    if mf.kind != "state":
        raise FileFormatError(f"{path}: expected kind 'state', got {mf.kind!r}")
    return PositiveFunctional.from_density(mf.data / np.trace(mf.data).real)


def _functional(path) -> PositiveFunctional:
    mf = read_matrix_file(path)
    if mf.kind not in ("state", "functional"):
        raise FileFormatError(f"{path}: expected a state or functional, got {mf.kind!r}")
    return PositiveFunctional.from_density(mf.data)


def _matrix(path) -> np.ndarray:
    mf = read_matrix_file(path)
    if mf.kind == "channel":
        raise FileFormatError(f"{path}: expected a matrix, got a channel")
    return mf.data


def _alpha_list(text: str) -> list[float]:
    try:
        return [parse_real(a) for a in text.split(",") if a.strip()]
    except ConfigError as exc:
        raise InvalidAlpha(str(exc)) from None


def _exponent(text: str) -> float:
    try:
        return parse_real(text)
    except ConfigError as exc:
        raise InvalidExponent(str(exc)) from None


def cmd_divergence(args, out) -> int:
    psi, phi = _state(args.psi), _functional(args.phi)
    alphas = _alpha_list(args.alpha)
    for a in alphas:
        if a == 1.0:
            raise InvalidAlpha("alpha = 1 is rejected: 1/(alpha - 1) has a pole there")
    scale = 1.0 / np.log(2.0) if args.bits else 1.0
    unit = "bits" if args.bits else "nats"
    if args.route == "both":
        print(f"alpha\ttrace_formula_{unit}\tnorm_route_{unit}\tabs_diff", file=out)
    else:
        print(f"alpha\tvalue_{unit}\troute", file=out)
    for a in alphas:
        if args.route == "both":
            t = d_renyi(psi, phi, a).value * scale
            n = d_renyi_norm_route(psi, phi, a).value * scale
            diff = 0.0 if (np.isinf(t) and np.isinf(n)) else abs(t - n)
            print("\t".join(format_value(x) for x in (a, t, n, diff)), file=out)
        else:
            fn = d_renyi if args.route == "trace" else d_renyi_norm_route
            dv = fn(psi, phi, a)
            print(f"{format_value(a)}\t{format_value(dv.value * scale)}\t{dv.route}", file=out)
    return EXIT_OK


def cmd_norm(args, out) -> int:
    k, phi = _matrix(args.k), _functional(args.phi)
    p = _exponent(args.p)
    if args.kind == "am":
        value = am_norm(k, phi, p)
    elif args.kind == "bst":
        value = bst_norm(k, phi, p)
    else:
        value = kosaki_norm(k, phi, p)
    print(f"{args.kind}_norm\t{format_value(value)}", file=out)
    if args.variational_budget > 0:
        if args.kind == "kosaki":
            raise ConfigError("variational evaluation is defined for am and bst norms only")
        # the variational definition is the AM norm; for BST evaluate it at k*
        target = k.conj().T if args.kind == "bst" else k
        res = am_norm_variational(target, phi, p, args.variational_budget, args.seed)
        print(f"variational_{res.bound_kind}\t{format_value(res.value)}", file=out)
    return EXIT_OK


def cmd_campaign(args, out) -> int:
    try:
        obj = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load config: {exc}") from None
    config = camp.CampaignConfig.from_dict(obj)
    result = camp.run_campaign(config)
    Path(args.out_csv).write_text(camp.to_csv(result.rows), encoding="utf-8")
    print(f"rows\t{len(result.rows)}", file=out)
    print(f"min_gap\t{format_value(result.min_gap)}", file=out)
    print(f"violations\t{result.violations}", file=out)
    print(f"runtime_s\t{result.runtime:.3f}", file=out)
    return EXIT_VIOLATION if result.violations else EXIT_OK


def cmd_polar(args, out) -> int:
    k, phi = _matrix(args.k), _functional(args.phi)
    dec = am_polar(k, phi, _exponent(args.p))
    doc = {
        "kind": "am_polar",
        "p": dec.p,
        "dim": phi.dim,
        "norm": dec.norm,
        "u": encode_matrix(dec.u.matrix),
        "rho": encode_matrix(dec.rho.density),
    }
    text = json.dumps(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_witness(args, out) -> int:
    k, phi = _matrix(args.k), _functional(args.phi)
    p = _exponent(args.p)
    eps_grid = [parse_real(e) for e in args.eps.split(",") if e.strip()]
    # ratio is eps^(1/2 - 1/p) when sigma_0 exists and 1 when it does not
    print("eps\tvalue\tbst_norm\tratio", file=out)
    target = bst_norm(k, phi, p)
    for eps in eps_grid:
        _, value = sigma_eps_witness(k, phi, p, eps)
        print("\t".join(format_value(x) for x in (eps, value, target, value / target)), file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modlp", description="Weighted noncommutative Lp norms and sandwiched Renyi divergences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", help="sandwiched Renyi divergence D_alpha(psi||phi)")
    p.add_argument("psi")
    p.add_argument("phi")
    p.add_argument("--alpha", required=True, help="comma-separated list, e.g. 0.75,2,inf")
    p.add_argument("--bits", action="store_true", help="report in bits instead of nats")
    p.add_argument("--route", choices=("trace", "norm", "both"), default="trace")
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("norm", help="weighted Lp norm of a matrix")
    p.add_argument("k")
    p.add_argument("phi")
    p.add_argument("--p", required=True, help="exponent, e.g. 4/3, 3 or inf")
    p.add_argument("--kind", choices=("am", "bst", "kosaki"), default="am")
    p.add_argument("--variational-budget", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("campaign", help="randomized DPI / equality campaign")
    p.add_argument("config")
    p.add_argument("out_csv")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("polar", help="dump the AM polar decomposition as JSON")
    p.add_argument("k")
    p.add_argument("phi")
    p.add_argument("--p", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("witness", help="evaluate the sigma_eps witness sweep")
    p.add_argument("k")
    p.add_argument("phi")
    p.add_argument("--p", required=True)
    p.add_argument("--eps", default="0.05,0.25,0.5,0.75,0.95")
    p.set_defaults(func=cmd_witness)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        if args.command == "norm" and args.seed is None:
            env_seed = os.environ.get(camp.SEED_ENV)
            if env_seed and not env_seed.strip().isdigit():
                raise ConfigError(f"{camp.SEED_ENV} must be a nonnegative integer")
            args.seed = int(env_seed) if env_seed else 0
        return args.func(args, out)
    except (InvalidAlpha, InvalidExponent) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ALPHA
    except NotFaithful as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAITHFUL
    except ValueError as exc:  # ModLpError and friends
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
