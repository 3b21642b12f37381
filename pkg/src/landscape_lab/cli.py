"""Command-line front end: ``landscape-lab <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 malformed input or I/O failure.
Every JSON document written carries ``spec_version``.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .efficiency import (ToleranceConfig, activation_admissibility, e0_margin, in_E0,
                         numeric_poly_efficiency_rank, taxonomy)
from .errors import InputFormatError, LabError
from .experiments import (DemoConfig, Kernel, MorseMCConfig, certify_efficient_minimum,
                          find_critical_points, morse_mc, prescribe_radius, redundant_critical_demo)
from .io import dump_json, load_dataset, load_network, load_polynomial, network_to_dict, write_csv
from .landscape import NO_REG, Regularizer, cost_report
from .net_core import Topology, get_activation
from .polyslice import (generalized_vandermonde, generalized_vandermonde_det, hadamard_bound,
                        is_zero_by_slicing, random_directions, slice, vandermonde_directions)
from .transforms import (criticality_along_line, extend_deactivated_bias, extend_duplicate,
                         line_response_check, prune_bias_oneshot, prune_deactivated,
                         prune_linear_dependence, redundancy_line)


def _floats(text: str, name: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputFormatError(f"--{name} must be a comma-separated list of numbers") from None


def _ints(text: str, name: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise InputFormatError(f"--{name} must be a comma-separated list of integers") from None


def _tols(args) -> ToleranceConfig:
    return ToleranceConfig(zero_abs=args.tol_zero, pair_rel=args.tol_pair, rank_rel=args.tol_rank)


def _reg(args) -> Regularizer:
    return Regularizer("ridge", args.ridge) if args.ridge > 0 else NO_REG


def _kernel(args) -> Kernel:
    return Kernel(args.kernel, args.bandwidth, args.kernel_variance)


def _net_and_data(args):
    theta, act = load_network(args.net)
    mu, f = load_dataset(args.data)
    if mu.d != theta.d:
        raise LabError(f"dataset has {mu.d} inputs, network expects {theta.d}")
    return theta, act, mu, f


# ---------------------------------------------------------------------------
# subcommands

def cmd_classify(args):
    theta, act = load_network(args.net)
    tols = _tols(args)
    e0 = in_E0(theta, tols)
    out = {"in_E0": e0.ok, "violations": [{"constraint": v.constraint, "neurons": list(v.neurons)} for v in e0.violations],
           "e0_margin": e0_margin(theta)}
    if args.data:
        mu, _ = load_dataset(args.data)
        if mu.d != theta.d:
            raise LabError(f"dataset has {mu.d} inputs, network expects {theta.d}")
        out["taxonomy"] = taxonomy(theta, act, mu, tols).to_dict()
        if args.pattern:
            rank = numeric_poly_efficiency_rank(theta, act, mu, _ints(args.pattern, "pattern"), tols)
            out["poly_rank"] = {"pattern": list(_ints(args.pattern, "pattern")), "full_rank": rank.full_rank,
                                "n_columns": rank.n_columns, "singular_values": rank.singular_values}
    elif args.pattern:
        raise LabError("--pattern needs --data")
    return out


def cmd_prune(args):
    theta, act = load_network(args.net)
    tols = _tols(args)
    if args.mode == "deactivated":
        final, trace = prune_deactivated(theta, tols)
    elif args.mode == "bias":
        final, trace = prune_bias_oneshot(theta, act, tols)
    else:
        if not args.data:
            raise LabError("dependence pruning needs --data")
        mu, _ = load_dataset(args.data)
        final, trace = prune_linear_dependence(theta, act, mu, args.prune_tol, tols)
    return {"trace": trace.to_dict(), "network": network_to_dict(final, act)}


def cmd_extend(args):
    theta, act = load_network(args.net)
    if args.kind == "duplicate":
        if args.source is None:
            raise LabError("duplication needs --source")
        new = extend_duplicate(theta, args.source, args.mix)
    else:
        new = extend_deactivated_bias(theta, args.beta)
    return {"network": network_to_dict(new, act)}


def cmd_line(args):
    theta, act, mu, f = _net_and_data(args)
    lam = _floats(args.lam, "lambda") if args.lam else None
    line = redundancy_line(theta, act, mu, lam, args.prune_tol, _tols(args))
    grid = np.linspace(args.t_min, args.t_max, args.points)
    crit = criticality_along_line(line, act, mu, f, _reg(args))
    return {"kind": line.kind, "neuron": line.neuron, "direction": line.direction,
            "max_response_deviation": line_response_check(line, act, mu, grid),
            "criticality": crit.to_dict()}


def cmd_landscape(args):
    theta, act, mu, f = _net_and_data(args)
    return cost_report(theta, act, mu, f, _reg(args)).to_dict()


def cmd_critfind(args):
    mu, f = load_dataset(args.data)
    topo = Topology(mu.d, args.hidden, 1)
    recs = find_critical_points(mu, f, topo, get_activation(args.activation), _reg(args),
                                n_starts=args.starts, seed=args.seed, init_scale=args.init_scale,
                                degeneracy_tol=args.tol_degenerate, tau=args.tau)
    return {"topology": {"input_dim": mu.d, "hidden": args.hidden, "output_dim": 1},
            "points": [r.to_dict() for r in recs]}


def cmd_slice(args):
    p = load_polynomial(args.poly)
    n = args.degree if args.degree is not None else p.degree
    if args.directions == "vandermonde":
        D = vandermonde_directions(n, p.d)
    else:
        if args.seed is None:
            raise LabError("random directions need --seed")
        D = random_directions(p.d, n, args.seed, args.tol_rank)
    return {"degree": n, "n_directions": D.size, "verified": D.verified,
            "is_zero": is_zero_by_slicing(p, D), "directions": D.directions,
            "slices": [slice(p, v) for v in D.directions]}


def cmd_vandermonde(args):
    a, lam = _floats(args.a, "a"), _floats(args.lam, "lambda")
    A = generalized_vandermonde(a, lam)
    det = generalized_vandermonde_det(a, lam)
    bound = hadamard_bound(A)
    return {"a": a, "lambda": lam, "det": det, "hadamard_bound": bound,
            "ratio": abs(det) / bound if bound > 0 else 0.0, "nonzero": det != 0.0}


def cmd_admissible(args):
    res = activation_admissibility(get_activation(args.activation), args.order, args.tol_rank)
    return {"activation": args.activation, "order": args.order, "rank": res.rank, "full": res.full, "exact": res.exact}


def cmd_mc_morse(args):
    mu, _ = load_dataset(args.data)
    cfg = MorseMCConfig(Topology(mu.d, args.hidden, 1), get_activation(args.activation), mu, _kernel(args),
                        trials=args.trials, seed=args.seed, tau=args.tau, degeneracy_tol=args.tol_degenerate,
                        n_starts=args.starts, init_scale=args.init_scale)
    report = morse_mc(cfg)
    if args.csv:
        write_csv(args.csv, ["trial", "point", "min_eig", "max_eig", "efficient"], report.csv_rows())
    out = report.to_dict()
    out["passed"] = not report.violations
    return out


def cmd_certify_min(args):
    theta, act = load_network(args.net)
    mu, _ = load_dataset(args.data)
    if mu.d != theta.d:
        raise LabError(f"dataset has {mu.d} inputs, network expects {theta.d}")
    delta = args.delta
    prescription = None
    if delta is None:
        pre = prescribe_radius(theta, act, mu)
        delta = pre.delta
        prescription = {"delta": pre.delta, "rho": pre.rho, "epsilon": pre.epsilon, "r_max": pre.r_max}
    cert = certify_efficient_minimum(theta, act, mu, _kernel(args), args.radius, args.seed, delta)
    return {"radius": args.radius, "prescription": prescription, "certification": cert.to_dict()}


def cmd_demo_redundant(args):
    mu, _ = load_dataset(args.data)
    cfg = DemoConfig(mu, get_activation(args.activation), args.hidden, _kernel(args), args.noise,
                     args.trials, args.seed, args.tau)
    return redundant_critical_demo(cfg).to_dict()


# ---------------------------------------------------------------------------
# parser

STOCHASTIC = {"critfind", "mc-morse", "certify-min", "demo-redundant"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="landscape-lab", description="Loss landscapes of shallow networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output JSON path (default stdout)")
    common.add_argument("--tol-zero", type=float, default=1e-9, help="absolute zero tolerance for weights")
    common.add_argument("--tol-pair", type=float, default=1e-9, help="relative tolerance for neuron pairs")
    common.add_argument("--tol-rank", type=float, default=1e-8, help="relative singular-value cutoff")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=fn)
        return p

    def net(p):
        p.add_argument("--net", required=True, help="network JSON")

    def data(p, required=True):
        p.add_argument("--data", required=required, help="dataset CSV (x_1..x_d, y[, weight])")

    def seed(p, required=True):
        p.add_argument("--seed", type=int, required=required)

    def search(p):
        p.add_argument("--activation", default="sigmoid")
        p.add_argument("--hidden", type=int, default=2)
        p.add_argument("--starts", type=int, default=8)
        p.add_argument("--init-scale", type=float, default=1.0)
        p.add_argument("--tau", type=float, default=1e-4, help="E0 margin")
        p.add_argument("--tol-degenerate", type=float, default=1e-8)

    def kernel(p):
        p.add_argument("--kernel", choices=("rbf", "white"), default="rbf")
        p.add_argument("--bandwidth", type=float, default=None)
        p.add_argument("--kernel-variance", type=float, default=1.0)

    def ridge(p):
        p.add_argument("--ridge", type=float, default=0.0, help="ridge strength (0 disables)")

    p = add("classify", cmd_classify, "efficient-domain test, redundancy taxonomy, polynomial rank")
    net(p); data(p, False)
    p.add_argument("--pattern", help="polynomial efficiency pattern, e.g. 0,0,1")

    p = add("prune", cmd_prune, "remove redundant neurons")
    net(p); data(p, False)
    p.add_argument("--mode", choices=("dependence", "deactivated", "bias"), default="dependence")
    p.add_argument("--prune-tol", type=float, default=1e-9)

    p = add("extend", cmd_extend, "add a redundant neuron")
    net(p)
    p.add_argument("--kind", choices=("duplicate", "bias"), required=True)
    p.add_argument("--source", type=int)
    p.add_argument("--mix", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.0)

    p = add("line", cmd_line, "constant-response line and criticality along it")
    net(p); data(p); ridge(p)
    p.add_argument("--lambda", dest="lam", help="dependency coefficients lambda_const,lambda_1..lambda_m")
    p.add_argument("--prune-tol", type=float, default=1e-9)
    p.add_argument("--t-min", type=float, default=-10.0)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=41)

    p = add("landscape", cmd_landscape, "cost, gradient, Hessian, Gram matrix")
    net(p); data(p); ridge(p)

    p = add("critfind", cmd_critfind, "multistart critical-point search")
    data(p); seed(p); search(p); ridge(p)

    p = add("slice", cmd_slice, "test a polynomial for identical vanishing by slicing")
    p.add_argument("--poly", required=True, help="polynomial JSON {d, terms: [{r, c}]}")
    p.add_argument("--degree", type=int)
    p.add_argument("--directions", choices=("vandermonde", "random"), default="vandermonde")
    seed(p, False)

    p = add("vandermonde", cmd_vandermonde, "generalized Vandermonde determinant")
    p.add_argument("--a", required=True, help="positive increasing nodes")
    p.add_argument("--lambda", dest="lam", required=True, help="increasing exponents")

    p = add("admissible", cmd_admissible, "Taylor-coefficient admissibility rank of an activation")
    p.add_argument("--activation", required=True)
    p.add_argument("--order", type=int, default=12)

    p = add("mc-morse", cmd_mc_morse, "Monte-Carlo probe of nondegeneracy on the efficient domain")
    data(p); seed(p); search(p); kernel(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--csv", help="also write (trial, point, min_eig, max_eig, efficient) rows here")

    p = add("certify-min", cmd_certify_min, "certify an efficient minimum near a perturbed response")
    net(p); data(p); seed(p); kernel(p)
    p.add_argument("--radius", type=float, required=True, help="target perturbation size r")
    p.add_argument("--delta", type=float, help="ball radius; prescribed automatically when omitted")

    p = add("demo-redundant", cmd_demo_redundant, "redundant critical points from extended efficient ones")
    data(p); seed(p); kernel(p)
    p.add_argument("--activation", default="sigmoid")
    p.add_argument("--hidden", type=int, default=1, help="hidden width before extension")
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tau", type=float, default=1e-4)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.func(args)
        dump_json(payload, args.out, args.command)
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
