"""Acceptance suite: one test per criterion, each recording a pass/fail line.

Run with pytest (lines are printed in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
import dataclasses
import functools
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import fd_gradient, fd_jacobian, random_instance  # noqa: E402

from landscape_lab.efficiency import activation_admissibility, in_E0, taxonomy  # noqa: E402
from landscape_lab.experiments import (GaussianTargetSampler, Kernel, MorseMCConfig, _mc_trial, certify_efficient_minimum,  # noqa: E402
                                       damped_newton, morse_mc, prescribe_radius, rayleigh_quotient,
                                       sample_target, trial_seed)
from landscape_lab.landscape import (NO_REG, EmpiricalMeasure, Regularizer, TargetFunction, cost,  # noqa: E402
                                     decomposition, g2, grad_cost, gram, hess_cost, reconstruct_det_hessian)
from landscape_lab.net_core import EXP, SIGMOID, SOFTPLUS, TANH, ParameterVector, Topology, response  # noqa: E402
from landscape_lab.polyslice import (Polynomial, generalized_vandermonde, generalized_vandermonde_det,  # noqa: E402
                                     hadamard_bound, is_zero_by_slicing, multi_indices_upto, multichoose,
                                     optimality_counterexample, random_directions, slice)
from landscape_lab.transforms import (bias_critical_condition, criticality_along_line, extend_deactivated_bias,  # noqa: E402
                                      extend_duplicate, prune_bias_oneshot, prune_deactivated,
                                      prune_linear_dependence, redundancy_line, line_response_check)

RESULTS = {}
MU1 = EmpiricalMeasure.uniform(np.linspace(-2, 2, 25)[:, None])
MU_WIDE = EmpiricalMeasure.uniform(np.linspace(-3, 3, 40)[:, None])


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    return ok


def sup_diff(a, b, act, mu):
    return float(np.max(np.abs(response(a, act, mu.atoms) - response(b, act, mu.atoms))))


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


# ---------------------------------------------------------------------------
# 1. derivatives against central differences

def check_derivatives():
    t0 = time.perf_counter()
    worst_g = worst_h = 0.0
    for k, act in enumerate((SIGMOID, TANH, SOFTPLUS)):
        rng = np.random.default_rng([1, k])
        for _ in range(50):
            theta, mu, f = random_instance(rng)
            reg = Regularizer("ridge", float(rng.uniform(0, 0.1)))
            t, x = theta.topology, theta.flatten()
            g = grad_cost(theta, act, mu, f, reg)
            fd_g = fd_gradient(lambda v: cost(ParameterVector.unflatten(t, v), act, mu, f, reg), x)
            fd_h = fd_jacobian(lambda v: grad_cost(ParameterVector.unflatten(t, v), act, mu, f, reg), x)
            worst_g = max(worst_g, rel_err(g, fd_g))
            worst_h = max(worst_h, rel_err(hess_cost(theta, act, mu, f, reg), fd_h))
    secs = time.perf_counter() - t0
    ok = worst_g <= 1e-6 and worst_h <= 1e-5 and secs < 10
    return record(1, ok, f"grad rel err {worst_g:.1e}, hess rel err {worst_h:.1e}, {secs:.1f}s")


# ---------------------------------------------------------------------------
# 2. cost decomposition

def check_decomposition():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(200):
        theta, mu, f = random_instance(rng)
        f = TargetFunction(f.values, noise_second_moment=float(rng.uniform(0, 1)))
        reg = Regularizer("ridge", float(rng.uniform(0, 0.1)))
        J = cost(theta, SIGMOID, mu, f, reg)
        worst = max(worst, abs(decomposition(theta, SIGMOID, mu, f, reg).recombine() - J) / (1 + abs(J)))
    return record(2, worst <= 1e-10, f"worst recombination error {worst:.1e} x (1+|J|)")


# ---------------------------------------------------------------------------
# 3. activation symmetries

def check_symmetries():
    z = np.linspace(-10, 10, 1001)
    s = SIGMOID(z)
    ident = max(np.max(np.abs(s + SIGMOID(-z) - 1)),
                np.max(np.abs(SIGMOID(z, 1) - s * (1 - s))),
                np.max(np.abs(TANH(z) + TANH(-z))),
                np.max(np.abs(TANH(z) - (2 * SIGMOID(2 * z) - 1))),
                np.max(np.abs(TANH(z, 1) - (1 - TANH(z) ** 2))))
    rng = np.random.default_rng(3)
    detected = 0
    for act in (SIGMOID, TANH):
        for _ in range(10):
            base = ParameterVector.random(Topology(1, 2), rng)
            th = ParameterVector(np.column_stack([base.w_in, -base.w_in[:, 0]]),
                                 np.append(base.b_hidden, -base.b_hidden[0]),
                                 np.vstack([base.w_out, [[rng.uniform(0.5, 1.5)]]]), base.b_out)
            detected += "sign_symmetric" in taxonomy(th, act, MU_WIDE).kinds()
    single = ParameterVector(np.array([[1.5, -1.5]]), [0.2, -0.2], [[1.0], [1.0]], [0.0])
    double = ParameterVector(np.array([[1.5, -1.5, 0.7, -0.7]]), [0.2, -0.2, 0.5, -0.5], np.ones((4, 1)), [0.0])
    single_kinds = taxonomy(single, SOFTPLUS, MU_WIDE).kinds()
    double_kinds = taxonomy(double, SOFTPLUS, MU_WIDE).kinds()
    softplus_ok = ("sign_symmetric" not in single_kinds and "sign_symmetric" not in double_kinds
                   and "generalized" in double_kinds)
    ok = ident <= 1e-14 and detected == 20 and softplus_ok
    return record(3, ok, f"identity error {ident:.1e}, injected pairs found {detected}/20, "
                         f"softplus single pair {single_kinds or ['efficient']}, two pairs {double_kinds}")


# ---------------------------------------------------------------------------
# 4. admissibility ranks

def check_admissibility():
    ranks = {act.name: activation_admissibility(act, 12) for act in (SIGMOID, TANH, SOFTPLUS, EXP)}
    ok = (all(ranks[n].rank == 6 and ranks[n].full and ranks[n].exact for n in ("sigmoid", "tanh", "softplus"))
          and ranks["exp"].rank < 6 and ranks["exp"].exact)
    return record(4, ok, "exact ranks " + ", ".join(f"{n}={r.rank}" for n, r in ranks.items()))


# ---------------------------------------------------------------------------
# 5/6. transforms and redundancy lines on seeded critical pipelines

def critical_pipeline(seed):
    # noisy fit of a random network; redrawn from the same stream when descent runs off to infinity
    rng = np.random.default_rng([5, seed])
    d, m = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    mu = MU1 if d == 1 else EmpiricalMeasure.uniform(rng.uniform(-2, 2, size=(30, d)))
    while True:
        th0 = ParameterVector.random(Topology(d, m), rng)
        f = TargetFunction(response(th0, SIGMOID, mu.atoms)[:, 0] + 0.05 * rng.normal(size=mu.n))
        base = damped_newton(th0, SIGMOID, mu, f).theta
        if np.linalg.norm(grad_cost(base, SIGMOID, mu, f)) <= 1e-10:
            return rng, mu, f, base


def check_transforms():
    t0 = time.perf_counter()
    worst = {"dup": 0.0, "prune_dup": 0.0, "bias": 0.0, "deact": 0.0, "prune_deact": 0.0}
    worst_grad = 0.0
    for seed in range(100):
        rng, mu, f, base = critical_pipeline(seed)
        src = int(rng.integers(base.m))
        dup = extend_duplicate(base, src, float(rng.uniform(0.2, 0.8)))
        worst["dup"] = max(worst["dup"], sup_diff(base, dup, SIGMOID, mu))
        pruned, _ = prune_linear_dependence(dup, SIGMOID, mu)
        worst["prune_dup"] = max(worst["prune_dup"], sup_diff(dup, pruned, SIGMOID, mu))
        deact = extend_deactivated_bias(base, float(rng.normal()))
        worst["deact"] = max(worst["deact"], sup_diff(base, deact, SIGMOID, mu))
        pruned, _ = prune_deactivated(deact)
        worst["prune_deact"] = max(worst["prune_deact"], sup_diff(deact, pruned, SIGMOID, mu))
        w_out = deact.w_out.copy()
        w_out[-1] = rng.uniform(0.5, 1.5)
        biased = deact.replace(w_out=w_out)
        pruned, _ = prune_bias_oneshot(biased, SIGMOID)
        worst["bias"] = max(worst["bias"], sup_diff(biased, pruned, SIGMOID, mu))
        for ext in (dup, deact):
            worst_grad = max(worst_grad, float(np.linalg.norm(grad_cost(ext, SIGMOID, mu, f))))
    secs = time.perf_counter() - t0
    ok = (worst["deact"] == 0.0 and worst["prune_deact"] == 0.0
          and max(worst.values()) <= 1e-10 and worst_grad <= 1e-8 and secs < 30)
    return record(5, ok, "sup-norm " + ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
                  + f"; grad after extension {worst_grad:.1e}; {secs:.1f}s")


def check_lines():
    grid = np.linspace(-10, 10, 41)
    dev = ray = resid = 0.0
    verdicts = set()
    for seed in range(20):
        rng, mu, f, base = critical_pipeline(seed)
        src = int(rng.integers(base.m))
        dup = extend_duplicate(base, src, float(rng.uniform(0.2, 0.8)))
        lam = np.zeros(dup.m + 1)
        lam[1 + src], lam[-1] = 1.0, -1.0
        deact = extend_deactivated_bias(base, float(rng.normal()))
        for th, line in ((dup, redundancy_line(dup, SIGMOID, mu, lam)), (deact, redundancy_line(deact, SIGMOID, mu))):
            dev = max(dev, line_response_check(line, SIGMOID, mu, grid))
            ray = max(ray, rayleigh_quotient(hess_cost(th, SIGMOID, mu, f), line.direction))
            crit = criticality_along_line(line, SIGMOID, mu, f)
            resid = max(resid, crit.affine_residual)
            verdicts.add(crit.verdict)
    ok = dev <= 1e-10 and ray <= 1e-8 and resid <= 1e-9 and verdicts == {"all_critical"}
    return record(6, ok, f"response deviation {dev:.1e}, Rayleigh {ray:.1e}, affine residual {resid:.1e}, "
                         f"verdicts {sorted(verdicts)}")


# ---------------------------------------------------------------------------
# 7/8. polynomial slicing and generalized Vandermonde

def random_polynomial(rng, d, n):
    basis = multi_indices_upto(d, n)
    k = int(rng.integers(1, len(basis) + 1))
    pick = rng.choice(len(basis), k, replace=False)
    return Polynomial(d, {basis[i]: float(rng.normal()) or 1.0 for i in pick})


def check_slicing():
    t0 = time.perf_counter()
    missed = 0
    zero_ok = True
    for d, n in ((2, 2), (3, 2), (3, 3)):
        rng = np.random.default_rng([7, d, n])
        for i in range(1000):
            D = random_directions(d, n, seed=int(rng.integers(2**31)))
            missed += is_zero_by_slicing(random_polynomial(rng, d, n), D)
        zero_ok &= is_zero_by_slicing(Polynomial(d, {}), random_directions(d, n, seed=0))
    rng = np.random.default_rng(77)
    worst_norm = worst_slice = 0.0
    pairs = ((2, 2), (3, 2), (3, 3))
    for i in range(200):
        d, n = pairs[i % 3]
        V = rng.normal(size=(multichoose(d, n) - 1, d))
        q = optimality_counterexample(V, n)
        worst_norm = max(worst_norm, abs(math.sqrt(sum(c * c for c in q.coeffs.values())) - 1.0))
        worst_slice = max(worst_slice, max(float(np.max(np.abs(slice(q, v)))) for v in V))
    secs = time.perf_counter() - t0
    ok = missed == 0 and zero_ok and worst_norm <= 1e-12 and worst_slice <= 1e-9 and secs < 60
    return record(7, ok, f"nonzero accepted {missed}/3000, zero accepted {zero_ok}, counterexample norm error "
                         f"{worst_norm:.1e}, max slice {worst_slice:.1e}, {secs:.1f}s")


def check_vandermonde():
    rng = np.random.default_rng(8)
    worst = np.inf
    for _ in range(1000):
        k = int(rng.integers(1, 7))
        a = np.cumsum(rng.uniform(0.5, 1.5, k))
        lam = np.cumsum(rng.uniform(0.5, 1.5, k)) - 1.0
        A = generalized_vandermonde(a, lam)
        worst = min(worst, abs(np.linalg.det(A)) / hadamard_bound(A))
    hand = (generalized_vandermonde_det([1.0, 2.0], [0.0, 1.0]), generalized_vandermonde_det([1.0, 2.0, 3.0], [0.0, 1.0, 2.0]))
    ok = worst > 1e-12 and abs(hand[0] - 1) <= 1e-12 and abs(hand[1] - 2) <= 1e-12
    return record(8, ok, f"min |det|/Hadamard {worst:.1e}, hand dets {hand[0]:.15g} and {hand[1]:.15g}")


# ---------------------------------------------------------------------------
# 9. Gram matrix and efficiency

def gram_ratio(theta, mu):
    e = np.linalg.eigvalsh(gram(theta, SIGMOID, mu))
    return e[0] / e.sum()


def check_gram():
    rng = np.random.default_rng(9)
    worst_dup = 0.0
    for _ in range(50):
        base = ParameterVector.random(Topology(int(rng.integers(1, 4)), int(rng.integers(1, 4))), rng)
        th = extend_duplicate(base, int(rng.integers(base.m)), float(rng.uniform(0.2, 0.8)))
        worst_dup = max(worst_dup, gram_ratio(th, EmpiricalMeasure.uniform(rng.uniform(-8, 8, (2 * th.topology.dim, th.d)))))
    ratios = []
    while len(ratios) < 200:
        th = ParameterVector.random(Topology(int(rng.integers(1, 4)), int(rng.integers(1, 5))), rng)
        if not in_E0(th).ok:
            continue
        ratios.append(gram_ratio(th, EmpiricalMeasure.uniform(rng.uniform(-8, 8, (2 * th.topology.dim, th.d)))))
    ratios = np.array(ratios)
    low = int(np.sum(ratios <= 1e-12))
    ok = worst_dup <= 1e-10 and low == 0
    return record(9, ok, f"duplicate max min-eig/trace {worst_dup:.1e}; efficient min-eig/trace min {ratios.min():.1e}, "
                         f"{low}/200 at or below 1e-12")


# ---------------------------------------------------------------------------
# 10/12. Morse Monte Carlo and the bias condition at its critical points

MC_CONFIG = MorseMCConfig(Topology(1, 2), SIGMOID, MU1, Kernel("rbf"), trials=100, seed=0)


@functools.lru_cache(maxsize=None)
def mc_run():
    t0 = time.perf_counter()
    rep = morse_mc(MC_CONFIG)
    return rep, time.perf_counter() - t0


def check_morse():
    rep, secs = mc_run()
    ok = not rep.violations and secs < 300
    counts = rep.counts["efficient"]
    return record(10, ok, f"{len(rep.violations)} violations in {len({t for t, _ in rep.violations})} trials; "
                          f"efficient points {counts}; {secs:.0f}s")


def check_bias_condition():
    # targets whose search finds no efficient critical point say nothing; further targets replace them
    rep, _ = mc_run()
    sampler = GaussianTargetSampler(MC_CONFIG.measure, MC_CONFIG.kernel)
    extra_cfg = dataclasses.replace(MC_CONFIG, inject_duplication=False)
    good, used, skipped, smallest = 0, 0, 0, np.inf
    trial = 0
    while used < 100:
        recs = rep.points[trial] if trial < MC_CONFIG.trials else _mc_trial(extra_cfg, trial)[0]
        f = sample_target(sampler, trial_seed(MC_CONFIG.seed, trial).spawn(4)[0])
        trial += 1
        norms = [np.linalg.norm(bias_critical_condition(r.theta, SIGMOID, MC_CONFIG.measure, f))
                 for r in recs if r.converged and r.in_e0]
        if not norms:
            skipped += 1
            continue
        used += 1
        smallest = min(smallest, min(norms))
        good += min(norms) > 1e-6
    return record(12, good >= 99, f"{good}/100 trials above 1e-6 ({skipped} targets without efficient critical "
                                  f"points replaced); smallest norm {smallest:.1e}")


# ---------------------------------------------------------------------------
# 11/13. certified efficient minima

def separated_start(rng, m=2):
    # efficient by construction: distinct neuron centres, slopes and outer weights away from zero
    while True:
        c = np.sort(rng.uniform(-1.5, 1.5, m))
        if m == 1 or np.min(np.diff(c)) >= 0.75:
            break
    w = rng.choice([-1.0, 1.0], m) * rng.uniform(1, 3, m)
    v = rng.choice([-1.0, 1.0], m) * rng.uniform(1, 2, m)
    return ParameterVector(w[None, :], -w * c, v[:, None], [rng.normal()])


@functools.lru_cache(maxsize=None)
def certified_points():
    out = []
    for seed in range(20):
        th0 = separated_start(np.random.default_rng([11, seed]))
        pre = prescribe_radius(th0, SIGMOID, MU1)
        good = certify_efficient_minimum(th0, SIGMOID, MU1, Kernel("rbf"), 0.5 * pre.r_max, seed, pre.delta)
        bad = certify_efficient_minimum(th0, SIGMOID, MU1, Kernel("rbf"), 10 * pre.epsilon, seed, pre.delta)
        out.append((good, bad))
    return out


def check_certification():
    pts = certified_points()
    ok_good = sum(g.certified and g.grad_norm_star <= 1e-10 for g, _ in pts)
    ok_bad = sum(not b.certified for _, b in pts)
    worst = max(g.grad_norm_star for g, _ in pts)
    return record(11, ok_good == 20 and ok_bad == 20, f"certified {ok_good}/20 (max grad {worst:.1e}), "
                                                      f"refused at r = 10 eps {ok_bad}/20")


def check_reconstruction():
    worst, used = 0.0, 0
    for good, _ in certified_points():
        if not good.certified:
            continue
        th, f = good.theta_star, good.target
        det = np.linalg.det(hess_cost(th, SIGMOID, MU1, f))
        F = reconstruct_det_hessian(th, g2(th, SIGMOID, MU1, f), SIGMOID, MU1)
        worst = max(worst, abs(F - det) / abs(det))
        used += 1
    return record(13, used == 20 and worst <= 1e-6, f"max |F - det H|/|det H| {worst:.1e} over {used} points")


# ---------------------------------------------------------------------------

CHECKS = {1: check_derivatives, 2: check_decomposition, 3: check_symmetries, 4: check_admissibility,
          5: check_transforms, 6: check_lines, 7: check_slicing, 8: check_vandermonde, 9: check_gram,
          10: check_morse, 11: check_certification, 12: check_bias_condition, 13: check_reconstruction}
NAMES = {1: "derivative exactness", 2: "cost decomposition", 3: "activation symmetries", 4: "admissibility ranks",
         5: "transform suite", 6: "redundancy lines", 7: "polynomial slicing", 8: "generalized Vandermonde",
         9: "Gram and efficiency", 10: "Morse Monte Carlo", 11: "efficient-minimum certification",
         12: "bias condition", 13: "determinant reconstruction"}


def summary_lines():
    out = []
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        out.append(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {NAMES[n]}: {detail}")
    return out


@pytest.mark.slow
@pytest.mark.parametrize("n", sorted(CHECKS), ids=[f"{n:02d}_{NAMES[n].replace(' ', '_')}" for n in sorted(CHECKS)])
def test_criterion(n):
    ok = CHECKS[n]()
    print(summary_lines()[sorted(RESULTS).index(n)])
    assert ok, RESULTS[n][1]


if __name__ == "__main__":
    for n in sorted(CHECKS):
        CHECKS[n]()
        print(summary_lines()[sorted(RESULTS).index(n)], flush=True)
    sys.exit(0 if all(ok for ok, _ in RESULTS.values()) else 1)
