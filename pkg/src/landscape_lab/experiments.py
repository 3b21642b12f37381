"""Random targets and numerical experiments on the cost landscape.

Gaussian targets live on the atoms only: a finite-dimensional normal vector
with a strictly positive definite covariance.  Critical points are located
with a Levenberg-damped Newton iteration, which is a descent method, so the
points it reports are mostly local minima.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .efficiency import DEFAULT_TOL, e0_margin, in_E0, numeric_poly_efficiency_rank, taxonomy
from .errors import LabError
from .landscape import (NO_REG, EmpiricalMeasure, Regularizer, TargetFunction, cost, eigensolve,
                        grad_cost, gram, hess_cost, probe_points)
from .net_core import (Activation, ParameterVector, Topology, grad_response, hess_response,
                       response)
from .transforms import extend_deactivated_bias, extend_duplicate

THREADS_ENV = "LANDSCAPE_LAB_THREADS"


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _map_trials(fn, n):
    threads = min(thread_count(), max(n, 1))
    if threads == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def trial_seed(seed: int, trial: int) -> np.random.SeedSequence:
    """Seed of one trial, independent of scheduling."""
    return np.random.SeedSequence([seed, trial])


# ---------------------------------------------------------------------------
# Gaussian targets

@dataclass(frozen=True)
class Kernel:
    kind: str = "rbf"  # rbf | white
    bandwidth: Optional[float] = None  # rbf; None means the median pairwise atom distance
    variance: float = 1.0  # rbf amplitude, or sigma^2 for white

    def __post_init__(self):
        if self.kind not in ("rbf", "white"):
            raise LabError(f"unknown kernel {self.kind!r}")
        if self.variance < 0 or (self.bandwidth is not None and self.bandwidth <= 0):
            raise LabError("kernel variance must be >= 0 and bandwidth > 0")


@dataclass(frozen=True, eq=False)
class GaussianTargetSampler:
    mu: EmpiricalMeasure
    kernel: Kernel = Kernel()
    mean: Optional[np.ndarray] = None
    jitter: float = 1e-10

    def __post_init__(self):
        mean = np.zeros(self.mu.n) if self.mean is None else np.asarray(self.mean, dtype=float)
        if mean.shape != (self.mu.n,):
            raise LabError(f"mean has length {mean.shape[0]}, measure has {self.mu.n} atoms")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "_chol", np.linalg.cholesky(self.covariance()) if self.kernel.variance > 0 else None)

    def bandwidth(self) -> float:
        if self.kernel.bandwidth is not None:
            return self.kernel.bandwidth
        dist = pdist(self.mu.atoms)
        med = float(np.median(dist)) if dist.size else 1.0
        return med if med > 0 else 1.0

    def covariance(self) -> np.ndarray:
        n = self.mu.n
        if self.kernel.kind == "white":
            return self.kernel.variance * np.eye(n)
        D2 = squareform(pdist(self.mu.atoms, "sqeuclidean"))
        K = self.kernel.variance * np.exp(-D2 / (2.0 * self.bandwidth() ** 2))
        return K + self.jitter * np.eye(n)


def sample_target(sampler: GaussianTargetSampler, seed) -> TargetFunction:
    """One draw of the target on the atoms; a white kernel with zero variance returns the mean."""
    if sampler._chol is None:
        return TargetFunction(sampler.mean.copy())
    z = np.random.default_rng(seed).standard_normal(sampler.mu.n)
    return TargetFunction(sampler.mean + sampler._chol @ z)


# ---------------------------------------------------------------------------
# damped Newton

@dataclass(frozen=True)
class NewtonResult:
    theta: ParameterVector
    converged: bool
    iterations: int
    grad_norm: float
    value: float
    max_step: float


def damped_newton(theta0: ParameterVector, act: Activation, mu: EmpiricalMeasure, f: TargetFunction,
                  reg: Regularizer = NO_REG, max_iter: int = 500, damping: float = 1e-3,
                  grad_tol: Optional[float] = None, ball: Optional[tuple] = None,
                  blowup: float = 1e6) -> NewtonResult:
    """Levenberg-damped Newton descent on the cost.

    Steps solve (H + (damping + max(0, -eig_min(H))) I) s = -g, falling back
    to a scaled gradient step if that fails or is not a descent direction.  Accepted steps divide the damping by 3, rejected ones multiply
    it by 10.  Converged when ||g|| <= 1e-10 (1 + |J|), or ||g|| <= grad_tol
    if given.  ``ball=(center, radius)`` keeps iterates inside a closed ball.
    """
    t = theta0.topology
    x = theta0.flatten()
    unflat = lambda v: ParameterVector.unflatten(t, v)

    def evaluate(v):
        th = unflat(v)
        return cost(th, act, mu, f, reg), grad_cost(th, act, mu, f, reg), hess_cost(th, act, mu, f, reg)

    def done(J, g):
        limit = grad_tol if grad_tol is not None else 1e-10 * (1.0 + abs(J))
        return np.linalg.norm(g) <= limit

    J, g, H = evaluate(x)
    lam, max_step, it = damping, 0.0, 0
    eye = np.eye(t.dim)
    for it in range(max_iter):
        if done(J, g):
            return NewtonResult(unflat(x), True, it, float(np.linalg.norm(g)), J, max_step)
        # shift past negative curvature so the damped system stays positive definite
        shift = lam + max(0.0, -float(np.linalg.eigvalsh(H)[0]))
        try:
            L = np.linalg.cholesky(H + shift * eye)
            s = -np.linalg.solve(L.T, np.linalg.solve(L, g))
            if not g @ s < 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            s = -g / (shift + np.linalg.norm(H, 2))
        if ball is not None:
            center, radius = ball
            off = x + s - center
            nrm = np.linalg.norm(off)
            if nrm > radius:
                s = center + off * (radius / nrm) - x
        x_new = x + s
        if not np.all(np.isfinite(x_new)) or np.max(np.abs(x_new)) > blowup:
            break
        J_new, g_new, H_new = evaluate(x_new)
        tiny = 1e-13 * (1.0 + abs(J))
        if J_new < J or (J_new <= J + tiny and np.linalg.norm(g_new) < np.linalg.norm(g)):
            max_step = max(max_step, float(np.linalg.norm(s)))
            x, J, g, H = x_new, J_new, g_new, H_new
            lam = max(lam / 3.0, 1e-15)
        else:
            lam *= 10.0
            if lam > 1e20:
                break
    else:
        it = max_iter
    return NewtonResult(unflat(x), bool(done(J, g)), it, float(np.linalg.norm(g)), J, max_step)


# ---------------------------------------------------------------------------
# critical points

@dataclass(frozen=True, eq=False)
class CritPointRecord:
    theta: ParameterVector
    grad_norm: float
    value: float
    eigenvalues: np.ndarray
    in_e0: bool
    e0_margin: float
    classification: str  # min | saddle | degenerate
    converged: bool = True
    start: int = 0
    newton_step: float = 0.0  # ||H^-1 grad||: estimated distance to an exact zero of the gradient

    @property
    def nondegeneracy(self) -> float:
        a = np.abs(self.eigenvalues)
        return float(a.min() / a.max()) if a.size and a.max() > 0 else 0.0

    def to_dict(self) -> dict:
        return {"theta": self.theta.flatten().tolist(), "grad_norm": self.grad_norm, "value": self.value,
                "eigenvalues": self.eigenvalues.tolist(), "in_e0": self.in_e0, "e0_margin": self.e0_margin,
                "classification": self.classification, "converged": self.converged, "start": self.start,
                "newton_step": self.newton_step}


def classify_spectrum(eigs, degeneracy_tol: float = 1e-8) -> str:
    a = np.abs(eigs)
    if a.size == 0 or a.min() <= degeneracy_tol * a.max():
        return "degenerate"
    return "min" if eigs[0] > 0 else "saddle"


def critical_record(theta, act, mu, f, reg=NO_REG, degeneracy_tol=1e-8, tau=1e-4,
                    converged=True, start=0) -> CritPointRecord:
    eigs, vecs = np.linalg.eigh(hess_cost(theta, act, mu, f, reg))
    g = grad_cost(theta, act, mu, f, reg)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = float(np.linalg.norm(vecs @ ((vecs.T @ g) / eigs))) if np.all(eigs != 0) else np.inf
    margin = e0_margin(theta)
    return CritPointRecord(theta, float(np.linalg.norm(g)), cost(theta, act, mu, f, reg), eigs,
                           bool(margin > tau), margin, classify_spectrum(eigs, degeneracy_tol), converged,
                           start, step)


def find_critical_points(mu: EmpiricalMeasure, f: TargetFunction, topology: Topology, act: Activation,
                         reg: Regularizer = NO_REG, n_starts: int = 8, seed: int = 0, init_scale: float = 1.0,
                         starts=None, degeneracy_tol: float = 1e-8, tau: float = 1e-4,
                         max_iter: int = 500) -> list:
    """Multistart damped Newton.  Converged points are deduplicated at
    parameter distance 1e-6; starts that fail to converge are returned with
    ``converged=False``."""
    if topology.output_dim != 1:
        raise LabError("critical-point search is implemented for a single output")
    if starts is None:
        root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        rngs = [np.random.default_rng(s) for s in root.spawn(n_starts)]
        starts = [ParameterVector.random(topology, r, init_scale) for r in rngs]
    found, failed = [], []
    for k, th0 in enumerate(starts):
        res = damped_newton(th0, act, mu, f, reg, max_iter=max_iter)
        if not res.converged:
            failed.append(critical_record(res.theta, act, mu, f, reg, degeneracy_tol, tau, False, k))
            continue
        v = res.theta.flatten()
        if any(np.linalg.norm(v - r.theta.flatten()) <= 1e-6 for r in found):
            continue
        found.append(critical_record(res.theta, act, mu, f, reg, degeneracy_tol, tau, True, k))
    return found + failed


def rayleigh_quotient(H, d) -> float:
    """|d^T H d| / (||H|| ||d||^2) with the spectral norm."""
    return float(abs(d @ H @ d) / (np.linalg.norm(H, 2) * (d @ d)))


# ---------------------------------------------------------------------------
# Morse Monte Carlo

@dataclass(frozen=True, eq=False)
class MorseMCConfig:
    topology: Topology
    activation: Activation
    measure: EmpiricalMeasure
    kernel: Kernel = Kernel()
    trials: int = 100
    seed: int = 0
    tau: float = 1e-4
    degeneracy_tol: float = 1e-8
    n_starts: int = 8
    init_scale: float = 1.0
    inject_duplication: bool = True


@dataclass(frozen=True, eq=False)
class MCReport:
    trials: int
    points: list  # per trial: list of CritPointRecord
    counts: dict
    min_nondegeneracy: float
    violations: list  # (trial, point index)
    injected: list  # per injected redundant point: dict(trial, grad_norm, rayleigh, nondegeneracy)
    nonconverged: int

    @property
    def max_injected_rayleigh(self) -> float:
        return max((r["rayleigh"] for r in self.injected), default=0.0)

    def to_dict(self) -> dict:
        return {"trials": self.trials, "counts": self.counts, "min_nondegeneracy": self.min_nondegeneracy,
                "violations": [list(v) for v in self.violations], "violation_details": self.violation_details(),
                "nonconverged": self.nonconverged,
                "injected": self.injected, "max_injected_rayleigh": self.max_injected_rayleigh,
                "points": [[p.to_dict() for p in pts] for pts in self.points]}

    def violation_details(self) -> list:
        out = []
        for trial, k in self.violations:
            p = self.points[trial][k]
            out.append({"trial": trial, "point": k, "nondegeneracy": p.nondegeneracy, "e0_margin": p.e0_margin,
                        "value": p.value, "newton_step": p.newton_step,
                        "max_abs_param": float(np.max(np.abs(p.theta.flatten())))})
        return out

    def csv_rows(self):
        for trial, pts in enumerate(self.points):
            for k, p in enumerate(pts):
                yield trial, k, float(p.eigenvalues[0]), float(p.eigenvalues[-1]), int(p.in_e0)


def _mc_trial(cfg: MorseMCConfig, trial: int):
    target_seed, search_seed, small_seed, mix_seed = trial_seed(cfg.seed, trial).spawn(4)
    sampler = GaussianTargetSampler(cfg.measure, cfg.kernel)
    f = sample_target(sampler, target_seed)
    recs = find_critical_points(cfg.measure, f, cfg.topology, cfg.activation, n_starts=cfg.n_starts,
                                seed=search_seed, init_scale=cfg.init_scale,
                                degeneracy_tol=cfg.degeneracy_tol, tau=cfg.tau)
    recs = [r for r in recs if r.converged] + [r for r in recs if not r.converged]
    injected = []
    t = cfg.topology
    if cfg.inject_duplication and t.hidden >= 2:
        small = Topology(t.input_dim, t.hidden - 1, 1)
        rng = np.random.default_rng(mix_seed)
        for base in find_critical_points(cfg.measure, f, small, cfg.activation, n_starts=max(2, cfg.n_starts // 2),
                                         seed=small_seed, init_scale=cfg.init_scale):
            if not base.converged or not base.in_e0:
                continue
            src = int(rng.integers(small.hidden))
            theta = extend_duplicate(base.theta, src, float(rng.uniform(0.2, 0.8)))
            H = hess_cost(theta, cfg.activation, cfg.measure, f)
            d = np.zeros(t.dim)
            d[t.idx_w_out(src)], d[t.idx_w_out(t.hidden - 1)] = 1.0, -1.0
            eigs = eigensolve(H)
            injected.append({"trial": trial,
                             "grad_norm": float(np.linalg.norm(grad_cost(theta, cfg.activation, cfg.measure, f))),
                             "rayleigh": rayleigh_quotient(H, d),
                             "nondegeneracy": float(np.min(np.abs(eigs)) / np.max(np.abs(eigs)))})
    return recs, injected


def morse_mc(cfg: MorseMCConfig) -> MCReport:
    if cfg.topology.output_dim != 1:
        raise LabError("the Monte-Carlo probe needs a single output")
    results = _map_trials(lambda i: _mc_trial(cfg, i), cfg.trials)
    counts = {region: {"min": 0, "saddle": 0, "degenerate": 0} for region in ("efficient", "redundant")}
    violations, injected, nonconv = [], [], 0
    min_nd = np.inf
    for trial, (recs, inj) in enumerate(results):
        injected.extend(inj)
        for k, r in enumerate(recs):
            if not r.converged:
                nonconv += 1
                continue
            region = "efficient" if r.in_e0 else "redundant"
            counts[region][r.classification] += 1
            if r.in_e0:
                min_nd = min(min_nd, r.nondegeneracy)
                if r.classification == "degenerate":
                    violations.append((trial, k))
    return MCReport(cfg.trials, [recs for recs, _ in results], counts,
                    float(min_nd) if np.isfinite(min_nd) else None, violations, injected, nonconv)


# ---------------------------------------------------------------------------
# certification of efficient minima

def lambda_bounds(theta0: ParameterVector, delta: float, act: Activation, mu: EmpiricalMeasure,
                  n_random: int = 16, seed: int = 0) -> tuple[float, float]:
    """(lower, upper): the smallest Gram eigenvalue and the largest value of
    sqrt(sum_n w_n ||Hess Psi(x_n)||^2) over the probe set of the ball."""
    t = theta0.topology
    lower, upper = np.inf, 0.0
    for v in probe_points(theta0.flatten(), delta, n_random, seed):
        th = ParameterVector.unflatten(t, v)
        lower = min(lower, float(eigensolve(gram(th, act, mu))[0]))
        Hs = hess_response(th, act, mu.atoms)
        ops = np.array([np.max(np.abs(np.linalg.eigvalsh(h))) if h.size else 0.0 for h in Hs])
        upper = max(upper, float(np.sqrt(mu.weights @ ops ** 2)))
    return lower, upper


def response_spread(theta0, delta, act, mu, f_values=None, n_random: int = 16, seed: int = 0) -> float:
    """max over the probe set of ||Psi_theta - g||, g = f_values or Psi_theta0."""
    t = theta0.topology
    ref = response(theta0, act, mu.atoms)[:, 0] if f_values is None else f_values
    worst = 0.0
    for v in probe_points(theta0.flatten(), delta, n_random, seed):
        diff = response(ParameterVector.unflatten(t, v), act, mu.atoms)[:, 0] - ref
        worst = max(worst, float(np.sqrt(mu.weights @ diff ** 2)))
    return worst


def gradient_field_norm(theta, act, mu) -> float:
    G = grad_response(theta, act, mu.atoms)
    return float(np.sqrt(mu.weights @ np.sum(G ** 2, axis=1)))


@dataclass(frozen=True)
class Prescription:
    delta: float
    rho: float
    epsilon: float
    lambda_upper: float
    r_max: float


def prescribe_radius(theta0, act, mu, delta0: float = 1.0, n_random: int = 16, probe_seed: int = 0,
                     max_halvings: int = 60) -> Prescription:
    """Ball radius and noise bound under which certification is guaranteed.

    delta is halved until responses on the ball stay within epsilon/2 of
    Psi_theta0; then any r < r_max = min(epsilon/4, delta rho / (4 ||grad Psi||))
    gives ||Psi_theta - f|| < epsilon on the ball and ||grad J(theta0)|| <= 2 r ||grad Psi|| < delta rho / 2.
    """
    delta = delta0
    for _ in range(max_halvings):
        lo, hi = lambda_bounds(theta0, delta, act, mu, n_random, probe_seed)
        if lo > 0:
            eps = np.inf if hi == 0 else lo / (2.0 * hi)
            if response_spread(theta0, delta, act, mu, None, n_random, probe_seed) <= eps / 2:
                gnorm = gradient_field_norm(theta0, act, mu)
                r_max = min(eps / 4, delta * lo / (4.0 * gnorm))
                return Prescription(delta, lo, float(eps), hi, float(r_max))
        delta /= 2.0
    raise LabError("no admissible ball radius found; the Gram matrix may be singular at theta0")


@dataclass(frozen=True, eq=False)
class Certification:
    certified: bool
    delta: float
    rho: float
    epsilon: float
    lambda_lower: float
    lambda_upper: float
    grad_norm0: float
    min_hessian_eig: float
    theta_star: Optional[ParameterVector] = None
    grad_norm_star: Optional[float] = None
    reason: str = ""
    target: Optional[TargetFunction] = None

    def to_dict(self) -> dict:
        return {"certified": self.certified, "delta": self.delta, "rho": self.rho, "epsilon": self.epsilon,
                "lambda_lower": self.lambda_lower, "lambda_upper": self.lambda_upper,
                "grad_norm0": self.grad_norm0, "min_hessian_eig": self.min_hessian_eig,
                "theta_star": None if self.theta_star is None else self.theta_star.flatten().tolist(),
                "grad_norm_star": self.grad_norm_star, "reason": self.reason}


def perturbed_target(theta0, act, mu, kernel: Kernel, r: float, seed) -> TargetFunction:
    """Psi_theta0 plus a Gaussian direction rescaled to norm exactly r."""
    base = response(theta0, act, mu.atoms)[:, 0]
    if r == 0:
        return TargetFunction(base)
    u = sample_target(GaussianTargetSampler(mu, kernel), seed).values
    nrm = float(np.sqrt(mu.weights @ u ** 2))
    if nrm == 0:
        raise LabError("the perturbation direction vanished")
    return TargetFunction(base + (r / nrm) * u)


def certify_efficient_minimum(theta0: ParameterVector, act: Activation, mu: EmpiricalMeasure, kernel: Kernel,
                              r: float, seed: int, delta: float, n_random: int = 16, probe_seed: int = 0,
                              grad_tol: float = 1e-10) -> Certification:
    """Certify a strongly convex ball around theta0 for a target within r of Psi_theta0.

    Conditions checked on the probe set of the ball B(theta0, delta):
    ||Psi_theta - f|| <= epsilon = lower/(2 upper), which makes the Hessian at
    least rho = lower; and ||grad J(theta0)|| < delta rho / 2.  On success a
    damped Newton descent confined to the ball locates the minimum.
    """
    if r < 0 or delta <= 0:
        raise LabError("need r >= 0 and delta > 0")
    if theta0.o != 1:
        raise LabError("certification needs a single output")
    if mu.n < 2 or not numeric_poly_efficiency_rank(theta0, act, mu, (0, 0, 1)).full_rank:
        raise LabError("theta0 is not numerically (0,0,1)-polynomially efficient on these atoms")
    f = perturbed_target(theta0, act, mu, kernel, r, seed)
    lo, hi = lambda_bounds(theta0, delta, act, mu, n_random, probe_seed)
    eps = np.inf if hi == 0 else lo / (2.0 * hi)
    rho = lo
    g0 = float(np.linalg.norm(grad_cost(theta0, act, mu, f)))
    t = theta0.topology
    min_eig = min(float(eigensolve(hess_cost(ParameterVector.unflatten(t, v), act, mu, f))[0])
                  for v in probe_points(theta0.flatten(), delta, n_random, probe_seed))
    common = dict(delta=delta, rho=rho, epsilon=float(eps), lambda_lower=lo, lambda_upper=hi,
                  grad_norm0=g0, min_hessian_eig=min_eig, target=f)
    if lo <= 0:
        return Certification(False, reason=f"Gram matrix not positive on the ball (min eigenvalue {lo:.3e})", **common)
    spread = response_spread(theta0, delta, act, mu, f.values, n_random, probe_seed)
    if spread > eps:
        return Certification(False, reason=f"response misfit on the ball {spread:.3e} exceeds epsilon {eps:.3e}", **common)
    if g0 >= delta * rho / 2:
        return Certification(False, reason=f"||grad J(theta0)|| = {g0:.3e} >= delta*rho/2 = {delta * rho / 2:.3e}", **common)
    if min_eig < rho * (1 - 1e-9):
        return Certification(False, reason=f"probed Hessian eigenvalue {min_eig:.3e} below rho {rho:.3e}", **common)
    res = damped_newton(theta0, act, mu, f, grad_tol=grad_tol, ball=(theta0.flatten(), delta))
    return Certification(res.converged, theta_star=res.theta, grad_norm_star=res.grad_norm,
                         reason="" if res.converged else "descent inside the ball did not converge", **common)


# ---------------------------------------------------------------------------
# redundant critical points built from efficient ones

@dataclass(frozen=True, eq=False)
class DemoConfig:
    measure: EmpiricalMeasure
    activation: Activation
    small_hidden: int = 1
    kernel: Kernel = Kernel()
    noise: float = 0.05
    trials: int = 100
    seed: int = 0
    tau: float = 1e-4


@dataclass(frozen=True)
class DemoReport:
    trials: int
    duplication_ok: int
    bias_ok: int
    records: list

    def to_dict(self) -> dict:
        return {"trials": self.trials, "duplication_ok": self.duplication_ok, "bias_ok": self.bias_ok,
                "records": self.records}


def _check_extended(theta, line_dir, act, mu, f):
    g = float(np.linalg.norm(grad_cost(theta, act, mu, f)))
    H = hess_cost(theta, act, mu, f)
    eigs = np.abs(eigensolve(H))
    nd = float(eigs.min() / eigs.max())
    rq = rayleigh_quotient(H, line_dir)
    return {"grad_norm": g, "nondegeneracy": nd, "rayleigh": rq, "ok": g <= 1e-8 and nd <= 1e-8 and rq <= 1e-8}


def _demo_trial(cfg: DemoConfig, trial: int) -> dict:
    mu, act = cfg.measure, cfg.activation
    net_seed, noise_seed, mix_seed = trial_seed(cfg.seed, trial).spawn(3)
    small = Topology(mu.d, cfg.small_hidden, 1)
    rng = np.random.default_rng(net_seed)
    theta_s = ParameterVector.random(small, rng)
    f = perturbed_target(theta_s, act, mu, cfg.kernel, cfg.noise, noise_seed)
    res = damped_newton(theta_s, act, mu, f)
    rec = {"trial": trial, "base_converged": res.converged, "base_grad_norm": res.grad_norm}
    if not res.converged or e0_margin(res.theta) <= cfg.tau:
        rec.update(duplication={"ok": False}, bias={"ok": False})
        return rec
    base = res.theta
    mix = np.random.default_rng(mix_seed)
    src = int(mix.integers(base.m))
    dup = extend_duplicate(base, src, float(mix.uniform(0.2, 0.8)))
    t = dup.topology
    d = np.zeros(t.dim)
    d[t.idx_w_out(src)], d[t.idx_w_out(t.hidden - 1)] = 1.0, -1.0
    rec["duplication"] = _check_extended(dup, d, act, mu, f)
    ext = extend_deactivated_bias(base, float(mix.standard_normal()))
    d = np.zeros(t.dim)
    d[t.idx_b_hidden(t.hidden - 1)] = 1.0
    rec["bias"] = _check_extended(ext, d, act, mu, f)
    return rec


def redundant_critical_demo(cfg: DemoConfig) -> DemoReport:
    records = _map_trials(lambda i: _demo_trial(cfg, i), cfg.trials)
    return DemoReport(cfg.trials, sum(r["duplication"]["ok"] for r in records),
                      sum(r["bias"]["ok"] for r in records), records)
