"""Mean squared error over a weighted finite input measure.

The population integrals of the theory become weighted sums over atoms, so
every quantity here is exact for a discrete input distribution.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, LabError, OutsideEfficientMargin
from .net_core import (Activation, ParameterVector, grad_response, hess_response,
                       jacobian_response, response)

DEACTIVATION_MARGIN = 1e-8


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=float)
        if atoms.ndim == 1:
            atoms = atoms[:, None]
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if atoms.ndim != 2 or atoms.shape[0] < 1:
            raise DimensionError("atoms must be a non-empty N x d matrix")
        if weights.shape != (atoms.shape[0],):
            raise DimensionError(f"{weights.shape[0]} weights for {atoms.shape[0]} atoms")
        if not (np.all(np.isfinite(atoms)) and np.all(np.isfinite(weights))):
            raise LabError("atoms and weights must be finite")
        if np.any(weights <= 0):
            raise LabError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise LabError(f"weights sum to {weights.sum()!r}, not 1")
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, atoms) -> "EmpiricalMeasure":
        atoms = np.asarray(atoms, dtype=float)
        n = atoms.shape[0]
        return cls(atoms, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.atoms.shape[0]

    @property
    def d(self) -> int:
        return self.atoms.shape[1]


@dataclass(frozen=True, eq=False)
class TargetFunction:
    values: np.ndarray
    noise_second_moment: float = 0.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise LabError("target values must be finite")
        if not self.noise_second_moment >= 0:
            raise LabError("noise second moment must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Regularizer:
    kind: str = "none"
    lam: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "ridge"):
            raise LabError(f"unknown regularizer {self.kind!r}")
        if not self.lam >= 0:
            raise LabError("regularization strength must be non-negative")

    def value(self, vec):
        return self.lam * float(vec @ vec) if self.kind == "ridge" else 0.0

    def grad(self, vec):
        return 2.0 * self.lam * vec if self.kind == "ridge" else np.zeros_like(vec)

    def hess(self, n):
        return 2.0 * self.lam * np.eye(n) if self.kind == "ridge" else np.zeros((n, n))


NO_REG = Regularizer()


def inner_product(a, b, mu: EmpiricalMeasure) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape[0] != mu.n or b.shape[0] != mu.n:
        raise DimensionError(f"vectors of length {a.shape[0]}, {b.shape[0]} on a measure with {mu.n} atoms")
    prod = a * b
    if prod.ndim > 1:
        prod = prod.reshape(mu.n, -1).sum(axis=1)
    return float(mu.weights @ prod)


def _target_matrix(theta, f, mu):
    vals = np.asarray(f.values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    if vals.shape != (mu.n, theta.o):
        raise DimensionError(f"target has shape {f.values.shape}, expected {mu.n} values per output ({theta.o})")
    return vals


def _check_measure(theta, mu):
    if mu.d != theta.d:
        raise DimensionError(f"measure has {mu.d} features, network expects {theta.d}")


def residual(theta, act, mu, f) -> np.ndarray:
    """Psi_theta - f on the atoms, shape (N, o)."""
    _check_measure(theta, mu)
    return response(theta, act, mu.atoms) - _target_matrix(theta, f, mu)


def cost(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure, f: TargetFunction,
         reg: Regularizer = NO_REG) -> float:
    r = residual(theta, act, mu, f)
    return inner_product(r, r, mu) + f.noise_second_moment + reg.value(theta.flatten())


@dataclass(frozen=True)
class Decomposition:
    regularization: float
    response_norm_sq: float
    correlation: float
    label_second_moment: float

    def recombine(self) -> float:
        return self.regularization + self.response_norm_sq - 2.0 * self.correlation + self.label_second_moment


def decomposition(theta, act, mu, f, reg: Regularizer = NO_REG) -> Decomposition:
    _check_measure(theta, mu)
    psi = response(theta, act, mu.atoms)
    fv = _target_matrix(theta, f, mu)
    return Decomposition(
        regularization=reg.value(theta.flatten()),
        response_norm_sq=inner_product(psi, psi, mu),
        correlation=inner_product(psi, fv, mu),
        label_second_moment=inner_product(fv, fv, mu) + f.noise_second_moment,
    )


def correlation(theta, act, mu, f) -> float:
    """The target-correlation term <Psi_theta, f>."""
    _check_measure(theta, mu)
    return inner_product(response(theta, act, mu.atoms), _target_matrix(theta, f, mu), mu)


def _scalar_residual(theta, act, mu, f):
    if theta.o != 1:
        raise DimensionError("cost derivatives are implemented for a single output")
    return residual(theta, act, mu, f)[:, 0]


def grad_cost(theta, act, mu, f, reg: Regularizer = NO_REG) -> np.ndarray:
    r = _scalar_residual(theta, act, mu, f)
    G = grad_response(theta, act, mu.atoms)
    return 2.0 * (mu.weights * r) @ G + reg.grad(theta.flatten())


def grad_cost_multi(theta, act, mu, f, reg: Regularizer = NO_REG) -> np.ndarray:
    """Cost gradient for any number of outputs (first order only)."""
    r = residual(theta, act, mu, f)
    jac = jacobian_response(theta, act, mu.atoms)
    return 2.0 * np.einsum("n,nl,nlp->p", mu.weights, r, jac) + reg.grad(theta.flatten())


def gram(theta, act, mu) -> np.ndarray:
    _check_measure(theta, mu)
    G = grad_response(theta, act, mu.atoms)
    return (G * mu.weights[:, None]).T @ G


def hess_cost(theta, act, mu, f, reg: Regularizer = NO_REG) -> np.ndarray:
    r = _scalar_residual(theta, act, mu, f)
    H = hess_response(theta, act, mu.atoms)
    out = 2.0 * gram(theta, act, mu) + 2.0 * np.tensordot(mu.weights * r, H, axes=1)
    out = out + reg.hess(theta.topology.dim)
    return 0.5 * (out + out.T)


def mean_term_grad(theta, act, mu, reg: Regularizer = NO_REG) -> np.ndarray:
    """Gradient of theta -> R(theta) + ||Psi_theta||^2."""
    _check_measure(theta, mu)
    psi = response(theta, act, mu.atoms)[:, 0]
    G = grad_response(theta, act, mu.atoms)
    return 2.0 * (mu.weights * psi) @ G + reg.grad(theta.flatten())


def mean_term_hessian(theta, act, mu, reg: Regularizer = NO_REG) -> np.ndarray:
    """Hessian of theta -> R(theta) + ||Psi_theta||^2."""
    _check_measure(theta, mu)
    psi = response(theta, act, mu.atoms)[:, 0]
    H = hess_response(theta, act, mu.atoms)
    out = 2.0 * gram(theta, act, mu) + 2.0 * np.tensordot(mu.weights * psi, H, axes=1)
    out = out + reg.hess(theta.topology.dim)
    return 0.5 * (out + out.T)


def correlation_hessian(theta, act, mu, f) -> np.ndarray:
    fv = _target_matrix(theta, f, mu)[:, 0]
    H = hess_response(theta, act, mu.atoms)
    return np.tensordot(mu.weights * fv, H, axes=1)


def g1(theta, act, mu, f, reg: Regularizer = NO_REG) -> np.ndarray:
    return grad_cost(theta, act, mu, f, reg)


def g2_slots(topology) -> list[tuple[int, int]]:
    """Hessian slots read by g2, in its fixed order.

    Three blocks: all (beta_j, beta_j); all (beta_j, w_ij); all
    (w_ij, w_kj) with i <= k.  Within each block neurons are outer and input
    indices inner, inputs taken in natural order.
    """
    t = topology
    d, m = t.input_dim, t.hidden
    slots = [(t.idx_b_hidden(j), t.idx_b_hidden(j)) for j in range(m)]
    slots += [(t.idx_b_hidden(j), t.idx_w_in(i, j)) for j in range(m) for i in range(d)]
    slots += [(t.idx_w_in(i, j), t.idx_w_in(k, j)) for j in range(m) for i in range(d) for k in range(i, d)]
    return slots


def g2(theta, act, mu, f) -> np.ndarray:
    if theta.o != 1:
        raise DimensionError("g2 is defined for a single output")
    H = correlation_hessian(theta, act, mu, f)
    return np.array([H[a, b] for a, b in g2_slots(theta.topology)])


def reconstruct_det_hessian(theta, g2_values, act, mu, reg: Regularizer = NO_REG,
                            margin: float = DEACTIVATION_MARGIN) -> float:
    """Determinant of the cost Hessian rebuilt from theta and the g2 values.

    The mixed (outer weight, inner parameter) entries of the correlation
    Hessian are replaced by the expressions they take at a critical point,
    so the result equals det of the cost Hessian only at critical points.
    """
    if theta.o != 1:
        raise DimensionError("reconstruction is defined for a single output")
    t = theta.topology
    outer = theta.w_out[:, 0]
    small = np.flatnonzero(np.abs(outer) <= margin)
    if small.size:
        raise OutsideEfficientMargin(f"outer weights of neurons {small.tolist()} are within {margin:g} of zero")
    slots = g2_slots(t)
    g2_values = np.asarray(g2_values, dtype=float)
    if g2_values.shape != (len(slots),):
        raise DimensionError(f"g2 has length {g2_values.shape}, expected {len(slots)}")
    mean_grad = mean_term_grad(theta, act, mu, reg)
    F = np.zeros((t.dim, t.dim))
    for (a, b), v in zip(slots, g2_values):
        F[a, b] = F[b, a] = v
    for j in range(t.hidden):
        k = t.idx_w_out(j)
        for p in t.inner_indices(j):
            F[k, p] = F[p, k] = mean_grad[p] / (2.0 * outer[j])
    return float(np.linalg.det(mean_term_hessian(theta, act, mu, reg) - 2.0 * F))


def eigensolve(A) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix."""
    return np.linalg.eigvalsh(0.5 * (A + A.T))


@dataclass(frozen=True, eq=False)
class CostReport:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    decomposition: Decomposition
    gram: np.ndarray
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        dec = self.decomposition
        return {
            "value": self.value,
            "gradient": self.gradient.tolist(),
            "gradient_norm": float(np.linalg.norm(self.gradient)),
            "hessian": self.hessian.tolist(),
            "decomposition": {
                "regularization": dec.regularization,
                "response_norm_sq": dec.response_norm_sq,
                "correlation": dec.correlation,
                "label_second_moment": dec.label_second_moment,
            },
            "gram": self.gram.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
        }


def cost_report(theta, act, mu, f, reg: Regularizer = NO_REG) -> CostReport:
    H = hess_cost(theta, act, mu, f, reg)
    return CostReport(
        value=cost(theta, act, mu, f, reg),
        gradient=grad_cost(theta, act, mu, f, reg),
        hessian=H,
        decomposition=decomposition(theta, act, mu, f, reg),
        gram=gram(theta, act, mu),
        eigenvalues=eigensolve(H),
    )


# ---------------------------------------------------------------------------
# probing balls in parameter space

def probe_points(center: np.ndarray, delta: float, n_random: int = 16, seed: int = 0) -> np.ndarray:
    """Center, the 2P axis points at distance delta, and random points of the closed ball."""
    P = center.shape[0]
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_random, P))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 1.0, n_random) ** (1.0 / P)
    offsets = np.vstack([np.zeros(P), np.eye(P), -np.eye(P), dirs * radii[:, None]])
    return center + delta * offsets


@dataclass(frozen=True)
class ConvexityCertificate:
    certified: bool
    rho: float
    grad_norm: float
    delta: float
    reason: str = ""


def strong_convexity_certificate(theta0, delta, act, mu, f, reg: Regularizer = NO_REG,
                                 n_random: int = 16, seed: int = 0) -> ConvexityCertificate:
    """Probe the Hessian spectrum on the ball of radius delta around theta0.

    rho is the smallest Hessian eigenvalue seen on the probe set; the ball is
    reported strongly convex when rho > 0 and ||grad J(theta0)|| < delta*rho/2.
    This is sampling evidence, not a rigorous enclosure.
    """
    if not delta > 0:
        raise LabError("delta must be positive")
    if n_random < 0:
        raise LabError("probe budget must be non-negative")
    t = theta0.topology
    grad_norm = float(np.linalg.norm(grad_cost(theta0, act, mu, f, reg)))
    rho = np.inf
    for point in probe_points(theta0.flatten(), delta, n_random, seed):
        H = hess_cost(ParameterVector.unflatten(t, point), act, mu, f, reg)
        rho = min(rho, eigensolve(H)[0])
    rho = float(rho)
    if rho <= 0:
        return ConvexityCertificate(False, rho, grad_norm, delta, f"Hessian not positive on ball: min eigenvalue {rho:.3e}")
    if grad_norm >= delta * rho / 2:
        return ConvexityCertificate(False, rho, grad_norm, delta,
                                    f"gradient too large: {grad_norm:.3e} >= delta*rho/2 = {delta * rho / 2:.3e}")
    return ConvexityCertificate(True, rho, grad_norm, delta)
