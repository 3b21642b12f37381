"""Response-preserving edits of a network: pruning redundant neurons,
inserting redundant ones, and straight lines of constant response through a
redundant parameter.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .efficiency import DEFAULT_TOL, ToleranceConfig, _pair_close, neuron_outputs
from .errors import DimensionError, LabError
from .landscape import (NO_REG, EmpiricalMeasure, Regularizer, TargetFunction, grad_cost_multi,
                        residual)
from .net_core import Activation, ParameterVector, response

PRUNE_TOL = 1e-9
AFFINE_POINTS = (-1.0, 0.0, 1.0, 2.0)


# ---------------------------------------------------------------------------
# pruning

@dataclass(frozen=True)
class PruneStep:
    removed: int  # index in the network as it was when this step ran
    kind: str  # deactivation | bias | dependence
    lam: Optional[tuple] = None  # (lambda_const, lambda over the remaining neurons)
    residual: float = 0.0

    def to_dict(self) -> dict:
        return {"removed": self.removed, "kind": self.kind,
                "lambda": None if self.lam is None else list(self.lam), "residual": self.residual}

    @classmethod
    def from_dict(cls, data) -> "PruneStep":
        lam = data.get("lambda")
        return cls(int(data["removed"]), data["kind"], None if lam is None else tuple(lam), float(data.get("residual", 0.0)))


@dataclass(frozen=True)
class PruneTrace:
    steps: tuple
    final: ParameterVector

    def to_dict(self) -> dict:
        t = self.final.topology
        return {"steps": [s.to_dict() for s in self.steps],
                "final_topology": {"input_dim": t.input_dim, "hidden": t.hidden, "output_dim": t.output_dim}}


def remove_neuron(theta: ParameterVector, k: int, lam=None) -> ParameterVector:
    """Drop hidden neuron k, folding psi_k = lam_const + sum_j lam_j psi_j into the
    outer layer.  ``lam`` lists lam_const then one coefficient per remaining neuron."""
    keep = [j for j in range(theta.m) if j != k]
    w_out, b_out = theta.w_out[keep].copy(), theta.b_out.copy()
    if lam is not None:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (len(keep) + 1,):
            raise DimensionError(f"lambda needs {len(keep) + 1} entries, got {lam.shape[0]}")
        w_out = w_out + lam[1:, None] * theta.w_out[k][None, :]
        b_out = b_out + lam[0] * theta.w_out[k]
    return ParameterVector(theta.w_in[:, keep], theta.b_hidden[keep], w_out, b_out)


def replay(theta: ParameterVector, steps) -> ParameterVector:
    for step in steps:
        theta = remove_neuron(theta, step.removed, step.lam)
    return theta


def prune_deactivated(theta: ParameterVector, tol: ToleranceConfig = DEFAULT_TOL):
    steps = []
    for j in reversed(range(theta.m)):
        if np.linalg.norm(theta.w_out[j]) <= tol.zero_abs:
            steps.append(PruneStep(j, "deactivation"))
    final = replay(theta, steps)
    return final, PruneTrace(tuple(steps), final)


def _best_dependence(theta, act, mu, tol):
    """Neuron whose output is best explained by the constant and the others."""
    psi = neuron_outputs(theta, act, mu)
    ones = np.ones((mu.n, 1))
    best = None
    for k in range(theta.m):
        others = np.hstack([ones, np.delete(psi, k, axis=1)])
        norms = np.linalg.norm(others, axis=0)
        safe = np.where(norms > 0, norms, 1.0)
        coef, *_ = np.linalg.lstsq(others / safe, psi[:, k], rcond=None)
        coef = coef / safe
        if not np.all(np.isfinite(coef)):
            raise LabError("least-squares fit of a neuron output did not produce finite coefficients")
        res = float(np.linalg.norm(others @ coef - psi[:, k]))
        if best is None or res < best[1]:
            best = (k, res, coef)
    return best


def prune_linear_dependence(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure,
                            tol: float = PRUNE_TOL, tols: ToleranceConfig = DEFAULT_TOL):
    """Remove neurons whose outputs on the atoms are affine combinations of the others.

    Deactivated neurons go first; afterwards the neuron with the smallest
    least-squares residual is removed while that residual is at most
    tol * sqrt(N).
    """
    if mu.d != theta.d:
        raise DimensionError(f"measure has {mu.d} features, network expects {theta.d}")
    steps = []
    current = theta
    while True:
        current, trace = prune_deactivated(current, tols)
        steps.extend(trace.steps)
        if current.m == 0:
            break
        k, res, coef = _best_dependence(current, act, mu, tol)
        if res > tol * np.sqrt(mu.n):
            break
        step = PruneStep(k, "dependence", tuple(float(c) for c in coef), res)
        current = remove_neuron(current, k, step.lam)
        steps.append(step)
    return current, PruneTrace(tuple(steps), current)


def _other_redundancy(theta, tols, act_kind, ignore):
    rest = [j for j in range(theta.m) if j not in ignore]
    if any(np.linalg.norm(theta.w_out[j]) <= tols.zero_abs for j in range(theta.m)):
        return "deactivation"
    for a in range(len(rest)):
        for b in range(a + 1, len(rest)):
            u, v = theta.neuron_vector(rest[a]), theta.neuron_vector(rest[b])
            if _pair_close(u, v, tols.pair_rel):
                return "duplication"
            if act_kind in ("sigmoid", "tanh") and _pair_close(u, -v, tols.pair_rel):
                return "sign pair"
    return None


def prune_bias_oneshot(theta: ParameterVector, act: Activation, tols: ToleranceConfig = DEFAULT_TOL):
    """Remove every neuron with zero input weights and shift the output bias by
    sum_j w_j psi(beta_j).

    Only structural redundancies are screened for the precondition
    (deactivations, duplicate pairs and, for sigmoid/tanh, sign pairs);
    dependencies visible only on data are not.
    """
    I = [j for j in range(theta.m) if np.linalg.norm(theta.w_in[:, j]) <= tols.zero_abs]
    other = _other_redundancy(theta, tols, act.kind, I)
    if other:
        raise LabError(f"one-shot bias pruning needs bias redundancies only; found {other}")
    steps = []
    for j in reversed(I):
        remaining = theta.m - len(steps) - 1
        steps.append(PruneStep(j, "bias", (float(act(theta.b_hidden[j])),) + (0.0,) * remaining))
    final = replay(theta, steps)
    return final, PruneTrace(tuple(steps), final)


# ---------------------------------------------------------------------------
# extension

def extend_duplicate(theta: ParameterVector, source: int, lam_mix: float) -> ParameterVector:
    """Append a copy of neuron ``source``; the copy gets lam_mix of its outer
    weights and the source keeps the rest."""
    if not 0 <= source < theta.m:
        raise LabError(f"source neuron {source} out of range for {theta.m} hidden neurons")
    if lam_mix in (0.0, 1.0) or not np.isfinite(lam_mix):
        raise LabError("the split must differ from 0 and 1, otherwise a neuron is deactivated")
    w_out = theta.w_out.copy()
    new_row = lam_mix * w_out[source]
    w_out[source] = (1.0 - lam_mix) * w_out[source]
    return ParameterVector(np.column_stack([theta.w_in, theta.w_in[:, source]]),
                           np.append(theta.b_hidden, theta.b_hidden[source]),
                           np.vstack([w_out, new_row]), theta.b_out)


def extend_deactivated_bias(theta: ParameterVector, beta_new: float) -> ParameterVector:
    """Append a neuron with no input or output edges and bias beta_new."""
    return ParameterVector(np.column_stack([theta.w_in, np.zeros(theta.d)]),
                           np.append(theta.b_hidden, float(beta_new)),
                           np.vstack([theta.w_out, np.zeros((1, theta.o))]), theta.b_out)


# ---------------------------------------------------------------------------
# redundancy lines

@dataclass(frozen=True, eq=False)
class RedundancyLine:
    base: ParameterVector
    lam: Optional[np.ndarray]  # (lambda_const, lambda_1..lambda_m) or None for a deactivation line
    direction: np.ndarray  # d theta / dt in flat coordinates
    kind: str  # dependence | deactivation
    neuron: Optional[int] = None

    def at(self, t: float) -> ParameterVector:
        return ParameterVector.unflatten(self.base.topology, self.base.flatten() + t * self.direction)


def redundancy_line(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure, lam=None,
                    tol: float = PRUNE_TOL, tols: ToleranceConfig = DEFAULT_TOL) -> RedundancyLine:
    """Line of constant response through theta.

    With ``lam`` the outer weights move as w_jk + t lam_j and the output
    biases as beta_k + t lam_const; lam must satisfy
    lam_const + sum_j lam_j psi_j = 0 on the atoms up to tol*sqrt(N) (relative
    to max|lam|).  Without ``lam`` theta needs a deactivated neuron and the
    line moves that neuron's bias.
    """
    t = theta.topology
    if lam is None:
        dead = [j for j in range(theta.m) if np.linalg.norm(theta.w_out[j]) <= tols.zero_abs]
        if not dead:
            raise LabError("no dependency coefficients given and no deactivated neuron to move")
        direction = np.zeros(t.dim)
        direction[t.idx_b_hidden(dead[0])] = 1.0
        return RedundancyLine(theta, None, direction, "deactivation", dead[0])
    lam = np.asarray(lam, dtype=float)
    if lam.shape != (theta.m + 1,):
        raise DimensionError(f"lambda needs {theta.m + 1} entries, got {lam.shape[0]}")
    scale = np.max(np.abs(lam))
    if scale == 0:
        raise LabError("lambda must be nonzero")
    combo = lam[0] + neuron_outputs(theta, act, mu) @ lam[1:]
    res = float(np.linalg.norm(combo))
    if res > tol * np.sqrt(mu.n) * scale:
        raise LabError(f"lambda is not a dependency on the atoms: residual {res:.3e}")
    direction = np.zeros(t.dim)
    for j in range(theta.m):
        for l in range(theta.o):
            direction[t.idx_w_out(j, l)] = lam[1 + j]
    for l in range(theta.o):
        direction[t.idx_b_out(l)] = lam[0]
    return RedundancyLine(theta, lam, direction, "dependence")


def line_response_check(line: RedundancyLine, act: Activation, mu: EmpiricalMeasure, t_grid) -> float:
    base = response(line.base, act, mu.atoms)
    return float(max(np.max(np.abs(response(line.at(t), act, mu.atoms) - base)) for t in t_grid))


@dataclass(frozen=True, eq=False)
class LineCriticality:
    verdict: str  # all_critical | at_most_one | none
    root: Optional[float]
    coefficients: dict  # flat index -> (value at 0, slope)
    affine_residual: float
    outer_drift: float

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "root": self.root,
                "coefficients": {str(k): list(v) for k, v in self.coefficients.items()},
                "affine_residual": self.affine_residual, "outer_drift": self.outer_drift}


def criticality_along_line(line: RedundancyLine, act: Activation, mu: EmpiricalMeasure,
                           f: TargetFunction, reg: Regularizer = NO_REG, zero_tol: float = 1e-8) -> LineCriticality:
    """Classify the critical points on a redundancy line.

    Inner partial derivatives are affine in t along the line and the outer
    ones are constant.  The inner partials are fitted on t = -1, 0, 1 and the
    fit is checked at all four collocation points.
    """
    t = line.base.topology
    grads = np.array([grad_cost_multi(line.at(s), act, mu, f, reg) for s in AFFINE_POINTS])
    inner = [p for j in range(t.hidden) for p in t.inner_indices(j)]
    outer = t.outer_indices()
    ts = np.array(AFFINE_POINTS)
    V = np.column_stack([np.ones(3), ts[:3]])
    coef, *_ = np.linalg.lstsq(V, grads[:3][:, inner], rcond=None)  # rows: value at 0, slope
    fitted = np.column_stack([np.ones(4), ts]) @ coef
    scale = 1.0 + float(np.max(np.abs(grads))) if grads.size else 1.0
    affine_residual = float(np.max(np.abs(fitted - grads[:, inner]))) if inner else 0.0
    if affine_residual > 1e-9 * scale:
        raise LabError(f"inner partials are not affine along the line (residual {affine_residual:.3e}); this is a bug")
    outer_drift = float(np.max(np.abs(grads[:, outer] - grads[1, outer])))
    coefficients = {p: (float(coef[0, n]), float(coef[1, n])) for n, p in enumerate(inner)}

    tiny = zero_tol * scale
    if np.any(np.abs(grads[1, outer]) > tiny):
        return LineCriticality("none", None, coefficients, affine_residual, outer_drift)
    roots = []
    for a, b in coefficients.values():
        if abs(b) <= tiny:
            if abs(a) > tiny:
                return LineCriticality("none", None, coefficients, affine_residual, outer_drift)
        else:
            roots.append(-a / b)
    if not roots:
        return LineCriticality("all_critical", None, coefficients, affine_residual, outer_drift)
    root = roots[0]
    for (a, b) in coefficients.values():
        if abs(a + b * root) > tiny * (1.0 + abs(root)):
            return LineCriticality("none", None, coefficients, affine_residual, outer_drift)
    return LineCriticality("at_most_one", float(root), coefficients, affine_residual, outer_drift)


def bias_critical_condition(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure,
                            f: TargetFunction) -> np.ndarray:
    """Weighted residual moments sum_n w_n (Psi(x_n) - f_n) x_n."""
    if theta.o != 1:
        raise DimensionError("the bias condition is stated for a single output")
    r = residual(theta, act, mu, f)[:, 0]
    return (mu.weights * r) @ mu.atoms
