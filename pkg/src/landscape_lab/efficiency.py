"""Efficient vs redundant parameters: membership in the explicit efficient
set, a redundancy taxonomy with witnesses, finite-atom rank tests and the
Taylor-coefficient admissibility check for activations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

from .errors import DimensionError, LabError
from .landscape import EmpiricalMeasure
from .net_core import Activation, ParameterVector, preactivation, taylor_coeffs
from .polyslice import _exact_rank, monomials_upto, multi_indices_upto


@dataclass(frozen=True)
class ToleranceConfig:
    zero_abs: float = 1e-9
    pair_rel: float = 1e-9
    rank_rel: float = 1e-8

    def __post_init__(self):
        for name in ("zero_abs", "pair_rel", "rank_rel"):
            if not getattr(self, name) > 0:
                raise LabError(f"tolerance {name} must be strictly positive")


DEFAULT_TOL = ToleranceConfig()


class Violation(NamedTuple):
    constraint: str  # deactivation | bias | duplicate_pair | sign_pair
    neurons: tuple


class E0Result(NamedTuple):
    ok: bool
    violations: list


def _pair_close(u, v, rel):
    scale = max(np.linalg.norm(u), np.linalg.norm(v))
    return np.linalg.norm(u - v) <= rel * scale


def in_E0(theta: ParameterVector, tol: ToleranceConfig = DEFAULT_TOL) -> E0Result:
    """Nonzero outer rows, nonzero inner columns, no two neurons equal up to sign."""
    violations = []
    for j in range(theta.m):
        if np.linalg.norm(theta.w_out[j]) <= tol.zero_abs:
            violations.append(Violation("deactivation", (j,)))
        if np.linalg.norm(theta.w_in[:, j]) <= tol.zero_abs:
            violations.append(Violation("bias", (j,)))
    U = [theta.neuron_vector(j) for j in range(theta.m)]
    for i, j in itertools.combinations(range(theta.m), 2):
        if _pair_close(U[i], U[j], tol.pair_rel):
            violations.append(Violation("duplicate_pair", (i, j)))
        if _pair_close(U[i], -U[j], tol.pair_rel):
            violations.append(Violation("sign_pair", (i, j)))
    return E0Result(not violations, violations)


def e0_margin(theta: ParameterVector) -> float:
    """Smallest normalized distance of theta to the constraints of the efficient set.

    Row and column norms are divided by max(1, max|theta|); pair distances by
    the larger of the two neuron norms.
    """
    if theta.m == 0:
        return np.inf
    scale = max(1.0, float(np.max(np.abs(theta.flatten()))))
    vals = [np.linalg.norm(theta.w_out[j]) / scale for j in range(theta.m)]
    vals += [np.linalg.norm(theta.w_in[:, j]) / scale for j in range(theta.m)]
    U = [theta.neuron_vector(j) for j in range(theta.m)]
    for i, j in itertools.combinations(range(theta.m), 2):
        s = max(np.linalg.norm(U[i]), np.linalg.norm(U[j]))
        vals += [np.linalg.norm(U[i] - U[j]) / s, np.linalg.norm(U[i] + U[j]) / s]
    return float(min(vals))


# ---------------------------------------------------------------------------
# taxonomy

@dataclass(frozen=True)
class Finding:
    kind: str  # deactivation | bias | duplication | sign_symmetric | generalized
    neurons: tuple
    lam: Optional[tuple] = None  # (lambda_const, lambda_1..lambda_m) over all neurons
    detail: float = 0.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "neurons": list(self.neurons),
                "lambda": None if self.lam is None else list(self.lam), "detail": self.detail}


@dataclass(frozen=True)
class RedundancyReport:
    findings: tuple = ()

    @property
    def efficient(self) -> bool:
        return not self.findings

    def kinds(self) -> list[str]:
        return [f.kind for f in self.findings]

    def to_dict(self) -> dict:
        return {"efficient": self.efficient, "findings": [f.to_dict() for f in self.findings]}


def neuron_outputs(theta, act, mu) -> np.ndarray:
    """Hidden-neuron outputs psi_j on the atoms, shape (N, m)."""
    return act(preactivation(theta, mu.atoms))


def dependency_null_space(columns: np.ndarray, rank_rel: float) -> tuple[np.ndarray, np.ndarray]:
    """Null space of a column family after normalizing each column.

    Returns (coefficient vectors in the original column scaling, as rows;
    singular values of the normalized matrix).
    """
    norms = np.linalg.norm(columns, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    A = columns / safe
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    k = A.shape[1]
    sv = np.zeros(k)
    sv[: s.size] = s
    cutoff = rank_rel * (sv[0] if sv.size else 0.0)
    null = Vt[sv <= cutoff] if sv[0] > 0 else np.eye(k)
    return null / safe, sv


def _full_lambda(m, idx_const, idx_neurons, coeffs):
    lam = np.zeros(m + 1)
    if idx_const:
        lam[0] = coeffs[0]
    for pos, j in enumerate(idx_neurons):
        lam[1 + j] = coeffs[pos + int(idx_const)]
    top = lam[np.argmax(np.abs(lam))]
    return tuple(float(v) + 0.0 for v in lam / top)


def taxonomy(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure,
             tol: ToleranceConfig = DEFAULT_TOL) -> RedundancyReport:
    if mu.d != theta.d:
        raise DimensionError(f"measure has {mu.d} features, network expects {theta.d}")
    if np.unique(mu.atoms, axis=0).shape[0] < 2:
        raise LabError("the rank probe needs at least two distinct atoms")
    m = theta.m
    psi = neuron_outputs(theta, act, mu)
    ones = np.ones(mu.n)
    findings = []
    explained = set()

    for j in range(m):
        nrm = float(np.linalg.norm(theta.w_out[j]))
        if nrm <= tol.zero_abs:
            findings.append(Finding("deactivation", (j,), None, nrm))
    bias = []
    for j in range(m):
        if np.linalg.norm(theta.w_in[:, j]) <= tol.zero_abs:
            lam = np.zeros(m + 1)
            lam[0], lam[1 + j] = -float(act(theta.b_hidden[j])), 1.0
            findings.append(Finding("bias", (j,), tuple(lam.tolist()), float(np.linalg.norm(theta.w_in[:, j]))))
            bias.append(j)
    explained.update(bias)

    U = [theta.neuron_vector(j) for j in range(m)]
    for i, j in itertools.combinations(range(m), 2):
        if i in bias and j in bias:
            continue
        if _pair_close(U[i], U[j], tol.pair_rel):
            lam = np.zeros(m + 1)
            lam[1 + i], lam[1 + j] = 1.0, -1.0
            findings.append(Finding("duplication", (i, j), tuple(lam.tolist()), float(np.linalg.norm(U[i] - U[j]))))
            explained.add(j)
        elif _pair_close(U[i], -U[j], tol.pair_rel):
            # only a redundancy if the activation turns the sign flip into an affine relation
            cols = np.column_stack([ones, psi[:, i], psi[:, j]])
            null, sv = dependency_null_space(cols, tol.rank_rel)
            if null.shape[0]:
                lam = _full_lambda(m, True, [i, j], null[0])
                lam = tuple(v / lam[1 + i] + 0.0 for v in lam)
                findings.append(Finding("sign_symmetric", (i, j), lam, float(sv[-1] / sv[0])))
                explained.add(j)

    kept = [j for j in range(m) if j not in explained]
    cols = np.column_stack([ones] + [psi[:, j] for j in kept])
    null, sv = dependency_null_space(cols, tol.rank_rel)
    for vec in null:
        lam = _full_lambda(m, True, kept, vec)
        involved = tuple(j for j in range(m) if abs(lam[1 + j]) > 1e-8)
        findings.append(Finding("generalized", involved, lam, float(sv[-1] / sv[0])))
    return RedundancyReport(tuple(findings))


# ---------------------------------------------------------------------------
# polynomial efficiency on atoms

@dataclass(frozen=True, eq=False)
class RankResult:
    full_rank: bool
    singular_values: np.ndarray
    n_columns: int


def _check_pattern(pattern):
    pattern = tuple(int(p) for p in pattern)
    if len(pattern) < 2 or len(pattern) > 4 or min(pattern) < 0:
        raise LabError(f"pattern must be (m_const, m_0, ..., m_n) with n <= 2 and entries >= 0, got {pattern}")
    return pattern


def poly_design_matrix(theta, act, mu, pattern) -> np.ndarray:
    """Columns: monomials up to degree m_const, then for each neuron j and
    derivative order k the monomials up to degree m_k times psi^(k)(z_j)."""
    pattern = _check_pattern(pattern)
    Z = preactivation(theta, mu.atoms)
    cols = [monomials_upto(mu.atoms, pattern[0])]
    for j in range(theta.m):
        for k, deg in enumerate(pattern[1:]):
            cols.append(monomials_upto(mu.atoms, deg) * act(Z[:, j], k)[:, None])
    return np.hstack(cols)


def poly_column_count(d, m, pattern) -> int:
    pattern = _check_pattern(pattern)
    count = lambda q: len(multi_indices_upto(d, q))
    return count(pattern[0]) + m * sum(count(q) for q in pattern[1:])


def numeric_poly_efficiency_rank(theta: ParameterVector, act: Activation, mu: EmpiricalMeasure,
                                 pattern, tol: ToleranceConfig = DEFAULT_TOL) -> RankResult:
    if mu.d != theta.d:
        raise DimensionError(f"measure has {mu.d} features, network expects {theta.d}")
    n_cols = poly_column_count(theta.d, theta.m, pattern)
    if mu.n < n_cols:
        raise LabError(f"pattern {tuple(pattern)} needs at least {n_cols} atoms, measure has {mu.n}")
    A = poly_design_matrix(theta, act, mu, pattern)
    norms = np.linalg.norm(A, axis=0)
    A = A / np.where(norms > 0, norms, 1.0)
    sv = np.linalg.svd(A, compute_uv=False)
    full = bool(sv[0] > 0 and sv[-1] > tol.rank_rel * sv[0] and np.all(norms > 0))
    return RankResult(full, sv, n_cols)


# ---------------------------------------------------------------------------
# activation admissibility from Taylor coefficients

ADMISSIBLE_RANK = 6


@dataclass(frozen=True)
class AdmissibilityResult:
    rank: int
    full: bool
    exact: bool


def _admissibility_rows(K):
    # each entry is (integer factor, Taylor index)
    return [[(1, k), (k + 1, k + 1), (k, k), ((k + 2) * (k + 1), k + 2), ((k + 1) * k, k + 1), (k * (k - 1), k)]
            for k in range(K + 1)]


def activation_admissibility(act: Activation, K: int = 12, rank_rel: float = 1e-8) -> AdmissibilityResult:
    """Rank of the (K+1) x 6 matrix with rows
    (a_k, (k+1)a_{k+1}, k a_k, (k+2)(k+1)a_{k+2}, (k+1)k a_{k+1}, k(k-1)a_k).

    Rational coefficients give an exact rank.  An irrational coefficient that
    enters a single matrix entry is treated as an indeterminate: every minor
    is then affine in it, so the rank equals the largest rank over the
    substitutions 0 and 1.
    """
    if K < 6:
        raise LabError("admissibility needs K >= 6")
    if not act.has_taylor:
        raise LabError(f"activation {act.name!r} has no Taylor coefficients")
    pattern = _admissibility_rows(K)
    if act.exact_taylor is not None:
        a = act.exact_taylor(K + 2)
        symbolic = {}
        for r, row in enumerate(pattern):
            for c, (factor, idx) in enumerate(row):
                if factor != 0 and a[idx] is None:
                    symbolic.setdefault(idx, []).append((r, c))
        if all(len(v) == 1 for v in symbolic.values()):
            best = 0
            for values in itertools.product((Fraction(0), Fraction(1)), repeat=len(symbolic)):
                sub = dict(zip(symbolic, values))
                rows = [[factor * (sub[idx] if a[idx] is None else a[idx]) for factor, idx in row] for row in pattern]
                best = max(best, _exact_rank(rows))
            return AdmissibilityResult(best, best == ADMISSIBLE_RANK, True)
    a = taylor_coeffs(act, K + 2)
    M = np.array([[factor * a[idx] for factor, idx in row] for row in pattern])
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > rank_rel * sv[0])) if sv[0] > 0 else 0
    return AdmissibilityResult(rank, rank == ADMISSIBLE_RANK, False)
