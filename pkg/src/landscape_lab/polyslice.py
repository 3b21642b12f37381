"""Monomial vectors, generalized Vandermonde matrices and the slicing test
for multivariate polynomials.

A polynomial in d variables of degree at most n vanishes identically iff its
restriction to each line t -> t*v_k vanishes, for N = C(n+d-1, n) suitable
directions v_k; no smaller set of directions can work.
"""
from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DimensionError, LabError

ZERO_REL = 1e-10
RANK_REL = 1e-8
MAX_RETRIES = 8


def multichoose(d: int, n: int) -> int:
    """Number of monomials of degree exactly n in d variables."""
    if d < 1 or n < 0:
        raise LabError(f"multichoose needs d >= 1 and n >= 0, got d={d}, n={n}")
    N = math.comb(n + d - 1, n)
    if N > sys.maxsize:
        raise OverflowError(f"C({n + d - 1}, {n}) does not fit a machine index")
    return N


def order_key(r, n: int) -> int:
    """Position key of a multi-index of degree n: sum_i r_i (n+1)^i."""
    return sum(ri * (n + 1) ** i for i, ri in enumerate(r))


def multi_indices(d: int, n: int) -> list[tuple[int, ...]]:
    """All exponent tuples of total degree n, in ascending order_key."""
    out = []
    for combo in itertools.combinations_with_replacement(range(d), n):
        r = [0] * d
        for i in combo:
            r[i] += 1
        out.append(tuple(r))
    out.sort(key=lambda r: order_key(r, n))
    return out


def multi_indices_upto(d: int, q: int) -> list[tuple[int, ...]]:
    return [r for k in range(q + 1) for r in multi_indices(d, k)]


def _powers_product(X, indices):
    X = np.asarray(X, dtype=float)
    if not indices:
        return np.ones(X.shape[:-1] + (0,))
    R = np.array(indices)
    with np.errstate(over="ignore"):
        return np.prod(X[..., None, :] ** R, axis=-1)


def mon(n: int, x) -> np.ndarray:
    """Degree-n monomial vector of x (shape (d,)) or of each row of x (shape (M, d))."""
    x = np.asarray(x, dtype=float)
    return _powers_product(x, multi_indices(x.shape[-1], n))


def monomials_upto(X, q: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    return _powers_product(X, multi_indices_upto(X.shape[-1], q))


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Real polynomial in d variables stored as {exponent tuple: coefficient}."""

    d: int
    coeffs: dict

    def __post_init__(self):
        if self.d < 1:
            raise DimensionError("a polynomial needs at least one variable")
        clean = {}
        for r, c in self.coeffs.items():
            r = tuple(int(v) for v in r)
            if len(r) != self.d or min(r, default=0) < 0:
                raise DimensionError(f"exponent {r} does not fit {self.d} variables")
            c = float(c)
            if not math.isfinite(c):
                raise LabError("polynomial coefficients must be finite")
            if c != 0.0:
                clean[r] = clean.get(r, 0.0) + c
        clean = {r: c for r, c in sorted(clean.items(), key=lambda kv: (sum(kv[0]), order_key(kv[0], sum(kv[0])))) if c != 0.0}
        object.__setattr__(self, "coeffs", clean)

    @property
    def degree(self) -> int:
        return max((sum(r) for r in self.coeffs), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.coeffs.values()), default=0.0)

    def homogeneous(self, k: int) -> tuple[list, np.ndarray]:
        rs = [r for r in self.coeffs if sum(r) == k]
        return rs, np.array([self.coeffs[r] for r in rs])

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x ** np.array(r)) for r, c in self.coeffs.items()))

    @classmethod
    def from_dense(cls, d: int, n: int, q) -> "Polynomial":
        """Homogeneous degree-n polynomial with coefficients q on the ordered monomials."""
        return cls(d, dict(zip(multi_indices(d, n), np.asarray(q, dtype=float))))

    def to_dict(self) -> dict:
        return {"d": self.d, "terms": [{"r": list(r), "c": c} for r, c in self.coeffs.items()]}

    @classmethod
    def from_dict(cls, data: dict) -> "Polynomial":
        return cls(int(data["d"]), {tuple(t["r"]): t["c"] for t in data["terms"]})


@dataclass(frozen=True, eq=False)
class DirectionSet:
    n: int
    d: int
    directions: np.ndarray
    verified: bool
    singular_values: np.ndarray

    @property
    def size(self) -> int:
        return self.directions.shape[0]


def _exact_rank(rows) -> int:
    """Rank of a rational matrix by fraction-exact Gaussian elimination."""
    A = [list(r) for r in rows]
    rank, ncols = 0, len(A[0]) if A else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(A)) if A[i][col] != 0), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        p = A[rank][col]
        for i in range(rank + 1, len(A)):
            if A[i][col] != 0:
                factor = A[i][col] / p
                A[i] = [a - factor * b for a, b in zip(A[i], A[rank])]
        rank += 1
    return rank


def monomial_matrix(directions, n: int) -> np.ndarray:
    return mon(n, np.atleast_2d(np.asarray(directions, dtype=float)))


def verify_directions(directions, n: int, exact: bool = False, rank_rel: float = RANK_REL) -> DirectionSet:
    """Check that the degree-n monomial vectors of the directions span all N monomials.

    With ``exact`` the rank is computed in rational arithmetic on the exact
    binary values of the float entries.
    """
    V = np.atleast_2d(np.asarray(directions, dtype=float))
    d = V.shape[1]
    N = multichoose(d, n)
    A = monomial_matrix(V, n)
    sv = np.linalg.svd(A, compute_uv=False) if A.size else np.zeros(0)
    if V.shape[0] != N or not np.all(np.isfinite(A)):
        ok = False
    elif exact:
        idx = multi_indices(d, n)
        rows = [[math.prod(Fraction(v) ** e for v, e in zip(row, r)) for r in idx] for row in V]
        ok = _exact_rank(rows) == N
    else:
        ok = bool(sv[-1] > rank_rel * sv[0])
    return DirectionSet(n, d, V, ok, sv)


def default_grid(N: int) -> np.ndarray:
    return 1.0 + np.arange(N) / N


def vandermonde_directions(n: int, d: int, a=None) -> DirectionSet:
    """Directions v_k = (a_k, a_k^(n+1), ..., a_k^((n+1)^(d-1)))."""
    N = multichoose(d, n)
    a = default_grid(N) if a is None else np.asarray(a, dtype=float)
    if a.shape != (N,):
        raise DimensionError(f"need {N} grid values, got {a.shape[0]}")
    if a[0] <= 0 or np.any(np.diff(a) <= 0):
        raise LabError("grid values must be positive and strictly increasing")
    V = a[:, None] ** ((n + 1) ** np.arange(d))[None, :]
    return verify_directions(V, n, exact=True)


def random_directions(d: int, n: int, seed: int, rank_rel: float = RANK_REL) -> DirectionSet:
    N = multichoose(d, n)
    children = np.random.SeedSequence(seed).spawn(MAX_RETRIES + 1)
    last = None
    for child in children:
        V = np.random.default_rng(child).standard_normal((N, d))
        last = verify_directions(V, n, rank_rel=rank_rel)
        if last.verified:
            return last
    raise LabError(f"random directions failed the rank check {MAX_RETRIES + 1} times; "
                   f"last singular values {last.singular_values.tolist()}")


def generalized_vandermonde(a, lam) -> np.ndarray:
    """Matrix with entry (i, k) = a_k ** lam_i."""
    a, lam = np.asarray(a, dtype=float), np.asarray(lam, dtype=float)
    if a.ndim != 1 or a.shape != lam.shape:
        raise DimensionError("a and lambda must be vectors of equal length")
    if a[0] <= 0 or np.any(np.diff(a) <= 0) or np.any(np.diff(lam) <= 0):
        raise LabError("a must be positive and strictly increasing, lambda strictly increasing")
    return a[None, :] ** lam[:, None]


def hadamard_bound(A) -> float:
    return float(np.prod(np.linalg.norm(A, axis=1)))


def generalized_vandermonde_det(a, lam) -> float:
    return float(np.linalg.det(generalized_vandermonde(a, lam)))


def slice(p: Polynomial, v) -> np.ndarray:
    """Coefficients (ascending in t) of the univariate polynomial t -> p(t v)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (p.d,):
        raise DimensionError(f"direction has shape {v.shape}, polynomial has {p.d} variables")
    out = np.zeros(p.degree + 1)
    for r, c in p.coeffs.items():
        out[sum(r)] += c * np.prod(v ** np.array(r))
    return out


def is_zero_by_slicing(p: Polynomial, D: DirectionSet, rel: float = ZERO_REL) -> bool:
    if not D.verified:
        raise LabError("direction set is not verified")
    if p.d != D.d:
        raise DimensionError(f"polynomial has {p.d} variables, directions have {D.d}")
    if p.degree > D.n:
        raise LabError(f"polynomial degree {p.degree} exceeds the direction set's degree {D.n}")
    scale = p.max_abs_coeff()
    for v in D.directions:
        coeffs = slice(p, v)
        # coefficient k is a degree-k form in v; compare with the size of its monomials
        mon_scale = np.array([max(np.max(np.abs(mon(k, v))), 1e-300) for k in range(coeffs.size)])
        if np.any(np.abs(coeffs) > rel * scale * mon_scale):
            return False
    return True


def optimality_counterexample(directions, n: int, d: int = None) -> Polynomial:
    """Nonzero degree-n form, unit coefficient norm, vanishing along every given direction."""
    V = np.asarray(directions, dtype=float)
    if V.size == 0:
        if d is None:
            raise LabError("give d when no directions are supplied")
        V = np.zeros((0, d))
    V = np.atleast_2d(V)
    d = V.shape[1]
    N = multichoose(d, n)
    if V.shape[0] >= N:
        raise LabError(f"need fewer than {N} directions, got {V.shape[0]}")
    if V.shape[0] == 0:
        q = np.zeros(N)
        q[0] = 1.0
    else:
        A = monomial_matrix(V, n)
        q = np.linalg.svd(A)[2][-1]
        if q[np.argmax(np.abs(q))] < 0:
            q = -q
    return Polynomial.from_dense(d, n, q / np.linalg.norm(q))
