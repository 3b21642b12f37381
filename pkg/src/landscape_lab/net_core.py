"""Shallow one-hidden-layer networks: shapes, parameters, activations and
closed-form derivatives of the network response.

Conventions
-----------
``w_in`` has shape (d, m) with ``w_in[i, j]`` the edge from input i to hidden
neuron j; ``w_out`` has shape (m, o) with ``w_out[j, l]`` the edge from hidden
neuron j to output l.  The flat parameter vector lists

    w_in column by column (all inputs of neuron 0, then neuron 1, ...),
    b_hidden, w_out row by row (all outputs of neuron 0, ...), b_out.

Every batched routine accepts either one input of shape (d,) or a batch of
shape (N, d).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

from .errors import DimensionError, LabError

MAX_TAYLOR_ORDER = 64


@dataclass(frozen=True)
class Topology:
    input_dim: int
    hidden: int
    output_dim: int = 1

    def __post_init__(self):
        for name, lo in (("input_dim", 1), ("hidden", 0), ("output_dim", 1)):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < lo:
                raise DimensionError(f"{name} must be an integer >= {lo}, got {v!r}")

    @property
    def dim(self) -> int:
        d, m, o = self.input_dim, self.hidden, self.output_dim
        return d * m + m * o + m + o

    # flat-index helpers
    def idx_w_in(self, i: int, j: int) -> int:
        return j * self.input_dim + i

    def idx_b_hidden(self, j: int) -> int:
        return self.input_dim * self.hidden + j

    def idx_w_out(self, j: int, l: int = 0) -> int:
        return self.input_dim * self.hidden + self.hidden + j * self.output_dim + l

    def idx_b_out(self, l: int = 0) -> int:
        return (self.input_dim + 1 + self.output_dim) * self.hidden + l

    def inner_indices(self, j: int) -> list[int]:
        """Flat indices of neuron j's input weights followed by its bias."""
        return [self.idx_w_in(i, j) for i in range(self.input_dim)] + [self.idx_b_hidden(j)]

    def outer_indices(self) -> list[int]:
        d, m, o = self.input_dim, self.hidden, self.output_dim
        start = d * m + m
        return list(range(start, start + m * o + o))


# ---------------------------------------------------------------------------
# activations

def _sigmoid_derivs():
    def d0(z):
        return expit(z)

    def d1(z):
        return expit(z) * expit(-z)

    def d2(z):
        return d1(z) * (expit(-z) - expit(z))

    def d3(z):
        s1 = d1(z)
        return s1 * (1.0 - 6.0 * s1)

    return (d0, d1, d2, d3)


def _sech2(z):
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(z) ** 2


def _tanh_derivs():
    def d1(z):
        return _sech2(z)

    def d2(z):
        return -2.0 * np.tanh(z) * _sech2(z)

    def d3(z):
        s = _sech2(z)
        return -2.0 * s * (3.0 * s - 2.0)

    return (np.tanh, d1, d2, d3)


def _softplus_derivs():
    sig = _sigmoid_derivs()
    return (lambda z: np.logaddexp(0.0, z), sig[0], sig[1], sig[2])


def _exp_derivs():
    return (np.exp,) * 4


def _cauchy_square(a, k):
    return sum((a[i] * a[k - i] for i in range(k + 1)), Fraction(0))


def _sigmoid_taylor(K):
    # s' = s - s^2, s(0) = 1/2
    a = [Fraction(1, 2)]
    for k in range(K):
        a.append((a[k] - _cauchy_square(a, k)) / (k + 1))
    return a


def _tanh_taylor(K):
    # t' = 1 - t^2, t(0) = 0
    a = [Fraction(0)]
    for k in range(K):
        a.append(((1 if k == 0 else 0) - _cauchy_square(a, k)) / (k + 1))
    return a


def _softplus_taylor(K):
    # a_0 = ln 2 is not rational; it is marked with None
    sig = _sigmoid_taylor(max(K - 1, 0))
    return [None] + [sig[k - 1] / k for k in range(1, K + 1)]


def _exp_taylor(K):
    return [Fraction(1, math.factorial(k)) for k in range(K + 1)]


_IRRATIONAL_A0 = {"softplus": math.log(2.0)}


@dataclass(frozen=True)
class Activation:
    """Analytic activation with derivatives of order 0..3.

    ``exact_taylor`` (built-ins) returns Taylor coefficients at 0 as
    Fractions, using ``None`` for an irrational coefficient whose float value
    is listed in ``irrational``.  Custom activations may pass plain float
    coefficients through ``float_taylor`` instead.
    """

    kind: str
    derivatives: tuple
    exact_taylor: Optional[Callable[[int], list]] = field(default=None, repr=False)
    float_taylor: Optional[Callable[[int], Sequence[float]]] = field(default=None, repr=False)
    irrational: dict = field(default_factory=dict, repr=False)
    name: str = ""

    def __post_init__(self):
        if len(self.derivatives) != 4:
            raise LabError("an activation needs callables for derivative orders 0..3")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    def __call__(self, z, order: int = 0):
        return self.derivatives[order](np.asarray(z, dtype=float))

    @property
    def has_taylor(self) -> bool:
        return self.exact_taylor is not None or self.float_taylor is not None

    def taylor(self, K: int) -> np.ndarray:
        return taylor_coeffs(self, K)

    @classmethod
    def custom(cls, name, d0, d1, d2, d3, taylor=None):
        return cls("custom", (d0, d1, d2, d3), float_taylor=taylor, name=name)


SIGMOID = Activation("sigmoid", _sigmoid_derivs(), _sigmoid_taylor)
TANH = Activation("tanh", _tanh_derivs(), _tanh_taylor)
SOFTPLUS = Activation("softplus", _softplus_derivs(), _softplus_taylor,
                      irrational={0: _IRRATIONAL_A0["softplus"]})
EXP = Activation("exp", _exp_derivs(), _exp_taylor)

BUILTIN_ACTIVATIONS = {a.kind: a for a in (SIGMOID, TANH, SOFTPLUS, EXP)}


def get_activation(name: str) -> Activation:
    try:
        return BUILTIN_ACTIVATIONS[name]
    except KeyError:
        raise LabError(f"unknown activation {name!r}; expected one of {sorted(BUILTIN_ACTIVATIONS)}") from None


def taylor_coeffs(act: Activation, K: int) -> np.ndarray:
    """Float Taylor coefficients a_0..a_K of the activation at 0."""
    if K < 0 or K > MAX_TAYLOR_ORDER:
        raise LabError(f"Taylor order must lie in [0, {MAX_TAYLOR_ORDER}], got {K}")
    if act.exact_taylor is not None:
        exact = act.exact_taylor(K)
        return np.array([act.irrational[k] if c is None else float(c) for k, c in enumerate(exact)])
    if act.float_taylor is not None:
        coeffs = np.asarray(act.float_taylor(K), dtype=float)
        if coeffs.shape != (K + 1,):
            raise LabError(f"custom Taylor procedure returned {coeffs.shape[0]} coefficients, wanted {K + 1}")
        return coeffs
    raise LabError(f"activation {act.name!r} has no Taylor coefficients")


# ---------------------------------------------------------------------------
# parameters

def _as_matrix(value, rows, cols, name):
    arr = np.array(value, dtype=float)
    if arr.size == 0 and rows * cols == 0:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise DimensionError(f"{name} has shape {arr.shape}, expected {(rows, cols)}")
    return arr


@dataclass(frozen=True, eq=False)
class ParameterVector:
    w_in: np.ndarray
    b_hidden: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def __post_init__(self):
        w_in = np.array(self.w_in, dtype=float)
        if w_in.ndim != 2:
            raise DimensionError(f"w_in must be a d x m matrix, got shape {w_in.shape}")
        d, m = w_in.shape
        b_out = np.atleast_1d(np.array(self.b_out, dtype=float))
        if b_out.ndim != 1:
            raise DimensionError("b_out must be a vector")
        o = b_out.shape[0]
        b_hidden = np.array(self.b_hidden, dtype=float).reshape(-1) if m else np.zeros(0)
        if b_hidden.shape != (m,):
            raise DimensionError(f"b_hidden has length {b_hidden.shape[0]}, expected {m}")
        w_out = _as_matrix(self.w_out, m, o, "w_out")
        for name, arr in (("w_in", w_in), ("b_hidden", b_hidden), ("w_out", w_out), ("b_out", b_out)):
            if not np.all(np.isfinite(arr)):
                raise LabError(f"{name} contains non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "topology", Topology(d, m, o))

    @property
    def d(self) -> int:
        return self.w_in.shape[0]

    @property
    def m(self) -> int:
        return self.w_in.shape[1]

    @property
    def o(self) -> int:
        return self.b_out.shape[0]

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.w_in.T.ravel(), self.b_hidden, self.w_out.ravel(), self.b_out])

    @classmethod
    def unflatten(cls, topology: Topology, vec) -> "ParameterVector":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (topology.dim,):
            raise DimensionError(f"flat vector has shape {vec.shape}, expected ({topology.dim},)")
        d, m, o = topology.input_dim, topology.hidden, topology.output_dim
        a, b, c = d * m, d * m + m, d * m + m + m * o
        return cls(vec[:a].reshape(m, d).T, vec[a:b], vec[b:c].reshape(m, o), vec[c:])

    @classmethod
    def zeros(cls, topology: Topology) -> "ParameterVector":
        return cls.unflatten(topology, np.zeros(topology.dim))

    @classmethod
    def random(cls, topology: Topology, rng: np.random.Generator, scale: float = 1.0) -> "ParameterVector":
        return cls.unflatten(topology, scale * rng.standard_normal(topology.dim))

    def neuron_vector(self, j: int) -> np.ndarray:
        """(w_{.j}, beta_j): the inner parameters of hidden neuron j."""
        return np.append(self.w_in[:, j], self.b_hidden[j])

    def replace(self, **arrays) -> "ParameterVector":
        fields = dict(w_in=self.w_in, b_hidden=self.b_hidden, w_out=self.w_out, b_out=self.b_out)
        fields.update(arrays)
        return ParameterVector(**fields)

    def __eq__(self, other):
        if not isinstance(other, ParameterVector):
            return NotImplemented
        return self.topology == other.topology and np.array_equal(self.flatten(), other.flatten())

    def __repr__(self):
        t = self.topology
        return f"ParameterVector(d={t.input_dim}, m={t.hidden}, o={t.output_dim})"


# ---------------------------------------------------------------------------
# response and its derivatives

def _batch(theta: ParameterVector, x):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = x[None, :] if single else x
    if X.ndim != 2 or X.shape[1] != theta.d:
        raise DimensionError(f"input has shape {x.shape}, network expects {theta.d} features")
    if not np.all(np.isfinite(X)):
        raise LabError("input contains non-finite values")
    return X, single


def preactivation(theta: ParameterVector, X: np.ndarray) -> np.ndarray:
    # per-neuron sums in a fixed order, independent of how many neurons there are
    z = np.broadcast_to(theta.b_hidden, (X.shape[0], theta.m)).copy()
    for i in range(theta.d):
        z += X[:, i:i + 1] * theta.w_in[i]
    return z


def response(theta: ParameterVector, act: Activation, x) -> np.ndarray:
    """Network output, shape (o,) for one input or (N, o) for a batch."""
    X, single = _batch(theta, x)
    psi = act(preactivation(theta, X))
    # fixed summation order, so dropping a neuron with zero outer weights is bit-exact
    out = np.broadcast_to(theta.b_out, (X.shape[0], theta.o)).copy()
    for j in range(theta.m):
        out += psi[:, j:j + 1] * theta.w_out[j]
    return out[0] if single else out


def _require_scalar_output(theta):
    if theta.o != 1:
        raise DimensionError(f"this derivative needs a single output, network has {theta.o}")


def jacobian_response(theta: ParameterVector, act: Activation, x) -> np.ndarray:
    """Derivative of every output w.r.t. the flat parameters: shape (N, o, dim)."""
    X, single = _batch(theta, x)
    t = theta.topology
    d, m, o = t.input_dim, t.hidden, t.output_dim
    N = X.shape[0]
    Z = preactivation(theta, X)
    h, dh = act(Z, 0), act(Z, 1)
    jac = np.zeros((N, o, t.dim))
    for l in range(o):
        scaled = dh * theta.w_out[:, l]  # (N, m)
        # w_in block, neuron-major
        jac[:, l, : d * m] = (scaled[:, :, None] * X[:, None, :]).reshape(N, m * d)
        jac[:, l, d * m: d * m + m] = scaled
        jac[:, l, t.idx_w_out(0, l): t.idx_b_out(0): o] = h
        jac[:, l, t.idx_b_out(l)] = 1.0
    return jac[0] if single else jac


def grad_response(theta: ParameterVector, act: Activation, x) -> np.ndarray:
    """Gradient of the scalar response, shape (dim,) or (N, dim)."""
    _require_scalar_output(theta)
    jac = jacobian_response(theta, act, x)
    return jac[..., 0, :]


def hess_response(theta: ParameterVector, act: Activation, x) -> np.ndarray:
    """Hessian of the scalar response, shape (dim, dim) or (N, dim, dim).

    Only same-neuron inner x inner entries and the mixed (outer weight,
    inner parameter) entries of one neuron are filled; everything else is
    left at exactly 0.0.
    """
    _require_scalar_output(theta)
    X, single = _batch(theta, x)
    t = theta.topology
    N, P = X.shape[0], t.dim
    Z = preactivation(theta, X)
    dh, d2h = act(Z, 1), act(Z, 2)
    U = np.hstack([X, np.ones((N, 1))])  # inner features (x, 1)
    H = np.zeros((N, P, P))
    for j in range(t.hidden):
        idx = t.inner_indices(j)
        c = theta.w_out[j, 0]
        block = (d2h[:, j] * c)[:, None, None] * U[:, :, None] * U[:, None, :]
        H[np.ix_(np.arange(N), idx, idx)] = block
        mixed = dh[:, j][:, None] * U
        k = t.idx_w_out(j)
        H[:, k, idx] = mixed
        H[:, idx, k] = mixed
    return H[0] if single else H
