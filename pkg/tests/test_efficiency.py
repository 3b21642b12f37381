import numpy as np
import pytest

from landscape_lab.efficiency import (ToleranceConfig, activation_admissibility, e0_margin, in_E0,
                                      numeric_poly_efficiency_rank, poly_column_count, taxonomy)
from landscape_lab.errors import LabError
from landscape_lab.landscape import EmpiricalMeasure
from landscape_lab.net_core import EXP, SIGMOID, SOFTPLUS, TANH, Activation, ParameterVector, Topology

MU1 = EmpiricalMeasure.uniform(np.linspace(-3, 3, 40)[:, None])


def net(w_in, b, w_out, b_out=0.0):
    w_in = np.atleast_2d(np.asarray(w_in, dtype=float))
    return ParameterVector(w_in, b, np.asarray(w_out, dtype=float)[:, None], [b_out])


def test_in_E0_constraints():
    assert in_E0(net([1.0, -2.0], [0.1, 0.3], [1.0, 1.0])).ok
    kinds = lambda th: [v.constraint for v in in_E0(th).violations]
    assert kinds(net([1.0, -2.0], [0.1, 0.3], [0.0, 1.0])) == ["deactivation"]
    assert kinds(net([0.0, -2.0], [0.1, 0.3], [1.0, 1.0])) == ["bias"]
    assert kinds(net([1.0, 1.0], [0.3, 0.3], [1.0, 2.0])) == ["duplicate_pair"]
    assert kinds(net([1.0, -1.0], [0.3, -0.3], [1.0, 2.0])) == ["sign_pair"]


def test_e0_margin_scales():
    th = net([1.0, -2.0], [0.1, 0.3], [1.0, 1.0])
    assert e0_margin(th) > 0.1
    close = net([1.0, 1.0 + 1e-7], [0.3, 0.3], [1.0, 2.0])
    assert e0_margin(close) < 1e-6
    assert e0_margin(net([1.0, -2.0], [0.1, 0.3], [1e-8, 1.0])) <= 1e-8


def test_taxonomy_efficient():
    assert taxonomy(net([1.0, -2.0], [0.1, 0.3], [1.0, 1.0]), SIGMOID, MU1).efficient


def test_taxonomy_witnesses():
    rep = taxonomy(net([0.0, -2.0], [0.4, 0.3], [1.0, 1.0]), TANH, MU1)
    assert rep.kinds() == ["bias"]
    assert rep.findings[0].lam == pytest.approx((-np.tanh(0.4), 1.0, 0.0))
    rep = taxonomy(net([1.0, 1.0], [0.3, 0.3], [1.0, 2.0]), SIGMOID, MU1)
    assert rep.kinds() == ["duplication"] and rep.findings[0].lam == (0.0, 1.0, -1.0)
    rep = taxonomy(net([1.0, -2.0], [0.1, 0.3], [0.0, 1.0]), SIGMOID, MU1)
    assert rep.kinds() == ["deactivation"]


def test_sign_symmetric_pairs():
    sig = taxonomy(net([1.5, -1.5], [0.2, -0.2], [1.0, 1.0]), SIGMOID, MU1)
    assert sig.kinds() == ["sign_symmetric"]
    assert sig.findings[0].lam == pytest.approx((-1.0, 1.0, 1.0), abs=1e-8)
    th = taxonomy(net([1.5, -1.5], [0.2, -0.2], [1.0, 1.0]), TANH, MU1)
    assert th.kinds() == ["sign_symmetric"]
    assert th.findings[0].lam == pytest.approx((0.0, 1.0, 1.0), abs=1e-8)


def test_softplus_sign_pair_not_symmetric():
    assert taxonomy(net([1.5, -1.5], [0.2, -0.2], [1.0, 1.0]), SOFTPLUS, MU1).efficient
    double = net([1.5, -1.5, 0.7, -0.7], [0.2, -0.2, 0.5, -0.5], [1.0, 1.0, 1.0, 1.0])
    kinds = taxonomy(double, SOFTPLUS, MU1).kinds()
    assert "generalized" in kinds and "sign_symmetric" not in kinds


def test_taxonomy_flags_every_E0_failure(rng):
    for _ in range(50):
        th = ParameterVector.random(Topology(1, 3), rng)
        j, k = rng.choice(3, 2, replace=False)
        w_in, b, w_out = th.w_in.copy(), th.b_hidden.copy(), th.w_out.copy()
        choice = rng.integers(4)
        if choice == 0:
            w_out[j] = 0
        elif choice == 1:
            w_in[:, j] = 0
        elif choice == 2:
            w_in[:, k], b[k] = w_in[:, j], b[j]
        else:
            w_in[:, k], b[k] = -w_in[:, j], -b[j]
        bad = ParameterVector(w_in, b, w_out, th.b_out)
        assert not in_E0(bad).ok
        assert not taxonomy(bad, TANH, MU1).efficient


def test_poly_rank_full_on_generic_points(rng):
    X = rng.uniform(-8, 8, size=(200, 2))
    mu = EmpiricalMeasure.uniform(X)
    for _ in range(20):
        th = ParameterVector.random(Topology(2, 2), rng)
        assert numeric_poly_efficiency_rank(th, SIGMOID, mu, (0, 0, 1, 2)).full_rank


def test_poly_rank_detects_duplicate():
    X = np.random.default_rng(3).uniform(-8, 8, size=(200, 2))
    mu = EmpiricalMeasure.uniform(X)
    dup = ParameterVector(np.array([[1.0, 1.0], [0.5, 0.5]]), [0.2, 0.2], [[1.0], [1.0]], [0.0])
    assert not numeric_poly_efficiency_rank(dup, SIGMOID, mu, (0, 0, 1)).full_rank


def test_pattern_validation():
    th = net([1.0], [0.0], [1.0])
    assert poly_column_count(1, 1, (0, 0, 1)) == 1 + 1 + 2
    with pytest.raises(LabError):
        numeric_poly_efficiency_rank(th, SIGMOID, MU1, (1,))
    with pytest.raises(LabError):
        numeric_poly_efficiency_rank(th, SIGMOID, EmpiricalMeasure.uniform(np.arange(3.0)), (0, 1, 1))


@pytest.mark.parametrize("act,rank", [(SIGMOID, 6), (TANH, 6), (SOFTPLUS, 6), (EXP, 3)], ids=["sigmoid", "tanh", "softplus", "exp"])
def test_admissibility_ranks(act, rank):
    res = activation_admissibility(act, 12)
    assert res.rank == rank and res.exact
    assert res.full == (rank == 6)


def test_admissibility_custom_float_activation():
    cubic = Activation.custom("cubic", lambda z: z ** 3, lambda z: 3 * z ** 2, lambda z: 6 * z, lambda z: 6 + 0 * z,
                              taylor=lambda K: [0, 0, 0, 1] + [0] * (K - 3))
    res = activation_admissibility(cubic, 12)
    assert not res.exact and res.rank < 6
    with pytest.raises(LabError):
        activation_admissibility(SIGMOID, 5)


def test_tolerance_config_validation():
    with pytest.raises(LabError):
        ToleranceConfig(zero_abs=0.0)
