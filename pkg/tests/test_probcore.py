import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbounds.probcore import (Dist, InvalidDistributionError, JointDist, binary_entropy,
                               conditional_mutual_information, csiszar_identity_residual, entropy,
                               mutual_information)

from strategies import joints


def mp_entropy(ps):
    mpmath.mp.dps = 40
    return float(-sum(mpmath.mpf(p) * mpmath.log(mpmath.mpf(p), 2) for p in ps if p > 0))


def test_entropy_against_high_precision():
    assert entropy(Dist([0.75, 0.25])) == pytest.approx(mp_entropy([0.75, 0.25]), abs=1e-14)
    assert mp_entropy([0.75, 0.25]) == pytest.approx(0.8112781244591328, abs=1e-15)


def test_entropy_edge_cases():
    assert entropy(Dist([1.0, 0.0, 0.0])) == 0.0
    assert entropy(Dist(np.full(8, 1 / 8))) == pytest.approx(3.0, abs=1e-14)
    assert binary_entropy(0.5) == pytest.approx(1.0)
    assert binary_entropy(0.0) == 0.0
    with pytest.raises(ValueError):
        binary_entropy(1.2)


@pytest.mark.parametrize("probs", [[0.5, 0.4], [1.2, -0.2], [np.nan, 1.0], []])
def test_invalid_distributions_rejected(probs):
    with pytest.raises(InvalidDistributionError):
        Dist(probs)


def test_normalized_and_tolerance():
    assert np.allclose(Dist.normalized([1, 3]).probs, [0.25, 0.75])
    Dist([0.5, 0.5 + 5e-10])  # inside the mass tolerance
    with pytest.raises(InvalidDistributionError):
        Dist.normalized([0, 0])


def test_mutual_information_basic():
    assert mutual_information(np.eye(2) / 2) == pytest.approx(1.0)
    assert mutual_information(np.full((3, 2), 1 / 6)) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        mutual_information(np.full(4, 0.25))


def test_conditional_mi_by_label_and_index():
    rng = np.random.default_rng(3)
    p = rng.dirichlet(np.ones(12)).reshape(2, 3, 2)
    j = JointDist(p, ("A", "B", "C"))
    by_label = conditional_mutual_information(j, "C")
    assert by_label == pytest.approx(conditional_mutual_information(p, -1))
    assert by_label == pytest.approx(j.mi("A", "B", "C"))
    assert conditional_mutual_information(j, "A") == pytest.approx(j.mi("B", "C", "A"))


def test_marginal_keeps_requested_order():
    p = np.arange(6, dtype=float).reshape(2, 3) / 15
    j = JointDist(p, ("A", "B"))
    assert np.allclose(j.marginal("B", "A").probs, p.T)
    assert j.marginal("B").labels == ("B",)
    with pytest.raises(KeyError):
        j.marginal("C")


def test_xor_has_zero_pairwise_but_full_conditional_information():
    p = np.zeros((2, 2, 2))
    for a in range(2):
        for b in range(2):
            p[a, b, a ^ b] = 0.25
    j = JointDist(p, ("A", "B", "C"))
    assert j.mi("A", "B") == pytest.approx(0.0, abs=1e-15)
    assert j.mi("A", "B", "C") == pytest.approx(1.0)


@given(joints(ndim=2))
def test_mi_symmetric_and_bounded(p):
    j = JointDist(p, ("A", "B"))
    i = j.mi("A", "B")
    assert i >= -1e-12
    assert i == pytest.approx(j.mi("B", "A"), abs=1e-12)
    assert i <= min(j.entropy("A"), j.entropy("B")) + 1e-12


@given(joints(ndim=3))
def test_chain_rule(p):
    j = JointDist(p, ("A", "B", "C"))
    assert j.mi("A", ("B", "C")) == pytest.approx(j.mi("A", "C") + j.mi("A", "B", "C"), abs=1e-12)
    assert j.mi("A", "B", "C") >= -1e-12


@given(st.integers(1, 3), st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_csiszar_residual_is_rounding_noise(n, card, seed):
    p = np.random.default_rng(seed).dirichlet(np.ones(card ** (2 * n))).reshape((card,) * (2 * n))
    assert csiszar_identity_residual(p) <= 1e-9


def test_csiszar_trivial_and_errors():
    assert csiszar_identity_residual(np.full((2, 2), 0.25)) == 0.0
    with pytest.raises(ValueError):
        csiszar_identity_residual(np.full((2, 2, 2), 1 / 8))
