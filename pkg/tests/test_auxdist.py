import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbounds.auxdist import (AuxPair, AuxTriple, CommonInfoAux, InconsistentMarginalsError, TimeShareLaw,
                              canonical_coupling, induced_joint, load_aux, random_aux_triple,
                              random_common_info_aux, save_aux, skew_symmetry_swap, split_construction,
                              split_relations, symmetrize_timeshare)
from bcbounds.channel import push_forward, random_channel
from bcbounds.optimize import weighted_objective
from bcbounds.regions import ne_outer_constraints
from bcbounds.reproduce import explicit_triple, maximizing_pairs

from strategies import channels, triples


def test_explicit_triple_has_uniform_input(half):
    j = induced_joint(explicit_triple(), half)
    assert np.allclose(j.marginal("X").probs, [0.5, 0.5], atol=1e-12)
    assert j.marginal("Y", "Z").probs.sum() == pytest.approx(1.0)


def test_constant_auxiliaries_reduce_to_push_forward(half):
    a = AuxTriple(np.ones((1, 1)), np.array([[[0.3, 0.7]]]))
    j = induced_joint(a, half)
    assert np.allclose(j.marginal("X", "Y", "Z").probs, push_forward([0.3, 0.7], half).probs)


def test_triple_validation():
    with pytest.raises(ValueError):
        AuxTriple(np.array([[0.5, 0.6]]), np.full((1, 2, 2), 0.5))
    with pytest.raises(ValueError):
        AuxTriple(np.array([[0.5, 0.5]]), np.array([[[1.0, 0.0], [0.7, 0.7]]]))


def test_split_is_deterministic_with_expected_sizes(rng):
    a = random_aux_triple(rng, 2, 3, 3)
    s = split_construction(a)
    assert (s.nu, s.nv, s.nx) == (6, 9, 3)
    assert s.deterministic and not a.deterministic


def test_split_cell_formula():
    q = np.zeros((1, 1, 2))
    q[0, 0] = [0.3, 0.7]
    s = split_construction(AuxTriple.from_joint(q))
    # P(U*=u_i, V*=v_j) = P(X=(i-j) mod 2) / 2 and X* = (i-j) mod 2
    assert np.allclose(s.puv, [[0.15, 0.35], [0.35, 0.15]])
    assert np.allclose(s.px_given_uv[0, 1], [0, 1]) and np.allclose(s.px_given_uv[1, 1], [1, 0])


@given(triples(nx=2), channels(nx=2))
def test_split_relations_hold(a, c):
    for r in split_relations(a, c):
        tol = 1e-12 if r.group == "marginal" else 1e-10
        assert r.holds(tol), (r.name, r.lhs, r.rhs)


def test_split_of_deterministic_triple_keeps_bound_values(half):
    q = np.zeros((2, 2, 2))
    q[0, 1, 0], q[1, 0, 1], q[1, 1, 1] = 0.4, 0.4, 0.2
    a = AuxTriple.from_joint(q)
    before = ne_outer_constraints(a, half).as_tuple()
    after = ne_outer_constraints(split_construction(a), half).as_tuple()
    assert np.allclose(before, after, atol=1e-12)
    for r in split_relations(a, half):
        if "<=" in r.name and r.group == "entropy":
            assert abs(r.slack) <= 1e-12


def test_canonical_coupling_reproduces_pairs():
    pu, pv = maximizing_pairs()
    t = canonical_coupling(pu, pv)
    assert np.allclose(t.pair_u().q, pu.q, atol=1e-9)
    assert np.allclose(t.pair_v().q, pv.q, atol=1e-9)
    q = t.q
    px = q.sum((0, 1))
    assert np.allclose(px, [0.5, 0.5])
    for x in range(2):  # U and V independent given X
        assert np.allclose(q[:, :, x] * px[x], np.outer(q[:, :, x].sum(1), q[:, :, x].sum(0)), atol=1e-12)


def test_canonical_coupling_of_copies():
    copy = AuxPair([0.5, 0.5], np.eye(2))
    t = canonical_coupling(copy, copy)
    assert np.allclose(t.q[0, 0, 0] + t.q[1, 1, 1], 1.0)


def test_canonical_coupling_rejects_inconsistent_marginals():
    a = AuxPair([1.0], [[0.5, 0.5]])
    b = AuxPair([1.0], [[0.6, 0.4]])
    with pytest.raises(InconsistentMarginalsError) as e:
        canonical_coupling(a, b)
    assert e.value.discrepancy == pytest.approx(0.1)


def test_swap_exchanges_receivers(half, rng):
    a = random_aux_triple(rng, 2, 3, 2)
    s = skew_symmetry_swap(a)
    j, js = induced_joint(a, half), induced_joint(s, half)
    assert js.mi("U", "Y") == pytest.approx(j.mi("V", "Z"), abs=1e-12)
    assert js.mi("X", "Z", "U") == pytest.approx(j.mi("X", "Y", "V"), abs=1e-12)
    assert js.mi("V", "Z") == pytest.approx(j.mi("U", "Y"), abs=1e-12)
    assert js.mi("X", "Y", "V") == pytest.approx(j.mi("X", "Z", "U"), abs=1e-12)
    twice = skew_symmetry_swap(s)
    assert np.allclose(ne_outer_constraints(twice, half).as_tuple(), ne_outer_constraints(a, half).as_tuple())


def test_swap_needs_binary_input(rng):
    with pytest.raises(ValueError):
        skew_symmetry_swap(random_aux_triple(rng, 2, 2, 3))


@pytest.mark.parametrize("lam", [0.2, 0.5, 0.9])
def test_symmetrize_uniform_input_and_concavity(half, rng, lam):
    a = random_aux_triple(rng, 2, 3, 2)
    m = symmetrize_timeshare(a)
    assert m.nu == m.nv == 6
    assert m.q.sum((0, 1))[1] == pytest.approx(0.5, abs=1e-12)
    avg = 0.5 * (weighted_objective(a, half, 0.5) + weighted_objective(skew_symmetry_swap(a), half, 0.5))
    assert weighted_objective(m, half, 0.5) >= avg - 1e-12


def test_symmetrize_keeps_symmetric_triple(half):
    a = explicit_triple()
    assert weighted_objective(symmetrize_timeshare(a), half, 0.5) == pytest.approx(
        weighted_objective(a, half, 0.5), abs=1e-10)


def test_from_joint_round_trip(rng):
    a = random_aux_triple(rng, 3, 2, 2)
    b = AuxTriple.from_joint(a.q)
    assert np.allclose(a.q, b.q)


def test_common_info_aux_independence(rng):
    g = random_common_info_aux(rng, 2, 3, 2, 2)
    puv = g.q.sum((2, 3))
    assert np.allclose(puv, np.outer(puv.sum(1), puv.sum(0)))
    with pytest.raises(ValueError):
        q = np.zeros((2, 2, 1, 2))
        q[0, 0, 0, 0] = q[1, 1, 0, 1] = 0.5
        CommonInfoAux.from_joint(q)


def test_file_round_trips(tmp_path, rng):
    items = [random_aux_triple(rng, 2, 2, 2), AuxPair([0.4, 0.6], [[1, 0], [0.5, 0.5]]),
             random_common_info_aux(rng, 2, 2, 2, 2), TimeShareLaw([0.5, 0.5], [[0.2, 0.8], [0.9, 0.1]])]
    for i, a in enumerate(items):
        path = tmp_path / f"a{i}.json"
        save_aux(a, path)
        b = load_aux(path)
        assert type(b) is type(a)
        assert np.allclose(b.q if hasattr(b, "q") else b.px_given_w, a.q if hasattr(a, "q") else a.px_given_w)


def test_json_schema_fields(rng):
    d = random_aux_triple(rng, 2, 3, 2).to_dict()
    assert (d["nu"], d["nv"], d["nx"]) == (2, 3, 2)
    with pytest.raises(ValueError):
        AuxTriple.from_dict(dict(d, nu=5))


@given(st.integers(0, 2**31 - 1))
def test_random_triples_are_valid(seed):
    rng = np.random.default_rng(seed)
    a = random_aux_triple(rng, 3, 2, 2, deterministic=True)
    assert a.deterministic
    c = random_channel(rng)
    assert induced_joint(a, c).probs.sum() == pytest.approx(1.0)
