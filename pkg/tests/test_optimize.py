import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bcbounds.auxdist import AuxPair, AuxTriple, TimeShareLaw
from bcbounds.channel import BroadcastChannel, random_channel
from bcbounds.optimize import (CONTINUOUS, DETERMINISTIC, GridTooLargeError, OptimizerConfig, _Evaluator,
                               _Feasible, ascend, brute_force_oracle, compare_bounds, max_weighted_sum,
                               support_pieces, trace_region, weighted_objective)
from bcbounds.regions import (KM_Y, KM_Z, NE, RatePoint, km_oy_constraints, km_oz_constraints,
                              ne_outer_constraints, pentagon_support)
from bcbounds.reproduce import explicit_triple, symmetric_triple

Z_CAPACITY = math.log2(1.25)  # Z channel with crossover 1/2
FAST = OptimizerConfig(restarts=3)


def true_ne_sum(c):
    return ne_outer_constraints(symmetric_triple(), c).sum_max


@given(st.floats(0, 2), st.floats(0, 2), st.floats(0, 2), st.floats(0, 2), st.floats(0, 1))
def test_support_pieces_dual_form(a, b, sa, sb, lam):
    vals = np.array([a, b, sa, sb])
    assert (support_pieces(lam) @ vals).min() == pytest.approx(pentagon_support(a, b, min(sa, sb), lam), abs=1e-12)


@pytest.mark.parametrize("kind", [NE, KM_Y, KM_Z])
def test_fast_evaluator_matches_reference(kind, rng):
    c = random_channel(rng, 3, 2, 3)
    nu, nv = (1, 3) if kind == KM_Y else (3, 1) if kind == KM_Z else (3, 2)
    q = rng.dirichlet(np.ones(nu * nv * 3)).reshape(nu, nv, 3)
    fast = _Evaluator(c, kind).values(q)
    if kind == NE:
        ref = ne_outer_constraints(AuxTriple.from_joint(q), c).as_tuple()
    elif kind == KM_Y:
        ref = km_oy_constraints(AuxPair.from_joint(q[0]), c).as_tuple()
    else:
        ref = km_oz_constraints(AuxPair.from_joint(q[:, 0]), c).as_tuple()
    assert np.allclose(fast, ref, atol=1e-12)


@pytest.mark.parametrize("kind", [NE, KM_Y, KM_Z])
def test_gradients_match_finite_differences(kind, rng):
    c = random_channel(rng, 2, 3, 2)
    q = rng.dirichlet(np.ones(8) * 3).reshape(2, 2, 2)
    ev = _Evaluator(c, kind)
    _, g = ev.values_and_grads(q)
    h = 1e-6
    for idx in [(0, 0, 0), (1, 0, 1), (0, 1, 1)]:
        d = np.zeros_like(q)
        d[idx] = h
        fd = (ev.values(q + d) - ev.values(q - d)) / (2 * h)
        assert np.allclose(fd, g[(slice(None),) + idx], atol=1e-6)


def test_weighted_objective_cases(half):
    a = explicit_triple()
    s = ne_outer_constraints(a, half)
    assert weighted_objective(a, half, 1.0) == pytest.approx(s.r1_max)
    assert weighted_objective(a, half, 0.0) == pytest.approx(s.r2_max)
    assert weighted_objective(a, half, 0.5) == pytest.approx(0.37112467040011243 / 2, abs=1e-12)
    law = TimeShareLaw([0.5, 0.5], [[0.2, 0.8], [0.8, 0.2]])
    assert weighted_objective(law, half, 0.5, "cvdm") > 0
    with pytest.raises(ValueError):
        weighted_objective(a, half, 0.5, "sato")


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(u_card=0)
    with pytest.raises(ValueError):
        OptimizerConfig(conv_tol=0)
    with pytest.raises(ValueError):
        OptimizerConfig(mode="annealing")
    cfg = OptimizerConfig()
    assert cfg.cards(2) == (4, 4)
    assert cfg.resolved_mode((4, 4, 2)) == CONTINUOUS
    assert cfg.resolved_mode((2, 2, 2)) == DETERMINISTIC
    assert cfg.resolved_mode((4, 1, 2), KM_Z) == CONTINUOUS


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.5, 1.0])
def test_ascent_history_is_monotone(lam, rng):
    c = random_channel(rng)
    feas = _Feasible((3, 3, 2))
    run = ascend(feas.sample(rng), _Evaluator(c, NE), lam, feas)
    hist = np.array(run.history)
    assert np.all(np.diff(hist) >= -1e-12)
    assert run.value == hist[-1]


def test_ascent_with_fixed_input_law(half, rng):
    feas = _Feasible((3, 3, 2), px=[0.5, 0.5])
    run = ascend(feas.sample(rng), _Evaluator(half, NE), 0.5, feas)
    assert np.allclose(run.q.sum((0, 1)), [0.5, 0.5], atol=1e-9)
    assert np.all(np.diff(run.history) >= -1e-12)


def test_restart_dominance(half):
    one = max_weighted_sum(half, 0.7, NE, OptimizerConfig(restarts=1, seed=5))
    many = max_weighted_sum(half, 0.7, NE, OptimizerConfig(restarts=4, seed=5))
    assert many.value >= one.value
    assert many.restart_values[0] == one.restart_values[0]


def test_seed_determinism(half):
    a = max_weighted_sum(half, 0.3, NE, FAST)
    b = max_weighted_sum(half, 0.3, NE, FAST)
    assert a.value == b.value and np.array_equal(a.q, b.q)


def test_ne_sum_rate_reaches_symmetric_witness(half):
    res = max_weighted_sum(half, 0.5, NE)
    witness = true_ne_sum(half)
    assert witness == pytest.approx(0.3725562489, abs=1e-9)
    assert 2 * res.value >= witness - 1e-7
    assert 2 * res.value <= witness + 1e-6
    assert isinstance(res.aux, AuxTriple)


def test_axis_weight_gives_z_capacity(half):
    assert max_weighted_sum(half, 1.0, NE, FAST).value == pytest.approx(Z_CAPACITY, abs=1e-6)
    assert max_weighted_sum(half, 0.0, NE, FAST).value == pytest.approx(Z_CAPACITY, abs=1e-6)


def test_noiseless_collapse(clean):
    assert max_weighted_sum(clean, 0.5, NE, FAST).value == pytest.approx(0.5, abs=1e-6)


def test_symmetric_input_restriction_loses_nothing(half):
    free = max_weighted_sum(half, 0.5, NE, FAST)
    fixed = max_weighted_sum(half, 0.5, NE, OptimizerConfig(restarts=3, fixed_px=(0.5, 0.5)))
    assert abs(free.value - fixed.value) <= 1e-4


def test_km_halves_exceed_ne(half):
    km = min(max_weighted_sum(half, 0.5, k, FAST).value for k in (KM_Y, KM_Z))
    assert 2 * km == pytest.approx(0.3743955, abs=1e-6)
    assert 2 * km > true_ne_sum(half) + 1e-3


def test_oracle_pin_deterministic_family(half):
    # exhaustive deterministic-map grid at step 1/64, pinned before the build
    assert 2 * brute_force_oracle(half, 0.5, NE, 1 / 64) == pytest.approx(0.3218842378690553, abs=1e-12)


def test_ascent_refines_oracle_in_same_family(half):
    oracle = brute_force_oracle(half, 0.5, NE, 1 / 64)
    ascent = max_weighted_sum(half, 0.5, NE, OptimizerConfig(restarts=2, u_card=2, v_card=2))
    assert ascent.value >= oracle - 1e-9
    assert ascent.value <= oracle + 5e-3


def test_oracle_stochastic_grid_and_start(half):
    value, q = brute_force_oracle(half, 0.5, NE, 1 / 8, deterministic=False, return_argmax=True)
    assert 2 * value == pytest.approx(true_ne_sum(half), abs=1e-9)  # the witness lies on this grid
    refined = max_weighted_sum(half, 0.5, NE, OptimizerConfig(restarts=1), starts=[q])
    assert refined.value >= value - 1e-9


def test_oracle_axis_weight_matches_input_scan(rng):
    c = random_channel(rng)
    grid = np.linspace(0, 1, 65)
    # max over P(X) of I(X;Y), reached by U = X
    scan = max(ne_outer_constraints(AuxTriple(np.ones((1, 1)), np.array([[[1 - p, p]]])), c).sum_max_b
               for p in grid)
    assert brute_force_oracle(c, 1.0, NE, 1 / 64, nu=2, nv=1) == pytest.approx(scan, abs=1e-12)


def test_oracle_constant_channel():
    w = np.zeros((2, 2, 2))
    w[:, 0, 1] = 1.0
    assert brute_force_oracle(BroadcastChannel(w), 0.5, NE, 1 / 16) == pytest.approx(0.0, abs=1e-12)


def test_oracle_grid_limit(half):
    with pytest.raises(GridTooLargeError) as e:
        brute_force_oracle(half, 0.5, NE, 1 / 64, nu=2, nv=2, deterministic=False)
    assert "parameters" in str(e.value) and "limit" in str(e.value)


def test_cvdm_grid_maximum(half):
    res = max_weighted_sum(half, 0.5, "cvdm")
    assert 2 * res.value == pytest.approx(0.3616403303015148, abs=1e-12)
    assert isinstance(res.aux, TimeShareLaw)
    with pytest.raises(GridTooLargeError):
        max_weighted_sum(half, 0.5, "cvdm", OptimizerConfig(cvdm_step=1 / 2048))


def test_trace_noiseless(clean):
    tr = trace_region(clean, NE, 5, FAST)
    assert tr.polygon.sum_rate == pytest.approx(1.0, abs=1e-6)
    assert np.all(tr.values >= 0)
    assert len(tr.iterations) == 5


def test_trace_writes_csv_and_sidecar(half, tmp_path):
    tr = trace_region(half, "km", 5, OptimizerConfig(restarts=2))
    tr.write(tmp_path / "km.csv")
    side = json.loads((tmp_path / "km.json").read_text())
    assert side["bound"] == "km" and len(side["values"]) == 5
    assert set(side["halves"]) == {KM_Y, KM_Z}
    assert (tmp_path / "km.csv").read_text().startswith("r1,r2\n")


def test_traced_regions_on_bssc(half):
    cfg = OptimizerConfig(restarts=3)
    ne = trace_region(half, NE, 9, cfg).polygon
    km = trace_region(half, "km", 9, cfg).polygon
    assert ne.contains(RatePoint(0.2411, 0.1204), tol=1e-3)
    assert km.contains(RatePoint(0.1861, 0.1861), tol=1e-3)
    # the true NE optimum is above 0.3722, so this point is inside NE as well
    assert ne.contains(RatePoint(0.1861, 0.1861), tol=1e-3)
    assert not ne.contains(RatePoint(0.1875, 0.1875), tol=1e-6)


def test_compare_bounds_orders_bssc(half):
    rep = compare_bounds(half, OptimizerConfig(restarts=2), num_angles=5)
    assert rep.ok, rep.violations
    s = rep.sum_rates
    assert s["cvdm"] < s["ne"] < s["km"]
    assert s["cvdm"] == pytest.approx(0.3616, abs=1e-3)
    assert max(rep.asymmetry.values()) <= 1e-3


def test_compare_bounds_forced_fault(clean):
    rep = compare_bounds(clean, OptimizerConfig(restarts=2), num_angles=3, tol=-1.0)
    assert not rep.ok
    assert all(v == pytest.approx(1.0, abs=1e-6) for v in rep.sum_rates.values())
