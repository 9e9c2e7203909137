import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from levyput import fleet
from levyput.american import PutProblem, candidate_value, optimal_threshold, value_function
from levyput.models import JumpComponent, LevyModel, PhaseType
from levyput.montecarlo import (
    Estimate,
    SimConfig,
    drift_horizon,
    estimate_passage,
    estimate_put_value,
    sample_inf_and_endpoint,
    sample_phase_type,
    shard_estimates,
    simulate_paths,
    z_between,
)
from levyput.passage import PassageQuery
from levyput.wiener_hopf import inf_law

from conftest import FLEET


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_paths=10)
    with pytest.raises(ValueError):
        SimConfig(seed=-1)
    with pytest.raises(ValueError):
        SimConfig(shards=0)
    with pytest.raises(ValueError):
        SimConfig(r0_horizon_epsilon=1.5)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=200))
def test_estimate_std_error(xs):
    e = Estimate.from_samples(xs)
    assert e.n == len(xs)
    assert e.std_error >= 0
    assert e.std_error == pytest.approx(np.std(xs, ddof=1) / math.sqrt(len(xs)), rel=1e-9, abs=1e-12)


def test_z_helpers():
    a, b = Estimate(1.0, 0.3, 10), Estimate(1.5, 0.4, 10)
    assert z_between(a, b) == pytest.approx(1.0)
    assert Estimate(2.0, 0.0, 5).z_score(2.0) == 0.0
    assert Estimate(2.0, 0.0, 5).z_score(2.1) == math.inf


def test_phase_type_sampler():
    rng = np.random.default_rng(1)
    pt = fleet.MODELS["two_sided"].down.law
    x = sample_phase_type(pt, rng, 200_000)
    assert abs(x.mean() - pt.mean) < 4 * x.std() / math.sqrt(x.size)
    e = sample_phase_type(PhaseType.exponential(2.0), rng, 100_000)
    assert stats.kstest(e, "expon", args=(0, 0.5)).pvalue > 0.001


def test_bridge_minimum_law():
    # inf of sigma B over [0, 1] is -|N(0, sigma^2)|
    rng = np.random.default_rng(2)
    b = simulate_paths(LevyModel(2.0, 0.0), rng, 100_000, horizon=1.0)
    ref = stats.halfnorm(scale=math.sqrt(2.0))
    assert stats.kstest(-b.running_inf, ref.cdf).pvalue > 0.001


def test_determinism():
    cfg = SimConfig(n_paths=5000, seed=42, shards=3)
    m = fleet.MODELS["two_sided"]
    a = sample_inf_and_endpoint(m, 1.0, cfg)
    b = sample_inf_and_endpoint(m, 1.0, cfg)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    c = sample_inf_and_endpoint(m, 1.0, SimConfig(n_paths=5000, seed=43, shards=3))
    assert not np.array_equal(a[0], c[0])


def test_shard_merge_is_ordered_concatenation():
    cfg = SimConfig(n_paths=1001, seed=5, shards=4)
    parts, merged = shard_estimates(cfg, 0, lambda rng, n: rng.standard_normal(n))
    assert sum(p.n for p in parts) == merged.n == 1001
    assert merged.mean == pytest.approx(sum(p.mean * p.n for p in parts) / 1001)


def test_monotone_paths_have_zero_infimum(mc_small):
    inf, _ = sample_inf_and_endpoint(fleet.MODELS["subordinator"], 1.0, mc_small)
    assert np.all(inf == 0)
    inf, _ = sample_inf_and_endpoint(LevyModel(0.0, 1.0), 1.0, mc_small)
    assert np.all(inf == 0)


def test_brownian_infimum_mean(bm, mc):
    inf, _ = sample_inf_and_endpoint(bm, 1.0, mc)
    assert Estimate.from_samples(-inf).z_score(1.0) < 3


def test_irregular_atom_frequency(bv_up, mc):
    inf, _ = sample_inf_and_endpoint(bv_up, 2.0, mc)
    assert Estimate.from_samples(inf == 0).z_score(2 / (1 + math.sqrt(3))) < 3


@pytest.mark.parametrize("name", FLEET)
def test_endpoint_mean_no_bias(name, mc):
    m = fleet.MODELS[name]
    r = 0.8
    _, end = sample_inf_and_endpoint(m, r, mc)
    assert Estimate.from_samples(end).z_score(m.mean / r) < 3


@pytest.mark.parametrize("name", [n for n in FLEET if fleet.MODELS[n].moves_down])
def test_infimum_ks_against_mixture(name, mc):
    m = fleet.MODELS[name]
    _, mix = inf_law(m, 1.0)
    inf, _ = sample_inf_and_endpoint(m, 1.0, mc)
    y = np.sort(-inf[inf < 0])
    n = y.size
    F = (mix.cdf(y) - mix.atom0) / (1 - mix.atom0)
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert d < 1.63 / math.sqrt(n)


def test_r_zero_truncation():
    m = fleet.MODELS["brownian_drift"]  # all-time -inf ~ Exp(0.5)
    T = drift_horizon(m, 0.0, 1e-6)
    assert T > 0
    cfg = SimConfig(n_paths=40_000, seed=11)
    inf, _ = sample_inf_and_endpoint(m, 0.0, cfg)
    assert Estimate.from_samples(-inf).z_score(2.0) < 3
    with pytest.raises(Exception):
        sample_inf_and_endpoint(fleet.MODELS["sn_bv_down"], 0.0, cfg)


def test_passage_depth_zero_regular(bm, mc_small):
    e = estimate_passage(bm, PassageQuery(1.0, 0.0, 0.0), "down", mc_small)
    assert e.mean == 1.0 and e.std_error == 0.0


def test_put_value_mc(mc):
    p = fleet.put_problem("brownian")
    e = estimate_put_value(p, 1.0, 0.0, mc)
    assert e.z_score(math.exp(-1)) < 3
    imm = estimate_put_value(p, -1.0, 0.0, mc)
    assert imm.mean == pytest.approx(2 - math.exp(-1)) and imm.std_error == 0


@pytest.mark.parametrize("name", [n for n in FLEET if n != "subordinator"])
def test_put_value_mc_threshold_beats_lower(name, mc_small):
    p = fleet.put_problem(name)
    s = optimal_threshold(p)
    x = s.x_star
    best = estimate_put_value(p, x, s.x_star, mc_small)
    low = estimate_put_value(p, x, s.x_star - 0.3, mc_small, stream=9)
    assert best.mean > low.mean
    assert best.z_score(value_function(s, p, x)) < 3
    assert low.z_score(candidate_value(p, s.x_star - 0.3, x, s)) < 3
