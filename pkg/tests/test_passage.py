import math

import numpy as np
import pytest

from levyput import fleet
from levyput.errors import ModelClassError, UnsupportedLimitError
from levyput.models import JumpComponent, LevyModel, PhaseType
from levyput.montecarlo import SimConfig, estimate_passage
from levyput.passage import (
    DegenerateModelWarning,
    PassageQuery,
    down_passage_sn_printed,
    down_passage_transform,
    fluctuation_identity_check,
    h_alpha_beta,
    passage_double_sum,
    pecherskii_rogozin_check,
    pecherskii_rogozin_sides,
    up_passage_transform,
)
from levyput.wiener_hopf import inf_law, phi_of_alpha

from conftest import FLEET

SN = [n for n in FLEET if fleet.MODELS[n].spectrally_negative and not fleet.MODELS[n].negative_subordinator]
DOWN = [n for n in FLEET if fleet.MODELS[n].moves_down]


def test_query_validation():
    with pytest.raises(ValueError):
        PassageQuery(-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PassageQuery(1.0, 0.0, -1.0)


def test_up_examples(bm):
    assert up_passage_transform(bm, PassageQuery(1.0, 0.0, 1.0)) == pytest.approx(math.exp(-1), rel=1e-14)
    for name in SN:
        assert up_passage_transform(fleet.MODELS[name], PassageQuery(0.7, 0.0, 0.0)) == 1.0


def test_subordinator_overshoot_memoryless():
    eta = 2.0
    sub = LevyModel(0.0, 0.0, up=JumpComponent(1.5, PhaseType.exponential(eta)))
    for x in (0.3, 1.0, 2.5):
        for beta in (0.5, 1.0):
            whole = up_passage_transform(sub, PassageQuery(0.4, beta, x))
            # X at passage = x + Exp(eta) overshoot, so the beta-weight includes e^{-beta x}
            base = up_passage_transform(sub, PassageQuery(0.4, 0.0, x))
            assert whole == pytest.approx(math.exp(-beta * x) * eta / (eta + beta) * base, rel=1e-12)


def test_up_alpha_zero_rules():
    sub = fleet.MODELS["subordinator"]
    assert up_passage_transform(sub, PassageQuery(0.0, 0.0, 1.0)) == 1.0
    two = fleet.MODELS["two_sided"]
    assert two.mean < 0
    assert 0 < up_passage_transform(two, PassageQuery(0.0, 0.0, 1.0)) < 1
    upward = LevyModel(1.0, 2.0, up=two.up, down=two.down)
    assert upward.mean > 0
    with pytest.raises(UnsupportedLimitError):
        up_passage_transform(upward, PassageQuery(0.0, 0.0, 1.0))


def test_down_examples(bm):
    assert down_passage_transform(bm, PassageQuery(1.0, 0.0, 1.0)) == pytest.approx(math.exp(-1), rel=1e-12)
    for name in DOWN:
        m = fleet.MODELS[name]
        if name != "sn_bv_up":
            assert down_passage_transform(m, PassageQuery(0.8, 0.0, 0.0)) == pytest.approx(1.0, abs=1e-12)


def test_down_no_downward_movement_flags():
    with pytest.warns(DegenerateModelWarning):
        assert down_passage_transform(fleet.MODELS["subordinator"], PassageQuery(1.0, 0.0, 1.0)) == 0.0


@pytest.mark.parametrize("beta", [0.0, 0.5, 2.0])
def test_down_boundary_gap_matches_atom(beta):
    m = fleet.MODELS["sn_bv_up"]
    f, mix = inf_law(m, 2.0)
    val = down_passage_transform(m, PassageQuery(2.0, beta, 0.0))
    assert val == pytest.approx(1.0 - mix.atom0 / f.real(beta), abs=1e-12)
    assert val < 1


def test_double_sum_matches_mixture_quadrature(bm_exp):
    from scipy import integrate

    _, mix = inf_law(bm_exp, 1.0)
    for beta, x in ((0.0, 0.5), (1.0, 1.0), (2.5, 0.2)):
        closed = passage_double_sum(mix.terms, beta, x)
        quad, _ = integrate.quad(lambda y: math.exp(-beta * y) * float(mix.density(y)), x, np.inf)
        assert closed == pytest.approx(quad, abs=1e-8)


@pytest.mark.parametrize("name", DOWN)
def test_monotone(name):
    m = fleet.MODELS[name]
    xs = np.linspace(0, 3, 13)
    for a, b in ((0.5, 0.0), (0.5, 1.0), (2.0, 0.5)):
        v = [down_passage_transform(m, PassageQuery(a, b, x)) for x in xs]
        assert np.all(np.diff(v) <= 1e-12)
        assert all(0 <= t <= 1 + 1e-12 for t in v)
    for x in (0.0, 0.5, 2.0):
        va = [down_passage_transform(m, PassageQuery(a, 0.5, x)) for a in (0.2, 0.5, 1.0, 3.0)]
        vb = [down_passage_transform(m, PassageQuery(1.0, b, x)) for b in (0.0, 0.5, 1.0, 3.0)]
        assert np.all(np.diff(va) <= 1e-12)
        assert np.all(np.diff(vb) <= 1e-12)


@pytest.mark.parametrize("name", [n for n in FLEET if not fleet.MODELS[n].negative_subordinator])
def test_up_monotone(name):
    m = fleet.MODELS[name]
    v = [up_passage_transform(m, PassageQuery(0.7, 0.3, x)) for x in np.linspace(0, 3, 13)]
    assert np.all(np.diff(v) <= 1e-12)


def test_printed_sn_formula(bm):
    c = down_passage_sn_printed(bm, PassageQuery(1.0, 2.0, 1.0))
    assert c.value == pytest.approx(math.exp(-3), rel=1e-12)
    assert c.agrees


@pytest.mark.parametrize("name", SN)
def test_printed_sn_formula_agrees_across_fleet(name):
    m = fleet.MODELS[name]
    phi = phi_of_alpha(m, 1.0)
    for beta in (phi, phi + 0.5, phi + 3.0):
        for x in (0.0, 0.4, 2.0):
            assert down_passage_sn_printed(m, PassageQuery(1.0, beta, x)).agrees


def test_printed_sn_formula_rejects_divergent(bm):
    with pytest.raises(ValueError):
        down_passage_sn_printed(bm, PassageQuery(1.0, 0.5, 1.0))
    with pytest.raises(ModelClassError):
        down_passage_sn_printed(fleet.MODELS["two_sided"], PassageQuery(1.0, 2.0, 1.0))


def test_printed_formula_large_beta_tends_to_zero(bv_up):
    # beyond the barrier the weight e^{beta X_tau} vanishes as beta grows
    vals = [down_passage_sn_printed(bv_up, PassageQuery(2.0, b, 0.5)).value for b in (5.0, 20.0, 80.0)]
    assert vals[0] > vals[1] > vals[2] >= 0
    assert vals[2] < 1e-10


def test_h_alpha_beta(bm):
    assert h_alpha_beta(bm, 1.0, 1.0, -1.0) == pytest.approx(math.exp(-1))
    assert h_alpha_beta(bm, 1.0, 0.0, 0.0) == 1.0
    assert h_alpha_beta(bm, 1.0, 0.0, 1.0) == pytest.approx(math.exp(-1), rel=1e-12)
    xs = np.array([1e-9, 1e-6])
    assert all(abs(h_alpha_beta(bm, 1.0, 0.5, x) - 1.0) < 1e-5 for x in xs)


def test_pecherskii_rogozin_brownian(bm):
    lhs, rhs = pecherskii_rogozin_sides(bm, 1.0, 0.0, 1.0)
    assert lhs == pytest.approx(0.5) and rhs == pytest.approx(0.5)


@pytest.mark.parametrize("name", FLEET)
@pytest.mark.parametrize("q, beta", [(1.0, 0.0), (2.0, 0.5), (3.0, 1.0)])
def test_pecherskii_rogozin_fleet(name, q, beta):
    assert pecherskii_rogozin_check(fleet.MODELS[name], 1.0, beta, q) < 1e-10


@pytest.mark.parametrize("name", ["brownian", "sn_bv_up", "subordinator", "two_sided"])
def test_pecherskii_rogozin_limit_q_to_beta(name):
    m = fleet.MODELS[name]
    at = pecherskii_rogozin_sides(m, 1.0, 0.7, 0.7)
    near = pecherskii_rogozin_sides(m, 1.0, 0.7, 0.7 + 1e-6)
    assert at[1] == pytest.approx(near[1], abs=1e-5)
    assert at[0] == pytest.approx(at[1], abs=1e-8)


def test_pecherskii_rogozin_subordinator_formula():
    sub = fleet.MODELS["subordinator"]

    def phi(l):
        return 0.5 * l + 1.0 * (1 - 2.0 / (2.0 + l))

    q, beta, a = 2.0, 0.5, 1.0
    lhs, _ = pecherskii_rogozin_sides(sub, a, beta, q)
    assert lhs == pytest.approx((phi(q) - phi(beta)) / ((q - beta) * (a + phi(q))), abs=1e-10)


def test_passage_mc_agreement():
    cfg = SimConfig(n_paths=100_000, seed=99)
    m = fleet.MODELS["two_sided"]
    for d, fn in (("down", down_passage_transform), ("up", up_passage_transform)):
        q = PassageQuery(1.0, 0.5, 0.7)
        est = estimate_passage(m, q, d, cfg)
        assert est.z_score(fn(m, q)) < 3


def test_passage_mc_brownian(bm):
    est = estimate_passage(bm, PassageQuery(1.0, 0.0, 1.0), "down", SimConfig(n_paths=100_000, seed=3))
    assert est.z_score(math.exp(-1)) < 3


def test_fluctuation_identity_two_sided():
    lhs, rhs, z = fluctuation_identity_check(fleet.MODELS["two_sided"], 1.0, 0.5, 0.7, SimConfig(n_paths=100_000, seed=8))
    assert z < 3


def test_fluctuation_identity_at_zero_level(bm):
    lhs, rhs, z = fluctuation_identity_check(bm, 1.0, 0.0, 0.0, SimConfig(n_paths=1000, seed=8))
    assert lhs.mean == 1.0 and rhs.mean == 1.0 and z == 0.0
