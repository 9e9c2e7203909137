"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the summary lines appear at
the end of the session) or directly with ``python3 tests/test_acceptance.py``.
Monte Carlo checks use n = 10^5 paths.
"""

import math
import sys

import numpy as np
import pytest
from scipy import integrate

from levyput import fleet
from levyput.american import (
    CONTINUOUS,
    SMOOTH,
    fourier_check,
    optimal_threshold,
    pasting_diagnosis,
    threshold_perturbation,
    value_function,
    verify_optimality,
)
from levyput.checks import KS_1PCT, ks_continuous_part
from levyput.models import classify_regularity, laplace_exponent
from levyput.montecarlo import Estimate, SimConfig, estimate_put_value, sample_inf_and_endpoint
from levyput.passage import pecherskii_rogozin_sides
from levyput.wiener_hopf import (
    atom_at_zero,
    inf_law,
    inf_law_spectrally_negative,
    minus_factor,
    phase_type_roots,
    phi_of_alpha,
    scale_function,
    wh_factorization_check,
)

N_PATHS = 100_000
SEED = 2005
RESULTS: dict[int, tuple[bool, str]] = {}

# members for which Phi and the scale function exist (the negative
# subordinator never moves up)
SN = [n for n, m in fleet.MODELS.items() if m.spectrally_negative and not m.negative_subordinator]


def cfg(stream_seed=0):
    return SimConfig(n_paths=N_PATHS, seed=SEED + stream_seed)


def record(n, checks):
    """``checks`` is a list of (label, ok); the criterion passes if all do."""
    bad = [label for label, ok in checks if not ok]
    ok = not bad
    detail = f"{len(checks)} checks" + ("" if ok else "; failed: " + ", ".join(bad))
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def summary_lines():
    return [f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} ({d})" for n, (ok, d) in sorted(RESULTS.items())]


def test_criterion_01_black_scholes_reference():
    p = fleet.put_problem("brownian")
    s = optimal_threshold(p)
    v1 = value_function(s, p, 1.0)
    v1b = value_function(s, p, 1.0, path="passage")
    est = estimate_put_value(p, 1.0, s.x_star, cfg(1))
    record(1, [
        ("x_star = 0", abs(s.x_star) <= 1e-10),
        ("discount_factor = 1/2", abs(s.discount_factor - 0.5) <= 1e-10),
        ("v(1) = e^-1 (mixture)", abs(v1 - math.exp(-1)) <= 1e-10),
        ("v(1) = e^-1 (passage)", abs(v1b - math.exp(-1)) <= 1e-10),
        ("smooth pasting", s.pasting == SMOOTH),
        ("v'(0+) = -1", abs(s.right_derivative + 1.0) <= 1e-10),
        (f"MC v(1) z={est.z_score(math.exp(-1)):.2f} < 3", est.z_score(math.exp(-1)) < 3),
    ])


def test_criterion_02_irregular_reference():
    p = fleet.put_problem("sn_bv_up")
    m = p.model
    target = 2 / (1 + math.sqrt(3))
    phi = phi_of_alpha(m, 2.0)
    via_scale = inf_law_spectrally_negative(m, 2.0).atom0
    via_factor = atom_at_zero(minus_factor(phase_type_roots(m, 2.0)))
    inf, _ = sample_inf_and_endpoint(m, 2.0, cfg(2))
    freq = Estimate.from_samples(inf == 0)
    s = optimal_threshold(p)
    d = pasting_diagnosis(s, p)
    record(2, [
        ("Phi(2) = 1 + sqrt 3", abs(phi - (1 + math.sqrt(3))) <= 1e-12),
        ("atom via scale function", abs(via_scale - target) <= 1e-9),
        ("atom via factor limit", abs(via_factor - target) <= 1e-9),
        ("two analytic routes agree", abs(via_scale - via_factor) <= 1e-9),
        (f"MC atom z={freq.z_score(target):.2f} < 3", freq.z_score(target) < 3),
        ("pasting Continuous", s.pasting == CONTINUOUS),
        ("v'(x*+) + e^x* = K atom0", abs(s.right_derivative + math.exp(s.x_star) - p.strike * s.atom0) <= 1e-10),
        ("numeric difference", abs(d.numeric_derivative - s.right_derivative) <= 1e-3),
    ])


def test_criterion_03_wiener_hopf_factorization():
    checks = []
    for name, m in fleet.MODELS.items():
        worst = max(wh_factorization_check(m, 1.0, t) for t in (-2, -1, -0.5, 0.5, 1, 2))
        checks.append((f"{name} residual {worst:.1e}", worst < 1e-8))
    record(3, checks)


def test_criterion_04_pecherskii_rogozin():
    checks = []
    alpha = 1.0
    for name in SN:
        m = fleet.MODELS[name]
        for q, beta in ((1.0, 0.0), (2.0, 0.5), (3.0, 1.0)):
            lhs, rhs = pecherskii_rogozin_sides(m, alpha, beta, q)
            ref = 1.0 / (q + phi_of_alpha(m, alpha))
            checks.append((f"{name} q={q:g} b={beta:g}", abs(lhs - rhs) <= 1e-10 and abs(lhs - ref) <= 1e-10))
    record(4, checks)


def test_criterion_05_scale_functions():
    checks = []
    for name in SN:
        m = fleet.MODELS[name]
        for alpha in (0.5, 2.0):
            W = scale_function(m, alpha)
            for d in (1.0, 2.0, 5.0):
                lam = W.phi + d
                B = math.log(1e12) / d + 1.0
                got, _ = integrate.quad(lambda x: math.exp(-lam * x) * float(W(x)), 0, B, limit=400, epsabs=1e-15, epsrel=1e-12)
                want = 1.0 / (laplace_exponent(m, lam).real - alpha)
                checks.append((f"{name} a={alpha:g} l={lam:.3g}", abs(got - want) <= 1e-8 * abs(want)))
    sinh = dict(((z, k), c) for z, k, c in scale_function(fleet.MODELS["brownian"], 1.0).terms)
    want = {(1.0, 1): 0.5, (-1.0, 1): -0.5}
    checks.append(("W = sinh termwise", _same_terms(sinh, want)))
    lin = dict(((z, k), c) for z, k, c in scale_function(fleet.MODELS["sn_bv_up"], 0.0).terms)
    checks.append(("W = 1 + x termwise", _same_terms(lin, {(0.0, 1): 1.0, (0.0, 2): 1.0})))
    record(5, checks)


def _same_terms(got, want, tol=1e-12):
    if len(got) != len(want):
        return False
    for (z, k), c in want.items():
        match = [v for (gz, gk), v in got.items() if gk == k and abs(gz - z) <= tol]
        if len(match) != 1 or abs(match[0] - c) > tol:
            return False
    return True


def test_criterion_06_mixture_normalization_and_ks():
    checks = []
    for i, (name, m) in enumerate(fleet.MODELS.items()):
        p = fleet.put_problem(name)
        _, mix = inf_law(m, p.rate)
        total = mix.atom0 + mix.tail_moment(0.0, 0.0)
        checks.append((f"{name} mass {total:.12f}", abs(total - 1.0) <= 1e-8))
        if mix.atom0 < 1:
            inf, _ = sample_inf_and_endpoint(m, p.rate, cfg(60 + i))
            d, n = ks_continuous_part(-inf, mix)
            checks.append((f"{name} KS {d:.4f} on {n}", d < KS_1PCT / math.sqrt(n)))
    record(6, checks)


def test_criterion_07_value_function_paths():
    checks = []
    for name in fleet.MODELS:
        p = fleet.put_problem(name)
        s = optimal_threshold(p)
        xs = np.linspace(s.x_star - 1.0, s.x_star + 3.0, 50)
        a = value_function(s, p, xs)
        b = value_function(s, p, xs, path="passage")
        gap = float(np.max(np.abs(a - b)))
        # left limit is the payoff; right limit from the mixture formula just above x*
        left = p.strike - math.exp(s.x_star)
        jump = max(abs(value_function(s, p, s.x_star + 1e-12) - left), abs(candidate_right(s, p) - left))
        checks += [
            (f"{name} paths {gap:.1e}", gap <= 1e-9),
            (f"{name} continuity", jump <= 1e-9),
            (f"{name} v >= payoff", bool(np.all(a >= np.maximum(p.strike - np.exp(xs), 0) - 1e-12))),
            (f"{name} v <= K", bool(np.all(a <= p.strike + 1e-12))),
        ]
    record(7, checks)


def candidate_right(s, p):
    """The above-threshold formula evaluated exactly at ``x*`` (distance 0 to the barrier)."""
    mix, D = s.inf_law, s.discount_factor
    return p.strike * mix.tail_moment(0.0, 0.0) - math.exp(s.x_star) * mix.tail_moment(1.0, 0.0) / D


def test_criterion_08_fourier_identity():
    checks = []
    for name in ("brownian", "two_sided"):
        p = fleet.put_problem(name)
        s = optimal_threshold(p)
        for lam in (0.5, 1.0, 2.0):
            r = abs(fourier_check(s, p, lam))
            checks.append((f"{name} l={lam:g} residual {r:.1e}", r < 1e-4))
    record(8, checks)


def test_criterion_09_optimality_conditions():
    checks = []
    for i, name in enumerate(fleet.MODELS):
        p = fleet.put_problem(name)
        s = optimal_threshold(p)
        grid = np.linspace(s.x_star - 1.0, s.x_star + 3.0, 50)
        rep = verify_optimality(s, p, grid, cfg(90 + i), times=(0.5, 1.0))
        for c in rep.checks:
            checks.append((f"{name} ({c.condition}) t={c.t:g} stat={c.statistic:.3g}", c.passed))
        for delta in (-0.2, 0.2):
            pc = threshold_perturbation(s, p, delta)
            ok = pc.passed
            if s.atom0 > 0:
                ok = ok and pc.violated == "continuity" and abs(pc.statistic - pc.predicted) <= 1e-9
            elif delta < 0:
                ok = ok and pc.violated == "lower-bound"
            checks.append((f"{name} y=x*{delta:+g} {pc.violated}", ok))
    record(9, checks)


def test_criterion_10_regularity_pasting_equivalence():
    checks = []
    for name in fleet.MODELS:
        p = fleet.put_problem(name)
        s = optimal_threshold(p)
        reg = classify_regularity(p.model).regular
        checks.append((f"{name}", reg == (s.atom0 == 0) == (s.pasting == SMOOTH)))
    record(10, checks)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
