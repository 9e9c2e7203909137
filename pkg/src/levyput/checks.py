"""Fleet-wide consistency checks: mixture path vs passage path vs Monte Carlo.

Used by the ``verify`` command. Each check is a named statistic compared
with a tolerance so that failures are reported rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import fleet
from .american import (
    optimal_threshold,
    pasting_diagnosis,
    threshold_perturbation,
    value_function,
    verify_optimality,
)
from .models import classify_regularity
from .montecarlo import SimConfig, estimate_put_value, sample_inf_and_endpoint
from .passage import pecherskii_rogozin_check
from .wiener_hopf import wh_factorization_check

THETAS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
KS_1PCT = 1.628


@dataclass(frozen=True)
class CheckResult:
    model: str
    check: str
    statistic: float
    tolerance: float
    passed: bool

    def to_dict(self):
        return asdict(self)


def ks_continuous_part(samples, mix) -> tuple[float, int]:
    """KS distance of the strictly positive samples against the conditional mixture CDF."""
    y = np.sort(samples[samples > 0])
    n = y.size
    if n == 0:
        return 0.0, 0
    F = (mix.cdf(y) - mix.atom0) / (1.0 - mix.atom0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n))), n


def check_model(name: str, cfg: SimConfig, n_grid: int = 50) -> list[CheckResult]:
    p = fleet.put_problem(name)
    m = p.model
    s = optimal_threshold(p)
    out = []

    def add(check, stat, tol, ok=None):
        ok = (abs(stat) <= tol) if ok is None else ok
        out.append(CheckResult(name, check, float(stat), float(tol), bool(ok)))

    add("wiener_hopf_residual", max(abs(wh_factorization_check(m, 1.0, t)) for t in THETAS), 1e-8)
    add("mixture_mass", s.inf_law.mass() - 1.0, 1e-8)
    reg = classify_regularity(m).regular
    agree = reg == (s.atom0 == 0) == (s.pasting == "Smooth")
    add("regularity_atom_pasting", 0.0 if agree else 1.0, 0.0)
    add("pasting_numeric", pasting_diagnosis(s, p).numeric_derivative - s.right_derivative, 1e-3)

    grid = np.linspace(s.x_star - 1.0, s.x_star + 3.0, n_grid)
    va = value_function(s, p, grid)
    vb = value_function(s, p, grid, path="passage")
    add("value_paths", float(np.max(np.abs(va - vb))), 1e-9)
    left = p.strike - math.exp(s.x_star)
    right = p.strike * s.inf_law.tail_moment(0.0, 0.0) - math.exp(s.x_star) * s.inf_law.tail_moment(1.0, 0.0) / s.discount_factor
    add("continuity_at_threshold", max(abs(right - left), abs(value_function(s, p, s.x_star + 1e-12) - left)), 1e-9)
    low = float(np.min(va - np.maximum(p.strike - np.exp(grid), 0.0)))
    add("lower_bound", low, 0.0, low >= -1e-12)
    high = float(np.max(va - p.strike))
    add("upper_bound", high, 0.0, high <= 1e-12)
    for q, b in ((1.0, 0.0), (2.0, 0.5), (3.0, 1.0)):
        add(f"pecherskii_rogozin_q{q:g}_b{b:g}", pecherskii_rogozin_check(m, 1.0, b, q), 1e-10)

    inf, _ = sample_inf_and_endpoint(m, p.rate, cfg, stream=20)
    y = -inf
    n = y.size
    freq = float(np.mean(y == 0))
    se = math.sqrt(freq * (1 - freq) / n)
    z = abs(freq - s.atom0) / se if se > 0 else (0.0 if abs(freq - s.atom0) < 1e-12 else math.inf)
    add("mc_atom_z", z, 3.0)
    if s.atom0 < 1:
        d, nc = ks_continuous_part(y, s.inf_law)
        add("mc_ks", d, KS_1PCT / math.sqrt(nc))
    x = s.x_star + 0.5
    est = estimate_put_value(p, x, s.x_star, cfg, stream=21)
    add("mc_put_value_z", est.z_score(value_function(s, p, x)), 3.0)
    rep = verify_optimality(s, p, grid, cfg)
    for c in rep.checks:
        add(f"condition_{c.condition}_t{c.t:g}", c.statistic, 0.0, c.passed)
    for delta in (-0.2, 0.2):
        pc = threshold_perturbation(s, p, delta)
        add(f"perturbation_{delta:+g}_{pc.violated}", pc.statistic, 0.0, pc.passed)
    return out


def verify_fleet(cfg: SimConfig, names=None) -> list[CheckResult]:
    res = []
    for name in names or fleet.MODELS:
        res.extend(check_model(name, cfg))
    return res
