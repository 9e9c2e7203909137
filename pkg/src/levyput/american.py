"""Perpetual American put ``sup_tau E_x[exp(-r tau) (K - exp(X_tau))^+]``.

The optimal rule is to stop at the first strict passage below ``x*`` with
``exp(x*) = K E[exp(I)]``, where ``I`` is the infimum of X at an independent
exponential(r) time (the all-time infimum when r = 0). Everything here is
assembled from the law of ``-I`` produced by :mod:`levyput.wiener_hopf`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import NotOptimalToStopError, ValidationError
from .models import LevyModel, classify_regularity
from .montecarlo import SimConfig, estimate_discounted, estimate_stopped_discounted
from .passage import DegenerateModelWarning, PassageQuery, down_passage_transform
from .wiener_hopf import ExpMixture, RationalFactor, inf_law

SMOOTH, CONTINUOUS = "Smooth", "Continuous"


@dataclass(frozen=True)
class PutProblem:
    strike: float
    rate: float
    model: LevyModel

    def __post_init__(self):
        if not (math.isfinite(self.strike) and self.strike > 0):
            raise ValidationError("strike", "must be positive")
        if not (math.isfinite(self.rate) and self.rate >= 0):
            raise ValidationError("rate", "must be >= 0")
        if self.rate == 0 and not self.model.mean > 0:
            raise NotOptimalToStopError(
                "r = 0 and X does not drift to +infinity: it is not optimal to stop in a finite time"
            )

    def scaled(self, c: float) -> "PutProblem":
        return PutProblem(self.strike * c, self.rate, self.model)


@dataclass(frozen=True)
class PutSolution:
    x_star: float
    discount_factor: float
    inf_law: ExpMixture
    factor: RationalFactor = field(repr=False)
    pasting: str
    atom0: float
    right_derivative: float


def optimal_threshold(p: PutProblem) -> PutSolution:
    factor, mix = inf_law(p.model, p.rate)
    # E[exp(I)] from the mixture: atom plus exact integrals of e^{-y} f(y)
    disc = float(mix.atom0 + mix.tail_moment(1.0, 0.0))
    atom = mix.atom0
    x_star = math.log(p.strike * disc)
    return PutSolution(
        x_star=x_star,
        discount_factor=disc,
        inf_law=mix,
        factor=factor,
        pasting=SMOOTH if atom == 0 else CONTINUOUS,
        atom0=atom,
        right_derivative=-math.exp(x_star) + p.strike * atom,
    )


def _mixture_value(mix: ExpMixture, disc: float, K: float, y: float, x):
    """Expectation form: ``E[(K D - e^{x+I}) 1(-I > x - y)] / D`` for x >= y, ``K - e^x`` below."""
    x = np.asarray(x, dtype=float)
    u = x - y
    above = u >= 0
    uu = np.where(above, u, 0.0)
    v = K * mix.tail_moment(0.0, uu) - np.exp(x) * mix.tail_moment(1.0, uu) / disc
    out = np.where(above, v, K - np.exp(x))
    return float(out) if out.ndim == 0 else out


def value_function(s: PutSolution, p: PutProblem, x, path: str = "mixture"):
    """Optimal value ``v(x)``.

    ``path='mixture'`` integrates the payoff against the law of ``-I``;
    ``path='passage'`` combines the two downward passage transforms
    ``K E[e^{-r tau}] - e^x E[e^{-r tau + X_tau}]`` with tau the passage below
    ``x* - x``.
    """
    if path == "mixture":
        return _mixture_value(s.inf_law, s.discount_factor, p.strike, s.x_star, x)
    if path != "passage":
        raise ValueError("path must be 'mixture' or 'passage'")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    K, r = p.strike, p.rate
    for i, xi in enumerate(xs):
        if xi <= s.x_star:
            out[i] = K - math.exp(xi)
            continue
        depth = xi - s.x_star
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateModelWarning)
            a = down_passage_transform(p.model, PassageQuery(r, 0.0, depth))
            b = down_passage_transform(p.model, PassageQuery(r, 1.0, depth))
        out[i] = K * a - math.exp(xi) * b
    return float(out[0]) if np.ndim(x) == 0 else out


def candidate_value(p: PutProblem, y: float, x, s: PutSolution | None = None):
    """Value of stopping at the first strict passage below an arbitrary level ``y``.

    Uses the payoff ``K - e^{X_tau}`` without the positive part, which is the
    true candidate value whenever ``y <= log K``. Right-continuous at ``y``.
    """
    s = s or optimal_threshold(p)
    return _mixture_value(s.inf_law, s.discount_factor, p.strike, y, x)


@dataclass(frozen=True)
class PastingDiagnosis:
    pasting: str
    right_derivative: float
    numeric_derivative: float
    regularity: str
    consistent: bool


def pasting_diagnosis(s: PutSolution, p: PutProblem, step: float = 1e-4, tol: float = 1e-3) -> PastingDiagnosis:
    """Smooth pasting iff ``P(I = 0) = 0`` iff 0 is regular for the lower half-line."""
    v0 = value_function(s, p, s.x_star)
    v1 = value_function(s, p, s.x_star + step)
    num = (v1 - v0) / step
    reg = classify_regularity(p.model)
    ok = (
        abs(num - s.right_derivative) <= tol
        and (s.pasting == SMOOTH) == (s.atom0 == 0) == reg.regular
    )
    return PastingDiagnosis(s.pasting, s.right_derivative, num, reg.regular_downward, ok)


def fourier_left_piece(s: PutSolution, p: PutProblem, lam: float) -> complex:
    """``int_{-inf}^{x*} e^{i lam x} (K - e^x) dx`` in its regularised closed form."""
    il = 1j * lam
    return (p.strike / il - math.exp(s.x_star) / (il + 1)) * np.exp(il * s.x_star)


def fourier_sides(s: PutSolution, p: PutProblem, lam: float) -> tuple[complex, complex]:
    """``(closed form for x <= x* + quadrature for x > x*, K e^{i lam x*} F(-i lam) / (i lam (i lam + 1)))``."""
    if lam == 0:
        raise ValueError("lambda = 0 is excluded")

    def v(u):
        return value_function(s, p, s.x_star + u)

    c, _ = integrate.quad(v, 0.0, math.inf, weight="cos", wvar=abs(lam), limlst=100)
    sn, _ = integrate.quad(v, 0.0, math.inf, weight="sin", wvar=abs(lam), limlst=100)
    sn = math.copysign(1.0, lam) * sn
    right = np.exp(1j * lam * s.x_star) * complex(c, sn)
    lhs = fourier_left_piece(s, p, lam) + right
    il = 1j * lam
    rhs = p.strike * np.exp(il * s.x_star) * s.factor(-il) / (il * (il + 1))
    return complex(lhs), complex(rhs)


def fourier_check(s: PutSolution, p: PutProblem, lam: float) -> complex:
    lhs, rhs = fourier_sides(s, p, lam)
    return lhs - rhs


# --- verification of the sufficient conditions ------------------------------


@dataclass(frozen=True)
class ConditionCheck:
    condition: str
    x: float
    t: float
    statistic: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class OptimalityReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]


def verify_optimality(
    s: PutSolution,
    p: PutProblem,
    grid,
    cfg: SimConfig,
    times=(0.5, 1.0),
    mc_points=None,
    z_max: float = 3.0,
) -> OptimalityReport:
    """Check the four sufficient conditions for ``(v, tau*)``.

    (iii) and (iv) exactly on ``grid``; (i) the stopped discounted value is a
    martingale and (ii) the discounted value a supermartingale, both by Monte
    Carlo at each of ``times`` from each start in ``mc_points``.
    """
    grid = np.asarray(grid, dtype=float)
    K = p.strike
    v = value_function(s, p, grid)
    checks = []
    below = grid <= s.x_star
    if np.any(below):
        err = float(np.max(np.abs(v[below] - (K - np.exp(grid[below])))))
        checks.append(ConditionCheck("iii", float(grid[below][np.argmax(np.abs(v[below] - (K - np.exp(grid[below]))))]), 0.0, err, err <= 1e-12))
    gap = v - np.maximum(K - np.exp(grid), 0.0)
    j = int(np.argmin(gap))
    checks.append(ConditionCheck("iv", float(grid[j]), 0.0, float(gap[j]), gap[j] >= -1e-12))
    if mc_points is None:
        mc_points = (s.x_star + 0.5,)

    def vf(z):
        return value_function(s, p, z)

    for k, x in enumerate(mc_points):
        vx = value_function(s, p, x)
        for i, t in enumerate(times):
            base = 100 + 10 * k + 2 * i
            mart = estimate_stopped_discounted(p.model, p.rate, vf, x, s.x_star, t, cfg, stream=base)
            z = mart.z_score(vx)
            checks.append(ConditionCheck("i", x, t, z, z < z_max, f"E={mart.mean:.6g} se={mart.std_error:.3g} v={vx:.6g}"))
            sup = estimate_discounted(p.model, p.rate, vf, x, t, cfg, stream=base + 1)
            excess = (sup.mean - vx) / sup.std_error if sup.std_error > 0 else (0.0 if sup.mean <= vx + 1e-12 else math.inf)
            checks.append(ConditionCheck("ii", x, t, excess, excess < z_max, f"E={sup.mean:.6g} se={sup.std_error:.3g} v={vx:.6g}"))
    return OptimalityReport(tuple(checks))


@dataclass(frozen=True)
class PerturbationCheck:
    y: float
    violated: str
    statistic: float
    predicted: float
    passed: bool


def threshold_perturbation(s: PutSolution, p: PutProblem, delta: float, n_grid: int = 400) -> PerturbationCheck:
    """Show that ``y = x* + delta`` breaks the condition the theory predicts.

    Irregular: a jump of ``(e^y - K D) / D * P(I = 0)`` at ``y`` (continuity
    needed for the martingale property). Regular with ``delta < 0``: the lower
    bound ``v_y >= K - e^x`` fails just above y. Regular with ``delta > 0``:
    ``v_y(x) < v(x) = E_x[e^{-r tau*} v_y(X_tau*)]`` on ``(x*, y)``, so the
    supermartingale property fails.
    """
    K, D = p.strike, s.discount_factor
    y = s.x_star + delta
    if s.atom0 > 0:
        jump = candidate_value(p, y, y, s) - (K - math.exp(y))
        predicted = (math.exp(y) - K * D) / D * s.atom0
        return PerturbationCheck(y, "continuity", jump, predicted, abs(jump - predicted) <= 1e-9 and predicted != 0)
    if delta < 0:
        xs = np.linspace(y, s.x_star + 1.0, n_grid)[1:]
        gap = candidate_value(p, y, xs, s) - (K - np.exp(xs))
        return PerturbationCheck(y, "lower-bound", float(gap.min()), float("nan"), bool(gap.min() < 0))
    xs = np.linspace(s.x_star, y, n_grid)[1:-1]
    gap = candidate_value(p, y, xs, s) - value_function(s, p, xs)
    return PerturbationCheck(y, "supermartingale", float(gap.min()), float("nan"), bool(gap.min() < 0))
