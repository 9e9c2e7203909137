"""First-passage and overshoot transforms.

All passage times are strict: ``tau_x^+ = inf{t: X_t > x}`` and
``tau_x^- = inf{t: X_t < x}``, for the process started at 0. Downward
queries give the barrier as a *depth* ``x >= 0`` (barrier at ``-x``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ModelClassError, UnsupportedLimitError
from .models import LevyModel, log_mgf
from .montecarlo import Estimate, SimConfig, estimate_passage, sample_inf_and_endpoint
from .wiener_hopf import (
    _subordinator_potential,
    inf_law,
    minus_factor,
    phase_type_roots,
    phi_of_alpha,
    scale_function,
)


class DegenerateModelWarning(UserWarning):
    """The queried passage is impossible for this model."""


@dataclass(frozen=True)
class PassageQuery:
    alpha: float
    beta: float
    level: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.level < 0:
            raise ValueError("level is a distance from the start and must be >= 0")


def _is_sn(model: LevyModel) -> bool:
    return model.spectrally_negative and not model.negative_subordinator


def _phi_sub(model: LevyModel, lam: float) -> float:
    """Laplace exponent of a subordinator, ``-log E exp(-lam X_1)``."""
    return -log_mgf(model, -lam).real


def up_passage_transform(model: LevyModel, q: PassageQuery) -> float:
    """``E[exp(-alpha tau_x^+ - beta X_{tau_x^+}) 1(tau_x^+ < inf)]``.

    Spectrally negative models creep upward, giving
    ``exp(-(Phi(alpha) + beta) x)``. Subordinators use the resolvent
    ``(alpha + phi(beta)) int_(x, inf) exp(-beta z) U(dz)``. Anything else goes
    through the supremum law, which is the infimum law of the dual model.
    """
    x = q.level
    if _is_sn(model):
        return math.exp(-(phi_of_alpha(model, q.alpha) + q.beta) * x)
    if model.subordinator:
        if q.alpha == 0 and q.beta == 0:
            return 1.0
        U = _subordinator_potential(model, q.alpha)
        return float((q.alpha + _phi_sub(model, q.beta)) * U.tail_moment(q.beta, x))
    if model.negative_subordinator:
        warnings.warn("model never moves up; upward passage is impossible", DegenerateModelWarning)
        return 0.0
    if q.alpha == 0 and not model.mean < 0:
        raise UnsupportedLimitError("alpha = 0 upward passage needs sup X finite (E[X_1] < 0)")
    return down_passage_transform(model.dual(), q)


def down_passage_transform(model: LevyModel, q: PassageQuery) -> float:
    """``E[exp(-alpha tau + beta X_tau) 1(tau < inf)]`` for ``tau`` the passage below ``-q.level``.

    Evaluated as ``E[exp(beta I) 1(-I > x)] / E[exp(beta I)]`` with ``I`` the
    infimum at an independent exponential time; the numerator is the
    closed-form double sum over the mixture terms, the denominator the
    product formula of the minus factor.
    """
    if not model.moves_down:
        warnings.warn("model never moves down; downward passage is impossible", DegenerateModelWarning)
        return 0.0
    if q.alpha == 0 and not model.mean > 0:
        raise UnsupportedLimitError("alpha = 0 downward passage is supported only when E[X_1] > 0")
    factor, mix = inf_law(model, q.alpha)
    num = passage_double_sum(mix.terms, q.beta, q.level)
    return float(num / factor.real(q.beta))


def passage_double_sum(terms, beta: float, x: float) -> float:
    r"""``sum_j sum_k A_jk (-rho_j)^(k-1) e^{(rho_j - beta) x} sum_i x^(k-1-i) / ((k-1-i)! (beta - rho_j)^(i+1))``."""
    tot = 0j
    for rho, k, A in terms:
        inner = 0j
        for i in range(k):
            inner += x ** (k - 1 - i) / math.factorial(k - 1 - i) / (beta - rho) ** (i + 1)
        tot += A * (-rho) ** (k - 1) * np.exp((rho - beta) * x) * inner
    return float(tot.real)


@dataclass(frozen=True)
class PrintedComparison:
    value: float
    canonical: float
    abs_diff: float
    agrees: bool


def down_passage_sn_printed(model: LevyModel, q: PassageQuery, tol: float = 1e-9) -> PrintedComparison:
    """Scale-function formula for the downward transform, compared with the canonical route.

    ``(psi(beta) - alpha) int_x^inf e^{-beta y} W(y) dy
    - (alpha - psi(beta)) / (Phi(alpha) - beta) e^{-beta x} W(x)``, read with
    ``x`` as the depth of the barrier below the start. Needs ``beta >= Phi``.
    """
    if not _is_sn(model):
        raise ModelClassError("scale-function formula needs a spectrally negative model")
    W = scale_function(model, q.alpha)
    phi, beta, x = W.phi, q.beta, q.level
    if beta < phi - 1e-14:
        raise ValueError(f"beta = {beta} < Phi(alpha) = {phi}: the integral diverges")
    if abs(beta - phi) <= 1e-12 * max(1.0, phi):
        # removable singularity: only the exp(Phi y) part of W survives the prefactor
        slope = _slope(model, phi)
        value = 1.0 - slope * math.exp(-phi * x) * float(W(x))
    else:
        gap = log_mgf(model, beta).real - q.alpha
        value = gap * W.tail_integral(beta, x) - (-gap / (phi - beta)) * math.exp(-beta * x) * float(W(x))
    canonical = down_passage_transform(model, q)
    diff = abs(value - canonical)
    return PrintedComparison(value, canonical, diff, diff <= tol)


def _slope(model, lam):
    from .wiener_hopf import _dpsi

    return _dpsi(model, lam)


def h_alpha_beta(model: LevyModel, alpha: float, beta: float, x: float) -> float:
    """``E_x[exp(-alpha tau_0^- + beta X_{tau_0^-})]``; equals ``exp(beta x)`` for ``x <= 0``."""
    if x <= 0:
        return math.exp(beta * x)
    return math.exp(beta * x) * down_passage_transform(model, PassageQuery(alpha, beta, x))


def pecherskii_rogozin_sides(model: LevyModel, alpha: float, beta: float, q: float) -> tuple[float, float]:
    """Both sides of the Laplace-transformed upward passage identity.

    Left: ``int_0^inf e^{-qx} E[exp(-alpha tau_x^+ - beta (X_tau - x))] dx``,
    in closed form ``1/(q + Phi(alpha))`` for spectrally negative models and by
    quadrature otherwise. Right: ``(1 - P(q)/P(beta)) / (q - beta)`` with
    ``P(s) = E exp(-s sup X_{e_alpha})`` built from the dual minus factor, or
    ``(phi(q) - phi(beta)) / ((q - beta)(alpha + phi(q)))`` for subordinators.
    """
    if q <= 0:
        raise ValueError("q must be > 0")
    if _is_sn(model):
        lhs = 1.0 / (q + phi_of_alpha(model, alpha))
    elif model.negative_subordinator:
        lhs = 0.0
    else:
        def integrand(x):
            return math.exp(-q * x + beta * x) * up_passage_transform(model, PassageQuery(alpha, beta, x))

        lhs, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
    if model.subordinator:
        pq, pb = _phi_sub(model, q), _phi_sub(model, beta)
        if abs(q - beta) < 1e-12:
            h = 1e-5
            dphi = (_phi_sub(model, q + h) - _phi_sub(model, q - h)) / (2 * h)
            rhs = dphi / (alpha + pq)
        else:
            rhs = (pq - pb) / ((q - beta) * (alpha + pq))
        return lhs, rhs
    plus = minus_factor(phase_type_roots(model.dual(), alpha))
    if abs(q - beta) < 1e-12:
        rhs = -plus.log_derivative(q).real
    else:
        rhs = (1.0 - plus.real(q) / plus.real(beta)) / (q - beta)
    return lhs, rhs


def pecherskii_rogozin_check(model: LevyModel, alpha: float, beta: float, q: float) -> float:
    lhs, rhs = pecherskii_rogozin_sides(model, alpha, beta, q)
    return abs(lhs - rhs)


def fluctuation_identity_check(model: LevyModel, alpha: float, beta: float, x: float, cfg: SimConfig):
    """Monte Carlo check of the overshoot identity at an exponential time.

    Left: ``E[exp(-alpha tau_x^+ - beta X_tau) 1(tau < inf)]`` by direct
    passage simulation. Right: ``E[e^{-beta S} 1(S > x)] / E[e^{-beta S}]``
    with ``S = sup X_{e_alpha}``, a ratio estimator with delta-method error.
    Returns ``(lhs, rhs, z)``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    lhs = estimate_passage(model, PassageQuery(alpha, beta, x), "up", cfg, stream=11)
    inf_dual, _ = sample_inf_and_endpoint(model.dual(), alpha, cfg, stream=12)
    sup = -inf_dual
    w = np.exp(-beta * sup)
    a = w * (sup > x)
    n = sup.size
    ma, mw = a.mean(), w.mean()
    ratio = ma / mw
    resid = (a - ratio * w) / mw
    se = float(np.std(resid, ddof=1) / math.sqrt(n))
    rhs = Estimate(float(ratio), se, n)
    tot = math.hypot(lhs.std_error, rhs.std_error)
    diff = abs(lhs.mean - rhs.mean)
    z = (0.0 if diff <= 1e-12 else math.inf) if tot == 0 else diff / tot
    return lhs, rhs, z
