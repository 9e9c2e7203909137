"""Jump-diffusion model family with phase-type jumps.

A model is ``X_t = drift*t + sqrt(gaussian)*B_t + (up jumps) - (down jumps)``
where each jump component is compound Poisson with a phase-type size law.
Every exponent of this family is a rational function, which is what the
root/residue machinery in :mod:`levyput.wiener_hopf` relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, linalg

from .errors import ModelClassError, PoleError, ValidationError

POLE_DISTANCE = 1e-12


@dataclass(frozen=True)
class PhaseType:
    """Absorption time of a finite Markov chain.

    Parameters
    ----------
    a : sequence of float
        Initial distribution over the ``m`` transient phases.
    T : m x m nested sequence of float
        Sub-intensity matrix. The exit vector ``t = -T 1`` is derived.
    """

    a: tuple
    T: tuple

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        T = np.atleast_2d(np.asarray(self.T, dtype=float))
        m = a.shape[0]
        if a.ndim != 1 or m == 0:
            raise ValidationError("a", "initial vector must be a non-empty 1-d array")
        if T.shape != (m, m):
            raise ValidationError("T", f"expected a {m}x{m} matrix, got shape {T.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(T))):
            raise ValidationError("T", "entries must be finite")
        for i in range(m):
            if a[i] < 0:
                raise ValidationError(f"a[{i}]", "initial probabilities must be >= 0")
        if abs(a.sum() - 1.0) > 1e-12:
            raise ValidationError("a", f"initial probabilities sum to {float(a.sum()):.17g}, not 1")
        for i in range(m):
            if not T[i, i] < 0:
                raise ValidationError(f"T[{i}][{i}]", "diagonal entries must be strictly negative")
            for j in range(m):
                if i != j and T[i, j] < 0:
                    raise ValidationError(f"T[{i}][{j}]", "off-diagonal entries must be >= 0")
            if T[i].sum() > 1e-12 * max(1.0, abs(T[i, i])):
                raise ValidationError(f"T[{i}]", "row sums must be <= 0")
        t = -T.sum(axis=1)
        if not np.any(t > 0):
            raise ValidationError("T", "no exit to the absorbing state (t = -T 1 is zero)")
        if np.max(np.linalg.eigvals(T).real) >= 0:
            raise ValidationError("T", "eigenvalues must have strictly negative real part")
        object.__setattr__(self, "a", tuple(float(v) for v in a))
        object.__setattr__(self, "T", tuple(tuple(float(v) for v in row) for row in T))

    @classmethod
    def exponential(cls, rate: float) -> "PhaseType":
        return cls((1.0,), ((-float(rate),),))

    @classmethod
    def erlang(cls, k: int, rate: float) -> "PhaseType":
        T = np.diag(np.full(k, -float(rate))) + np.diag(np.full(k - 1, float(rate)), 1)
        a = np.zeros(k)
        a[0] = 1.0
        return cls(a, T)

    @classmethod
    def hyperexponential(cls, probs, rates) -> "PhaseType":
        return cls(tuple(probs), np.diag(-np.asarray(rates, dtype=float)))

    @property
    def m(self) -> int:
        return len(self.a)

    @cached_property
    def a_vec(self) -> np.ndarray:
        return np.array(self.a)

    @cached_property
    def T_mat(self) -> np.ndarray:
        return np.array(self.T)

    @cached_property
    def t_vec(self) -> np.ndarray:
        return np.clip(-self.T_mat.sum(axis=1), 0.0, None)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.T_mat)

    @cached_property
    def mean(self) -> float:
        return float(self.a_vec @ np.linalg.solve(-self.T_mat, np.ones(self.m)))

    @cached_property
    def rational(self) -> tuple[Polynomial, Polynomial]:
        """``(N, D)`` with ``a (sI - T)^{-1} t = N(s) / D(s)`` and ``D = det(sI - T)``.

        Faddeev-LeVerrier recursion; D is monic of degree m, N has degree < m.
        """
        T = self.T_mat
        m = self.m
        c = [1.0]
        B = np.eye(m)
        adj_terms = [B]
        for k in range(1, m + 1):
            ck = -np.trace(T @ B) / k
            c.append(ck)
            if k < m:
                B = T @ B + ck * np.eye(m)
                adj_terms.append(B)
        # adj(sI - T) = sum_k s^(m-1-k) B_k, det = sum_k c_k s^(m-k)
        D = Polynomial(c[::-1])
        n_desc = [self.a_vec @ Bk @ self.t_vec for Bk in adj_terms]
        N = Polynomial(n_desc[::-1])
        return N, D

    def to_dict(self) -> dict:
        return {"a": list(self.a), "T": [list(r) for r in self.T]}


def pt_laplace(pt: PhaseType, s: complex) -> complex:
    """Laplace transform ``a (sI - T)^{-1} t`` continued to the complex plane."""
    s = complex(s)
    eig = pt.eigenvalues
    j = int(np.argmin(np.abs(eig - s)))
    if abs(eig[j] - s) <= POLE_DISTANCE:
        raise PoleError(eig[j], f"phase-type transform evaluated at eigenvalue {complex(eig[j])!r} of T")
    x = np.linalg.solve(s * np.eye(pt.m) - pt.T_mat, pt.t_vec.astype(complex))
    return complex(pt.a_vec @ x)


def pt_density(pt: PhaseType, x: float) -> float:
    """Density ``a exp(Tx) t`` for ``x >= 0``."""
    if x < 0:
        raise ValueError("phase-type density is defined for x >= 0")
    return max(float(pt.a_vec @ linalg.expm(pt.T_mat * x) @ pt.t_vec), 0.0)


@dataclass(frozen=True)
class JumpComponent:
    rate: float
    law: PhaseType

    def __post_init__(self):
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise ValidationError("rate", "jump rate must be a positive finite number")
        object.__setattr__(self, "rate", float(self.rate))

    def to_dict(self) -> dict:
        return {"rate": self.rate, "phases": self.law.to_dict()}


@dataclass(frozen=True)
class LevyModel:
    """Jump diffusion ``drift*t + sigma*B_t + up jumps - down jumps``.

    ``gaussian`` is sigma squared. ``drift`` is the coefficient of t in the
    path decomposition, so with ``gaussian == 0`` it is the linear drift of
    the bounded-variation form of the exponent.
    """

    gaussian: float = 0.0
    drift: float = 0.0
    up: Optional[JumpComponent] = None
    down: Optional[JumpComponent] = None

    def __post_init__(self):
        if not (np.isfinite(self.gaussian) and self.gaussian >= 0):
            raise ValidationError("gaussian", "must be a nonnegative finite number")
        if not np.isfinite(self.drift):
            raise ValidationError("drift", "must be finite")
        object.__setattr__(self, "gaussian", float(self.gaussian))
        object.__setattr__(self, "drift", float(self.drift))
        if self.gaussian == 0 and self.drift == 0 and self.up is None and self.down is None:
            raise ValidationError("", "degenerate model: X is identically zero")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.gaussian)

    @property
    def bounded_variation(self) -> bool:
        return self.gaussian == 0

    @property
    def spectrally_negative(self) -> bool:
        return self.up is None

    @property
    def subordinator(self) -> bool:
        return self.gaussian == 0 and self.drift >= 0 and self.down is None

    @property
    def negative_subordinator(self) -> bool:
        return self.gaussian == 0 and self.drift <= 0 and self.up is None

    @property
    def moves_down(self) -> bool:
        return self.gaussian > 0 or self.drift < 0 or self.down is not None

    @property
    def jump_rate(self) -> float:
        return sum(c.rate for c in (self.up, self.down) if c is not None)

    @property
    def mean(self) -> float:
        """``E[X_1]``."""
        m = self.drift
        if self.up is not None:
            m += self.up.rate * self.up.law.mean
        if self.down is not None:
            m -= self.down.rate * self.down.law.mean
        return m

    def dual(self) -> "LevyModel":
        """The model of ``-X``."""
        return LevyModel(self.gaussian, -self.drift, up=self.down, down=self.up)

    def to_dict(self) -> dict:
        return {
            "gaussian": self.gaussian,
            "drift": self.drift,
            "up": None if self.up is None else self.up.to_dict(),
            "down": None if self.down is None else self.down.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LevyModel":
        if not isinstance(d, dict):
            raise ValidationError("", "model must be a JSON object")
        unknown = set(d) - {"gaussian", "drift", "up", "down"}
        if unknown:
            raise ValidationError(sorted(unknown)[0], "unknown field")
        comps = {}
        for side in ("up", "down"):
            cd = d.get(side)
            if cd is None:
                comps[side] = None
                continue
            if not isinstance(cd, dict) or "rate" not in cd or "phases" not in cd:
                raise ValidationError(side, "expected an object with 'rate' and 'phases'")
            ph = cd["phases"]
            if not isinstance(ph, dict) or "a" not in ph or "T" not in ph:
                raise ValidationError(f"{side}.phases", "expected an object with 'a' and 'T'")
            if "t" in ph:
                raise ValidationError(f"{side}.phases.t", "exit vector is derived from T, do not supply it")
            try:
                law = PhaseType(ph["a"], ph["T"])
            except ValidationError as e:
                raise ValidationError(f"{side}.phases.{e.field}", e.message) from None
            except (TypeError, ValueError) as e:
                raise ValidationError(f"{side}.phases", str(e)) from None
            try:
                comps[side] = JumpComponent(_number(cd["rate"], f"{side}.rate"), law)
            except ValidationError as e:
                raise ValidationError(f"{side}.{e.field}", e.message) from None
        return cls(
            gaussian=_number(d.get("gaussian", 0.0), "gaussian"),
            drift=_number(d.get("drift", 0.0), "drift"),
            up=comps["up"],
            down=comps["down"],
        )


def _number(v, field):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(field, "expected a number")
    return float(v)


def char_exponent(model: LevyModel, theta: complex) -> complex:
    """``Psi`` with ``E[exp(i theta X_1)] = exp(-Psi(theta))``."""
    theta = complex(theta)
    val = -1j * model.drift * theta + 0.5 * model.gaussian * theta * theta
    if model.up is not None:
        val += model.up.rate * (1.0 - pt_laplace(model.up.law, -1j * theta))
    if model.down is not None:
        val += model.down.rate * (1.0 - pt_laplace(model.down.law, 1j * theta))
    return val


def log_mgf(model: LevyModel, z: complex) -> complex:
    """``log E[exp(z X_1)] = -Psi(-iz)`` on the strip where it is finite (any model)."""
    return -char_exponent(model, -1j * complex(z))


def laplace_exponent(model: LevyModel, z: complex) -> complex:
    """``psi(z) = -Psi(-iz)`` for a spectrally negative model."""
    if not model.spectrally_negative:
        raise ModelClassError("Laplace exponent psi is defined here only for models without up jumps")
    return log_mgf(model, z)


def exponent_polynomials(model: LevyModel, alpha: float) -> tuple[Polynomial, Polynomial]:
    """Clear denominators of ``log_mgf(z) - alpha``.

    Returns ``(P, Q)`` with ``log_mgf(z) - alpha = P(z) / Q(z)`` where
    ``Q = D_down(z) * D_up(-z)`` is the product of the jump-law denominators.
    """
    one = Polynomial([1.0])
    base = Polynomial([-alpha - model.jump_rate, model.drift, 0.5 * model.gaussian])
    Dd, Nd = one, Polynomial([0.0])
    Du, Nu = one, Polynomial([0.0])
    if model.down is not None:
        Nd, Dd = model.down.law.rational
    if model.up is not None:
        Nu, Du = model.up.law.rational
        Nu, Du = _reflect(Nu), _reflect(Du)
    P = base * Dd * Du
    if model.down is not None:
        P = P + model.down.rate * Nd * Du
    if model.up is not None:
        P = P + model.up.rate * Nu * Dd
    return P.trim(), (Dd * Du).trim()


def _reflect(p: Polynomial) -> Polynomial:
    c = p.coef.copy()
    c[1::2] *= -1
    return Polynomial(c)


# --- regularity of 0 for (-inf, 0) -----------------------------------------


@dataclass(frozen=True)
class RegularityReport:
    bounded_variation: bool
    drift_sign: str
    regular_downward: str
    clause: str
    detail: str = ""

    @property
    def regular(self) -> bool:
        return self.regular_downward == "regular"

    def to_dict(self) -> dict:
        return {
            "bounded_variation": self.bounded_variation,
            "drift_sign": self.drift_sign,
            "regular_downward": self.regular_downward,
            "clause": self.clause,
            "detail": self.detail,
        }


def _sign(x: float) -> str:
    return "negative" if x < 0 else ("positive" if x > 0 else "zero")


def classify_regularity(model: LevyModel) -> RegularityReport:
    """Is 0 regular for the open lower half-line?

    Unbounded variation (a Gaussian part) and bounded variation with negative
    drift are regular. In this finite-activity family the remaining cases have
    piecewise linear paths with nonnegative slope between jumps, so the first
    entrance below 0 waits for a jump and 0 is irregular.
    """
    bv = model.bounded_variation
    sign = _sign(model.drift)
    if not bv:
        return RegularityReport(bv, sign, "regular", "iii", "unbounded variation (Gaussian part)")
    if model.drift < 0:
        return RegularityReport(bv, sign, "regular", "i", "bounded variation with negative drift")
    return RegularityReport(
        bv, sign, "irregular", "finite-activity",
        "bounded variation, drift >= 0, finite jump activity: first entry below 0 needs a jump",
    )


@dataclass(frozen=True)
class SmallJumpDensity:
    """Levy density ``c_minus |x|^(-1-a)`` on ``(-cutoff, 0)`` and ``c_plus x^(-1-a)`` on ``(0, cutoff)``."""

    c_minus: float
    c_plus: float
    a_index: float
    cutoff: float = 1.0

    def __post_init__(self):
        if self.c_minus < 0 or self.c_plus < 0 or self.c_minus + self.c_plus <= 0:
            raise ValidationError("c_minus", "need c_minus, c_plus >= 0 with a positive sum")
        if not 0 < self.a_index < 2:
            raise ValidationError("a_index", "power-law index must lie in (0, 2)")
        if not self.cutoff > 0:
            raise ValidationError("cutoff", "must be positive")

    def upper_tail_integral(self, u: float) -> float:
        """``int_0^u Pi(y, inf) dy`` for ``0 < u <= cutoff``."""
        a, c = self.a_index, self.cutoff
        return (self.c_plus / a) * (u ** (1 - a) / (1 - a) - u * c ** (-a))

    def test_integrand(self, u: float) -> float:
        """Integrand of the small-jump test at ``x = -u``, as a function of ``u = |x|``."""
        return u * self.c_minus * u ** (-1 - self.a_index) / self.upper_tail_integral(u)


def integral_test(density: SmallJumpDensity, decades=range(2, 9)) -> RegularityReport:
    """Regularity for bounded variation, zero drift, power-law small jumps.

    Near the origin the test integrand behaves like
    ``c_minus a (1 - a) / (c_plus |x|)``, so the integral diverges exactly when
    ``c_minus > 0``. The closed-form verdict is confirmed numerically from the
    growth of partial integrals over ``[-L, -10^-k]``; a logarithmic divergence
    adds a constant per decade while a convergent integral adds increments that
    shrink to 0. Any disagreement or unclear pattern is reported as
    inconclusive.
    """
    if density.a_index >= 1:
        raise ModelClassError("a_index >= 1: the process has unbounded variation, the test does not apply")
    if density.c_plus == 0:
        return RegularityReport(
            True, "zero", "inconclusive", "ii",
            "no positive jumps: the denominator of the test vanishes identically",
        )
    L = min(1.0, density.cutoff)
    analytic_diverges = density.c_minus > 0
    levels = [10.0 ** (-k) for k in decades]
    lower = [L] + levels
    partial = []
    acc = 0.0
    for hi, lo in zip(lower[:-1], lower[1:]):
        if lo >= hi:
            partial.append(acc)
            continue
        piece, _ = integrate.quad(density.test_integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
        acc += piece
        partial.append(acc)
    inc = np.diff(partial)
    slope = density.c_minus * density.a_index * (1 - density.a_index) / density.c_plus * math.log(10.0)
    tail = inc[-3:]
    if np.all(tail == 0):
        numeric = "converges"
    elif slope > 0 and np.all(np.abs(tail / slope - 1) < 0.05):
        numeric = "diverges"
    elif np.all(tail[1:] < 0.5 * tail[:-1]):
        numeric = "converges"
    else:
        numeric = "ambiguous"
    detail = f"per-decade increments {[float(v) for v in inc]}, asymptotic slope {slope:.6g}"
    if numeric == "ambiguous" or (numeric == "diverges") != analytic_diverges:
        return RegularityReport(True, "zero", "inconclusive", "ii", detail)
    verdict = "regular" if analytic_diverges else "irregular"
    return RegularityReport(True, "zero", verdict, "ii", detail)
