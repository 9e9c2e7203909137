"""Wiener-Hopf factors for the phase-type jump-diffusion family.

Conventions: for a model X and an independent exponential time ``e_alpha``

* the *minus factor* is ``s -> E[exp(s * inf X_{e_alpha})]``, analytic for
  ``Re s >= 0``; it is rational with poles at the roots of
  ``log E[exp(s X_1)] = alpha`` in ``Re s < 0`` and zeros at the down-jump
  eigenvalues,
* the plus factor ``E[exp(-s * sup X_{e_alpha})]`` is the minus factor of the
  dual model ``-X``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _rational as rat
from .errors import ModelClassError, PoleError, StructureError, UnsupportedLimitError
from .models import LevyModel, char_exponent, exponent_polynomials, log_mgf

REAL_AXIS_TOL = 1e-9


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# --- types -----------------------------------------------------------------


@dataclass(frozen=True)
class RootSet:
    """Roots of ``log_mgf = alpha`` and down-jump poles, both in ``Re s < 0``.

    Each entry is ``(value, multiplicity)``.
    """

    roots: tuple
    poles: tuple
    alpha: float = float("nan")

    @property
    def n_roots(self) -> int:
        return sum(k for _, k in self.roots)

    @property
    def n_poles(self) -> int:
        return sum(k for _, k in self.poles)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "multiplicity", "kind"])
        for kind, items in (("root", self.roots), ("pole", self.poles)):
            for z, k in items:
                w.writerow([_fmt(z.real), _fmt(z.imag), k, kind])
        return buf.getvalue()


@dataclass(frozen=True)
class RationalFactor:
    r"""``s -> prod(-rho) prod(s - eta) / (prod(-eta) prod(s - rho))``."""

    roots: tuple
    poles: tuple

    @property
    def constant(self) -> complex:
        c = 1.0 + 0j
        for z, k in self.roots:
            c *= (-z) ** k
        for z, k in self.poles:
            c /= (-z) ** k
        return c

    @property
    def degree_gap(self) -> int:
        return sum(k for _, k in self.roots) - sum(k for _, k in self.poles)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=complex)
        out = np.full(s_arr.shape, self.constant, dtype=complex)
        for z, k in self.roots:
            d = s_arr - z
            if np.any(np.abs(d) <= 1e-12):
                raise PoleError(z, f"minus factor evaluated at its pole {z!r}")
            out /= d ** k
        for z, k in self.poles:
            out *= (s_arr - z) ** k
        if out.ndim == 0:
            return complex(out)
        return out

    def log_derivative(self, s: complex) -> complex:
        """``f'(s) / f(s)``."""
        return sum(k / (s - z) for z, k in self.poles) - sum(k / (s - z) for z, k in self.roots)

    def real(self, s) -> float:
        """Value at a real argument (imaginary parts cancel by conjugate symmetry)."""
        return float(np.real(self(s)))


@dataclass(frozen=True)
class ExpMixture:
    """Law on ``[0, inf)``: an atom at 0 plus an Erlang-type mixture density.

    The density is ``sum A (-rho x)^(k-1) / (k-1)! exp(rho x)`` over the terms
    ``(rho, k, A)``. Complex terms come in conjugate pairs so every evaluation
    is real up to rounding.
    """

    atom0: float
    terms: tuple

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for rho, k, A in self.terms:
            out += A * (-rho * x) ** (k - 1) / math.factorial(k - 1) * np.exp(rho * x)
        return _real(out)

    def laplace(self, s):
        """``atom0 + int exp(-s x) f(x) dx`` (complex s, right of all rho)."""
        s = np.asarray(s, dtype=complex)
        out = np.full(s.shape, self.atom0, dtype=complex)
        for rho, k, A in self.terms:
            out += A * (-rho) ** (k - 1) / (s - rho) ** k
        return complex(out) if out.ndim == 0 else out

    def tail_moment(self, beta, x):
        """``int_(x, inf) exp(-beta y) f(y) dy`` for ``x >= 0``; the atom is never included."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for rho, k, A in self.terms:
            b = beta - rho
            s = np.zeros(x.shape, dtype=complex)
            for i in range(k):
                s += x ** (k - 1 - i) / math.factorial(k - 1 - i) / b ** (i + 1)
            out += A * (-rho) ** (k - 1) * np.exp(-b * x) * s
        return _real(out)

    def mass(self) -> float:
        return float(self.atom0 + self.tail_moment(0.0, 0.0))

    def cdf(self, x):
        """``P(Y <= x)``; ``cdf(0)`` is the atom."""
        x = np.asarray(x, dtype=float)
        out = self.mass() - self.tail_moment(0.0, np.maximum(x, 0.0))
        return np.where(x < 0, 0.0, out)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["atom0", _fmt(self.atom0)])
        w.writerow(["re_rho", "im_rho", "k", "re_A", "im_A"])
        for rho, k, A in self.terms:
            w.writerow([_fmt(rho.real), _fmt(rho.imag), k, _fmt(A.real), _fmt(A.imag)])
        return buf.getvalue()


def _real(z):
    r = np.real(z)
    return float(r) if np.ndim(r) == 0 else r


@dataclass(frozen=True)
class ScaleFunction:
    """``W(x) = sum c x^(k-1)/(k-1)! exp(zeta x)`` over terms ``(zeta, k, c)``."""

    alpha: float
    phi: float
    terms: tuple
    w0: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for z, k, c in self.terms:
            out += c * x ** (k - 1) / math.factorial(k - 1) * np.exp(z * x)
        return _real(out)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for z, k, c in self.terms:
            out += c * z * x ** (k - 1) / math.factorial(k - 1) * np.exp(z * x)
            if k >= 2:
                out += c * x ** (k - 2) / math.factorial(k - 2) * np.exp(z * x)
        return _real(out)

    def laplace(self, lam):
        lam = complex(lam)
        return sum(c / (lam - z) ** k for z, k, c in self.terms)

    def tail_integral(self, beta: float, x: float) -> float:
        """``int_x^inf exp(-beta y) W(y) dy`` for ``beta > phi``."""
        tot = 0j
        for z, k, c in self.terms:
            b = beta - z
            s = sum(x ** (k - 1 - i) / math.factorial(k - 1 - i) / b ** (i + 1) for i in range(k))
            tot += c * np.exp(-b * x) * s
        return float(tot.real)


# --- spectrally negative case ----------------------------------------------


def _require_sn(model: LevyModel):
    if not model.spectrally_negative:
        raise ModelClassError("operation requires a spectrally negative model (no up jumps)")
    if model.negative_subordinator:
        raise ModelClassError("operation excludes the negative of a subordinator")


def _dpsi(model: LevyModel, lam: float) -> float:
    d = model.drift + model.gaussian * lam
    if model.down is not None:
        pt = model.down.law
        M = lam * np.eye(pt.m) - pt.T_mat
        x = np.linalg.solve(M, pt.t_vec)
        # d/ds a (sI-T)^-1 t = -a (sI-T)^-2 t
        d -= model.down.rate * float(pt.a_vec @ np.linalg.solve(M, x))
    return d


def phi_of_alpha(model: LevyModel, alpha: float) -> float:
    """Largest real root of ``psi(lambda) = alpha``.

    Newton iteration started above the root: ``psi`` is convex on
    ``[0, inf)`` and dominates ``drift*l + gaussian*l^2/2 - rate_down``,
    whose positive root is therefore an upper bound.
    """
    _require_sn(model)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0 and model.mean >= 0:
        return 0.0
    lam_d = model.down.rate if model.down is not None else 0.0
    s2, d = model.gaussian, model.drift
    if s2 > 0:
        ub = (-d + math.sqrt(d * d + 2 * s2 * (alpha + lam_d))) / s2
    else:
        ub = (alpha + lam_d) / d
    lam = max(ub, 1e-300)
    for _ in range(200):
        f = log_mgf(model, lam).real - alpha
        step = f / _dpsi(model, lam)
        new = lam - step
        if abs(step) <= 4e-16 * max(lam, 1e-300) or new == lam:
            lam = new
            break
        lam = new
    if abs(log_mgf(model, lam).real - alpha) > 1e-12 * max(1.0, alpha):
        raise StructureError(f"Newton iteration for Phi({alpha}) did not converge")
    return float(lam)


def sup_law_spectrally_negative(model: LevyModel, alpha: float) -> float:
    """Rate of the exponential law of ``sup X`` at an exponential(alpha) time."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    return phi_of_alpha(model, alpha)


def scale_function(model: LevyModel, alpha: float) -> ScaleFunction:
    """Exponential-sum form of ``W^(alpha)`` from partial fractions of ``1/(psi - alpha)``."""
    _require_sn(model)
    phi = phi_of_alpha(model, alpha)
    P, Q = exponent_polynomials(model, alpha)
    zs = rat.poly_roots(P.coef)
    i = int(np.argmin(np.abs(zs - phi)))
    if abs(zs[i] - phi) < 1e-6 * max(1.0, phi):
        zs[i] = phi
    groups = rat.cluster(zs)
    res = rat.residues(Q.coef, P.coef[-1], groups)
    terms = []
    for (z, m), cs in zip(groups, res):
        for k in range(1, m + 1):
            terms.append((z, k, complex(cs[k - 1])))
    w0 = 0.0 if model.gaussian > 0 else 1.0 / model.drift
    W = ScaleFunction(alpha=float(alpha), phi=phi, terms=tuple(terms), w0=w0)
    for lam in (phi + 1.0, phi + 3.0, phi + 10.0):
        want = 1.0 / (log_mgf(model, lam).real - alpha)
        if abs(W.laplace(lam) - want) > 1e-8 * abs(want):
            raise StructureError("scale-function partial fractions do not reproduce 1/(psi - alpha)")
    return W


def inf_law_spectrally_negative(model: LevyModel, alpha: float) -> ExpMixture:
    """Law of ``-inf X_{e_alpha}`` as ``(alpha/Phi) dW - alpha W dx``.

    The growing ``exp(Phi x)`` component of W cancels in the density and is
    dropped; the atom is ``alpha W(0) / Phi``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    W = scale_function(model, alpha)
    phi = W.phi
    by_root: dict[complex, dict[int, complex]] = {}
    for z, k, c in W.terms:
        by_root.setdefault(z, {})[k] = c
    terms = []
    for z, cs in by_root.items():
        if abs(z - phi) < 1e-12 * max(1.0, phi):
            continue
        m = max(cs)
        for k in range(1, m + 1):
            ck = cs.get(k, 0j)
            b = z * ck + cs.get(k + 1, 0j)
            coef = (alpha / phi) * b - alpha * ck
            terms.append((z, k, coef / (-z) ** (k - 1)))
    return ExpMixture(atom0=alpha * W.w0 / phi, terms=tuple(terms))


# --- general phase-type model ----------------------------------------------


def phase_type_roots(model: LevyModel, alpha: float, real_tol: float = REAL_AXIS_TOL) -> RootSet:
    """Roots of ``log_mgf(s) = alpha`` with ``Re s < 0`` plus the down-jump poles.

    ``alpha = 0`` is allowed when ``E[X_1] > 0``; the root at the origin is
    then discarded.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0 and not model.mean > 0:
        raise UnsupportedLimitError("alpha = 0 requires E[X_1] > 0 (X drifts to +infinity)")
    P, _ = exponent_polynomials(model, alpha)
    zs = rat.poly_roots(P.coef)
    if alpha == 0:
        j = int(np.argmin(np.abs(zs)))
        if abs(zs[j]) > 1e-7:
            raise StructureError("expected a root at the origin for alpha = 0")
        zs = np.delete(zs, j)
    near = zs[np.abs(zs.real) <= real_tol]
    if near.size:
        raise StructureError(f"root {complex(near[0])!r} within {real_tol} of the imaginary axis")
    roots = rat.cluster(zs[zs.real < -real_tol])
    poles = rat.cluster(model.down.law.eigenvalues) if model.down is not None else []
    rs = RootSet(tuple(roots), tuple(poles), float(alpha))
    expected = rs.n_poles + (1 if (model.gaussian > 0 or model.drift < 0) else 0)
    if rs.n_roots != expected:
        raise StructureError(
            f"found {rs.n_roots} roots with negative real part against {rs.n_poles} poles; expected {expected}"
        )
    return rs


def minus_factor(rs: RootSet) -> RationalFactor:
    """Product form of the minus factor; coincident root/pole pairs cancel."""
    roots = dict()
    for z, k in rat.cluster([z for z, k in rs.roots for _ in range(k)]):
        roots[z] = k
    poles = dict()
    for z, k in rat.cluster([z for z, k in rs.poles for _ in range(k)]):
        poles[z] = k
    for z in list(poles):
        for r in list(roots):
            if abs(z - r) < rat.CLUSTER_TOL and poles.get(z, 0) and roots.get(r, 0):
                c = min(poles[z], roots[r])
                poles[z] -= c
                roots[r] -= c
    rt = tuple((z, k) for z, k in roots.items() if k > 0)
    pl = tuple((z, k) for z, k in poles.items() if k > 0)
    gap = sum(k for _, k in rt) - sum(k for _, k in pl)
    if gap not in (0, 1):
        raise StructureError(f"minus factor needs #roots - #poles in {{0, 1}}, got {gap}")
    return RationalFactor(rt, pl)


def atom_at_zero(f: RationalFactor) -> float:
    """``P(inf X_{e_alpha} = 0)`` as the limit of the factor at infinity."""
    if f.degree_gap > 0:
        return 0.0
    return min(max(float(f.constant.real), 0.0), 1.0)


def partial_fractions(f: RationalFactor) -> ExpMixture:
    """Invert the minus factor into an :class:`ExpMixture` for ``-inf X_{e_alpha}``."""
    num = f.constant * rat.poly_from_roots(list(f.poles))
    res = rat.residues(num, 1.0, list(f.roots))
    terms = []
    for (rho, m), cs in zip(f.roots, res):
        for k in range(1, m + 1):
            terms.append((rho, k, complex(cs[k - 1]) / (-rho) ** (k - 1)))
    mix = ExpMixture(atom0=atom_at_zero(f), terms=tuple(terms))
    grid = np.array([0.0, 0.1, 0.3, 0.7, 1.0, 2.0, 3.5, 5.0, 10.0, 25.0]) + 0j
    grid = grid + 1j * np.array([0, 0, 0.5, 0, -1.0, 0, 2.0, 0, 0, 0])
    err = np.max(np.abs(mix.laplace(grid) - f(grid)))
    if err > 1e-8:
        raise StructureError(f"partial fractions reproduce the factor only to {err:.3g}; roots ill-conditioned")
    return mix


@lru_cache(maxsize=512)
def inf_law(model: LevyModel, alpha: float) -> tuple[RationalFactor, ExpMixture]:
    """Minus factor and the law of ``-inf X_{e_alpha}`` (``alpha = 0``: all-time infimum)."""
    f = minus_factor(phase_type_roots(model, float(alpha)))
    return f, partial_fractions(f)


def wiener_hopf_factors(model: LevyModel, alpha: float) -> tuple[RationalFactor, RationalFactor]:
    """``(minus, plus)`` factors; ``plus(s) = E[exp(-s sup X_{e_alpha})]``."""
    minus = minus_factor(phase_type_roots(model, alpha))
    plus = minus_factor(phase_type_roots(model.dual(), alpha))
    return minus, plus


def wh_factorization_check(model: LevyModel, alpha: float, theta: float) -> float:
    """``|E e^{i theta sup} * E e^{i theta inf} - alpha/(alpha + Psi(theta))|``."""
    minus, plus = wiener_hopf_factors(model, alpha)
    lhs = plus(-1j * theta) * minus(1j * theta)
    return float(abs(lhs - alpha / (alpha + char_exponent(model, theta))))


def subordinator_resolvent(model: LevyModel, alpha: float) -> ExpMixture:
    """``U^(alpha)`` with transform ``1 / (alpha + phi(lambda))``; total mass ``1/alpha``."""
    if not model.subordinator:
        raise ModelClassError("resolvent requires a subordinator (no Gaussian part, no down jumps, drift >= 0)")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    return _subordinator_potential(model, alpha)


def _subordinator_potential(model: LevyModel, alpha: float) -> ExpMixture:
    P, Q = exponent_polynomials(model, alpha)
    # alpha + phi(l) = -(psi(-l) - alpha) = -P(-l)/Q(-l)
    Pr = P.coef.copy()
    Pr[1::2] *= -1
    Qr = -Q.coef.copy()
    Qr[1::2] *= -1
    groups = rat.cluster(rat.poly_roots(Pr))
    lead = Pr[-1]
    res = rat.residues(Qr, lead, groups)
    terms = []
    for (z, m), cs in zip(groups, res):
        for k in range(1, m + 1):
            terms.append((z, k, complex(cs[k - 1]) / (-z) ** (k - 1)))
    atom = float(Qr[-1] / lead) if len(Qr) == len(Pr) else 0.0
    return ExpMixture(atom0=atom, terms=tuple(terms))


def rootset_from_pairs(roots: Sequence, poles: Sequence = ()) -> RootSet:
    """Build a RootSet from plain ``(value, multiplicity)`` pairs."""
    return RootSet(
        tuple((complex(z), int(k)) for z, k in roots),
        tuple((complex(z), int(k)) for z, k in poles),
    )
