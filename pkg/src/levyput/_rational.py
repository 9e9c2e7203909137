"""Complex polynomial helpers: clustering, Taylor shifts and residues.

Coefficient arrays are ascending (``c[0] + c[1] s + ...``) throughout.
"""

from __future__ import annotations

import numpy as np

from .errors import StructureError

CLUSTER_TOL = 1e-7


def poly_roots(coef) -> np.ndarray:
    """All roots of an ascending-coefficient polynomial (companion-matrix eigenvalues)."""
    c = np.trim_zeros(np.asarray(coef, dtype=complex), "b")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(c[::-1])
    return polish(c, roots)


def polish(coef, roots, iters=3) -> np.ndarray:
    """A few Newton steps on well separated roots; clustered roots are left alone."""
    c = np.asarray(coef, dtype=complex)
    dc = c[1:] * np.arange(1, c.size)
    out = np.array(roots, dtype=complex)
    for i, r in enumerate(out):
        others = np.delete(out, i)
        if others.size and np.min(np.abs(others - r)) < 1e-4 * max(1.0, abs(r)):
            continue
        z = r
        for _ in range(iters):
            d = horner(dc, z)
            if d == 0:
                break
            step = horner(c, z) / d
            z = z - step
            if abs(step) <= 1e-16 * max(1.0, abs(z)):
                break
        if abs(z - r) < 1e-6 * max(1.0, abs(r)):
            out[i] = z
    return out


def horner(coef, z):
    acc = 0j
    for c in coef[::-1]:
        acc = acc * z + c
    return acc


def cluster(values, tol=CLUSTER_TOL, imag_tol=1e-10) -> list[tuple[complex, int]]:
    """Group values closer than ``tol`` into ``(mean, multiplicity)`` pairs.

    Near-real values are snapped to the real axis and complex values are
    paired with their conjugates so that downstream sums come out real.
    """
    vals = [complex(v) for v in values]
    vals = [complex(v.real, 0.0) if abs(v.imag) <= imag_tol * max(1.0, abs(v)) else v for v in vals]
    groups: list[list[complex]] = []
    for v in sorted(vals, key=lambda z: (z.real, z.imag)):
        for g in groups:
            if abs(np.mean(g) - v) < tol:
                g.append(v)
                break
        else:
            groups.append([v])
    out = [(complex(np.mean(g)), len(g)) for g in groups]
    # enforce exact conjugate symmetry
    fixed = []
    used = [False] * len(out)
    for i, (z, k) in enumerate(out):
        if used[i]:
            continue
        used[i] = True
        if z.imag == 0:
            fixed.append((z, k))
            continue
        j = min(
            (j for j in range(len(out)) if not used[j] and out[j][1] == k),
            key=lambda j: abs(out[j][0] - z.conjugate()),
            default=None,
        )
        if j is None or abs(out[j][0] - z.conjugate()) > 1e-6 * max(1.0, abs(z)):
            raise StructureError(f"non-real root {z!r} has no conjugate partner")
        used[j] = True
        zr = complex(0.5 * (z.real + out[j][0].real), 0.5 * abs(z.imag - out[j][0].imag))
        fixed.append((zr, k))
        fixed.append((zr.conjugate(), k))
    return fixed


def poly_from_roots(roots_mult) -> np.ndarray:
    c = np.array([1.0 + 0j])
    for z, k in roots_mult:
        for _ in range(k):
            c = np.convolve(c, [-z, 1.0])
    return c


def taylor_shift(coef, center) -> np.ndarray:
    """Coefficients of ``p(center + h)`` in powers of h (repeated synthetic division)."""
    c = np.array(coef, dtype=complex)
    n = c.size
    out = np.empty(n, dtype=complex)
    work = c.copy()
    for k in range(n):
        # divide work by (s - center); remainder is the k-th Taylor coefficient
        acc = 0j
        quotient = np.empty(max(work.size - 1, 0), dtype=complex)
        for i in range(work.size - 1, -1, -1):
            acc = acc * center + work[i]
            if i > 0:
                quotient[i - 1] = acc
        out[k] = acc
        work = quotient
        if work.size == 0:
            out[k + 1:] = 0
            break
    return out


def series_divide(num, den, order) -> np.ndarray:
    """First ``order`` coefficients of the power series ``num/den`` (``den[0] != 0``)."""
    num = np.concatenate([np.asarray(num, dtype=complex), np.zeros(order, dtype=complex)])[:order]
    den = np.concatenate([np.asarray(den, dtype=complex), np.zeros(order, dtype=complex)])[:order]
    if den[0] == 0:
        raise StructureError("series division by a polynomial vanishing at the expansion point")
    q = np.zeros(order, dtype=complex)
    for n in range(order):
        q[n] = (num[n] - np.dot(q[:n], den[n:0:-1])) / den[0]
    return q


def residues(num, lead, roots_mult) -> list[np.ndarray]:
    """Principal parts of ``num(s) / (lead * prod (s - rho_j)^m_j)``.

    Returns, for each root, the array ``[c_1, ..., c_m]`` where ``c_k`` is the
    coefficient of ``(s - rho_j)^-k``. Each is a Taylor coefficient of the
    deflated function at rho_j, obtained by shifting numerator and deflated
    denominator to rho_j and dividing the series; no numeric differentiation.
    """
    out = []
    for j, (rho, m) in enumerate(roots_mult):
        others = [rm for i, rm in enumerate(roots_mult) if i != j]
        den = lead * poly_from_roots(others)
        n_sh = taylor_shift(num, rho)
        d_sh = taylor_shift(den, rho)
        g = series_divide(n_sh, d_sh, m)
        out.append(np.array([g[m - k] for k in range(1, m + 1)]))
    return out
