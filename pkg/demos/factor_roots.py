"""Roots, poles and the law of the killed infimum for a two-sided model.

Prints the roots of log E[e^{zX_1}] = alpha in the left half-plane, the poles
contributed by the downward phase-type jumps, the resulting mixture for -I,
and the factorization residual on a few real test points.
"""

from levyput import fleet
from levyput.wiener_hopf import inf_law, phase_type_roots, wh_factorization_check

m = fleet.model("two_sided")
alpha = 0.3
rs = phase_type_roots(m, alpha)
print("roots:")
for z, k in rs.roots:
    print(f"  {z.real:+.10f} {z.imag:+.10f}i  (multiplicity {k})")
print("poles:")
for z, k in rs.poles:
    print(f"  {z.real:+.10f} {z.imag:+.10f}i  (multiplicity {k})")

factor, mix = inf_law(m, alpha)
print(f"\nP(I = 0) = {mix.atom0:.6g}, total mass = {mix.atom0 + mix.tail_moment(0.0, 0.0):.15f}")
print("density of -I: sum of A * (-rho y)^(k-1) / (k-1)! * e^(rho y)")
for rho, k, a in mix.terms:
    print(f"  rho = {complex(rho):.6f}, k = {k}, A = {complex(a):.6f}")

print("\nfactorization residuals:")
for theta in (-2.0, -0.5, 0.5, 2.0):
    print(f"  theta = {theta:+.1f}: {wh_factorization_check(m, alpha, theta):.2e}")
