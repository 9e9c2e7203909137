"""Continuous but not smooth pasting for a bounded-variation model.

The process drifts up at rate 1 and jumps down by exponential(1) amounts at
rate 1. Zero is irregular for the lower half-line, the infimum has an atom
at 0, and the value function has a kink at x*.
"""

import math

from levyput import fleet
from levyput.american import optimal_threshold, pasting_diagnosis, threshold_perturbation, value_function
from levyput.models import classify_regularity
from levyput.wiener_hopf import phi_of_alpha

p = fleet.put_problem("sn_bv_up")
s = optimal_threshold(p)
reg = classify_regularity(p.model)
print(f"regularity    : {reg.regular_downward} ({reg.detail})")
print(f"Phi(2)        = {phi_of_alpha(p.model, 2.0):.12f}  (1 + sqrt 3 = {1 + math.sqrt(3):.12f})")
print(f"P(I = 0)      = {s.atom0:.12f}  (2/(1+sqrt 3) = {2 / (1 + math.sqrt(3)):.12f})")
print(f"x*            = {s.x_star:.6f}")

d = pasting_diagnosis(s, p)
print(f"left slope    = {-math.exp(s.x_star):.6f}")
print(f"right slope   = {s.right_derivative:.6f} (finite difference {d.numeric_derivative:.6f})")
print(f"kink          = K P(I=0) = {p.strike * s.atom0:.6f}")

print("\nmoving the threshold away from x* opens a jump in the candidate value:")
for delta in (-0.2, 0.2):
    pc = threshold_perturbation(s, p, delta)
    print(f"  y = x*{delta:+.1f}: jump {pc.statistic:+.6f}, predicted {pc.predicted:+.6f}")

x = s.x_star + 1e-9
print(f"\nv(x*) = {value_function(s, p, s.x_star):.9f}, v(x*+1e-9) = {value_function(s, p, x):.9f}")
