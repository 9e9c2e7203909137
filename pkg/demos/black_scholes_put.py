"""Perpetual put under Brownian motion, where everything is explicit.

With sigma^2 = 2, no drift, K = 2 and r = 1 the infimum at an exponential(1)
time is -Exp(1), so E[e^I] = 1/2, the threshold is x* = 0 and v(x) = e^{-x}
above it.
"""

import math

import numpy as np

from levyput import fleet
from levyput.american import optimal_threshold, value_function

p = fleet.put_problem("brownian")
s = optimal_threshold(p)
print(f"x*            = {s.x_star:.12f}")
print(f"E[exp(I)]     = {s.discount_factor:.12f}")
print(f"pasting       = {s.pasting}, v'(x*+) = {s.right_derivative:.12f}")

xs = np.linspace(-1.0, 3.0, 9)
v = value_function(s, p, xs)
v2 = value_function(s, p, xs, path="passage")
exact = np.where(xs <= 0, p.strike - np.exp(xs), np.exp(-xs))
print("\n    x        v(x)     closed form   |mixture - passage|")
for x, a, b, e in zip(xs, v, v2, exact):
    print(f"{x:5.2f}  {a:10.7f}  {e:10.7f}   {abs(a - b):.1e}")
print(f"\nv(1) - e^-1 = {value_function(s, p, 1.0) - math.exp(-1):.1e}")
