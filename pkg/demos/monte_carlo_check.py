"""Compare the analytic put value with simulation across the model fleet.

Each line shows the analytic value at x* + 0.5, the Monte Carlo estimate of
E[e^{-r tau} (K - e^{X_tau})] for the first passage below x*, and the z-score.
"""

from levyput import fleet
from levyput.american import optimal_threshold, value_function
from levyput.montecarlo import SimConfig, estimate_put_value

cfg = SimConfig(n_paths=50_000, seed=7)
print(f"{'model':16s} {'x*':>9s} {'analytic':>10s} {'MC':>10s} {'se':>9s} {'z':>6s}")
for name in fleet.MODELS:
    p = fleet.put_problem(name)
    s = optimal_threshold(p)
    x = s.x_star + 0.5
    v = value_function(s, p, x)
    est = estimate_put_value(p, x, s.x_star, cfg)
    print(f"{name:16s} {s.x_star:9.5f} {v:10.6f} {est.mean:10.6f} {est.std_error:9.2e} {est.z_score(v):6.2f}")
