"""Exact path simulation for the phase-type jump-diffusion family.

Paths are simulated segment by segment between events of a Poisson clock
that merges jumps and exponential killing. Inside a segment the path is a
Brownian motion with drift; given both endpoints its minimum is drawn from
the Brownian-bridge minimum law, so infima and barrier crossings carry no
discretisation bias.

Seeding: a run with ``(seed, shards)`` uses the child streams
``np.random.SeedSequence([seed, stream]).spawn(shards)``; shard ``i``
simulates ``n // shards`` paths plus one extra for ``i < n % shards``, and
shard outputs are concatenated in shard order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import UnsupportedLimitError
from .models import LevyModel, PhaseType, log_mgf

KILLED, CROSSED, HORIZON = 0, 1, 2


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 100_000
    seed: int = 2005
    shards: int = 1
    r0_horizon_epsilon: float = 1e-6

    def __post_init__(self):
        if self.n_paths < 100:
            raise ValueError("n_paths must be >= 100")
        if self.shards < 1 or self.shards > self.n_paths:
            raise ValueError("shards must be in [1, n_paths]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not 0 < self.r0_horizon_epsilon < 1:
            raise ValueError("r0_horizon_epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int

    @classmethod
    def from_samples(cls, x) -> "Estimate":
        x = np.asarray(x, dtype=float)
        n = x.size
        se = float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(float(np.mean(x)), se, n)

    def z_score(self, target: float) -> float:
        diff = abs(self.mean - target)
        tol = 1e-12 * max(1.0, abs(target))
        # constant samples carry only rounding noise in their standard error
        if self.std_error <= tol:
            return 0.0 if diff <= tol else math.inf
        return diff / self.std_error


def z_between(a: Estimate, b: Estimate) -> float:
    se = math.hypot(a.std_error, b.std_error)
    diff = abs(a.mean - b.mean)
    if se <= 1e-12 * max(1.0, abs(a.mean)):
        return 0.0 if diff <= 1e-12 * max(1.0, abs(a.mean)) else math.inf
    return diff / se


# --- samplers --------------------------------------------------------------


def sample_phase_type(pt: PhaseType, rng: np.random.Generator, n: int) -> np.ndarray:
    """Absorption times, simulating the chain jump by jump."""
    m = pt.m
    T = pt.T_mat
    out_rates = -np.diag(T)
    moves = T / out_rates[:, None]
    np.fill_diagonal(moves, 0.0)
    moves = np.hstack([moves, (pt.t_vec / out_rates)[:, None]])
    cum = np.cumsum(moves, axis=1)
    cum[:, -1] = 1.0
    cum_a = np.cumsum(pt.a_vec)
    cum_a[-1] = 1.0
    state = np.minimum(np.searchsorted(cum_a, rng.random(n), side="right"), m - 1)
    total = np.zeros(n)
    alive = np.arange(n)
    while alive.size:
        s = state[alive]
        total[alive] += rng.exponential(1.0, alive.size) / out_rates[s]
        u = rng.random(alive.size)
        nxt = np.minimum((u[:, None] >= cum[s]).sum(axis=1), m)
        keep = nxt < m
        state[alive[keep]] = nxt[keep]
        alive = alive[keep]
    return total


@dataclass
class PathBatch:
    status: np.ndarray
    value: np.ndarray  # X at kill/horizon time, or X at the passage time
    running_inf: np.ndarray


def simulate_paths(
    model: LevyModel,
    rng: np.random.Generator,
    n: int,
    start: float = 0.0,
    kill_rate: float = 0.0,
    horizon: float = math.inf,
    level: Optional[float] = None,
) -> PathBatch:
    """Run ``n`` paths from ``start`` until killing, the horizon, or strict passage below ``level``."""
    lam = model.jump_rate
    clock = kill_rate + lam
    if clock == 0 and not math.isfinite(horizon):
        raise ValueError("no killing, no jumps and no horizon: paths never stop")
    s2, sig, mu = model.gaussian, model.sigma, model.drift
    p_up = model.up.rate / lam if model.up is not None else 0.0
    pos = np.full(n, float(start))
    run_inf = pos.copy()
    elapsed = np.zeros(n)
    status = np.full(n, -1, dtype=np.int8)
    value = np.zeros(n)
    active = np.arange(n)
    while active.size:
        na = active.size
        h = rng.exponential(1.0, na) / clock if clock > 0 else np.full(na, math.inf)
        remaining = horizon - elapsed[active]
        at_horizon = h >= remaining
        h = np.where(at_horizon, remaining, h)
        a = pos[active]
        if s2 > 0:
            b = a + mu * h + sig * np.sqrt(h) * rng.standard_normal(na)
            u = 1.0 - rng.random(na)
            seg_min = 0.5 * (a + b - np.sqrt((b - a) ** 2 - 2.0 * s2 * h * np.log(u)))
        else:
            b = a + mu * h
            seg_min = np.minimum(a, b)
        run_inf[active] = np.minimum(run_inf[active], seg_min)
        pos[active] = b
        elapsed[active] += h
        if level is not None:
            crossed = seg_min < level
            idx = active[crossed]
            status[idx] = CROSSED
            value[idx] = level
        else:
            crossed = np.zeros(na, dtype=bool)
        hz = at_horizon & ~crossed
        status[active[hz]] = HORIZON
        value[active[hz]] = b[hz]
        ev = ~crossed & ~at_horizon
        idx = active[ev]
        if idx.size == 0:
            break
        kill = rng.random(idx.size) * clock < kill_rate
        status[idx[kill]] = KILLED
        value[idx[kill]] = pos[idx[kill]]
        jumpers = idx[~kill]
        if jumpers.size:
            up = rng.random(jumpers.size) < p_up
            sizes = np.zeros(jumpers.size)
            if np.any(up):
                sizes[up] = sample_phase_type(model.up.law, rng, int(up.sum()))
            if np.any(~up):
                sizes[~up] = -sample_phase_type(model.down.law, rng, int((~up).sum()))
            pos[jumpers] += sizes
            run_inf[jumpers] = np.minimum(run_inf[jumpers], pos[jumpers])
            if level is not None:
                below = pos[jumpers] < level
                status[jumpers[below]] = CROSSED
                value[jumpers[below]] = pos[jumpers[below]]
                jumpers = jumpers[~below]
        active = jumpers
    return PathBatch(status, value, run_inf)


# --- sharding ---------------------------------------------------------------


def _run_sharded(cfg: SimConfig, stream: int, job: Callable[[np.random.Generator, int], np.ndarray]) -> list:
    children = np.random.SeedSequence([cfg.seed, stream]).spawn(cfg.shards)
    base, extra = divmod(cfg.n_paths, cfg.shards)
    sizes = [base + (1 if i < extra else 0) for i in range(cfg.shards)]

    def one(i):
        return job(np.random.default_rng(children[i]), sizes[i])

    if cfg.shards == 1:
        return [one(0)]
    with ThreadPoolExecutor(max_workers=min(cfg.shards, 8)) as ex:
        return list(ex.map(one, range(cfg.shards)))


def sharded_samples(cfg: SimConfig, stream: int, job) -> np.ndarray:
    return np.concatenate(_run_sharded(cfg, stream, job))


def shard_estimates(cfg: SimConfig, stream: int, job) -> tuple[list[Estimate], Estimate]:
    parts = _run_sharded(cfg, stream, job)
    return [Estimate.from_samples(p) for p in parts], Estimate.from_samples(np.concatenate(parts))


# --- r = 0 truncation -------------------------------------------------------


def drift_horizon(model: LevyModel, depth: float, eps: float) -> float:
    """Time T after which a new passage below ``-depth`` has probability < eps.

    With ``gamma > 0`` the root of ``log_mgf(-gamma) = 0`` (X drifts up),
    ``P_z(inf X < l) <= exp(-gamma/2 (z - l))`` for ``z >= l``, hence the
    post-T passage probability is at most
    ``exp(gamma depth / 2 + T log_mgf(-gamma/2))``.
    """
    from .wiener_hopf import phase_type_roots

    if not model.mean > 0:
        raise UnsupportedLimitError("r = 0 simulation requires E[X_1] > 0")
    rs = phase_type_roots(model, 0.0)
    real = [z.real for z, _ in rs.roots if z.imag == 0]
    if not real:
        return 0.0
    gamma = -max(real)
    rate = log_mgf(model, -0.5 * gamma).real
    return max((math.log(eps) - 0.5 * gamma * depth) / rate, 0.0)


# --- estimators -------------------------------------------------------------


def inf_endpoint_shards(model: LevyModel, r: float, cfg: SimConfig, stream: int = 0) -> list:
    """Per-shard ``(n_i, 2)`` arrays of ``(inf X_{e_r}, X_{e_r})`` in shard order."""
    if r < 0:
        raise ValueError("r must be >= 0")
    horizon = math.inf if r > 0 else drift_horizon(model, 0.0, cfg.r0_horizon_epsilon)

    def job(rng, n):
        b = simulate_paths(model, rng, n, kill_rate=r, horizon=horizon)
        return np.stack([b.running_inf, b.value], axis=1)

    return _run_sharded(cfg, stream, job)


def sample_inf_and_endpoint(model: LevyModel, r: float, cfg: SimConfig, stream: int = 0):
    """Samples of ``(inf X_{e_r}, X_{e_r})``; for r = 0 the endpoint is X at the truncation horizon."""
    out = np.concatenate(inf_endpoint_shards(model, r, cfg, stream))
    return out[:, 0], out[:, 1]


def estimate_passage(model: LevyModel, q, direction: str, cfg: SimConfig, stream: int = 1) -> Estimate:
    """Estimate ``E[exp(-alpha tau -/+ beta X_tau) 1(tau < inf)]``.

    ``direction='down'``: ``tau`` is the strict passage below ``-q.level``
    and the weight is ``exp(+beta X_tau)``. ``direction='up'``: passage above
    ``q.level`` with weight ``exp(-beta X_tau)``, simulated as the down
    passage of the dual model.
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    m = model if direction == "down" else model.dual()
    depth = float(q.level)
    if q.alpha > 0:
        horizon = math.inf
    else:
        horizon = drift_horizon(m, depth, cfg.r0_horizon_epsilon)

    def job(rng, n):
        b = simulate_paths(m, rng, n, kill_rate=q.alpha, horizon=horizon, level=-depth)
        return np.where(b.status == CROSSED, np.exp(q.beta * b.value), 0.0)

    return Estimate.from_samples(sharded_samples(cfg, stream, job))


def estimate_put_value(p, x: float, y: float, cfg: SimConfig, stream: int = 2) -> Estimate:
    """Monte Carlo of ``E_x[exp(-r tau_y) (K - exp(X_tau))^+]`` with tau the strict passage below y."""
    K, r = p.strike, p.rate
    if x < y:
        return Estimate(max(K - math.exp(x), 0.0), 0.0, cfg.n_paths)
    horizon = math.inf if r > 0 else drift_horizon(p.model, x - y, cfg.r0_horizon_epsilon)

    def job(rng, n):
        b = simulate_paths(p.model, rng, n, start=x, kill_rate=r, horizon=horizon, level=y)
        return np.where(b.status == CROSSED, np.maximum(K - np.exp(b.value), 0.0), 0.0)

    return Estimate.from_samples(sharded_samples(cfg, stream, job))


def estimate_stopped_discounted(model, r, func, x, barrier, t, cfg, stream=3) -> Estimate:
    """``E_x[exp(-r (t ^ tau)) f(X_{t ^ tau})]`` with tau the strict passage below ``barrier``.

    Discounting is realised as killing at rate r, so passage times never
    have to be located inside a Brownian segment.
    """

    def job(rng, n):
        b = simulate_paths(model, rng, n, start=x, kill_rate=r, horizon=t, level=barrier)
        out = np.zeros(n)
        live = b.status != KILLED
        out[live] = func(b.value[live])
        return out

    return Estimate.from_samples(sharded_samples(cfg, stream, job))


def estimate_discounted(model, r, func, x, t, cfg, stream=4) -> Estimate:
    """``E_x[exp(-r t) f(X_t)]``."""

    def job(rng, n):
        b = simulate_paths(model, rng, n, start=x, horizon=t)
        return math.exp(-r * t) * func(b.value)

    return Estimate.from_samples(sharded_samples(cfg, stream, job))
