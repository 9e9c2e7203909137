"""Command-line entry point: ``levyput <command> [flags]``.

Models come from a JSON file (a bare model object, or ``{"model": ...,
"strike": K, "rate": r}``) or from the built-in fleet as ``fleet:<name>``.
Tables are written as CSV with 17 significant digits, summaries as JSON.

Exit codes: 0 success, 1 a check failed, 2 invalid input (JSON error on
stderr), 3 analytic structure error, 64 unknown command.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import fleet
from .american import PutProblem, optimal_threshold, pasting_diagnosis, value_function
from .checks import verify_fleet
from .errors import LevyError, PoleError, StructureError, ValidationError
from .models import LevyModel, char_exponent, classify_regularity, laplace_exponent
from .montecarlo import Estimate, SimConfig, inf_endpoint_shards
from .passage import (
    DegenerateModelWarning,
    PassageQuery,
    down_passage_sn_printed,
    fluctuation_identity_check,
    pecherskii_rogozin_sides,
)
from .wiener_hopf import (
    _fmt,
    inf_law,
    phase_type_roots,
    scale_function,
    wiener_hopf_factors,
)

COMMANDS = ("price", "threshold", "diagnose", "factors", "identity-check", "simulate", "verify")
EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_STRUCTURE, EXIT_USAGE = 1, 2, 3, 64


@dataclass(frozen=True)
class RunConfig:
    command: str
    model_path: str | None = None
    K: float | None = None
    r: float | None = None
    grid: tuple | None = None
    sim: SimConfig = SimConfig()
    output: str | None = None
    path: str = "mixture"
    table: str = "roots"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError("command", f"unknown command {self.command!r}")
        needs_model = self.command != "verify"
        if needs_model and not self.model_path:
            raise ValidationError("model", "required")
        needs_rate = self.command in ("price", "threshold", "diagnose", "factors", "identity-check", "simulate")
        if needs_rate and self.r is None:
            raise ValidationError("rate", "required")
        if self.command in ("price", "threshold", "diagnose") and self.K is None:
            raise ValidationError("strike", "required")
        if self.command == "price" and self.grid is None:
            raise ValidationError("grid", "required")
        if self.grid is not None:
            lo, hi, n = self.grid
            if n < 2 or not lo < hi:
                raise ValidationError("grid", "need lo < hi and n >= 2")


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValidationError("grid", "expected lo:hi:n")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValidationError("grid", "expected lo:hi:n with numeric lo, hi and integer n") from None
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("grid", "bounds must be finite")
    return lo, hi, n


def load_config(source: str) -> tuple[LevyModel, dict]:
    """Model plus any ``strike``/``rate`` defaults carried by the file."""
    if source.startswith("fleet:"):
        name = source.split(":", 1)[1]
        if name not in fleet.MODELS:
            raise ValidationError("model", f"unknown fleet model {name!r}")
        K, r = fleet.PUT_DEFAULTS[name]
        return fleet.MODELS[name], {"strike": K, "rate": r}
    try:
        with open(source) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ValidationError("model", f"cannot read {source}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValidationError("model", f"invalid JSON: {e.msg} at line {e.lineno}") from None
    extra = {}
    if isinstance(data, dict) and "model" in data:
        extra = {k: data[k] for k in ("strike", "rate") if k in data}
        unknown = set(data) - {"model", "strike", "rate"}
        if unknown:
            raise ValidationError(sorted(unknown)[0], "unknown field")
        data = data["model"]
    return LevyModel.from_dict(data), extra


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levyput", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", metavar="command")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="JSON config path or fleet:<name>")
    common.add_argument("--strike", type=float, help="strike K > 0")
    common.add_argument("--rate", type=float, help="discount rate r (killing rate alpha for factors/identity-check)")
    common.add_argument("--grid", help="lo:hi:n grid of log-prices")
    common.add_argument("--seed", type=int, default=2005)
    common.add_argument("--paths", type=int, default=100_000)
    common.add_argument("--shards", type=int, default=1)
    common.add_argument("--out", help="output file (default: stdout)")
    helps = {
        "price": "value function on a grid (CSV)",
        "threshold": "optimal threshold and pasting type (JSON)",
        "diagnose": "regularity and pasting diagnosis (JSON)",
        "factors": "roots/poles or infimum law of the minus factor (CSV)",
        "identity-check": "factorization, passage and overshoot identities (CSV)",
        "simulate": "Monte Carlo infimum statistics per shard (CSV)",
        "verify": "analytic vs passage vs Monte Carlo comparison over the fleet (JSON)",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "price":
            p.add_argument("--path", choices=("mixture", "passage"), default="mixture")
        if name == "factors":
            p.add_argument("--table", choices=("roots", "mixture"), default="roots")
    return ap


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _problem(cfg: RunConfig) -> PutProblem:
    model, _ = load_config(cfg.model_path)
    return PutProblem(cfg.K, cfg.r, model)


IDENTITY_HEADER = ["identity", "alpha", "beta", "x", "lhs", "rhs", "residual", "tolerance", "passed"]


def identity_rows(model: LevyModel, alpha: float, sim: SimConfig | None = None) -> list[tuple]:
    """One row per identity evaluation; ``x`` holds theta, q, lambda or the level as appropriate."""
    rows = []
    for t in (-5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0):
        minus, plus = wiener_hopf_factors(model, alpha)
        lhs = complex(plus(-1j * t) * minus(1j * t))
        rhs = complex(alpha / (alpha + char_exponent(model, t)))
        res = abs(lhs - rhs)
        rows.append(("wiener_hopf", alpha, 0.0, t, lhs.real, rhs.real, res, 1e-8, res < 1e-8))
    for q, b in ((1.0, 0.0), (2.0, 0.5), (3.0, 1.0)):
        lhs, rhs = pecherskii_rogozin_sides(model, alpha, b, q)
        res = abs(lhs - rhs)
        rows.append(("pecherskii_rogozin", alpha, b, q, lhs, rhs, res, 1e-10, res < 1e-10))
    if model.spectrally_negative and not model.negative_subordinator and alpha > 0:
        W = scale_function(model, alpha)
        for lam in (W.phi + 1.0, W.phi + 2.0, W.phi + 5.0):
            target = 1.0 / (laplace_exponent(model, lam).real - alpha)
            got = float(np.real(W.laplace(lam)))
            res = abs(got - target) / abs(target)
            rows.append(("scale_transform", alpha, 0.0, lam, got, target, res, 1e-8, res < 1e-8))
        for b in (W.phi, W.phi + 1.0):
            c = down_passage_sn_printed(model, PassageQuery(alpha, b, 1.0))
            rows.append(("down_passage_scale_formula", alpha, b, 1.0, c.value, c.canonical, c.abs_diff, 1e-9, c.agrees))
    if sim is not None and alpha > 0 and not model.negative_subordinator:
        lhs, rhs, z = fluctuation_identity_check(model, alpha, 0.5, 0.7, sim)
        rows.append(("overshoot_mc_z", alpha, 0.5, 0.7, lhs.mean, rhs.mean, z, 3.0, z < 3.0))
    return [tuple(float(v) if isinstance(v, (float, np.floating)) else (str(bool(v)).lower() if isinstance(v, (bool, np.bool_)) else v) for v in r) for r in rows]


def run(cfg: RunConfig) -> int:
    c = cfg.command
    if c == "verify":
        results = verify_fleet(cfg.sim)
        failed = [r for r in results if not r.passed]
        _emit(_json({"n_checks": len(results), "n_failed": len(failed), "checks": [r.to_dict() for r in results]}), cfg.output)
        return EXIT_CHECK_FAILED if failed else 0
    if c in ("price", "threshold", "diagnose"):
        p = _problem(cfg)
        s = optimal_threshold(p)
        if c == "threshold":
            _emit(_json({
                "x_star": s.x_star,
                "pasting": s.pasting,
                "discount_factor": s.discount_factor,
                "atom0": s.atom0,
                "right_derivative": s.right_derivative,
                "strike": p.strike,
                "rate": p.rate,
            }), cfg.output)
        elif c == "diagnose":
            d = pasting_diagnosis(s, p)
            rep = classify_regularity(p.model).to_dict()
            rep.update(
                atom0=s.atom0,
                pasting=d.pasting,
                right_derivative=d.right_derivative,
                numeric_derivative=d.numeric_derivative,
                consistent=d.consistent,
            )
            _emit(_json(rep), cfg.output)
            return 0 if d.consistent else EXIT_CHECK_FAILED
        else:
            lo, hi, n = cfg.grid
            xs = np.linspace(lo, hi, n)
            v = value_function(s, p, xs, path=cfg.path)
            rows = [(float(x), float(vx), float(max(p.strike - math.exp(x), 0.0))) for x, vx in zip(xs, v)]
            _emit(_csv(rows, ["x", "value", "payoff"]), cfg.output)
        return 0
    model, _ = load_config(cfg.model_path)
    if c == "factors":
        if cfg.table == "roots":
            _emit(phase_type_roots(model, cfg.r).to_csv(), cfg.output)
        else:
            _emit(inf_law(model, cfg.r)[1].to_csv(), cfg.output)
        return 0
    if c == "identity-check":
        rows = identity_rows(model, cfg.r, cfg.sim)
        _emit(_csv(rows, IDENTITY_HEADER), cfg.output)
        return 0 if all(r[-1] == "true" for r in rows) else EXIT_CHECK_FAILED
    if c == "simulate":
        parts = inf_endpoint_shards(model, cfg.r, cfg.sim)
        rows = []
        labels = [str(i) for i in range(len(parts))] + ["merged"]
        for label, arr in zip(labels, parts + [np.concatenate(parts)]):
            y = -arr[:, 0]
            for q, data in (("neg_inf_mean", y), ("atom0", (y == 0).astype(float)), ("endpoint_mean", arr[:, 1])):
                e = Estimate.from_samples(data)
                rows.append((label, q, e.mean, e.std_error, e.n))
        _emit(_csv(rows, ["shard", "quantity", "mean", "std_error", "n"]), cfg.output)
        return 0
    raise AssertionError(c)


def _error(kind: str, field: str, message: str) -> str:
    return json.dumps({"error": kind, "field": field, "message": message})


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # let "--grid -1:1:5" through: argparse would read the negative bound as an option
    for i, tok in enumerate(argv[:-1]):
        if tok == "--grid":
            argv[i : i + 2] = [f"--grid={argv[i + 1]}"]
            break
    ap = _build_parser()
    if not argv or (not argv[0].startswith("-") and argv[0] not in COMMANDS):
        ap.print_usage(sys.stderr)
        if argv:
            print(f"levyput: unknown command {argv[0]!r}", file=sys.stderr)
        return EXIT_USAGE
    try:
        ns = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and EXIT_INVALID
    if ns.command is None:
        ap.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        K, r = ns.strike, ns.rate
        if ns.model and (K is None or r is None):
            _, extra = load_config(ns.model)
            K = extra.get("strike") if K is None else K
            r = extra.get("rate") if r is None else r
        try:
            sim = SimConfig(n_paths=ns.paths, seed=ns.seed, shards=ns.shards)
        except ValueError as e:
            raise ValidationError("sim", str(e)) from None
        cfg = RunConfig(
            command=ns.command,
            model_path=ns.model,
            K=K,
            r=r,
            grid=parse_grid(ns.grid) if ns.grid else None,
            sim=sim,
            output=ns.out,
            path=getattr(ns, "path", "mixture"),
            table=getattr(ns, "table", "roots"),
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateModelWarning)
            return run(cfg)
    except ValidationError as e:
        print(_error("validation", e.field, e.message), file=sys.stderr)
        return EXIT_INVALID
    except (StructureError, PoleError) as e:
        print(_error(type(e).__name__, "", str(e)), file=sys.stderr)
        return EXIT_STRUCTURE
    except (LevyError, ValueError) as e:
        print(_error(type(e).__name__, "", str(e)), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
