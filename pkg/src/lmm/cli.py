"""Command-line front end.

    lmm simulate --family uniform --S 1000 --n 2000 --trials 20 --estimators lmm,empirical
    lmm estimate counts.txt --out estimate.json
    lmm functional counts.txt --kind entropy --out value.json

Count files hold a header line ``n=<rate>`` followed by one nonnegative
integer per line. Exit codes: 0 success, 1 runtime or I/O error, 2 usage or
parse error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .estimator import LmmConfig, lmm_estimate
from .exceptions import ConfigurationError, SolverError
from .functionals import FunctionalSpec, baseline_functional, estimate_functional
from .metrics import monte_carlo_risk, reports_to_csv
from .sampling import CountVector, family_rng, make_distribution, parse_family, trial_rng

log = logging.getLogger("lmm")


class UsageError(Exception):
    """Bad flags or malformed input; exit code 2."""


def read_counts(path) -> CountVector:
    """Parse a counts file, reporting the offending line number on error."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rate = None
    counts = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if rate is None:
            key, sep, value = line.partition("=")
            if not sep or key.strip() != "n":
                raise UsageError(f"{path}:{lineno}: expected header 'n=<rate>', got {line!r}")
            try:
                rate = float(value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: rate {value.strip()!r} is not a number") from None
            if not rate > 0:
                raise UsageError(f"{path}:{lineno}: rate must be positive")
            continue
        try:
            c = int(line)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: {line!r} is not an integer count") from None
        if c < 0:
            raise UsageError(f"{path}:{lineno}: negative count {c}")
        counts.append(c)
    if rate is None:
        raise UsageError(f"{path}: missing 'n=<rate>' header")
    return CountVector(np.array(counts, dtype=np.int64), rate)


def write_counts(path, counts: CountVector) -> None:
    body = "\n".join(str(int(c)) for c in counts.counts)
    Path(path).write_text(f"n={counts.rate:g}\n{body}\n", encoding="utf-8")


def _config_from_args(args) -> LmmConfig:
    return LmmConfig(
        c1=args.c1,
        c2=args.c2,
        c3=args.c3,
        theory_mode=args.theory_mode,
        grid_factor=args.grid_factor,
        min_moments=args.min_moments,
        support_size=args.support_size,
        seed=args.seed,
    )


def _dump(path, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def sorted_empirical(counts: CountVector, rng=None) -> np.ndarray:
    return np.sort(counts.counts / counts.rate)


def _estimators(names, config: LmmConfig, dist):
    table = {
        "lmm": lambda counts, rng: lmm_estimate(counts, config, rng)[0].values,
        "empirical": sorted_empirical,
        "truth": lambda counts, rng: np.sort(dist.probs),
    }
    out = []
    for name in names:
        if name not in table:
            raise UsageError(f"unknown estimator {name!r}; choose from {sorted(table)}")
        out.append((name, table[name]))
    return out


def cmd_simulate(args) -> int:
    family, params = parse_family(args.family)
    config = _config_from_args(args)
    names = [s.strip() for s in args.estimators.split(",") if s.strip()]
    if not names:
        raise UsageError("no estimators given")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.model not in ("poissonized", "multinomial"):
        raise UsageError("--model must be poissonized or multinomial")
    dist_rng = family_rng(args.seed) if family == "dirichlet" else None
    dist = make_distribution(family, args.S, rng=dist_rng, **params)
    experiment = {
        "command": "simulate",
        "family": args.family,
        "S": args.S,
        "n": args.n,
        "trials": args.trials,
        "estimators": names,
        "model": args.model,
        "seed": args.seed,
        "config": config.to_dict(),
    }
    reports = []
    for name, est in _estimators(names, config, dist):
        reports.append(
            monte_carlo_risk(
                dist,
                est,
                args.n,
                args.trials,
                args.seed,
                model=args.model,
                name=name,
                family=family,
                params=params,
                config=config.to_dict(),
            )
        )
    header = "# experiment=" + json.dumps(experiment, sort_keys=True) + "\n"
    Path(args.csv).write_text(header + reports_to_csv(reports), encoding="utf-8")
    _dump(args.json, {"experiment": experiment, "reports": [dict(r.summary(), losses=r.losses) for r in reports]})
    for r in reports:
        print(f"{r.estimator:>10s}  mean sorted-l1 {r.mean:.6f} +- {r.stderr:.6f}  ({r.trials} trials)")
    return 0


def cmd_estimate(args) -> int:
    counts = read_counts(args.input)
    config = _config_from_args(args)
    estimate, diag = lmm_estimate(counts, config, trial_rng(config.seed, 0))
    _dump(
        args.out,
        {
            "experiment": {"command": "estimate", "input": str(args.input), "seed": config.seed, "config": config.to_dict()},
            "estimate": estimate.values.tolist(),
            "diagnostics": _strip_time(diag.to_dict()),
        },
    )
    return 0


def _spec_from_args(args) -> FunctionalSpec:
    if args.kind == "entropy":
        return FunctionalSpec.entropy()
    if args.kind == "power_sum":
        if args.alpha is None or not 0 < args.alpha < 1:
            raise UsageError("power_sum requires --alpha with 0 < alpha < 1")
        return FunctionalSpec.power_sum(args.alpha)
    if args.k is None or args.k < 2:
        raise UsageError("support_size requires --k >= 2")
    return FunctionalSpec.support_size(args.k)


def cmd_functional(args) -> int:
    spec = _spec_from_args(args)
    counts = read_counts(args.input)
    config = _config_from_args(args)
    value = estimate_functional(counts, config, spec, trial_rng(config.seed, 0))
    _dump(
        args.out,
        {
            "experiment": {
                "command": "functional",
                "input": str(args.input),
                "seed": config.seed,
                "config": config.to_dict(),
                "functional": {"kind": spec.kind.value, "alpha": spec.alpha, "k": spec.k},
            },
            "lmm_value": value,
            "baseline_value": baseline_functional(counts, spec),
        },
    )
    return 0


def _strip_time(d: dict) -> dict:
    # wall time would break byte-identical reruns
    d = dict(d)
    d.pop("wall_time", None)
    return d


def _add_lmm_options(p: argparse.ArgumentParser) -> None:
    defaults = LmmConfig()
    g = p.add_argument_group("estimator constants")
    g.add_argument("--c1", type=float, default=defaults.c1, help="interval width constant")
    g.add_argument("--c2", type=float, default=defaults.c2, help="moment count constant, K = floor(c2 ln n)")
    g.add_argument("--c3", type=float, default=defaults.c3, help="tolerance radius constant")
    g.add_argument("--theory-mode", action="store_true", help="enforce c1 > 2 c2 and c3 > 30 c1")
    g.add_argument("--grid-factor", type=int, default=defaults.grid_factor)
    g.add_argument("--min-moments", type=int, default=defaults.min_moments, help="lower bound on K")
    g.add_argument("--support-size", type=int, default=None, help="known support size (min-mass bracket)")
    g.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lmm", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="Monte Carlo sorted-l1 risk of estimators")
    sim.add_argument("--family", default="uniform", help="uniform | zipf:s=1 | two_level:fraction=.1,ratio=10 | dirichlet:alpha=1")
    sim.add_argument("--S", type=int, required=True)
    sim.add_argument("--n", type=float, required=True)
    sim.add_argument("--trials", type=int, default=20)
    sim.add_argument("--estimators", default="lmm,empirical")
    sim.add_argument("--model", default="poissonized")
    sim.add_argument("--csv", default="risk.csv")
    sim.add_argument("--json", default="risk.json")
    _add_lmm_options(sim)
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="sorted distribution estimate from a counts file")
    est.add_argument("input")
    est.add_argument("--out", default="-")
    _add_lmm_options(est)
    est.set_defaults(func=cmd_estimate)

    fun = sub.add_parser("functional", help="plug-in symmetric functional from a counts file")
    fun.add_argument("input")
    fun.add_argument("--kind", choices=["entropy", "power_sum", "support_size"], required=True)
    fun.add_argument("--alpha", type=float)
    fun.add_argument("--k", type=int)
    fun.add_argument("--out", default="-")
    _add_lmm_options(fun)
    fun.set_defaults(func=cmd_functional)

    rerun = sub.add_parser("rerun", help="repeat the experiment recorded in a previous CSV or JSON output")
    rerun.add_argument("previous")
    rerun.add_argument("--csv", help="simulate: CSV path (default: from the original defaults)")
    rerun.add_argument("--json", help="simulate: JSON path")
    rerun.add_argument("--out", help="estimate/functional: output path")
    return parser


def args_from_output(path) -> list[str]:
    """Reconstruct argv from the ``experiment`` block of an output file."""
    text = Path(path).read_text(encoding="utf-8")
    if text.startswith("# experiment="):
        exp = json.loads(text.splitlines()[0][len("# experiment="):])
    else:
        exp = json.loads(text)["experiment"]
    cfg = exp["config"]
    argv = [exp["command"]]
    if exp["command"] == "simulate":
        argv += [
            "--family", exp["family"], "--S", str(exp["S"]), "--n", repr(exp["n"]),
            "--trials", str(exp["trials"]), "--estimators", ",".join(exp["estimators"]),
            "--model", exp["model"],
        ]
    else:
        argv.append(exp["input"])
    if exp["command"] == "functional":
        f = exp["functional"]
        argv += ["--kind", f["kind"]]
        if f["alpha"] is not None:
            argv += ["--alpha", repr(f["alpha"])]
        if f["k"] is not None:
            argv += ["--k", str(f["k"])]
    argv += ["--c1", repr(cfg["c1"]), "--c2", repr(cfg["c2"]), "--c3", repr(cfg["c3"]),
             "--grid-factor", str(cfg["grid_factor"]), "--min-moments", str(cfg["min_moments"]),
             "--seed", str(cfg["seed"])]
    if cfg["theory_mode"]:
        argv.append("--theory-mode")
    if cfg["support_size"] is not None:
        argv += ["--support-size", str(cfg["support_size"])]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if args.command == "rerun":
        try:
            replay = args_from_output(args.previous)
        except OSError as exc:
            print(f"lmm: {exc}", file=sys.stderr)
            return 1
        except (KeyError, ValueError) as exc:
            print(f"lmm: {args.previous} has no usable experiment record ({exc})", file=sys.stderr)
            return 2
        for flag in ("csv", "json", "out"):
            if getattr(args, flag) is not None and (flag == "out") != (replay[0] == "simulate"):
                replay += [f"--{flag}", getattr(args, flag)]
        args = parser.parse_args(replay)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"lmm: {exc}", file=sys.stderr)
        return 2
    except (OSError, SolverError) as exc:
        print(f"lmm: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
