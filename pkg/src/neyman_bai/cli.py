"""Command-line front end.

Subcommands: run (one Monte Carlo), sweep (worst-case gap sweep),
consistency (misidentification versus budget), bounds (closed-form bound
curve), verify (built-in check suite). Configuration is a strict JSON
document validated against the bundled schema; results are CSV (default)
or JSON rows sharing one column set across subcommands. Logs go to
standard error, results to --out or standard output.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from .distributions import Instance, Marginal
from .engine import (
    DEFAULT_GRID,
    TrialConfig,
    consistency_curve,
    run_monte_carlo,
    sweep_worst_case,
)
from .policies import Policy, policy_from_config, policy_name
from .theory import misid_upper_bound, regret_upper_bound_curve, worst_case_gap
from .verification import run_all

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_IO = 3

ENV_SEED = "NEYMAN_BAI_SEED"
DEFAULT_SEED = 42

COLUMNS = (
    "kind", "T", "R", "policy", "estimator", "sigma1", "sigma2",
    "mu1", "mu2", "gap", "x", "misid_prob", "misid_se", "mean_regret",
    "regret_se", "scaled_regret", "n1_frac", "seed",
)


class ConfigError(Exception):
    """Anything wrong with the supplied configuration (exit code 2)."""


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _schema(name: str) -> dict:
    text = resources.files("neyman_bai.schemas").joinpath(name).read_text("utf-8")
    return json.loads(text)


def parse_config(text: str) -> dict:
    """Parse and strictly validate a configuration document.

    Returns the validated mapping; raises ConfigError naming the offending
    key on any schema violation, including unknown keys.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(_schema("config.schema.json"))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config key {where!r}: {err.message}")
    return doc


def _load_config(args: argparse.Namespace, command: str, required: tuple[str, ...]) -> dict:
    if not args.config:
        raise ConfigError(f"the {command} command requires --config")
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    cfg = parse_config(text)
    for key in required:
        if key not in cfg:
            raise ConfigError(f"the {command} command requires config key {key!r}")
    return cfg


def _resolve_seed(args: argparse.Namespace, cfg: dict | None) -> int:
    if args.seed is not None:
        return args.seed
    if cfg is not None and "seed" in cfg:
        return cfg["seed"]
    env = os.environ.get(ENV_SEED)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(
                f"environment variable {ENV_SEED} must be an integer, got {env!r}"
            ) from exc
    return DEFAULT_SEED


def _resolve_reps(args: argparse.Namespace, cfg: dict, command: str) -> int:
    if args.reps is not None:
        if args.reps < 1:
            raise ConfigError(f"--reps must be >= 1, got {args.reps}")
        return args.reps
    if "R" in cfg:
        return cfg["R"]
    raise ConfigError(f"the {command} command requires config key 'R' (or pass --reps)")


def _resolve_threads(args: argparse.Namespace, cfg: dict | None) -> int:
    if getattr(args, "threads", None) is not None:
        if args.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {args.threads}")
        return args.threads
    if cfg is not None and "threads" in cfg:
        return cfg["threads"]
    return 1


def _build_instance(cfg: dict) -> Instance:
    spec = cfg["instance"]
    family = spec["family"]
    means = [float(m) for m in spec["means"]]
    variances = spec.get("variances")
    if family == "gaussian":
        if variances is None:
            raise ConfigError(
                "config key 'instance/variances': required for gaussian instances"
            )
        arms = [
            Marginal.gaussian(m, float(v)) for m, v in zip(means, variances)
        ]
    else:
        if variances is not None:
            for a, (m, v) in enumerate(zip(means, variances), start=1):
                if float(v) != m * (1.0 - m):
                    raise ConfigError(
                        f"config key 'instance/variances': arm {a} variance {v} "
                        f"must equal mean*(1-mean) = {m * (1.0 - m)} for bernoulli arms"
                    )
        try:
            arms = [Marginal.bernoulli(m) for m in means]
        except ValueError as exc:
            raise ConfigError(f"config key 'instance/means': {exc}") from exc
    return Instance(arms[0], arms[1])


def _build_policy(cfg: dict, fallback_sigmas: tuple[float, float]) -> Policy:
    pol = dict(cfg["policy"])
    if pol.get("kind") == "oracle_neyman" and "sigma1" not in pol and "sigma2" not in pol:
        pol["sigma1"], pol["sigma2"] = fallback_sigmas
    try:
        return policy_from_config(pol)
    except ValueError as exc:
        raise ConfigError(f"config key 'policy': {exc}") from exc


def _mc_row(
    kind: str, cfg: TrialConfig, R: int, report, seed: int, x: float | None
) -> dict:
    inst = cfg.instance
    return {
        "kind": kind,
        "T": cfg.T,
        "R": R,
        "policy": policy_name(cfg.policy),
        "estimator": cfg.estimator,
        "sigma1": inst.arm1.sd,
        "sigma2": inst.arm2.sd,
        "mu1": inst.arm1.mean,
        "mu2": inst.arm2.mean,
        "gap": inst.gap,
        "x": x,
        "misid_prob": report.misid_prob,
        "misid_se": report.misid_se,
        "mean_regret": report.mean_regret,
        "regret_se": report.regret_se,
        "scaled_regret": report.scaled_regret,
        "n1_frac": report.mean_alloc_frac[0],
        "seed": seed,
    }


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".17g")


def format_rows(rows: list[dict], fmt: str) -> str:
    """Render result rows as CSV (fixed column order) or a JSON list."""
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    lines = [",".join(COLUMNS)]
    for row in rows:
        lines.append(",".join(_csv_value(row[c]) for c in COLUMNS))
    return "\n".join(lines) + "\n"


def emit(rows: list[dict], fmt: str, path: str | None) -> None:
    """Write rows to path (or standard output when path is None)."""
    text = format_rows(rows, fmt)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_command(rows: list[dict], args: argparse.Namespace) -> int:
    fmt = args.format or "csv"
    try:
        emit(rows, fmt, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out:
        _log(f"wrote {len(rows)} row(s) to {args.out}")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args, "run", ("instance", "T", "policy"))
    seed = _resolve_seed(args, cfg)
    R = _resolve_reps(args, cfg, "run")
    threads = _resolve_threads(args, cfg)
    inst = _build_instance(cfg)
    policy = _build_policy(cfg, (inst.arm1.sd, inst.arm2.sd))
    estimator = cfg.get("estimator", "aipw")
    trial = TrialConfig(inst, cfg["T"], policy, estimator, seed)
    _log(
        f"run: T={trial.T} R={R} policy={policy_name(policy)} "
        f"estimator={estimator} seed={seed}"
    )
    report = run_monte_carlo(trial, R, threads)
    return _emit_command([_mc_row("run", trial, R, report, seed, None)], args)


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args, "sweep", ("sigmas", "T", "policy"))
    seed = _resolve_seed(args, cfg)
    R = _resolve_reps(args, cfg, "sweep")
    threads = _resolve_threads(args, cfg)
    s1, s2 = (float(s) for s in cfg["sigmas"])
    policy = _build_policy(cfg, (s1, s2))
    estimator = cfg.get("estimator", "aipw")
    grid = [float(x) for x in cfg.get("grid", DEFAULT_GRID)]
    T = cfg["T"]
    _log(
        f"sweep: {len(grid)} points, T={T} R={R} sigmas=({s1:g},{s2:g}) "
        f"policy={policy_name(policy)} estimator={estimator} seed={seed}"
    )
    result = sweep_worst_case(
        (s1, s2), T, policy, estimator, R=R, seed=seed, grid=grid, threads=threads
    )
    rows = []
    for point in result.points:
        inst = Instance(
            Marginal.gaussian(point.gap, s1 * s1), Marginal.gaussian(0.0, s2 * s2)
        )
        trial = TrialConfig(inst, T, policy, estimator, seed)
        rows.append(_mc_row("sweep", trial, R, point.report, seed, point.x))
    return _emit_command(rows, args)


def _cmd_consistency(args: argparse.Namespace) -> int:
    cfg = _load_config(args, "consistency", ("instance", "budgets", "policy"))
    seed = _resolve_seed(args, cfg)
    R = _resolve_reps(args, cfg, "consistency")
    threads = _resolve_threads(args, cfg)
    inst = _build_instance(cfg)
    policy = _build_policy(cfg, (inst.arm1.sd, inst.arm2.sd))
    estimator = cfg.get("estimator", "aipw")
    budgets = cfg["budgets"]
    _log(
        f"consistency: budgets={budgets} R={R} policy={policy_name(policy)} "
        f"estimator={estimator} seed={seed}"
    )
    curve = consistency_curve(
        inst, budgets, policy, estimator, R=R, seed=seed, threads=threads
    )
    rows = []
    for point in curve:
        trial = TrialConfig(inst, point.T, policy, estimator, seed)
        rows.append(_mc_row("consistency", trial, R, point.report, seed, None))
    return _emit_command(rows, args)


def _cmd_bounds(args: argparse.Namespace) -> int:
    cfg = _load_config(args, "bounds", ("sigmas", "T"))
    s1, s2 = (float(s) for s in cfg["sigmas"])
    T = cfg["T"]
    grid = [float(x) for x in cfg.get("grid", DEFAULT_GRID)]
    _log(f"bounds: {len(grid)} points, T={T} sigmas=({s1:g},{s2:g})")
    scale = worst_case_gap(s1, s2, T)
    rows = []
    for x in grid:
        gap = x * scale
        bound = misid_upper_bound(s1, s2, gap, T)
        regret = regret_upper_bound_curve(s1, s2, T, gap)
        rows.append({
            "kind": "bound",
            "T": T,
            "R": None,
            "policy": None,
            "estimator": None,
            "sigma1": s1,
            "sigma2": s2,
            "mu1": None,
            "mu2": None,
            "gap": gap,
            "x": x,
            "misid_prob": bound,
            "misid_se": None,
            "mean_regret": regret,
            "regret_se": None,
            "scaled_regret": math.sqrt(T) * regret,
            "n1_frac": None,
            "seed": None,
        })
    return _emit_command(rows, args)


def _cmd_verify(args: argparse.Namespace) -> int:
    seed = _resolve_seed(args, None)
    threads = _resolve_threads(args, None)
    _log(f"verify: running 9 checks at full scale, seed={seed} (takes minutes)")
    results = run_all(seed, threads)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name} ({res.seconds:.1f} s): {res.detail}")
    failed = [r for r in results if not r.passed]
    total = sum(r.seconds for r in results)
    print(f"verification: {len(results) - len(failed)}/{len(results)} checks passed "
          f"({total:.1f} s total)")
    return EXIT_VERIFY if failed else EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neyman-bai",
        description="Two-armed fixed-budget best-arm identification toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, mc: bool = True) -> None:
        sp.add_argument("--config", metavar="PATH", help="JSON configuration file")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), help="output format (default: csv)")
        if mc:
            sp.add_argument("--seed", type=int, help="master seed (overrides config and env)")
            sp.add_argument("--reps", type=int, help="replication count (overrides config R)")
            sp.add_argument("--threads", type=int, help="worker threads for replication")

    common(sub.add_parser("run", help="one Monte Carlo run on a fixed instance"))
    common(sub.add_parser("sweep", help="scaled regret across the gap grid"))
    common(sub.add_parser("consistency", help="misidentification versus budget"))
    common(sub.add_parser("bounds", help="closed-form bound curve on the gap grid"), mc=False)
    ver = sub.add_parser("verify", help="run the built-in verification suite")
    ver.add_argument("--seed", type=int, help="master seed (overrides env)")
    ver.add_argument("--threads", type=int, help="worker threads for replication")
    return parser


_HANDLERS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "consistency": _cmd_consistency,
    "bounds": _cmd_bounds,
    "verify": _cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
