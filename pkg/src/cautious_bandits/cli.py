"""Command line entry point: ``run``, ``sweep``, ``demo`` and ``report``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .analysis import InsufficientDataError, explicit_bound, fit_scaling_exponent
from .config import ConfigError, ExperimentConfig, load_config
from .demos import limits_of_caution, need_for_caution
from .simulator import GENERATOR, MonteCarloResult, monte_carlo

log = logging.getLogger("cautious_bandits")

SUMMARY_COLUMNS = [
    ("name", "experiment name"),
    ("agent", "agent kind"),
    ("T", "horizon [rounds]"),
    ("reps", "replications"),
    ("base_seed", "Monte Carlo base seed (u64)"),
    ("mean_regret", "mean cumulative regret over reps [reward units]"),
    ("std_regret", "sample std of cumulative regret [reward units]"),
    ("stderr_regret", "standard error of mean_regret [reward units]"),
    ("mean_commits", "mean number of commit rounds"),
    ("mean_certified_bins", "mean number of bins certified negative"),
    ("mean_ood_abstains", "mean abstentions outside the trusted region"),
    ("max_step_regret", "worst single-round regret over all reps [reward units]"),
    ("good_event_rate", "fraction of audited reps where all bin means stayed in their intervals (blank if not audited)"),
]

SWEEP_COLUMNS = [
    ("T", "horizon [rounds]"),
    ("w", "bin side length"),
    ("m", "trusted radius"),
    ("R", "cover radius m + sqrt(n) w"),
    ("reps", "replications"),
    ("mean_regret", "mean cumulative regret [reward units]"),
    ("std_regret", "sample std of cumulative regret [reward units]"),
    ("stderr", "standard error of mean_regret [reward units]"),
    ("bound_total", "explicit regret upper bound, sum of the five terms below"),
    ("lipschitz_term", "2 L v1 R^(n+1) / w^n"),
    ("variance_term", "32 v1 sigma_w^2 R^n ln(2T^4) / (c w^(n+1))"),
    ("margin_term", "(3 L sqrt(n) + 1) w T"),
    ("failure_term", "(1 + L R) / T"),
    ("tail_term", "T * Pr[||x|| >= m]"),
]

REPORT_COLUMNS = [
    ("source", "sweep.csv path relative to the report directory"),
    ("T", "horizon [rounds]"),
    ("mean_regret", "mean cumulative regret [reward units]"),
    ("stderr", "standard error [reward units]"),
    ("bound_total", "explicit regret upper bound"),
    ("slack", "bound_total - (mean_regret + 2 stderr)"),
    ("dominated", "true iff mean_regret + 2 stderr <= bound_total"),
]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, columns, rows: Sequence[dict]):
    with open(path, "w", newline="") as f:
        for name, doc in columns:
            f.write(f"# {name}: {doc}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([c for c, _ in columns])
        for row in rows:
            writer.writerow([fmt(row[c]) for c, _ in columns])


def read_csv(path: Path) -> list[dict]:
    with open(path, newline="") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def payload_rows(path: Path) -> list[str]:
    """Data lines of an output file, without comment headers."""
    return [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]


def write_jsonl(path: Path, records: Sequence[dict]):
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(rec) + "\n")


def write_meta(out: Path, command: str, cfg: ExperimentConfig | None = None):
    meta = {
        "command": command,
        "created": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "generator": GENERATOR,
        "config": cfg.to_dict() if cfg is not None else None,
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")


def _summary_row(cfg: ExperimentConfig, mc: MonteCarloResult) -> dict:
    return {
        "name": cfg.name,
        "agent": cfg.agent.kind,
        "T": mc.T,
        "reps": mc.reps,
        "base_seed": mc.base_seed,
        "mean_regret": mc.mean,
        "std_regret": mc.std,
        "stderr_regret": mc.stderr,
        "mean_commits": mc.column_mean("commits"),
        "mean_certified_bins": mc.column_mean("certified_bins"),
        "mean_ood_abstains": mc.column_mean("ood_abstains"),
        "max_step_regret": max(r.max_step_regret for r in mc.runs),
        "good_event_rate": mc.good_event_rate,
    }


def _run_records(cfg: ExperimentConfig, mc: MonteCarloResult) -> list[dict]:
    return [{"name": cfg.name, **r.summary()} for r in mc.runs]


def _monte_carlo(cfg: ExperimentConfig, T: int, workers: int, runner: Callable = monte_carlo) -> MonteCarloResult:
    trace = cfg.trace if cfg.trace != "full" else "auto"
    return runner(
        cfg.env, cfg.agent, T, cfg.reps, cfg.base_seed,
        workers=workers, audit=cfg.audit, trace=trace,
    )


def cmd_run(cfg: ExperimentConfig, out: Path, workers: int = 1) -> int:
    if isinstance(cfg.T, list):
        log.error("%s: T is a list; use the sweep command", cfg.source or cfg.name)
        return 2
    mc = _monte_carlo(cfg, cfg.T, workers)
    out.mkdir(parents=True, exist_ok=True)
    write_jsonl(out / "runs.jsonl", _run_records(cfg, mc))
    write_csv(out / "summary.csv", SUMMARY_COLUMNS, [_summary_row(cfg, mc)])
    write_meta(out, "run", cfg)
    print(f"{cfg.name}: T={mc.T} reps={mc.reps} mean_regret={mc.mean:.6g} stderr={mc.stderr:.3g}")
    return 0


def sweep_row(cfg: ExperimentConfig, mc: MonteCarloResult) -> dict:
    acfg = cfg.agent.agent_config(cfg.env, mc.T)
    bound = explicit_bound(acfg, cfg.env.inputs)
    return {
        "T": mc.T,
        "w": acfg.w,
        "m": acfg.m,
        "R": acfg.R,
        "reps": mc.reps,
        "mean_regret": mc.mean,
        "std_regret": mc.std,
        "stderr": mc.stderr,
        **bound.as_dict(),
    }


def cmd_sweep(cfg: ExperimentConfig, out: Path, workers: int = 1, runner: Callable = monte_carlo) -> int:
    horizons = cfg.horizons
    if len(horizons) < 3:
        log.error("%s: sweep needs at least 3 horizons, got %d", cfg.source or cfg.name, len(horizons))
        return 2
    rows, records = [], []
    for T in horizons:
        mc = _monte_carlo(cfg, T, workers, runner)
        rows.append(sweep_row(cfg, mc))
        records.extend(_run_records(cfg, mc))
        log.info("T=%d mean_regret=%.6g", T, mc.mean)
    try:
        fit = fit_scaling_exponent([(r["T"], r["mean_regret"]) for r in rows]).to_dict()
    except InsufficientDataError as exc:
        log.warning("no scaling fit: %s", exc)
        fit = None
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    (out / "fit.json").write_text(json.dumps(fit, indent=2) + "\n")
    write_jsonl(out / "runs.jsonl", records)
    write_meta(out, "sweep", cfg)
    if fit is not None:
        print(f"{cfg.name}: slope={fit['slope']:.4f} r2={fit['r_squared']:.4f}")
    return 0


def cmd_demo(which: str, out: Path, seed: int = 0) -> int:
    out.mkdir(parents=True, exist_ok=True)
    if which == "need_for_caution":
        res = need_for_caution(seed)
        rows = [{"reps": n, "running_mean": v} for n, v in zip(res.checkpoints, res.running_means)]
        write_csv(
            out / "need_for_caution.csv",
            [("reps", "replications averaged"), ("running_mean", "Monte Carlo mean of first-round regret")],
            rows,
        )
        means = " ".join(f"N={n}:{v:.4g}" for n, v in zip(res.checkpoints, res.running_means))
        print(f"need_for_caution: {res.verdict} ({means})")
    elif which == "limits_of_caution":
        res = limits_of_caution(seed)
        rows = [
            {"reward": "r_minus", "T": res.T, "regret": res.regret_minus, "commits": res.commits_minus},
            {"reward": "r_plus", "T": res.T, "regret": res.regret_plus, "commits": res.commits_plus},
        ]
        write_csv(
            out / "limits_of_caution.csv",
            [("reward", "r_minus = 1 - L||x||, r_plus = 1"), ("T", "horizon"),
             ("regret", "cumulative regret"), ("commits", "commit rounds")],
            rows,
        )
        print(
            f"limits_of_caution: {res.verdict} (T={res.T} regret r-={res.regret_minus:g} "
            f"r+={res.regret_plus:g} commits={res.commits_minus + res.commits_plus})"
        )
    else:
        log.error("unknown demo %r", which)
        return 2
    write_meta(out, f"demo {which}")
    return 0


def build_report(root: Path) -> tuple[list[dict], list[str]]:
    """Merge every ``sweep.csv`` under ``root``; returns rows and per-file problems."""
    rows, problems = [], []
    for fit in sorted(root.rglob("fit.json")):
        if not (fit.parent / "sweep.csv").exists():
            problems.append(f"{fit.parent.relative_to(root)}: missing sweep.csv")
    for path in sorted(root.rglob("sweep.csv")):
        rel = str(path.relative_to(root))
        try:
            for r in read_csv(path):
                mean, se, bound = float(r["mean_regret"]), float(r["stderr"]), float(r["bound_total"])
                rows.append({
                    "source": rel,
                    "T": int(r["T"]),
                    "mean_regret": mean,
                    "stderr": se,
                    "bound_total": bound,
                    "slack": bound - (mean + 2 * se),
                    "dominated": mean + 2 * se <= bound,
                })
        except (KeyError, ValueError, TypeError, csv.Error, OSError) as exc:
            problems.append(f"{rel}: unreadable ({exc.__class__.__name__}: {exc})")
    return rows, problems


def cmd_report(root: Path) -> int:
    if not root.is_dir():
        log.error("%s is not a directory", root)
        return 2
    rows, problems = build_report(root)
    for p in problems:
        log.warning(p)
    if not rows:
        log.warning("no sweep results found under %s", root)
    write_csv(root / "report.csv", REPORT_COLUMNS, rows)
    print(f"{'source':<32} {'T':>8} {'empirical':>12} {'bound':>14} {'slack':>14}  ok")
    for r in rows:
        flag = "yes" if r["dominated"] else "NO"
        print(f"{r['source']:<32} {r['T']:>8d} {r['mean_regret']:>12.4f} {r['bound_total']:>14.4g} {r['slack']:>14.4g}  {flag}")
    return 0


def _load(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    if args.reps is not None:
        cfg = replace(cfg, reps=args.reps)
    if args.audit:
        cfg = replace(cfg, audit=True)
    return cfg


def _u64(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cautious-bandits", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", required=True, help="experiment YAML file")
            sp.add_argument("--reps", type=int)
            sp.add_argument("--audit", action="store_true", help="audit the good event on every rep")
        sp.add_argument("--seed", type=_u64)
        sp.add_argument("--out", help="output directory (default: config 'outputs')")
        sp.add_argument("--workers", type=int, default=None)

    common(sub.add_parser("run", help="one Monte Carlo experiment"))
    common(sub.add_parser("sweep", help="Monte Carlo over a list of horizons"))
    d = sub.add_parser("demo", help="impossibility demonstrations")
    d.add_argument("which", choices=["need_for_caution", "limits_of_caution"])
    common(d, config=False)
    r = sub.add_parser("report", help="merge sweep outputs and check bound dominance")
    r.add_argument("dir", nargs="?", default=None)
    r.add_argument("--out", help="alias for the directory argument")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        if args.command in ("run", "sweep"):
            cfg = _load(args)
            out = Path(args.out or cfg.outputs)
            workers = args.workers if args.workers is not None else cfg.workers
            if args.command == "run":
                return cmd_run(cfg, out, workers)
            return cmd_sweep(cfg, out, workers)
        if args.command == "demo":
            out = Path(args.out or f"out/demo_{args.which}")
            return cmd_demo(args.which, out, seed=args.seed if args.seed is not None else 0)
        root = args.dir or args.out
        if root is None:
            log.error("report needs a directory")
            return 2
        return cmd_report(Path(root))
    except ConfigError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
