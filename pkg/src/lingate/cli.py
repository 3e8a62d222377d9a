"""Command line driver: batch optimisation, single-unitary evaluation, reports.

    lingate optimize --config exp.json
    lingate evaluate --gate ns --unitary U.json
    lingate report --in results.csv --out report.svg

Exit codes: 0 success, 1 usage error, 2 I/O error.  The number of worker
processes for ``optimize`` comes from ``--workers`` or ``LINGATE_WORKERS``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from lingate.fock import project_transformation
from lingate.gates import KNOWN_MAXIMA, GateSpec, load_gate
from lingate.metrics import fidelity, norm_bounds, success_probability
from lingate.optimizer import GAConfig, RunRecord, Schedule, run_ga
from lingate.unitary import exp_map, save_unitary, standard_generators, unitarity_deviation, unitary_from_json

log = logging.getLogger("lingate")

WORKERS_ENV = "LINGATE_WORKERS"
CSV_COLUMNS = ["run_id", "gate", "schedule", "seed", "generations", "best_F", "best_S"]
DEFAULT_SCHEDULES = ["inv_sqrt", "arctan", "constant:1e-5", "none"]
UNITARITY_TOL = 1e-8
# a run counts as reaching the known maximum within this margin
AT_MAX_MARGIN = 1e-3
AT_MAX_FIDELITY = 0.999


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    gate: str
    schedules: list[str] = field(default_factory=lambda: list(DEFAULT_SCHEDULES))
    runs_per_schedule: int = 50
    ga: dict = field(default_factory=dict)
    master_seed: int = 0
    output_dir: str = "results"

    @classmethod
    def from_json(cls, data: dict, base_dir: Path | None = None) -> ExperimentConfig:
        if not isinstance(data, dict) or "gate" not in data:
            raise UsageError("experiment config must be an object with a 'gate' entry")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.runs_per_schedule < 1:
            raise UsageError("runs_per_schedule must be >= 1")
        ga_known = {f.name for f in fields(GAConfig)} - {"seed"}
        bad = set(cfg.ga) - ga_known
        if bad:
            raise UsageError(f"unknown GA settings: {sorted(bad)}")
        if base_dir is not None:
            gate_path = base_dir / cfg.gate
            if cfg.gate.lower() not in KNOWN_MAXIMA and gate_path.exists():
                cfg.gate = str(gate_path)
            if not Path(cfg.output_dir).is_absolute():
                cfg.output_dir = str(base_dir / cfg.output_dir)
        return cfg


@dataclass(frozen=True)
class RunTask:
    run_id: int
    gate: GateSpec
    schedule: Schedule
    config: GAConfig


def _execute(task: RunTask) -> RunRecord:
    return run_ga(task.gate, task.config, task.schedule)


def plan_runs(cfg: ExperimentConfig, gate: GateSpec) -> list[RunTask]:
    """Runs in id order; run ``i`` of every schedule uses seed ``master_seed + i``."""
    tasks = []
    run_id = 0
    for text in cfg.schedules:
        schedule = Schedule.parse(text)
        for i in range(cfg.runs_per_schedule):
            config = GAConfig.for_gate(gate.name, seed=cfg.master_seed + i, **cfg.ga)
            tasks.append(RunTask(run_id, gate, schedule, config))
            run_id += 1
    return tasks


def _worker_count(explicit: int | None) -> int:
    if explicit is not None:
        return max(1, explicit)
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def _format(value: float) -> str:
    return repr(float(value))


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> list[RunRecord]:
    try:
        gate = load_gate(cfg.gate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        tasks = plan_runs(cfg, gate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(cfg.output_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)

    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            records = list(pool.map(_execute, tasks))
    else:
        records = []
        for task in tasks:
            records.append(_execute(task))
            log.info("run %d/%d done", task.run_id + 1, len(tasks))

    with open(out / "results.csv", "w", newline="") as fh:
        fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for task, rec in zip(tasks, records):
            writer.writerow([
                task.run_id, rec.gate, rec.schedule.label, task.config.seed,
                task.config.generations, _format(rec.best_F), _format(rec.best_S),
            ])
    for task, rec in zip(tasks, records):
        payload = {"run_id": task.run_id, "seed": task.config.seed, **rec.to_dict()}
        (out / "runs" / f"run_{task.run_id:04d}.json").write_text(json.dumps(payload) + "\n")

    best = pick_best(records)
    basis = standard_generators(gate.n_modes)
    save_unitary(out / "best_unitary.json", exp_map(best.best_x, gate.u0, basis))
    return records


def pick_best(records: list[RunRecord]) -> RunRecord:
    """Highest success among runs at fidelity >= 0.999, else highest fidelity."""
    faithful = [r for r in records if r.best_F >= AT_MAX_FIDELITY]
    if faithful:
        return max(faithful, key=lambda r: r.best_S)
    return max(records, key=lambda r: r.best_F)


def evaluate_unitary(gate: GateSpec, u: np.ndarray) -> dict:
    if u.shape != (gate.n_modes, gate.n_modes):
        raise UsageError(f"unitary is {u.shape[0]}x{u.shape[1]} but gate {gate.name} needs {gate.n_modes} modes")
    deviation = unitarity_deviation(u)
    if deviation > UNITARITY_TOL:
        raise UsageError(f"matrix is not unitary: max |U^dag U - I| = {deviation:.3e}")
    a = project_transformation(u, gate)
    lo, hi = norm_bounds(a)
    return {
        "fidelity": fidelity(a, gate.target),
        "success": success_probability(a),
        "norm_min": lo,
        "norm_max": hi,
    }


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.DictReader(lines))
    if not rows:
        raise UsageError(f"{path}: no result rows")
    missing = set(CSV_COLUMNS) - set(rows[0])
    if missing:
        raise UsageError(f"{path}: missing columns {sorted(missing)}")
    try:
        for row in rows:
            row["best_F"] = float(row["best_F"])
            row["best_S"] = float(row["best_S"])
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: malformed value ({exc})") from exc
    return rows


def summarize(rows: list[dict]) -> list[dict]:
    gate = rows[0]["gate"]
    ref = KNOWN_MAXIMA.get(gate)
    by_schedule: dict[str, list[dict]] = {}
    for row in rows:
        by_schedule.setdefault(row["schedule"], []).append(row)
    summary = []
    for name, group in by_schedule.items():
        s = np.array([r["best_S"] for r in group])
        f = np.array([r["best_F"] for r in group])
        frac = None
        if ref is not None:
            frac = float(np.mean((s >= ref - AT_MAX_MARGIN) & (f >= AT_MAX_FIDELITY)))
        summary.append({
            "schedule": name, "runs": len(group), "min": float(s.min()),
            "median": float(np.median(s)), "max": float(s.max()), "frac_at_max": frac,
            "sorted": np.sort(s),
        })
    return summary


def write_report_svg(rows: list[dict], summary: list[dict], path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "lingate"
    gate = rows[0]["gate"]
    fig, ax = plt.subplots(figsize=(6, 4))
    markers = "^sDo*vx+"
    for k, item in enumerate(summary):
        ranks = np.arange(1, len(item["sorted"]) + 1)
        ax.plot(ranks, item["sorted"], marker=markers[k % len(markers)], ms=4, lw=1, label=item["schedule"])
    ref = KNOWN_MAXIMA.get(gate)
    if ref is not None:
        ax.axhline(ref, color="m", ls=":", label=f"known max {ref:.4f}")
    ax.set_xlabel("run (sorted by success)")
    ax.set_ylabel("success probability")
    ax.set_title(f"{gate}: best success per run")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _print_summary(summary: list[dict]) -> None:
    print(f"{'schedule':<16}{'runs':>6}{'min':>10}{'median':>10}{'max':>10}{'at_max':>8}")
    for item in summary:
        frac = "n/a" if item["frac_at_max"] is None else f"{item['frac_at_max']:.2f}"
        print(
            f"{item['schedule']:<16}{item['runs']:>6}{item['min']:>10.5f}"
            f"{item['median']:>10.5f}{item['max']:>10.5f}{frac:>8}"
        )


def cmd_optimize(args) -> int:
    try:
        config_path = Path(args.config)
        data = json.loads(config_path.read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from exc
    cfg = ExperimentConfig.from_json(data, base_dir=config_path.parent)
    if args.out:
        cfg.output_dir = args.out
    try:
        records = run_experiment(cfg, _worker_count(args.workers))
    except OSError as exc:
        print(f"error: cannot write results: {exc}", file=sys.stderr)
        return 2
    best = pick_best(records)
    print(f"{len(records)} runs written to {cfg.output_dir}; best F={best.best_F:.6f} S={best.best_S:.6f}")
    return 0


def cmd_evaluate(args) -> int:
    try:
        gate = load_gate(args.gate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        text = Path(args.unitary).read_text()
    except OSError as exc:
        print(f"error: cannot read unitary: {exc}", file=sys.stderr)
        return 2
    try:
        u = unitary_from_json(json.loads(text))
    except (json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"bad unitary file: {exc}") from exc
    result = evaluate_unitary(gate, u)
    for key, value in result.items():
        print(f"{key} {value!r}")
    return 0


def cmd_report(args) -> int:
    try:
        rows = read_results(args.input)
    except OSError as exc:
        print(f"error: cannot read results: {exc}", file=sys.stderr)
        return 2
    summary = summarize(rows)
    try:
        write_report_svg(rows, summary, args.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return 2
    _print_summary(summary)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lingate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("optimize", help="run a batch of GA runs from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="override the config's output_dir")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="fidelity and success of a unitary")
    p.add_argument("--gate", required=True, help="ns, cz or a gate description file")
    p.add_argument("--unitary", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="sorted-success plot and summary table")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default="report.svg")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
