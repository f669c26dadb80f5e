"""Command-line interface: single runs, batches, sweeps and field dumps.

Exit status is 0 on success, 1 on a configuration or usage error and 2
when a simulation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .agent import agents_from_snapshot, snapshot
from .analysis import aggregate_runs, read_reference
from .config import ConfigError, load_config
from .outputs import field_rows, write_csv, write_json, write_run
from .society import RunRecord, Society

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 1, 2
SWEEPABLE = {"sigma": float, "n_agents": int, "neurons_per_map": int, "steps": int}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _run_config(config_dict):
    """Worker: one simulation, returned as a plain dict so it pickles cheaply."""
    from .society import SimulationConfig

    try:
        record = Society(SimulationConfig(**config_dict)).run()
        return config_dict["seed"], record.to_dict(), None
    except Exception:
        return config_dict["seed"], None, traceback.format_exc()


def run_batch(configs, parallel=1):
    """Run configs, possibly in parallel, and return results ordered by seed."""
    dicts = [c.to_dict() for c in configs]
    if parallel <= 1 or len(dicts) == 1:
        results = [_run_config(d) for d in dicts]
    else:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_run_config, dicts))
    results.sort(key=lambda r: r[0])
    records, failures = [], {}
    for seed, payload, error in results:
        if error is None:
            records.append(RunRecord.from_dict(payload))
        else:
            failures[seed] = error
    return records, failures


def _write_report(report, out, config_hash, failures):
    payload = report.to_dict()
    payload["failed_seeds"] = {str(k): v for k, v in sorted(failures.items())}
    write_json(out / "report.json", payload, config_hash)
    rows = [(kind, key, repr(obs), ref if ref == "" else repr(ref)) for kind, key, obs, ref in report.csv_rows()]
    write_csv(out / "report.csv", ["kind", "key", "observed", "reference"], rows, config_hash)


def cmd_run(args):
    config = load_config(args.config)
    society = Society(config)
    record = society.run()
    out = write_run(record, args.out)
    h = record.to_dict()["config_hash"]
    if args.snapshot:
        write_json(out / "snapshot.json", {"config": config.to_dict(), **snapshot(society.agents)}, h)
    if args.field_agent is not None:
        agent = _find_agent({str(a.id): a for a in society.agents}, args.field_agent)
        points, images = agent.perceptual_map.attractor_field(config.grid_resolution)
        write_csv(out / "field.csv", ["x0", "x1", "y0", "y1"], field_rows(points, images), h)
    print(f"run seed={config.seed}: {record.cluster_count} attractors, "
          f"entropy {record.entropy.initial:.3f} -> {record.entropy.final:.3f} bits, "
          f"plateau {record.plateau_step}; wrote {out}")
    return EXIT_OK


def cmd_batch(args):
    base = load_config(args.config)
    if args.runs < 1:
        raise ConfigError("--runs must be >= 1")
    seed_base = base.seed if args.seed_base is None else args.seed_base
    try:
        reference = read_reference(args.reference) if args.reference else None
        configs = [base.replace(seed=seed_base + i) for i in range(args.runs)]
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    records, failures = run_batch(configs, args.parallel)
    out = Path(args.out)
    for record in records:
        write_run(record, out / f"run_{record.seed}", include_wall_clock=True)
    for seed, error in failures.items():
        print(f"run seed={seed} failed:\n{error}", file=sys.stderr)
    if records:
        report = aggregate_runs(records, reference)
        _write_report(report, out, base.replace(seed=seed_base).hash(), failures)
        print(f"batch: {len(records)} runs, size histogram "
              f"{dict(sorted(report.size_histogram.items()))}, mode {report.mode_size}; wrote {out}")
    return EXIT_FAILURE if failures else EXIT_OK


def _summary_row(value, records):
    counts = np.array([r.cluster_count for r in records])
    ratio = np.array([r.entropy.final / r.entropy.initial for r in records])
    plateau = np.mean([r.plateau_step is not None for r in records])
    return {
        "value": value,
        "runs": len(records),
        "mean_clusters": float(counts.mean()),
        "min_clusters": int(counts.min()),
        "max_clusters": int(counts.max()),
        "plateau_rate": float(plateau),
        "mean_entropy_ratio": float(ratio.mean()),
    }


def cmd_sweep(args):
    base = load_config(args.config)
    if args.param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {args.param!r}; choose one of {sorted(SWEEPABLE)}")
    try:
        values = [SWEEPABLE[args.param](v) for v in args.values.split(",")]
    except ValueError:
        raise ConfigError(f"bad --values for {args.param}: {args.values!r}") from None
    if args.runs_per_value < 1:
        raise ConfigError("--runs-per-value must be >= 1")
    seed_base = base.seed if args.seed_base is None else args.seed_base
    out = Path(args.out)
    rows, failed = [], False
    for value in values:
        try:
            configs = [base.replace(**{args.param: value, "seed": seed_base + i})
                       for i in range(args.runs_per_value)]
        except ValueError as exc:
            raise ConfigError(f"{args.param}={value}: {exc}") from None
        records, failures = run_batch(configs, args.parallel)
        for record in records:
            write_run(record, out / f"{args.param}_{value}" / f"run_{record.seed}")
        for seed, error in failures.items():
            print(f"{args.param}={value} seed={seed} failed:\n{error}", file=sys.stderr)
        failed |= bool(failures)
        if records:
            rows.append(_summary_row(value, records))
    h = base.replace(seed=seed_base).hash()
    header = list(rows[0]) if rows else ["value"]
    write_csv(out / "summary.csv", header, [[r[k] for k in header] for r in rows], h)
    write_json(out / "summary.json", {"parameter": args.param, "rows": rows}, h)
    for r in rows:
        print(f"{args.param}={r['value']}: mean {r['mean_clusters']:.2f} clusters "
              f"[{r['min_clusters']}, {r['max_clusters']}], plateau rate {r['plateau_rate']:.2f}")
    return EXIT_FAILURE if failed else EXIT_OK


def _find_agent(agents, agent_id):
    key = str(agent_id)
    if key not in agents:
        raise ConfigError(f"unknown agent id {agent_id!r}; snapshot has {len(agents)} agents")
    return agents[key]


def cmd_field(args):
    try:
        data = json.loads(Path(args.snapshot).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{args.snapshot}: cannot read snapshot: {exc}") from None
    agent = _find_agent(agents_from_snapshot(data), args.agent)
    grid = args.grid or data.get("config", {}).get("grid_resolution", 25)
    points, images = agent.perceptual_map.attractor_field(grid)
    write_csv(args.out, ["x0", "x1", "y0", "y1"], field_rows(points, images), data.get("config_hash", "none"))
    print(f"wrote {len(points)} field rows to {args.out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="vocalcodes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snapshot", action="store_true", help="also write snapshot.json with full agent state")
    p.add_argument("--field-agent", help="also write field.csv for this agent's perceptual map")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", help="independent runs over consecutive seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--runs", type=int, required=True)
    p.add_argument("--seed-base", type=int, help="first seed (default: the config's seed)")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--reference", help="CSV of signature,frequency to compare structures against")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("sweep", help="batches over values of one parameter")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--runs-per-value", type=int, required=True)
    p.add_argument("--seed-base", type=int)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("field", help="dump one agent's attractor field from a snapshot")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--agent", required=True)
    p.add_argument("--grid", type=int, help="grid points per dimension (default: the run's setting)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_field)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception:
        traceback.print_exc()
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
