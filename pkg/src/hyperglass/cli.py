"""Command-line entry point: experiment runs, ledger export, instance
generation, one-off solves, and report rendering.

The ledger is append-only JSONL (one self-contained record per line);
exports are flat CSV with a fixed column order and 17-significant-digit
floats so replay comparisons can be exact.  `report` renders the usual
diagnostic figures (PNG) next to the CSV it writes.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from ._version import __version__
from .ensembles import (gen_configuration_regular, gen_er_hypergraph,
                        gen_poisson_cloning, gen_sbm, read_hypergraph_text,
                        read_sbm_text, write_hypergraph_text, write_sbm_text)
from .experiments import EXPERIMENT_PARAMS, run_cell
from .objectives import (WeightTensor, cut_kernel, gen_xorsat_instance,
                         read_xorsat_text, write_xorsat_text, xor_kernel,
                         xorsat_satisfied)
from .rng import spawn_seeds, stream
from .solvers import AnnealSchedule, anneal_max, exact_max

CSV_HEADER = ["experiment", "cell", "timestamp", "seed", "n", "p", "q", "d",
              "beta", "xi", "replicas", "metric", "value", "sem"]

_CONTROL_KEYS = {"experiment", "seed", "threads", "out"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Declarative run description: experiment, seed, and a parameter grid.

    Any key that is not a control key is a grid parameter; list values
    expand to the cartesian product.  Unknown parameter names for the
    chosen experiment are rejected up front.
    """

    experiment: str
    grid: dict
    seed: int = 1
    threads: int | None = None
    out: str | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        if "experiment" not in raw:
            raise ConfigError("config needs an 'experiment' key")
        experiment = raw["experiment"]
        if experiment not in EXPERIMENT_PARAMS:
            raise ConfigError(f"unknown experiment {experiment!r}; "
                              f"known: {sorted(EXPERIMENT_PARAMS)}")
        grid = {k: v for k, v in raw.items() if k not in _CONTROL_KEYS}
        bad = set(grid) - EXPERIMENT_PARAMS[experiment]
        if bad:
            raise ConfigError(f"unknown parameter(s) for {experiment}: {sorted(bad)}; "
                              f"allowed: {sorted(EXPERIMENT_PARAMS[experiment])}")
        threads = raw.get("threads")
        return cls(experiment=experiment, grid=grid,
                   seed=int(raw.get("seed", 1)),
                   threads=None if threads is None else int(threads),
                   out=raw.get("out"))

    def to_dict(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed}
        if self.threads is not None:
            out["threads"] = self.threads
        if self.out is not None:
            out["out"] = self.out
        out.update(self.grid)
        return out

    def cells(self) -> list[dict]:
        """Cartesian expansion of list-valued parameters, in stable order."""
        fixed = {k: v for k, v in self.grid.items() if not isinstance(v, list)}
        varying = sorted((k, v) for k, v in self.grid.items() if isinstance(v, list))
        if not varying:
            return [dict(fixed)]
        names = [k for k, _ in varying]
        out = []
        for combo in itertools.product(*(v for _, v in varying)):
            cell = dict(fixed)
            cell.update(zip(names, combo))
            out.append(cell)
        return out


def _thread_count(cli_value: int | None, config_value: int | None) -> int:
    if cli_value is not None:
        return max(1, cli_value)
    if config_value is not None:
        return max(1, config_value)
    env = os.environ.get("HYPERGLASS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HYPERGLASS_THREADS must be an integer, got {env!r}")
    return 1


# ----------------------------------------------------------------------------
# ledger and CSV


def append_ledger(path: str, rows: list[dict]):
    with open(path, "a", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_ledger(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def export_csv(rows: list[dict], out, experiment: str | None = None) -> int:
    """Write the long-format CSV (one line per metric); returns row count."""
    out.write(",".join(CSV_HEADER) + "\n")
    count = 0
    for row in rows:
        if "estimates" not in row:
            continue  # error rows carry no metrics
        if experiment and row.get("experiment") != experiment:
            continue
        params = row.get("params", {})
        base = [row.get("experiment", ""), str(row.get("cell", "")),
                row.get("timestamp", ""), str(row.get("seed", ""))]
        pcols = [_fmt(params.get(k, "")) for k in
                 ("n", "p", "q", "d", "beta", "xi", "replicas")]
        for metric in sorted(row["estimates"]):
            est = row["estimates"][metric]
            value = est.get("value")
            sem = est.get("sem")
            out.write(",".join(
                base + pcols
                + [metric,
                   _fmt(float(value)) if value is not None else "",
                   _fmt(float(sem)) if sem is not None else ""]) + "\n")
            count += 1
    return count


# ----------------------------------------------------------------------------
# subcommands


def _cmd_run(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    config = RunConfig.from_dict(raw)
    if args.seed is not None:
        config.seed = args.seed
    ledger_path = args.out or config.out or "hyperglass_runs.jsonl"
    threads = _thread_count(args.threads, config.threads)

    cells = config.cells()
    seeds = spawn_seeds(stream(config.seed, 0xCE11), len(cells))
    if len(set(int(s) for s in seeds)) != len(cells):
        raise ConfigError("derived cell seeds collided; choose another seed")

    def work(item):
        idx, params = item
        try:
            rec = run_cell(config.experiment, params, int(seeds[idx]), cell=idx)
            return idx, rec.to_dict(), None
        except Exception as exc:  # per-cell failures must not abort the run
            return idx, {"experiment": config.experiment, "cell": idx,
                         "params": params, "seed": int(seeds[idx]),
                         "error": f"{type(exc).__name__}: {exc}"}, exc

    results = []
    if threads == 1:
        results = [work(item) for item in enumerate(cells)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, enumerate(cells)))

    results.sort(key=lambda t: t[0])
    append_ledger(ledger_path, [row for _, row, _ in results])
    failures = 0
    for idx, row, exc in results:
        if exc is None:
            keys = ", ".join(f"{k}={row['params'][k]}" for k in sorted(row["params"]))
            print(f"cell {idx} ok ({keys}) {row['wall_time_s']:.2f}s")
        else:
            failures += 1
            print(f"cell {idx} FAILED: {row['error']}", file=sys.stderr)
    print(f"{len(cells) - failures}/{len(cells)} cells completed; "
          f"ledger: {ledger_path}")
    return 0 if failures == 0 else 1


def _cmd_export(args) -> int:
    rows = read_ledger(args.ledger)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            n = export_csv(rows, fh, experiment=args.experiment)
        print(f"wrote {n} rows to {args.out}")
    else:
        export_csv(rows, sys.stdout, experiment=args.experiment)
    return 0


def _cmd_gen_instance(args) -> int:
    rng = stream(args.seed)
    kind = args.kind
    if kind == "er":
        g = gen_er_hypergraph(args.n, args.p, args.d, rng)
        write_hypergraph_text(g, args.out)
    elif kind == "regular":
        g = gen_configuration_regular(args.n, args.p, int(args.d), rng)
        write_hypergraph_text(g, args.out)
    elif kind == "poisson":
        g = gen_poisson_cloning(args.n, args.p, args.d, rng)
        write_hypergraph_text(g, args.out)
    elif kind == "sbm":
        a = args.d + args.xi * math.sqrt(args.d)
        b = args.d - args.xi * math.sqrt(args.d)
        if b < 0:
            raise ConfigError(f"d={args.d}, xi={args.xi} gives a negative rate")
        g = gen_sbm(args.n, a, b, rng)
        write_sbm_text(g, args.out)
    elif kind == "xorsat":
        inst = gen_xorsat_instance(args.n, args.p, args.d, rng)
        write_xorsat_text(inst, args.out)
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    print(f"wrote {kind} instance to {args.out}")
    return 0


def _detect_format(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        second = fh.readline().split()
    if len(header) == 3:
        return "xorsat"
    if second and any(tok in ("+1", "-1") for tok in second):
        # a signed label line directly after the header marks the planted format
        return "sbm"
    return "hypergraph"


def _cmd_solve(args) -> int:
    fmt = args.format
    if fmt == "auto":
        fmt = _detect_format(args.instance)
    schedule = AnnealSchedule(sweeps=args.sweeps, restarts=args.restarts)
    rng = stream(args.seed)
    out: dict = {"instance": args.instance, "format": fmt}
    if fmt == "xorsat":
        inst = read_xorsat_text(args.instance)
        w = WeightTensor.from_xorsat(inst)
        kern = xor_kernel(inst.p)
        if args.solver == "exact" or (args.solver == "auto" and 2 ** inst.n <= args.budget):
            res = exact_max(w, kern, budget=args.budget)
        else:
            res = anneal_max(w, kern, schedule=schedule, rng=rng)
        spins = 1 - 2 * res.config
        out.update(value=res.value, method=res.method,
                   satisfied=int(xorsat_satisfied(inst, spins)), m=inst.m,
                   config="".join(str(int(c)) for c in res.config))
    else:
        if fmt == "sbm":
            g = read_sbm_text(args.instance).as_hypergraph()
        else:
            g = read_hypergraph_text(args.instance)
        w = WeightTensor.from_hypergraph(g)
        kern = cut_kernel(args.q)
        if args.solver == "exact" or (args.solver == "auto" and args.q ** g.n <= args.budget):
            res = exact_max(w, kern, budget=args.budget)
        else:
            res = anneal_max(w, kern, schedule=schedule, rng=rng)
        out.update(value=res.value, method=res.method, m=g.m,
                   cut_edges=res.value / g.p,
                   config="".join(str(int(c)) for c in res.config))
    json.dump(out, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _plot_rows(records: list[dict], experiment: str, outdir: str) -> str | None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = [r for r in records
            if r.get("experiment") == experiment and "estimates" in r]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    path = os.path.join(outdir, f"report_{experiment}.png")

    def series(metric, xkey):
        pts = [(float(r["params"][xkey]), r["estimates"][metric]["value"],
                r["estimates"][metric].get("sem") or 0.0)
               for r in rows if xkey in r.get("params", {})
               and metric in r["estimates"]]
        pts.sort()
        return ([p[0] for p in pts], [p[1] for p in pts], [p[2] for p in pts])

    if experiment == "interpolation_gap":
        x, y, e = series("gap_over_beta", "d")
        ax.errorbar(x, y, yerr=e, marker="o")
        ax.set_xscale("log")
        if all(v > 0 for v in y):
            ax.set_yscale("log")
        ax.set_xlabel("d")
        ax.set_ylabel("|phi1 - phi2| / beta")
    elif experiment == "concentration_scan":
        x, y, _ = series("var", "n")
        ax.loglog(x, y, marker="o")
        ax.set_xlabel("n")
        ax.set_ylabel("var of value density")
    elif experiment == "sqrt_d_coefficient":
        x, y, e = series("coefficient", "d")
        ax.errorbar(x, y, yerr=e, marker="o")
        ax.set_xscale("log")
        ax.set_xlabel("d")
        ax.set_ylabel("(value/n - leading)/scale")
    elif experiment == "er_vs_regular":
        x, y, e = series("diff_over_sqrt_d", "d")
        ax.errorbar(x, y, yerr=e, marker="o")
        ax.set_xscale("log")
        ax.set_xlabel("d")
        ax.set_ylabel("|V_er - V_reg| / sqrt(d)")
    else:
        metrics = sorted({m for r in rows for m in r["estimates"]})
        for m in metrics:
            vals = [r["estimates"][m]["value"] for r in rows]
            ax.plot(range(len(vals)), vals, marker="o", label=m)
        ax.legend(fontsize=7)
        ax.set_xlabel("cell")
        ax.set_ylabel("value")
    ax.set_title(experiment)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _cmd_report(args) -> int:
    rows = read_ledger(args.ledger)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "report.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        n = export_csv(rows, fh, experiment=args.experiment)
    experiments = sorted({r.get("experiment") for r in rows
                          if "estimates" in r and r.get("experiment")})
    if args.experiment:
        experiments = [e for e in experiments if e == args.experiment]
    made = []
    for exp in experiments:
        path = _plot_rows(rows, exp, args.out)
        if path:
            made.append(path)
    print(f"wrote {n} csv rows to {csv_path}")
    for path in made:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyperglass",
        description="Sparse hypergraph optimization experiments: generators, "
                    "solvers, and Gaussian surrogate comparisons.")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment grid from a JSON config")
    p_run.add_argument("--config", required=True, help="JSON config path")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--threads", type=int, default=None,
                       help="worker threads (fallback: HYPERGLASS_THREADS, then 1)")
    p_run.add_argument("--out", default=None, help="ledger path (JSONL, appended)")
    p_run.set_defaults(func=_cmd_run)

    p_exp = sub.add_parser("export", help="export ledger rows as CSV")
    p_exp.add_argument("--ledger", required=True)
    p_exp.add_argument("--experiment", default=None, help="filter by experiment name")
    p_exp.add_argument("--out", default=None, help="CSV path (default stdout)")
    p_exp.set_defaults(func=_cmd_export)

    p_gen = sub.add_parser("gen-instance", help="write a random instance file")
    p_gen.add_argument("--kind", required=True,
                       choices=["er", "regular", "poisson", "sbm", "xorsat"])
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--p", type=int, default=2)
    p_gen.add_argument("--d", type=float, required=True)
    p_gen.add_argument("--xi", type=float, default=1.0, help="SBM signal-to-noise")
    p_gen.add_argument("--seed", type=int, default=1)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_gen_instance)

    p_sol = sub.add_parser("solve", help="solve one instance file")
    p_sol.add_argument("--instance", required=True)
    p_sol.add_argument("--format", default="auto",
                       choices=["auto", "hypergraph", "sbm", "xorsat"])
    p_sol.add_argument("--q", type=int, default=2, help="labels for cut objectives")
    p_sol.add_argument("--solver", default="auto", choices=["auto", "exact", "anneal"])
    p_sol.add_argument("--budget", type=int, default=1 << 22)
    p_sol.add_argument("--sweeps", type=int, default=20000)
    p_sol.add_argument("--restarts", type=int, default=8)
    p_sol.add_argument("--seed", type=int, default=1)
    p_sol.set_defaults(func=_cmd_solve)

    p_ver = sub.add_parser("version", help="print the package version")
    p_ver.set_defaults(func=lambda args: (print(__version__), 0)[1])

    p_rep = sub.add_parser("report", help="render figures + CSV from a ledger")
    p_rep.add_argument("--ledger", required=True)
    p_rep.add_argument("--experiment", default=None)
    p_rep.add_argument("--out", required=True, help="output directory")
    p_rep.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
