"""Experiment cells: interpolation gap, sqrt(d)-coefficient scaling,
ER-vs-regular equivalence, concentration scans, and the schedule
arithmetic, plus the record type that makes every cell replayable.

Each public experiment takes plain parameters and an rng (int seed or
numpy Generator) and returns a dict of estimates with standard errors.
`run_cell` wraps any registered experiment into an ExperimentRecord for
the CLI ledger; `replay_record` re-executes a record and compares.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from scipy import stats as sps

from . import engines
from ._version import __version__
from .ensembles import (PUniformHypergraph, gen_configuration_regular,
                        gen_er_hypergraph, gen_sbm)
from .gaussian import pspin_ground_state
from .objectives import (Kernel, WeightTensor, c1_residual, cut_kernel,
                         gen_xorsat_instance, psi_max_and_hessian, xor_kernel,
                         xorsat_satisfied)
from .rng import as_generator, spawn_seeds, stream
from .solvers import (AnnealSchedule, ConstraintSet, Monomials,
                      _anneal_monomials, exact_max, log_partition)

__all__ = [
    "ExperimentRecord",
    "beta_schedule",
    "schedule_bound",
    "interpolation_gap",
    "sqrt_d_coefficient",
    "er_vs_regular",
    "concentration_scan",
    "cut_extrema_batch",
    "xorsat_max_satisfied",
    "loglog_slope",
    "chi_square_uniform",
    "f_test_variance_decrease",
    "EXPERIMENTS",
    "run_cell",
    "replay_record",
]


# ----------------------------------------------------------------------------
# schedule arithmetic


def beta_schedule(d: float, delta: float) -> float:
    """Inverse temperature d^(1/4 - delta) used in gap-vs-maximum trade-offs."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not (0 < delta < 0.25):
        raise ValueError(f"delta must lie in (0, 1/4), got {delta}")
    return float(d) ** (0.25 - delta)


def schedule_bound(d: float, delta: float, D: float = 1.0, q: int = 2) -> float:
    """Combined error envelope D beta^2 / sqrt(d) + 2 log(q) / beta at the
    scheduled beta; decreasing in d for fixed (D, q)."""
    beta = beta_schedule(d, delta)
    return D * beta ** 2 / math.sqrt(d) + 2.0 * math.log(q) / beta


# ----------------------------------------------------------------------------
# interpolation gap


def interpolation_gap(n: int, p: int, q: int, d: float, beta: float,
                      kernel: Kernel | None = None, replicas: int = 64,
                      rng=None, disorder: str = "poisson", coupled: bool = True,
                      budget: int = 1 << 22) -> dict:
    """Replica-averaged |Phi_1 - Phi_2| / beta between the sparse and
    Gaussian-surrogate log-partitions.

    Phi_1 uses H_1 = (1/sqrt(d)) sum A f with A the random multiplicity
    adjacency; Phi_2 uses H_2 = sum (sqrt(d)/n^{p-1} + J/n^{(p-1)/2}) f
    with J of entry variance 1/(p-1)!.  disorder="poisson" (default)
    draws tuple multiplicities Poisson(d (p-1)!/n^{p-1}), which matches
    the Gaussian side's first two moments at every d; "bernoulli" uses
    0/1 edges whose rate clamps at 1 for d >= n^{p-1}/(p-1)!
    (reported via the "clamped" flag, and the gap need not shrink there).
    Coupled replicas share uniforms through the inverse CDFs on both
    sides, which strips most replica noise from the paired difference.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if d <= 0:
        raise ValueError("d must be > 0")
    if disorder not in ("poisson", "bernoulli"):
        raise ValueError(f"unknown disorder {disorder!r}")
    kernel = kernel or cut_kernel(q)
    if kernel.p != p or kernel.q != q:
        raise ValueError("kernel arity/alphabet must match (p, q)")
    if beta == 0.0:
        # both Phi equal (1/n) log q^n exactly; the gap ratio's limit is 0
        lg = math.log(q)
        return {"phi1_mean": lg, "phi2_mean": lg, "gap_over_beta": 0.0,
                "gap_sem_over_beta": 0.0, "gap_abs_over_beta": 0.0,
                "gap_abs_sem_over_beta": 0.0, "replicas": replicas,
                "disorder": disorder, "clamped": False}
    gen = as_generator(rng)
    keys = np.array(list(itertools.combinations(range(n), p)), dtype=np.int64)
    K = keys.shape[0]
    fact = math.factorial(p - 1)
    lam = d * fact / n ** (p - 1)
    kappa2 = 1.0 / fact
    sqrt_d = math.sqrt(d)
    clamped = disorder == "bernoulli" and lam > 1.0

    phi1 = np.empty(replicas)
    phi2 = np.empty(replicas)
    constraint = ConstraintSet.all()
    for r in range(replicas):
        u = gen.random(K)
        if disorder == "poisson":
            mult = sps.poisson.ppf(u, lam)
        else:
            mult = (u < min(lam, 1.0)).astype(np.float64)
        j_vals = (sps.norm.ppf(u) if coupled else gen.standard_normal(K))
        j_vals = j_vals * math.sqrt(kappa2)
        w1 = WeightTensor(p, n, keys, mult / fact / sqrt_d)
        w2 = WeightTensor(p, n, keys, sqrt_d / n ** (p - 1) + j_vals / n ** ((p - 1) / 2.0))
        phi1[r] = log_partition(w1, kernel, constraint, beta, budget=budget)
        phi2[r] = log_partition(w2, kernel, constraint, beta, budget=budget)

    diffs = phi1 - phi2
    gap = abs(float(diffs.mean())) / beta
    sem = float(diffs.std(ddof=1) / math.sqrt(replicas)) / beta
    # replica average of |Phi1 - Phi2|: the per-replica envelope, stable
    # even when the signed mean sits inside its own noise band
    gap_abs = float(np.abs(diffs).mean()) / beta
    gap_abs_sem = float(np.abs(diffs).std(ddof=1) / math.sqrt(replicas)) / beta
    return {"phi1_mean": float(phi1.mean()), "phi2_mean": float(phi2.mean()),
            "phi1_sem": float(phi1.std(ddof=1) / math.sqrt(replicas)),
            "phi2_sem": float(phi2.std(ddof=1) / math.sqrt(replicas)),
            "gap_over_beta": gap, "gap_sem_over_beta": sem,
            "gap_abs_over_beta": gap_abs, "gap_abs_sem_over_beta": gap_abs_sem,
            "replicas": replicas, "disorder": disorder, "clamped": clamped}


# ----------------------------------------------------------------------------
# cut / xorsat solvers shared by the scaling experiments


def gen_er_poisson_multigraph(n: int, p: int, d: float, rng) -> PUniformHypergraph:
    """Multi-edge ER variant: each sorted p-tuple carries an independent
    Poisson(d (p-1)!/n^{p-1}) multiplicity.

    Contiguous to the Bernoulli ER model when d << n^{p-1}/(p-1)!, but
    stays in the sparse regime for any d: the per-tuple count variance
    equals its mean, so second-order (sqrt(d)) observables keep their
    large-n form at densities where the 0/1 model would saturate (the
    Bernoulli indicator loses a (1 - d/n^{p-1}(p-1)!) variance factor).
    """
    gen = as_generator(rng)
    lam = d * math.factorial(p - 1) / n ** (p - 1)
    keys = list(itertools.combinations(range(n), p))
    mult = gen.poisson(lam, size=len(keys))
    edges = []
    for key, k in zip(keys, mult):
        edges.extend([key] * int(k))
    return PUniformHypergraph(p=p, n=n, edges=edges, multi=True,
                              meta={"kind": "er_poisson", "d": d})


def _cut_instance(n: int, d: float, ensemble: str, gen) -> PUniformHypergraph:
    if ensemble == "poisson":
        return gen_er_poisson_multigraph(n, 2, d, gen)
    if ensemble == "er":
        return gen_er_hypergraph(n, 2, d, gen)
    raise ValueError(f"ensemble must be 'poisson' or 'er', got {ensemble!r}")


def _count_matrix(g: PUniformHypergraph) -> tuple[np.ndarray, float]:
    """Symmetric edge-count matrix (loops dropped) and the non-loop edge count."""
    M = np.zeros((g.n, g.n))
    m = 0.0
    for i, j in g.edges:
        if i == j:
            continue
        M[i, j] += 1.0
        M[j, i] += 1.0
        m += 1.0
    return M, m


def cut_extrema_batch(graphs, maximize: bool = True, balanced: bool = False,
                      solver: str = "auto", schedule: AnnealSchedule | None = None,
                      rng=None, budget: int = 1 << 22) -> np.ndarray:
    """Cut counts (max or min) for a batch of graphs on one vertex set.

    Exact enumeration below the budget, otherwise one batched annealing
    run over all graphs; `balanced` restricts to bisections.
    """
    if not graphs:
        return np.zeros(0)
    n = graphs[0].n
    if any(g.n != n or g.p != 2 for g in graphs):
        raise ValueError("all graphs must share n and have p=2")
    use_exact = solver == "exact" or (solver == "auto" and 2 ** n <= budget)
    if use_exact:
        kern = cut_kernel(2)
        cs = ConstraintSet.balanced_bisection() if balanced else ConstraintSet.all()
        out = np.empty(len(graphs))
        for k, g in enumerate(graphs):
            w = WeightTensor.from_hypergraph(g)
            if not maximize:
                w = WeightTensor(2, n, w.keys, -w.values)
            res = exact_max(w, kern, constraint=cs, budget=budget)
            out[k] = res.value / 2.0 if maximize else -res.value / 2.0
        return out
    schedule = schedule or AnnealSchedule(sweeps=5000, restarts=8)
    mats = [_count_matrix(g) for g in graphs]
    sign = -1.0 if maximize else 1.0
    J = np.stack([sign * M / 2.0 for M, _ in mats])
    out = engines.anneal_ising(J, restarts=schedule.restarts, sweeps=schedule.sweeps,
                               beta0=schedule.beta0, beta1=schedule.beta1,
                               rng=rng, swap_moves=balanced)
    halves = np.array([m / 2.0 for _, m in mats])
    return halves + out["value"] if maximize else halves - out["value"]


def xorsat_max_satisfied(inst, solver: str = "auto",
                         schedule: AnnealSchedule | None = None, rng=None,
                         budget: int = 1 << 22) -> int:
    """Maximum (or best-found) number of satisfied parity clauses."""
    n, p, m = inst.n, inst.p, inst.m
    use_exact = solver == "exact" or (solver == "auto" and 2 ** n <= budget)
    if use_exact:
        w = WeightTensor.from_xorsat(inst)
        res = exact_max(w, xor_kernel(p), budget=budget)
        total = m / 2.0 + res.value / (2.0 * p)
        sat = int(round(total))
        if abs(total - sat) > 1e-6:
            raise AssertionError("satisfied-count identity broke (non-integer)")
        return sat
    schedule = schedule or AnnealSchedule(sweeps=8000, restarts=6)
    mono = Monomials(n=n, const=m / 2.0,
                     groups=[(inst.clauses, inst.signs.astype(np.float64) / 2.0)])
    spins = _anneal_monomials(mono, schedule, as_generator(rng))
    return xorsat_satisfied(inst, spins)


# ----------------------------------------------------------------------------
# sqrt(d) coefficient


_LEADING = {
    "qcut": lambda d, q, p: (d / 2.0 * (1.0 - 1.0 / q), math.sqrt(d) / 2.0),
    "xorsat": lambda d, q, p: (d / (2.0 * p), 0.5 * math.sqrt(d / p)),
    "sbm_bisection": lambda d, q, p: (d / 4.0, -math.sqrt(d)),
}


def sqrt_d_coefficient(problem: str, n: int, d_grid, q_or_p: int = 2,
                       replicas: int = 16, solver: str = "auto", rng=None,
                       xi: float = 1.0, schedule: AnnealSchedule | None = None,
                       ensemble: str = "poisson", budget: int = 1 << 22) -> dict:
    """Second-order coefficient (value/n - leading(d)) / scale(d) per d.

    The leading/scale pairs are fixed by the problem (cut fraction,
    satisfied parity fraction, bisection cost); nothing is fitted.
    For qcut the default instance law is the Poisson multi-edge variant,
    which keeps the sqrt(d) scaling intact at densities where Bernoulli
    edges saturate; pass ensemble="er" for the 0/1 model.
    """
    if problem not in _LEADING:
        raise ValueError(f"problem must be one of {sorted(_LEADING)}, got {problem!r}")
    gen = as_generator(rng)
    rows = []
    for d in d_grid:
        if problem == "qcut":
            q = q_or_p
            leading, scale = _LEADING[problem](d, q, 2)
            if q != 2:
                raise NotImplementedError("qcut scaling runs at q=2 "
                                          "(other q via solvers directly)")
            graphs = [_cut_instance(n, d, ensemble, gen) for _ in range(replicas)]
            vals = cut_extrema_batch(graphs, maximize=True, solver=solver,
                                     schedule=schedule, rng=gen, budget=budget) / n
        elif problem == "xorsat":
            p = q_or_p
            leading, scale = _LEADING[problem](d, 2, p)
            vals = np.empty(replicas)
            for r in range(replicas):
                inst = gen_xorsat_instance(n, p, d, gen)
                vals[r] = xorsat_max_satisfied(inst, solver=solver,
                                               schedule=schedule, rng=gen,
                                               budget=budget) / n
        else:
            leading, scale = _LEADING[problem](d, 2, 2)
            if d < xi * xi:
                raise ValueError(f"need d >= xi^2 for nonnegative rates, got d={d}, xi={xi}")
            a = d + xi * math.sqrt(d)
            b = d - xi * math.sqrt(d)
            graphs = [gen_sbm(n, a, b, gen).as_hypergraph() for _ in range(replicas)]
            vals = cut_extrema_batch(graphs, maximize=False, balanced=True,
                                     solver=solver, schedule=schedule, rng=gen,
                                     budget=budget) / n
        coeffs = (vals - leading) / scale
        rows.append({
            "d": float(d), "leading": leading, "scale": scale,
            "value_mean": float(vals.mean()),
            "value_sem": float(vals.std(ddof=1) / math.sqrt(replicas)),
            "coefficient": float(coeffs.mean()),
            "coefficient_sem": float(coeffs.std(ddof=1) / math.sqrt(replicas)),
            "replicas": replicas,
        })
    return {"problem": problem, "n": n, "xi": xi, "rows": rows}


# ----------------------------------------------------------------------------
# ER vs configuration model


def _kernel_conditions(kernel: Kernel, rng) -> dict:
    """Check the flat-residual / concave-interior sufficient conditions."""
    gen = as_generator(rng)
    hess = psi_max_and_hessian(kernel, n_starts=64, rng=gen)
    sup = 0.0
    for _ in range(32):
        sigma = gen.integers(0, kernel.q, size=24)
        sup = max(sup, c1_residual(kernel, sigma)["sup"])
    c1_ok = sup <= 1e-9
    return {"c1_ok": bool(c1_ok), "c1_sup": float(sup),
            "c2_ok": bool(hess["c2_ok"]),
            "psi_max": float(hess["psi_max"]),
            "min_eigenvalue": float(hess["min_eigenvalue"])}


def er_vs_regular(kernel: Kernel | None = None, n: int = 64, p: int = 2,
                  d: int = 16, replicas: int = 32, solver: str = "auto",
                  rng=None, schedule: AnnealSchedule | None = None,
                  ensemble: str = "poisson", budget: int = 1 << 22) -> dict:
    """Paired (1/n) max-hamiltonian estimates on ER vs configuration-model
    disorder, reported with the difference over sqrt(d).

    The ER side defaults to the Poisson multi-edge variant so the
    comparison is meaningful at d comparable to n (Bernoulli edges
    saturate there and the ER value goes deterministic); ensemble="er"
    selects 0/1 edges.  Kernels outside the flat-residual/concave
    sufficient conditions are still run but the result is flagged
    exploratory (no decay claim).
    """
    kernel = kernel or cut_kernel(2)
    if kernel.p != p:
        raise ValueError("kernel arity must equal p")
    if d > 0 and (n * d) % p != 0:
        raise ValueError(f"p={p} must divide n*d={n * d}")
    if ensemble not in ("poisson", "er"):
        raise ValueError(f"ensemble must be 'poisson' or 'er', got {ensemble!r}")
    gen = as_generator(rng)
    conditions = _kernel_conditions(kernel, gen)

    is_cut = kernel.q == 2 and p == 2 and np.array_equal(
        kernel.table, cut_kernel(2).table)
    v_er = np.empty(replicas)
    v_reg = np.empty(replicas)
    if d == 0:
        v_er[:] = 0.0
        v_reg[:] = 0.0
    elif is_cut:
        ers = [_cut_instance(n, float(d), ensemble, gen) for _ in range(replicas)]
        regs = [gen_configuration_regular(n, 2, d, gen) for _ in range(replicas)]
        v_er = 2.0 * cut_extrema_batch(ers, solver=solver, schedule=schedule,
                                       rng=gen, budget=budget) / n
        v_reg = 2.0 * cut_extrema_batch(regs, solver=solver, schedule=schedule,
                                        rng=gen, budget=budget) / n
    else:
        from .solvers import anneal_max
        for r in range(replicas):
            if ensemble == "poisson":
                g_er = gen_er_poisson_multigraph(n, p, float(d), gen)
            else:
                g_er = gen_er_hypergraph(n, p, d, gen)
            g_reg = gen_configuration_regular(n, p, d, gen)
            for tag, g, out in (("er", g_er, v_er), ("reg", g_reg, v_reg)):
                w = WeightTensor.from_hypergraph(g)
                use_exact = solver == "exact" or (
                    solver == "auto" and kernel.q ** n <= budget)
                if use_exact:
                    res = exact_max(w, kernel, budget=budget)
                else:
                    res = anneal_max(w, kernel, schedule=schedule, rng=gen)
                out[r] = res.value / n

    diffs = v_er - v_reg
    diff_mean = float(diffs.mean())
    diff_sem = float(diffs.std(ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    sd = math.sqrt(d) if d > 0 else 1.0
    return {"v_er": float(v_er.mean()),
            "v_er_sem": float(v_er.std(ddof=1) / math.sqrt(replicas)),
            "v_reg": float(v_reg.mean()),
            "v_reg_sem": float(v_reg.std(ddof=1) / math.sqrt(replicas)),
            "diff_mean": diff_mean, "diff_sem": diff_sem,
            "diff_over_sqrt_d": abs(diff_mean) / sd,
            "diff_sem_over_sqrt_d": diff_sem / sd,
            "exploratory": not (conditions["c1_ok"] or conditions["c2_ok"]),
            "conditions": conditions, "replicas": replicas, "d": d}


# ----------------------------------------------------------------------------
# concentration


def concentration_scan(problem: str, n_grid, d: float, replicas: int = 64,
                       rng=None, solver: str = "auto",
                       schedule: AnnealSchedule | None = None,
                       budget: int = 1 << 22) -> dict:
    """Sample variance of the value density across disorder replicas per n."""
    if problem not in ("qcut", "complete_qcut"):
        raise ValueError(f"problem must be qcut|complete_qcut, got {problem!r}")
    gen = as_generator(rng)
    rows = []
    for n in n_grid:
        if problem == "qcut":
            graphs = [gen_er_hypergraph(int(n), 2, d, gen) for _ in range(replicas)]
        else:
            edges = list(itertools.combinations(range(int(n)), 2))
            graphs = [PUniformHypergraph(p=2, n=int(n), edges=edges)
                      for _ in range(replicas)]
        vals = cut_extrema_batch(graphs, maximize=True, solver=solver,
                                 schedule=schedule, rng=gen, budget=budget) / int(n)
        rows.append({"n": int(n), "mean": float(vals.mean()),
                     "var": float(vals.var(ddof=1)),
                     "sem": float(vals.std(ddof=1) / math.sqrt(replicas)),
                     "replicas": replicas})
    return {"problem": problem, "d": float(d), "rows": rows}


# ----------------------------------------------------------------------------
# small statistics helpers


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if (x <= 0).any() or (y <= 0).any():
        raise ValueError("log-log slope needs positive data")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def chi_square_uniform(counts) -> dict:
    """Chi-square test of uniformity over the observed categories."""
    counts = np.asarray(counts, dtype=np.float64)
    stat, p_value = sps.chisquare(counts)
    return {"stat": float(stat), "p_value": float(p_value),
            "dof": int(counts.size - 1)}


def f_test_variance_decrease(var_small_n: float, var_large_n: float,
                             df_small: int, df_large: int) -> dict:
    """One-sided F test of H1: variance at the larger n is smaller."""
    if var_large_n <= 0:
        return {"f": math.inf, "p_value": 0.0}
    f = var_small_n / var_large_n
    return {"f": float(f), "p_value": float(sps.f.sf(f, df_small, df_large))}


# ----------------------------------------------------------------------------
# records and registry


@dataclass
class ExperimentRecord:
    """Replayable provenance for one experiment cell."""

    experiment: str
    params: dict
    seed: int
    estimates: dict
    timestamp: str
    wall_time_s: float
    version: str
    cell: int = 0
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "cell": self.cell,
                "params": self.params, "seed": self.seed,
                "estimates": self.estimates, "timestamp": self.timestamp,
                "wall_time_s": self.wall_time_s, "version": self.version,
                "meta": self.meta}

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentRecord":
        return cls(experiment=d["experiment"], params=dict(d["params"]),
                   seed=int(d["seed"]), estimates=dict(d["estimates"]),
                   timestamp=d["timestamp"], wall_time_s=float(d["wall_time_s"]),
                   version=d.get("version", "unknown"), cell=int(d.get("cell", 0)),
                   meta=dict(d.get("meta", {})))


def _est(value, sem=None) -> dict:
    return {"value": float(value), "sem": None if sem is None else float(sem)}


def _schedule_from(params: dict) -> AnnealSchedule | None:
    keys = {"sweeps", "restarts", "beta0", "beta1"}
    if not keys & params.keys():
        return None
    base = AnnealSchedule()
    return AnnealSchedule(
        beta0=float(params.get("beta0", base.beta0)),
        beta1=float(params.get("beta1", base.beta1)),
        sweeps=int(params.get("sweeps", base.sweeps)),
        restarts=int(params.get("restarts", base.restarts)))


_SCHEDULE_PARAMS = {"sweeps", "restarts", "beta0", "beta1"}

EXPERIMENT_PARAMS = {
    "interpolation_gap": {"n", "p", "q", "d", "beta", "replicas", "disorder",
                          "coupled"},
    "sqrt_d_coefficient": {"problem", "n", "d", "q", "p", "xi", "replicas",
                           "solver", "ensemble"} | _SCHEDULE_PARAMS,
    "er_vs_regular": {"n", "p", "d", "replicas", "solver",
                      "ensemble"} | _SCHEDULE_PARAMS,
    "concentration_scan": {"problem", "n", "d", "replicas", "solver"} | _SCHEDULE_PARAMS,
    "beta_schedule": {"d", "delta", "D", "q"},
    "pspin_ground_state": {"n", "p", "replicas", "solver"} | _SCHEDULE_PARAMS,
}


def _check_params(experiment: str, params: dict, allowed: set):
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"{experiment}: unknown parameter(s) {sorted(extra)}; "
                         f"allowed: {sorted(allowed)}")


def _cell_interpolation_gap(params: dict, rng) -> tuple[dict, dict]:
    _check_params("interpolation_gap", params,
                  EXPERIMENT_PARAMS["interpolation_gap"])
    out = interpolation_gap(n=int(params.get("n", 10)), p=int(params.get("p", 2)),
                            q=int(params.get("q", 2)), d=float(params["d"]),
                            beta=float(params.get("beta", 1.0)),
                            replicas=int(params.get("replicas", 64)),
                            disorder=params.get("disorder", "poisson"),
                            coupled=bool(params.get("coupled", True)), rng=rng)
    est = {"phi1_mean": _est(out["phi1_mean"], out.get("phi1_sem")),
           "phi2_mean": _est(out["phi2_mean"], out.get("phi2_sem")),
           "gap_over_beta": _est(out["gap_over_beta"], out["gap_sem_over_beta"]),
           "gap_abs_over_beta": _est(out["gap_abs_over_beta"],
                                     out["gap_abs_sem_over_beta"])}
    return est, {"disorder": out["disorder"], "clamped": out["clamped"]}


def _cell_sqrt_d(params: dict, rng) -> tuple[dict, dict]:
    _check_params("sqrt_d_coefficient", params,
                  EXPERIMENT_PARAMS["sqrt_d_coefficient"])
    problem = params.get("problem", "qcut")
    q_or_p = int(params.get("p", params.get("q", 2)))
    out = sqrt_d_coefficient(problem, int(params["n"]), [float(params["d"])],
                             q_or_p=q_or_p, replicas=int(params.get("replicas", 16)),
                             solver=params.get("solver", "auto"), rng=rng,
                             xi=float(params.get("xi", 1.0)),
                             ensemble=params.get("ensemble", "poisson"),
                             schedule=_schedule_from(params))
    row = out["rows"][0]
    est = {"coefficient": _est(row["coefficient"], row["coefficient_sem"]),
           "value_density": _est(row["value_mean"], row["value_sem"]),
           "leading": _est(row["leading"]), "scale": _est(row["scale"])}
    return est, {"problem": problem}


def _cell_er_vs_regular(params: dict, rng) -> tuple[dict, dict]:
    _check_params("er_vs_regular", params, EXPERIMENT_PARAMS["er_vs_regular"])
    out = er_vs_regular(n=int(params.get("n", 64)), p=int(params.get("p", 2)),
                        d=int(params["d"]), replicas=int(params.get("replicas", 32)),
                        solver=params.get("solver", "auto"), rng=rng,
                        ensemble=params.get("ensemble", "poisson"),
                        schedule=_schedule_from(params))
    est = {"v_er": _est(out["v_er"], out["v_er_sem"]),
           "v_reg": _est(out["v_reg"], out["v_reg_sem"]),
           "diff_over_sqrt_d": _est(out["diff_over_sqrt_d"],
                                    out["diff_sem_over_sqrt_d"])}
    return est, {"exploratory": out["exploratory"], "conditions": out["conditions"]}


def _cell_concentration(params: dict, rng) -> tuple[dict, dict]:
    _check_params("concentration_scan", params,
                  EXPERIMENT_PARAMS["concentration_scan"])
    out = concentration_scan(params.get("problem", "qcut"), [int(params["n"])],
                             float(params.get("d", 16)),
                             replicas=int(params.get("replicas", 64)),
                             solver=params.get("solver", "auto"), rng=rng,
                             schedule=_schedule_from(params))
    row = out["rows"][0]
    est = {"var": _est(row["var"]), "mean": _est(row["mean"], row["sem"])}
    return est, {"problem": out["problem"]}


def _cell_beta_schedule(params: dict, rng) -> tuple[dict, dict]:
    _check_params("beta_schedule", params, EXPERIMENT_PARAMS["beta_schedule"])
    d = float(params["d"])
    delta = float(params.get("delta", 0.125))
    beta = beta_schedule(d, delta)
    bound = schedule_bound(d, delta, D=float(params.get("D", 1.0)),
                           q=int(params.get("q", 2)))
    return {"beta": _est(beta), "bound": _est(bound)}, {}


def _cell_pspin(params: dict, rng) -> tuple[dict, dict]:
    _check_params("pspin_ground_state", params,
                  EXPERIMENT_PARAMS["pspin_ground_state"])
    out = pspin_ground_state(int(params["n"]), int(params.get("p", 2)),
                             replicas=int(params.get("replicas", 16)), rng=rng,
                             solver=params.get("solver", "auto"),
                             schedule=_schedule_from(params))
    return ({"density": _est(out["mean"], out["sem"])},
            {"solver": out["solver"]})


EXPERIMENTS = {
    "interpolation_gap": _cell_interpolation_gap,
    "sqrt_d_coefficient": _cell_sqrt_d,
    "er_vs_regular": _cell_er_vs_regular,
    "concentration_scan": _cell_concentration,
    "beta_schedule": _cell_beta_schedule,
    "pspin_ground_state": _cell_pspin,
}


def run_cell(experiment: str, params: dict, seed: int, cell: int = 0) -> ExperimentRecord:
    """Execute one registered experiment cell with its own seed stream."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; "
                         f"known: {sorted(EXPERIMENTS)}")
    t0 = time.perf_counter()
    estimates, meta = EXPERIMENTS[experiment](dict(params), stream(int(seed)))
    wall = time.perf_counter() - t0
    return ExperimentRecord(
        experiment=experiment, params=dict(params), seed=int(seed),
        estimates=estimates, timestamp=datetime.now(timezone.utc).isoformat(),
        wall_time_s=wall, version=__version__, cell=cell, meta=meta)


def replay_record(record: ExperimentRecord) -> dict:
    """Re-run a record's cell and compare estimate values."""
    fresh = run_cell(record.experiment, record.params, record.seed,
                     cell=record.cell)
    diffs = {}
    for name, est in record.estimates.items():
        new = fresh.estimates.get(name)
        diffs[name] = None if new is None else abs(new["value"] - est["value"])
    finite = [v for v in diffs.values() if v is not None]
    return {"match": bool(finite) and max(finite) == 0.0,
            "max_abs_diff": max(finite) if finite else math.inf,
            "diffs": diffs, "fresh": fresh}
