"""End-to-end acceptance checks.

Each test covers one advertised guarantee of the package, prints a
PASS/FAIL line through the conftest reporter, and asserts at the stated
tolerance.  The scaling and cross-consistency runs use annealing with
schedules sized so the solver bias is well inside the tolerances; they
take a few minutes each (the full module is ~20 minutes on one core).
"""

import itertools
import math

import numpy as np
import pytest

from hyperglass.ensembles import (gen_configuration_regular,
                                  gen_er_hypergraph, two_stage_partition)
from hyperglass.experiments import (chi_square_uniform, concentration_scan,
                                    er_vs_regular, interpolation_gap,
                                    loglog_slope, sqrt_d_coefficient,
                                    xorsat_max_satisfied)
from hyperglass.gaussian import (gen_standard_symmetric_tensor,
                                 ground_state_extrapolate, pspin_ground_state)
from hyperglass.objectives import (Kernel, WeightTensor, cut_kernel,
                                   gen_xorsat_instance, hamiltonian,
                                   xor_kernel)
from hyperglass.rng import stream
from hyperglass.solvers import (AnnealSchedule, exact_max, log_partition,
                                third_derivative_bound_check)

from conftest import record_criterion
from oracles import dyadic_weights, enumerate_max


def _rainbow_kernel() -> Kernel:
    return Kernel.from_function(3, 3, lambda a, b, c: 1.0 if len({a, b, c}) == 3
                                else 0.0, name="rainbow")


def _random_instance(p, q, n, gen):
    keys = list(itertools.combinations(range(n), p))
    mask = gen.random(len(keys)) < 0.5
    keys = [kk for kk, mm in zip(keys, mask) if mm] or [tuple(range(p))]
    w = WeightTensor(p, n, keys, dyadic_weights(gen, keys))
    if p == 2:
        kern = cut_kernel(q)
    elif q == 2:
        kern = xor_kernel(3)
    else:
        kern = _rainbow_kernel()
    return w, kern


def test_exact_solver_matches_naive_enumeration():
    """>= 100 instances, n <= 12, q in {2,3}, p in {2,3}: bitwise equality.

    Dyadic weights (multiples of 1/64) keep every partial sum exactly
    representable, so any evaluation order gives the same float and
    equality can be literal.
    """
    gen = stream(9001)
    checked = 0
    for p, q in ((2, 2), (2, 3), (3, 2), (3, 3)):
        for _ in range(26):
            n = int(gen.integers(6, 13) if q == 2 else gen.integers(5, 9))
            w, kern = _random_instance(p, q, n, gen)
            p_fact = math.factorial(p)
            rows = w.keys.tolist()
            vals = w.values

            def naive_eval(cfg):
                total = 0.0
                for row, v in zip(rows, vals):
                    total += p_fact * v * kern.table[tuple(cfg[i] for i in row)]
                return total

            res = exact_max(w, kern)
            val, cfg = enumerate_max(n, q, naive_eval)
            assert res.value == val, (p, q, n)
            assert tuple(res.config) == cfg, (p, q, n)
            checked += 1
    record_criterion("exactness", checked >= 100,
                     f"{checked} instances, exact_max == naive enumerator bit-for-bit")
    assert checked >= 100


def test_finite_temperature_sandwich():
    """max/n <= Phi(beta)/beta <= max/n + log(q)/beta on >= 500 cells."""
    gen = stream(9002)
    betas = (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)
    cells = 0
    for k in range(84):
        p = 2 if k % 2 == 0 else 3
        q = 2 if k % 4 < 2 else 3
        n = int(gen.integers(5, 9))
        w, kern = _random_instance(p, q, n, gen)
        vmax = exact_max(w, kern).value / n
        for beta in betas:
            phi = log_partition(w, kern, beta=beta)
            assert vmax <= phi / beta + 1e-10, (p, q, n, beta)
            assert phi / beta <= vmax + math.log(q) / beta + 1e-10, (p, q, n, beta)
            cells += 1
    record_criterion("finite_temperature_sandwich", cells >= 500,
                     f"{cells} (instance, beta) cells, both bounds hold")
    assert cells >= 500


def test_third_derivative_bound_and_cumulant_formula():
    """100 cells: |fd3| <= 6 beta^2 (p!)^3 ||f||^3 / n and the Richardson
    value matches the Gibbs-cumulant formula to 1e-4 relative.

    Kernels are random symmetric tables normalized to ||f||_inf = 1 and
    the step scales with arity (p=3 log-partitions are ~p! times
    sharper); the relative error uses a 1e-4 absolute floor so cells
    whose cumulant sits at rounding level are judged on absolute terms.
    """
    gen = stream(9003)
    worst = 0.0
    for c in range(100):
        p = 2 if c % 2 == 0 else 3
        q = 2 if c % 4 < 2 else 3
        n = int(gen.integers(5, 8))
        keys = list(itertools.combinations(range(n), p))
        mask = gen.random(len(keys)) < 0.5
        keys = [kk for kk, mm in zip(keys, mask) if mm] or [tuple(range(p))]
        w = WeightTensor(p, n, keys, gen.normal(size=len(keys)))
        table = np.zeros((q,) * p)
        vals: dict = {}
        for idx in itertools.product(range(q), repeat=p):
            s = tuple(sorted(idx))
            if s not in vals:
                vals[s] = gen.normal()
            table[idx] = vals[s]
        kern = Kernel(p, q, table / np.abs(table).max(), name="random_unit")
        beta = float(gen.uniform(0.3, 1.0))
        tup = tuple(w.keys[int(gen.integers(0, w.keys.shape[0]))])
        h = 0.12 if p == 2 else 0.04
        o1 = third_derivative_bound_check(w, kern, beta, tup, h=h)
        o2 = third_derivative_bound_check(w, kern, beta, tup, h=h / 2)
        assert abs(o1["fd3_richardson"]) <= o1["bound"] + 1e-9
        r2 = (16.0 * o2["fd3_richardson"] - o1["fd3_richardson"]) / 15.0
        worst = max(worst, abs(r2 - o1["analytic"]) / max(abs(o1["analytic"]), 1e-4))
    record_criterion("third_derivative_bound", worst <= 1e-4,
                     f"100 cells, bound holds, worst cumulant mismatch {worst:.2e} "
                     f"(tolerance 1e-4 relative)")
    assert worst <= 1e-4


def _canon(partition):
    return tuple(sorted(tuple(sorted(g)) for g in partition))


@pytest.mark.parametrize("m_red,n_blue,p", [(4, 2, 2), (6, 3, 3)])
def test_matching_partition_uniformity(m_red, n_blue, p):
    """Two-stage partition is uniform over partitions of the red balls:
    chi-square p-value > 0.01 at 30000 trials."""
    gen = stream(9004, m_red, n_blue, p)
    counts: dict = {}
    trials = 30000
    for _ in range(trials):
        part = _canon(two_stage_partition(m_red, n_blue, p, gen))
        counts[part] = counts.get(part, 0) + 1
    # every partition of the reds must be reachable
    n_parts = 3 if p == 2 else 10
    assert len(counts) == n_parts
    out = chi_square_uniform(list(counts.values()))
    record_criterion(f"matching_uniformity_{m_red}_{n_blue}_{p}",
                     out["p_value"] > 0.01,
                     f"{trials} trials over {n_parts} partitions, "
                     f"chi2 p={out['p_value']:.3f} (needs > 0.01)")
    assert out["p_value"] > 0.01


def test_configuration_model_degrees_exact():
    """1000 samples across an (n, p, d) grid: every degree equals d."""
    gen = stream(9005)
    grid = [(12, 2, 3), (12, 3, 4), (10, 5, 5), (16, 2, 4), (20, 4, 3)]
    samples = 0
    for n, p, d in grid:
        for _ in range(200):
            g = gen_configuration_regular(n, p, d, gen)
            deg = np.zeros(n, dtype=int)
            for e in g.edges:
                for v in e:
                    deg[v] += 1
            assert np.all(deg == d), (n, p, d)
            samples += 1
    record_criterion("configuration_model_regularity", samples >= 1000,
                     f"{samples} samples, all degrees exactly d")
    assert samples >= 1000


def test_symmetric_tensor_entry_variance():
    """Entry variance 1/(p-1)! within 3 sigma at >= 1e5 entries per p."""
    plan = {2: (100, 21), 3: (40, 11), 4: (30, 4)}  # (n, tensors) -> >=1e5 entries
    ok = True
    details = []
    for p, (n, reps) in plan.items():
        vals = np.concatenate([
            gen_standard_symmetric_tensor(n, p, stream(9006, p, r)).values
            for r in range(reps)])
        assert vals.size >= 100_000
        target = 1.0 / math.factorial(p - 1)
        sd_of_var = target * math.sqrt(2.0 / (vals.size - 1))
        err = abs(vals.var(ddof=1) - target)
        ok = ok and err <= 3 * sd_of_var
        details.append(f"p={p}: |var-{target:.3g}|={err:.2e} "
                       f"(3sigma={3 * sd_of_var:.2e}, N={vals.size})")
        assert err <= 3 * sd_of_var, details[-1]
    record_criterion("tensor_entry_variance", ok, "; ".join(details))


def test_interpolation_gap_decreases_with_degree():
    """Replica-averaged |Phi1 - Phi2| / beta at n=10, q=2, p=2, beta=1
    strictly decreases over d in {16, 64, 256} with log-log slope <= -0.3."""
    ds = [16.0, 64.0, 256.0]
    gaps = []
    for d in ds:
        out = interpolation_gap(10, 2, 2, d=d, beta=1.0, replicas=64,
                                rng=stream(9007, int(d)))
        gaps.append(out["gap_abs_over_beta"])
    slope = loglog_slope(ds, gaps)
    decreasing = all(a > b for a, b in zip(gaps, gaps[1:]))
    record_criterion("interpolation_gap_shape", decreasing and slope <= -0.3,
                     f"gaps={['%.4g' % g for g in gaps]}, slope={slope:.3f} "
                     f"(needs strict decrease and <= -0.3)")
    assert decreasing
    assert slope <= -0.3


def test_value_density_variance_concentrates():
    """Var of the cut density at d=16 falls with n: log-log slope <= -0.5
    over n in {32, 64, 128, 256}, 64 replicas each (annealed).

    Sweeps scale with n so the annealing error does not inflate the
    large-n variances and flatten the fitted slope.
    """
    sweeps = {32: 3000, 64: 5000, 128: 8000, 256: 12000}
    ns = sorted(sweeps)
    variances = []
    for n in ns:
        out = concentration_scan(
            "qcut", [n], 16.0, replicas=64, solver="anneal",
            schedule=AnnealSchedule(sweeps=sweeps[n], restarts=8),
            rng=stream(9008, n))
        variances.append(out["rows"][0]["var"])
    slope = loglog_slope(ns, variances)
    record_criterion("concentration", slope <= -0.5,
                     f"vars={['%.3g' % v for v in variances]}, "
                     f"slope={slope:.3f} (needs <= -0.5)")
    assert slope <= -0.5


def test_balanced_disagreement_identity():
    """Ordered disagreeing pairs under a balanced binary labelling equal
    n^2/2 exactly; 100 random balanced configs per even n in 4..20."""
    kern = cut_kernel(2)
    checked = 0
    for n in range(4, 21, 2):
        keys = list(itertools.combinations(range(n), 2))
        w = WeightTensor(2, n, keys, np.ones(len(keys)))
        gen = stream(9009, n)
        for _ in range(100):
            labels = np.array([0] * (n // 2) + [1] * (n // 2))
            gen.shuffle(labels)
            assert hamiltonian(w, kern, labels) == n * n / 2.0
            checked += 1
    record_criterion("balanced_identity", checked == 900,
                     f"{checked} balanced configs, ordered pair count == n^2/2 exactly")


def test_xorsat_satisfied_floor():
    """Max satisfied >= m/2 on every one of >= 1000 random instances."""
    gen = stream(9010)
    instances = 0
    for _ in range(1000):
        n = int(gen.integers(8, 13))
        p = 2 if gen.random() < 0.5 else 3
        d = float(gen.uniform(1.0, 6.0))
        inst = gen_xorsat_instance(n, p, d, gen)
        sat = xorsat_max_satisfied(inst, solver="exact")
        assert 2 * sat >= inst.m, (n, p, d, sat, inst.m)
        instances += 1
    record_criterion("xorsat_floor", instances >= 1000,
                     f"{instances} instances, max satisfied >= m/2 on all")


def test_sqrt_d_coefficient_cross_consistency():
    """The measured second-order coefficient of sparse optima matches an
    independent Gaussian ground-state estimate.

    Max-Cut at n=200, d in {32, 64}: (value/n - d/4) / (sqrt(d)/2) vs the
    extrapolated pairwise ground-state density / sqrt(2), within 15%.
    XORSAT p=3 at n=200: (sat/n - d/6) / (sqrt(d/3)/2) vs the extrapolated
    cubic ground-state density, within 20%.
    """
    # pairwise Gaussian ground state, extrapolated in n^{-2/3}
    ns = [64, 128, 256]
    sched2 = AnnealSchedule(sweeps=2500, restarts=6)
    res2 = [pspin_ground_state(n, 2, replicas=16, rng=stream(9011, n),
                               solver="anneal", schedule=sched2) for n in ns]
    fit2 = ground_state_extrapolate(ns, [r["mean"] for r in res2],
                                    [r["sem"] for r in res2])
    sk_estimate = fit2["a"] / math.sqrt(2.0)

    cut = sqrt_d_coefficient("qcut", 200, [32.0, 64.0], replicas=12,
                             solver="anneal",
                             schedule=AnnealSchedule(sweeps=4000, restarts=6),
                             rng=stream(9012))
    cut_rels = [abs(row["coefficient"] - sk_estimate) / sk_estimate
                for row in cut["rows"]]

    # cubic Gaussian ground state; heavier schedules at larger n keep the
    # solver bias comparable to the xorsat side's
    sched3 = {64: AnnealSchedule(sweeps=4000, restarts=8),
              128: AnnealSchedule(sweeps=6000, restarts=8),
              256: AnnealSchedule(sweeps=9000, restarts=8)}
    res3 = [pspin_ground_state(n, 3, replicas=10, rng=stream(9013, n),
                               solver="anneal", schedule=sched3[n]) for n in ns]
    fit3 = ground_state_extrapolate(ns, [r["mean"] for r in res3],
                                    [r["sem"] for r in res3])
    p3_estimate = fit3["a"]

    xs = sqrt_d_coefficient("xorsat", 200, [32.0, 64.0], q_or_p=3, replicas=8,
                            solver="anneal",
                            schedule=AnnealSchedule(sweeps=6000, restarts=6),
                            rng=stream(9014))
    xor_rels = [abs(row["coefficient"] - p3_estimate) / p3_estimate
                for row in xs["rows"]]

    ok = all(r <= 0.15 for r in cut_rels) and all(r <= 0.20 for r in xor_rels)
    record_criterion(
        "sqrt_d_cross_consistency", ok,
        f"maxcut coef={['%.4f' % r['coefficient'] for r in cut['rows']]} vs "
        f"SK/sqrt2={sk_estimate:.4f}, rel={['%.1f%%' % (100 * r) for r in cut_rels]} "
        f"(<=15%); xorsat coef={['%.4f' % r['coefficient'] for r in xs['rows']]} vs "
        f"P3={p3_estimate:.4f}, rel={['%.1f%%' % (100 * r) for r in xor_rels]} (<=20%)")
    assert all(r <= 0.15 for r in cut_rels), (cut_rels, sk_estimate)
    assert all(r <= 0.20 for r in xor_rels), (xor_rels, p3_estimate)


def test_er_vs_regular_gap_shrinks():
    """|V_er - V_reg| / sqrt(d) at n=64 decreases from d=4 to d=64
    (within 2 SEM), paired replicas, 32 each."""
    lo = er_vs_regular(n=64, p=2, d=4, replicas=32, rng=stream(9015, 4))
    hi = er_vs_regular(n=64, p=2, d=64, replicas=32, rng=stream(9015, 64))
    sem = math.hypot(lo["diff_sem_over_sqrt_d"], hi["diff_sem_over_sqrt_d"])
    ok = hi["diff_over_sqrt_d"] <= lo["diff_over_sqrt_d"] + 2 * sem
    record_criterion(
        "er_vs_regular_decay", ok,
        f"d=4: {lo['diff_over_sqrt_d']:.4f}, d=64: {hi['diff_over_sqrt_d']:.4f} "
        f"(2 SEM = {2 * sem:.4f}; decrease required within that allowance)")
    assert ok
