import itertools
import math

import numpy as np
import pytest

from hyperglass.ensembles import PUniformHypergraph, gen_er_hypergraph
from hyperglass.experiments import (EXPERIMENT_PARAMS, EXPERIMENTS,
                                    ExperimentRecord, beta_schedule,
                                    chi_square_uniform, concentration_scan,
                                    cut_extrema_batch, er_vs_regular,
                                    f_test_variance_decrease,
                                    gen_er_poisson_multigraph,
                                    interpolation_gap, loglog_slope,
                                    replay_record, run_cell, schedule_bound,
                                    sqrt_d_coefficient, xorsat_max_satisfied)
from hyperglass.objectives import gen_xorsat_instance, xor_kernel
from hyperglass.rng import stream
from hyperglass.solvers import AnnealSchedule

from oracles import (enumerate_max, naive_bisection_min_cut, naive_cut,
                     naive_xorsat_satisfied)


# ----------------------------------------------------------------------------
# schedules


def test_beta_schedule_formula_and_validation():
    assert beta_schedule(16.0, 0.05) == pytest.approx(16.0 ** 0.2)
    with pytest.raises(ValueError):
        beta_schedule(0.5, 0.1)
    with pytest.raises(ValueError):
        beta_schedule(4.0, 0.3)


def test_schedule_bound_decreases_in_d():
    vals = [schedule_bound(d, 0.1) for d in (4, 16, 64, 256, 1024)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    beta = beta_schedule(16, 0.1)
    assert schedule_bound(16, 0.1, D=2.0, q=3) == pytest.approx(
        2.0 * beta ** 2 / 4.0 + 2.0 * math.log(3) / beta)


# ----------------------------------------------------------------------------
# interpolation gap


def test_interpolation_gap_beta_zero_analytic():
    out = interpolation_gap(8, 2, 2, d=4.0, beta=0.0, replicas=4)
    assert out["phi1_mean"] == pytest.approx(math.log(2))
    assert out["gap_over_beta"] == 0.0
    assert out["gap_abs_over_beta"] == 0.0


def test_interpolation_gap_fields_and_ordering():
    out = interpolation_gap(8, 2, 2, d=6.0, beta=0.8, replicas=12, rng=stream(100))
    assert out["replicas"] == 12
    assert not out["clamped"]
    assert out["gap_abs_over_beta"] >= out["gap_over_beta"] - 1e-15
    assert out["gap_abs_sem_over_beta"] >= 0.0


def test_interpolation_gap_bernoulli_clamp_flag():
    out = interpolation_gap(6, 2, 2, d=10.0, beta=0.5, replicas=4,
                            disorder="bernoulli", rng=stream(101))
    assert out["clamped"]  # rate d/n > 1 at n=6, d=10
    out2 = interpolation_gap(6, 2, 2, d=2.0, beta=0.5, replicas=4,
                             disorder="bernoulli", rng=stream(101))
    assert not out2["clamped"]


def test_interpolation_gap_validation():
    with pytest.raises(ValueError):
        interpolation_gap(6, 2, 2, d=-1.0, beta=1.0)
    with pytest.raises(ValueError):
        interpolation_gap(6, 2, 2, d=1.0, beta=-0.5)
    with pytest.raises(ValueError):
        interpolation_gap(6, 2, 2, d=1.0, beta=1.0, disorder="cauchy")
    with pytest.raises(ValueError):
        interpolation_gap(6, 3, 2, d=1.0, beta=1.0, kernel=xor_kernel(2))


# ----------------------------------------------------------------------------
# instance generation for the scaling runs


def test_poisson_multigraph_mean_edges():
    n, d = 12, 8.0
    lam = d / n  # p=2
    total = 0
    trials = 300
    for s in range(trials):
        g = gen_er_poisson_multigraph(n, 2, d, stream(102, s))
        assert g.multi
        assert g.meta["kind"] == "er_poisson"
        total += g.m
    expect = math.comb(n, 2) * lam
    sd = math.sqrt(math.comb(n, 2) * lam / trials)
    assert total / trials == pytest.approx(expect, abs=4 * sd)


def test_poisson_multigraph_repeats_edges():
    g = gen_er_poisson_multigraph(8, 2, 30.0, stream(103))
    edges = [tuple(e) for e in g.edges]
    assert len(edges) > len(set(edges))  # high rate forces multiplicity


# ----------------------------------------------------------------------------
# cut and xorsat batch solvers


def _er_graphs(n, d, count, seed):
    gen = stream(seed)
    return [gen_er_hypergraph(n, 2, d, gen) for _ in range(count)]


def test_cut_extrema_exact_vs_enumeration():
    graphs = _er_graphs(8, 4.0, 5, 104)
    maxes = cut_extrema_batch(graphs, maximize=True, solver="exact")
    mins = cut_extrema_batch(graphs, maximize=False, solver="exact")
    for g, hi, lo in zip(graphs, maxes, mins):
        vmax, _ = enumerate_max(8, 2, lambda c: naive_cut(g.edges, c))
        vmin, _ = enumerate_max(8, 2, lambda c: -naive_cut(g.edges, c))
        assert hi == vmax
        assert lo == -vmin


def test_cut_extrema_balanced_min_is_bisection():
    graphs = _er_graphs(8, 5.0, 4, 105)
    mins = cut_extrema_batch(graphs, maximize=False, balanced=True, solver="exact")
    for g, lo in zip(graphs, mins):
        assert lo == naive_bisection_min_cut(8, g.edges)


def test_cut_extrema_anneal_matches_exact():
    graphs = _er_graphs(12, 6.0, 4, 106)
    exact = cut_extrema_batch(graphs, maximize=True, solver="exact")
    ann = cut_extrema_batch(graphs, maximize=True, solver="anneal",
                            schedule=AnnealSchedule(sweeps=1200, restarts=8),
                            rng=stream(107))
    np.testing.assert_allclose(ann, exact, rtol=0, atol=1e-9)
    exact_b = cut_extrema_batch(graphs, maximize=False, balanced=True, solver="exact")
    ann_b = cut_extrema_batch(graphs, maximize=False, balanced=True, solver="anneal",
                              schedule=AnnealSchedule(sweeps=1200, restarts=8),
                              rng=stream(108))
    np.testing.assert_allclose(ann_b, exact_b, rtol=0, atol=1e-9)


def test_cut_extrema_edge_cases():
    assert cut_extrema_batch([]).size == 0
    g1 = gen_er_hypergraph(6, 2, 3.0, stream(109))
    g2 = gen_er_hypergraph(7, 2, 3.0, stream(110))
    with pytest.raises(ValueError):
        cut_extrema_batch([g1, g2])


def test_cut_extrema_counts_multiplicity():
    g = PUniformHypergraph(p=2, n=4, edges=[(0, 1), (0, 1), (2, 3)], multi=True)
    assert cut_extrema_batch([g], maximize=True, solver="exact")[0] == 3.0


def test_xorsat_exact_vs_enumeration():
    for s in range(4):
        inst = gen_xorsat_instance(7, 3, 4.0, stream(111, s))
        got = xorsat_max_satisfied(inst, solver="exact")
        best = max(naive_xorsat_satisfied(inst.clauses.tolist(), inst.signs,
                                          [1 - 2 * b for b in cfg])
                   for cfg in itertools.product(range(2), repeat=7))
        assert got == best


def test_xorsat_anneal_matches_exact():
    inst = gen_xorsat_instance(14, 3, 5.0, stream(112))
    exact = xorsat_max_satisfied(inst, solver="exact")
    ann = xorsat_max_satisfied(inst, solver="anneal",
                               schedule=AnnealSchedule(sweeps=2000, restarts=8),
                               rng=stream(113))
    assert ann == exact


# ----------------------------------------------------------------------------
# sqrt(d) coefficient scaling


def test_sqrt_d_qcut_row_identity():
    out = sqrt_d_coefficient("qcut", 10, [4.0, 8.0], replicas=6, solver="exact",
                             rng=stream(114))
    assert out["problem"] == "qcut"
    assert [r["d"] for r in out["rows"]] == [4.0, 8.0]
    for row in out["rows"]:
        assert row["leading"] == pytest.approx(row["d"] / 4.0)
        assert row["scale"] == pytest.approx(math.sqrt(row["d"]) / 2.0)
        back = row["leading"] + row["scale"] * row["coefficient"]
        assert back == pytest.approx(row["value_mean"])


def test_sqrt_d_xorsat_leading_terms():
    out = sqrt_d_coefficient("xorsat", 10, [6.0], q_or_p=3, replicas=4,
                             solver="exact", rng=stream(115))
    row = out["rows"][0]
    assert row["leading"] == pytest.approx(1.0)  # d/(2p) = 6/6
    assert row["scale"] == pytest.approx(0.5 * math.sqrt(2.0))
    assert row["coefficient"] > 0  # max-XORSAT beats half the clauses


def test_sqrt_d_sbm_negative_coefficient():
    out = sqrt_d_coefficient("sbm_bisection", 12, [9.0], replicas=5,
                             solver="exact", xi=1.0, rng=stream(116))
    row = out["rows"][0]
    assert row["scale"] < 0  # planted signal lowers the bisection cost
    with pytest.raises(ValueError):
        sqrt_d_coefficient("sbm_bisection", 12, [1.0], xi=2.0)
    with pytest.raises(ValueError):
        sqrt_d_coefficient("tsp", 12, [4.0])


# ----------------------------------------------------------------------------
# ER vs regular


def test_er_vs_regular_small_exact():
    out = er_vs_regular(n=10, p=2, d=4, replicas=6, solver="exact", rng=stream(117))
    assert out["replicas"] == 6
    assert out["diff_over_sqrt_d"] == pytest.approx(abs(out["diff_mean"]) / 2.0)
    assert not out["exploratory"]
    cond = out["conditions"]
    assert cond["c2_ok"] and not cond["c1_ok"]
    assert cond["psi_max"] == pytest.approx(0.5)


def test_er_vs_regular_validation():
    with pytest.raises(ValueError):
        er_vs_regular(n=9, p=2, d=3)  # p does not divide n*d
    with pytest.raises(ValueError):
        er_vs_regular(n=8, p=2, d=4, ensemble="uniform")
    with pytest.raises(ValueError):
        er_vs_regular(n=8, p=3, d=3, kernel=xor_kernel(2))


def test_er_vs_regular_zero_degree():
    out = er_vs_regular(n=8, p=2, d=0, replicas=3, rng=stream(118))
    assert out["v_er"] == 0.0
    assert out["v_reg"] == 0.0
    assert out["diff_over_sqrt_d"] == 0.0


def test_er_vs_regular_generic_kernel_path():
    out = er_vs_regular(kernel=xor_kernel(3), n=9, p=3, d=3, replicas=4,
                        solver="exact", rng=stream(119))
    assert out["v_reg"] > 0  # maximized parity objective is positive
    assert "diff_mean" in out


# ----------------------------------------------------------------------------
# concentration


def test_concentration_scan_structure():
    out = concentration_scan("qcut", [8, 10], 4.0, replicas=12, solver="exact",
                             rng=stream(120))
    assert [r["n"] for r in out["rows"]] == [8, 10]
    for row in out["rows"]:
        assert row["var"] >= 0.0
        assert row["replicas"] == 12


def test_concentration_complete_graph_is_deterministic():
    out = concentration_scan("complete_qcut", [8], 0.0, replicas=5,
                             solver="exact", rng=stream(121))
    row = out["rows"][0]
    assert row["var"] == 0.0
    # K_8 max cut is the balanced complete bipartite count 16
    assert row["mean"] == pytest.approx(16.0 / 8.0)
    with pytest.raises(ValueError):
        concentration_scan("tsp", [8], 4.0)


# ----------------------------------------------------------------------------
# statistics helpers


def test_loglog_slope_exact_power_law():
    x = np.array([4.0, 8.0, 16.0, 32.0])
    assert loglog_slope(x, 3.0 * x ** -0.7) == pytest.approx(-0.7)
    with pytest.raises(ValueError):
        loglog_slope([1.0, 2.0], [0.0, 1.0])


def test_chi_square_uniform():
    flat = chi_square_uniform([50, 50, 50, 50])
    assert flat["stat"] == 0.0
    assert flat["p_value"] == pytest.approx(1.0)
    assert flat["dof"] == 3
    skew = chi_square_uniform([100, 10, 10, 10])
    assert skew["p_value"] < 1e-6


def test_f_test_variance_decrease():
    shrunk = f_test_variance_decrease(4.0, 1.0, 50, 50)
    assert shrunk["p_value"] < 1e-5
    grew = f_test_variance_decrease(1.0, 4.0, 50, 50)
    assert grew["p_value"] > 0.5
    assert f_test_variance_decrease(1.0, 0.0, 10, 10)["p_value"] == 0.0


# ----------------------------------------------------------------------------
# records, registry, replay


def test_record_round_trip():
    rec = run_cell("beta_schedule", {"d": 16.0, "delta": 0.1}, seed=7, cell=3)
    back = ExperimentRecord.from_dict(rec.to_dict())
    assert back == rec


def test_registry_is_consistent():
    assert set(EXPERIMENTS) == set(EXPERIMENT_PARAMS)
    with pytest.raises(ValueError):
        run_cell("nope", {}, seed=1)
    with pytest.raises(ValueError):
        run_cell("beta_schedule", {"d": 16.0, "gamma": 2.0}, seed=1)


def test_replay_bitwise_match():
    rec = run_cell("interpolation_gap",
                   {"n": 6, "d": 4.0, "beta": 0.7, "replicas": 6}, seed=42)
    out = replay_record(rec)
    assert out["match"]
    assert out["max_abs_diff"] == 0.0


def test_replay_detects_changed_seed():
    rec = run_cell("sqrt_d_coefficient",
                   {"problem": "qcut", "n": 8, "d": 4.0, "replicas": 4,
                    "solver": "exact"}, seed=5)
    rec2 = ExperimentRecord.from_dict(rec.to_dict())
    rec2.seed = 6
    out = replay_record(rec2)
    assert not out["match"]
