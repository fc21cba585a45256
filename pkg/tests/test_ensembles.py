import collections
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperglass.ensembles import (PUniformHypergraph, gen_configuration_regular,
                                  gen_er_hypergraph, gen_poisson_cloning,
                                  gen_sbm, gen_two_stage_regular,
                                  poisson_cloning_mean, read_hypergraph_text,
                                  read_sbm_text, two_stage_partition,
                                  write_hypergraph_text, write_sbm_text)
from hyperglass.rng import stream


def test_er_edges_are_sorted_distinct_subsets():
    g = gen_er_hypergraph(12, 3, 6.0, stream(1))
    assert g.p == 3 and not g.multi
    for e in g.edges:
        assert len(e) == 3
        assert list(e) == sorted(set(e))
        assert 0 <= e[0] and e[-1] < 12


def test_er_mean_edge_count():
    # E[m] = C(n,p) * d (p-1)! / n^{p-1}
    n, p, d = 20, 2, 4.0
    target = math.comb(n, p) * d / n
    counts = [gen_er_hypergraph(n, p, d, stream(2, k)).m for k in range(400)]
    mean = np.mean(counts)
    sem = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - target) < 4 * sem + 1e-9


def test_er_probability_clamps_with_flag():
    g = gen_er_hypergraph(8, 2, 100.0, stream(3))
    assert g.meta["prob_clamped"] is True
    assert g.m == math.comb(8, 2)  # complete graph
    g2 = gen_er_hypergraph(8, 2, 2.0, stream(3))
    assert g2.meta["prob_clamped"] is False


def test_er_large_n_path_matches_mean():
    # n > 64 goes through the binomial + rejection path
    n, d = 80, 6.0
    target = math.comb(n, 2) * d / n
    counts = [gen_er_hypergraph(n, 2, d, stream(4, k)).m for k in range(200)]
    mean = np.mean(counts)
    sem = np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert abs(mean - target) < 4 * sem + 1e-9


def test_er_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_er_hypergraph(5, 2, -1.0, stream(5))
    with pytest.raises(ValueError):
        gen_er_hypergraph(3, 4, 1.0, stream(5))


@pytest.mark.parametrize("n,p,d", [(12, 2, 3), (12, 3, 4), (10, 5, 5), (9, 3, 2)])
def test_configuration_model_degrees_exact(n, p, d):
    g = gen_configuration_regular(n, p, d, stream(6, n, p, d))
    assert g.multi
    assert g.m == n * d // p
    deg = collections.Counter()
    for e in g.edges:
        deg.update(e)
    assert all(deg[v] == d for v in range(n))


def test_configuration_model_divisibility():
    with pytest.raises(ValueError):
        gen_configuration_regular(5, 2, 3, stream(7))


def test_two_stage_partition_is_partition():
    groups = two_stage_partition(12, 6, 3, stream(8))
    flat = [v for grp in groups for v in grp]
    assert sorted(flat) == list(range(12))
    assert all(len(grp) == 3 for grp in groups)


def test_two_stage_partition_uniform_pairing():
    # m_red=4, p=2: three possible perfect matchings, each should appear ~1/3
    counts = collections.Counter()
    trials = 3000
    for k in range(trials):
        groups = tuple(two_stage_partition(4, 2, 2, stream(9, k)))
        counts[groups] += 1
    assert len(counts) == 3
    for c in counts.values():
        assert abs(c / trials - 1 / 3) < 0.05


def test_poisson_cloning_mean_and_short_edges():
    n, p, d = 30, 3, 5.0
    lam = poisson_cloning_mean(n, p, d)
    assert lam == pytest.approx(2.0 * 5.0 / 900 * math.comb(29, 2))
    totals = []
    for k in range(300):
        g = gen_poisson_cloning(n, p, d, stream(10, k))
        clone_total = sum(g.meta["clone_counts"])
        totals.append(clone_total)
        sizes = [len(e) for e in g.edges]
        # at most one short edge, at the end of the matching
        assert sum(1 for s in sizes if s < p) == g.meta["short_edges"]
        assert sum(sizes) == clone_total
    mean = np.mean(totals)
    sem = np.std(totals, ddof=1) / math.sqrt(len(totals))
    assert abs(mean - n * lam) < 4 * sem + 1e-9


def test_two_stage_regular_structure():
    out = gen_two_stage_regular(24, 2, 6, C=0.8, rng=stream(11))
    assert out.g1.m == 24 * 6 // 2
    # G1 splits into blue-touched and all-red kept edges
    assert out.g_blue.m + out.g_red_kept.m == out.g1.m
    # G2 = kept + rematched
    assert out.g2.m == out.g_red_kept.m + out.g_rematched.m
    assert sorted(out.g2.edges) == sorted(out.g_red_kept.edges + out.g_rematched.edges)
    assert out.z.shape == (24,)
    assert np.all(out.z >= 0)


def test_two_stage_regular_collapses_at_large_C():
    # Poisson mean near 0 makes nearly all clones BLUE: G2 is tiny
    d = 8
    C = (d - 1e-6) / (math.sqrt(d) * math.log(d))
    out = gen_two_stage_regular(20, 2, d, C=C, rng=stream(12))
    assert out.g2.m <= out.g1.m
    assert out.meta["n_blue_clones"] >= 0.9 * 20 * d


def test_sbm_labels_balanced_and_rates():
    n, a, b = 40, 12.0, 4.0
    within = across = 0
    within_pairs = across_pairs = 0
    for k in range(200):
        g = gen_sbm(n, a, b, stream(13, k))
        assert int(g.labels.sum()) == 0
        same = 0
        for i, j in g.edges:
            if g.labels[i] == g.labels[j]:
                same += 1
        within += same
        across += g.m - same
        within_pairs += 2 * math.comb(n // 2, 2)
        across_pairs += (n // 2) ** 2
    assert within / within_pairs == pytest.approx(a / n, rel=0.05)
    assert across / across_pairs == pytest.approx(b / n, rel=0.05)


def test_sbm_rejects_invalid():
    with pytest.raises(ValueError):
        gen_sbm(9, 4.0, 2.0, stream(14))  # odd n
    with pytest.raises(ValueError):
        gen_sbm(10, 20.0, 2.0, stream(14))  # a/n > 1


def test_hypergraph_text_roundtrip(tmp_path):
    g = gen_er_hypergraph(10, 3, 4.0, stream(15))
    path = tmp_path / "g.txt"
    write_hypergraph_text(g, path)
    back = read_hypergraph_text(path)
    assert back.p == g.p and back.n == g.n and back.multi == g.multi
    assert sorted(back.edges) == sorted(g.edges)


def test_sbm_text_roundtrip(tmp_path):
    g = gen_sbm(12, 8.0, 2.0, stream(16))
    path = tmp_path / "sbm.txt"
    write_sbm_text(g, path)
    back = read_sbm_text(path)
    assert back.n == g.n
    assert np.array_equal(back.labels, g.labels)
    assert sorted(back.edges) == sorted(g.edges)


def test_read_hypergraph_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 5\n0 1\n")
    with pytest.raises(ValueError):
        read_hypergraph_text(path)
    path.write_text("2 5 2 0\n0 1\n")
    with pytest.raises(ValueError):
        read_hypergraph_text(path)  # m mismatch


@settings(max_examples=30, deadline=None)
@given(n=st.integers(4, 16), seed=st.integers(0, 10 ** 6))
def test_configuration_roundtrip_multigraph(tmp_path_factory, n, seed):
    g = gen_configuration_regular(n, 2, 4, stream(seed))
    path = tmp_path_factory.mktemp("cfg") / "g.txt"
    write_hypergraph_text(g, path)
    back = read_hypergraph_text(path)
    assert back.multi
    assert sorted(back.edges) == sorted(g.edges)
