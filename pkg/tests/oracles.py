"""Independent naive reference implementations used to pin the fast paths.

Everything here walks plain Python tuples with itertools, no shared code
with the package internals beyond numpy scalars.  Deliberately slow.
"""

import itertools
import math


def ordered_tuple_hamiltonian(n, p, weight_lookup, kernel_value, sigma):
    """Sum of w(sorted(t)) * f(sigma[t]) over ordered tuples of distinct indices.

    weight_lookup maps a sorted index tuple to a weight (0 when absent);
    kernel_value takes p labels.
    """
    total = 0.0
    for t in itertools.permutations(range(n), p):
        w = weight_lookup(tuple(sorted(t)))
        if w:
            total += w * kernel_value(*(sigma[i] for i in t))
    return total


def enumerate_max(n, q, evaluate, feasible=None):
    """Exhaustive max over {0..q-1}^n in lexicographic order, first max kept."""
    best = None
    best_cfg = None
    for cfg in itertools.product(range(q), repeat=n):
        if feasible is not None and not feasible(cfg):
            continue
        v = evaluate(cfg)
        if best is None or v > best:
            best = v
            best_cfg = cfg
    return best, best_cfg


def naive_log_partition(n, q, evaluate, beta, feasible=None):
    """(1/n) log sum exp(beta * H) with a max shift, plain Python floats."""
    values = []
    for cfg in itertools.product(range(q), repeat=n):
        if feasible is not None and not feasible(cfg):
            continue
        values.append(beta * evaluate(cfg))
    shift = max(values)
    return (shift + math.log(math.fsum(math.exp(v - shift) for v in values))) / n


def naive_cut(edges, sigma):
    return sum(1 for i, j in edges if sigma[i] != sigma[j])


def naive_bisection_min_cut(n, edges):
    """Minimum cut over balanced +-1 assignments (n even), by enumeration."""
    best = None
    half = n // 2
    for support in itertools.combinations(range(n), half):
        sigma = [1] * n
        for i in support:
            sigma[i] = 0
        c = naive_cut(edges, sigma)
        if best is None or c < best:
            best = c
    return best


def naive_xorsat_satisfied(clauses, signs, spins):
    sat = 0
    for t, s in zip(clauses, signs):
        prod = s
        for i in t:
            prod *= spins[i]
        if prod == 1:
            sat += 1
    return sat


def naive_psi(table, m_vec):
    """Sum over all p-tuples of labels of f(j1..jp) * prod m_j."""
    p = len(table.shape) if hasattr(table, "shape") else None
    q = len(m_vec)
    total = 0.0
    for idx in itertools.product(range(q), repeat=p):
        w = 1.0
        for j in idx:
            w *= m_vec[j]
        total += float(table[idx]) * w
    return total


def dyadic_weights(rng, keys, denom=64, lo=-64, hi=64):
    """Random weights k/denom with k integer; exact in binary floating point."""
    ks = rng.integers(lo, hi + 1, size=len(keys))
    return [k / denom for k in ks]
