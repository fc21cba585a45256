"""Maximizers and finite-temperature diagnostics for hypergraph objectives.

`exact_max` enumerates the constraint set (vectorized lexicographic
blocks, deterministic lexicographic tie-break); `anneal_max` runs
Metropolis simulated annealing with restart batching, dispatching to a
monomial representation for q=2 and a kernel-table walker otherwise.
`log_partition` and the derivative checks quantify how fast
(1/n) log-partition / beta approaches the maximum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import engines
from .objectives import (Kernel, WeightTensor, hamiltonian, hamiltonian_block,
                         labels_to_pm1, pm1_to_labels)
from .rng import as_generator, spawn_seeds

__all__ = [
    "ConstraintSet",
    "SolveResult",
    "AnnealSchedule",
    "ConstraintEmptyError",
    "BudgetExceededError",
    "Monomials",
    "monomial_expansion",
    "exact_max",
    "anneal_max",
    "log_partition",
    "gibbs_stats",
    "entropy_derivative_check",
    "third_derivative_bound_check",
]

DEFAULT_BUDGET = 1 << 25


class ConstraintEmptyError(ValueError):
    """The constraint set is empty; a maximum over it is -inf by convention."""


class BudgetExceededError(ValueError):
    """Enumeration would walk more configurations than the budget allows."""


@dataclass(frozen=True)
class ConstraintSet:
    """Feasible configuration sets: all of X^n, balanced bisections, or
    fixed per-label counts."""

    kind: str
    counts: tuple | None = None

    @staticmethod
    def all() -> "ConstraintSet":
        return ConstraintSet(kind="all")

    @staticmethod
    def balanced_bisection() -> "ConstraintSet":
        return ConstraintSet(kind="balanced_bisection")

    @staticmethod
    def fixed_type_counts(counts) -> "ConstraintSet":
        return ConstraintSet(kind="fixed_type_counts", counts=tuple(int(c) for c in counts))

    def validate(self, n: int, q: int):
        if self.kind == "all":
            return
        if self.kind == "balanced_bisection":
            if q != 2:
                raise ValueError("balanced_bisection requires q=2")
            if n % 2 != 0:
                raise ValueError("balanced_bisection requires even n")
            return
        if self.kind == "fixed_type_counts":
            if self.counts is None or len(self.counts) != q:
                raise ValueError(f"fixed_type_counts needs a length-{q} count vector")
            if any(c < 0 for c in self.counts):
                raise ValueError("counts must be nonnegative")
            if sum(self.counts) != n:
                raise ConstraintEmptyError(
                    f"counts {self.counts} sum to {sum(self.counts)} != n={n}: empty constraint set")
            return
        raise ValueError(f"unknown constraint kind {self.kind!r}")

    def effective_counts(self, n: int, q: int):
        if self.kind == "balanced_bisection":
            return (n // 2, n // 2)
        if self.kind == "fixed_type_counts":
            return self.counts
        return None

    def contains(self, sigma, n: int, q: int) -> bool:
        sigma = np.asarray(sigma)
        counts = self.effective_counts(n, q)
        if counts is None:
            return True
        got = np.bincount(sigma, minlength=q)
        return bool(np.array_equal(got, np.array(counts)))

    def mask_block(self, configs: np.ndarray, n: int, q: int) -> np.ndarray:
        counts = self.effective_counts(n, q)
        if counts is None:
            return np.ones(configs.shape[0], dtype=bool)
        ok = np.ones(configs.shape[0], dtype=bool)
        for letter in range(q - 1):
            ok &= (configs == letter).sum(axis=1) == counts[letter]
        return ok

    def cardinality(self, n: int, q: int) -> int:
        counts = self.effective_counts(n, q)
        if counts is None:
            return q ** n
        total = math.factorial(n)
        for c in counts:
            total //= math.factorial(c)
        return total

    def log_cardinality(self, n: int, q: int) -> float:
        card = self.cardinality(n, q)
        if card == 0:
            raise ConstraintEmptyError("empty constraint set")
        return float(math.log(card))

    def random_member(self, n: int, q: int, rng) -> np.ndarray:
        gen = as_generator(rng)
        counts = self.effective_counts(n, q)
        if counts is None:
            return gen.integers(0, q, size=n).astype(np.int8)
        base = np.repeat(np.arange(q, dtype=np.int8), counts)
        gen.shuffle(base)
        return base


@dataclass
class SolveResult:
    value: float
    config: np.ndarray
    method: str
    n: int
    q: int
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric inverse-temperature ladder."""

    beta0: float = 0.1
    beta1: float = 20.0
    sweeps: int = 20000
    restarts: int = 8

    def ladder(self) -> np.ndarray:
        if self.beta0 <= 0 or self.beta1 < self.beta0:
            raise ValueError("need 0 < beta0 <= beta1")
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.sweeps == 1:
            return np.array([self.beta1])
        t = np.arange(self.sweeps) / (self.sweeps - 1)
        return self.beta0 * (self.beta1 / self.beta0) ** t

    def to_dict(self) -> dict:
        return {"beta0": self.beta0, "beta1": self.beta1,
                "sweeps": self.sweeps, "restarts": self.restarts}


# ----------------------------------------------------------------------------
# monomial (Fourier) representation for q = 2


@dataclass
class Monomials:
    """H(spins) = const + sum over monomials coeff * prod of +-1 spins."""

    n: int
    const: float
    groups: list  # list of (idx array (M, k), coeff array (M,)) for k >= 1

    def evaluate(self, spins) -> float:
        spins = np.asarray(spins, dtype=np.float64)
        total = self.const
        for idx, coeff in self.groups:
            total += float(coeff @ np.prod(spins[idx], axis=1))
        return total

    def max_degree(self) -> int:
        return max((idx.shape[1] for idx, _ in self.groups), default=0)


def monomial_expansion(weights: WeightTensor, kernel: Kernel) -> Monomials:
    """Expand a q=2 objective into +-1 monomials.

    A symmetric kernel on {+-1}^p is a combination of elementary
    symmetric products, so each weighted tuple contributes one monomial
    per vertex subset.  Exact: evaluating the result equals
    `hamiltonian` up to float addition order.
    """
    if kernel.q != 2:
        raise ValueError("monomial expansion requires q=2")
    p = kernel.p
    # Fourier coefficient for any position subset of size k
    fhat = np.zeros(p + 1)
    for x in itertools.product((0, 1), repeat=p):
        fx = kernel.table[x]
        s = 1 - 2 * np.array(x)
        for k in range(p + 1):
            fhat[k] += fx * np.prod(s[:k])
    fhat /= 2 ** p

    pf = math.factorial(p)
    const = 0.0
    acc: dict = {}
    for row, w in zip(weights.keys.tolist(), weights.values.tolist()):
        base = pf * w
        for k in range(p + 1):
            if fhat[k] == 0.0:
                continue
            if k == 0:
                const += base * fhat[0]
                continue
            for sub in itertools.combinations(row, k):
                acc[sub] = acc.get(sub, 0.0) + base * fhat[k]
    by_k: dict = {}
    for sub, c in acc.items():
        by_k.setdefault(len(sub), []).append((sub, c))
    groups = []
    for k in sorted(by_k):
        subs = sorted(by_k[k])
        idx = np.array([s for s, _ in subs], dtype=np.int64).reshape(-1, k)
        coeff = np.array([dict(subs)[s] for s, _ in subs])
        groups.append((idx, coeff))
    return Monomials(n=weights.n, const=const, groups=groups)


# ----------------------------------------------------------------------------
# exact enumeration


def _config_block(n: int, q: int, start: int, stop: int) -> np.ndarray:
    """Configurations start..stop-1 in lexicographic order (site 0 most significant)."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, n), dtype=np.int8)
    for site in range(n - 1, -1, -1):
        out[:, site] = idx % q
        idx //= q
    return out


def _iter_constraint_blocks(n: int, q: int, constraint: ConstraintSet, budget: int, m_rows: int):
    total = q ** n
    if total > budget:
        raise BudgetExceededError(
            f"enumeration walks q^n = {total} > budget {budget}; use anneal_max instead")
    chunk = max(1024, min(1 << 15, (1 << 23) // max(m_rows, 1)))
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        block = _config_block(n, q, start, stop)
        mask = constraint.mask_block(block, n, q)
        if mask.any():
            yield block[mask]


def exact_max(weights: WeightTensor, kernel: Kernel,
              constraint: ConstraintSet | None = None,
              budget: int = DEFAULT_BUDGET) -> SolveResult:
    """Exhaustive maximum over the constraint set.

    Ties are broken toward the lexicographically smallest configuration;
    the reported value is the hamiltonian re-evaluated at the reported
    configuration.  Raises ConstraintEmptyError for an empty set and
    BudgetExceededError when q^n exceeds the budget.
    """
    constraint = constraint or ConstraintSet.all()
    n, q = weights.n, kernel.q
    constraint.validate(n, q)
    best_val = -np.inf
    best_cfg = None
    seen = 0
    for block in _iter_constraint_blocks(n, q, constraint, budget, weights.m):
        seen += block.shape[0]
        vals = hamiltonian_block(weights, kernel, block)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best_cfg = block[k].copy()
    if best_cfg is None:
        raise ConstraintEmptyError("constraint set is empty (max over it is -inf)")
    value = hamiltonian(weights, kernel, best_cfg)
    return SolveResult(value=value, config=best_cfg, method="exact", n=n, q=q,
                       meta={"enumerated": seen, "budget": budget})


# ----------------------------------------------------------------------------
# annealing


def _anneal_monomials(mono: Monomials, schedule: AnnealSchedule, rng) -> np.ndarray:
    """Batched single-flip Metropolis over the monomial representation.

    Returns the best +-1 configuration found across restarts.
    """
    gen = as_generator(rng)
    n, R = mono.n, schedule.restarts
    spins = np.where(gen.random((R, n)) < 0.5, 1, -1).astype(np.float64)

    prods_parts = []
    col_lists = [[] for _ in range(n)]
    offset = 0
    for idx, coeff in mono.groups:
        prods_parts.append(coeff[None, :] * np.prod(spins[:, idx], axis=2))
        for col, row in enumerate(idx.tolist()):
            for v in row:
                col_lists[v].append(offset + col)
        offset += idx.shape[0]
    prods = (np.concatenate(prods_parts, axis=1) if prods_parts
             else np.zeros((R, 0)))
    site_cols = [np.array(c, dtype=np.int64) for c in col_lists]

    H = mono.const + prods.sum(axis=1)
    best_H = H.copy()
    best = spins.copy()
    for beta in schedule.ladder():
        for i in range(n):
            cols = site_cols[i]
            if cols.size == 0:
                continue
            delta = -2.0 * prods[:, cols].sum(axis=1)
            accept = delta >= 0
            neg = ~accept
            if neg.any():
                accept[neg] = gen.random(int(neg.sum())) < np.exp(beta * delta[neg])
            if accept.any():
                acc = np.flatnonzero(accept)
                spins[acc, i] *= -1
                H[acc] += delta[acc]
                prods[np.ix_(acc, cols)] *= -1
                improved = H > best_H
                if improved.any():
                    best_H[improved] = H[improved]
                    best[improved] = spins[improved]
    k = int(np.argmax(best_H))
    return best[k].astype(np.int8)


def _delta_recolor(weights, kernel, labels, site, new_label):
    """Hamiltonian change for recoloring one site (kernel-table path)."""
    rows = weights.incidence()[site]
    if rows.size == 0:
        return 0.0
    idx = weights.keys[rows]
    cur = labels[idx]
    pos = idx == site
    alt = cur.copy()
    alt[pos] = new_label
    q = kernel.q
    code_old = cur[:, 0].astype(np.int64)
    code_new = alt[:, 0].astype(np.int64)
    for j in range(1, weights.p):
        code_old = code_old * q + cur[:, j]
        code_new = code_new * q + alt[:, j]
    diff = kernel._flat[code_new] - kernel._flat[code_old]
    return float(math.factorial(weights.p) * (diff @ weights.values[rows]))


def _anneal_potts(weights: WeightTensor, kernel: Kernel, constraint: ConstraintSet,
                  schedule: AnnealSchedule, rng) -> np.ndarray:
    """Generic kernel-table annealer: recolor moves, or label swaps when
    the constraint fixes type counts."""
    gen = as_generator(rng)
    n, q = weights.n, kernel.q
    swap_moves = constraint.kind != "all"
    best_cfg, best_val = None, -np.inf
    for r in range(schedule.restarts):
        labels = constraint.random_member(n, q, gen).astype(np.int64)
        H = hamiltonian(weights, kernel, labels)
        for beta in schedule.ladder():
            for _ in range(n):
                if swap_moves:
                    i, j = gen.integers(0, n, size=2)
                    if labels[i] == labels[j]:
                        continue
                    d1 = _delta_recolor(weights, kernel, labels, i, labels[j])
                    old_i, old_j = labels[i], labels[j]
                    labels[i] = old_j
                    d2 = _delta_recolor(weights, kernel, labels, j, old_i)
                    delta = d1 + d2
                    if delta >= 0 or gen.random() < math.exp(beta * delta):
                        labels[j] = old_i
                        H += delta
                    else:
                        labels[i] = old_i
                else:
                    i = gen.integers(0, n)
                    new_label = (labels[i] + 1 + gen.integers(0, q - 1)) % q
                    delta = _delta_recolor(weights, kernel, labels, i, new_label)
                    if delta >= 0 or gen.random() < math.exp(beta * delta):
                        labels[i] = new_label
                        H += delta
                if H > best_val:
                    best_val = H
                    best_cfg = labels.copy()
    return best_cfg.astype(np.int8)


def anneal_max(weights: WeightTensor, kernel: Kernel,
               constraint: ConstraintSet | None = None,
               schedule: AnnealSchedule | None = None,
               rng=None) -> SolveResult:
    """Simulated-annealing maximum (best over restarts).

    q=2 objectives run on the monomial representation (pairwise ones
    with count constraints use the dense coupling engine with swap
    moves); other alphabets use the kernel-table walker.  The reported
    value is always the hamiltonian re-evaluated at the reported
    configuration, so it never exceeds `exact_max` on the same instance.
    """
    constraint = constraint or ConstraintSet.all()
    schedule = schedule or AnnealSchedule()
    n, q = weights.n, kernel.q
    constraint.validate(n, q)
    if constraint.cardinality(n, q) == 0:
        raise ConstraintEmptyError("constraint set is empty (max over it is -inf)")
    gen = as_generator(rng)

    engine = "potts_table"
    if q == 2:
        mono = monomial_expansion(weights, kernel)
        if constraint.kind == "all":
            cfg_pm = _anneal_monomials(mono, schedule, gen)
            labels = pm1_to_labels(cfg_pm)
            engine = "monomials"
        elif mono.max_degree() <= 2:
            J, h, const = engines.ising_from_monomials(mono)
            init = np.stack([labels_to_pm1(constraint.random_member(n, q, gen))
                             for _ in range(schedule.restarts)])
            out = engines.anneal_ising(J, h=h, const=const, restarts=schedule.restarts,
                                       sweeps=schedule.sweeps, beta0=schedule.beta0,
                                       beta1=schedule.beta1, rng=gen, swap_moves=True,
                                       init=init)
            labels = pm1_to_labels(out["config"][0])
            engine = "ising_dense"
        else:
            labels = _anneal_potts(weights, kernel, constraint, schedule, gen)
    else:
        labels = _anneal_potts(weights, kernel, constraint, schedule, gen)
    value = hamiltonian(weights, kernel, labels)
    return SolveResult(value=value, config=np.asarray(labels, dtype=np.int8),
                       method="anneal", n=n, q=q,
                       meta={"engine": engine, "schedule": schedule.to_dict()})


# ----------------------------------------------------------------------------
# finite-temperature quantities


def log_partition(weights: WeightTensor, kernel: Kernel,
                  constraint: ConstraintSet | None = None,
                  beta: float = 1.0, budget: int = DEFAULT_BUDGET) -> float:
    """Phi(beta) = (1/n) log sum over the constraint set of exp(beta H)."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    stats = gibbs_stats(weights, kernel, constraint=constraint, beta=beta, budget=budget)
    return stats["phi"]


def gibbs_stats(weights: WeightTensor, kernel: Kernel,
                constraint: ConstraintSet | None = None, beta: float = 1.0,
                moment_tuple=None, budget: int = DEFAULT_BUDGET) -> dict:
    """Streaming log-partition plus Gibbs averages.

    Returns phi = (1/n) log Z, <H>, the Gibbs entropy S = log Z - beta <H>,
    the count |A_n|, and when `moment_tuple` is given the Gibbs moments
    <f^k>, k = 1, 2, 3, of the kernel evaluated at that index tuple.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    constraint = constraint or ConstraintSet.all()
    n, q = weights.n, kernel.q
    constraint.validate(n, q)

    tup = None
    if moment_tuple is not None:
        tup = np.array([int(v) for v in moment_tuple], dtype=np.int64)
        if tup.shape != (weights.p,):
            raise ValueError(f"moment tuple must have {weights.p} entries")

    shift = -np.inf
    z_acc = 0.0
    h_acc = 0.0
    f_acc = np.zeros(3)
    count = 0
    for block in _iter_constraint_blocks(n, q, constraint, budget, weights.m):
        count += block.shape[0]
        hvals = hamiltonian_block(weights, kernel, block)
        logits = beta * hvals
        bmax = float(logits.max())
        if bmax > shift:
            scale = math.exp(shift - bmax) if np.isfinite(shift) else 0.0
            z_acc *= scale
            h_acc *= scale
            f_acc *= scale
            shift = bmax
        wts = np.exp(logits - shift)
        z_acc += float(wts.sum())
        h_acc += float(wts @ hvals)
        if tup is not None:
            fv = kernel.table[tuple(block[:, tup].T.astype(np.int64))]
            for k in range(3):
                f_acc[k] += float(wts @ fv ** (k + 1))
    if count == 0:
        raise ConstraintEmptyError("constraint set is empty")
    log_z = shift + math.log(z_acc)
    h_mean = h_acc / z_acc
    out = {
        "phi": log_z / n,
        "log_z": log_z,
        "h_mean": h_mean,
        "entropy": log_z - beta * h_mean,
        "count": count,
    }
    if tup is not None:
        out["f_moments"] = f_acc / z_acc
    return out


def entropy_derivative_check(weights: WeightTensor, kernel: Kernel,
                             constraint: ConstraintSet | None = None,
                             beta: float = 1.0, h: float = 1e-2,
                             budget: int = DEFAULT_BUDGET) -> dict:
    """Compare d/d beta of Phi(beta)/beta with -S(mu_beta)/(n beta^2).

    The left side is a central finite difference; equality up to O(h^2)
    is the exact finite-n identity behind the finite-temperature
    sandwich.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if not (0 < h < beta):
        raise ValueError(f"need 0 < h < beta, got h={h}, beta={beta}")
    n = weights.n
    phi_plus = log_partition(weights, kernel, constraint, beta + h, budget=budget)
    phi_minus = log_partition(weights, kernel, constraint, beta - h, budget=budget)
    lhs = (phi_plus / (beta + h) - phi_minus / (beta - h)) / (2 * h)
    stats = gibbs_stats(weights, kernel, constraint=constraint, beta=beta, budget=budget)
    rhs = -stats["entropy"] / (n * beta ** 2)
    return {"lhs": lhs, "rhs": rhs, "entropy": stats["entropy"], "phi": stats["phi"]}


def _g_functional(weights: WeightTensor, kernel: Kernel, constraint, beta: float,
                  budget: int) -> float:
    """G = Phi/beta; at beta=0 the linear limit <H>_uniform / n (the
    divergent constant drops out of every finite difference)."""
    if beta == 0.0:
        stats = gibbs_stats(weights, kernel, constraint=constraint, beta=0.0, budget=budget)
        return stats["h_mean"] / weights.n
    return log_partition(weights, kernel, constraint, beta, budget=budget) / beta


def third_derivative_bound_check(weights: WeightTensor, kernel: Kernel, beta: float,
                                 tup, constraint: ConstraintSet | None = None,
                                 h: float = 1e-2, budget: int = DEFAULT_BUDGET) -> dict:
    """Third derivative of G in one stored weight vs the Gibbs-cumulant formula.

    fd3 is the central third difference at steps h and h/2 with one
    Richardson extrapolation; `analytic` is
    beta^2 (p!)^3 / n * (<f^3> - 3 <f^2><f> + 2 <f>^3) at the tuple and
    `bound` the uniform envelope 6 beta^2 (p!)^3 ||f||_inf^3 / n.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    constraint = constraint or ConstraintSet.all()
    tup = tuple(int(v) for v in tup)
    n, p = weights.n, weights.p
    w0 = weights.value_at(tup)

    def g_at(delta: float) -> float:
        return _g_functional(weights.with_entry(tup, w0 + delta), kernel, constraint,
                             beta, budget)

    def fd3(step: float) -> float:
        return ((g_at(2 * step) - 2 * g_at(step) + 2 * g_at(-step) - g_at(-2 * step))
                / (2 * step ** 3))

    fd_h = fd3(h)
    fd_h2 = fd3(h / 2)
    richardson = (4 * fd_h2 - fd_h) / 3

    pf3 = math.factorial(p) ** 3
    if beta == 0.0:
        analytic = 0.0
    else:
        stats = gibbs_stats(weights, kernel, constraint=constraint, beta=beta,
                            moment_tuple=tup, budget=budget)
        m1, m2, m3 = stats["f_moments"]
        analytic = beta ** 2 * pf3 / n * (m3 - 3 * m2 * m1 + 2 * m1 ** 3)
    bound = 6 * beta ** 2 * pf3 * kernel.max_abs ** 3 / n
    return {"fd3": fd_h, "fd3_half": fd_h2, "fd3_richardson": richardson,
            "analytic": analytic, "bound": bound}
