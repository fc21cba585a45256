"""Gaussian disorder objects and the surrogate optimization problems.

Provides symmetric Gaussian p-tensors (three sampling modes), GOE
matrices, the level-constrained surrogate T and its degree-corrected
variant S, Monte Carlo ground-state densities for the mean-field +-1
models, the planted-partition surrogate, and the finite-size
extrapolation used to quote limiting constants.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import engines
from .objectives import Kernel, WeightTensor, hamiltonian_block
from .rng import as_generator, spawn_seeds
from .solvers import (AnnealSchedule, ConstraintSet, Monomials, anneal_max,
                      exact_max)

__all__ = [
    "GaussianTensor",
    "gen_standard_symmetric_tensor",
    "gen_kernel_variance_tensor",
    "gen_iid_array_tensor",
    "gen_goe",
    "complete_unit_weights",
    "surrogate_t",
    "surrogate_t_profile",
    "combined_from_profile",
    "combined_direct",
    "degree_fields",
    "surrogate_s",
    "pspin_ground_state",
    "sbm_surrogate",
    "sbm_constraint_gap",
    "ground_state_extrapolate",
]


# ----------------------------------------------------------------------------
# tensors


@dataclass
class GaussianTensor:
    """Symmetric Gaussian p-tensor stored on sorted index tuples.

    mode "standard_symmetric" and "kernel_variance" store one value per
    strictly increasing tuple (variance 1/(p-1)! resp. kappa2); the
    symmetric extension to other orderings is implicit and repeated
    indices read as 0.  mode "iid_array" stores orbit sums over
    nondecreasing tuples: each value is the sum of an i.i.d. standard
    normal array over the orderings of that multiset (variance = orbit
    size), which reproduces the unsymmetrized array's sums against any
    symmetric integrand exactly in law.
    """

    n: int
    p: int
    mode: str
    keys: np.ndarray
    values: np.ndarray
    kappa2: float = float("nan")
    _lookup: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.keys = np.asarray(self.keys, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.keys.shape != (self.values.size, self.p):
            raise ValueError("keys/values shape mismatch")

    @property
    def distinct_mask(self) -> np.ndarray:
        if self.mode != "iid_array":
            return np.ones(self.values.size, dtype=bool)
        return (np.diff(self.keys, axis=1) > 0).all(axis=1)

    def value_at(self, tup) -> float:
        """Symmetric lookup: any ordering of a stored tuple."""
        key = tuple(sorted(int(v) for v in tup))
        if self._lookup is None:
            self._lookup = {tuple(row): i for i, row in enumerate(self.keys.tolist())}
        idx = self._lookup.get(key)
        if idx is None:
            if self.mode != "iid_array" and len(set(key)) < self.p:
                return 0.0
            raise KeyError(f"tuple {tup} out of range for n={self.n}")
        return float(self.values[idx])

    def as_weight_tensor(self, scale: float = 1.0) -> WeightTensor:
        """Weights w_s such that the hamiltonian equals scale * the
        ordered-distinct-tuple sum of (tensor * kernel)."""
        mask = self.distinct_mask
        values = self.values[mask] * scale
        if self.mode == "iid_array":
            values = values / math.factorial(self.p)
        return WeightTensor(n=self.n, p=self.p, keys=self.keys[mask], values=values)


def _distinct_keys(n: int, p: int) -> np.ndarray:
    return np.array(list(itertools.combinations(range(n), p)),
                    dtype=np.int64).reshape(-1, p)


def gen_standard_symmetric_tensor(n: int, p: int, rng=None,
                                  via_permutation_sum: bool = False) -> GaussianTensor:
    """Distinct-tuple entries of variance 1/(p-1)!.

    The default samples each sorted tuple directly.  With
    `via_permutation_sum` the entry is (sqrt(p)/p!) * the sum of an
    i.i.d. standard normal array over all index permutations, which has
    the same law; it is kept for cross-validation and needs O(n^p)
    memory.
    """
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    gen = as_generator(rng)
    keys = _distinct_keys(n, p)
    if via_permutation_sum:
        if n ** p > (1 << 22):
            raise ValueError("permutation-sum construction is for small n^p only")
        v = gen.standard_normal((n,) * p)
        vals = np.zeros(keys.shape[0])
        for perm in itertools.permutations(range(p)):
            vals += v[tuple(keys[:, j] for j in perm)]
        vals *= math.sqrt(p) / math.factorial(p)
    else:
        sd = 1.0 / math.sqrt(math.factorial(p - 1))
        vals = gen.standard_normal(keys.shape[0]) * sd
    return GaussianTensor(n=n, p=p, mode="standard_symmetric", keys=keys, values=vals,
                          kappa2=1.0 / math.factorial(p - 1))


def gen_kernel_variance_tensor(n: int, p: int, kappa2: float, rng=None) -> GaussianTensor:
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    if kappa2 < 0:
        raise ValueError("kappa2 must be >= 0")
    gen = as_generator(rng)
    keys = _distinct_keys(n, p)
    vals = gen.standard_normal(keys.shape[0]) * math.sqrt(kappa2)
    return GaussianTensor(n=n, p=p, mode="kernel_variance", keys=keys, values=vals,
                          kappa2=kappa2)


def _orbit_size(row) -> int:
    size = math.factorial(len(row))
    run = 1
    for a, b in zip(row, row[1:]):
        if a == b:
            run += 1
        else:
            size //= math.factorial(run)
            run = 1
    return size // math.factorial(run)


def gen_iid_array_tensor(n: int, p: int, rng=None) -> GaussianTensor:
    """Orbit sums of an i.i.d. standard normal n^p array on sorted multisets."""
    if n < 1:
        raise ValueError("need n >= 1")
    gen = as_generator(rng)
    keys = np.array(list(itertools.combinations_with_replacement(range(n), p)),
                    dtype=np.int64).reshape(-1, p)
    orbit = np.array([_orbit_size(row) for row in keys.tolist()], dtype=np.float64)
    vals = gen.standard_normal(keys.shape[0]) * np.sqrt(orbit)
    return GaussianTensor(n=n, p=p, mode="iid_array", keys=keys, values=vals)


def gen_goe(n: int, rng=None) -> np.ndarray:
    """Symmetric Gaussian matrix: off-diagonal variance 1, diagonal variance 2."""
    gen = as_generator(rng)
    g = gen.standard_normal((n, n))
    return (g + g.T) / math.sqrt(2.0)


# ----------------------------------------------------------------------------
# level-constrained surrogates


def complete_unit_weights(n: int, p: int) -> WeightTensor:
    """Unit weight on every sorted distinct tuple (level-statistic support)."""
    keys = _distinct_keys(n, p)
    return WeightTensor(n=n, p=p, keys=keys, values=np.ones(keys.shape[0]))


def default_bin_width(n: int, p: int) -> float:
    """One step of the level statistic for integer-valued kernels: p!/n^p."""
    return math.factorial(p) / n ** p


def _multiset_sum_block(keys: np.ndarray, values: np.ndarray, kernel: Kernel,
                        configs: np.ndarray) -> np.ndarray:
    """sum_s values_s * f(labels at key s) for keys that may repeat indices."""
    q = kernel.q
    lab = configs[:, keys]  # (B, K, p)
    codes = lab[:, :, 0].astype(np.int64)
    for j in range(1, keys.shape[1]):
        codes = codes * q + lab[:, :, j]
    return kernel._flat[codes] @ values


def _iter_pm_blocks(n: int, q: int, constraint: ConstraintSet, chunk: int = 1 << 14):
    total = q ** n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        block = np.empty((idx.size, n), dtype=np.int8)
        rem = idx
        for site in range(n - 1, -1, -1):
            block[:, site] = rem % q
            rem = rem // q
        mask = constraint.mask_block(block, n, q)
        if mask.any():
            yield block[mask]


def surrogate_t_profile(tensor: GaussianTensor, kernel: Kernel,
                        bin_width: float | None = None,
                        constraint: ConstraintSet | None = None,
                        include_diagonal: bool = False,
                        budget: int = 1 << 22) -> dict:
    """Exhaustive level profile of the surrogate.

    Returns bin index -> T value, where the level statistic is
    (1/n^p) * sum over ordered distinct tuples of f and T is (1/n) times
    the constrained maximum of the Gaussian term.  Bins never reached
    are absent (the maximum over an empty set reads as -inf).
    """
    n, p, q = tensor.n, tensor.p, kernel.q
    constraint = constraint or ConstraintSet.all()
    constraint.validate(n, q)
    if q ** n > budget:
        raise ValueError(f"profile enumeration needs q^n <= {budget}")
    width = bin_width if bin_width is not None else default_bin_width(n, p)
    w_level = complete_unit_weights(n, p)
    w_gauss = tensor.as_weight_tensor(scale=1.0 / n ** ((p - 1) / 2.0))
    diag_keys = diag_vals = None
    if include_diagonal:
        if tensor.mode != "iid_array":
            raise ValueError("include_diagonal requires an iid_array tensor")
        mask = ~tensor.distinct_mask
        diag_keys = tensor.keys[mask]
        diag_vals = tensor.values[mask] / n ** ((p - 1) / 2.0)
    bins: dict[int, float] = {}
    for block in _iter_pm_blocks(n, q, constraint):
        levels = hamiltonian_block(w_level, kernel, block) / n ** p
        gvals = hamiltonian_block(w_gauss, kernel, block)
        if diag_keys is not None and diag_keys.size:
            gvals = gvals + _multiset_sum_block(diag_keys, diag_vals, kernel, block)
        idx = np.rint(levels / width).astype(np.int64)
        for k in np.unique(idx):
            sel = idx == k
            best = float(gvals[sel].max()) / n
            if best > bins.get(int(k), -np.inf):
                bins[int(k)] = best
    return {"width": width, "bins": bins, "n": n, "p": p}


def surrogate_t(tensor: GaussianTensor, kernel: Kernel, alpha: float | None = None,
                bin_width: float | None = None,
                constraint: ConstraintSet | None = None,
                solver: str = "exact", schedule: AnnealSchedule | None = None,
                rng=None, include_diagonal: bool = False,
                budget: int = 1 << 22) -> float:
    """Surrogate maximum at one level (or unconstrained when alpha is None).

    The level constraint keeps configurations whose statistic falls in
    the same bin as alpha; an empty bin returns -inf.
    """
    n, p = tensor.n, tensor.p
    if alpha is None and not include_diagonal and solver == "anneal":
        w = tensor.as_weight_tensor(scale=1.0 / n ** ((p - 1) / 2.0))
        res = anneal_max(w, kernel, constraint=constraint, schedule=schedule, rng=rng)
        return res.value / n
    profile = surrogate_t_profile(tensor, kernel, bin_width=bin_width,
                                  constraint=constraint,
                                  include_diagonal=include_diagonal, budget=budget)
    if alpha is None:
        return max(profile["bins"].values(), default=-np.inf)
    k = int(np.rint(alpha / profile["width"]))
    return profile["bins"].get(k, -np.inf)


def combined_from_profile(profile: dict, d: float) -> float:
    """max over levels of (alpha d + sqrt(d) T^alpha) from a stored profile."""
    width = profile["width"]
    best = -np.inf
    for k, t in profile["bins"].items():
        best = max(best, k * width * d + math.sqrt(d) * t)
    return best


def combined_direct(tensor: GaussianTensor, kernel: Kernel, d: float,
                    constraint: ConstraintSet | None = None,
                    budget: int = 1 << 25) -> float:
    """(1/n) max of the recombined objective
    d * sum f / n^{p-1} + sqrt(d) * sum J f / n^{(p-1)/2}, both sums over
    ordered distinct tuples."""
    n, p = tensor.n, tensor.p
    w_level = complete_unit_weights(n, p)
    w = tensor.as_weight_tensor(scale=math.sqrt(d) / n ** ((p - 1) / 2.0))
    combined = WeightTensor(n=n, p=p, keys=w_level.keys,
                            values=d / n ** (p - 1) * w_level.values)
    # supports coincide (all distinct tuples), so add value arrays directly
    lookup = {tuple(k): i for i, k in enumerate(map(tuple, combined.keys.tolist()))}
    vals = combined.values.copy()
    for row, v in zip(w.keys.tolist(), w.values):
        vals[lookup[tuple(row)]] += v
    combined = WeightTensor(n=n, p=p, keys=combined.keys, values=vals)
    res = exact_max(combined, kernel, constraint=constraint, budget=budget)
    return res.value / n


# ----------------------------------------------------------------------------
# degree-corrected surrogate


def degree_fields(tensor: GaussianTensor) -> np.ndarray:
    """G_i = (p-1)! * sum over sorted distinct tuples containing i of J_s,
    normalized by n^{(p-1)/2}; equals the unrestricted ordered sum over
    the remaining p-1 indices."""
    n, p = tensor.n, tensor.p
    mask = tensor.distinct_mask
    keys = tensor.keys[mask]
    vals = tensor.values[mask]
    if tensor.mode == "iid_array":
        vals = vals / math.factorial(p)
    g = np.zeros(n)
    for j in range(p):
        np.add.at(g, keys[:, j], vals)
    return g * math.factorial(p - 1) / n ** ((p - 1) / 2.0)


def surrogate_s(tensor: GaussianTensor, kernel: Kernel,
                constraint: ConstraintSet | None = None,
                solver: str = "exact", schedule: AnnealSchedule | None = None,
                rng=None, budget: int = 1 << 25) -> float:
    """Degree-corrected surrogate: (1/n) max of
    sum J f / n^{(p-1)/2} - (p/n^{p-1}) sum G_{i_1} f.

    Both terms fold into one weight tensor (per sorted tuple:
    J_s/n^{(p-1)/2} - (sum of G_i over the tuple)/n^{p-1}), so exact and
    annealed solvers apply unchanged.
    """
    n, p = tensor.n, tensor.p
    g = degree_fields(tensor)
    mask = tensor.distinct_mask
    keys = tensor.keys[mask]
    j_vals = tensor.values[mask]
    if tensor.mode == "iid_array":
        j_vals = j_vals / math.factorial(p)
    tuple_g = g[keys].sum(axis=1)
    w = WeightTensor(n=n, p=p, keys=keys,
                     values=j_vals / n ** ((p - 1) / 2.0) - tuple_g / n ** (p - 1))
    if solver == "anneal":
        res = anneal_max(w, kernel, constraint=constraint, schedule=schedule, rng=rng)
    else:
        res = exact_max(w, kernel, constraint=constraint, budget=budget)
    return res.value / n


# ----------------------------------------------------------------------------
# p-spin ground state


def _pspin_monomials(n: int, p: int, rng) -> Monomials:
    """+-1 reduction of the unsymmetrized i.i.d. Gaussian n^p array.

    Orbit sums land on the odd-multiplicity support of each multiset
    (even powers of +-1 spins drop out), giving an exact-in-law monomial
    form of sum over all tuples of G * prod sigma.
    """
    gen = as_generator(rng)
    acc: dict[tuple, float] = {}
    const = 0.0
    for row in itertools.combinations_with_replacement(range(n), p):
        w = gen.standard_normal() * math.sqrt(_orbit_size(row))
        support = tuple(v for v in sorted(set(row))
                        if row.count(v) % 2 == 1)
        if support:
            acc[support] = acc.get(support, 0.0) + w
        else:
            const += w
    by_k: dict[int, list] = {}
    for sub, c in acc.items():
        by_k.setdefault(len(sub), []).append((sub, c))
    groups = []
    for k in sorted(by_k):
        subs = sorted(by_k[k])
        idx = np.array([s for s, _ in subs], dtype=np.int64).reshape(-1, k)
        coeff = np.array([c for _, c in subs])
        groups.append((idx, coeff))
    return Monomials(n=n, const=const, groups=groups)


def _mono_eval_block(mono: Monomials, spins: np.ndarray) -> np.ndarray:
    vals = np.full(spins.shape[0], mono.const)
    for idx, coeff in mono.groups:
        vals += np.prod(spins[:, idx], axis=2) @ coeff
    return vals


def _pspin_sample_p2(n: int, replicas: int, gen) -> tuple[np.ndarray, np.ndarray]:
    """Pair couplings C_ij = G_ij + G_ji (variance 2) and the constant
    trace term, jointly exact in law for the p=2 array restricted to +-1."""
    iu = np.triu_indices(n, k=1)
    C = np.zeros((replicas, n, n))
    draws = gen.standard_normal((replicas, iu[0].size)) * math.sqrt(2.0)
    C[:, iu[0], iu[1]] = draws
    C[:, iu[1], iu[0]] = draws
    const = gen.standard_normal(replicas) * math.sqrt(n)
    return C, const


def pspin_ground_state(n: int, p: int, replicas: int = 16, rng=None,
                       solver: str = "auto",
                       schedule: AnnealSchedule | None = None) -> dict:
    """Monte Carlo estimate of (1/n) E max over +-1 of
    sum over all n^p tuples of G * sigma-product / n^{(p-1)/2}.

    Exhaustive below ~2^13 states, otherwise simulated annealing on a
    reduced representation (dense pairwise for p=2, dense cubic for p=3,
    sparse monomials beyond).
    """
    if n < p:
        raise ValueError(f"need n >= p, got n={n}, p={p}")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    gen = as_generator(rng)
    schedule = schedule or AnnealSchedule(sweeps=4000, restarts=6)
    use_exact = solver == "exact" or (solver == "auto" and n <= 13)
    scale = n ** ((p - 1) / 2.0)
    values = np.empty(replicas)

    if p == 2 and not use_exact:
        C, const = _pspin_sample_p2(n, replicas, gen)
        out = engines.anneal_ising(C / math.sqrt(n), const=const / math.sqrt(n),
                                   restarts=schedule.restarts, sweeps=schedule.sweeps,
                                   beta0=schedule.beta0, beta1=schedule.beta1, rng=gen)
        values = out["value"] / n
    elif p == 2:
        C, const = _pspin_sample_p2(n, replicas, gen)
        for r in range(replicas):
            Jr = C[r] / math.sqrt(n)

            def ev(block, Jr=Jr):
                return ((block @ Jr) * block).sum(axis=1) / 2.0

            best, _ = engines.exact_pm1_max(ev, n)
            values[r] = (best + const[r] / math.sqrt(n)) / n
    elif p == 3 and not use_exact:
        seeds = spawn_seeds(gen, replicas)
        for r in range(replicas):
            sub = as_generator(int(seeds[r]))
            keys = _distinct_keys(n, 3)
            w = sub.standard_normal(keys.shape[0]) * math.sqrt(6.0)
            T = np.zeros((n, n, n), dtype=np.float32)
            i, j, k = keys[:, 0], keys[:, 1], keys[:, 2]
            for a, b, c in itertools.permutations((i, j, k)):
                T[a, b, c] = w
            fld = sub.standard_normal(n) * math.sqrt(3.0 * n - 2.0)
            out = engines.anneal_cubic(T, field=fld, restarts=schedule.restarts,
                                       sweeps=schedule.sweeps, beta0=schedule.beta0,
                                       beta1=schedule.beta1, rng=sub)
            values[r] = out["value"] / scale / n
    else:
        seeds = spawn_seeds(gen, replicas)
        for r in range(replicas):
            sub = as_generator(int(seeds[r]))
            mono = _pspin_monomials(n, p, sub)
            if use_exact:
                best, _ = engines.exact_pm1_max(lambda b: _mono_eval_block(mono, b), n)
            else:
                from .solvers import _anneal_monomials
                spins = _anneal_monomials(mono, schedule, sub)
                best = mono.evaluate(spins)
            values[r] = best / scale / n

    mean = float(values.mean())
    sem = float(values.std(ddof=1) / math.sqrt(replicas))
    return {"mean": mean, "sem": sem, "values": values, "n": n, "p": p,
            "replicas": replicas, "solver": "exact" if use_exact else "anneal"}


# ----------------------------------------------------------------------------
# planted-partition surrogate


def _sbm_system(n: int, xi: float, J: np.ndarray):
    """Reduce (xi/n) <1,sigma>^2 + sum_{ij} J_ij sigma_i sigma_j / sqrt(n)
    to a zero-diagonal pair coupling plus constant."""
    Jeff = 2.0 * xi / n + 2.0 * J / math.sqrt(n)
    np.fill_diagonal(Jeff, 0.0)
    const = xi + np.trace(J) / math.sqrt(n)
    return Jeff, const


def sbm_surrogate(n: int, xi: float, constraint: str = "balanced",
                  replicas: int = 16, rng=None, solver: str = "auto",
                  schedule: AnnealSchedule | None = None) -> dict:
    """(1/n) E max of the planted-partition surrogate over balanced or
    unconstrained +-1 configurations, J a GOE matrix."""
    if constraint not in ("balanced", "unconstrained"):
        raise ValueError(f"constraint must be balanced|unconstrained, got {constraint!r}")
    if constraint == "balanced" and n % 2 != 0:
        raise ValueError("balanced constraint needs even n")
    if replicas < 2:
        raise ValueError("replicas must be >= 2")
    gen = as_generator(rng)
    schedule = schedule or AnnealSchedule(sweeps=4000, restarts=6)
    use_exact = solver == "exact" or (solver == "auto" and n <= 13)
    values = np.empty(replicas)
    if use_exact:
        cs = (ConstraintSet.balanced_bisection() if constraint == "balanced"
              else ConstraintSet.all())
        for r in range(replicas):
            Jeff, const = _sbm_system(n, xi, gen_goe(n, gen))
            best = -np.inf
            for block in _iter_pm_blocks(n, 2, cs):
                spins = (1.0 - 2.0 * block).astype(np.float64)
                vals = ((spins @ Jeff) * spins).sum(axis=1) / 2.0
                best = max(best, float(vals.max()))
            values[r] = (best + const) / n
    else:
        systems = [_sbm_system(n, xi, gen_goe(n, gen)) for _ in range(replicas)]
        J = np.stack([s[0] for s in systems])
        const = np.array([s[1] for s in systems])
        out = engines.anneal_ising(J, const=const, restarts=schedule.restarts,
                                   sweeps=schedule.sweeps, beta0=schedule.beta0,
                                   beta1=schedule.beta1, rng=gen,
                                   swap_moves=(constraint == "balanced"))
        values = out["value"] / n
    mean = float(values.mean())
    sem = float(values.std(ddof=1) / math.sqrt(replicas))
    return {"mean": mean, "sem": sem, "values": values, "n": n, "xi": xi,
            "constraint": constraint, "replicas": replicas,
            "solver": "exact" if use_exact else "anneal"}


def sbm_constraint_gap(n: int, xi: float, replicas: int = 16, rng=None,
                       solver: str = "auto",
                       schedule: AnnealSchedule | None = None) -> dict:
    """Paired unconstrained-minus-balanced surrogate values on shared disorder.

    The unconstrained maximum dominates replica by replica; the paired
    gap and its SEM quantify how fast the constraint stops mattering.
    """
    if n % 2 != 0:
        raise ValueError("needs even n")
    gen = as_generator(rng)
    schedule = schedule or AnnealSchedule(sweeps=4000, restarts=6)
    use_exact = solver == "exact" or (solver == "auto" and n <= 13)
    free = np.empty(replicas)
    bal = np.empty(replicas)
    for r in range(replicas):
        Jeff, const = _sbm_system(n, xi, gen_goe(n, gen))
        if use_exact:
            best_f = best_b = -np.inf
            for block in _iter_pm_blocks(n, 2, ConstraintSet.all()):
                spins = (1.0 - 2.0 * block).astype(np.float64)
                vals = ((spins @ Jeff) * spins).sum(axis=1) / 2.0
                best_f = max(best_f, float(vals.max()))
                balanced = np.abs(spins.sum(axis=1)) == 0
                if balanced.any():
                    best_b = max(best_b, float(vals[balanced].max()))
        else:
            out_f = engines.anneal_ising(Jeff, const=0.0, restarts=schedule.restarts,
                                         sweeps=schedule.sweeps, beta0=schedule.beta0,
                                         beta1=schedule.beta1, rng=gen)
            out_b = engines.anneal_ising(Jeff, const=0.0, restarts=schedule.restarts,
                                         sweeps=schedule.sweeps, beta0=schedule.beta0,
                                         beta1=schedule.beta1, rng=gen, swap_moves=True)
            best_f = float(out_f["value"][0])
            best_b = float(out_b["value"][0])
        free[r] = (best_f + const) / n
        bal[r] = (best_b + const) / n
    gaps = free - bal
    return {"free": free, "balanced": bal, "gap_mean": float(gaps.mean()),
            "gap_sem": float(gaps.std(ddof=1) / math.sqrt(replicas)),
            "dominates": bool((gaps >= -1e-12).all())}


# ----------------------------------------------------------------------------
# finite-size extrapolation


def ground_state_extrapolate(ns, means, sems=None) -> dict:
    """Weighted least squares of mean(n) = a + b n^{-2/3}.

    Returns the extrapolated constant a with its standard error from the
    fit covariance, plus b and per-point residuals.  The exponent is the
    customary mean-field finite-size ansatz; it is a modeling choice and
    is recorded in the output.
    """
    ns = np.asarray(ns, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if ns.size != means.size or ns.size < 2:
        raise ValueError("need >= 2 points with matching means")
    if sems is None:
        w = np.ones_like(ns)
    else:
        sems = np.asarray(sems, dtype=np.float64)
        w = 1.0 / np.maximum(sems, 1e-12) ** 2
    X = np.stack([np.ones_like(ns), ns ** (-2.0 / 3.0)], axis=1)
    WX = X * w[:, None]
    cov = np.linalg.inv(X.T @ WX)
    coef = cov @ (WX.T @ means)
    pred = X @ coef
    a_se = float(math.sqrt(max(cov[0, 0], 0.0)))
    return {"a": float(coef[0]), "b": float(coef[1]), "a_se": a_se,
            "predicted": pred, "residuals": means - pred,
            "ansatz": "a + b * n**(-2/3)"}
