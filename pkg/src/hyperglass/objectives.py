"""Objectives on spin configurations over sparse hypergraphs.

The generic objective is

    H(sigma) = sum over ordered tuples of p distinct indices of
               A[i1..ip] * f(sigma_i1, ..., sigma_ip)

with A a symmetric weight array stored on sorted distinct tuples
(`WeightTensor`) and f a symmetric kernel on a q-letter alphabet
(`Kernel`).  Since both factors are symmetric the sum equals
p! * sum over stored tuples.  Adjacency weights carry 1/(p-1)! per edge
copy so that a graph edge {i,j} contributes exactly 2 f(sigma_i,
sigma_j) to H.

Label conventions: alphabet letters are 0..q-1; the +-1 encoding maps
0 -> +1 and 1 -> -1.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .ensembles import PUniformHypergraph, gen_er_hypergraph
from .rng import as_generator

__all__ = [
    "Kernel",
    "WeightTensor",
    "XorsatInstance",
    "cut_kernel",
    "xor_kernel",
    "constant_kernel",
    "labels_to_pm1",
    "pm1_to_labels",
    "hamiltonian",
    "hamiltonian_block",
    "qcut_value",
    "xorsat_satisfied",
    "bisection_cut",
    "psi",
    "psi_max_and_hessian",
    "c1_residual",
    "gen_xorsat_instance",
    "write_xorsat_text",
    "read_xorsat_text",
]


def labels_to_pm1(labels) -> np.ndarray:
    """Alphabet {0,1} -> spins {+1,-1} (0 maps to +1)."""
    labels = np.asarray(labels)
    return (1 - 2 * labels.astype(np.int64)).astype(np.int8)


def pm1_to_labels(spins) -> np.ndarray:
    spins = np.asarray(spins)
    return ((1 - spins.astype(np.int64)) // 2).astype(np.int8)


class Kernel:
    """Symmetric function f: {0..q-1}^p -> R stored as a dense table.

    Tables built through `from_function` are symmetrized by evaluating
    on sorted arguments, so symmetry holds bit for bit.
    """

    def __init__(self, p: int, q: int, table, name: str = "kernel"):
        self.p = int(p)
        self.q = int(q)
        self.name = name
        table = np.asarray(table, dtype=np.float64)
        if table.shape != (self.q,) * self.p:
            raise ValueError(f"kernel table must have shape {(self.q,) * self.p}, got {table.shape}")
        for perm in itertools.permutations(range(self.p)):
            if not np.array_equal(table, np.transpose(table, perm)):
                raise ValueError("kernel table is not symmetric under argument permutation")
        self.table = table
        self._flat = table.ravel()

    @classmethod
    def from_function(cls, p: int, q: int, fn, name: str = "kernel") -> "Kernel":
        table = np.empty((q,) * p, dtype=np.float64)
        for idx in itertools.product(range(q), repeat=p):
            table[idx] = float(fn(*sorted(idx)))
        return cls(p, q, table, name=name)

    def value(self, args) -> float:
        args = tuple(int(a) for a in args)
        if len(args) != self.p:
            raise ValueError(f"kernel of arity {self.p} called with {len(args)} arguments")
        return float(self.table[args])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.table))) if self.table.size else 0.0

    def scaled(self, c: float) -> "Kernel":
        return Kernel(self.p, self.q, self.table * float(c), name=f"{self.name}*{c}")

    def __repr__(self):
        return f"Kernel(name={self.name!r}, p={self.p}, q={self.q})"


def cut_kernel(q: int) -> Kernel:
    """Pairwise disagreement indicator f(x, y) = 1(x != y)."""
    return Kernel.from_function(2, q, lambda x, y: 1.0 if x != y else 0.0, name=f"cut_q{q}")


def xor_kernel(p: int) -> Kernel:
    """Parity product on the +-1 encoding: f(x1..xp) = prod_i (1 - 2 x_i)."""
    return Kernel.from_function(p, 2, lambda *xs: float(np.prod([1 - 2 * x for x in xs])),
                                name=f"xor_p{p}")


def constant_kernel(p: int, q: int, c: float = 1.0) -> Kernel:
    return Kernel.from_function(p, q, lambda *xs: c, name=f"const_{c}")


class WeightTensor:
    """Symmetric weight array stored on sorted tuples of distinct indices."""

    def __init__(self, p: int, n: int, keys, values, meta: dict | None = None):
        self.p = int(p)
        self.n = int(n)
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, self.p)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if keys.shape[0] != values.shape[0]:
            raise ValueError("keys and values length mismatch")
        if keys.size:
            if keys.min() < 0 or keys.max() >= self.n:
                raise ValueError("key index out of range")
            if np.any(np.diff(keys, axis=1) <= 0):
                raise ValueError("keys must be strictly increasing tuples of distinct indices")
            order = np.lexsort(keys.T[::-1])
            keys = keys[order]
            values = values[order]
            if keys.shape[0] > 1 and np.any(np.all(np.diff(keys, axis=0) == 0, axis=1)):
                raise ValueError("duplicate keys; accumulate weights before constructing")
        self.keys = keys
        self.values = values
        self.meta = dict(meta or {})
        self._incidence = None

    @property
    def m(self) -> int:
        return self.keys.shape[0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.m else 0.0

    @classmethod
    def from_entries(cls, p: int, n: int, entries: dict, meta: dict | None = None) -> "WeightTensor":
        keys = []
        values = []
        for tup, w in entries.items():
            tup = tuple(int(v) for v in tup)
            if tuple(sorted(tup)) != tup or len(set(tup)) != len(tup):
                raise ValueError(f"entry key {tup} must be a sorted tuple of distinct indices")
            keys.append(tup)
            values.append(float(w))
        keys = np.array(keys, dtype=np.int64).reshape(-1, p)
        return cls(p, n, keys, np.array(values), meta=meta)

    @classmethod
    def from_hypergraph(cls, g: PUniformHypergraph, weight_per_edge: float | None = None) -> "WeightTensor":
        """Adjacency weights: each edge copy adds 1/(p-1)! at its key.

        Edges with repeated vertices or fewer than p vertices do not fit
        the distinct-tuple array and are dropped (counted in meta).
        """
        w = 1.0 / math.factorial(g.p - 1) if weight_per_edge is None else float(weight_per_edge)
        acc: dict = {}
        dropped_repeat = 0
        dropped_short = 0
        for e in g.edges:
            t = tuple(e)
            if len(t) < g.p:
                dropped_short += 1
                continue
            if len(set(t)) != len(t):
                dropped_repeat += 1
                continue
            acc[t] = acc.get(t, 0.0) + w
        meta = {"source": g.meta.get("kind", "hypergraph"),
                "dropped_repeated_vertex_edges": dropped_repeat,
                "dropped_short_edges": dropped_short}
        if not acc:
            return cls(g.p, g.n, np.empty((0, g.p), dtype=np.int64), np.empty(0), meta=meta)
        return cls.from_entries(g.p, g.n, acc, meta=meta)

    @classmethod
    def from_xorsat(cls, inst: "XorsatInstance") -> "WeightTensor":
        """Signed adjacency A*b: clause (tuple, sign) stores sign/(p-1)!."""
        w = 1.0 / math.factorial(inst.p - 1)
        entries = {tuple(k): float(s) * w for k, s in zip(inst.clauses.tolist(), inst.signs.tolist())}
        return cls.from_entries(inst.p, inst.n, entries, meta={"source": "xorsat"})

    def value_at(self, tup) -> float:
        tup = tuple(int(v) for v in tup)
        idx = self._find(tup)
        return float(self.values[idx]) if idx is not None else 0.0

    def _find(self, tup):
        if self.m == 0:
            return None
        row = np.array(tup, dtype=np.int64)
        lo = np.searchsorted(self.keys[:, 0], row[0], side="left")
        hi = np.searchsorted(self.keys[:, 0], row[0], side="right")
        for i in range(lo, hi):
            if np.array_equal(self.keys[i], row):
                return i
        return None

    def with_entry(self, tup, value: float) -> "WeightTensor":
        """Copy with the weight at `tup` set to `value` (entry added if absent)."""
        tup = tuple(int(v) for v in tup)
        if tuple(sorted(tup)) != tup or len(set(tup)) != len(tup):
            raise ValueError(f"{tup} must be a sorted tuple of distinct indices")
        idx = self._find(tup)
        if idx is None:
            keys = np.vstack([self.keys, np.array(tup, dtype=np.int64)])
            values = np.append(self.values, float(value))
        else:
            keys = self.keys.copy()
            values = self.values.copy()
            values[idx] = float(value)
        return WeightTensor(self.p, self.n, keys, values, meta=self.meta)

    def incidence(self) -> list:
        """Per-vertex list of incident key rows (cached)."""
        if self._incidence is None:
            inc = [[] for _ in range(self.n)]
            for r, row in enumerate(self.keys.tolist()):
                for v in row:
                    inc[v].append(r)
            self._incidence = [np.array(rows, dtype=np.int64) for rows in inc]
        return self._incidence

    def __repr__(self):
        return f"WeightTensor(p={self.p}, n={self.n}, m={self.m})"


def _check_sigma(sigma, n: int, q: int) -> np.ndarray:
    sigma = np.asarray(sigma)
    if sigma.shape != (n,):
        raise ValueError(f"sigma must have shape ({n},), got {sigma.shape}")
    if sigma.size and (sigma.min() < 0 or sigma.max() >= q):
        raise ValueError(f"sigma entries must lie in [0, {q})")
    return sigma.astype(np.int64)


def _flat_codes(weights: WeightTensor, kernel: Kernel, configs: np.ndarray) -> np.ndarray:
    """Row-major table codes of kernel arguments: (n_configs, m) int array."""
    q = kernel.q
    idx = configs[:, weights.keys]          # (B, m, p)
    code = idx[..., 0].astype(np.int64)
    for j in range(1, weights.p):
        code = code * q + idx[..., j]
    return code


def hamiltonian(weights: WeightTensor, kernel: Kernel, sigma) -> float:
    """H(sigma) = p! * sum over stored tuples of w * f(sigma at tuple)."""
    if kernel.p != weights.p:
        raise ValueError(f"kernel arity {kernel.p} != weight arity {weights.p}")
    sigma = _check_sigma(sigma, weights.n, kernel.q)
    if weights.m == 0:
        return 0.0
    code = _flat_codes(weights, kernel, sigma[None, :])
    return float(math.factorial(weights.p) * (kernel._flat[code[0]] @ weights.values))


def hamiltonian_block(weights: WeightTensor, kernel: Kernel, configs: np.ndarray) -> np.ndarray:
    """Vectorized H over a (B, n) block of configurations."""
    if kernel.p != weights.p:
        raise ValueError(f"kernel arity {kernel.p} != weight arity {weights.p}")
    configs = np.asarray(configs, dtype=np.int64)
    if weights.m == 0:
        return np.zeros(configs.shape[0])
    code = _flat_codes(weights, kernel, configs)
    return math.factorial(weights.p) * (kernel._flat[code] @ weights.values)


def qcut_value(g: PUniformHypergraph, sigma, q: int) -> int:
    """Number of edges with endpoints in different classes (simple graph)."""
    if g.p != 2:
        raise ValueError("qcut_value requires a graph (p=2)")
    if g.multi:
        raise ValueError("qcut_value requires a simple graph")
    sigma = _check_sigma(sigma, g.n, q)
    if not g.edges:
        return 0
    e = np.asarray(g.edges, dtype=np.int64)
    return int(np.count_nonzero(sigma[e[:, 0]] != sigma[e[:, 1]]))


def bisection_cut(g: PUniformHypergraph, spins) -> int:
    """Cross edges of a balanced +-1 labeling (counts multiplicity)."""
    if g.p != 2:
        raise ValueError("bisection_cut requires a graph (p=2)")
    spins = np.asarray(spins, dtype=np.int64)
    if spins.shape != (g.n,):
        raise ValueError(f"spins must have shape ({g.n},)")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("spins must be +-1")
    if int(spins.sum()) != 0:
        raise ValueError("spins must be balanced (equal +1 and -1 counts)")
    if not g.edges:
        return 0
    e = np.asarray(g.edges, dtype=np.int64)
    return int(np.count_nonzero(spins[e[:, 0]] != spins[e[:, 1]]))


# ----------------------------------------------------------------------------
# XORSAT


@dataclass
class XorsatInstance:
    """Max-XORSAT instance: sorted distinct p-tuples with signs in {-1,+1}.

    A clause (t, s) is satisfied by spins sigma iff s * prod_{i in t}
    sigma_i = +1; file format uses b in {0,1} with s = (-1)^b.
    """

    p: int
    n: int
    clauses: np.ndarray
    signs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.clauses = np.asarray(self.clauses, dtype=np.int64).reshape(-1, self.p)
        self.signs = np.asarray(self.signs, dtype=np.int64).reshape(-1)
        if self.clauses.shape[0] != self.signs.shape[0]:
            raise ValueError("clauses and signs length mismatch")
        if self.clauses.size:
            if self.clauses.min() < 0 or self.clauses.max() >= self.n:
                raise ValueError("clause index out of range")
            if np.any(np.diff(self.clauses, axis=1) <= 0):
                raise ValueError("clause tuples must be sorted and distinct")
        if not np.all(np.abs(self.signs) == 1):
            raise ValueError("signs must be +-1")

    @property
    def m(self) -> int:
        return self.clauses.shape[0]


def xorsat_satisfied(inst: XorsatInstance, spins) -> int:
    """Satisfied clause count = m/2 + (1/2) sum_a s_a prod sigma; exact integer."""
    spins = np.asarray(spins, dtype=np.int64)
    if spins.shape != (inst.n,):
        raise ValueError(f"spins must have shape ({inst.n},)")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("spins must be +-1")
    if inst.m == 0:
        return 0
    prods = inst.signs * np.prod(spins[inst.clauses], axis=1)
    total = inst.m + int(prods.sum())
    assert total % 2 == 0
    return total // 2


def gen_xorsat_instance(n: int, p: int, d: float, rng) -> XorsatInstance:
    """ER clause set (each p-subset w.p. d(p-1)!/n^{p-1}) with i.i.d. fair signs."""
    gen = as_generator(rng)
    g = gen_er_hypergraph(n, p, d, gen)
    m = g.m
    signs = np.where(gen.random(m) < 0.5, 1, -1).astype(np.int64)
    clauses = np.array(g.edges, dtype=np.int64).reshape(-1, p)
    return XorsatInstance(p=p, n=n, clauses=clauses, signs=signs,
                          meta={"d": d, "prob_clamped": g.meta.get("prob_clamped", False)})


def write_xorsat_text(inst: XorsatInstance, path):
    lines = [f"{inst.p} {inst.n} {inst.m}"]
    for t, s in zip(inst.clauses.tolist(), inst.signs.tolist()):
        b = 0 if s == 1 else 1
        lines.append(" ".join([str(b)] + [str(v) for v in t]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_xorsat_text(path) -> XorsatInstance:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty XORSAT file")
    head = raw[0].split()
    if len(head) != 3:
        raise ValueError(f"{path}: header must be 'p n m', got {raw[0]!r}")
    p, n, m = (int(x) for x in head)
    if len(raw) - 1 != m:
        raise ValueError(f"{path}: header says m={m} but file has {len(raw) - 1} clause lines")
    clauses = []
    signs = []
    for ln in raw[1:]:
        parts = [int(x) for x in ln.split()]
        if len(parts) != p + 1:
            raise ValueError(f"{path}: clause line {ln!r} must be 'b i1 .. ip'")
        b = parts[0]
        if b not in (0, 1):
            raise ValueError(f"{path}: b must be 0 or 1, got {b}")
        signs.append(1 if b == 0 else -1)
        clauses.append(tuple(sorted(parts[1:])))
    order = sorted(range(m), key=lambda k: clauses[k])
    clauses = np.array([clauses[k] for k in order], dtype=np.int64).reshape(-1, p)
    signs = np.array([signs[k] for k in order], dtype=np.int64)
    return XorsatInstance(p=p, n=n, clauses=clauses, signs=signs, meta={"kind": "file"})


# ----------------------------------------------------------------------------
# simplex potential Psi and the interior-maximizer conditions


def _check_simplex(m_vec, q: int) -> np.ndarray:
    m_vec = np.asarray(m_vec, dtype=np.float64)
    if m_vec.shape != (q,):
        raise ValueError(f"m must have shape ({q},)")
    if m_vec.min() < -1e-12 or abs(m_vec.sum() - 1.0) > 1e-9:
        raise ValueError("m must lie on the probability simplex")
    return np.clip(m_vec, 0.0, None)


def psi(kernel: Kernel, m_vec) -> float:
    """Psi(m) = sum_{j1..jp} f(j1..jp) m_{j1} ... m_{jp}."""
    m_vec = _check_simplex(m_vec, kernel.q)
    val = kernel.table
    for _ in range(kernel.p):
        val = val @ m_vec
    return float(val)


def _psi_grad(kernel: Kernel, m_vec: np.ndarray) -> np.ndarray:
    val = kernel.table
    for _ in range(kernel.p - 1):
        val = val @ m_vec
    return kernel.p * val


def _psi_hess(kernel: Kernel, m_vec: np.ndarray) -> np.ndarray:
    if kernel.p == 1:
        return np.zeros((kernel.q, kernel.q))
    val = kernel.table
    for _ in range(kernel.p - 2):
        val = val @ m_vec
    return kernel.p * (kernel.p - 1) * val


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / np.arange(1, len(v) + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def psi_max_and_hessian(kernel: Kernel, n_starts: int = 200, tol: float = 1e-10,
                        max_iter: int = 2000, rng=None) -> dict:
    """Maximize Psi over the simplex; report the restricted Hessian at the top.

    Multistart (Dirichlet draws plus the barycenter) projected gradient
    ascent with backtracking.  The restricted Hessian eliminates the
    last coordinate (m_q = 1 - sum of the others); `min_eigenvalue` is
    the smallest eigenvalue of -grad^2 restricted-Psi, so the interior
    second-order condition holds iff `interior` and min_eigenvalue > 0.
    """
    gen = as_generator(rng if rng is not None else 0)
    q = kernel.q

    def ascend(m0: np.ndarray) -> tuple[np.ndarray, float]:
        m_cur = m0.copy()
        f_cur = psi(kernel, m_cur)
        step = 1.0
        for _ in range(max_iter):
            g = _psi_grad(kernel, m_cur)
            cand = _project_simplex(m_cur + step * g)
            f_cand = psi(kernel, cand)
            shrink = 0
            while f_cand < f_cur and shrink < 60:
                step *= 0.5
                shrink += 1
                cand = _project_simplex(m_cur + step * g)
                f_cand = psi(kernel, cand)
            move = np.max(np.abs(cand - m_cur))
            if f_cand >= f_cur:
                m_cur, f_cur = cand, f_cand
            if move < tol:
                break
            step = min(step * 2.0, 1.0)
        return m_cur, f_cur

    starts = [np.full(q, 1.0 / q)]
    starts.extend(gen.dirichlet(np.ones(q)) for _ in range(max(0, n_starts - 1)))
    best_m, best_f = None, -np.inf
    for s in starts:
        m_cur, f_cur = ascend(s)
        if f_cur > best_f:
            best_m, best_f = m_cur, f_cur
    m_star = best_m
    grad = _psi_grad(kernel, m_star)
    kkt = float(np.linalg.norm(_project_simplex(m_star + grad) - m_star))

    hess = _psi_hess(kernel, m_star)
    free = slice(0, q - 1)
    hbar = (hess[free, free] - hess[free, q - 1][:, None]
            - hess[q - 1, free][None, :] + hess[q - 1, q - 1])
    neg_hbar = -hbar
    eigs = np.linalg.eigvalsh(neg_hbar) if q > 1 else np.array([np.inf])
    interior = bool(m_star.min() > 1e-6)
    return {
        "m_star": m_star,
        "psi_max": best_f,
        "kkt_residual": kkt,
        "neg_hessian_restricted": neg_hbar,
        "min_eigenvalue": float(eigs.min()),
        "interior": interior,
        "c2_ok": bool(interior and eigs.min() > 1e-8),
    }


def c1_residual(kernel: Kernel, sigma) -> dict:
    """Residual r_j = sum_{j2..jp} f(j, j2..jp) m_{j2}...m_{jp} - eta.

    m is the empirical type fraction of sigma and eta the alphabet
    average of the conditional field, so r measures how far sigma is
    from equalizing the field across labels.
    """
    sigma = np.asarray(sigma, dtype=np.int64)
    n = sigma.shape[0]
    if n == 0:
        raise ValueError("sigma must be nonempty")
    if sigma.min() < 0 or sigma.max() >= kernel.q:
        raise ValueError(f"sigma entries must lie in [0, {kernel.q})")
    m_vec = np.bincount(sigma, minlength=kernel.q) / n
    field = _psi_grad(kernel, m_vec) / kernel.p
    eta = float(field.mean())
    r = field - eta
    return {"residual": r, "eta": eta, "sup": float(np.max(np.abs(r))), "m": m_vec}
