"""Random p-uniform hypergraph ensembles.

Implements the sparse ensembles the rest of the package optimizes over:

* Erdos-Renyi: every p-subset kept independently with probability
  d(p-1)!/n^{p-1} (mean degree ~ d, mean edge count ~ nd/p).
* Configuration model: exactly d clone slots per vertex, a uniform
  matching of the nd clones into nd/p groups of size p.
* Poisson cloning: i.i.d. Poisson(lambda_c) clone counts with
  lambda_c = (p-1)! d / n^{p-1} * C(n-1, p-1), matched uniformly; the
  leftover r < p clones form one short edge.
* Two-stage regular coupling: BLUE/RED clone coloring that carves a
  configuration-model sample G1 into an ER-like core plus a rematched
  remainder G2.
* Stochastic block model G(n, a/n, b/n) with balanced +-1 communities.

Edges are stored as sorted index tuples (0-based); multigraph output
(`multi=True`) may contain repeated edges and repeated vertices inside
an edge.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import as_generator

__all__ = [
    "PUniformHypergraph",
    "SbmGraph",
    "TwoStageResult",
    "gen_er_hypergraph",
    "gen_configuration_regular",
    "two_stage_partition",
    "gen_poisson_cloning",
    "gen_two_stage_regular",
    "gen_sbm",
    "write_hypergraph_text",
    "read_hypergraph_text",
    "write_sbm_text",
    "read_sbm_text",
]


@dataclass
class PUniformHypergraph:
    """A p-uniform hypergraph on vertices {0, ..., n-1}.

    `edges` holds sorted tuples.  With `multi=True` repeated tuples and
    repeated vertices within a tuple are allowed; short tuples (length
    < p) may appear only when `meta["short_edges"]` says so.
    """

    p: int
    n: int
    edges: list
    multi: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        short_ok = bool(self.meta.get("short_edges", 0))
        seen = set()
        for e in self.edges:
            t = tuple(e)
            if len(t) != self.p and not (short_ok and len(t) < self.p):
                raise ValueError(f"edge {t} has arity {len(t)}, expected {self.p}")
            if any(v < 0 or v >= self.n for v in t):
                raise ValueError(f"edge {t} out of vertex range [0, {self.n})")
            if tuple(sorted(t)) != t:
                raise ValueError(f"edge {t} is not sorted")
            if not self.multi:
                if len(set(t)) != len(t):
                    raise ValueError(f"edge {t} repeats a vertex in a simple hypergraph")
                if t in seen:
                    raise ValueError(f"duplicate edge {t} in a simple hypergraph")
                seen.add(t)

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        """Slot counts per vertex (multiplicity and in-edge repeats included)."""
        counts = np.zeros(self.n, dtype=np.int64)
        for e in self.edges:
            for v in e:
                counts[v] += 1
        return counts

    def canonicalize(self):
        """Sort the edge list lexicographically (repeats stay adjacent)."""
        self.edges = sorted(tuple(e) for e in self.edges)
        return self


@dataclass
class SbmGraph:
    """Two-community stochastic block model sample with +-1 labels."""

    n: int
    labels: np.ndarray
    edges: list
    a: float
    b: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.labels.shape != (self.n,):
            raise ValueError("labels must have shape (n,)")
        if not np.all(np.abs(self.labels) == 1):
            raise ValueError("labels must be +-1")
        if int(self.labels.sum()) != 0:
            raise ValueError("labels must be balanced")
        for e in self.edges:
            i, j = e
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge {e}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def as_hypergraph(self) -> PUniformHypergraph:
        return PUniformHypergraph(p=2, n=self.n, edges=sorted(self.edges), multi=False,
                                  meta={"kind": "sbm", "a": self.a, "b": self.b})


@dataclass
class TwoStageResult:
    """Pieces of the two-stage regular construction."""

    g1: PUniformHypergraph
    g2: PUniformHypergraph
    g_blue: PUniformHypergraph
    g_red_kept: PUniformHypergraph
    g_rematched: PUniformHypergraph
    z: np.ndarray
    meta: dict = field(default_factory=dict)


def _er_probability(n: int, p: int, d: float) -> tuple[float, bool]:
    prob = d * math.factorial(p - 1) / float(n) ** (p - 1)
    if prob > 1.0:
        return 1.0, True
    return prob, False


def gen_er_hypergraph(n: int, p: int, d: float, rng) -> PUniformHypergraph:
    """Erdos-Renyi p-uniform hypergraph: each p-subset kept w.p. d(p-1)!/n^{p-1}.

    The probability is clamped at 1 (flagged in meta) when the requested
    density exceeds the complete hypergraph.  For n <= 64 every subset
    gets its own Bernoulli draw; for larger n the edge count is drawn
    Binomial(C(n,p), prob) and that many distinct subsets are sampled
    uniformly by rejection.
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    if p > n:
        raise ValueError(f"p={p} exceeds n={n}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    gen = as_generator(rng)
    prob, clamped = _er_probability(n, p, d)
    meta = {"kind": "er", "d": d, "prob": prob, "prob_clamped": clamped}

    if prob == 1.0:
        edges = [tuple(c) for c in itertools.combinations(range(n), p)]
        return PUniformHypergraph(p=p, n=n, edges=edges, multi=False, meta=meta)

    if n <= 64:
        combos = list(itertools.combinations(range(n), p))
        mask = gen.random(len(combos)) < prob
        edges = [combos[i] for i in np.flatnonzero(mask)]
    else:
        total = math.comb(n, p)
        m = int(gen.binomial(total, prob))
        chosen = set()
        while len(chosen) < m:
            t = tuple(sorted(gen.choice(n, size=p, replace=False).tolist()))
            chosen.add(t)
        edges = sorted(chosen)
    return PUniformHypergraph(p=p, n=n, edges=sorted(edges), multi=False, meta=meta)


def gen_configuration_regular(n: int, p: int, d: int, rng) -> PUniformHypergraph:
    """Configuration model: uniform matching of nd clones into nd/p edges.

    Every vertex has exactly d slots; edges may repeat vertices and each
    other (multigraph).  Requires p | nd.
    """
    if d < 0 or int(d) != d:
        raise ValueError(f"d must be a nonnegative integer, got {d}")
    d = int(d)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if (n * d) % p != 0:
        raise ValueError(f"p={p} must divide n*d={n * d}")
    gen = as_generator(rng)
    clones = np.repeat(np.arange(n), d)
    gen.shuffle(clones)
    edges = [tuple(sorted(clones[k * p:(k + 1) * p].tolist())) for k in range(n * d // p)]
    return PUniformHypergraph(p=p, n=n, edges=sorted(edges), multi=True,
                              meta={"kind": "configuration", "d": d})


def two_stage_partition(m_red: int, n_blue: int, p: int, rng) -> list:
    """Partition m_red RED balls into groups of p via the two-stage scheme.

    Stage 1 partitions all m_red + n_blue balls uniformly into groups of
    size p; stage 2 deletes the BLUE balls and re-partitions the REDs
    that sat in mixed groups.  The output is distributed as a uniform
    partition of the REDs into groups of size p.  Balls 0..m_red-1 are
    RED.  Requires p | m_red and p | (m_red + n_blue).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if m_red % p != 0:
        raise ValueError(f"p={p} must divide m_red={m_red}")
    total = m_red + n_blue
    if total % p != 0:
        raise ValueError(f"p={p} must divide m_red+n_blue={total}")
    gen = as_generator(rng)
    balls = np.arange(total)
    gen.shuffle(balls)
    kept = []
    leftovers = []
    for k in range(total // p):
        group = balls[k * p:(k + 1) * p]
        if np.all(group < m_red):
            kept.append(tuple(sorted(group.tolist())))
        else:
            leftovers.extend(int(v) for v in group if v < m_red)
    leftovers = np.array(leftovers, dtype=np.int64)
    gen.shuffle(leftovers)
    for k in range(len(leftovers) // p):
        kept.append(tuple(sorted(leftovers[k * p:(k + 1) * p].tolist())))
    return sorted(kept)


def poisson_cloning_mean(n: int, p: int, d: float) -> float:
    """Per-vertex clone mean (p-1)! d / n^{p-1} * C(n-1, p-1)."""
    return math.factorial(p - 1) * d / float(n) ** (p - 1) * math.comb(n - 1, p - 1)


def gen_poisson_cloning(n: int, p: int, d: float, rng) -> PUniformHypergraph:
    """Poisson cloning ensemble: Poisson clone counts, uniform matching.

    Vertex clone counts are i.i.d. Poisson with mean
    (p-1)! d / n^{p-1} * C(n-1, p-1) ~ d.  All clones are matched
    uniformly into groups of p; if the total is not divisible by p the
    remaining r < p clones form one short edge (recorded in meta).
    """
    if d < 0:
        raise ValueError(f"d must be >= 0, got {d}")
    if p > n:
        raise ValueError(f"p={p} exceeds n={n}")
    gen = as_generator(rng)
    lam = poisson_cloning_mean(n, p, d)
    u = gen.poisson(lam, size=n)
    clones = np.repeat(np.arange(n), u)
    gen.shuffle(clones)
    total = int(u.sum())
    full, short = divmod(total, p)
    edges = [tuple(sorted(clones[k * p:(k + 1) * p].tolist())) for k in range(full)]
    if short:
        edges.append(tuple(sorted(clones[full * p:].tolist())))
    meta = {"kind": "poisson_cloning", "d": d, "clone_mean": lam,
            "clone_counts": u.tolist(), "short_edges": 1 if short else 0,
            "short_edge_size": short}
    return PUniformHypergraph(p=p, n=n, edges=sorted(edges), multi=True, meta=meta)


def gen_two_stage_regular(n: int, p: int, d: int, C: float, rng) -> TwoStageResult:
    """Two-stage coupling between the configuration model and its RED core.

    Draws X_i ~ Poisson(d - C sqrt(d) log d) i.i.d., colors the first
    Z_i = (d - X_i)_+ clones of vertex i BLUE and the rest RED, samples a
    configuration-model matching G1, splits it into all-RED edges and
    BLUE-touched edges, then rematches the REDs orphaned by BLUE edges
    (one short edge if their count is not divisible by p).  G2 is the
    kept RED edges plus the rematched edges.
    """
    if d <= 0 or int(d) != d:
        raise ValueError(f"d must be a positive integer, got {d}")
    d = int(d)
    if C <= 0:
        raise ValueError(f"C must be > 0, got {C}")
    lam = d - C * math.sqrt(d) * math.log(d)
    if lam < 0:
        raise ValueError(f"Poisson mean d - C*sqrt(d)*log(d) = {lam:.4f} is negative")
    if (n * d) % p != 0:
        raise ValueError(f"p={p} must divide n*d={n * d}")
    gen = as_generator(rng)

    x = gen.poisson(lam, size=n)
    z = np.maximum(d - x, 0)

    # clone t of vertex i is BLUE iff t < z[i]
    vertex_of = np.repeat(np.arange(n), d)
    slot_of = np.tile(np.arange(d), n)
    blue = slot_of < z[vertex_of]

    order = gen.permutation(n * d)
    edges_g1 = []
    red_kept = []
    blue_edges = []
    orphan_red = []
    for k in range(n * d // p):
        idx = order[k * p:(k + 1) * p]
        tup = tuple(sorted(vertex_of[idx].tolist()))
        edges_g1.append(tup)
        if blue[idx].any():
            blue_edges.append(tup)
            orphan_red.extend(int(c) for c in idx if not blue[c])
        else:
            red_kept.append(tup)

    orphan_red = np.array(orphan_red, dtype=np.int64)
    gen.shuffle(orphan_red)
    full, short = divmod(len(orphan_red), p)
    rematched = [tuple(sorted(vertex_of[orphan_red[k * p:(k + 1) * p]].tolist()))
                 for k in range(full)]
    if short:
        rematched.append(tuple(sorted(vertex_of[orphan_red[full * p:]].tolist())))

    short_meta = {"short_edges": 1 if short else 0, "short_edge_size": short}
    g1 = PUniformHypergraph(p=p, n=n, edges=sorted(edges_g1), multi=True,
                            meta={"kind": "two_stage_g1", "d": d})
    g_blue = PUniformHypergraph(p=p, n=n, edges=sorted(blue_edges), multi=True,
                                meta={"kind": "two_stage_blue", "d": d})
    g_red_kept = PUniformHypergraph(p=p, n=n, edges=sorted(red_kept), multi=True,
                                    meta={"kind": "two_stage_red_kept", "d": d})
    g_rematched = PUniformHypergraph(p=p, n=n, edges=sorted(rematched), multi=True,
                                     meta={"kind": "two_stage_rematched", "d": d, **short_meta})
    g2 = PUniformHypergraph(p=p, n=n, edges=sorted(red_kept + rematched), multi=True,
                            meta={"kind": "two_stage_g2", "d": d, **short_meta})
    meta = {"poisson_mean": lam, "C": C, "n_blue_clones": int(z.sum()),
            "n_orphan_red": int(len(orphan_red))}
    return TwoStageResult(g1=g1, g2=g2, g_blue=g_blue, g_red_kept=g_red_kept,
                          g_rematched=g_rematched, z=z, meta=meta)


def gen_sbm(n: int, a: float, b: float, rng) -> SbmGraph:
    """Balanced two-community SBM: within-community edge prob a/n, across b/n."""
    if n % 2 != 0:
        raise ValueError(f"n must be even, got {n}")
    if a < 0 or b < 0:
        raise ValueError(f"a and b must be >= 0, got a={a}, b={b}")
    if a > n or b > n:
        raise ValueError(f"a/n and b/n must be probabilities; got a={a}, b={b}, n={n}")
    gen = as_generator(rng)
    labels = np.array([1] * (n // 2) + [-1] * (n // 2), dtype=np.int8)
    gen.shuffle(labels)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, a / n, b / n)
    mask = gen.random(len(iu)) < prob
    edges = sorted(zip(iu[mask].tolist(), ju[mask].tolist()))
    return SbmGraph(n=n, labels=labels, edges=[tuple(e) for e in edges], a=a, b=b,
                    meta={"kind": "sbm"})


# ----------------------------------------------------------------------------
# text format: header "p n m multi", then m lines of sorted 0-based indices;
# the SBM variant inserts one line of n +-1 labels after the header.

def _format_edges(g: PUniformHypergraph) -> list:
    return [" ".join(str(v) for v in e) for e in sorted(tuple(e) for e in g.edges)]


def write_hypergraph_text(g: PUniformHypergraph, path):
    lines = [f"{g.p} {g.n} {g.m} {int(g.multi)}"]
    lines.extend(_format_edges(g))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_hypergraph_text(path) -> PUniformHypergraph:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw:
        raise ValueError(f"{path}: empty hypergraph file")
    head = raw[0].split()
    if len(head) != 4:
        raise ValueError(f"{path}: header must be 'p n m multi', got {raw[0]!r}")
    p, n, m, multi = (int(x) for x in head)
    if len(raw) - 1 != m:
        raise ValueError(f"{path}: header says m={m} but file has {len(raw) - 1} edge lines")
    edges = []
    short = 0
    for ln in raw[1:]:
        t = tuple(int(x) for x in ln.split())
        if len(t) < p:
            short = 1
        edges.append(tuple(sorted(t)))
    meta = {"kind": "file", "short_edges": short}
    return PUniformHypergraph(p=p, n=n, edges=sorted(edges), multi=bool(multi), meta=meta)


def write_sbm_text(g: SbmGraph, path):
    lines = [f"2 {g.n} {g.m} 0"]
    lines.append(" ".join(f"{int(v):+d}" for v in g.labels))
    lines.extend(" ".join(str(v) for v in e) for e in sorted(g.edges))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_sbm_text(path) -> SbmGraph:
    with open(path) as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if len(raw) < 2:
        raise ValueError(f"{path}: SBM file needs a header and a label line")
    head = raw[0].split()
    if len(head) != 4 or head[0] != "2":
        raise ValueError(f"{path}: SBM header must be '2 n m 0', got {raw[0]!r}")
    n, m = int(head[1]), int(head[2])
    labels = np.array([int(x) for x in raw[1].split()], dtype=np.int8)
    if len(labels) != n:
        raise ValueError(f"{path}: label line has {len(labels)} entries, expected {n}")
    if len(raw) - 2 != m:
        raise ValueError(f"{path}: header says m={m} but file has {len(raw) - 2} edge lines")
    edges = [tuple(sorted(int(x) for x in ln.split())) for ln in raw[2:]]
    return SbmGraph(n=n, labels=labels, edges=sorted(edges), a=float("nan"), b=float("nan"),
                    meta={"kind": "file"})
