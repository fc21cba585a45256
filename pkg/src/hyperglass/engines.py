"""Dense batched annealing engines.

These run many Metropolis chains at once as numpy array programs: one
chain per (system, restart) pair for pairwise couplings, one per restart
for cubic tensors.  They exist for throughput; the reference semantics
live in `solvers.anneal_max` and the exact evaluators, and every engine
re-evaluates its reported configuration exactly before returning.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import as_generator

__all__ = ["ising_from_monomials", "anneal_ising", "anneal_cubic"]


def ising_from_monomials(mono) -> tuple[np.ndarray, np.ndarray, float]:
    """Dense (J, h, const) from a degree <= 2 monomial expansion.

    H(s) = const + h . s + (1/2) s^T J s with J symmetric, zero diagonal.
    """
    if mono.max_degree() > 2:
        raise ValueError("monomial expansion has degree > 2")
    n = mono.n
    J = np.zeros((n, n))
    h = np.zeros(n)
    const = mono.const
    for idx, coeff in mono.groups:
        k = idx.shape[1]
        if k == 1:
            np.add.at(h, idx[:, 0], coeff)
        elif k == 2:
            np.add.at(J, (idx[:, 0], idx[:, 1]), coeff)
            np.add.at(J, (idx[:, 1], idx[:, 0]), coeff)
    return J, h, const


def _ladder(beta0: float, beta1: float, sweeps: int) -> np.ndarray:
    if sweeps == 1:
        return np.array([beta1])
    t = np.arange(sweeps) / (sweeps - 1)
    return beta0 * (beta1 / beta0) ** t


def anneal_ising(J, h=None, const=0.0, *, restarts: int = 8, sweeps: int = 10000,
                 beta0: float = 0.1, beta1: float = 20.0, rng=None,
                 swap_moves: bool = False, init=None) -> dict:
    """Batched Metropolis maximization of const + h.s + (1/2) s^T J s, s in {+-1}^n.

    J is one (n, n) coupling matrix or a stack (S, n, n); every system
    runs `restarts` independent chains.  Single-flip proposals walk the
    sites in order; with `swap_moves` the proposals exchange two opposite
    spins so the magnetization of the initial condition is preserved.
    `init` optionally provides the (S*restarts, n) starting spins.
    Returns per-system best configurations with exactly re-evaluated
    values.
    """
    J = np.asarray(J, dtype=np.float64)
    if J.ndim == 2:
        J = J[None]
    S, n = J.shape[0], J.shape[1]
    if J.shape != (S, n, n):
        raise ValueError(f"J must be (n, n) or (S, n, n), got {J.shape}")
    if np.abs(np.einsum("sii->si", J)).max() > 0:
        raise ValueError("J must have zero diagonal")
    if h is None:
        h = np.zeros(n)
    h = np.asarray(h, dtype=np.float64)
    if h.ndim == 1:
        h = np.broadcast_to(h, (S, n))
    const = np.broadcast_to(np.asarray(const, dtype=np.float64), (S,))
    gen = as_generator(rng)
    R = restarts
    B = S * R
    sys_idx = np.repeat(np.arange(S), R)

    if init is not None:
        sigma = np.array(init, dtype=np.float64)
        if sigma.shape != (B, n):
            raise ValueError(f"init must have shape {(B, n)}, got {sigma.shape}")
    elif swap_moves:
        if n % 2 != 0:
            raise ValueError("swap_moves default init needs even n")
        half = np.concatenate([np.ones(n // 2), -np.ones(n // 2)])
        sigma = np.stack([gen.permutation(half) for _ in range(B)])
    else:
        sigma = np.where(gen.random((B, n)) < 0.5, 1.0, -1.0)

    sig3 = sigma.reshape(S, R, n)
    L = (sig3 @ J).reshape(B, n) + h[sys_idx]
    # (sigma * (L + h)) / 2 = h.s + (1/2) s^T J s  since L already includes h once
    H = const[sys_idx] + (sigma * (L + h[sys_idx])).sum(axis=1) / 2.0
    best_H = H.copy()
    best_sigma = sigma.copy()

    for beta in _ladder(beta0, beta1, sweeps):
        if swap_moves:
            for _ in range(n):
                i_vec = gen.integers(0, n, size=B)
                j_vec = gen.integers(0, n, size=B)
                si = sigma[np.arange(B), i_vec]
                sj = sigma[np.arange(B), j_vec]
                movable = si != sj
                Li = L[np.arange(B), i_vec]
                Lj = L[np.arange(B), j_vec]
                Jij = J[sys_idx, i_vec, j_vec]
                delta = -2.0 * si * Li - 2.0 * sj * Lj + 4.0 * Jij * si * sj
                accept = movable & (
                    (delta >= 0) | (gen.random(B) < np.exp(np.minimum(beta * delta, 0.0))))
                if not accept.any():
                    continue
                acc = np.flatnonzero(accept)
                di = -2.0 * si[acc]
                dj = -2.0 * sj[acc]
                sigma[acc, i_vec[acc]] += di
                sigma[acc, j_vec[acc]] += dj
                L[acc] += (di[:, None] * J[sys_idx[acc], i_vec[acc]]
                           + dj[:, None] * J[sys_idx[acc], j_vec[acc]])
                H[acc] += delta[acc]
                improved = H > best_H
                if improved.any():
                    best_H[improved] = H[improved]
                    best_sigma[improved] = sigma[improved]
        else:
            for b in range(n):
                sb = sigma[:, b]
                delta = -2.0 * sb * L[:, b]
                accept = (delta >= 0) | (
                    gen.random(B) < np.exp(np.minimum(beta * delta, 0.0)))
                if not accept.any():
                    continue
                acc = np.flatnonzero(accept)
                d = -2.0 * sb[acc]
                sigma[acc, b] += d
                L[acc] += d[:, None] * J[sys_idx[acc], b]
                H[acc] += delta[acc]
                improved = H > best_H
                if improved.any():
                    best_H[improved] = H[improved]
                    best_sigma[improved] = sigma[improved]

    grid = best_H.reshape(S, R)
    pick = np.argmax(grid, axis=1)
    cfg = best_sigma.reshape(S, R, n)[np.arange(S), pick]
    value = (const + np.einsum("sn,sn->s", cfg, h)
             + 0.5 * np.einsum("si,sij,sj->s", cfg, J, cfg))
    return {
        "value": value,
        "config": cfg.astype(np.int8),
        "restart_values": grid,
    }


def anneal_cubic(T, field=None, *, restarts: int = 8, sweeps: int = 8000,
                 beta0: float = 0.1, beta1: float = 20.0, rng=None) -> dict:
    """Batched Metropolis maximization of a cubic +-1 form.

    H(s) = sum_{i<j<k} T[i,j,k] s_i s_j s_k + field . s, with T given as
    the full symmetric (n, n, n) array (all six permutations filled;
    zero whenever an index repeats).  Chains are batched over restarts;
    Q[r, a] = (1/2) s_r^T T[a] s_r carries the local fields so one flip
    costs a rank-one matmul update.
    """
    T64 = np.asarray(T, dtype=np.float64)
    T = T64.astype(np.float32)
    n = T.shape[0]
    if T.shape != (n, n, n):
        raise ValueError(f"T must be (n, n, n), got {T.shape}")
    if field is None:
        field = np.zeros(n)
    field = np.asarray(field, dtype=np.float64)
    gen = as_generator(rng)
    R = restarts
    # Tb[b] = T[:, b, :] made contiguous so per-site slices are cheap
    Tb = np.ascontiguousarray(T.transpose(1, 0, 2))

    sigma = np.where(gen.random((R, n)) < 0.5, np.float32(1), np.float32(-1))
    Q = np.einsum("ajk,rj,rk->ra", T, sigma, sigma, optimize=True).astype(np.float64) / 2.0
    H = (sigma.astype(np.float64) * Q).sum(axis=1) / 3.0 + sigma @ field
    best_H = H.copy()
    best_sigma = sigma.copy()

    for beta in _ladder(beta0, beta1, sweeps):
        for b in range(n):
            sb = sigma[:, b].astype(np.float64)
            delta = -2.0 * sb * (Q[:, b] + field[b])
            accept = (delta >= 0) | (
                gen.random(R) < np.exp(np.minimum(beta * delta, 0.0)))
            if not accept.any():
                continue
            acc = np.flatnonzero(accept)
            upd = sigma[acc] @ Tb[b].T  # (A, n) float32: rows (T[a, b, :] . s)
            sigma[acc, b] *= -1
            Q[acc] += (-2.0 * sb[acc])[:, None] * upd.astype(np.float64)
            H[acc] += delta[acc]
            improved = H > best_H
            if improved.any():
                best_H[improved] = H[improved]
                best_sigma[improved] = sigma[improved]

    k = int(np.argmax(best_H))
    s = best_sigma[k].astype(np.float64)
    value = s @ field
    for b in range(n):
        value += (s @ (T64[b] @ s)) * s[b] / 6.0
    return {"value": float(value), "config": best_sigma[k].astype(np.int8),
            "restart_values": best_H}


def exact_pm1_max(evaluate, n: int) -> tuple[float, np.ndarray]:
    """Exhaustive +-1 maximum for tiny n given a batched evaluator.

    `evaluate` maps an (m, n) +-1 float array to (m,) values.  Ties break
    toward the first configuration in the generated (lexicographic over
    labels 0 -> +1, 1 -> -1) order.
    """
    if n > 24:
        raise ValueError("exhaustive +-1 search limited to n <= 24")
    total = 1 << n
    best_val = -np.inf
    best = None
    chunk = 1 << 14
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(n - 1, -1, -1)) & 1
        block = 1.0 - 2.0 * bits
        vals = evaluate(block)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val = float(vals[k])
            best = block[k].copy()
    return best_val, best
