"""Multi-attribute greedy solvers over a candidate pool.

In the multi-attribute setting exact welfare maximization is intractable, so
these solvers greedily grow the answer one vector at a time. Each round
scores every remaining candidate v by the change its inclusion causes in the
objective; only the attributes of v move, so the score is a sum over atb(v):

* Nash:      (1/c) sum_l [log(u_l + s_v + eta) - log(u_l + eta)], maximized.
             With eta = 1 this is the marginal of a monotone submodular
             function that is 0 on the empty set, so k rounds of greedy are
             within a (1 - 1/e) factor of the optimal log Nash welfare.
* p in (0,1]: marginal of sum_l (u_l + eta)^p, maximized.
* p < 0:      the same marginal, minimized (largest decrease wins).

The default execution uses lazy re-evaluation: cached marginals are upper
bounds on current ones (gains only shrink as the selection grows), so a
max-heap of stale scores can skip most recomputation. ``lazy=False`` forces
the naive full rescan; both orders of evaluation produce identical output.

``multi_div_ann`` is the hard-capped baseline: greedy by similarity, skipping
any candidate that would lift some attribute above k' picks. It may stall
before reaching k (finding a feasible size-k set is itself intractable in
general); the result is then truncated rather than an error.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .core import (AttributeTable, Selection, SimilarityFn, VectorSet,
                   WelfareParams, welfare)

POOL_SOURCES = ("full-scan", "union-oracle")


@dataclass(frozen=True, eq=False)
class CandidatePool:
    """Candidates for one query: distinct ids sorted by similarity
    descending, ascending id on ties."""

    ids: np.ndarray    # intp
    sims: np.ndarray   # float64
    source: str = "full-scan"

    def __post_init__(self) -> None:
        if self.source not in POOL_SOURCES:
            raise ValueError(f"unknown pool source {self.source!r}")
        if len(np.unique(self.ids)) != len(self.ids):
            raise ValueError("pool ids must be distinct")

    def __len__(self) -> int:
        return len(self.ids)


def full_scan_pool(q, data: VectorSet, fn: SimilarityFn,
                   limit: int | None = None,
                   source: str = "full-scan") -> CandidatePool:
    """Pool of the ``limit`` most similar vectors (all of them by default)."""
    sims = fn.batch(q, data.data, row_norms=data.norms,
                    row_sqnorms=data.sqnorms)
    n = data.n
    if limit is not None and limit < n:
        # ascending partition at n - limit keeps the top block without
        # negating the full similarity array; boundary ties are resolved
        # afterwards so equal similarities keep ascending-id order
        part = np.argpartition(sims, n - limit)[n - limit:]
        thresh = sims[part].min()
        ids = np.flatnonzero(sims >= thresh).astype(np.intp)
        cand_sims = sims[ids]
        order = np.lexsort((ids, -cand_sims))[:limit]
        return CandidatePool(ids=ids[order], sims=cand_sims[order],
                             source=source)
    ids = np.arange(n, dtype=np.intp)
    order = np.lexsort((ids, -sims))
    return CandidatePool(ids=ids[order], sims=sims[order], source=source)


def _marginal(u: np.ndarray, atb_row, s: float, eta: float, p: float,
              nash: bool) -> float:
    ul = u[list(atb_row)]
    if nash:
        return float(np.sum(np.log(ul + eta + s) - np.log(ul + eta)))
    return float(np.sum(np.power(ul + eta + s, p) - np.power(ul + eta, p)))


def _greedy_pool(q, k: int, pool: CandidatePool, attrs: AttributeTable,
                 eta: float, p: float, nash: bool,
                 lazy: bool = True) -> tuple[list[int], np.ndarray, bool]:
    """Shared greedy engine; returns (chosen ids, utilities, truncated)."""
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    sign = 1.0 if (nash or p > 0) else -1.0  # maximize sign * marginal
    u = np.zeros(attrs.c, dtype=np.float64)
    chosen: list[int] = []
    m = len(pool)
    kk = min(k, m)

    if lazy:
        # Heap entries: (-cached_gain, pool_index, stamp). Cached gains only
        # shrink as the selection grows, so they are upper bounds; an entry
        # is trusted only when its stamp matches the current selection size,
        # otherwise it is refreshed and reinserted. Equal fresh gains pop in
        # pool order, matching the naive scan exactly.
        heap = [(-(sign * _marginal(u, attrs.atb[pool.ids[i]],
                                    float(pool.sims[i]), eta, p, nash)), i, 0)
                for i in range(m)]
        heapq.heapify(heap)
        for _ in range(kk):
            state = len(chosen)
            while True:
                _, i, stamp = heapq.heappop(heap)
                if stamp == state:
                    break
                g = sign * _marginal(u, attrs.atb[pool.ids[i]],
                                     float(pool.sims[i]), eta, p, nash)
                heapq.heappush(heap, (-g, i, state))
            v = int(pool.ids[i])
            chosen.append(v)
            s = float(pool.sims[i])
            for a in attrs.atb[v]:
                u[a] += s
    else:
        remaining = list(range(m))
        for _ in range(kk):
            best_pos, best_gain = 0, -np.inf
            for pos, i in enumerate(remaining):
                g = sign * _marginal(u, attrs.atb[pool.ids[i]],
                                     float(pool.sims[i]), eta, p, nash)
                if g > best_gain:
                    best_pos, best_gain = pos, g
            i = remaining.pop(best_pos)
            v = int(pool.ids[i])
            chosen.append(v)
            s = float(pool.sims[i])
            for a in attrs.atb[v]:
                u[a] += s
    return chosen, u, kk < k


def multi_nash_ann(q, k: int, eta: float, data: VectorSet,
                   attrs: AttributeTable, fn: SimilarityFn,
                   pool: CandidatePool | None = None,
                   lazy: bool = True) -> Selection:
    """Greedy log-Nash-welfare maximization over a pool (or all of P).

    The (1 - 1/e) guarantee on log Nash welfare holds for eta = 1 over the
    full vector set; other eta values and restricted pools run the same
    greedy heuristically.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if pool is None:
        pool = full_scan_pool(q, data, fn)
    chosen, u, truncated = _greedy_pool(q, k, pool, attrs, eta=eta, p=0.0,
                                        nash=True, lazy=lazy)
    params = WelfareParams(p=0.0, eta=eta)
    return Selection(ids=tuple(chosen), utilities=u,
                     objective=welfare(u, params), truncated=truncated,
                     source=pool.source)


def multi_p_mean_ann(q, k: int, params: WelfareParams, data: VectorSet,
                     attrs: AttributeTable, fn: SimilarityFn,
                     pool: CandidatePool | None = None,
                     lazy: bool = True) -> Selection:
    """Greedy p-mean heuristic over a pool: maximize the per-round change of
    sum (u_l + eta)^p for p > 0, minimize it for p < 0. p = 0 dispatches to
    :func:`multi_nash_ann`. No approximation guarantee is asserted."""
    if params.is_nash:
        return multi_nash_ann(q, k, params.eta, data, attrs, fn, pool=pool,
                              lazy=lazy)
    if k < 1:
        raise ValueError("k must be >= 1")
    if pool is None:
        pool = full_scan_pool(q, data, fn)
    chosen, u, truncated = _greedy_pool(q, k, pool, attrs, eta=params.eta,
                                        p=params.p, nash=False, lazy=lazy)
    return Selection(ids=tuple(chosen), utilities=u,
                     objective=welfare(u, params), truncated=truncated,
                     source=pool.source)


def multi_div_ann(q, k: int, kprime: int, data: VectorSet,
                  attrs: AttributeTable, fn: SimilarityFn,
                  pool: CandidatePool | None = None,
                  eta: float = 1.0) -> Selection:
    """Similarity-greedy selection under a hard per-attribute cap k'.

    A candidate is admitted only if every attribute it carries stays within
    k' picks. When every remaining candidate touches a saturated attribute,
    the selection stalls and returns truncated.
    """
    if k < 1 or kprime < 1:
        raise ValueError("k and kprime must be >= 1")
    if pool is None:
        pool = full_scan_pool(q, data, fn)
    if len(pool) == 0:
        raise ValueError("empty candidate pool")
    counts = np.zeros(attrs.c, dtype=np.intp)
    chosen: list[int] = []
    u = np.zeros(attrs.c, dtype=np.float64)
    for i in range(len(pool)):
        if len(chosen) == k:
            break
        v = int(pool.ids[i])
        row = attrs.atb[v]
        if all(counts[a] < kprime for a in row):
            chosen.append(v)
            s = float(pool.sims[i])
            for a in row:
                counts[a] += 1
                u[a] += s
    params = WelfareParams(p=0.0, eta=eta)
    return Selection(ids=tuple(chosen), utilities=u,
                     objective=welfare(u, params),
                     truncated=len(chosen) < k, source=pool.source)
