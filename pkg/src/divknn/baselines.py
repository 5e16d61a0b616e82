"""Standard top-k search, the hard-capped baseline, and the
fetch-then-select heuristic.

``div_ann`` maximizes total similarity under a cap of k' picks per
attribute; a partition-matroid constraint in the single-attribute setting,
so top-k' per attribute followed by a global top-k of the capped union is
exact. ``fetch_union`` pulls the L globally most similar candidates in one
pass and runs the welfare greedy inside that pool, trading a little welfare
for one scan instead of one per attribute.
"""

from __future__ import annotations

import numpy as np

from .core import (AttributeTable, Selection, SimilarityFn, VectorSet,
                   WelfareParams, utilities, welfare)
from .multi import CandidatePool, full_scan_pool
from .oracle import ExactScanOracle, RankedList
from .solvers import (AttributeStream, GreedyStats, finish_from_streams,
                      greedy_select)


def top_k(q, k: int, data: VectorSet, fn: SimilarityFn,
          pool: CandidatePool | None = None,
          attrs: AttributeTable | None = None,
          params: WelfareParams | None = None) -> Selection:
    """The k most similar vectors, ties by ascending id.

    Scope is the full set by default, or a candidate pool. Utilities and
    objective are filled when an attribute table (and optionally welfare
    params) are supplied.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if pool is None:
        pool = full_scan_pool(q, data, fn, limit=k)
    ids = [int(i) for i in pool.ids[:k]]
    truncated = len(ids) < k
    if attrs is None:
        return Selection(ids=tuple(ids), truncated=truncated,
                         source=pool.source)
    params = params or WelfareParams()
    u = utilities(q, ids, data, attrs, fn)
    return Selection(ids=tuple(ids), utilities=u,
                     objective=welfare(u, params), truncated=truncated,
                     source=pool.source)


def div_ann(q, k: int, kprime: int, data: VectorSet, attrs: AttributeTable,
            fn: SimilarityFn, oracle=None,
            params: WelfareParams | None = None) -> Selection:
    """Most similar k vectors subject to at most k' per attribute
    (single-attribute setting; exact for this separable constraint)."""
    attrs.require_single()
    if k < 1 or kprime < 1:
        raise ValueError("k and kprime must be >= 1")
    if oracle is None:
        oracle = ExactScanOracle(data, attrs, fn)
    capped_ids = []
    capped_sims = []
    for a in range(attrs.c):
        ranked = oracle(q, a, kprime)
        capped_ids.append(ranked.ids)
        capped_sims.append(ranked.sims)
    ids = np.concatenate(capped_ids) if capped_ids else np.empty(0, np.intp)
    sims = np.concatenate(capped_sims) if capped_sims else np.empty(0)
    order = np.lexsort((ids, -sims))[:k]
    chosen = [int(i) for i in ids[order]]
    params = params or WelfareParams()
    u = utilities(q, chosen, data, attrs, fn)
    return Selection(ids=tuple(chosen), utilities=u,
                     objective=welfare(u, params),
                     truncated=len(chosen) < k, source="full-scan")


def fetch_union(q, k: int, L: int, params: WelfareParams, data: VectorSet,
                attrs: AttributeTable, fn: SimilarityFn,
                stats: GreedyStats | None = None) -> Selection:
    """Welfare greedy restricted to the top-L global candidates.

    The pool is fetched in one pass regardless of attributes, grouped into
    per-attribute streams (already similarity-sorted), and the same greedy
    rule as the exact solvers picks k vectors inside it. L = n recovers the
    exact solver; L = k degenerates to plain top-k.
    """
    attrs.require_single()
    if k < 1:
        raise ValueError("k must be >= 1")
    if L < k:
        raise ValueError("pool size L must be >= k")
    pool = full_scan_pool(q, data, fn, limit=L, source="union-oracle")
    labels = attrs.labels[pool.ids]
    # group the pool into per-attribute streams in one stable pass; within
    # an attribute the pool order (similarity descending) is preserved
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(attrs.c + 1))
    streams: list[AttributeStream] = []
    for a in range(attrs.c):
        part = order[bounds[a]:bounds[a + 1]]
        streams.append(AttributeStream(ranked=RankedList(
            attribute=a, ids=pool.ids[part], sims=pool.sims[part])))
    if stats is not None:
        stats.pool_attributes = int(np.count_nonzero(np.diff(bounds)))
    chosen, truncated = greedy_select(streams, k, params, stats)
    return finish_from_streams(chosen, streams, attrs.c, params, truncated,
                               source="union-oracle")
