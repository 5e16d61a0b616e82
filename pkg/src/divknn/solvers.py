"""Exact single-attribute welfare solvers.

Both solvers share the same two-phase shape: prefetch the per-attribute
top-min(k, |D_l|) ranked lists through an oracle, then run k greedy rounds.
Each round scores, for every live attribute, the marginal effect of taking
that attribute's next-ranked vector on the configured welfare:

* Nash (p = 0): maximize log(w_l + eta + s) - log(w_l + eta).
* p in (0, 1]:  maximize (w_l + eta + s)^p - (w_l + eta)^p.
* p < 0:        minimize the same quantity (it is <= 0; the most negative
                marginal is the largest gain in M_p).

Here w_l is the running utility of attribute l and s the similarity of its
next unselected prefetched vector. With an exact oracle the returned set is
welfare-optimal; with an alpha-approximate oracle the welfare is within a
factor alpha of optimal. Ties break to the lowest attribute id, and within
an attribute the oracle order (descending similarity, ascending id) applies.

Marginals are recomputed from (w_l, next s) each round rather than cached;
the attribute count is small, so the k*c recomputation is cheap and immune
to stale-cache bugs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (AttributeTable, Selection, SimilarityFn, VectorSet,
                   WelfareParams, welfare)
from .oracle import ExactScanOracle, RankedList


@dataclass
class GreedyStats:
    """Counters for the greedy phase; useful to verify the O(kc) bound."""

    rounds: int = 0
    comparisons: int = 0
    pool_attributes: int = 0


@dataclass
class AttributeStream:
    """One prefetched ranked list plus its running selection state."""

    ranked: RankedList
    taken: int = 0
    cumsum: float = 0.0

    @property
    def exhausted(self) -> bool:
        return self.taken >= len(self.ranked)

    @property
    def next_sim(self) -> float:
        return float(self.ranked.sims[self.taken])

    def advance(self) -> int:
        vid = int(self.ranked.ids[self.taken])
        self.cumsum += self.next_sim
        self.taken += 1
        return vid


def prefetch_streams(q, k: int, attrs: AttributeTable,
                     oracle) -> list[AttributeStream]:
    """Fetch min(k, |D_l|) ranked entries for every attribute."""
    return [AttributeStream(ranked=oracle(q, a, k)) for a in range(attrs.c)]


def greedy_select(streams: list[AttributeStream], k: int,
                  params: WelfareParams,
                  stats: GreedyStats | None = None) -> tuple[list[int], bool]:
    """Run the k greedy rounds over prefetched streams.

    Returns the chosen vector ids in selection order and a truncation flag
    (set when every stream exhausts before k picks). Stream bookkeeping
    (taken / cumsum) is kept in flat arrays during the loop and written back
    at the end; ``live`` stays ascending so argmax/argmin ties resolve to
    the lowest attribute id.
    """
    eta, p = params.eta, params.p
    c = len(streams)
    sims = [st.ranked.sims for st in streams]
    lens = np.array([len(s) for s in sims], dtype=np.intp)
    taken = np.array([st.taken for st in streams], dtype=np.intp)
    w = np.array([st.cumsum for st in streams], dtype=np.float64)
    nxt = np.array([sims[a][taken[a]] if taken[a] < lens[a] else 0.0
                    for a in range(c)])
    live = np.flatnonzero(taken < lens)
    chosen: list[int] = []
    truncated = False
    for _ in range(k):
        if live.size == 0:
            truncated = True
            break
        wl = w[live]
        base = wl + eta
        if params.is_nash:
            gains = np.log(base + nxt[live]) - np.log(base)
            pos = int(np.argmax(gains))
        elif p > 0:
            gains = np.power(base + nxt[live], p) - np.power(base, p)
            pos = int(np.argmax(gains))
        else:
            gains = np.power(base + nxt[live], p) - np.power(base, p)
            pos = int(np.argmin(gains))
        if stats is not None:
            stats.rounds += 1
            stats.comparisons += int(live.size)
        a = int(live[pos])
        chosen.append(int(streams[a].ranked.ids[taken[a]]))
        w[a] += nxt[a]
        taken[a] += 1
        if taken[a] < lens[a]:
            nxt[a] = sims[a][taken[a]]
        else:
            live = np.delete(live, pos)
    for a in range(c):
        streams[a].taken = int(taken[a])
        streams[a].cumsum = float(w[a])
    return chosen, truncated


def finish_from_streams(chosen: list[int], streams: list[AttributeStream],
                        c: int, params: WelfareParams, truncated: bool,
                        source: str) -> Selection:
    """Assemble a Selection from greedy bookkeeping (no recomputation)."""
    u = np.zeros(c, dtype=np.float64)
    for st in streams:
        u[st.ranked.attribute] = st.cumsum
    return Selection(ids=tuple(chosen), utilities=u,
                     objective=welfare(u, params), truncated=truncated,
                     source=source)


def nash_ann(q, k: int, params: WelfareParams, data: VectorSet,
             attrs: AttributeTable, fn: SimilarityFn, oracle=None,
             stats: GreedyStats | None = None) -> Selection:
    """Greedy Nash-welfare selection of k vectors (single-attribute setting).

    With an exact oracle the result maximizes the Nash welfare over all
    size-k subsets. If fewer than k prefetched vectors exist in total, the
    returned selection is truncated rather than an error.
    """
    attrs.require_single()
    if k < 1:
        raise ValueError("k must be >= 1")
    if not params.is_nash:
        raise ValueError("nash_ann requires p = 0; use p_mean_ann for p != 0")
    if oracle is None:
        oracle = ExactScanOracle(data, attrs, fn)
    streams = prefetch_streams(q, k, attrs, oracle)
    chosen, truncated = greedy_select(streams, k, params, stats)
    return finish_from_streams(chosen, streams, attrs.c, params, truncated,
                               source="full-scan")


def p_mean_ann(q, k: int, params: WelfareParams, data: VectorSet,
               attrs: AttributeTable, fn: SimilarityFn, oracle=None,
               stats: GreedyStats | None = None) -> Selection:
    """Greedy p-mean selection of k vectors (single-attribute setting).

    p = 0 dispatches to :func:`nash_ann`. With an exact oracle the result
    maximizes M_p over all size-k subsets, for every p in (-inf, 1].
    """
    if params.is_nash:
        return nash_ann(q, k, params, data, attrs, fn, oracle=oracle,
                        stats=stats)
    attrs.require_single()
    if k < 1:
        raise ValueError("k must be >= 1")
    if oracle is None:
        oracle = ExactScanOracle(data, attrs, fn)
    streams = prefetch_streams(q, k, attrs, oracle)
    chosen, truncated = greedy_select(streams, k, params, stats)
    return finish_from_streams(chosen, streams, attrs.c, params, truncated,
                               source="full-scan")
