"""Domain types and welfare objectives shared by solvers, baselines, and metrics.

Building blocks:

* :class:`VectorSet` -- immutable n x d matrix of input vectors.
* :class:`AttributeTable` -- per-vector attribute sets plus inverted lists.
* :class:`SimilarityFn` -- nonnegative similarity between vectors.
* :class:`WelfareParams` -- welfare exponent ``p`` and smoothing ``eta``.
* :func:`welfare` / :func:`log_nsw` -- Nash (geometric-mean) and generalized
  p-mean welfare over per-attribute utilities.

All types are immutable after construction and safe to share across threads;
the operations are pure functions. Similarity values are always nonnegative
because utilities are sums of similarities and the welfare objectives assume
nonnegative utility. Everything accumulates in 64-bit floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

SIMILARITY_KINDS = ("one-plus-cosine", "reciprocal-euclidean", "dot-product")


class VectorSet:
    """Immutable dense matrix of input vectors; row i is vector id i."""

    def __init__(self, data) -> None:
        arr = np.ascontiguousarray(np.asarray(data, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {arr.shape}")
        # an empty set (e.g. from an empty file) may be constructed; any
        # actual use of its vectors fails with a dimension/id error
        if arr.shape[0] > 0 and arr.shape[1] < 1:
            raise ValueError("dimension must be >= 1")
        if arr.size and not np.isfinite(arr).all():
            raise ValueError("vector payload contains NaN or Inf")
        arr.setflags(write=False)
        self._data = arr
        self._norms: Optional[np.ndarray] = None
        self._sqnorms: Optional[np.ndarray] = None

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @property
    def d(self) -> int:
        return self._data.shape[1]

    @property
    def norms(self) -> np.ndarray:
        """Per-row Euclidean norms, computed once and cached."""
        if self._norms is None:
            self._norms = np.linalg.norm(self._data, axis=1)
            self._norms.setflags(write=False)
        return self._norms

    @property
    def sqnorms(self) -> np.ndarray:
        """Per-row squared norms, computed once and cached."""
        if self._sqnorms is None:
            self._sqnorms = np.einsum("ij,ij->i", self._data, self._data)
            self._sqnorms.setflags(write=False)
        return self._sqnorms

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"VectorSet(n={self.n}, d={self.d})"


class AttributeTable:
    """Attribute assignments ``atb(v)`` over [0, c) plus inverted lists D_l.

    ``atb`` holds one sorted id tuple per vector; ``inverted[l]`` is the
    ascending array of vector ids carrying attribute l. ``classes``, when
    present, partitions [0, c) into disjoint attribute classes; in
    one-per-class mode every vector carries exactly one attribute from each
    class.
    """

    def __init__(self, atb: Sequence[Sequence[int]], c: int,
                 classes: Optional[Sequence[Sequence[int]]] = None) -> None:
        if c < 1:
            raise ValueError("attribute count c must be >= 1")
        self.c = int(c)
        self.atb: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(int(a) for a in row)) for row in atb
        )
        for i, row in enumerate(self.atb):
            if len(row) == 0:
                raise ValueError(f"vector {i} has no attributes")
            if len(set(row)) != len(row):
                raise ValueError(f"vector {i} has duplicate attributes")
            if row[0] < 0 or row[-1] >= self.c:
                raise ValueError(f"vector {i} has attribute id outside [0, {self.c})")
        inv: list[list[int]] = [[] for _ in range(self.c)]
        for i, row in enumerate(self.atb):
            for a in row:
                inv[a].append(i)
        self.inverted: tuple[np.ndarray, ...] = tuple(
            np.asarray(ids, dtype=np.intp) for ids in inv
        )
        self.classes: Optional[tuple[np.ndarray, ...]] = None
        if classes is not None:
            cls = tuple(np.asarray(sorted(int(a) for a in grp), dtype=np.intp)
                        for grp in classes)
            flat = np.concatenate(cls) if cls else np.empty(0, dtype=np.intp)
            if len(flat) != self.c or len(np.unique(flat)) != self.c:
                raise ValueError("classes must partition [0, c)")
            self.classes = cls
        # fast path for the single-attribute setting
        if all(len(row) == 1 for row in self.atb):
            self._labels = np.asarray([row[0] for row in self.atb], dtype=np.intp)
            self._labels.setflags(write=False)
        else:
            self._labels = None

    @classmethod
    def from_labels(cls, labels, c: int,
                    classes: Optional[Sequence[Sequence[int]]] = None) -> "AttributeTable":
        """Build a single-attribute table from one label per vector."""
        labels = np.asarray(labels, dtype=np.intp)
        return cls([(int(a),) for a in labels], c, classes=classes)

    @property
    def n(self) -> int:
        return len(self.atb)

    @property
    def is_single(self) -> bool:
        return self._labels is not None

    @property
    def labels(self) -> np.ndarray:
        """Label array for single-attribute tables; error otherwise."""
        if self._labels is None:
            raise ValueError("table is multi-attribute; no scalar labels")
        return self._labels

    def require_single(self) -> None:
        if not self.is_single:
            raise ValueError("operation requires a single-attribute table "
                             "(every vector must carry exactly one attribute)")

    def one_per_class(self) -> bool:
        """True when classes are present and each vector has exactly one
        attribute per class."""
        if self.classes is None:
            return False
        cls_of = np.empty(self.c, dtype=np.intp)
        for ci, grp in enumerate(self.classes):
            cls_of[grp] = ci
        m = len(self.classes)
        for row in self.atb:
            hit = np.bincount(cls_of[list(row)], minlength=m)
            if not (hit == 1).all():
                return False
        return True

    def __repr__(self) -> str:
        mode = "single" if self.is_single else "multi"
        return f"AttributeTable(n={self.n}, c={self.c}, {mode})"


@dataclass
class SimilarityFn:
    """Similarity configuration; all kinds return finite values >= 0.

    kinds:
      one-plus-cosine      1 + <u,v> / (|u||v|), in [0, 2]
      reciprocal-euclidean 1 / (|u - v| + delta), delta > 0
      dot-product          max(<u,v>, 0); negative products are clamped to 0
                           and counted in ``clamp_events`` (diagnostic only)
    """

    kind: str
    delta: float = 0.0
    clamp_events: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.kind not in SIMILARITY_KINDS:
            raise ValueError(f"unknown similarity kind {self.kind!r}")
        if self.kind == "reciprocal-euclidean" and not self.delta > 0:
            raise ValueError("reciprocal-euclidean requires delta > 0")

    def reset_clamp_events(self) -> None:
        self.clamp_events = 0

    def batch(self, q: np.ndarray, rows: np.ndarray,
              row_norms: Optional[np.ndarray] = None,
              row_sqnorms: Optional[np.ndarray] = None) -> np.ndarray:
        """Similarity of query q against every row of ``rows`` (float64)."""
        q = np.asarray(q, dtype=np.float64)
        if q.ndim != 1 or rows.ndim != 2 or rows.shape[1] != q.shape[0]:
            raise ValueError("dimension mismatch between query and vectors")
        if not np.isfinite(q).all():
            raise ValueError("query contains NaN or Inf")
        if self.kind == "one-plus-cosine":
            qn = float(np.linalg.norm(q))
            if qn == 0.0:
                raise ValueError("zero query vector under one-plus-cosine")
            if row_norms is None:
                row_norms = np.linalg.norm(rows, axis=1)
            if np.any(row_norms == 0.0):
                raise ValueError("zero input vector under one-plus-cosine")
            s = rows @ q
            s /= row_norms
            s /= qn
            s += 1.0
            return s
        if self.kind == "reciprocal-euclidean":
            if row_sqnorms is None:
                row_sqnorms = np.einsum("ij,ij->i", rows, rows)
            d2 = rows @ q
            d2 *= -2.0
            d2 += row_sqnorms
            d2 += float(q @ q)
            np.maximum(d2, 0.0, out=d2)
            np.sqrt(d2, out=d2)
            d2 += self.delta
            np.divide(1.0, d2, out=d2)
            return d2
        # dot-product
        s = rows @ q
        neg = int(np.count_nonzero(s < 0.0))
        if neg:
            self.clamp_events += neg
            s = np.maximum(s, 0.0)
        return s

    def batch_ids(self, q: np.ndarray, data: "VectorSet",
                  ids: np.ndarray) -> np.ndarray:
        """Similarity of q against data rows ``ids``, gathering only the
        cached auxiliary the kind actually needs."""
        rows = data.data[ids]
        if self.kind == "one-plus-cosine":
            return self.batch(q, rows, row_norms=data.norms[ids])
        if self.kind == "reciprocal-euclidean":
            return self.batch(q, rows, row_sqnorms=data.sqnorms[ids])
        return self.batch(q, rows)


def similarity(fn: SimilarityFn, u, v) -> float:
    """Similarity between two vectors under ``fn``; always finite and >= 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be 1-D vectors of equal dimension")
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        raise ValueError("non-finite input vector")
    return float(fn.batch(u, v[None, :])[0])


@dataclass(frozen=True)
class WelfareParams:
    """Welfare exponent p in (-inf, 1] and smoothing eta > 0.

    p = 0 denotes the Nash (geometric-mean) objective; it is a tagged special
    case, not a limit evaluation.
    """

    p: float = 0.0
    eta: float = 1.0

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValueError("eta must be > 0")
        if not self.p <= 1:
            raise ValueError("p must lie in (-inf, 1]")

    @property
    def is_nash(self) -> bool:
        return self.p == 0.0


@dataclass(frozen=True, eq=False)
class Selection:
    """Result of a solver: chosen ids (in selection order), the induced
    per-attribute utilities, and the configured welfare value.

    ``truncated`` is set when fewer than k vectors could be selected.
    ``source`` tags how candidates were obtained ("full-scan" or
    "union-oracle").
    """

    ids: tuple[int, ...]
    utilities: Optional[np.ndarray] = None
    objective: Optional[float] = None
    truncated: bool = False
    source: str = "full-scan"

    def __post_init__(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("selection ids must be distinct")

    def __len__(self) -> int:
        return len(self.ids)


def utilities(q, ids: Sequence[int], data: VectorSet, attrs: AttributeTable,
              fn: SimilarityFn) -> np.ndarray:
    """Per-attribute utilities of the id set: entry l sums sigma(q, v) over
    selected v carrying attribute l. A multi-attribute vector contributes to
    every attribute it carries."""
    idx = np.asarray(list(ids), dtype=np.intp)
    u = np.zeros(attrs.c, dtype=np.float64)
    if idx.size == 0:
        return u
    if idx.min() < 0 or idx.max() >= data.n:
        raise ValueError("selection contains an invalid vector id")
    sims = fn.batch_ids(q, data, idx)
    if attrs.is_single:
        np.add.at(u, attrs.labels[idx], sims)
    else:
        for i, s in zip(idx, sims):
            for a in attrs.atb[i]:
                u[a] += s
    return u


def welfare(util: np.ndarray, params: WelfareParams) -> float:
    """Welfare M_p(u + eta) of a utility array.

    p = 0 gives the geometric mean prod(u_l + eta)^(1/c), evaluated in
    log-space; p != 0 gives ((1/c) sum (u_l + eta)^p)^(1/p), evaluated via
    logsumexp so that large |p| neither overflows nor underflows.
    """
    u = np.asarray(util, dtype=np.float64)
    if u.ndim != 1 or u.size < 1:
        raise ValueError("utilities must be a nonempty 1-D array")
    if np.any(u < 0):
        raise ValueError("negative utility")
    w = np.log(u + params.eta)
    if params.is_nash:
        return float(np.exp(w.mean()))
    p = params.p
    return float(np.exp((logsumexp(p * w) - np.log(u.size)) / p))


def log_nsw(util: np.ndarray, eta: float) -> float:
    """Logarithm of the Nash welfare: (1/c) sum log(u_l + eta)."""
    u = np.asarray(util, dtype=np.float64)
    if np.any(u < 0):
        raise ValueError("negative utility")
    if not eta > 0:
        raise ValueError("eta must be > 0")
    return float(np.mean(np.log(u + eta)))


def finish_selection(q, ids: Sequence[int], data: VectorSet,
                     attrs: AttributeTable, fn: SimilarityFn,
                     params: WelfareParams, truncated: bool = False,
                     source: str = "full-scan") -> Selection:
    """Build a Selection, recomputing utilities and objective from scratch."""
    u = utilities(q, ids, data, attrs, fn)
    return Selection(ids=tuple(int(i) for i in ids), utilities=u,
                     objective=welfare(u, params), truncated=truncated,
                     source=source)
