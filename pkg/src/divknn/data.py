"""Dataset ingestion, synthetic attribute generation, and splitting.

Binary vector containers (bit-exact):

  fvecs  per record: little-endian int32 d, then d little-endian float32
  bvecs  per record: little-endian int32 d, then d unsigned bytes
  ivecs  per record: little-endian int32 d, then d little-endian int32

Every record in a file must share the same d; the record count is inferred
from the file size, and truncated files are rejected. Readers refuse NaN or
Inf payloads.

Attribute files are line-oriented text:

  #c=<int>[;classes=<s1>+<s2>+...]
  <vector_id>,<attr_id>[,<attr_id>...]

Lines starting with ``#`` are comments (the first must be the header above).
Vector ids must cover 0..N-1 exactly once.

Synthetic attributes come in two flavors: ``cluster_attrs`` labels vectors by
k-means cluster (optionally per dimension slice, producing a one-per-class
multi-attribute table), and ``prob_attrs`` draws a skewed categorical label
per vector (90% of the mass on three of twenty attributes).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import AttributeTable, SimilarityFn, VectorSet


# ---------------------------------------------------------------------------
# binary vector containers
# ---------------------------------------------------------------------------

def _read_records(path: str, payload_dtype, payload_itemsize: int) -> np.ndarray:
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0:
        return np.empty((0, 0), dtype=np.float64)
    if raw.size < 4:
        raise ValueError(f"{path}: truncated file (no dimension header)")
    d = int(raw[:4].view("<i4")[0])
    if d <= 0:
        raise ValueError(f"{path}: nonpositive dimension {d}")
    rec = 4 + d * payload_itemsize
    if raw.size % rec != 0:
        raise ValueError(f"{path}: file size {raw.size} is not a multiple of "
                         f"the record size {rec}")
    rows = raw.reshape(-1, rec)
    dims = rows[:, :4].copy().view("<i4").ravel()
    if not (dims == d).all():
        raise ValueError(f"{path}: inconsistent dimensions across records")
    payload = rows[:, 4:].copy().view(payload_dtype)
    out = payload.astype(np.float64).reshape(-1, d)
    if not np.isfinite(out).all():
        raise ValueError(f"{path}: payload contains NaN or Inf")
    return out


def read_fvecs(path: str) -> VectorSet:
    """Load an fvecs file (int32 dim + float32 payload per record)."""
    return VectorSet(_read_records(path, "<f4", 4))


def read_bvecs(path: str) -> VectorSet:
    """Load a bvecs file (int32 dim + uint8 payload per record)."""
    return VectorSet(_read_records(path, np.uint8, 1))


def read_ivecs(path: str) -> np.ndarray:
    """Load an ivecs file (int32 dim + int32 payload) as an int array."""
    return _read_records(path, "<i4", 4).astype(np.int64)


def write_fvecs(path: str, data: np.ndarray) -> None:
    arr = np.ascontiguousarray(data, dtype=np.float32)
    n, d = arr.shape
    out = np.empty((n, 4 + 4 * d), dtype=np.uint8)
    out[:, :4] = np.full(n, d, dtype="<i4")[:, None].view(np.uint8)
    out[:, 4:] = arr.view(np.uint8)
    out.tofile(path)


def write_bvecs(path: str, data: np.ndarray) -> None:
    arr = np.ascontiguousarray(data, dtype=np.uint8)
    n, d = arr.shape
    out = np.empty((n, 4 + d), dtype=np.uint8)
    out[:, :4] = np.full(n, d, dtype="<i4")[:, None].view(np.uint8)
    out[:, 4:] = arr
    out.tofile(path)


def write_ivecs(path: str, data: np.ndarray) -> None:
    arr = np.ascontiguousarray(data, dtype="<i4")
    n, d = arr.shape
    out = np.empty((n, 4 + 4 * d), dtype=np.uint8)
    out[:, :4] = np.full(n, d, dtype="<i4")[:, None].view(np.uint8)
    out[:, 4:] = arr.view(np.uint8)
    out.tofile(path)


def read_vectors(path: str) -> VectorSet:
    """Dispatch on extension: .fvecs or .bvecs."""
    if path.endswith(".fvecs"):
        return read_fvecs(path)
    if path.endswith(".bvecs"):
        return read_bvecs(path)
    raise ValueError(f"{path}: unsupported vector container "
                     "(expected .fvecs or .bvecs)")


# ---------------------------------------------------------------------------
# synthetic attributes
# ---------------------------------------------------------------------------

def _kmeans_pp_init(x: np.ndarray, c: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((c, x.shape[1]), dtype=np.float64)
    centers[0] = x[int(rng.integers(0, n))]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, c):
        total = d2.sum()
        if total <= 0:
            centers[j] = x[int(rng.integers(0, n))]
            continue
        centers[j] = x[int(rng.choice(n, p=d2 / total))]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(x: np.ndarray, c: int, rng: np.random.Generator,
           max_iter: int = 50, tol: float = 1e-4) -> np.ndarray:
    """Lloyd iterations with k-means++ seeding; stops after ``max_iter``
    rounds or when the relative inertia improvement drops below ``tol``.
    Deterministic given the generator state; ties go to the lowest center."""
    centers = _kmeans_pp_init(x, c, rng)
    sq = np.einsum("ij,ij->i", x, x)
    prev_inertia = math.inf
    labels = np.zeros(len(x), dtype=np.intp)
    for _ in range(max_iter):
        d2 = sq[:, None] - 2.0 * (x @ centers.T) + np.einsum("ij,ij->i", centers, centers)[None, :]
        np.maximum(d2, 0.0, out=d2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(len(x)), labels].sum())
        for j in range(c):
            mask = labels == j
            if mask.any():
                centers[j] = x[mask].mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its center
                far = int(np.argmax(d2[np.arange(len(x)), labels]))
                centers[j] = x[far]
        if prev_inertia < math.inf and prev_inertia > 0:
            if (prev_inertia - inertia) < tol * prev_inertia:
                break
        prev_inertia = inertia
    return labels


def cluster_attrs(data: VectorSet, c: int, seed: int,
                  chunks: Optional[int] = None) -> AttributeTable:
    """Cluster-derived attributes: each vector is labeled by its k-means
    cluster. With ``chunks=m`` the dimensions are split into m equal slices,
    each clustered independently into c clusters, yielding a one-per-class
    table with m classes and c*m attributes total."""
    if c < 2:
        raise ValueError("c must be >= 2")
    if c > data.n:
        raise ValueError("more clusters than vectors")
    if chunks is None:
        labels = _lloyd(np.asarray(data.data), c, np.random.default_rng(seed))
        return AttributeTable.from_labels(labels, c)
    m = int(chunks)
    if m < 1 or data.d % m != 0:
        raise ValueError("d must be divisible by chunks")
    width = data.d // m
    atb = [[] for _ in range(data.n)]
    classes = []
    for i in range(m):
        sl = np.ascontiguousarray(data.data[:, i * width:(i + 1) * width])
        labels = _lloyd(sl, c, np.random.default_rng([seed, i]))
        for v in range(data.n):
            atb[v].append(i * c + int(labels[v]))
        classes.append(range(i * c, (i + 1) * c))
    return AttributeTable(atb, c=c * m, classes=classes)


PROB_ATTR_COUNT = 20
PROB_HEAD = 3          # attributes {0, 1, 2} share 90% of the mass
PROB_HEAD_MASS = 0.9


def prob_attrs(n: int, seed: int) -> AttributeTable:
    """Skewed random single-attribute table with c = 20: with probability
    0.9 a uniform draw from {0, 1, 2}, otherwise uniform over {3..19}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    head = rng.random(n) < PROB_HEAD_MASS
    labels = np.where(head, rng.integers(0, PROB_HEAD, size=n),
                      rng.integers(PROB_HEAD, PROB_ATTR_COUNT, size=n))
    return AttributeTable.from_labels(labels, PROB_ATTR_COUNT)


def split_dataset(data: VectorSet, seed: int) -> tuple[VectorSet, VectorSet]:
    """Deterministic shuffled 4:1 split into (base, queries)."""
    if data.n < 5:
        raise ValueError("need at least 5 vectors to split 4:1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(data.n)
    n_base = math.ceil(4 * data.n / 5)
    base_idx = np.sort(perm[:n_base])
    query_idx = np.sort(perm[n_base:])
    return VectorSet(data.data[base_idx]), VectorSet(data.data[query_idx])


# ---------------------------------------------------------------------------
# attribute file format
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(r"^#c=(\d+)(?:;classes=([\d+]+))?$")


def write_attrs(path: str, attrs: AttributeTable) -> None:
    with open(path, "w", encoding="ascii") as f:
        header = f"#c={attrs.c}"
        if attrs.classes is not None:
            header += ";classes=" + "+".join(str(len(g)) for g in attrs.classes)
        f.write(header + "\n")
        for i, row in enumerate(attrs.atb):
            f.write(",".join([str(i)] + [str(a) for a in row]) + "\n")


def read_attrs(path: str) -> AttributeTable:
    """Parse an attribute file; ids must cover 0..N-1 with no duplicates."""
    rows: dict[int, tuple[int, ...]] = {}
    c = None
    classes = None
    with open(path, "r", encoding="ascii") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER_RE.match(line)
                if m and c is None:
                    c = int(m.group(1))
                    if m.group(2):
                        sizes = [int(s) for s in m.group(2).split("+")]
                        bounds = np.cumsum([0] + sizes)
                        classes = [range(bounds[i], bounds[i + 1])
                                   for i in range(len(sizes))]
                continue
            if c is None:
                raise ValueError(f"{path}:{lineno}: missing #c=<int> header")
            parts = line.split(",")
            if len(parts) < 2:
                raise ValueError(f"{path}:{lineno}: expected vector_id,attr_id[,...]")
            vid = int(parts[0])
            if vid in rows:
                raise ValueError(f"{path}:{lineno}: duplicate vector id {vid}")
            ats = tuple(int(a) for a in parts[1:])
            for a in ats:
                if a < 0 or a >= c:
                    raise ValueError(f"{path}:{lineno}: attribute id {a} "
                                     f"outside [0, {c})")
            rows[vid] = ats
    if c is None:
        raise ValueError(f"{path}: missing #c=<int> header")
    if not rows:
        raise ValueError(f"{path}: no attribute rows")
    n = max(rows) + 1
    missing = [i for i in range(n) if i not in rows]
    if missing:
        raise ValueError(f"{path}: missing attribute row for vector id "
                         f"{missing[0]}")
    return AttributeTable([rows[i] for i in range(n)], c=c, classes=classes)


# ---------------------------------------------------------------------------
# dataset presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Preset:
    """Per-dataset defaults: similarity kind, smoothing, and the smoothing
    used when sweeping the welfare exponent."""

    similarity: str
    eta: float
    delta: Optional[float] = None
    sweep_eta: Optional[float] = None

    def make_similarity(self, delta: Optional[float] = None) -> SimilarityFn:
        d = delta if delta is not None else (self.delta or 0.0)
        return SimilarityFn(self.similarity, delta=d)


PRESETS: dict[str, Preset] = {
    "amazon": Preset("one-plus-cosine", eta=50.0),
    "arxiv": Preset("reciprocal-euclidean", eta=0.01, delta=0.01,
                    sweep_eta=0.0001),
    "sift-clus": Preset("reciprocal-euclidean", eta=0.01, delta=0.01,
                        sweep_eta=0.0001),
    "sift-prob": Preset("reciprocal-euclidean", eta=0.01, delta=0.01,
                        sweep_eta=0.0001),
    "deep-clus": Preset("one-plus-cosine", eta=50.0),
    "deep-prob": Preset("one-plus-cosine", eta=50.0),
}


@dataclass(frozen=True)
class DatasetBundle:
    """A loaded benchmark dataset: base vectors, query vectors, attributes,
    and the preset that configured similarity and smoothing."""

    base: VectorSet
    queries: VectorSet
    attrs: AttributeTable
    preset: Preset

    def __post_init__(self) -> None:
        if self.base.d != self.queries.d:
            raise ValueError("base and query dimensions differ")
        if self.attrs.n != self.base.n:
            raise ValueError("attribute table does not cover the base set")
