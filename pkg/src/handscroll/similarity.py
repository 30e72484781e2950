"""Nearest-neighbor retrieval over feature vectors and theme texts.

Image features (seals, core paintings) are served by a cosine LSH index:
sign-of-random-projection codes, multi-probe candidate retrieval in code
distance order, exact cosine re-ranking of the candidates. Theme text
similarity uses character n-gram TF-IDF vectors.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from math import log
from pathlib import Path
from typing import Mapping

import numpy as np

LSH_MAGIC = b"LSH1"

# Byte-wise popcount lookup for Hamming distances over packed codes.
_POP8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


class SimilarityError(ValueError):
    pass


class DimensionMismatchError(SimilarityError):
    pass


class ZeroVectorError(SimilarityError):
    pass


class UnknownIdError(KeyError):
    pass


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatchError(f"shapes {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class LshIndex:
    """Sign-of-projection LSH over unit hyperplanes.

    ``codes[i, t]`` packs the item's H sign bits for table t into one
    uint64, so buckets are the fibers of the code map and candidate
    probing is a Hamming-distance scan over the packed codes.
    """

    seed: int
    tables: int
    bits: int
    dim: int
    ids: tuple[str, ...]
    codes: np.ndarray  # (n, tables) uint64
    hyperplanes: np.ndarray  # (tables, bits, dim) unit rows
    vectors: np.ndarray | None  # (n, dim) unit rows for exact re-ranking

    def buckets(self, table: int) -> dict[int, list[str]]:
        """Bucket map of one table: code -> ids in insertion order."""
        out: dict[int, list[str]] = {}
        for i, code in enumerate(self.codes[:, table]):
            out.setdefault(int(code), []).append(self.ids[i])
        return out

    def _encode(self, vec: np.ndarray) -> np.ndarray:
        proj = np.einsum("thd,d->th", self.hyperplanes, vec)
        bits = (proj >= 0).astype(np.uint64)
        weights = (np.uint64(1) << np.arange(self.bits, dtype=np.uint64))
        return (bits * weights).sum(axis=1, dtype=np.uint64)

    def query(
        self, query: np.ndarray, k: int, candidate_budget: int | None = None
    ) -> list[tuple[str, float]]:
        """Top-k (id, cosine) pairs, descending; ties by id.

        Candidates are probed in order of total code distance to the query
        (buckets nearest in Hamming space first) until the budget is met,
        then re-ranked by exact cosine. Fewer than k come back when the
        index is small.
        """
        if k < 1:
            raise SimilarityError(f"k must be >= 1, got {k}")
        q = np.asarray(query, dtype=np.float64)
        if np.linalg.norm(q) == 0.0:
            raise ZeroVectorError("cannot query with a zero vector")
        if len(self.ids) == 0:
            return []
        if q.shape != (self.dim,):
            raise DimensionMismatchError(f"query shape {q.shape}, index dim {self.dim}")
        qn = np.linalg.norm(q)

        budget = candidate_budget if candidate_budget is not None else max(50 * k, 500)
        qcode = self._encode(q / qn)
        xor = self.codes ^ qcode[np.newaxis, :]
        ham = _POP8[xor.view(np.uint8)].sum(axis=1)
        ids_arr = np.array(self.ids)
        order = np.lexsort((ids_arr, ham))[:budget]

        if self.vectors is None:
            raise SimilarityError("index has no vectors attached for re-ranking")
        sims = self.vectors[order] @ (q / qn)
        ranked = sorted(
            zip(order.tolist(), sims.tolist()),
            key=lambda t: (-t[1], self.ids[t[0]]),
        )
        return [(self.ids[i], float(s)) for i, s in ranked[:k]]

    # -- persistence --------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Header LSH1, seed, T, H, d, then the bucket contents (ids +
        packed codes). Vectors live in the corpus feature files and are
        re-attached on load."""
        ids_blob = json.dumps(list(self.ids), ensure_ascii=False).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(LSH_MAGIC)
            fh.write(struct.pack("<qIIII", self.seed, self.tables, self.bits,
                                 self.dim, len(self.ids)))
            fh.write(struct.pack("<I", len(ids_blob)))
            fh.write(ids_blob)
            fh.write(np.ascontiguousarray(self.codes, dtype="<u8").tobytes())

    @classmethod
    def load(cls, path: str | Path, vectors: Mapping[str, np.ndarray]) -> "LshIndex":
        data = Path(path).read_bytes()
        if data[:4] != LSH_MAGIC:
            raise SimilarityError(f"{path}: bad magic {data[:4]!r}")
        seed, tables, bits, dim, n = struct.unpack_from("<qIIII", data, 4)
        off = 4 + struct.calcsize("<qIIII")
        (ids_len,) = struct.unpack_from("<I", data, off)
        off += 4
        ids = tuple(json.loads(data[off:off + ids_len].decode("utf-8")))
        off += ids_len
        codes = np.frombuffer(data, dtype="<u8", offset=off, count=n * tables)
        codes = codes.reshape(n, tables).astype(np.uint64)
        mat = _unit_matrix(ids, vectors, dim)
        rng = np.random.default_rng(seed)
        planes = _unit_hyperplanes(rng, tables, bits, dim)
        return cls(seed, tables, bits, dim, ids, codes, planes, mat)


def _unit_hyperplanes(rng: np.random.Generator, tables: int, bits: int, dim: int):
    planes = rng.normal(size=(tables, bits, dim))
    planes /= np.linalg.norm(planes, axis=2, keepdims=True)
    return planes


def _unit_matrix(ids, vectors: Mapping[str, np.ndarray], dim: int) -> np.ndarray:
    mat = np.zeros((len(ids), dim), dtype=np.float64)
    for i, vid in enumerate(ids):
        v = np.asarray(vectors[vid], dtype=np.float64)
        if v.shape != (dim,):
            raise DimensionMismatchError(
                f"vector {vid!r} has shape {v.shape}, index dim {dim}"
            )
        norm = np.linalg.norm(v)
        if norm == 0.0:
            raise ZeroVectorError(f"vector {vid!r} is zero")
        mat[i] = v / norm
    return mat


def build_lsh(
    vectors: Mapping[str, np.ndarray],
    tables: int = 8,
    bits: int = 16,
    seed: int = 0,
) -> LshIndex:
    """Index a set of feature vectors (insertion order = mapping order)."""
    if tables < 1:
        raise SimilarityError(f"tables must be >= 1, got {tables}")
    if not 1 <= bits <= 64:
        raise SimilarityError(f"bits must be in 1..64, got {bits}")
    ids = tuple(vectors.keys())
    if ids:
        dims = {np.asarray(vectors[i]).shape for i in ids}
        if len(dims) > 1 or any(len(s) != 1 for s in dims):
            offender = next(
                i for i in ids
                if np.asarray(vectors[i]).shape != np.asarray(vectors[ids[0]]).shape
                or np.asarray(vectors[i]).ndim != 1
            )
            raise DimensionMismatchError(f"vector {offender!r} breaks the uniform dimension")
        dim = int(np.asarray(vectors[ids[0]]).shape[0])
    else:
        dim = 0

    rng = np.random.default_rng(seed)
    planes = _unit_hyperplanes(rng, tables, bits, max(dim, 1))[:, :, :dim] \
        if dim else np.zeros((tables, bits, 0))
    mat = _unit_matrix(ids, vectors, dim)

    weights = (np.uint64(1) << np.arange(bits, dtype=np.uint64))
    if ids:
        proj = np.einsum("nd,thd->nth", mat, planes)
        codes = ((proj >= 0).astype(np.uint64) * weights).sum(axis=2, dtype=np.uint64)
    else:
        codes = np.zeros((0, tables), dtype=np.uint64)
    return LshIndex(seed, tables, bits, dim, ids, codes, planes, mat)


def query_nearest(
    index: LshIndex, query: np.ndarray, k: int, candidate_budget: int | None = None
) -> list[tuple[str, float]]:
    return index.query(query, k, candidate_budget)


# ---------------------------------------------------------------------------
# Theme similarity over painting texts


def ngram_tokens(text: str) -> list[str]:
    """Overlapping character unigrams + bigrams per whitespace-separated
    run; adequate for unsegmented Chinese at corpus scale."""
    tokens: list[str] = []
    for run in text.split():
        tokens.extend(run)
        tokens.extend(run[i:i + 2] for i in range(len(run) - 1))
    return tokens


@dataclass(frozen=True)
class ThemeIndex:
    vocabulary: dict[str, int]  # token -> document frequency
    documents: dict[str, dict[str, float]]  # id -> L2-normalized tf-idf

    @classmethod
    def build(cls, texts: Mapping[str, str]) -> "ThemeIndex":
        n = len(texts)
        df: dict[str, int] = {}
        token_counts: dict[str, dict[str, int]] = {}
        for doc_id, text in texts.items():
            counts: dict[str, int] = {}
            for tok in ngram_tokens(text):
                counts[tok] = counts.get(tok, 0) + 1
            token_counts[doc_id] = counts
            for tok in counts:
                df[tok] = df.get(tok, 0) + 1

        docs: dict[str, dict[str, float]] = {}
        for doc_id, counts in token_counts.items():
            vec = {
                tok: (1.0 + log(c)) * (log((1 + n) / (1 + df[tok])) + 1.0)
                for tok, c in counts.items()
            }
            norm = sum(w * w for w in vec.values()) ** 0.5
            docs[doc_id] = {t: w / norm for t, w in vec.items()} if norm else {}
        return cls(df, docs)

    def similarity(self, a: str, b: str) -> float:
        va, vb = self.documents[a], self.documents[b]
        if len(vb) < len(va):
            va, vb = vb, va
        return sum(w * vb.get(t, 0.0) for t, w in va.items())

    def similar(self, query_id: str, k: int) -> list[tuple[str, float]]:
        if query_id not in self.documents:
            raise UnknownIdError(query_id)
        scored = [
            (other, self.similarity(query_id, other))
            for other in self.documents
            if other != query_id
        ]
        scored.sort(key=lambda t: (-t[1], t[0]))
        return scored[:k]


def theme_similar(texts: Mapping[str, str], query_id: str, k: int) -> list[tuple[str, float]]:
    """One-shot ranking; the service keeps a ThemeIndex instead."""
    return ThemeIndex.build(texts).similar(query_id, k)
