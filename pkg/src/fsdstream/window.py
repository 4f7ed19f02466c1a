"""Sliding FIFO window over recent documents with exact nearest-neighbor search.

Sparse vectors are served by an inverted index (term index -> postings over
live window slots); dense vectors by a ring buffer of rows and one matrix
product. Both paths return the exact minimum cosine distance over the window,
ties broken toward the most recent document.

Exactness contract for the sparse path: postings are walked in increasing
term-index order, the same order ``sparse_dot`` uses, so accumulated
similarities are bit-identical to a flat scan. Documents sharing no term with
the query sit at distance exactly 1.0 and empty documents at exactly 2.0, so
the index only needs a fallback when no posting matched.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple, Union

import numpy as np

from .errors import InternalError, ValidationError
from .vectorize import SparseVector, sparse_dot

DocVector = Union[SparseVector, np.ndarray]


def is_empty_vector(v: DocVector) -> bool:
    if isinstance(v, SparseVector):
        return v.is_empty
    return not np.any(v)


def cosine_distance(a: DocVector, b: DocVector) -> float:
    """1 - cos(a, b), in [0, 2]; defined as 2 when either vector is empty.

    Both vectors must be the same representation kind, and dense vectors the
    same dimension.
    """
    if isinstance(a, SparseVector) and isinstance(b, SparseVector):
        if a.is_empty or b.is_empty:
            return 2.0
        sim = sparse_dot(a, b) / (a.norm * b.norm)
    elif isinstance(a, SparseVector) or isinstance(b, SparseVector):
        raise ValidationError("cannot mix sparse and dense vectors")
    else:
        if a.shape != b.shape:
            raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
        na = float(np.linalg.norm(a))
        nb = float(np.linalg.norm(b))
        if na == 0.0 or nb == 0.0:
            return 2.0
        sim = float(np.dot(a, b)) / (na * nb)
    return min(2.0, max(0.0, 1.0 - sim))


class WindowEntry(NamedTuple):
    doc_id: str
    vector: DocVector
    thread_id: int
    serial: int


class WindowBuffer:
    """FIFO of the ``capacity`` most recent documents.

    ``append`` evicts the oldest entry first when full, so size never exceeds
    capacity. The first appended vector fixes the representation kind (and
    dimension, for dense); later mismatches are errors. Mutation is
    single-writer; searches against a quiescent buffer are read-only and may
    run concurrently.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationError(f"window capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._entries: deque[WindowEntry] = deque()
        self._by_serial: dict[int, WindowEntry] = {}
        self._next_serial = 0
        self._kind: str | None = None  # "sparse" | "dense"
        # sparse mode: term index -> {serial: weight}
        self._postings: dict[int, dict[int, float]] = {}
        # dense mode: ring of rows, serial s lives in row s % capacity
        self._rows: np.ndarray | None = None
        self._row_serial: np.ndarray | None = None
        self._row_empty: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def _vector_kind(self, vector: DocVector) -> str:
        if isinstance(vector, SparseVector):
            return "sparse"
        if isinstance(vector, np.ndarray) and vector.ndim == 1:
            return "dense"
        raise ValidationError(f"unsupported vector type {type(vector).__name__}")

    def _check_kind(self, vector: DocVector) -> str:
        kind = self._vector_kind(vector)
        if self._kind is None:
            return kind
        if kind != self._kind:
            raise ValidationError(
                f"representation mismatch: window holds {self._kind} vectors, got {kind}"
            )
        if kind == "dense" and self._rows is not None and vector.shape[0] != self._rows.shape[1]:
            raise ValidationError(
                f"dimension mismatch: window dim {self._rows.shape[1]}, got {vector.shape[0]}"
            )
        return kind

    def append(self, doc_id: str, vector: DocVector, thread_id: int) -> None:
        kind = self._check_kind(vector)
        if self._kind is None:
            self._kind = kind
        if len(self._entries) >= self.capacity:
            self._evict()
        entry = WindowEntry(doc_id, vector, thread_id, self._next_serial)
        self._next_serial += 1
        self._entries.append(entry)
        self._by_serial[entry.serial] = entry
        if kind == "sparse":
            for idx, w in vector.pairs:
                self._postings.setdefault(idx, {})[entry.serial] = w
        else:
            if self._rows is None:
                self._rows = np.zeros((self.capacity, vector.shape[0]))
                self._row_serial = np.full(self.capacity, -1, dtype=np.int64)
                self._row_empty = np.zeros(self.capacity, dtype=bool)
            row = entry.serial % self.capacity
            self._rows[row] = vector
            self._row_serial[row] = entry.serial
            self._row_empty[row] = is_empty_vector(vector)
        if len(self._entries) > self.capacity:
            raise InternalError("window exceeded its capacity")

    def _evict(self) -> None:
        old = self._entries.popleft()
        del self._by_serial[old.serial]
        if self._kind == "sparse":
            for idx, _ in old.vector.pairs:
                plist = self._postings[idx]
                del plist[old.serial]
                if not plist:
                    del self._postings[idx]
        # dense rows are overwritten in place by the incoming serial

    def _nearest_sparse(self, query: SparseVector) -> tuple[WindowEntry, float]:
        acc: dict[int, float] = {}
        postings = self._postings
        for idx, wq in query.pairs:  # increasing index order: matches sparse_dot
            plist = postings.get(idx)
            if plist:
                for serial, wd in plist.items():
                    acc[serial] = acc.get(serial, 0.0) + wq * wd
        if acc:
            best_serial = -1
            best_sim = -1.0
            for serial, sim in acc.items():
                if sim > best_sim or (sim == best_sim and serial > best_serial):
                    best_sim = sim
                    best_serial = serial
            dist = min(2.0, max(0.0, 1.0 - best_sim))
            return self._by_serial[best_serial], dist
        # no shared term: every non-empty document sits at distance exactly 1.0
        for entry in reversed(self._entries):
            if not entry.vector.is_empty:
                return entry, 1.0
        return self._entries[-1], 2.0  # all empty

    def _nearest_dense(self, query: np.ndarray) -> tuple[WindowEntry, float]:
        if len(self._entries) == self.capacity:
            sims = self._rows @ query
            serials = self._row_serial
            empty = self._row_empty
        else:
            live = self._row_serial >= 0
            sims = self._rows[live] @ query
            serials = self._row_serial[live]
            empty = self._row_empty[live]
        # empty rows are all-zero, so their sim computes to 0.0; their true
        # distance is 2.0, which a sim of -1.0 encodes
        sims = np.where(empty, -1.0, sims)
        best = sims.max()
        candidates = np.flatnonzero(sims == best)
        best_serial = int(serials[candidates].max())
        dist = min(2.0, max(0.0, 1.0 - float(best)))
        return self._by_serial[best_serial], dist

    def nearest_neighbor(self, query: DocVector) -> tuple[WindowEntry, float] | None:
        """Exact nearest neighbor of ``query`` over the window, or None if empty.

        Returns ``(entry, cosine_distance)``; among equidistant entries the
        most recent wins. An empty query is at distance 2.0 from everything,
        so the most recent entry is returned.
        """
        if not self._entries:
            return None
        self._check_kind(query)
        if is_empty_vector(query):
            return self._entries[-1], 2.0
        if self._kind == "sparse":
            return self._nearest_sparse(query)
        return self._nearest_dense(query)

    def check_invariants(self) -> None:
        """Verify the inverted index exactly mirrors buffer contents (debug aid)."""
        if len(self._entries) > self.capacity:
            raise InternalError("window exceeded its capacity")
        if self._kind != "sparse":
            return
        expected: dict[int, dict[int, float]] = {}
        for entry in self._entries:
            for idx, w in entry.vector.pairs:
                expected.setdefault(idx, {})[entry.serial] = w
        if expected != self._postings:
            raise InternalError("inverted index out of sync with window contents")


def nearest_neighbor(
    query: DocVector, window: WindowBuffer
) -> tuple[WindowEntry, float] | None:
    """Module-level convenience for :meth:`WindowBuffer.nearest_neighbor`."""
    return window.nearest_neighbor(query)
