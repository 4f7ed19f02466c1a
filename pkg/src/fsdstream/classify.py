"""One-vs-rest SVM with the scale-invariant triangular kernel k(x, y) = 1 - ||x - y||.

The kernel applies unchanged to sparse and dense vectors. It is only
conditionally positive definite, so the SMO solver must tolerate non-positive
curvature along a working pair: when that happens the dual objective is
evaluated at both clipping bounds and the better endpoint is taken (the
classical safe fallback). Training is deterministic for a fixed seed.

Only what the experiments need: one kernel, one-vs-rest, a C flag. Not a
general SVM library.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator

from .errors import InternalError, ValidationError
from .vectorize import SparseVector
from .window import DocVector

KERNEL_NAME = "triangular"


def triangular_kernel(x: DocVector, y: DocVector) -> float:
    """1 - Euclidean distance between the vectors.

    The distance is computed from the component-wise difference, so
    k(x, x) == 1.0 exactly and the kernel is exactly symmetric.
    """
    if isinstance(x, SparseVector) and isinstance(y, SparseVector):
        px, py = x.pairs, y.pairs
        i = j = 0
        total = 0.0
        while i < len(px) and j < len(py):
            ix, wx = px[i]
            iy, wy = py[j]
            if ix == iy:
                d = wx - wy
                total += d * d
                i += 1
                j += 1
            elif ix < iy:
                total += wx * wx
                i += 1
            else:
                total += wy * wy
                j += 1
        for k in range(i, len(px)):
            w = px[k][1]
            total += w * w
        for k in range(j, len(py)):
            w = py[k][1]
            total += w * w
        return 1.0 - math.sqrt(total)
    if isinstance(x, SparseVector) or isinstance(y, SparseVector):
        raise ValidationError("cannot mix sparse and dense vectors")
    if x.shape != y.shape:
        raise ValidationError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return 1.0 - float(np.linalg.norm(x - y))


def _as_matrix(X) -> tuple[str, np.ndarray | sp.csr_matrix]:
    """Normalize a vector collection to ('dense', 2-d array) or ('sparse', csr)."""
    if isinstance(X, np.ndarray):
        if X.ndim != 2:
            raise ValidationError("dense input must be a 2-d array of row vectors")
        return "dense", np.asarray(X, dtype=np.float64)
    vectors = list(X)
    if not vectors:
        raise ValidationError("empty vector collection")
    if all(isinstance(v, SparseVector) for v in vectors):
        width = 1 + max((p[0] for v in vectors for p in v.pairs), default=0)
        indptr = [0]
        indices: list[int] = []
        data: list[float] = []
        for v in vectors:
            for idx, w in v.pairs:
                indices.append(idx)
                data.append(w)
            indptr.append(len(indices))
        return "sparse", sp.csr_matrix(
            (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr)),
            shape=(len(vectors), width),
        )
    if all(isinstance(v, np.ndarray) for v in vectors):
        return "dense", np.vstack(vectors).astype(np.float64)
    raise ValidationError("mixed sparse and dense vectors in one collection")


def _pad_sparse(a: sp.csr_matrix, b: sp.csr_matrix) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    width = max(a.shape[1], b.shape[1])
    if a.shape[1] < width:
        a = sp.csr_matrix((a.data, a.indices, a.indptr), shape=(a.shape[0], width))
    if b.shape[1] < width:
        b = sp.csr_matrix((b.data, b.indices, b.indptr), shape=(b.shape[0], width))
    return a, b


def kernel_matrix(X) -> np.ndarray:
    """Full triangular-kernel matrix of a vector collection.

    Squared norms are read off the Gram diagonal, so the squared distance on
    the diagonal is exactly 0 and K_ii exactly 1.
    """
    kind, M = _as_matrix(X)
    G = (M @ M.T) if kind == "dense" else (M @ M.T).toarray()
    G = (G + G.T) / 2.0
    sq = np.diag(G).copy()
    d2 = sq[:, None] + sq[None, :] - 2.0 * G
    np.maximum(d2, 0.0, out=d2)
    return 1.0 - np.sqrt(d2)


def cross_kernel(Xa, Xb) -> np.ndarray:
    """Triangular kernel between two collections: rows index Xa, columns Xb."""
    kind_a, A = _as_matrix(Xa)
    kind_b, B = _as_matrix(Xb)
    if kind_a != kind_b:
        raise ValidationError("cannot mix sparse and dense vectors")
    if kind_a == "sparse":
        A, B = _pad_sparse(A, B)
        G = (A @ B.T).toarray()
        sa = np.asarray(A.multiply(A).sum(axis=1)).ravel()
        sb = np.asarray(B.multiply(B).sum(axis=1)).ravel()
    else:
        if A.shape[1] != B.shape[1]:
            raise ValidationError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
        G = A @ B.T
        sa = np.einsum("ij,ij->i", A, A)
        sb = np.einsum("ij,ij->i", B, B)
    d2 = sa[:, None] + sb[None, :] - 2.0 * G
    np.maximum(d2, 0.0, out=d2)
    return 1.0 - np.sqrt(d2)


def _smo_binary(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tol: float,
    rng: np.random.Generator,
    max_quiet_passes: int = 10,
    max_sweeps: int = 500,
    eps: float = 1e-8,
) -> tuple[np.ndarray, float]:
    """Dual SMO over a precomputed kernel matrix; returns (alpha, bias).

    Sweeps all points, fixing KKT violations against a randomly drawn
    partner; stops after ``max_quiet_passes`` consecutive sweeps without a
    change. Non-positive curvature falls back to comparing the dual objective
    at the two clipping bounds.
    """
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    quiet = 0
    sweeps = 0
    while quiet < max_quiet_passes and sweeps < max_sweeps:
        changed = 0
        for i in range(n):
            Ei = float(np.dot(alpha * y, K[:, i])) + b - y[i]
            r = y[i] * Ei
            if not ((r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)):
                continue
            j = int(rng.integers(n - 1))
            if j >= i:
                j += 1
            Ej = float(np.dot(alpha * y, K[:, j])) + b - y[j]
            ai_old, aj_old = float(alpha[i]), float(alpha[j])
            if y[i] != y[j]:
                L, H = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
            else:
                L, H = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
            if L >= H:
                continue
            k_ii, k_jj, k_ij = K[i, i], K[j, j], K[i, j]
            eta = k_ii + k_jj - 2.0 * k_ij
            if eta > 0.0:
                aj = aj_old + y[j] * (Ei - Ej) / eta
                aj = min(H, max(L, aj))
            else:
                s = y[i] * y[j]
                f_i = y[i] * (Ei + b) - ai_old * k_ii - s * aj_old * k_ij
                f_j = y[j] * (Ej + b) - s * ai_old * k_ij - aj_old * k_jj
                L1 = ai_old + s * (aj_old - L)
                H1 = ai_old + s * (aj_old - H)
                obj_L = L1 * f_i + L * f_j + 0.5 * L1 * L1 * k_ii + 0.5 * L * L * k_jj + s * L * L1 * k_ij
                obj_H = H1 * f_i + H * f_j + 0.5 * H1 * H1 * k_ii + 0.5 * H * H * k_jj + s * H * H1 * k_ij
                if obj_L < obj_H - 1e-12:
                    aj = L
                elif obj_L > obj_H + 1e-12:
                    aj = H
                else:
                    continue
            if abs(aj - aj_old) < eps * (aj + aj_old + eps):
                continue
            ai = ai_old + y[i] * y[j] * (aj_old - aj)
            b1 = b - Ei - y[i] * (ai - ai_old) * k_ii - y[j] * (aj - aj_old) * k_ij
            b2 = b - Ej - y[i] * (ai - ai_old) * k_ij - y[j] * (aj - aj_old) * k_jj
            if 0.0 < ai < C:
                b = b1
            elif 0.0 < aj < C:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            alpha[i] = ai
            alpha[j] = aj
            changed += 1
        quiet = quiet + 1 if changed == 0 else 0
        sweeps += 1
    return alpha, b


@dataclass
class KernelSvmModel:
    """One binary one-vs-rest model: support vectors and their signed dual
    coefficients (alpha * y, so |coefficient| <= C), plus the bias."""

    label: str
    support_vectors: list
    dual_coef: np.ndarray
    bias: float
    c: float
    support_ids: list[str] | None = None

    def __post_init__(self) -> None:
        if np.any(np.abs(self.dual_coef) > self.c + 1e-9):
            raise InternalError(f"model {self.label!r}: |dual coefficient| exceeds C")

    def decision_value(self, x: DocVector) -> float:
        acc = [w * triangular_kernel(sv, x) for sv, w in zip(self.support_vectors, self.dual_coef)]
        return math.fsum(acc) + self.bias


class TriangularKernelSVC(BaseEstimator):
    """One-vs-rest SVM over sparse or dense document vectors.

    ``fit(X, y)`` trains one binary SMO problem per class (labels sorted, so
    prediction tie-breaks toward the lexicographically smallest label).
    ``X`` is a list of SparseVector or a 2-d array; ``y`` any sequence of
    string labels with at least two distinct classes.
    """

    def __init__(self, C: float = 1.0, tol: float = 1e-3, max_sweeps: int = 500, seed: int = 0):
        self.C = C
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.seed = seed

    def fit(self, X, y, doc_ids: Sequence[str] | None = None) -> "TriangularKernelSVC":
        if self.C <= 0:
            raise ValidationError(f"C must be > 0, got {self.C}")
        vectors = list(X) if not isinstance(X, np.ndarray) else [row for row in X]
        labels = [str(c) for c in y]
        if len(vectors) != len(labels):
            raise ValidationError("X and y length mismatch")
        if len(vectors) < 2:
            raise ValidationError("training needs at least two examples")
        classes = sorted(set(labels))
        if len(classes) < 2:
            raise ValidationError("training needs at least two classes")
        K = kernel_matrix(vectors)
        label_arr = np.array(labels)
        seed_seq = np.random.SeedSequence(self.seed)
        models = []
        for cls, child in zip(classes, seed_seq.spawn(len(classes))):
            yb = np.where(label_arr == cls, 1.0, -1.0)
            alpha, bias = _smo_binary(
                K, yb, C=self.C, tol=self.tol,
                rng=np.random.default_rng(child), max_sweeps=self.max_sweeps,
            )
            keep = np.flatnonzero(alpha > 1e-12)
            models.append(
                KernelSvmModel(
                    label=cls,
                    support_vectors=[vectors[k] for k in keep],
                    dual_coef=(alpha * yb)[keep],
                    bias=bias,
                    c=self.C,
                    support_ids=[doc_ids[k] for k in keep] if doc_ids is not None else None,
                )
            )
        self.classes_ = classes
        self.models_ = models
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "models_"):
            raise ValidationError("TriangularKernelSVC is not fitted; call fit first")
        vectors = list(X) if not isinstance(X, np.ndarray) else [row for row in X]
        out = np.empty((len(vectors), len(self.models_)))
        for col, model in enumerate(self.models_):
            if model.support_vectors:
                Kx = cross_kernel(vectors, model.support_vectors)
                out[:, col] = Kx @ model.dual_coef + model.bias
            else:
                out[:, col] = model.bias
        return out

    def predict(self, X) -> list[str]:
        scores = self.decision_function(X)
        # argmax returns the first maximum; classes_ is sorted, so ties go to
        # the lexicographically smallest label
        return [self.classes_[k] for k in np.argmax(scores, axis=1)]


def train_ovr_svm(
    X,
    y: Sequence[str],
    C: float = 1.0,
    seed: int = 0,
    doc_ids: Sequence[str] | None = None,
) -> list[KernelSvmModel]:
    """Train one-vs-rest models and return them; see TriangularKernelSVC."""
    svc = TriangularKernelSVC(C=C, seed=seed)
    svc.fit(X, y, doc_ids=doc_ids)
    return svc.models_


def predict(models: list[KernelSvmModel], x: DocVector) -> str:
    """Label of the model with the highest decision value for ``x``;
    ties break toward the lexicographically smallest label."""
    if not models:
        raise ValidationError("predict requires at least one model")
    best_label = None
    best_value = -math.inf
    for model in sorted(models, key=lambda m: m.label):
        value = model.decision_value(x)
        if value > best_value:
            best_value = value
            best_label = model.label
    return best_label


def save_models(models: list[KernelSvmModel], path: str | Path) -> None:
    """Persist models as JSON: support vector ids, coefficients, bias, C, kernel.

    Support vectors are referenced by id, not serialized; rebind them with
    :func:`load_models` and the original vector source.
    """
    payload = {
        "kernel": KERNEL_NAME,
        "c": models[0].c if models else None,
        "classes": [
            {
                "label": m.label,
                "bias": m.bias,
                "dual_coef": [float(w) for w in m.dual_coef],
                "support_ids": m.support_ids,
            }
            for m in models
        ],
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_models(path: str | Path, vectors_by_id: Mapping[str, DocVector]) -> list[KernelSvmModel]:
    """Load persisted models, rebinding support vectors from ``vectors_by_id``."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("kernel") != KERNEL_NAME:
        raise ValidationError(f"unsupported kernel {payload.get('kernel')!r}")
    models = []
    for item in payload["classes"]:
        ids = item["support_ids"]
        if ids is None:
            raise ValidationError(
                f"model {item['label']!r} was saved without support ids; cannot rebind"
            )
        missing = [i for i in ids if i not in vectors_by_id]
        if missing:
            raise ValidationError(f"no vector for support id {missing[0]!r}")
        models.append(
            KernelSvmModel(
                label=item["label"],
                support_vectors=[vectors_by_id[i] for i in ids],
                dual_coef=np.array(item["dual_coef"]),
                bias=float(item["bias"]),
                c=float(payload["c"]),
                support_ids=list(ids),
            )
        )
    return models
