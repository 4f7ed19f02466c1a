"""Independent reference implementations used only to check production code.

Nothing here shares logic with the package internals: the streaming oracle is
a direct line-by-line transcription of the sequential algorithm over a plain
list, the flat-scan neighbor search uses the public distance function, and
the SVM reference solves the dual with a generic constrained optimizer.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from fsdstream import SparseVector, cosine_distance


def _oracle_distance(a, b) -> float:
    """Cosine distance computed independently (dict dot for sparse)."""
    if isinstance(a, SparseVector):
        if not a.pairs or not b.pairs:
            return 2.0
        da, db = dict(a.pairs), dict(b.pairs)
        dot = sum(w * db[i] for i, w in da.items() if i in db)
        return min(2.0, max(0.0, 1.0 - dot))
    if not np.any(a) or not np.any(b):
        return 2.0
    sim = float(np.dot(a, b)) / (float(np.linalg.norm(a)) * float(np.linalg.norm(b)))
    return min(2.0, max(0.0, 1.0 - sim))


def naive_first_story(vectors, threshold: float, window: int) -> list[int]:
    """Sequential first-story detection, transcribed line by line.

    T is a plain list; the nearest neighbor is a flat scan (ties to the most
    recent document); eviction removes the first element once |T| >= window.
    """
    T: list[tuple[object, int]] = []
    labels = []
    next_id = 0
    for vec in vectors:
        if not T:
            tid = next_id
            next_id += 1
        else:
            best_dist = None
            best_tid = None
            for v, t in T:
                d = _oracle_distance(vec, v)
                if best_dist is None or d <= best_dist:
                    best_dist = d
                    best_tid = t
            if best_dist < threshold:
                tid = best_tid
            else:
                tid = next_id
                next_id += 1
        labels.append(tid)
        if len(T) >= window:
            T.pop(0)
        T.append((vec, tid))
    return labels


def brute_force_nn(query, entries):
    """Flat scan over window entries; ties broken toward the most recent."""
    best = None
    for entry in entries:
        d = cosine_distance(query, entry.vector)
        if best is None or d <= best[1]:
            best = (entry, d)
    return best


def svm_dual_reference(K: np.ndarray, y: np.ndarray, C: float):
    """Solve the SVM dual with SLSQP: maximize sum(a) - 1/2 (a*y)' K (a*y)
    subject to 0 <= a <= C and sum(a*y) = 0. Returns (alpha, bias)."""
    n = len(y)

    def neg_dual(a):
        ay = a * y
        return -(a.sum() - 0.5 * ay @ K @ ay)

    def neg_dual_grad(a):
        ay = a * y
        return -(np.ones(n) - y * (K @ ay))

    res = minimize(
        neg_dual,
        x0=np.full(n, min(C, 1.0) / 2),
        jac=neg_dual_grad,
        bounds=[(0.0, C)] * n,
        constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}],
        method="SLSQP",
        options={"maxiter": 500, "ftol": 1e-12},
    )
    alpha = np.clip(res.x, 0.0, C)
    decision_no_bias = K @ (alpha * y)
    free = (alpha > 1e-6) & (alpha < C - 1e-6)
    if np.any(free):
        bias = float(np.mean(y[free] - decision_no_bias[free]))
    else:
        # midpoint of the KKT-feasible interval for the bias
        upper = [y[k] - decision_no_bias[k] for k in range(n) if (y[k] > 0) == (alpha[k] > 1e-6)]
        lower = [y[k] - decision_no_bias[k] for k in range(n) if (y[k] > 0) != (alpha[k] > 1e-6)]
        hi = min(upper) if upper else 0.0
        lo = max(lower) if lower else 0.0
        bias = (hi + lo) / 2.0
    return alpha, bias
