"""Scoring: best-matching F1 for clustering, macro-averaged F1 for classification.

Best-matching F1 pairs each gold event with the detected cluster maximizing
their F1 — several events may pick the same cluster — and averages the
per-event F1 values unweighted. Both sides are restricted to annotated
documents, so clusters made purely of unannotated tweets neither hurt nor
help. Macro F1 is the unweighted mean of one-vs-rest F1 over gold classes.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

from .errors import InternalError, ValidationError


def pair_f1(event_members: set, cluster_members: set) -> tuple[float, float, float]:
    """(precision, recall, F1) of one event/cluster pair.

    Precision is |intersection| / |cluster| (0 for an empty cluster), recall
    |intersection| / |event|; F1 their harmonic mean, 0 when both are 0.
    """
    if not event_members:
        raise ValidationError("pair_f1 requires a non-empty event")
    inter = len(event_members & cluster_members)
    precision = inter / len(cluster_members) if cluster_members else 0.0
    recall = inter / len(event_members)
    f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


@dataclass(frozen=True)
class EventMatch:
    event_id: str
    cluster_id: int
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    """Best-matching F1 result: the score plus per-event matching details."""

    score: float
    n_events: int
    n_clusters: int
    per_event: list[EventMatch]

    def __post_init__(self) -> None:
        if not self.per_event:
            raise InternalError("report has no matched events")
        mean = math.fsum(m.f1 for m in self.per_event) / len(self.per_event)
        if abs(self.score - mean) > 1e-12:
            raise InternalError("report score disagrees with the per-event mean")
        for m in self.per_event:
            for v in (m.precision, m.recall, m.f1):
                if not 0.0 <= v <= 1.0:
                    raise InternalError(f"event {m.event_id}: metric outside [0, 1]")

    def to_json(self, path: str | Path) -> None:
        payload = {
            "score": self.score,
            "n_events": self.n_events,
            "n_clusters": self.n_clusters,
            "per_event": [asdict(m) for m in self.per_event],
        }
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )

    def to_table(self) -> str:
        lines = [
            f"best-matching F1: {self.score:.4f}  "
            f"({self.n_events} events, {self.n_clusters} clusters)",
            f"{'event':<16}{'cluster':>8}{'prec':>8}{'rec':>8}{'f1':>8}",
        ]
        for m in self.per_event:
            lines.append(
                f"{m.event_id:<16}{m.cluster_id:>8}{m.precision:>8.3f}"
                f"{m.recall:>8.3f}{m.f1:>8.3f}"
            )
        return "\n".join(lines)


def _as_mapping(assignment) -> Mapping[str, int]:
    if hasattr(assignment, "as_dict"):
        return assignment.as_dict()
    return assignment


def best_matching_f1(assignment, gold: Mapping[str, str]) -> EvalReport:
    """Score a clustering against gold events.

    ``assignment`` maps doc id -> cluster id (a plain mapping or a
    ThreadAssignment); ``gold`` maps annotated doc id -> event id. Every
    gold-labeled document must appear in the assignment; documents absent
    from ``gold`` are ignored on both sides. Each event is matched to its
    argmax-F1 cluster, ties going to the lower cluster id.

    ``n_clusters`` counts the clusters that contain at least one annotated
    document — the candidates the matching actually ranges over.
    """
    if not gold:
        raise ValidationError("gold labels are empty")
    mapping = _as_mapping(assignment)
    missing = [doc for doc in gold if doc not in mapping]
    if missing:
        raise ValidationError(
            f"{len(missing)} gold documents missing from the assignment "
            f"(first: {missing[0]!r})"
        )
    events: dict[str, set[str]] = {}
    for doc, event in gold.items():
        events.setdefault(event, set()).add(doc)
    clusters: dict[int, set[str]] = {}
    for doc in gold:
        clusters.setdefault(mapping[doc], set()).add(doc)

    matches = []
    for event_id in sorted(events):
        members = events[event_id]
        # only clusters intersecting the event can score above 0, and every
        # member is in some cluster, so the argmax is always among these
        candidates = sorted({mapping[doc] for doc in members})
        best = None
        for cid in candidates:
            p, r, f1 = pair_f1(members, clusters[cid])
            if best is None or f1 > best[3]:
                best = (cid, p, r, f1)
        matches.append(EventMatch(event_id, best[0], best[1], best[2], best[3]))
    score = math.fsum(m.f1 for m in matches) / len(matches)
    return EvalReport(
        score=score, n_events=len(events), n_clusters=len(clusters), per_event=matches
    )


def macro_f1(predicted: Mapping[str, str], gold: Mapping[str, str]) -> float:
    """Unweighted mean of one-vs-rest F1 over gold classes.

    Both mappings must cover the same documents; a gold class never predicted
    contributes an F1 of 0.
    """
    if not gold:
        raise ValidationError("gold labels are empty")
    if set(predicted) != set(gold):
        raise ValidationError("predicted and gold must cover the same documents")
    tp: dict[str, int] = {}
    gold_count: dict[str, int] = {}
    pred_count: dict[str, int] = {}
    for doc, g in gold.items():
        p = predicted[doc]
        gold_count[g] = gold_count.get(g, 0) + 1
        pred_count[p] = pred_count.get(p, 0) + 1
        if p == g:
            tp[g] = tp.get(g, 0) + 1
    scores = []
    for cls in sorted(gold_count):
        hits = tp.get(cls, 0)
        n_pred = pred_count.get(cls, 0)
        precision = hits / n_pred if n_pred else 0.0
        recall = hits / gold_count[cls]
        f1 = 0.0 if precision + recall == 0.0 else 2 * precision * recall / (precision + recall)
        scores.append(f1)
    return math.fsum(scores) / len(scores)
