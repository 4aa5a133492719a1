"""Inference stage of the two-step check: score retrieved hoaxes and fuse.

The hoax is always the premise and the claim under test the hypothesis. A
claim is flagged as supporting a hoax when its best entailment probability
clears the configured threshold; contradiction acts only as a secondary,
informational signal.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

from .gateway import ModelGateway, NLIScores
from .hoaxdb import HoaxId, _id_sort_key

DEFAULT_ENTAILMENT_THRESHOLD = 0.5
DEFAULT_CONTRADICTION_THRESHOLD = 0.5


class RelationLabel(enum.Enum):
    ENTAILMENT = "ENTAILMENT"
    CONTRADICTION = "CONTRADICTION"
    NEUTRAL = "NEUTRAL"


class VerdictLabel(enum.Enum):
    SUPPORTS_HOAX = "SUPPORTS_HOAX"
    CONTRADICTS_HOAX = "CONTRADICTS_HOAX"
    UNVERIFIED = "UNVERIFIED"


@dataclass(frozen=True)
class Verdict:
    label: VerdictLabel
    best_hoax_id: HoaxId | None
    entailment: float
    all_scores: dict[HoaxId, NLIScores]
    thresholds_used: dict[str, float]


def infer_relation(premise: str, hypothesis: str, gateway: ModelGateway) -> NLIScores:
    """Probability triple for one (hoax premise, claim hypothesis) pair."""
    return gateway.nli_batch([(premise, hypothesis)])[0]


def label_relation(scores: NLIScores) -> RelationLabel:
    """Argmax label; ties resolve ENTAILMENT > CONTRADICTION > NEUTRAL."""
    ordered = (
        (scores.entailment, RelationLabel.ENTAILMENT),
        (scores.contradiction, RelationLabel.CONTRADICTION),
        (scores.neutral, RelationLabel.NEUTRAL),
    )
    best = max(ordered, key=lambda item: item[0])
    return best[1]


def fuse_verdict(
    hits: Sequence[tuple[HoaxId, NLIScores]],
    entailment_threshold: float = DEFAULT_ENTAILMENT_THRESHOLD,
    contradiction_threshold: float = DEFAULT_CONTRADICTION_THRESHOLD,
) -> Verdict:
    """Fold per-hoax triples into one verdict.

    Highest entailment wins when it clears the entailment threshold (ties:
    lower hoax id); otherwise the highest contradiction may flag a denial;
    otherwise the claim stays unverified. Empty hits are unverified.
    """
    if not 0.0 < entailment_threshold < 1.0 or not 0.0 < contradiction_threshold < 1.0:
        raise ValueError("thresholds must lie in (0, 1)")
    thresholds = {
        "entailment_threshold": entailment_threshold,
        "contradiction_threshold": contradiction_threshold,
    }
    all_scores = {hoax_id: scores for hoax_id, scores in hits}
    if not hits:
        return Verdict(VerdictLabel.UNVERIFIED, None, 0.0, all_scores, thresholds)

    best_e = min(hits, key=lambda h: (-h[1].entailment, _id_sort_key(h[0])))
    max_entailment = best_e[1].entailment
    if max_entailment >= entailment_threshold:
        return Verdict(
            VerdictLabel.SUPPORTS_HOAX, best_e[0], max_entailment, all_scores, thresholds
        )
    best_c = min(hits, key=lambda h: (-h[1].contradiction, _id_sort_key(h[0])))
    if best_c[1].contradiction >= contradiction_threshold:
        return Verdict(
            VerdictLabel.CONTRADICTS_HOAX, best_c[0], max_entailment, all_scores, thresholds
        )
    return Verdict(VerdictLabel.UNVERIFIED, None, max_entailment, all_scores, thresholds)


def verdict_to_json(verdict: Verdict, claim_text: str, include_claim: bool = False) -> str:
    """Serialize a verdict; the claim itself is hashed, not echoed, by default."""
    doc = {
        "claim_sha256": hashlib.sha256(claim_text.encode("utf-8")).hexdigest(),
        "label": verdict.label.value,
        "best_hoax_id": verdict.best_hoax_id,
        "entailment": verdict.entailment,
        "scores": {
            str(hoax_id): {
                "e": scores.entailment,
                "c": scores.contradiction,
                "n": scores.neutral,
            }
            for hoax_id, scores in verdict.all_scores.items()
        },
        "thresholds": verdict.thresholds_used,
    }
    if include_claim:
        doc["claim"] = claim_text
    return json.dumps(doc, ensure_ascii=False)
