"""Deterministic, model-free inference rules.

These stand in for the real embedding, inference, and annotation models so the
whole pipeline runs hermetically. Every rule is a pure function of its text
inputs:

* embeddings: character trigrams of the lowercased, accent-folded text are
  hashed (seeded per model id) and scattered into the target dimension, then
  L2-normalized. Texts sharing trigrams get correlated vectors.
* premise/hypothesis scoring: token-set containment and Jaccard overlap mapped
  onto a fixed probability simplex, linearly interpolated between the
  "hypothesis contained in premise" and "disjoint vocabulary" anchors.
* annotation: shipped stopword/verb lexicons (es, en) plus a
  capitalized-run heuristic for named entities.

The serving sidecar exposes these same rules over HTTP (`--stub`) so client
and server can be contract-tested against identical outputs.
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources

import numpy as np

_WORD_RE = re.compile(r"\w+", re.UNICODE)

# simplex anchors for the premise/hypothesis rule
_ENTAIL_TRIPLE = (0.92, 0.02, 0.06)
_NEUTRAL_TRIPLE = (0.05, 0.10, 0.85)
_CONTAINMENT_HIGH = 0.9
_JACCARD_LOW = 0.1


def fold_text(text: str) -> str:
    """Lowercase, strip accents (NFKD + combining-mark removal), squeeze spaces."""
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(stripped.casefold().split())


def word_tokens(text: str) -> list[str]:
    """Word tokens in order of appearance (punctuation dropped)."""
    return _WORD_RE.findall(text)


def token_set(text: str) -> frozenset[str]:
    return frozenset(word_tokens(fold_text(text)))


def _trigrams(s: str) -> list[str]:
    if len(s) < 3:
        return [s]
    return [s[i : i + 3] for i in range(len(s) - 2)]


def stub_embedding(text: str, model_id: str, dim: int) -> np.ndarray:
    """Deterministic unit vector for (model_id, text)."""
    folded = fold_text(text)
    vec = np.zeros(dim, dtype=np.float64)
    for gram in _trigrams(folded):
        digest = hashlib.blake2b(
            f"{model_id}|{gram}".encode("utf-8"), digest_size=8
        ).digest()
        h = int.from_bytes(digest, "big")
        sign = 1.0 if h & 1 == 0 else -1.0
        vec[(h >> 1) % dim] += sign
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        # all contributions cancelled (or text was empty after folding)
        fallback = hashlib.blake2b(folded.encode("utf-8"), digest_size=8).digest()
        vec[int.from_bytes(fallback, "big") % dim] = 1.0
        norm = 1.0
    return vec / norm


def stub_nli(premise: str, hypothesis: str) -> tuple[float, float, float]:
    """(entailment, contradiction, neutral) from token overlap; sums to 1."""
    p = token_set(premise)
    h = token_set(hypothesis)
    if not p or not h:
        return _NEUTRAL_TRIPLE
    inter = len(p & h)
    containment = inter / len(h)
    jaccard = inter / len(p | h)
    if containment >= _CONTAINMENT_HIGH:
        return _ENTAIL_TRIPLE
    if jaccard < _JACCARD_LOW:
        return _NEUTRAL_TRIPLE
    t = (containment - _JACCARD_LOW) / (_CONTAINMENT_HIGH - _JACCARD_LOW)
    t = min(max(t, 0.0), 1.0)
    return tuple(
        n + t * (e - n) for e, n in zip(_ENTAIL_TRIPLE, _NEUTRAL_TRIPLE)
    )  # type: ignore[return-value]


# --- annotation ---

STUB_LANGUAGES = ("es", "en")


def _load_wordlist(name: str) -> frozenset[str]:
    text = resources.files("hoaxwatch.data").joinpath(name).read_text("utf-8")
    return frozenset(fold_text(line) for line in text.splitlines() if line.strip())


_STOPWORDS = {lang: _load_wordlist(f"stopwords_{lang}.txt") for lang in STUB_LANGUAGES}
_VERBS = {lang: _load_wordlist(f"verbs_{lang}.txt") for lang in STUB_LANGUAGES}


@dataclass(frozen=True)
class StubToken:
    token: str
    is_stopword: bool
    pos: str            # NOUN | VERB | ADJ | PROPN | OTHER
    entity: str | None  # PER | ORG | LOC | MISC | None


def detect_language(text: str) -> str:
    """Best lexicon match over stopwords+verbs; "und" when nothing matches."""
    folded = set(word_tokens(fold_text(text)))
    scores = {
        lang: len(folded & _STOPWORDS[lang]) + len(folded & _VERBS[lang])
        for lang in STUB_LANGUAGES
    }
    best = max(STUB_LANGUAGES, key=lambda lang: scores[lang])
    return best if scores[best] > 0 else "und"


def _entity_runs(tokens: list[str], stopwords: frozenset[str]) -> dict[int, str]:
    """Map token index -> entity tag via the capitalized-run heuristic.

    A run is consecutive capitalized non-stopword tokens. Runs of two or more
    are tagged PER; a single capitalized token qualifies (as MISC) only when it
    is not the very first token, so sentence-initial capitalization alone never
    creates an entity.
    """
    candidate = [
        bool(tok) and tok[0].isupper() and fold_text(tok) not in stopwords
        for tok in tokens
    ]
    tags: dict[int, str] = {}
    i = 0
    while i < len(tokens):
        if not candidate[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(tokens) and candidate[j + 1]:
            j += 1
        length = j - i + 1
        if length >= 2:
            for k in range(i, j + 1):
                tags[k] = "PER"
        elif i > 0:
            tags[i] = "MISC"
        i = j + 1
    return tags


def stub_annotate(text: str) -> tuple[str, list[StubToken]]:
    """Language tag plus per-token stopword/POS/entity annotation."""
    tokens = word_tokens(text)
    language = detect_language(text)
    if language == "und":
        # degrade path: no lexicon, no filtering signal
        return language, [
            StubToken(token=t, is_stopword=False, pos="OTHER", entity=None)
            for t in tokens
        ]
    stopwords = _STOPWORDS[language]
    verbs = _VERBS[language]
    entities = _entity_runs(tokens, stopwords)
    out = []
    for i, tok in enumerate(tokens):
        folded = fold_text(tok)
        is_stop = folded in stopwords
        if i in entities:
            pos = "PROPN"
        elif is_stop:
            pos = "OTHER"
        elif folded in verbs:
            pos = "VERB"
        else:
            pos = "NOUN"
        out.append(
            StubToken(token=tok, is_stopword=is_stop, pos=pos, entity=entities.get(i))
        )
    return language, out
