"""Embedding-scored keyword extraction and boolean search query construction.

Keywords are the candidate tokens/n-grams whose ensemble embeddings sit
closest to the full text's embedding. Twitter-mode extraction additionally
drops verbs (search APIs handle them poorly) while named entities are always
kept. Queries conjoin keyword groups with AND, with OR-groups for synonyms.

Scoring uses raw ensemble embeddings: ranking only needs relative order, so
extraction stays decoupled from any fitted reduction.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    CannotGeneralizeError,
    EmptyGoldError,
    EmptySpecError,
    NoCandidatesError,
    QuerySyntaxError,
)
from .gateway import ModelGateway
from .stub import fold_text
from .vecmath import cosine_similarity

DEFAULT_TOP_N = 10
DEFAULT_NGRAM_MAX = 2


class ExtractionMode(enum.Enum):
    GENERAL = "general"
    TWITTER = "twitter"


@dataclass(frozen=True)
class ScoredKeyword:
    surface: str
    score: float
    is_entity: bool = False
    pos: str = "NOUN"


@dataclass(frozen=True)
class QuerySpec:
    """Ordered synonym groups, all conjoined; each group is OR-ed terms."""

    groups: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if any(len(g) == 0 for g in self.groups):
            raise EmptySpecError("query groups must be nonempty")

    @staticmethod
    def from_lists(groups: Sequence[Sequence[str]]) -> "QuerySpec":
        deduped = []
        for group in groups:
            seen: dict[str, str] = {}
            for term in group:
                key = term.casefold()
                if key not in seen:
                    seen[key] = term
            deduped.append(tuple(seen.values()))
        return QuerySpec(groups=tuple(deduped))


def normalize_term(term: str) -> str:
    """Lowercase, accent-fold, and squeeze whitespace for term matching."""
    return fold_text(term)


@dataclass(frozen=True)
class _Candidate:
    surface: str
    positions: tuple[int, ...]  # token indices in the annotated text
    is_entity: bool
    pos: str


def _candidates_from_annotation(tokens, ngram_max: int) -> list[_Candidate]:
    """Token/n-gram candidates from runs of consecutive non-stopwords.

    N-grams never cross a stopword: dropping stopwords must not fabricate
    adjacencies that the original text lacked. Entity runs become one
    candidate covering the whole run.
    """
    out: dict[str, _Candidate] = {}

    def add(positions: list[int], is_entity: bool) -> None:
        surface = " ".join(tokens[i].token for i in positions)
        key = normalize_term(surface)
        if not key or key in out:
            return
        pos_tags = [tokens[i].pos for i in positions]
        if is_entity:
            pos = "PROPN"
        elif "VERB" in pos_tags:
            pos = "VERB"
        elif all(p == "OTHER" for p in pos_tags):
            pos = "OTHER"
        else:
            pos = "NOUN"
        out[key] = _Candidate(
            surface=surface, positions=tuple(positions), is_entity=is_entity, pos=pos
        )

    # entity runs first so their PROPN candidates win the dedupe
    i = 0
    while i < len(tokens):
        if tokens[i].entity is None:
            i += 1
            continue
        j = i
        while j + 1 < len(tokens) and tokens[j + 1].entity is not None:
            j += 1
        add(list(range(i, j + 1)), is_entity=True)
        i = j + 1

    run: list[int] = []
    for idx, tok in enumerate(tokens):
        if tok.is_stopword:
            run = []
            continue
        run.append(idx)
        for n in range(1, min(ngram_max, len(run)) + 1):
            add(run[-n:], is_entity=False)
    return list(out.values())


def extract_keywords(
    text: str,
    gateway: ModelGateway,
    top_n: int = DEFAULT_TOP_N,
    mode: ExtractionMode = ExtractionMode.GENERAL,
    ngram_max: int = DEFAULT_NGRAM_MAX,
) -> list[ScoredKeyword]:
    """Top keywords of a text by embedding similarity to the whole text.

    Pipeline: annotate, drop stopwords, form candidates up to ngram_max,
    score by cosine to the full text, drop verbs in TWITTER mode, and always
    keep named entities (they may displace lower-scored keywords within the
    top_n budget). Raises NoCandidatesError when filtering removes everything;
    callers are expected to retry in GENERAL mode.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if ngram_max < 1:
        raise ValueError("ngram_max must be >= 1")
    annotation = gateway.annotate(text)
    candidates = _candidates_from_annotation(annotation.tokens, ngram_max)
    if mode is ExtractionMode.TWITTER:
        candidates = [c for c in candidates if c.is_entity or c.pos != "VERB"]
    if not candidates:
        raise NoCandidatesError("no keyword candidates after filtering")

    vectors = gateway.embed_concat([text] + [c.surface for c in candidates])
    text_vec = vectors[0]
    scored = [
        ScoredKeyword(
            surface=c.surface,
            score=cosine_similarity(text_vec, vec),
            is_entity=c.is_entity,
            pos=c.pos,
        )
        for c, vec in zip(candidates, vectors[1:])
    ]

    def order(kw: ScoredKeyword):
        return (-kw.score, not kw.is_entity, normalize_term(kw.surface))

    entities = sorted((k for k in scored if k.is_entity), key=order)
    others = sorted((k for k in scored if not k.is_entity), key=order)
    selected = entities[:top_n]
    selected += others[: top_n - len(selected)]
    return sorted(selected, key=order)


# --- boolean queries ---

_BARE_TERM_RE = re.compile(r'[^\s()"]+$')


def _render_term(term: str) -> str:
    if _BARE_TERM_RE.match(term):
        return term
    return '"' + term.replace('"', "") + '"'


def build_query(spec: QuerySpec) -> str:
    """Render groups as ``a AND (b OR c) AND "two words"``."""
    if len(spec.groups) == 0:
        raise EmptySpecError("cannot build a query from zero groups")
    rendered = []
    for group in spec.groups:
        terms = [_render_term(t) for t in group]
        rendered.append(terms[0] if len(terms) == 1 else "(" + " OR ".join(terms) + ")")
    return " AND ".join(rendered)


_TOKEN_RE = re.compile(r'"([^"]*)"|(\()|(\))|([^\s()"]+)')


def parse_query(query: str) -> QuerySpec:
    """Inverse of build_query, used to round-trip and validate query strings."""
    tokens: list[str] = []
    pos = 0
    for match in _TOKEN_RE.finditer(query):
        if query[pos : match.start()].strip():
            raise QuerySyntaxError(f"unexpected characters at {pos}")
        pos = match.end()
        if match.group(1) is not None:
            tokens.append('"' + match.group(1) + '"')
        elif match.group(2):
            tokens.append("(")
        elif match.group(3):
            tokens.append(")")
        else:
            tokens.append(match.group(4))
    if query[pos:].strip():
        raise QuerySyntaxError("trailing characters")

    def term_of(tok: str) -> str:
        return tok[1:-1] if tok.startswith('"') else tok

    groups: list[list[str]] = []
    i = 0
    expect_group = True
    while i < len(tokens):
        tok = tokens[i]
        if not expect_group:
            if tok != "AND":
                raise QuerySyntaxError(f"expected AND, got {tok!r}")
            expect_group = True
            i += 1
            continue
        if tok == "(":
            group = []
            i += 1
            while True:
                if i >= len(tokens) or tokens[i] in ("(", ")", "AND", "OR"):
                    raise QuerySyntaxError("expected term inside group")
                group.append(term_of(tokens[i]))
                i += 1
                if i < len(tokens) and tokens[i] == "OR":
                    i += 1
                    continue
                break
            if i >= len(tokens) or tokens[i] != ")":
                raise QuerySyntaxError("unclosed group")
            if len(group) < 2:
                raise QuerySyntaxError("parenthesized group needs >= 2 terms")
            groups.append(group)
            i += 1
        elif tok in (")", "AND", "OR"):
            raise QuerySyntaxError(f"unexpected {tok!r}")
        else:
            groups.append([term_of(tok)])
            i += 1
        expect_group = False
    if expect_group:
        raise QuerySyntaxError("empty query" if not groups else "dangling AND")
    return QuerySpec.from_lists(groups)


def _group_score(group: Sequence[str], scores: Mapping[str, ScoredKeyword]) -> float:
    best = None
    for term in group:
        kw = scores.get(normalize_term(term))
        if kw is not None and (best is None or kw.score > best):
            best = kw.score
    return best if best is not None else float("-inf")


def _group_is_entity(group: Sequence[str], scores: Mapping[str, ScoredKeyword]) -> bool:
    return any(
        (kw := scores.get(normalize_term(term))) is not None and kw.is_entity
        for term in group
    )


def generalize_query(spec: QuerySpec, scored: Sequence[ScoredKeyword]) -> QuerySpec:
    """Drop the weakest group to widen the search; entity groups go last.

    The weakest group is the one whose best term has the lowest similarity
    score; groups with no scored term count as weakest.
    """
    if len(spec.groups) < 2:
        raise CannotGeneralizeError("cannot generalize a single-group query")
    by_term = {normalize_term(k.surface): k for k in scored}
    indexed = list(enumerate(spec.groups))
    non_entity = [(i, g) for i, g in indexed if not _group_is_entity(g, by_term)]
    pool = non_entity if non_entity else indexed
    drop_i, _ = min(pool, key=lambda item: (_group_score(item[1], by_term), -item[0]))
    return QuerySpec(
        groups=tuple(g for i, g in indexed if i != drop_i)
    )


def query_spec_from_keywords(
    keywords: Sequence[ScoredKeyword],
    synonyms: Mapping[str, Sequence[str]] | None = None,
) -> QuerySpec:
    """One group per keyword, widened with synonyms from a user-supplied map."""
    synonyms = synonyms or {}
    groups = []
    for kw in keywords:
        group = [kw.surface]
        group.extend(synonyms.get(normalize_term(kw.surface), ()))
        groups.append(group)
    return QuerySpec.from_lists(groups)


def load_synonyms(path: str) -> dict[str, list[str]]:
    """Synonym file JSONL: {term, synonyms:[...]}; keys are normalized terms."""
    table: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            table[normalize_term(doc["term"])] = list(doc.get("synonyms", ()))
    return table


@dataclass(frozen=True)
class KeywordMetrics:
    precision: float
    recall: float
    f1: float


def evaluate_keywords(predicted: Sequence[str], gold: Sequence[str]) -> KeywordMetrics:
    """Set precision/recall/F1 after term normalization; empty pred scores 0."""
    gold_set = {normalize_term(t) for t in gold if normalize_term(t)}
    if not gold_set:
        raise EmptyGoldError("gold keyword set is empty")
    pred_set = {normalize_term(t) for t in predicted if normalize_term(t)}
    if not pred_set:
        return KeywordMetrics(0.0, 0.0, 0.0)
    inter = len(pred_set & gold_set)
    precision = inter / len(pred_set)
    recall = inter / len(gold_set)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return KeywordMetrics(precision=precision, recall=recall, f1=f1)
