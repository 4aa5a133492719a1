"""Persistent store of fact-checked hoaxes with exact cosine top-k retrieval.

Each hoax is embedded once (ensemble concat + reduction) at build time and
stored as float32; retrieval is an exhaustive scan, which keeps results exact
and reproducible for the database sizes this engine targets (tens to low
thousands of entries).
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateIdError, ProviderSkewError, ZeroNormError
from .gateway import ModelGateway
from .pca import PCAModel, load_pca, save_pca, transform
from .vecmath import cosine_similarity

MANIFEST_NAME = "manifest.json"
ENTRIES_NAME = "entries.jsonl"
PCA_NAME = "pca.json"
FORMAT_VERSION = 1

HoaxId = int | str

# overridable by config; the similarity floor and list depth are artifact
# choices, not values inherited from any benchmark
DEFAULT_TOP_K = 5
DEFAULT_MIN_SIMILARITY = 0.6


@dataclass(frozen=True)
class HoaxRecord:
    id: HoaxId
    text: str
    alt_texts: tuple[str, ...] = ()
    fact_checkers: tuple[str, ...] = ()
    first_seen: str | None = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError(f"hoax {self.id!r} has empty text")


@dataclass(frozen=True)
class SimilarityHit:
    hoax_id: HoaxId
    similarity: float


def _id_sort_key(hoax_id: HoaxId) -> tuple[int, HoaxId]:
    # ints order before strings so mixed-key indexes still sort deterministically
    return (0, hoax_id) if isinstance(hoax_id, int) else (1, str(hoax_id))


class HoaxIndex:
    """In-memory index; writers take the lock, readers see atomic snapshots."""

    def __init__(self, ensemble_model_ids: Sequence[str], reduced_dim: int,
                 pca_model_reference: str = ""):
        self.ensemble_model_ids = tuple(ensemble_model_ids)
        self.reduced_dim = int(reduced_dim)
        self.pca_model_reference = pca_model_reference
        self._entries: dict[HoaxId, tuple[HoaxRecord, np.ndarray]] = {}
        self._lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, hoax_id: HoaxId) -> bool:
        return hoax_id in self._entries

    def record(self, hoax_id: HoaxId) -> HoaxRecord:
        return self._entries[hoax_id][0]

    def records(self) -> list[HoaxRecord]:
        with self._lock:
            return [rec for rec, _ in self._entries.values()]

    def add_entry(self, record: HoaxRecord, embedding: np.ndarray) -> None:
        """Insert a precomputed entry (embeddings are stored as float32)."""
        vec = np.asarray(embedding, dtype=np.float32)
        if vec.ndim != 1 or vec.size != self.reduced_dim:
            raise ProviderSkewError(
                f"embedding dim {vec.size} != index reduced_dim {self.reduced_dim}"
            )
        with self._lock:
            if record.id in self._entries:
                raise DuplicateIdError(f"hoax id {record.id!r} already indexed")
            self._entries[record.id] = (record, vec)

    def snapshot(self) -> list[tuple[HoaxRecord, np.ndarray]]:
        with self._lock:
            return list(self._entries.values())


def build_index(
    hoaxes: Sequence[HoaxRecord],
    gateway: ModelGateway,
    pca_model: PCAModel,
    pca_model_reference: str = "",
) -> HoaxIndex:
    """Embed every hoax (canonical text only) and store the reduced vectors.

    All-or-nothing: duplicate ids or any provider failure abort the build.
    """
    if len(hoaxes) == 0:
        raise ValueError("no hoaxes to index")
    seen: set[HoaxId] = set()
    for rec in hoaxes:
        if rec.id in seen:
            raise DuplicateIdError(f"duplicate hoax id {rec.id!r} in input")
        seen.add(rec.id)
    _check_skew(gateway, pca_model)
    index = HoaxIndex(
        ensemble_model_ids=gateway.config.ensemble_model_ids,
        reduced_dim=pca_model.n_components,
        pca_model_reference=pca_model_reference,
    )
    vectors = gateway.embed_concat([rec.text for rec in hoaxes])
    for rec, vec in zip(hoaxes, vectors):
        index.add_entry(rec, transform(pca_model, vec))
    return index


def add_hoax(
    index: HoaxIndex,
    record: HoaxRecord,
    gateway: ModelGateway,
    pca_model: PCAModel,
) -> HoaxIndex:
    """Embed and insert one new hoax; refuses providers the index wasn't built on."""
    if gateway.config.ensemble_model_ids != index.ensemble_model_ids:
        raise ProviderSkewError(
            f"gateway ensemble {gateway.config.ensemble_model_ids} != "
            f"index ensemble {index.ensemble_model_ids}"
        )
    _check_skew(gateway, pca_model)
    vec = gateway.embed_concat([record.text])[0]
    index.add_entry(record, transform(pca_model, vec))
    return index


def _check_skew(gateway: ModelGateway, pca_model: PCAModel) -> None:
    if pca_model.source_dim != gateway.config.concat_dim:
        raise ProviderSkewError(
            f"projection source_dim {pca_model.source_dim} != "
            f"ensemble concat dim {gateway.config.concat_dim}"
        )


def search_vector(
    index: HoaxIndex,
    query: np.ndarray,
    top_k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> list[SimilarityHit]:
    """Exhaustive-scan top-k over entries at or above the similarity floor.

    Ordered by similarity descending, ties by ascending id. Entries are
    filtered by the floor first, then truncated to top_k.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if not -1.0 <= min_similarity <= 1.0:
        raise ValueError("min_similarity must lie in [-1, 1]")
    hits = []
    for record, vec in index.snapshot():
        try:
            sim = cosine_similarity(query, vec)
        except ZeroNormError:
            continue  # degenerate stored vector can never pass a threshold
        if sim >= min_similarity:
            hits.append(SimilarityHit(hoax_id=record.id, similarity=sim))
    hits.sort(key=lambda h: (-h.similarity, _id_sort_key(h.hoax_id)))
    return hits[:top_k]


def search(
    index: HoaxIndex,
    query_text: str,
    gateway: ModelGateway,
    pca_model: PCAModel,
    top_k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> list[SimilarityHit]:
    """Embed the query text and scan the index."""
    if len(index) == 0:
        raise ValueError("index is empty")
    vec = transform(pca_model, gateway.embed_concat([query_text])[0])
    return search_vector(index, vec, top_k=top_k, min_similarity=min_similarity)


# --- persistence ---


def load_hoax_records(path: str) -> list[HoaxRecord]:
    """Read hoax records from JSONL: {id, text, alt_texts?, fact_checkers[], first_seen?}."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            records.append(
                HoaxRecord(
                    id=doc["id"],
                    text=doc["text"],
                    alt_texts=tuple(doc.get("alt_texts", ())),
                    fact_checkers=tuple(doc.get("fact_checkers", ())),
                    first_seen=doc.get("first_seen"),
                )
            )
    return records


def save_index(index: HoaxIndex, dirpath: str, pca_model: PCAModel | None = None) -> None:
    """Persist manifest + entries (and optionally the projection) into a directory."""
    os.makedirs(dirpath, exist_ok=True)
    if pca_model is not None:
        save_pca(pca_model, os.path.join(dirpath, PCA_NAME))
    manifest = {
        "format_version": FORMAT_VERSION,
        "ensemble_model_ids": list(index.ensemble_model_ids),
        "pca_file": PCA_NAME,
        "reduced_dim": index.reduced_dim,
        "count": len(index),
    }
    with open(os.path.join(dirpath, MANIFEST_NAME), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    with open(os.path.join(dirpath, ENTRIES_NAME), "w", encoding="utf-8") as fh:
        for record, vec in index.snapshot():
            doc = {
                "id": record.id,
                "text": record.text,
                "alt_texts": list(record.alt_texts),
                "fact_checkers": list(record.fact_checkers),
                "first_seen": record.first_seen,
                # float32 hex preserves the stored bytes exactly
                "embedding_hex": np.asarray(vec, dtype="<f4").tobytes().hex(),
            }
            fh.write(json.dumps(doc) + "\n")


def load_index(dirpath: str) -> tuple[HoaxIndex, PCAModel | None]:
    with open(os.path.join(dirpath, MANIFEST_NAME), encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported index version {manifest.get('format_version')!r}")
    index = HoaxIndex(
        ensemble_model_ids=manifest["ensemble_model_ids"],
        reduced_dim=manifest["reduced_dim"],
        pca_model_reference=manifest.get("pca_file", ""),
    )
    with open(os.path.join(dirpath, ENTRIES_NAME), encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            vec = np.frombuffer(bytes.fromhex(doc["embedding_hex"]), dtype="<f4")
            record = HoaxRecord(
                id=doc["id"],
                text=doc["text"],
                alt_texts=tuple(doc.get("alt_texts", ())),
                fact_checkers=tuple(doc.get("fact_checkers", ())),
                first_seen=doc.get("first_seen"),
            )
            index.add_entry(record, vec)
    pca_path = os.path.join(dirpath, manifest.get("pca_file", PCA_NAME))
    pca_model = load_pca(pca_path) if os.path.exists(pca_path) else None
    return index, pca_model


def iter_jsonl(path: str) -> Iterable[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)
