"""Real model serving: transformer sentence encoders, NLI, token annotation.

Everything here needs torch + transformers (the ``real`` extra); checkpoints
are fetched from public hubs at load time, or read from local cache paths,
never vendored into the package. The HTTP layer imports this module only when
real mode is requested, so stub serving works without the ML stack.
"""

from __future__ import annotations

import re
import threading
from typing import Sequence

import torch
from torch import nn

from .config import ServiceConfig
from .errors import BackendLoadError, UnknownModelError

_WORD_RE = re.compile(r"\w+", re.UNICODE)


def masked_mean(last_hidden: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
    """Mean over the time axis counting only attended positions.

    ``last_hidden`` is (batch, time, hidden); ``attention_mask`` is (batch,
    time) with 1 marking real tokens. Padding never moves the mean, so batched
    and singleton encodings agree up to float rounding.
    """
    mask = attention_mask.unsqueeze(-1).to(last_hidden.dtype)
    summed = (last_hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1.0)
    return summed / counts


class NliHead(nn.Module):
    """Classifier over the pooled encoder state.

    Architecture: linear layer with 768 units and tanh activation, 10%
    dropout, then a 3-way linear classifier under softmax. Dropout is inert in
    eval mode, so serving is deterministic for fixed weights. Output order is
    (entailment, contradiction, neutral).
    """

    def __init__(self, hidden_size: int, dropout: float = 0.1):
        super().__init__()
        self.dense = nn.Linear(hidden_size, 768)
        self.dropout = nn.Dropout(dropout)
        self.classifier = nn.Linear(768, 3)

    def forward(self, pooled: torch.Tensor) -> torch.Tensor:
        hidden = torch.tanh(self.dense(pooled))
        return torch.softmax(self.classifier(self.dropout(hidden)), dim=-1)


class SentenceEncoder:
    """One checkpoint serving masked-mean sentence embeddings.

    ``dim`` is observed by encoding a probe at load time, never assumed from
    configuration, so the health endpoint reports what the model really emits.
    """

    def __init__(self, path: str, device: str):
        from transformers import AutoModel, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(path)
        self.model = AutoModel.from_pretrained(path).to(device).eval()
        self.device = device
        self.dim = len(self.encode(["probe"], batch_size=1)[0])

    @torch.no_grad()
    def encode(self, texts: Sequence[str], batch_size: int) -> list[list[float]]:
        out: list[list[float]] = []
        for start in range(0, len(texts), batch_size):
            chunk = list(texts[start : start + batch_size])
            enc = self.tokenizer(
                chunk, padding=True, truncation=True, return_tensors="pt"
            ).to(self.device)
            hidden = self.model(**enc).last_hidden_state
            pooled = masked_mean(hidden, enc["attention_mask"])
            out.extend(row.tolist() for row in pooled.cpu())
        return out


class PairClassifier:
    """NLI probability triples from a published checkpoint.

    With ``head_path`` set, the pooled tanh/dropout head (NliHead) is loaded
    from that state dict and run over the base encoder. Otherwise the
    checkpoint's own sequence-classification head answers, with its label
    order mapped onto (entailment, contradiction, neutral) via id2label.
    """

    def __init__(self, path: str, head_path: str, device: str):
        from transformers import (
            AutoModel,
            AutoModelForSequenceClassification,
            AutoTokenizer,
        )

        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(path)
        if head_path:
            self.base = AutoModel.from_pretrained(path).to(device).eval()
            self.head = NliHead(self.base.config.hidden_size).to(device).eval()
            self.head.load_state_dict(torch.load(head_path, map_location=device))
            self.model = None
            self._order = None
        else:
            self.base = None
            self.head = None
            self.model = (
                AutoModelForSequenceClassification.from_pretrained(path)
                .to(device)
                .eval()
            )
            id2label = {
                int(idx): str(name).lower()
                for idx, name in self.model.config.id2label.items()
            }
            try:
                self._order = tuple(
                    next(idx for idx, name in id2label.items() if want in name)
                    for want in ("entail", "contra", "neutral")
                )
            except StopIteration:
                raise BackendLoadError(
                    f"cannot map labels {id2label} onto entailment/contradiction/neutral"
                )

    @torch.no_grad()
    def score(
        self, pairs: Sequence[tuple[str, str]], batch_size: int
    ) -> list[tuple[float, float, float]]:
        out: list[tuple[float, float, float]] = []
        for start in range(0, len(pairs), batch_size):
            chunk = list(pairs[start : start + batch_size])
            enc = self.tokenizer(
                [premise for premise, _ in chunk],
                [hypothesis for _, hypothesis in chunk],
                padding=True,
                truncation=True,
                return_tensors="pt",
            ).to(self.device)
            if self.model is None:
                hidden = self.base(**enc).last_hidden_state
                probs = self.head(masked_mean(hidden, enc["attention_mask"])).cpu()
                out.extend((float(r[0]), float(r[1]), float(r[2])) for r in probs)
            else:
                probs = torch.softmax(self.model(**enc).logits, dim=-1).cpu()
                e, c, n = self._order
                out.extend((float(r[e]), float(r[c]), float(r[n])) for r in probs)
        return out


class TokenAnnotator:
    """Language, stopword, POS and entity annotation from hub pipelines.

    Entities come from the configured NER model, aligned to regex word tokens
    by character span. POS comes from the configured token-classification
    model when one is set; otherwise a coarse fallback tags entity tokens
    PROPN, stopwords OTHER and everything else NOUN. Stopword lexicons are
    optional newline-delimited files per language code.
    """

    def __init__(self, config: ServiceConfig):
        from transformers import pipeline

        device_index = 0 if config.device.startswith("cuda") else -1
        self._language = pipeline(
            "text-classification", model=config.language_model, device=device_index
        )
        self._ner = pipeline(
            "token-classification",
            model=config.ner_model,
            aggregation_strategy="simple",
            device=device_index,
        )
        self._pos = (
            pipeline(
                "token-classification",
                model=config.pos_model,
                aggregation_strategy="simple",
                device=device_index,
            )
            if config.pos_model
            else None
        )
        self._stopwords = {
            language: frozenset(
                line.strip().casefold()
                for line in open(path, encoding="utf-8")
                if line.strip()
            )
            for language, path in config.stopword_paths.items()
        }

    def _detect(self, text: str) -> str:
        return str(self._language(text[:512])[0]["label"]).lower()

    @staticmethod
    def _span_label(spans: list[dict], start: int, end: int) -> str | None:
        for span in spans:
            if span["start"] <= start and end <= span["end"]:
                return str(span["entity_group"])
        return None

    def annotate(self, texts: Sequence[str]) -> list[dict]:
        out = []
        for text in texts:
            language = self._detect(text)
            stopwords = self._stopwords.get(language, frozenset())
            entity_spans = self._ner(text)
            pos_spans = self._pos(text) if self._pos else []
            rows = []
            for match in _WORD_RE.finditer(text):
                token, start, end = match.group(0), match.start(), match.end()
                entity = self._span_label(entity_spans, start, end)
                is_stop = token.casefold() in stopwords
                pos = self._span_label(pos_spans, start, end)
                if pos is None:
                    pos = "PROPN" if entity else ("OTHER" if is_stop else "NOUN")
                rows.append(
                    {
                        "token": token,
                        "is_stopword": is_stop,
                        "pos": pos,
                        "entity": entity,
                    }
                )
            out.append({"language": language, "tokens": rows})
        return out


class RealBackend:
    """Hosts the configured encoders, the NLI classifier and the annotator.

    One lock serializes forward passes: the degenerate batch queue. Each
    request's inputs are processed in order, chunked by the configured batch
    size, and concurrent requests take turns rather than interleaving.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.model_ids = tuple(config.encoders)
        self._lock = threading.Lock()
        self._encoders = {
            model_id: SentenceEncoder(path, config.device)
            for model_id, path in config.encoders.items()
        }
        self._nli = PairClassifier(
            config.nli_model, config.nli_head_path, config.device
        )
        self._annotator = TokenAnnotator(config)

    def dims(self) -> dict[str, int]:
        return {model_id: enc.dim for model_id, enc in self._encoders.items()}

    def embed(
        self, model_ids: Sequence[str], texts: Sequence[str]
    ) -> list[list[list[float]]]:
        for model_id in model_ids:
            if model_id not in self._encoders:
                raise UnknownModelError(f"unknown model id: {model_id}")
        with self._lock:
            per_model = {
                model_id: self._encoders[model_id].encode(texts, self.config.batch_size)
                for model_id in dict.fromkeys(model_ids)
            }
        return [
            [per_model[model_id][i] for model_id in model_ids]
            for i in range(len(texts))
        ]

    def nli(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[tuple[float, float, float]]:
        with self._lock:
            return self._nli.score(list(pairs), self.config.batch_size)

    def annotate(self, texts: Sequence[str]) -> list[dict]:
        with self._lock:
            return self._annotator.annotate(texts)


def build_backend(config: ServiceConfig) -> RealBackend:
    """Load every configured model; any failure becomes BackendLoadError."""
    try:
        return RealBackend(config)
    except (BackendLoadError, UnknownModelError):
        raise
    except Exception as exc:
        raise BackendLoadError(
            f"model loading failed: {type(exc).__name__}: {exc}"
        ) from exc
