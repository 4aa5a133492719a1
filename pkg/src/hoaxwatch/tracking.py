"""Hoax-tracking pipeline: label a tweet corpus against the index, then
aggregate the labeled dataset into time series and support-vs-counter reports.

Each tweet is matched against the hoax index; tweets below the similarity
floor fall outside the pool and are dropped (the drop count is surfaced in the
report, not hidden). Passing tweets get NLI scores against every retrieved
hoax and are assigned to exactly one: maximal entailment, ties broken by
higher similarity and then lower hoax id.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Iterable, Mapping, Sequence

from .errors import BinMismatchError, MissingTimestampError
from .gateway import ModelGateway, NLIScores
from .hoaxdb import (
    DEFAULT_MIN_SIMILARITY,
    DEFAULT_TOP_K,
    HoaxId,
    HoaxIndex,
    HoaxRecord,
    _id_sort_key,
    search_vector,
)
from .osn import DEFAULT_DATE_FLOOR, TweetRecord, iso_utc
from .pca import PCAModel, transform
from .verdicts import RelationLabel, label_relation

log = logging.getLogger(__name__)

DEFAULT_BIN_WIDTH = timedelta(days=7)
DEFAULT_ORIGIN = DEFAULT_DATE_FLOOR

_EMBED_CHUNK = 64


@dataclass(frozen=True)
class LabeledTweet:
    tweet_id: str
    hoax_id: HoaxId
    similarity: float
    scores: NLIScores
    label: RelationLabel


@dataclass(frozen=True)
class Claim:
    text: str
    received_at: datetime | None = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValueError("claim text must be nonempty")


@dataclass(frozen=True)
class TimeSeries:
    bin_width: timedelta
    origin: datetime
    counts: Mapping[int, int]
    by_label: Mapping[int, Mapping[str, int]]
    by_hoax: Mapping[HoaxId, Mapping[int, int]]

    @property
    def total(self) -> int:
        return sum(self.counts.values())


@dataclass(frozen=True)
class SeriesComparison:
    bins: tuple[tuple[int, int, int], ...]  # (bin index, support, counter)
    support_total: int
    counter_total: int
    ratio: float | None
    lag_of_peaks: int | None


@dataclass(frozen=True)
class TrackingReport:
    totals_by_hoax: Mapping[HoaxId, Mapping[str, int]]
    peak_by_hoax: Mapping[HoaxId, int]
    support: TimeSeries
    counter: TimeSeries | None
    aggregate: TimeSeries
    comparison: SeriesComparison | None
    dropped_count: int | None = None


def _label_one(
    index: HoaxIndex,
    tweet: TweetRecord,
    vec,
    gateway: ModelGateway,
    top_k: int,
    min_similarity: float,
) -> LabeledTweet | None:
    hits = search_vector(index, vec, top_k=top_k, min_similarity=min_similarity)
    if not hits:
        return None
    pairs = [(index.record(h.hoax_id).text, tweet.text) for h in hits]
    scored = list(zip(hits, gateway.nli_batch(pairs)))
    hit, scores = min(
        scored,
        key=lambda item: (
            -item[1].entailment,
            -item[0].similarity,
            _id_sort_key(item[0].hoax_id),
        ),
    )
    return LabeledTweet(
        tweet_id=tweet.id,
        hoax_id=hit.hoax_id,
        similarity=hit.similarity,
        scores=scores,
        label=label_relation(scores),
    )


def build_dataset(
    hoaxes: Sequence[HoaxRecord],
    tweet_corpus: Sequence[TweetRecord],
    index: HoaxIndex,
    gateway: ModelGateway,
    pca_model: PCAModel,
    top_k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
    workers: int = 1,
    checkpoint_path: str | None = None,
) -> list[LabeledTweet]:
    """Assign each corpus tweet to at most one hoax and label the relation.

    Output is sorted by tweet id and is a pure function of the inputs: the
    same corpus in any order, at any worker count, yields the same dataset.
    With a checkpoint path, already-processed tweet ids (labeled or dropped)
    are skipped on resume and fresh results are appended as they complete.
    """
    missing = [rec.id for rec in hoaxes if rec.id not in index]
    if missing:
        raise ValueError(f"index is missing hoax ids {missing!r}")
    done: dict[str, LabeledTweet | None] = {}
    if checkpoint_path and os.path.exists(checkpoint_path):
        done = _load_checkpoint(checkpoint_path)
    todo = [t for t in tweet_corpus if t.id not in done]
    vectors = []
    for start in range(0, len(todo), _EMBED_CHUNK):
        chunk = todo[start:start + _EMBED_CHUNK]
        for raw in gateway.embed_concat([t.text for t in chunk]):
            vectors.append(transform(pca_model, raw))

    def work(pair):
        tweet, vec = pair
        return tweet, _label_one(index, tweet, vec, gateway, top_k, min_similarity)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, zip(todo, vectors)))
    else:
        results = [work(pair) for pair in zip(todo, vectors)]

    sink = open(checkpoint_path, "a", encoding="utf-8") if checkpoint_path else None
    try:
        for tweet, labeled in results:
            done[tweet.id] = labeled
            if sink is not None:
                sink.write(_checkpoint_line(tweet.id, labeled) + "\n")
                sink.flush()
    finally:
        if sink is not None:
            sink.close()

    dataset = [lt for lt in done.values() if lt is not None]
    dropped = len(done) - len(dataset)
    if dropped:
        log.info("build_dataset: %d tweet(s) below similarity floor dropped", dropped)
    dataset.sort(key=lambda lt: lt.tweet_id)
    return dataset


def _checkpoint_line(tweet_id: str, labeled: LabeledTweet | None) -> str:
    if labeled is None:
        return json.dumps({"tweet_id": tweet_id, "dropped": True})
    return _labeled_json(labeled)


def _load_checkpoint(path: str) -> dict[str, LabeledTweet | None]:
    done: dict[str, LabeledTweet | None] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if doc.get("dropped"):
                done[str(doc["tweet_id"])] = None
            else:
                lt = _labeled_from_doc(doc)
                done[lt.tweet_id] = lt
    return done


# --- labeled-dataset persistence ---


def _labeled_json(lt: LabeledTweet) -> str:
    return json.dumps(
        {
            "tweet_id": lt.tweet_id,
            "hoax_id": lt.hoax_id,
            "similarity": lt.similarity,
            "entailment": lt.scores.entailment,
            "contradiction": lt.scores.contradiction,
            "neutral": lt.scores.neutral,
            "label": lt.label.value,
        }
    )


def _labeled_from_doc(doc: dict) -> LabeledTweet:
    return LabeledTweet(
        tweet_id=str(doc["tweet_id"]),
        hoax_id=doc["hoax_id"],
        similarity=float(doc["similarity"]),
        scores=NLIScores(
            entailment=float(doc["entailment"]),
            contradiction=float(doc["contradiction"]),
            neutral=float(doc["neutral"]),
        ),
        label=RelationLabel(doc["label"]),
    )


def save_labeled(dataset: Sequence[LabeledTweet], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for lt in dataset:
            fh.write(_labeled_json(lt) + "\n")


def load_labeled(path: str) -> list[LabeledTweet]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or json.loads(line).get("dropped"):
                continue
            out.append(_labeled_from_doc(json.loads(line)))
    return out


# --- temporal analytics ---


def _tweets_by_id(tweets) -> Mapping[str, TweetRecord]:
    if isinstance(tweets, Mapping):
        return tweets
    return {t.id: t for t in tweets}


def bin_index(ts: datetime, origin: datetime, bin_width: timedelta) -> int:
    """Floor-division bin; timestamps before the origin land in negative bins."""
    delta = ts.astimezone(timezone.utc) - origin
    return int(delta // bin_width)


def temporal_histogram(
    labeled: Sequence[LabeledTweet],
    tweets,
    bin_width: timedelta = DEFAULT_BIN_WIDTH,
    origin: datetime = DEFAULT_ORIGIN,
    label_filter: RelationLabel | None = None,
) -> TimeSeries:
    """Bin labeled tweets by creation time (UTC, fixed origin).

    `tweets` supplies the timestamps: a mapping id -> TweetRecord or any
    iterable of TweetRecords. A labeled tweet missing from it is an error,
    not a silent skip — conservation (sum of counts == input count) is the
    invariant callers rely on.
    """
    if bin_width <= timedelta(0):
        raise ValueError("bin_width must be positive")
    lookup = _tweets_by_id(tweets)
    counts: dict[int, int] = {}
    by_label: dict[int, dict[str, int]] = {}
    by_hoax: dict[HoaxId, dict[int, int]] = {}
    for lt in labeled:
        if label_filter is not None and lt.label is not label_filter:
            continue
        record = lookup.get(lt.tweet_id)
        if record is None or record.created_at is None:
            raise MissingTimestampError(f"no timestamp for tweet {lt.tweet_id!r}")
        idx = bin_index(record.created_at, origin, bin_width)
        counts[idx] = counts.get(idx, 0) + 1
        by_label.setdefault(idx, {})
        by_label[idx][lt.label.value] = by_label[idx].get(lt.label.value, 0) + 1
        by_hoax.setdefault(lt.hoax_id, {})
        by_hoax[lt.hoax_id][idx] = by_hoax[lt.hoax_id].get(idx, 0) + 1
    return TimeSeries(
        bin_width=bin_width, origin=origin,
        counts=counts, by_label=by_label, by_hoax=by_hoax,
    )


def _peak(counts: Mapping[int, int]) -> int | None:
    """Argmax bin; ties go to the earliest bin. None when nothing was counted."""
    best = None
    for idx in sorted(counts):
        if counts[idx] <= 0:
            continue
        if best is None or counts[idx] > counts[best]:
            best = idx
    return best


def peak_bins(series: TimeSeries, per_hoax: bool = True) -> dict:
    """Peak bin per hoax; with per_hoax=False a single entry keyed None."""
    if series.total == 0:
        raise ValueError("series is empty")
    if not per_hoax:
        return {None: _peak(series.counts)}
    return {
        hoax_id: _peak(bins)
        for hoax_id, bins in series.by_hoax.items()
        if _peak(bins) is not None
    }


def compare_series(support: TimeSeries, counter: TimeSeries) -> SeriesComparison:
    """Align two series bin-for-bin and summarize counter-vs-support volume.

    ratio = counter_total / support_total (None when undefined, i.e. 0/0 has
    ratio None only if counter is also empty -> 0-support with counters is
    reported as None too since the quotient has no value). Peak lag is
    counter-peak minus support-peak, None when either peak is undefined.
    """
    if support.bin_width != counter.bin_width or support.origin != counter.origin:
        raise BinMismatchError(
            "series use different binning: "
            f"({support.bin_width}, {support.origin}) vs "
            f"({counter.bin_width}, {counter.origin})"
        )
    all_bins = sorted(set(support.counts) | set(counter.counts))
    pairs = tuple(
        (idx, support.counts.get(idx, 0), counter.counts.get(idx, 0))
        for idx in all_bins
    )
    s_total = support.total
    c_total = counter.total
    ratio = (c_total / s_total) if s_total > 0 else None
    s_peak = _peak(support.counts)
    c_peak = _peak(counter.counts)
    lag = (c_peak - s_peak) if s_peak is not None and c_peak is not None else None
    return SeriesComparison(
        bins=pairs,
        support_total=s_total,
        counter_total=c_total,
        ratio=ratio,
        lag_of_peaks=lag,
    )


def build_report(
    labeled: Sequence[LabeledTweet],
    tweets,
    counter_labeled: Sequence[LabeledTweet] = (),
    counter_tweets=(),
    bin_width: timedelta = DEFAULT_BIN_WIDTH,
    origin: datetime = DEFAULT_ORIGIN,
    corpus_size: int | None = None,
) -> TrackingReport:
    """Aggregate a labeled dataset (plus optional fact-checker counter corpus).

    The support series counts ENTAILMENT tweets only; the aggregate series
    counts everything. `corpus_size`, when given, yields the dropped-tweet
    count (corpus size minus labeled tweets) for auditability.
    """
    totals: dict[HoaxId, dict[str, int]] = {}
    for lt in labeled:
        totals.setdefault(lt.hoax_id, {})
        totals[lt.hoax_id][lt.label.value] = totals[lt.hoax_id].get(lt.label.value, 0) + 1
    aggregate = temporal_histogram(labeled, tweets, bin_width, origin)
    support = temporal_histogram(
        labeled, tweets, bin_width, origin, label_filter=RelationLabel.ENTAILMENT
    )
    counter = None
    comparison = None
    if counter_labeled:
        counter = temporal_histogram(counter_labeled, counter_tweets, bin_width, origin)
        comparison = compare_series(support, counter)
    peaks = peak_bins(aggregate) if aggregate.total else {}
    dropped = None
    if corpus_size is not None:
        dropped = corpus_size - len({lt.tweet_id for lt in labeled})
    return TrackingReport(
        totals_by_hoax=totals,
        peak_by_hoax=peaks,
        support=support,
        counter=counter,
        aggregate=aggregate,
        comparison=comparison,
        dropped_count=dropped,
    )


# --- report serialization ---


def _series_doc(series: TimeSeries) -> dict:
    return {
        "bin_width_seconds": series.bin_width.total_seconds(),
        "origin": iso_utc(series.origin),
        "counts": {str(k): v for k, v in sorted(series.counts.items())},
        "by_label": {
            str(k): dict(sorted(v.items())) for k, v in sorted(series.by_label.items())
        },
        "by_hoax": {
            str(h): {str(k): v for k, v in sorted(bins.items())}
            for h, bins in sorted(series.by_hoax.items(), key=lambda kv: _id_sort_key(kv[0]))
        },
        "total": series.total,
    }


def report_to_json(report: TrackingReport) -> str:
    doc = {
        "totals_by_hoax": {
            str(h): dict(sorted(v.items()))
            for h, v in sorted(report.totals_by_hoax.items(), key=lambda kv: _id_sort_key(kv[0]))
        },
        "peak_by_hoax": {
            str(h): b
            for h, b in sorted(report.peak_by_hoax.items(), key=lambda kv: _id_sort_key(kv[0]))
        },
        "support": _series_doc(report.support),
        "aggregate": _series_doc(report.aggregate),
        "counter": _series_doc(report.counter) if report.counter else None,
        "comparison": None,
        "dropped_count": report.dropped_count,
    }
    if report.comparison is not None:
        doc["comparison"] = {
            "bins": [list(row) for row in report.comparison.bins],
            "support_total": report.comparison.support_total,
            "counter_total": report.comparison.counter_total,
            "ratio": report.comparison.ratio,
            "lag_of_peaks": report.comparison.lag_of_peaks,
        }
    return json.dumps(doc, ensure_ascii=False, indent=2)


def series_to_csv(series: TimeSeries, path: str) -> None:
    """Per-bin CSV (bin_index, bin_start, count) for external plotting."""
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_index", "bin_start_utc", "count"])
        for idx in sorted(series.counts):
            start = series.origin + idx * series.bin_width
            writer.writerow([idx, iso_utc(start), series.counts[idx]])


def write_plot_description(report: TrackingReport, path: str) -> None:
    """Tool-agnostic plot spec: one JSON object per series with (bin, count) rows."""
    doc = {
        "kind": "hoax-tracking-timeseries",
        "bin_width_seconds": report.aggregate.bin_width.total_seconds(),
        "origin": iso_utc(report.aggregate.origin),
        "series": [],
    }
    named = [("aggregate", report.aggregate), ("support", report.support)]
    if report.counter is not None:
        named.append(("counter", report.counter))
    for name, series in named:
        doc["series"].append(
            {
                "name": name,
                "points": [[idx, series.counts[idx]] for idx in sorted(series.counts)],
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
