"""Hoax verification and tracking engine.

Two workflows over a database of fact-checked claims:

1. Verification — embed a new claim, retrieve the most similar known hoaxes
   by cosine similarity, and decide SUPPORTS_HOAX / CONTRADICTS_HOAX /
   UNVERIFIED from entailment scores.
2. Tracking — extract keywords from a hoax, build boolean search queries,
   retrieve matching posts, label each against the hoax database, and
   aggregate the labeled dataset into temporal reports.

Model inference is behind a gateway speaking a small HTTP protocol; the
bundled deterministic stub provider makes the whole pipeline runnable and
testable without any model weights.
"""

from .config import EngineConfig, apply_overrides, load_config
from .errors import HoaxwatchError
from .gateway import ModelGateway, NLIScores, ProviderConfig, RetryPolicy
from .hoaxdb import (
    HoaxIndex,
    HoaxRecord,
    SimilarityHit,
    add_hoax,
    build_index,
    load_hoax_records,
    load_index,
    save_index,
    search,
    search_vector,
)
from .keywords import (
    ExtractionMode,
    QuerySpec,
    ScoredKeyword,
    build_query,
    evaluate_keywords,
    extract_keywords,
    generalize_query,
    parse_query,
    query_spec_from_keywords,
)
from .osn import (
    MockOsnServer,
    OsnClient,
    OsnClientConfig,
    SearchJob,
    TweetRecord,
    export_public,
    hash_author,
    load_tweets,
    persist_tweets,
)
from .pca import PCAModel, fit_pca, inverse_transform, load_pca, save_pca, transform
from .reports import (
    ClassificationReport,
    classification_report,
    keyword_report,
    sts_report,
)
from .tracking import (
    Claim,
    LabeledTweet,
    TimeSeries,
    TrackingReport,
    build_dataset,
    build_report,
    compare_series,
    load_labeled,
    peak_bins,
    save_labeled,
    temporal_histogram,
)
from .vecmath import (
    concat_embeddings,
    cosine_similarity,
    fisher_z_average,
    pearson,
    spearman,
)
from .verdicts import (
    RelationLabel,
    Verdict,
    VerdictLabel,
    fuse_verdict,
    infer_relation,
    label_relation,
)

__version__ = "0.1.0"

__all__ = [
    "Claim",
    "ClassificationReport",
    "EngineConfig",
    "ExtractionMode",
    "HoaxIndex",
    "HoaxRecord",
    "HoaxwatchError",
    "LabeledTweet",
    "MockOsnServer",
    "ModelGateway",
    "NLIScores",
    "OsnClient",
    "OsnClientConfig",
    "PCAModel",
    "ProviderConfig",
    "QuerySpec",
    "RelationLabel",
    "RetryPolicy",
    "ScoredKeyword",
    "SearchJob",
    "SimilarityHit",
    "TimeSeries",
    "TrackingReport",
    "TweetRecord",
    "Verdict",
    "VerdictLabel",
    "add_hoax",
    "apply_overrides",
    "build_dataset",
    "build_index",
    "build_query",
    "build_report",
    "classification_report",
    "compare_series",
    "concat_embeddings",
    "cosine_similarity",
    "evaluate_keywords",
    "export_public",
    "extract_keywords",
    "fisher_z_average",
    "fit_pca",
    "fuse_verdict",
    "generalize_query",
    "hash_author",
    "infer_relation",
    "inverse_transform",
    "keyword_report",
    "label_relation",
    "load_config",
    "load_hoax_records",
    "load_index",
    "load_labeled",
    "load_pca",
    "load_tweets",
    "parse_query",
    "peak_bins",
    "pearson",
    "persist_tweets",
    "query_spec_from_keywords",
    "save_index",
    "save_labeled",
    "save_pca",
    "search",
    "search_vector",
    "spearman",
    "sts_report",
    "temporal_histogram",
    "transform",
]
