"""Release gate: one test per acceptance criterion (A1-A9).

Each criterion is a single test, so `pytest -v` prints exactly one pass/fail
line per criterion. Expected values come from the independent oracles in
oracles.py (extended-precision Decimal, exact Fraction arithmetic) or from
the hand-authored expectations frozen in tests/fixtures/; every tolerance is
pinned next to its assertion. Everything runs against the deterministic
stub provider — no network, no model downloads.
"""

from __future__ import annotations

import json
import random
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from hoaxwatch.cli import main as cli_main
from hoaxwatch.errors import NoCandidatesError
from hoaxwatch.gateway import ModelGateway, ProviderConfig
from hoaxwatch.hoaxdb import HoaxIndex, HoaxRecord, build_index, load_hoax_records, search_vector
from hoaxwatch.keywords import ExtractionMode, QuerySpec, build_query, extract_keywords, parse_query
from hoaxwatch.osn import load_tweets
from hoaxwatch.pca import fit_pca, inverse_transform, transform
from hoaxwatch.reports import (
    NLI_LABEL_SET,
    classification_report,
    keyword_report,
    load_labels_jsonl,
    load_sts_csv,
    render_classification_table,
    render_keyword_table,
    render_sts_table,
    sts_report,
)
from hoaxwatch.stub import fold_text, stub_embedding, stub_nli
from hoaxwatch.tracking import build_dataset
from hoaxwatch.vecmath import (
    concat_embeddings,
    cosine_similarity,
    fisher_z_average,
    pearson,
    spearman,
)

from oracles import (
    oracle_charpoly3,
    oracle_charpoly_eval,
    oracle_classification,
    oracle_cosine,
    oracle_cov3,
    oracle_fisher_average,
    oracle_pearson,
    oracle_sequential_dataset,
    oracle_spearman,
    oracle_topk,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="module")
def catalogue_engine():
    """The full 61-claim catalogue indexed exactly the way the CLI does it:
    projection fitted on the claim texts themselves, k = min(dim, n-1)."""
    hoaxes = load_hoax_records(str(FIXTURES / "hoaxes_es.jsonl"))
    gateway = ModelGateway(ProviderConfig())
    vectors = gateway.embed_concat([h.text for h in hoaxes])
    k = min(len(vectors[0]), len(vectors) - 1)
    pca_model = fit_pca(vectors, k, ensemble_model_ids=gateway.config.ensemble_model_ids)
    index = build_index(hoaxes, gateway, pca_model)
    return hoaxes, gateway, pca_model, index


# --- A1 ---------------------------------------------------------------------


def test_a1_numerical_kernels_match_oracles():
    """Cosine, Pearson, Spearman (average-rank ties) and Fisher-z averaging
    agree with extended-precision oracles on 1000 random cases each, within
    1e-9, in under 10 s."""
    rng = random.Random(11001)
    t0 = time.monotonic()

    for _ in range(1000):
        n = rng.randint(3, 32)
        a = [rng.uniform(-10.0, 10.0) for _ in range(n)]
        b = [rng.uniform(-10.0, 10.0) for _ in range(n)]
        assert abs(cosine_similarity(a, b) - oracle_cosine(a, b)) < 1e-9

    for _ in range(1000):
        n = rng.randint(3, 40)
        x = [rng.uniform(-5.0, 5.0) for _ in range(n)]
        y = [rng.uniform(-5.0, 5.0) for _ in range(n)]
        assert abs(pearson(x, y) - oracle_pearson(x, y)) < 1e-9

    for _ in range(1000):
        n = rng.randint(4, 30)
        # coarse grid forces plenty of tied values -> average ranks matter
        x = [rng.randint(0, 6) * 0.5 for _ in range(n)]
        y = [rng.randint(0, 6) * 0.5 for _ in range(n)]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        assert abs(spearman(x, y) - oracle_spearman(x, y)) < 1e-9

    for _ in range(1000):
        rs = [rng.uniform(-0.999, 0.999) for _ in range(rng.randint(2, 6))]
        assert abs(fisher_z_average(rs) - oracle_fisher_average(rs)) < 1e-9

    assert time.monotonic() - t0 < 10.0


# --- A2 ---------------------------------------------------------------------


def test_a2_projection_properties_and_eigen_fixture():
    """Orthonormal components (1e-6), non-increasing explained variance,
    transform(mean)=0 (1e-7), full-rank round trip (1e-5), and a 3-point
    fixture whose eigenvalues satisfy the exact characteristic polynomial
    within 1e-8."""
    rng = np.random.default_rng(22002)
    data = list(rng.normal(size=(40, 12)))
    model = fit_pca(data, 12)

    gram = model.components @ model.components.T
    assert float(np.max(np.abs(gram - np.eye(12)))) < 1e-6

    ev = model.explained_variance
    assert np.all(np.diff(ev) <= 1e-12)  # slack only for repeated eigenvalues

    assert float(np.max(np.abs(transform(model, model.mean)))) < 1e-7

    for row in data:
        back = inverse_transform(model, transform(model, np.asarray(row)))
        assert float(np.max(np.abs(back - row))) < 1e-5

    # hand-computed fixture: cov of {(0,0,1),(1,0,0),(0,1,0),(2,2,2)} is
    # [[11/12,7/12,7/12],...] with eigenvalues 25/12 and a double 1/3, top
    # axis along (1,1,1)/sqrt(3) — verified by the exact Fraction oracle.
    samples = [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (2.0, 2.0, 2.0)]
    m3 = fit_pca([np.asarray(s) for s in samples], 3)
    cov = oracle_cov3(samples)
    coeffs = oracle_charpoly3(cov)
    for lam in m3.explained_variance:
        residual = oracle_charpoly_eval(coeffs, Fraction(float(lam)))
        assert abs(float(residual)) < 1e-8
    expected = [Fraction(25, 12), Fraction(1, 3), Fraction(1, 3)]
    for lam, ref in zip(m3.explained_variance, expected):
        assert abs(float(lam) - float(ref)) < 1e-8
    axis = np.ones(3) / np.sqrt(3.0)
    assert abs(float(np.dot(m3.components[0], axis))) > 1.0 - 1e-8


# --- A3 ---------------------------------------------------------------------


def test_a3_retrieval_equals_bruteforce_scan():
    """Top-k search returns exactly the brute-force oracle's ids in the same
    order on 50 random queries over 100 entries; floor and top-k behave
    monotonically."""
    rng = random.Random(33003)
    dim = 8
    ids = [i if i % 7 else f"s{i}" for i in range(100)]
    vectors = [
        np.asarray([rng.uniform(-1.0, 1.0) for _ in range(dim)]) for _ in ids
    ]
    index = HoaxIndex(ensemble_model_ids=("stub-mini", "stub-base"), reduced_dim=dim)
    for hid, vec in zip(ids, vectors):
        index.add_entry(HoaxRecord(id=hid, text=f"entry {hid}"), vec)
    # the store keeps float32 entries; the oracle must scan the same values
    stored = [(hid, np.asarray(vec, dtype=np.float32)) for hid, vec in zip(ids, vectors)]

    for _ in range(50):
        query = np.asarray([rng.uniform(-1.0, 1.0) for _ in range(dim)])
        top_k = rng.choice([1, 3, 5, 10, 100])
        floor = rng.uniform(-1.0, 0.9)
        hits = search_vector(index, query, top_k=top_k, min_similarity=floor)
        expected = oracle_topk(stored, query, top_k, floor)
        assert [h.hoax_id for h in hits] == [i for i, _ in expected]
        for h, (_, sim) in zip(hits, expected):
            assert abs(h.similarity - sim) < 1e-12

        # raising the floor only ever removes hits, preserving order
        higher = search_vector(index, query, top_k=top_k, min_similarity=min(floor + 0.3, 1.0))
        kept = [h.hoax_id for h in hits if h.similarity >= min(floor + 0.3, 1.0)]
        assert [h.hoax_id for h in higher] == kept
        # growing top_k only ever extends the result
        wider = search_vector(index, query, top_k=top_k + 5, min_similarity=floor)
        assert [h.hoax_id for h in wider][: len(hits)] == [h.hoax_id for h in hits]


# --- A4 ---------------------------------------------------------------------


def test_a4_dataset_equals_sequential_reference(catalogue_engine):
    """build_dataset over the 1000-tweet corpus is bit-identical to a
    straight-line sequential reference, and invariant under corpus order and
    worker count; all in under 60 s."""
    hoaxes, gateway, pca_model, index = catalogue_engine
    corpus = load_tweets(str(FIXTURES / "bulk_corpus.jsonl"))
    assert len(corpus) == 1000
    t0 = time.monotonic()

    def as_tuple(lt):
        return (lt.tweet_id, lt.hoax_id, lt.similarity, lt.scores.entailment,
                lt.scores.contradiction, lt.scores.neutral, lt.label.value)

    base = build_dataset(hoaxes, corpus, index, gateway, pca_model,
                         top_k=5, min_similarity=0.6)

    shuffled = list(corpus)
    random.Random(44004).shuffle(shuffled)
    alt = build_dataset(hoaxes, shuffled, index, gateway, pca_model,
                        top_k=5, min_similarity=0.6, workers=4)
    assert [as_tuple(lt) for lt in base] == [as_tuple(lt) for lt in alt]

    # Sequential reference: same leaf kernels (independently verified in
    # A1/A2), all orchestration — batching, retrieval, assignment, labeling —
    # re-derived in plain loops. Entries round through float32 exactly as the
    # store does, queries stay float64.
    cfg = gateway.config

    def embed(text):
        return concat_embeddings([
            stub_embedding(text, mid, cfg.expected_dims[mid])
            for mid in cfg.ensemble_model_ids
        ])

    reference = oracle_sequential_dataset(
        hoaxes, corpus, embed, stub_nli,
        lambda v: transform(pca_model, v),
        top_k=5, min_similarity=0.6,
        cos=cosine_similarity,
        store_fn=lambda v: np.asarray(v, dtype=np.float32),
    )
    assert {as_tuple(lt) for lt in base} == reference
    assert time.monotonic() - t0 < 60.0


# --- A5 ---------------------------------------------------------------------


def test_a5_end_to_end_cli_matches_authored_expectations(tmp_path, capsys):
    """Index the 61-claim catalogue, ingest the scripted retrieval corpus and
    the debunk corpus through the CLI, and match the hand-authored totals,
    series, conservation and privacy expectations exactly."""
    with open(FIXTURES / "e2e_expectations.json", encoding="utf-8") as fh:
        exp = json.load(fh)

    idx_dir = tmp_path / "index"
    rc = cli_main(["index", str(FIXTURES / "hoaxes_es.jsonl"), "--out", str(idx_dir)])
    assert rc == 0
    built = json.loads(capsys.readouterr().out)
    assert built["count"] == 61
    assert built["reduced_dim"] == 60

    corpus_out = tmp_path / "corpus.jsonl"
    labeled_out = tmp_path / "labeled.jsonl"
    export_out = tmp_path / "export.jsonl"
    rc = cli_main([
        "track", "--search",
        "--osn-endpoint", "mock:" + str(FIXTURES / "e2e_osn_fixture.json"),
        "--query-file", str(FIXTURES / "e2e_queries.jsonl"),
        "--corpus-out", str(corpus_out),
        "--counter-corpus", str(FIXTURES / "e2e_counter_corpus.jsonl"),
        "--labeled-out", str(labeled_out),
        "--export", str(export_out),
        "--index", str(idx_dir),
    ])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)

    # retrieval reproduces the recorded corpus byte for byte
    recorded = (FIXTURES / "e2e_corpus.jsonl").read_text(encoding="utf-8")
    assert corpus_out.read_text(encoding="utf-8") == recorded

    # per-claim totals, peaks, series, comparison — exact
    assert report["totals_by_hoax"] == exp["totals_by_hoax"]
    assert report["peak_by_hoax"] == exp["peak_by_hoax"]
    assert report["aggregate"]["counts"] == exp["aggregate_counts"]
    assert report["support"]["counts"] == exp["support_counts"]
    assert report["counter"]["counts"] == exp["counter_counts"]
    assert report["dropped_count"] == exp["dropped_count"]
    cmp_doc = report["comparison"]
    assert cmp_doc["bins"] == exp["comparison"]["bins"]
    assert cmp_doc["support_total"] == exp["comparison"]["support_total"]
    assert cmp_doc["counter_total"] == exp["comparison"]["counter_total"]
    assert cmp_doc["lag_of_peaks"] == exp["comparison"]["lag_of_peaks"]
    assert cmp_doc["ratio"] == exp["comparison"]["ratio_num"] / exp["comparison"]["ratio_den"]

    # conservation: every labeled tweet lands in exactly one bin
    assert sum(report["aggregate"]["counts"].values()) == exp["labeled_total"]
    assert report["aggregate"]["total"] == exp["labeled_total"]
    assert exp["labeled_total"] + exp["dropped_count"] == exp["corpus_size"]

    # per-tweet assignments in the labeled dataset
    labeled = {}
    with open(labeled_out, encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            labeled[doc["tweet_id"]] = doc
    assert set(labeled) == set(exp["assignments"])
    for tid, want in exp["assignments"].items():
        got = labeled[tid]
        assert got["hoax_id"] == want["hoax_id"]
        assert got["label"] == want["label"]
        if "entailment" in want:
            assert got["entailment"] == want["entailment"]

    # debunk corpus: per-claim volumes come straight from the plan
    counter_totals: dict[str, int] = {}
    for want in exp["counter_assignments"].values():
        key = str(want["hoax_id"])
        counter_totals[key] = counter_totals.get(key, 0) + 1
    by_hoax = report["counter"]["by_hoax"]
    assert {h: sum(bins.values()) for h, bins in by_hoax.items()} == counter_totals

    # privacy-safe export: ids, label and score only — no text, no authors
    export_rows = []
    with open(export_out, encoding="utf-8") as fh:
        for line in fh:
            export_rows.append(json.loads(line))
    assert len(export_rows) == exp["labeled_total"]
    for row in export_rows:
        assert set(row) == {"tweet_id", "hoax_id", "label", "similarity"}
        assert not {"text", "author", "author_hash", "author_id"} & set(row)
    assert {r["tweet_id"] for r in export_rows} == set(exp["assignments"])


# --- A6 ---------------------------------------------------------------------


def test_a6_metric_harness_matches_exact_arithmetic():
    """classification_report equals Fraction confusion-matrix arithmetic on 25
    random cases (1e-12); the scores-table Avg equals the Fisher oracle
    (1e-9); keyword metrics on the fixture are exact."""
    rng = random.Random(66006)
    labels = list(NLI_LABEL_SET)
    for case in range(25):
        n = rng.randint(5, 30)
        # sometimes restrict to two labels so supports/predictions vanish
        pool = labels if case % 3 else rng.sample(labels, 2)
        pred = [rng.choice(pool) for _ in range(n)]
        gold = [rng.choice(pool) for _ in range(n)]
        rep = classification_report(pred, gold)
        ref = oracle_classification(pred, gold, tuple(NLI_LABEL_SET))
        for lab in NLI_LABEL_SET:
            got = rep.per_label[lab]
            want = ref["per_label"][lab]
            assert abs(got.precision - float(want["precision"])) < 1e-12
            assert abs(got.recall - float(want["recall"])) < 1e-12
            assert abs(got.f1 - float(want["f1"])) < 1e-12
            assert got.support == want["support"]
        for key in ("precision", "recall", "f1"):
            assert abs(getattr(rep.macro, key) - float(ref["macro"][key])) < 1e-12
            assert abs(getattr(rep.weighted, key) - float(ref["weighted"][key])) < 1e-12
        assert abs(rep.accuracy - float(ref["accuracy"])) < 1e-12

    rows = load_sts_csv(str(FIXTURES / "sts_3lang.csv"))
    rep = sts_report(rows)
    # hand-derived from the rank permutations: d^2 sums of 2, 4 and 6 give
    # exactly 0.8, 0.6 and 0.7; on rank data Pearson equals Spearman.
    assert abs(rep.pairs["EN-EN"].pearson_x100 - 80.0) < 1e-9
    assert abs(rep.pairs["EN-ES"].pearson_x100 - 60.0) < 1e-9
    assert abs(rep.pairs["ES-ES"].pearson_x100 - 70.0) < 1e-9
    for pair in rep.pairs.values():
        assert abs(pair.pearson_x100 - pair.spearman_x100) < 1e-9
    want_avg = oracle_fisher_average([0.8, 0.6, 0.7]) * 100.0
    assert abs(rep.avg.pearson_x100 - want_avg) < 1e-9
    assert abs(rep.avg.spearman_x100 - want_avg) < 1e-9

    kw = keyword_report(str(FIXTURES / "keywords_pred.jsonl"),
                        str(FIXTURES / "keywords_gold.jsonl"))
    assert kw.per_hoax[31].f1 == 1.0
    assert kw.per_hoax[37].f1 == 0.5
    assert kw.per_hoax[50].f1 == 0.0
    assert kw.macro.precision == 0.5
    assert kw.macro.recall == 0.5
    assert kw.macro.f1 == 0.5


# --- A7 ---------------------------------------------------------------------


def test_a7_full_scale_numbers_not_reproduced_desk_scale_layouts_hold():
    """The published full-scale figures (avg rho 84.71 for the reduced
    4-model ensemble, 0.8777 benchmark accuracy, 0.7149 keyword F1) need the
    fine-tuned models and benchmark corpora, which this hermetic suite does
    not ship. This test documents that the deterministic-provider numbers sit
    far from those targets, and that the harness still emits result tables in
    the same layout those figures are reported in."""
    rep = sts_report(load_sts_csv(str(FIXTURES / "sts_3lang.csv")))
    assert abs(rep.avg.spearman_x100 - 84.71) > 5.0  # ~70.96 here

    pred, gold = load_labels_jsonl(str(FIXTURES / "nli_labels.jsonl"))
    cls = classification_report(pred, gold)
    assert cls.accuracy == 0.75
    assert abs(cls.accuracy - 0.8777) > 0.01

    kw = keyword_report(str(FIXTURES / "keywords_pred.jsonl"),
                        str(FIXTURES / "keywords_gold.jsonl"))
    assert abs(kw.macro.f1 - 0.7149) > 0.01  # 0.5 here

    sts_table = render_sts_table({"stub-ensemble": rep}, dimensions={"stub-ensemble": 384})
    lines = sts_table.splitlines()
    assert lines[0].split() == ["Model", "Dimensions", "EN-EN", "EN-ES", "ES-ES", "Avg"]
    assert lines[1].split() == ["r", "rho"] * 4
    body = [ln for ln in lines if ln.startswith("stub-ensemble")]
    assert len(body) == 1
    assert body[0].split()[1] == "384"
    assert body[0].split()[2:] == [
        "80.00", "80.00", "60.00", "60.00", "70.00", "70.00", "70.96", "70.96",
    ]

    cls_table = render_classification_table(cls)
    accuracy_row = [ln for ln in cls_table.splitlines() if ln.startswith("Accuracy")]
    assert len(accuracy_row) == 1
    assert accuracy_row[0].split() == ["Accuracy", "0.7500", "-", "-", "4"]

    kw_table = render_keyword_table({"stub-extractor": kw.macro}, scenario="Twitter")
    kw_lines = kw_table.splitlines()
    assert kw_lines[0].split() == ["Keyword", "Model", "Twitter"]
    assert kw_lines[1].split() == ["Precision", "Recall", "F1-score"]
    row = [ln for ln in kw_lines if ln.startswith("stub-extractor")][0]
    assert row.split()[-3:] == ["0.5000", "0.5000", "0.5000"]


# --- A8 ---------------------------------------------------------------------


def test_a8_twitter_mode_drops_verbs_and_queries_round_trip(gw):
    """Across the whole claim catalogue, TWITTER-mode extraction never emits a
    non-entity keyword containing a lexicon verb; build/parse round-trips 200
    random query specs exactly."""
    verbs = set()
    for lang in ("es", "en"):
        text = resources.files("hoaxwatch.data").joinpath(f"verbs_{lang}.txt").read_text("utf-8")
        verbs.update(fold_text(line) for line in text.splitlines() if line.strip())

    hoaxes = load_hoax_records(str(FIXTURES / "hoaxes_es.jsonl"))
    texts = [h.text for h in hoaxes] + [t for h in hoaxes for t in h.alt_texts]
    extracted = 0
    for text in texts:
        try:
            keywords = extract_keywords(text, gw, top_n=5, mode=ExtractionMode.TWITTER)
        except NoCandidatesError:
            continue
        extracted += len(keywords)
        for kw in keywords:
            if kw.is_entity:
                continue
            for token in fold_text(kw.surface).split():
                assert token not in verbs, (text, kw.surface)
    assert extracted > 100  # the sweep actually exercised the property

    rng = random.Random(88008)
    vocab = ["mascarilla", "hipoxia", "coronavirus", "vacuna", "bulo", "agua",
             "sal", "vino", "bacteria", "pandemia", "5g", "covid-19", "oms",
             "charles lieber", "christine lagarde", "dioxido de cloro"]
    for _ in range(200):
        groups = [
            [rng.choice(vocab) for _ in range(rng.randint(1, 4))]
            for _ in range(rng.randint(1, 4))
        ]
        spec = QuerySpec.from_lists(groups)
        assert parse_query(build_query(spec)) == spec


# --- A9 ---------------------------------------------------------------------


def test_a9_sidecar_with_real_checkpoints():
    """Optional integration tier: scoring against real published model
    checkpoints (protocol conformance plus accuracy bands) is not runnable
    here — this environment is offline and ships no model weights. The
    deterministic-provider gate above runs fully without the sidecar; the
    sidecar package carries its own contract tests."""
    pytest.skip("needs downloaded model checkpoints and benchmark corpora; "
                "offline environment runs the deterministic provider only")
