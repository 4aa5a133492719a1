"""End-to-end command-line tests (stub provider, mock search endpoint)."""

import io
import json

import pytest

from hoaxwatch.cli import main

HOAXES = [
    {"id": 31, "text": "La mascarilla causa hipoxia",
     "alt_texts": ["Masks cause hypoxia"], "fact_checkers": ["Maldita.es"]},
    {"id": 37, "text": "El vino previene o cura el coronavirus",
     "fact_checkers": ["Maldita.es"]},
    {"id": 50, "text": "Christine Lagarde dijo que los ancianos viven demasiado",
     "fact_checkers": ["Chequeado"]},
    {"id": 51, "text": "La COVID-19 es una bacteria",
     "fact_checkers": ["Chequeado"]},
    {"id": 15, "text": "La definición de pandemia cambió en 2009 por la OMS",
     "fact_checkers": ["Newtral.es"]},
]


def _tweet_doc(tid, text, day):
    return {"id": tid, "text": text, "created_at": f"2020-03-{day:02d}T12:00:00Z",
            "author_hash": f"h{tid}", "lang": "es"}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    """Hoax file + built index + corpora shared by the command tests."""
    root = tmp_path_factory.mktemp("cli")
    hoaxes_path = root / "hoaxes.jsonl"
    hoaxes_path.write_text(
        "".join(json.dumps(h, ensure_ascii=False) + "\n" for h in HOAXES)
    )
    index_dir = root / "index"
    rc = main(["index", str(hoaxes_path), "--out", str(index_dir)])
    assert rc == 0

    corpus_path = root / "corpus.jsonl"
    tweets = [
        _tweet_doc("t1", "La mascarilla causa hipoxia", 2),
        _tweet_doc("t2", "La mascarilla causa hipoxia", 9),
        _tweet_doc("t3", "La mascarilla causa hipoxia", 9),
        _tweet_doc("t4", "El vino previene o cura el coronavirus", 2),
        _tweet_doc("t5", "El vino previene o cura el coronavirus", 16),
        _tweet_doc("t6", "zzkx qqwv jjrt uupl ggha", 4),
    ]
    corpus_path.write_text("".join(json.dumps(t) + "\n" for t in tweets))

    fixture_path = root / "osn_fixture.json"
    fixture_path.write_text(json.dumps([{
        "request_matcher": {"query": "mascarilla AND hipoxia"},
        "pages": [
            {"data": [
                {"id": "t1", "text": "La mascarilla causa hipoxia",
                 "created_at": "2020-03-02T12:00:00Z", "author_id": "u1", "lang": "es"},
                {"id": "t2", "text": "La mascarilla causa hipoxia",
                 "created_at": "2020-03-09T12:00:00Z", "author_id": "u2", "lang": "es"},
            ]},
            {"data": [
                {"id": "t3", "text": "La mascarilla causa hipoxia",
                 "created_at": "2020-03-09T12:00:00Z", "author_id": "u3", "lang": "es"},
            ]},
        ],
    }]))
    return {"root": root, "hoaxes": hoaxes_path, "index": index_dir,
            "corpus": corpus_path, "fixture": fixture_path}


def _run(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, out


# --- index ---


def test_index_reports_count_and_dim(workdir, capsys, tmp_path):
    out_dir = tmp_path / "idx"
    rc, out = _run(capsys, ["index", str(workdir["hoaxes"]), "--out", str(out_dir)])
    assert rc == 0
    doc = json.loads(out)
    assert doc["count"] == 5
    # default projection: min(concat dim, n_samples - 1) components
    assert doc["reduced_dim"] == 4
    assert doc["out"] == str(out_dir)
    assert (out_dir / "manifest.json").exists()
    assert (out_dir / "pca.json").exists()


def test_index_respects_pca_components(workdir, capsys, tmp_path):
    out_dir = tmp_path / "idx3"
    rc, out = _run(capsys, ["index", str(workdir["hoaxes"]), "--out", str(out_dir),
                            "--pca-components", "3"])
    assert rc == 0
    assert json.loads(out)["reduced_dim"] == 3


def test_index_empty_input(capsys, tmp_path):
    empty = tmp_path / "none.jsonl"
    empty.write_text("")
    rc = main(["index", str(empty), "--out", str(tmp_path / "idx")])
    captured = capsys.readouterr()
    assert rc == 1
    assert "no hoaxes in" in captured.err


# --- verify ---


def test_verify_supports_hoax(workdir, capsys):
    rc, out = _run(capsys, ["verify", "La mascarilla causa hipoxia",
                            "--index", str(workdir["index"])])
    assert rc == 0
    doc = json.loads(out)
    assert doc["label"] == "SUPPORTS_HOAX"
    assert doc["best_hoax_id"] == 31
    assert doc["entailment"] == pytest.approx(0.92)
    assert doc["similarities"]["31"] == pytest.approx(1.0, abs=1e-6)
    assert "claim" not in doc  # claim text is hashed, not echoed
    assert len(doc["claim_sha256"]) == 64


def test_verify_unverified_exit_code(workdir, capsys):
    rc, out = _run(capsys, ["verify", "el tren llega a las nueve en punto",
                            "--index", str(workdir["index"])])
    assert rc == 10
    assert json.loads(out)["label"] == "UNVERIFIED"


def test_verify_contradicts_exit_code(workdir, capsys):
    # entailment tops out at 0.92 and misses the raised 0.95 bar, so fusion
    # falls through to the contradiction rule; the unrelated hoaxes carry the
    # most contradiction mass (0.10 each), and the tie goes to the lowest id
    rc, out = _run(capsys, ["verify", "mascarilla hipoxia",
                            "--index", str(workdir["index"]),
                            "--min-similarity", "-1.0",
                            "--entailment-threshold", "0.95",
                            "--contradiction-threshold", "0.05"])
    assert rc == 11
    doc = json.loads(out)
    assert doc["label"] == "CONTRADICTS_HOAX"
    assert doc["best_hoax_id"] == 15
    assert doc["entailment"] == pytest.approx(0.92)  # best entailment still reported


def test_verify_stdin(workdir, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO("La mascarilla causa hipoxia\n"))
    rc, out = _run(capsys, ["verify", "--stdin", "--index", str(workdir["index"])])
    assert rc == 0
    assert json.loads(out)["label"] == "SUPPORTS_HOAX"


def test_verify_batch_preserves_order(workdir, capsys, tmp_path):
    import hashlib
    claims = ["La mascarilla causa hipoxia",
              "el tren llega a las nueve en punto",
              "El vino previene o cura el coronavirus"]
    batch = tmp_path / "claims.txt"
    batch.write_text("".join(c + "\n" for c in claims))
    rc, out = _run(capsys, ["verify", "--batch", str(batch),
                            "--index", str(workdir["index"])])
    assert rc == 0  # batch mode always exits 0; per-claim labels live in the rows
    rows = [json.loads(l) for l in out.strip().splitlines()]
    assert len(rows) == 3
    hashes = [hashlib.sha256(c.encode()).hexdigest() for c in claims]
    assert [r["claim_sha256"] for r in rows] == hashes
    assert [r["label"] for r in rows] == ["SUPPORTS_HOAX", "UNVERIFIED",
                                          "SUPPORTS_HOAX"]


def test_verify_missing_index_is_actionable(capsys, tmp_path):
    rc = main(["verify", "algo", "--index", str(tmp_path / "nowhere")])
    captured = capsys.readouterr()
    assert rc == 1
    assert "build one with" in captured.err


def test_verify_no_claim(workdir, capsys, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(""))
    rc = main(["verify", "--index", str(workdir["index"])])
    assert rc == 1
    assert "no claim text" in capsys.readouterr().err


# --- track ---


def test_track_corpus_report(workdir, capsys, tmp_path):
    labeled_out = tmp_path / "labeled.jsonl"
    export_out = tmp_path / "public.jsonl"
    plot_out = tmp_path / "plot.json"
    csv_dir = tmp_path / "series"
    rc, out = _run(capsys, [
        "track", "--corpus", str(workdir["corpus"]),
        "--index", str(workdir["index"]),
        "--min-similarity", "0.9",
        "--labeled-out", str(labeled_out),
        "--export", str(export_out),
        "--plot-out", str(plot_out),
        "--series-csv", str(csv_dir),
    ])
    assert rc == 0
    doc = json.loads(out)
    assert doc["totals_by_hoax"] == {"31": {"ENTAILMENT": 3}, "37": {"ENTAILMENT": 2}}
    assert doc["aggregate"]["total"] == 5
    assert doc["support"]["total"] == 5
    assert doc["dropped_count"] == 1  # the gibberish tweet
    assert sum(doc["aggregate"]["counts"].values()) == doc["aggregate"]["total"]

    rows = [json.loads(l) for l in labeled_out.read_text().splitlines()]
    assert [r["tweet_id"] for r in rows] == ["t1", "t2", "t3", "t4", "t5"]
    assert all(r["label"] == "ENTAILMENT" for r in rows)

    public = [json.loads(l) for l in export_out.read_text().splitlines()]
    assert len(public) == 5
    for row in public:
        assert set(row) == {"tweet_id", "hoax_id", "label", "similarity"}

    assert json.loads(plot_out.read_text())["kind"] == "hoax-tracking-timeseries"
    assert (csv_dir / "aggregate.csv").exists()
    assert (csv_dir / "support.csv").exists()


def test_track_hoax_id_filter(workdir, capsys):
    rc, out = _run(capsys, [
        "track", "--corpus", str(workdir["corpus"]),
        "--index", str(workdir["index"]),
        "--min-similarity", "0.9",
        "--hoax-id", "31",
    ])
    assert rc == 0
    doc = json.loads(out)
    assert set(doc["totals_by_hoax"]) == {"31"}
    assert doc["aggregate"]["total"] == 3


def test_track_counter_corpus_comparison(workdir, capsys, tmp_path):
    counter_path = tmp_path / "counter.jsonl"
    counter = [
        _tweet_doc("f1", "La mascarilla causa hipoxia", 16),
        _tweet_doc("f2", "La mascarilla causa hipoxia", 23),
    ]
    counter_path.write_text("".join(json.dumps(t) + "\n" for t in counter))
    rc, out = _run(capsys, [
        "track", "--corpus", str(workdir["corpus"]),
        "--index", str(workdir["index"]),
        "--min-similarity", "0.9",
        "--counter-corpus", str(counter_path),
    ])
    assert rc == 0
    doc = json.loads(out)
    assert doc["counter"]["total"] == 2
    assert doc["comparison"]["support_total"] == 5
    assert doc["comparison"]["counter_total"] == 2
    assert doc["comparison"]["ratio"] == pytest.approx(0.4)


def test_track_search_equals_corpus_run(workdir, capsys, tmp_path):
    saved = tmp_path / "retrieved.jsonl"
    rc, out_search = _run(capsys, [
        "track", "--search",
        "--osn-endpoint", "mock:" + str(workdir["fixture"]),
        "--query", "mascarilla AND hipoxia",
        "--corpus-out", str(saved),
        "--index", str(workdir["index"]),
        "--min-similarity", "0.9",
    ])
    assert rc == 0
    assert saved.exists()
    rc, out_corpus = _run(capsys, [
        "track", "--corpus", str(saved),
        "--index", str(workdir["index"]),
        "--min-similarity", "0.9",
    ])
    assert rc == 0
    assert json.loads(out_search) == json.loads(out_corpus)


def test_track_needs_corpus_or_search(workdir, capsys):
    rc = main(["track", "--index", str(workdir["index"])])
    assert rc == 1
    assert "need --corpus FILE or --search" in capsys.readouterr().err


# --- keywords and queries ---


def test_keywords_command(capsys):
    rc, out = _run(capsys, ["keywords", "La mascarilla causa hipoxia"])
    assert rc == 0
    doc = json.loads(out)
    surfaces = [k["surface"].lower() for k in doc["keywords"]]
    assert "mascarilla" in surfaces
    assert all({"surface", "score", "is_entity", "pos"} <= set(k)
               for k in doc["keywords"])


def test_query_from_text_and_generalize(capsys):
    rc, out = _run(capsys, ["query", "--from-text",
                            "La mascarilla causa hipoxia", "--top-n", "3"])
    assert rc == 0
    doc = json.loads(out)
    assert doc["groups"]
    assert " AND ".join(["x"] * len(doc["groups"])).count("AND") == \
        doc["query"].count("AND")

    rc, out2 = _run(capsys, ["query", "--from-text",
                             "La mascarilla causa hipoxia", "--top-n", "3",
                             "--generalize", "1"])
    assert rc == 0
    assert len(json.loads(out2)["groups"]) == len(doc["groups"]) - 1


def test_query_parse_round_trip(capsys):
    rc, out = _run(capsys, ["query", "--parse",
                            'mascarilla AND (hipoxia OR "falta de oxigeno")'])
    assert rc == 0
    doc = json.loads(out)
    assert doc["query"] == 'mascarilla AND (hipoxia OR "falta de oxigeno")'
    assert doc["groups"] == [["mascarilla"], ["hipoxia", "falta de oxigeno"]]


def test_query_with_synonyms(capsys, tmp_path):
    syn = tmp_path / "syn.jsonl"
    syn.write_text('{"term": "hipoxia", "synonyms": ["falta de oxigeno"]}\n')
    rc, out = _run(capsys, ["query", "--from-text", "La mascarilla causa hipoxia",
                            "--top-n", "5", "--synonyms", str(syn)])
    assert rc == 0
    assert '(hipoxia OR "falta de oxigeno")' in json.loads(out)["query"]


def test_query_parse_error_exit(capsys):
    rc = main(["query", "--parse", "a OR b"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


# --- eval commands ---


@pytest.fixture()
def sts_csv(tmp_path):
    rows = ["pair_id,lang_pair,model_score,gold_score"]
    series = {"EN-EN": ([1, 2, 3, 4], [1, 3, 2, 4]),
              "EN-ES": ([1, 2, 3, 4], [2, 1, 4, 3]),
              "ES-ES": ([1, 2, 3, 4, 5], [1, 2, 5, 3, 4])}
    for lang, (model, gold) in series.items():
        for i, (m, g) in enumerate(zip(model, gold)):
            rows.append(f"{lang}-{i},{lang},{m},{g}")
    path = tmp_path / "sts.csv"
    path.write_text("".join(r + "\n" for r in rows))
    return str(path)


def test_eval_sts_json_and_table(sts_csv, capsys):
    rc, out = _run(capsys, ["eval-sts", sts_csv])
    assert rc == 0
    doc = json.loads(out)
    assert doc["pairs"]["EN-EN"]["r"] == pytest.approx(80.0)
    assert doc["avg"]["rho"] == pytest.approx(70.95878967885148)

    rc, table = _run(capsys, ["eval-sts", sts_csv, "--table",
                              "--model-name", "twin-ensemble"])
    assert rc == 0
    assert table.splitlines()[0].startswith("Model")
    assert "twin-ensemble" in table
    assert "80.00" in table and "70.96" in table


def test_eval_nli_json_and_table(capsys, tmp_path):
    labels = tmp_path / "labels.jsonl"
    rows = [("s1", "ENTAILMENT", "ENTAILMENT"),
            ("s2", "ENTAILMENT", "CONTRADICTION"),
            ("s3", "CONTRADICTION", "CONTRADICTION"),
            ("s4", "NEUTRAL", "NEUTRAL")]
    labels.write_text("".join(
        json.dumps({"id": i, "gold": g, "pred": p}) + "\n" for i, g, p in rows
    ))
    rc, out = _run(capsys, ["eval-nli", str(labels)])
    assert rc == 0
    doc = json.loads(out)
    assert doc["accuracy"] == 0.75
    assert doc["per_label"]["ENTAILMENT"]["support"] == 2

    rc, table = _run(capsys, ["eval-nli", str(labels), "--table"])
    assert rc == 0
    assert "Macro Avg." in table and "Weighted Avg." in table
    assert table.strip().splitlines()[-1].split()[0] == "Accuracy"


def test_eval_keywords_json_and_table(capsys, tmp_path):
    gold = tmp_path / "gold.jsonl"
    pred = tmp_path / "pred.jsonl"
    gold.write_text(json.dumps({"hoax_id": 1, "keywords": ["a", "b"]}) + "\n"
                    + json.dumps({"hoax_id": 2, "keywords": ["c", "d"]}) + "\n")
    pred.write_text(json.dumps({"hoax_id": 1, "keywords": ["a", "b"]}) + "\n"
                    + json.dumps({"hoax_id": 2, "keywords": ["c", "x"]}) + "\n")
    rc, out = _run(capsys, ["eval-keywords", "--pred", str(pred), "--gold", str(gold)])
    assert rc == 0
    doc = json.loads(out)
    assert doc["per_hoax"]["1"]["f1"] == 1.0
    assert doc["macro"]["f1"] == 0.75

    rc, table = _run(capsys, ["eval-keywords", "--pred", str(pred),
                              "--gold", str(gold), "--table",
                              "--scenario", "Twitter"])
    assert rc == 0
    assert "Twitter" in table.splitlines()[0]
    assert "0.7500" in table


def test_runtime_error_exit_code(capsys, tmp_path):
    rc = main(["eval-sts", str(tmp_path / "missing.csv")])
    assert rc == 1
    assert "error" in capsys.readouterr().err
