"""Command-line operator surface.

All machine-readable output goes to stdout as JSON (one document, or JSONL in
batch modes); diagnostics and errors go to stderr. Exit codes: 0 success (and
SUPPORTS_HOAX for verify), 10 UNVERIFIED, 11 CONTRADICTS_HOAX, 1 runtime
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import reports as rp
from .config import EngineConfig, apply_overrides, load_config
from .errors import HoaxwatchError
from .gateway import ModelGateway
from .hoaxdb import (
    build_index,
    load_hoax_records,
    load_index,
    save_index,
    search,
)
from .keywords import (
    ExtractionMode,
    build_query,
    extract_keywords,
    generalize_query,
    load_synonyms,
    parse_query,
    query_spec_from_keywords,
)
from .osn import (
    OsnClient,
    OsnClientConfig,
    SearchJob,
    export_public,
    load_tweets,
    persist_tweets,
)
from .pca import fit_pca, load_pca
from .tracking import build_dataset, build_report, report_to_json, save_labeled, series_to_csv, write_plot_description
from .verdicts import VerdictLabel, fuse_verdict, verdict_to_json

EXIT_SUPPORTS = 0
EXIT_UNVERIFIED = 10
EXIT_CONTRADICTS = 11

_VERDICT_EXIT = {
    VerdictLabel.SUPPORTS_HOAX: EXIT_SUPPORTS,
    VerdictLabel.UNVERIFIED: EXIT_UNVERIFIED,
    VerdictLabel.CONTRADICTS_HOAX: EXIT_CONTRADICTS,
}


def _diag(message: str) -> None:
    print(message, file=sys.stderr)


def _common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--provider", help='inference endpoint URL, or "stub"')
    parser.add_argument("--index", help="index directory")
    parser.add_argument("--pca", help="projection model JSON file")
    parser.add_argument("--top-k", type=int, dest="top_k")
    parser.add_argument("--min-similarity", type=float, dest="min_similarity")
    parser.add_argument("--entailment-threshold", type=float, dest="entailment_threshold")
    parser.add_argument(
        "--contradiction-threshold", type=float, dest="contradiction_threshold"
    )
    parser.add_argument("--bin-width", type=float, dest="bin_width_days",
                        help="histogram bin width in days")
    parser.add_argument("--since", dest="date_floor",
                        help="date floor, ISO timestamp (UTC)")
    parser.add_argument("--out", help="output path (command-specific)")


def _load_cfg(args) -> EngineConfig:
    cfg = load_config(args.config)
    return apply_overrides(
        cfg,
        provider=getattr(args, "provider", None),
        index_dir=getattr(args, "index", None),
        pca_path=getattr(args, "pca", None),
        top_k=getattr(args, "top_k", None),
        min_similarity=getattr(args, "min_similarity", None),
        entailment_threshold=getattr(args, "entailment_threshold", None),
        contradiction_threshold=getattr(args, "contradiction_threshold", None),
        bin_width_days=getattr(args, "bin_width_days", None),
        date_floor=getattr(args, "date_floor", None),
    )


def _open_index(cfg: EngineConfig):
    if not cfg.index_dir:
        raise HoaxwatchError("no index directory given (use --index or config)")
    try:
        index, pca_model = load_index(cfg.index_dir)
    except FileNotFoundError as exc:
        raise HoaxwatchError(
            f"index not found at {cfg.index_dir!r} — build one with "
            f"`hoaxwatch index <hoaxes.jsonl> --out {cfg.index_dir}`"
        ) from exc
    if pca_model is None:
        if not cfg.pca_path:
            raise HoaxwatchError("index has no bundled projection; pass --pca")
        pca_model = load_pca(cfg.pca_path)
    return index, pca_model


# --- commands ---


def cmd_index(args) -> int:
    cfg = _load_cfg(args)
    gateway = ModelGateway(cfg.provider)
    hoaxes = load_hoax_records(args.hoaxes)
    if not hoaxes:
        _diag(f"no hoaxes in {args.hoaxes!r}")
        return 1
    if cfg.pca_path:
        pca_model = load_pca(cfg.pca_path)
        _diag(f"loaded projection: {pca_model.source_dim} -> {pca_model.n_components}")
    else:
        corpus_path = args.fit_pca or args.hoaxes
        if args.fit_pca:
            with open(corpus_path, encoding="utf-8") as fh:
                texts = [line.strip() for line in fh if line.strip()]
        else:
            texts = [rec.text for rec in hoaxes]
        vectors = gateway.embed_concat(texts)
        k = args.pca_components or min(len(vectors[0]), len(vectors) - 1)
        pca_model = fit_pca(vectors, k, ensemble_model_ids=cfg.provider.ensemble_model_ids)
        _diag(f"fitted projection on {len(texts)} texts: "
              f"{pca_model.source_dim} -> {pca_model.n_components}")
    index = build_index(hoaxes, gateway, pca_model)
    out_dir = args.out or cfg.index_dir
    if not out_dir:
        _diag("no output directory (use --out)")
        return 1
    save_index(index, out_dir, pca_model)
    print(json.dumps({
        "count": len(index),
        "out": out_dir,
        "reduced_dim": index.reduced_dim,
    }))
    return 0


def _verify_one(claim: str, index, pca_model, gateway, cfg: EngineConfig):
    hits = search(index, claim, gateway, pca_model,
                  top_k=cfg.top_k, min_similarity=cfg.min_similarity)
    pairs = [(index.record(h.hoax_id).text, claim) for h in hits]
    scores = gateway.nli_batch(pairs) if pairs else []
    sims = {h.hoax_id: h.similarity for h in hits}
    verdict = fuse_verdict(
        [(h.hoax_id, s) for h, s in zip(hits, scores)],
        entailment_threshold=cfg.entailment_threshold,
        contradiction_threshold=cfg.contradiction_threshold,
    )
    doc = json.loads(verdict_to_json(verdict, claim))
    doc["similarities"] = {str(k): v for k, v in sims.items()}
    return verdict, doc


def cmd_verify(args) -> int:
    cfg = _load_cfg(args)
    gateway = ModelGateway(cfg.provider)
    index, pca_model = _open_index(cfg)

    if args.batch:
        with open(args.batch, encoding="utf-8") as fh:
            claims = [line.strip() for line in fh if line.strip()]
        for claim in claims:
            _, doc = _verify_one(claim, index, pca_model, gateway, cfg)
            print(json.dumps(doc, ensure_ascii=False))
        return 0

    claim = args.claim
    if claim is None or args.stdin:
        claim = sys.stdin.read().strip()
    if not claim:
        _diag("no claim text (positional argument, --stdin, or --batch)")
        return 1
    verdict, doc = _verify_one(claim, index, pca_model, gateway, cfg)
    print(json.dumps(doc, ensure_ascii=False))
    return _VERDICT_EXIT[verdict.label]


def _retrieve_corpus(args, cfg: EngineConfig):
    osn_cfg = cfg.osn
    if args.osn_endpoint:
        base = osn_cfg or OsnClientConfig(endpoint=args.osn_endpoint)
        osn_cfg = OsnClientConfig(
            endpoint=args.osn_endpoint,
            rate_limit_per_window=base.rate_limit_per_window,
            window_seconds=base.window_seconds,
            hash_salt=base.hash_salt,
            page_size=base.page_size,
        )
    if osn_cfg is None:
        raise HoaxwatchError("--search needs --osn-endpoint or an osn config block")
    jobs = []
    if args.query_file:
        with open(args.query_file, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                jobs.append(SearchJob(hoax_id=doc["hoax_id"], query=doc["query"],
                                      since=cfg.date_floor))
    for q in args.query or ():
        jobs.append(SearchJob(hoax_id="*", query=q, since=cfg.date_floor))
    if not jobs:
        raise HoaxwatchError("--search needs --query or --query-file")
    client = OsnClient(osn_cfg)
    records, seen = [], set()
    for job in jobs:
        for page in client.run_search(job):
            for rec in page:
                if rec.id not in seen:
                    seen.add(rec.id)
                    records.append(rec)
    _diag(f"retrieved {len(records)} unique tweet(s) from {len(jobs)} quer(ies)")
    return records


def cmd_track(args) -> int:
    cfg = _load_cfg(args)
    gateway = ModelGateway(cfg.provider)
    index, pca_model = _open_index(cfg)
    if args.search:
        corpus = _retrieve_corpus(args, cfg)
        if args.corpus_out:
            persist_tweets(corpus, args.corpus_out)
            _diag(f"wrote corpus to {args.corpus_out}")
    elif args.corpus:
        corpus = load_tweets(args.corpus)
    else:
        _diag("need --corpus FILE or --search")
        return 1

    hoaxes = index.records()
    labeled = build_dataset(
        hoaxes, corpus, index, gateway, pca_model,
        top_k=cfg.top_k, min_similarity=cfg.min_similarity,
        workers=args.workers,
    )
    if args.hoax_id is not None:
        wanted = {str(args.hoax_id)}
        labeled_view = [lt for lt in labeled if str(lt.hoax_id) in wanted]
    else:
        labeled_view = labeled
    if args.labeled_out:
        save_labeled(labeled, args.labeled_out)
        _diag(f"wrote {len(labeled)} labeled row(s) to {args.labeled_out}")
    if args.export:
        n = export_public(labeled, args.export)
        _diag(f"wrote privacy-safe export ({n} rows) to {args.export}")

    counter_labeled, counter_corpus = [], []
    if args.counter_corpus:
        counter_corpus = load_tweets(args.counter_corpus)
        counter_labeled = build_dataset(
            hoaxes, counter_corpus, index, gateway, pca_model,
            top_k=cfg.top_k, min_similarity=cfg.min_similarity,
            workers=args.workers,
        )
        if args.hoax_id is not None:
            counter_labeled = [
                lt for lt in counter_labeled if str(lt.hoax_id) == str(args.hoax_id)
            ]

    report = build_report(
        labeled_view, corpus,
        counter_labeled=counter_labeled, counter_tweets=counter_corpus,
        bin_width=cfg.bin_width, origin=cfg.date_floor,
        corpus_size=len(corpus),
    )
    text = report_to_json(report)
    print(text)
    report_out = args.report_out or args.out
    if report_out:
        with open(report_out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _diag(f"wrote report to {report_out}")
    if args.plot_out:
        write_plot_description(report, args.plot_out)
        _diag(f"wrote plot description to {args.plot_out}")
    if args.series_csv:
        import os
        os.makedirs(args.series_csv, exist_ok=True)
        series_to_csv(report.aggregate, os.path.join(args.series_csv, "aggregate.csv"))
        series_to_csv(report.support, os.path.join(args.series_csv, "support.csv"))
        if report.counter is not None:
            series_to_csv(report.counter, os.path.join(args.series_csv, "counter.csv"))
        _diag(f"wrote per-series CSVs to {args.series_csv}")
    return 0


def cmd_keywords(args) -> int:
    cfg = _load_cfg(args)
    gateway = ModelGateway(cfg.provider)
    mode = ExtractionMode(args.mode)
    keywords = extract_keywords(args.text, gateway, top_n=args.top_n, mode=mode)
    doc = {
        "keywords": [
            {"surface": k.surface, "score": k.score,
             "is_entity": k.is_entity, "pos": k.pos}
            for k in keywords
        ]
    }
    print(json.dumps(doc, ensure_ascii=False))
    return 0


def cmd_query(args) -> int:
    cfg = _load_cfg(args)
    if args.parse:
        spec = parse_query(args.parse)
        print(json.dumps({
            "query": build_query(spec),
            "groups": [list(g) for g in spec.groups],
        }, ensure_ascii=False))
        return 0
    if args.from_text is None:
        _diag("need --from-text TEXT or --parse QUERY")
        return 1
    gateway = ModelGateway(cfg.provider)
    mode = ExtractionMode(args.mode)
    keywords = extract_keywords(args.from_text, gateway, top_n=args.top_n, mode=mode)
    synonyms = load_synonyms(args.synonyms) if args.synonyms else None
    spec = query_spec_from_keywords(keywords, synonyms)
    if args.generalize:
        for _ in range(args.generalize):
            spec = generalize_query(spec, keywords)
    print(json.dumps({
        "query": build_query(spec),
        "groups": [list(g) for g in spec.groups],
    }, ensure_ascii=False))
    return 0


def cmd_eval_sts(args) -> int:
    rows = rp.load_sts_csv(args.scores)
    report = rp.sts_report(rows)
    if args.table:
        name = args.model_name or "model"
        print(rp.render_sts_table({name: report}))
    else:
        print(rp.sts_report_to_json(report))
    return 0


def cmd_eval_nli(args) -> int:
    pred, gold = rp.load_labels_jsonl(args.labels)
    report = rp.classification_report(pred, gold)
    if args.table:
        print(rp.render_classification_table(report))
    else:
        print(rp.classification_to_json(report))
    return 0


def cmd_eval_keywords(args) -> int:
    report = rp.keyword_report(args.pred, args.gold)
    if args.table:
        name = args.model_name or "keyword-extractor"
        print(rp.render_keyword_table({name: report.macro}, scenario=args.scenario))
    else:
        print(rp.keyword_report_to_json(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hoaxwatch",
        description="Hoax verification and tracking over a fact-checked claim index.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build the hoax index (and projection)")
    p.add_argument("hoaxes", help="JSONL of hoax records")
    p.add_argument("--fit-pca", help="text corpus (one per line) to fit the projection")
    p.add_argument("--pca-components", type=int, help="projection size")
    _common_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("verify", help="verify a claim against the index")
    p.add_argument("claim", nargs="?", help="claim text")
    p.add_argument("--stdin", action="store_true", help="read the claim from stdin")
    p.add_argument("--batch", help="file with one claim per line -> JSONL out")
    _common_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("track", help="label a tweet corpus and report time series")
    p.add_argument("--corpus", help="tweet corpus JSONL")
    p.add_argument("--search", action="store_true", help="retrieve via the search API")
    p.add_argument("--osn-endpoint", help='search endpoint URL or "mock:<fixture>"')
    p.add_argument("--query", action="append", help="search query (repeatable)")
    p.add_argument("--query-file", help="JSONL {hoax_id, query}")
    p.add_argument("--corpus-out", help="persist retrieved tweets here")
    p.add_argument("--hoax-id", help="restrict the report to one hoax")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--counter-corpus", help="fact-checker tweet corpus JSONL")
    p.add_argument("--labeled-out", help="write the labeled dataset JSONL here")
    p.add_argument("--export", help="write the privacy-safe public JSONL here")
    p.add_argument("--report-out", help="write the report JSON here")
    p.add_argument("--plot-out", help="write a plot description file here")
    p.add_argument("--series-csv", help="directory for per-series CSV files")
    _common_flags(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("keywords", help="extract keywords from a text")
    p.add_argument("text")
    p.add_argument("--mode", choices=["general", "twitter"], default="general")
    p.add_argument("--top-n", type=int, default=10)
    _common_flags(p)
    p.set_defaults(func=cmd_keywords)

    p = sub.add_parser("query", help="build, parse, or generalize boolean queries")
    p.add_argument("--from-text", help="build a query from this text's keywords")
    p.add_argument("--parse", help="validate and canonicalize a query string")
    p.add_argument("--generalize", type=int, default=0,
                   help="drop the N weakest groups after building")
    p.add_argument("--synonyms", help="synonym JSONL file")
    p.add_argument("--mode", choices=["general", "twitter"], default="twitter")
    p.add_argument("--top-n", type=int, default=10)
    _common_flags(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval-sts", help="correlation report for similarity scores")
    p.add_argument("scores", help="CSV: pair_id,lang_pair,model_score,gold_score")
    p.add_argument("--table", action="store_true", help="plain-text table output")
    p.add_argument("--model-name")
    _common_flags(p)
    p.set_defaults(func=cmd_eval_sts)

    p = sub.add_parser("eval-nli", help="classification report for NLI labels")
    p.add_argument("labels", help="JSONL: {id, gold, pred}")
    p.add_argument("--table", action="store_true")
    _common_flags(p)
    p.set_defaults(func=cmd_eval_nli)

    p = sub.add_parser("eval-keywords", help="score keyword predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--table", action="store_true")
    p.add_argument("--model-name")
    p.add_argument("--scenario", default="General")
    _common_flags(p)
    p.set_defaults(func=cmd_eval_keywords)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except HoaxwatchError as exc:
        _diag(f"error: {exc}")
        return 1
    except (OSError, ValueError) as exc:
        _diag(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
