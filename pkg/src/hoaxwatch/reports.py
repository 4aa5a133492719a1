"""Evaluation harness: correlation tables for similarity scores, NLI
classification reports, and keyword-extraction scoring.

All three consume prediction/gold files produced elsewhere — this module never
runs a model. Deliberate conventions: correlations are presented ×100 with two
decimals; a precision or recall whose denominator is zero scores 0 (keeping F1
defined); the cross-language Avg column is the Fisher-z average over whatever
language pairs the input contains.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    DegenerateSeriesError,
    DimensionMismatchError,
    EmptyGoldError,
    LabelMismatchError,
    OutOfRangeError,
)
from .keywords import KeywordMetrics, evaluate_keywords
from .vecmath import fisher_z_average, pearson, spearman

log = logging.getLogger(__name__)

NLI_LABEL_SET = ("CONTRADICTION", "ENTAILMENT", "NEUTRAL")


# --- similarity-score correlation tables ---


@dataclass(frozen=True)
class StsRow:
    pair_id: str
    lang_pair: str
    model_score: float
    gold_score: float

    def __post_init__(self):
        if not 0.0 <= self.gold_score <= 5.0:
            raise OutOfRangeError(
                f"gold score {self.gold_score} outside [0, 5] (pair {self.pair_id})"
            )


@dataclass(frozen=True)
class StsPairResult:
    pearson_x100: float
    spearman_x100: float
    n: int


@dataclass(frozen=True)
class StsReport:
    pairs: Mapping[str, StsPairResult]
    avg: StsPairResult | None
    excluded: tuple[tuple[str, str], ...] = ()


def load_sts_csv(path: str) -> list[StsRow]:
    """CSV columns: pair_id,lang_pair,model_score,gold_score (header required)."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                StsRow(
                    pair_id=rec["pair_id"],
                    lang_pair=rec["lang_pair"],
                    model_score=float(rec["model_score"]),
                    gold_score=float(rec["gold_score"]),
                )
            )
    return rows


def sts_report(rows: Sequence[StsRow]) -> StsReport:
    """Per-language-pair Pearson/Spearman (×100) plus the Fisher-z Avg column.

    A language pair whose scores are too short or constant is reported in
    `excluded` with the reason and left out of the average, with a warning —
    it does not fail the whole report.
    """
    if not rows:
        raise EmptyGoldError("no evaluation rows")
    grouped: dict[str, list[StsRow]] = {}
    for row in rows:
        grouped.setdefault(row.lang_pair, []).append(row)
    pairs: dict[str, StsPairResult] = {}
    excluded = []
    raw_r, raw_rho = [], []
    for lang_pair in sorted(grouped):
        model = [r.model_score for r in grouped[lang_pair]]
        gold = [r.gold_score for r in grouped[lang_pair]]
        try:
            r = pearson(model, gold)
            rho = spearman(model, gold)
        except (DegenerateSeriesError, DimensionMismatchError) as exc:
            log.warning("language pair %s excluded from report: %s", lang_pair, exc)
            excluded.append((lang_pair, str(exc)))
            continue
        pairs[lang_pair] = StsPairResult(
            pearson_x100=100.0 * r, spearman_x100=100.0 * rho, n=len(model)
        )
        raw_r.append(r)
        raw_rho.append(rho)
    avg = None
    if raw_r:
        avg = StsPairResult(
            pearson_x100=100.0 * fisher_z_average(raw_r),
            spearman_x100=100.0 * fisher_z_average(raw_rho),
            n=sum(p.n for p in pairs.values()),
        )
    return StsReport(pairs=pairs, avg=avg, excluded=tuple(excluded))


def sts_report_to_json(report: StsReport) -> str:
    doc = {
        "pairs": {
            name: {"r": res.pearson_x100, "rho": res.spearman_x100, "n": res.n}
            for name, res in report.pairs.items()
        },
        "avg": None,
        "excluded": [list(item) for item in report.excluded],
    }
    if report.avg is not None:
        doc["avg"] = {
            "r": report.avg.pearson_x100,
            "rho": report.avg.spearman_x100,
            "n": report.avg.n,
        }
    return json.dumps(doc, indent=2)


def render_sts_table(
    reports: Mapping[str, StsReport],
    dimensions: Mapping[str, int] | None = None,
    title: str = "Model",
) -> str:
    """Plain-text table: one row per model, r/rho columns per language pair + Avg.

        Model            Dimensions  EN-EN          ...  Avg
                                     r      rho          r      rho
        my-model         2688        85.73  86.59        83.33  83.62
    """
    all_pairs: list[str] = []
    for report in reports.values():
        for name in report.pairs:
            if name not in all_pairs:
                all_pairs.append(name)
    all_pairs.sort()
    name_w = max([len(title)] + [len(n) for n in reports]) + 2
    dim_w = len("Dimensions") + 2
    col_w = 7

    header1 = title.ljust(name_w) + "Dimensions".ljust(dim_w)
    header2 = " " * (name_w + dim_w)
    for pair in all_pairs + ["Avg"]:
        header1 += pair.ljust(2 * col_w)
        header2 += "r".ljust(col_w) + "rho".ljust(col_w)
    lines = [header1.rstrip(), header2.rstrip(), "-" * len(header1.rstrip())]

    def cell(value: float | None) -> str:
        return ("-" if value is None else f"{value:.2f}").ljust(col_w)

    for model_name, report in reports.items():
        dim = "" if dimensions is None else str(dimensions.get(model_name, "-"))
        line = model_name.ljust(name_w) + dim.ljust(dim_w)
        for pair in all_pairs:
            res = report.pairs.get(pair)
            line += cell(res.pearson_x100 if res else None)
            line += cell(res.spearman_x100 if res else None)
        line += cell(report.avg.pearson_x100 if report.avg else None)
        line += cell(report.avg.spearman_x100 if report.avg else None)
        lines.append(line.rstrip())
    return "\n".join(lines) + "\n"


# --- NLI classification reports ---


@dataclass(frozen=True)
class LabelMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class ClassificationReport:
    per_label: Mapping[str, LabelMetrics]
    macro: LabelMetrics
    weighted: LabelMetrics
    accuracy: float
    total: int


def _as_label(value) -> str:
    return getattr(value, "value", value)


def classification_report(
    pred: Sequence, gold: Sequence, label_set: Sequence[str] = NLI_LABEL_SET
) -> ClassificationReport:
    """Per-label precision/recall/F1/support plus macro, weighted, accuracy.

    Zero denominators score 0. Macro averages uniformly over `label_set`;
    weighted averages by gold support. Labels outside the set, or unequal
    lengths, raise LabelMismatchError.
    """
    pred = [_as_label(p) for p in pred]
    gold = [_as_label(g) for g in gold]
    if len(pred) != len(gold):
        raise LabelMismatchError(
            f"{len(pred)} predictions vs {len(gold)} gold labels"
        )
    if not gold:
        raise LabelMismatchError("no samples")
    allowed = set(label_set)
    stray = [x for x in set(pred) | set(gold) if x not in allowed]
    if stray:
        raise LabelMismatchError(f"labels outside label set: {sorted(stray)!r}")

    confusion: dict[tuple[str, str], int] = {}
    for p, g in zip(pred, gold):
        confusion[(g, p)] = confusion.get((g, p), 0) + 1
    total = len(gold)
    correct = sum(confusion.get((lab, lab), 0) for lab in allowed)

    per_label: dict[str, LabelMetrics] = {}
    for lab in label_set:
        tp = confusion.get((lab, lab), 0)
        fp = sum(confusion.get((g, lab), 0) for g in allowed if g != lab)
        fn = sum(confusion.get((lab, p), 0) for p in allowed if p != lab)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        per_label[lab] = LabelMetrics(precision, recall, f1, tp + fn)

    k = len(label_set)
    macro = LabelMetrics(
        precision=sum(m.precision for m in per_label.values()) / k,
        recall=sum(m.recall for m in per_label.values()) / k,
        f1=sum(m.f1 for m in per_label.values()) / k,
        support=total,
    )
    weighted = LabelMetrics(
        precision=sum(m.precision * m.support for m in per_label.values()) / total,
        recall=sum(m.recall * m.support for m in per_label.values()) / total,
        f1=sum(m.f1 * m.support for m in per_label.values()) / total,
        support=total,
    )
    return ClassificationReport(
        per_label=per_label,
        macro=macro,
        weighted=weighted,
        accuracy=correct / total,
        total=total,
    )


def load_labels_jsonl(path: str) -> tuple[list[str], list[str]]:
    """Labels file JSONL {id, gold, pred} -> (pred, gold) lists in file order."""
    pred, gold = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            pred.append(str(doc["pred"]))
            gold.append(str(doc["gold"]))
    return pred, gold


def classification_to_json(report: ClassificationReport) -> str:
    doc = {
        "per_label": {
            lab: {
                "precision": m.precision,
                "recall": m.recall,
                "f1": m.f1,
                "support": m.support,
            }
            for lab, m in report.per_label.items()
        },
        "macro_avg": {
            "precision": report.macro.precision,
            "recall": report.macro.recall,
            "f1": report.macro.f1,
            "support": report.macro.support,
        },
        "weighted_avg": {
            "precision": report.weighted.precision,
            "recall": report.weighted.recall,
            "f1": report.weighted.f1,
            "support": report.weighted.support,
        },
        "accuracy": report.accuracy,
        "total": report.total,
    }
    return json.dumps(doc, indent=2)


def render_classification_table(report: ClassificationReport) -> str:
    """Plain-text layout: label rows, then Macro Avg. / Weighted Avg. / Accuracy.

    The accuracy row places its value in the precision column with dashes in
    recall/F1, alongside the total support.
    """
    name_w = max(
        [len("Weighted Avg.")] + [len(lab) for lab in report.per_label]
    ) + 2
    col_w = 11
    header = (
        "".ljust(name_w)
        + "Precision".ljust(col_w)
        + "Recall".ljust(col_w)
        + "F1-score".ljust(col_w)
        + "Support"
    )
    lines = [header, "-" * len(header)]

    def row(name: str, p, r, f1, support) -> str:
        text = name.ljust(name_w)
        for value in (p, r, f1):
            text += ("-" if value is None else f"{value:.4f}").ljust(col_w)
        return text + str(support)

    for lab in sorted(report.per_label):
        m = report.per_label[lab]
        lines.append(row(lab, m.precision, m.recall, m.f1, m.support))
    lines.append(row("Macro Avg.", report.macro.precision, report.macro.recall,
                     report.macro.f1, report.macro.support))
    lines.append(row("Weighted Avg.", report.weighted.precision,
                     report.weighted.recall, report.weighted.f1,
                     report.weighted.support))
    lines.append(row("Accuracy", report.accuracy, None, None, report.total))
    return "\n".join(lines) + "\n"


# --- keyword-extraction scoring ---


@dataclass(frozen=True)
class KeywordReport:
    per_hoax: Mapping[int | str, KeywordMetrics]
    macro: KeywordMetrics


def load_keyword_file(path: str) -> dict:
    """Keyword file JSONL {hoax_id, keywords:[string]} -> id -> list of terms."""
    table: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            table[doc["hoax_id"]] = list(doc.get("keywords", ()))
    return table


def keyword_report(pred_file: str, gold_file: str) -> KeywordReport:
    """Score predicted keywords against gold, hoax by hoax, plus macro average.

    Every gold hoax is scored; a hoax absent from the predictions counts as an
    empty prediction (0/0/0), so forgetting a hoax hurts the macro rather than
    shrinking the denominator.
    """
    pred = load_keyword_file(pred_file)
    gold = load_keyword_file(gold_file)
    if not gold:
        raise EmptyGoldError(f"gold file {gold_file} has no hoaxes")
    per_hoax: dict = {}
    for hoax_id in gold:
        per_hoax[hoax_id] = evaluate_keywords(pred.get(hoax_id, ()), gold[hoax_id])
    n = len(per_hoax)
    macro = KeywordMetrics(
        precision=sum(m.precision for m in per_hoax.values()) / n,
        recall=sum(m.recall for m in per_hoax.values()) / n,
        f1=sum(m.f1 for m in per_hoax.values()) / n,
    )
    return KeywordReport(per_hoax=per_hoax, macro=macro)


def keyword_report_to_json(report: KeywordReport) -> str:
    doc = {
        "per_hoax": {
            str(hoax_id): {"precision": m.precision, "recall": m.recall, "f1": m.f1}
            for hoax_id, m in report.per_hoax.items()
        },
        "macro": {
            "precision": report.macro.precision,
            "recall": report.macro.recall,
            "f1": report.macro.f1,
        },
    }
    return json.dumps(doc, indent=2)


def render_keyword_table(
    rows: Mapping[str, KeywordMetrics], scenario: str = "General"
) -> str:
    """Plain-text layout: one row per keyword model under a scenario heading.

        Keyword Model       General
                            Precision  Recall     F1-score
        my-extractor        0.6283     0.8267     0.6988
    """
    name_w = max([len("Keyword Model")] + [len(n) for n in rows]) + 2
    col_w = 11
    lines = [
        "Keyword Model".ljust(name_w) + scenario,
        "".ljust(name_w)
        + "Precision".ljust(col_w)
        + "Recall".ljust(col_w)
        + "F1-score",
        "-" * (name_w + 3 * col_w),
    ]
    for name, m in rows.items():
        lines.append(
            name.ljust(name_w)
            + f"{m.precision:.4f}".ljust(col_w)
            + f"{m.recall:.4f}".ljust(col_w)
            + f"{m.f1:.4f}"
        )
    return "\n".join(lines) + "\n"
