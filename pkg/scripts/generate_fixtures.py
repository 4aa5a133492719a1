#!/usr/bin/env python3
"""Regenerate the deterministic fixtures under tests/fixtures/.

Everything here is derived from a hand-authored plan: a catalogue of debunked
claims, a small retrieval scenario with known per-tweet assignments and known
per-week counts, evaluation inputs with hand-checkable scores, and a larger
synthetic corpus for equivalence testing. The expectation numbers are written
out from the plan tables (simple counting), never copied from engine output;
the script then runs the engine over the generated inputs and asserts that it
agrees with the plan, so a drifting fixture fails loudly at generation time
instead of silently baking in wrong answers.

Run from the repository root:

    python3 scripts/generate_fixtures.py
"""

from __future__ import annotations

import json
import random
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from hoaxwatch.gateway import ModelGateway, ProviderConfig  # noqa: E402
from hoaxwatch.hoaxdb import build_index, load_hoax_records, search_vector  # noqa: E402
from hoaxwatch.osn import (  # noqa: E402
    OsnClient,
    OsnClientConfig,
    SearchJob,
    TweetRecord,
    hash_author,
    parse_utc,
    persist_tweets,
)
from hoaxwatch.pca import fit_pca, transform  # noqa: E402
from hoaxwatch.tracking import build_dataset  # noqa: E402

FIXTURES = ROOT / "tests" / "fixtures"

ORIGIN = datetime(2020, 1, 1, tzinfo=timezone.utc)
BIN_WIDTH = timedelta(days=7)
HASH_SALT = "hoaxwatch"

# --------------------------------------------------------------------------
# Catalogue of debunked claims: (id, claim_es, claim_en, "checker, checker").
# Source texts are kept verbatim, including their original typos, so the
# corpus behaves like real collected data rather than sanitized prose.
# --------------------------------------------------------------------------

_CATALOGUE = [
    (1, "La PCR no distingue entre coronavirus y gripe",
     "PCR tests do not distinguish between coronavirus and the flu",
     "Newtral.es"),
    (2, "Las vacunas de ARN-m contra el coronavirus nos transforman en seres transgénicos",
     "mRNA vaccines against coronavirus transform us into transgenic beings",
     "Animal Político, Maldita.es, Newtral.es"),
    (3, "La vacuna contra la COVID-19 se crea con células de fetos abortados",
     "COVID-19 vaccines are made of cells from aborted fetuses",
     "Agencia Ocote, Agência Lupa, Chequeado, ColombiaCheck, Maldita.es, Newtral.es"),
    (4, "Merck asocia las vacunas contra la COVID-19 con un genocidio",
     "Merck associates COVID-19 vaccines with a genocide",
     "Ecuador Chequea, Newtral.es"),
    (5, "Una imagen relaciona la prueba PCR con la destrucción de la glándula pineal en el Antiguo Egipto",
     "An image links PCR tests to the destruction of the pineal gland",
     "Maldita.es"),
    (6, "La vacuna contra la COVID-19 produce parálisis facial",
     "COVID-19 vaccines produce facial paralysis",
     "Chequeado, Newtral.es"),
    (7, "La primera ministra de Australia finge ponerse la vacuna contra la COVID-19",
     "Australia first minister pretends to get the COVID-19 vaccine",
     "Agência Lupa, La Silla Vacía"),
    (8, "La vacuna contra la COVID-19 produce convulsiones",
     "COVID-19 vaccines produce seizures",
     "Maldita.es, Newtral.es"),
    (9, "Mueren 53 personas en Gibraltar tras ponerse la vacuna contra la COVID-19",
     "53 people dead after being vaccinated against COVID-19 in Gibraltar",
     "Maldita.es, Newtral.es"),
    (10, "Detienen en un Lidl de Gijón a 11 personas con COVID-19",
     "11 people with COVID-19 arrested in Lidl supermarket in Gijón",
     "Maldita.es, Newtral.es"),
    (11, "Ya no existen las enfermedades respiratorias que no son COVID-19",
     "Respiratory diseases that are not COVID-19 do not exist anymore",
     "Newtral.es"),
    (12, "La PCR da positivo por nuestros genes endógenos, no por coronavirus",
     "PCR tests positive due to our endogenous genes, not due to coronavirus",
     "Newtral.es"),
    (13, "La ciudad de Rosario (Argentina) para la vacunación por los efectos adversos de la vacuna",
     "The city of Rosario (Argentina) stops vaccination because of the adverse effects of the vaccine",
     "Chequeado, Maldita.es"),
    (14, "La OMS dice que llevar a los niños al colegio sirve como consentimiento para su vacunación",
     "The WHO says that taking our children to school gives consent for their vaccination",
     "Maldita.es"),
    (15, "La definición de pandemia cambió en 2009 por la OMS",
     "The definition of pandemic was changed in 2009 by the WHO",
     "Newtral.es"),
    (16, "Muere una enfermera de Tennessee (Estados Unidos) tras vacunarse contra la COVID-19",
     "A nurse from Tennessee (United States) died after being vaccinated against COVID-19",
     "La Silla Vacía, Maldita.es, Newtral.es"),
    (17, "Solo el 6% de las muertes por coronavirus en Estados Unidos fueron realmente por esta causa",
     "Only 6% of coronavirus deaths in United States were actually due to this cause",
     "AFP, Agência Lupa, Animal Político, Chequeado, La Silla Vacía"),
    (18, "La PCR da positivo por los exosomas, no por coronavirus",
     "PCR tests positive due to exosomes, not due to coronavirus",
     "Newtral.es"),
    (19, "La mascarilla produce enfermedades neurodegenerativas",
     "Masks produce neurodegenerative diseases",
     "Maldita.es, Newtral.es"),
    (20, "En Países Bajos existe desde 2015 una patente de test de COVID-19",
     "A patent of COVID-19 test exists in the Netherlands since 2015",
     "Maldita.es, Newtral.es"),
    (21, "La vacuna contra la COVID-19 causa esterilidad",
     "Pfizer vaccines cause sterility",
     "Animal Político, Chequeado, ColombiaCheck, La Silla Vacía, Maldita.es, Newtral.es"),
    (22, "Un estudio de 2008 financiado por la Comisión Europea ya incluía la COVID-19",
     "A study funded by the European Commission in 2008 already included COVID-19",
     "Newtral.es"),
    (23, "Varios vacunados con la vacuna UQ-CSL contra la COVID-19 contraen el VIH",
     "Several COVID-19 vaccinated people with UQ-CSL contracted HIV",
     "Newtral.es"),
    (24, "La vacuna contra la COVID-19 es aún experimental porque está en fase 4",
     "Vaccines against COVID-19 are still experimental because they are in phase 4",
     "Animal Político, Maldita.es"),
    (25, "El Banco Mundial tenía planes para la COVID-19 desde 2017",
     "The World Bank had plans for COVID-19 since 2017",
     "Animal Político, Aos Fatos, Mala Espina Check"),
    (26, "La vacuna contra la COVID-19 destruye nuestro sistema inmunológico",
     "Vaccines against COVID-19 destroy our immune system",
     "Maldita.es, Newtral.es"),
    (27, "Pirbright Institute patentó la COVID-19 en 2018",
     "Pirbright Institute patented COVID-19 in 2018",
     "Maldita.es"),
    (28, "Las gargaras con agua y sal previenen o curan el coronavirus",
     "Gargling with water and salt prevents or cures coronavirus",
     "#NoComaCuento (La Nación), AFP, Chequeado, ColombiaCheck, Ecuador Chequea, "
     "Efecto Cocuyo, El Surtidor, La Silla Vacía, Maldita.es, Spondeo Media, "
     "Verificador (La República)"),
    (29, "La dieta alcalina previene o cura el coronavirus",
     "Alcaline diets prevent or cure coronavirus",
     "Agência Lupa, Animal Político, Bolivia Verifica, Chequeado, ColombiaCheck, "
     "Cotejo.info, EFE Verifica, Ecuador Chequea, Efecto Cocuyo, "
     "#NoComaCuento (La Nación), La Silla Vacía, Mala Espina Check, Maldita.es, "
     "Newtral.es"),
    (30, "El coronavirus fue fabricado en un laboratorio chino",
     "Coronavirus was made in a Chinese lab",
     "Chequeado, Ecuador Chequea, Estadão verifica"),
    (31, "La mascarilla causa hipoxia",
     "Masks cause hypoxia",
     "Agencia Ocote, Agência Lupa, Animal Político, Aos Fatos, Bolivia Verifica, "
     "Chequeado, ColombiaCheck, Cotejo.info, EFE Verifica, Ecuador Chequea, "
     "Efecto Cocuyo, La Silla Vacía, Maldita.es, Newtral.es, Verificado, "
     "Verificador (La República)"),
    (32, "El eucalipto previene o cura el coronavirus",
     "Eucalyptus prevents or cures coronavirus",
     "AFP"),
    (33, "El matico cura el coronavirus",
     "Matico cures coronavirus",
     "Bolivia Verifica"),
    (34, "El biomagnetismo mata el coronavirus",
     "Biomagnetism kills coronavirus",
     "Bolivia Verifica, Maldita.es"),
    (35, "La hoja de guayaba previene o cura el coronavirus",
     "Guava leaf prevents or cures coronavirus",
     "Animal Político, Bolivia Verifica, Maldita.es, Newtral.es"),
    (36, "La NASA catalogó el dióxido de cloro como antídoto universal en 1988",
     "NASA catalogued chlorine dioxide as a universal antidote in 1988",
     "Animal Político"),
    (37, "El vino previene o cura el coronavirus",
     "Wine prevents or cures coronavirus",
     "Chequeado, EFE Verifica, Maldita.es, Newtral.es"),
    (38, "La mascarila causa la muerte por neumonía bacteriana",
     "Masks cause death due to bacterial pneumonia",
     "Maldita.es"),
    (39, "La vitamina C previene o cura el coronavirus",
     "Vitamin C prevents or cures coronavirus",
     "AFP, Chequeado, EFE Verifica, Agência Lupa, Maldita.es, Verificado"),
    (40, "La prueba de antígenos no sirve para la COVID-19 porque da positivo con Coca-Cola",
     "Antigen tests are useless for COVID-19 because they test positive with Coca-cola",
     "Maldita.es, Newtral.es"),
    (41, "La homeopatía previene o cura el coronavirus",
     "Homeopathy prevents or cures coronavirus",
     "Chequeado, Mala Espina Check, Maldita.es, Periodismo de barrio / El Toque"),
    (42, "La COVID-19, el MERS y el H1N1 coinciden con la instalación del 5G, 4G y 3G, respectivamente",
     "COVID-19, MERS and H1N1 coincide with the installation of 3G, 4G and 5G, respectively",
     "Poligrafo"),
    (43, "Los indígenas protegen a los niños con hierbas y árboles frente a la COVID-19",
     "indigenous groups protect their children from COVID-19 with herbs and trees",
     "Ecuador Chequea"),
    (44, "Los mosquitos transmiten el coronavirus de contagiados",
     "Mosquitoes transfer coronavirus from infected people",
     "Maldita.es"),
    (45, "Beber agua o sorbos previene o cura el coronavirus",
     "Drinking or sipping water prevents or cures coronavirus",
     "#NoComaCuento (La Nación), AFP, Bolivia Verifica, ColombiaCheck, "
     "La Silla Vacía, Maldita.es, OjoPúblico"),
    (46, "Mueren 55 personas en Estados Unidos tras vacunarse contra la COVID-19",
     "55 people dead after being vaccinated against COVID-19 in the United States",
     "EFE Verifica"),
    (47, "Las mascarillas producen pleuresia y neumonía",
     "Masks produce pneumonia and pleurisy",
     "AFP"),
    (48, "Las personas sanas llevan la mascarilla con la parte blanca hacia fuera para no contagiarse de COVID-19",
     "Healthy people wear their masks with the white part on the outside not to get COVID-19",
     "Newtral.es"),
    (49, "El SARS-COV-2 no cumple los postulados de Koch, Rivers e Inglis para considerarlo enfermedad y coronavirus",
     "SARS-COV-2 does not fulfill Koch, Rivers and Inglis' postulates in order to be considered as coronavirus and as a disease",
     "EFE Verifica"),
    (50, "Christine Lagarde dijo que los ancianos viven demasiado",
     "Christine Lagarde said that the elderly live too long",
     "Chequeado, ColombiaCheck, Ecuador Chequea, Maldita.es"),
    (51, "La COVID-19 es una bacteria",
     "COVID-19 is a bacteria",
     "Animal Político, Chequeado, ColombiaCheck, La Silla Vacía, Maldita.es, "
     "Verificador (La República)"),
    (52, "Galicia aprueba una ley para aislar a los positivos COVID-19 en campos de concentración",
     "Galicia approves a law to aisle COVID-19 positives in concentration camps",
     "Maldita.es"),
    (53, "Las ondas electromagnéticas del 5G propagan el coronavirus",
     "5G electromagnetic waves spread coronavirus",
     "Chequeado, Ecuador Chequea"),
    (54, "La OMS rcomienda un test pulmonar para identificar el coronavirus",
     "The WHO recommends a pulmonary test to detect coronavirus",
     "EFE Verifica"),
    (55, "Las pandemias tienen lugar cada 100 años",
     "Pandemics take place every 100 years",
     "AFP, Animal Político, ColombiaCheck, Verificador (La República)"),
    (56, "El laboratorio de Wuhan tiene relación con Glaxo y Pfizer",
     "Wuhan lab is related to Glaxo and Pfizer",
     "Animal Político, Chequeado, La Silla Vacía, Maldita.es, Newtral.es"),
    (57, "El coronavirus desaparece a los 27 grados",
     "Coronavirus disappears at 27 degrees",
     "Bolivia Verifica, Convoca, Agência Lupa"),
    (58, "Hubo 17000 y 26000 muertes más en 2019 y 2018 respectivamente que en 2020",
     "There were 17000 and 26000 more deaths in 2019 and 2018 respectively than in 2020",
     "Maldita.es, Newtral.es"),
    (59, "El polisorbato 80 de la vacuna contra la gripe causa coronavirus",
     "Polysorbate 80 in the flu vaccines cause coronavirus",
     "EFE Verifica, Maldita.es"),
    (60, "Detienen a Charles Lieber por crear y vender el coronavirus",
     "Charles Lieber arrested for creating and selling coronavirus",
     "#NoComaCuento (La Nación), AFP, Animal Político, Efecto Cocuyo, "
     "Agência Lupa, Mala Espina Check, Maldita.es, Newtral.es"),
    (61, "En Israel no mueren por coronavirus gracias a una receta de limón y bicarbonato",
     "No deaths in Israel due to coronavirus thanks to a recipe with lemon and bicarbonate",
     "Newtral.es, Verificado"),
]

ES = {hid: es for hid, es, _, _ in _CATALOGUE}

# --------------------------------------------------------------------------
# Tracking scenario. Weekly bins relative to 2020-01-01: bin 8 starts on
# 2020-02-26, bin 9 on 2020-03-04, bin 10 on 2020-03-11, bin 11 on
# 2020-03-18, bin 12 on 2020-03-25. Each row pins the bin it is meant to
# land in; the generator recomputes the bin from the timestamp and refuses
# to emit fixtures if a date was mistyped.
#
# Circulating-claim tweets restate a catalogue claim using only its own
# words — verbatim, reshuffled punctuation, shouting caps, or repetition —
# so the deterministic scorer pins each one to its claim with the full
# entailment anchor. The debunk corpus wraps claims in "Es falso que ...",
# which adds vocabulary; those still label as entailment (the claim text is
# fully covered) but at an interpolated score, so the plan only pins their
# assignment and label. Three tweets are random noise and must fall below
# the 0.6 retrieval floor everywhere: those are the dropped ones.
# --------------------------------------------------------------------------

NOISE_IDS = ("t14", "t15", "t16")

SUPPORT_PLAN = [
    # (tweet_id, claim_id|None, planned_bin, created_at, author_id, text)
    ("t01", 31, 9, "2020-03-05T09:00:00Z", "u-andres", ES[31]),
    ("t02", 31, 9, "2020-03-07T18:30:00Z", "u-beatriz", ES[31].upper() + "!!"),
    ("t03", 31, 10, "2020-03-12T11:15:00Z", "u-carla",
     "¡La mascarilla causa hipoxia, la mascarilla causa hipoxia!"),
    ("t04", 31, 11, "2020-03-19T08:45:00Z", "u-andres", ES[31]),
    ("t05", 28, 9, "2020-03-06T14:00:00Z", "u-diego", ES[28] + "..."),
    ("t06", 28, 10, "2020-03-13T16:20:00Z", "u-elena", ES[28]),
    ("t07", 37, 10, "2020-03-14T10:05:00Z", "u-fermin", ES[37]),
    ("t08", 50, 8, "2020-02-27T12:00:00Z", "u-gloria", ES[50]),
    ("t09", 50, 8, "2020-02-29T20:10:00Z", "u-hugo", ES[50].upper()),
    ("t10", 60, 9, "2020-03-08T07:30:00Z", "u-irene", ES[60]),
    ("t11", 51, 8, "2020-02-28T13:40:00Z", "u-javier", ES[51]),
    ("t12", 51, 9, "2020-03-09T17:55:00Z", "u-karmen",
     "La COVID-19 es una bacteria... la COVID-19 es una bacteria"),
    ("t13", 1, 8, "2020-03-01T09:25:00Z", "u-luis", ES[1]),
    # Noise texts are found deterministically below (seeded search) and
    # spliced in before anything is written.
    ("t14", None, 8, "2020-02-27T15:00:00Z", "u-bot-a", None),
    ("t15", None, 9, "2020-03-05T19:45:00Z", "u-bot-b", None),
    ("t16", None, 10, "2020-03-12T21:30:00Z", "u-bot-c", None),
]

COUNTER_PLAN = [
    ("c01", 28, 11, "2020-03-19T10:00:00Z", "fc-ana",
     "Es falso que las gargaras con agua y sal previenen o curan el coronavirus"),
    ("c02", 28, 11, "2020-03-21T12:30:00Z", "fc-bruno",
     "Es falso que las gargaras con agua y sal previenen o curan el coronavirus, lo desmiente un verificador"),
    ("c03", 28, 12, "2020-03-26T09:15:00Z", "fc-carmen",
     "Es falso que las gargaras con agua y sal previenen o curan el coronavirus. No compartas bulos"),
    ("c04", 37, 12, "2020-03-27T14:45:00Z", "fc-ana",
     "Es falso que el vino previene o cura el coronavirus"),
    ("c05", 37, 12, "2020-03-28T16:00:00Z", "fc-dario",
     "Es falso que el vino previene o cura el coronavirus, es un bulo"),
    ("c06", 50, 10, "2020-03-12T08:20:00Z", "fc-carmen",
     "Es falso que Christine Lagarde dijo que los ancianos viven demasiado"),
    ("c07", 50, 10, "2020-03-15T13:10:00Z", "fc-bruno",
     "Es falso que Christine Lagarde dijo que los ancianos viven demasiado, la cita es inventada"),
    ("c08", 50, 11, "2020-03-20T18:40:00Z", "fc-elisa",
     "Es falso que Christine Lagarde dijo que los ancianos viven demasiado"),
    ("c09", 60, 11, "2020-03-22T11:50:00Z", "fc-ana",
     "Es falso que detienen a Charles Lieber por crear y vender el coronavirus"),
    ("c10", 60, 12, "2020-03-29T15:25:00Z", "fc-dario",
     "Es falso que detienen a Charles Lieber por crear y vender el coronavirus, el motivo fue otro"),
]

# Retrieval script: (claim_id, query, pages of tweet ids). Page boundaries
# exercise cursor handling; the recorded corpus preserves this order.
QUERY_PLAN = [
    (31, "mascarilla AND hipoxia", [["t01", "t02", "t14"], ["t03", "t04"]]),
    (28, "gargaras AND sal", [["t05", "t06"]]),
    (37, "vino AND coronavirus", [["t07", "t15"]]),
    (50, "Lagarde AND ancianos", [["t08", "t09"]]),
    (60, '"Charles Lieber"', [["t10"]]),
    (51, "COVID-19 AND bacteria", [["t11", "t12"], ["t16"]]),
    (1, "PCR AND gripe", [["t13"]]),
]

# Scores-evaluation fixture: each series is a rank permutation of the gold
# ranks, so both correlation flavours agree exactly and the values are easy
# to verify by hand: 0.8, 0.6 and 0.7.
STS_SERIES = {
    "EN-EN": ([1, 3, 2, 4], [1, 2, 3, 4]),
    "EN-ES": ([2, 1, 4, 3], [1, 2, 3, 4]),
    "ES-ES": ([1, 2, 5, 3, 4], [1, 2, 3, 4, 5]),
}

# Relation-label fixture: accuracy 3/4, with one ENTAILMENT mislabeled as
# CONTRADICTION.
NLI_ROWS = [
    ("n1", "ENTAILMENT", "ENTAILMENT"),
    ("n2", "ENTAILMENT", "CONTRADICTION"),
    ("n3", "CONTRADICTION", "CONTRADICTION"),
    ("n4", "NEUTRAL", "NEUTRAL"),
]

# Keyword-evaluation fixture: per-claim F1 of exactly 1.0, 0.5 and 0.0,
# macro-averaging to 0.5.
KW_GOLD = {
    31: ["mascarilla", "hipoxia"],
    37: ["vino", "coronavirus"],
    50: ["lagarde", "ancianos"],
}
KW_PRED = {
    31: ["mascarilla", "hipoxia"],
    37: ["vino", "madrid"],
    50: ["lieber", "wuhan"],
}


def _bin_of(iso: str) -> int:
    return int((parse_utc(iso) - ORIGIN) // BIN_WIDTH)


def _check_planned_bins() -> None:
    for rows in (SUPPORT_PLAN, COUNTER_PLAN):
        for tid, _, planned, iso, _, _ in rows:
            got = _bin_of(iso)
            if got != planned:
                raise AssertionError(f"{tid}: planned bin {planned}, date gives {got}")


def _write_jsonl(path: Path, docs) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")


def write_catalogue() -> Path:
    path = FIXTURES / "hoaxes_es.jsonl"
    _write_jsonl(path, (
        {
            "id": hid,
            "text": es,
            "alt_texts": [en],
            "fact_checkers": checkers.split(", "),
        }
        for hid, es, en, checkers in _CATALOGUE
    ))
    return path


def write_sts() -> Path:
    path = FIXTURES / "sts_3lang.csv"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("pair_id,lang_pair,model_score,gold_score\n")
        for lang_pair in sorted(STS_SERIES):
            model, gold = STS_SERIES[lang_pair]
            for i, (m, g) in enumerate(zip(model, gold), start=1):
                fh.write(f"{lang_pair.lower()}-{i},{lang_pair},{m},{g}\n")
    return path


def write_nli_labels() -> Path:
    path = FIXTURES / "nli_labels.jsonl"
    _write_jsonl(path, (
        {"id": rid, "gold": gold, "pred": pred} for rid, gold, pred in NLI_ROWS
    ))
    return path


def write_keywords() -> tuple[Path, Path]:
    gold_path = FIXTURES / "keywords_gold.jsonl"
    pred_path = FIXTURES / "keywords_pred.jsonl"
    _write_jsonl(gold_path, (
        {"hoax_id": hid, "keywords": kws} for hid, kws in sorted(KW_GOLD.items())
    ))
    _write_jsonl(pred_path, (
        {"hoax_id": hid, "keywords": kws} for hid, kws in sorted(KW_PRED.items())
    ))
    return gold_path, pred_path


def _fit_engine(catalogue_path: Path):
    """Build the same index the CLI would: projection fitted on the claims."""
    hoaxes = load_hoax_records(str(catalogue_path))
    gateway = ModelGateway(ProviderConfig())
    vectors = gateway.embed_concat([rec.text for rec in hoaxes])
    k = min(len(vectors[0]), len(vectors) - 1)
    pca_model = fit_pca(vectors, k, ensemble_model_ids=gateway.config.ensemble_model_ids)
    index = build_index(hoaxes, gateway, pca_model)
    return hoaxes, gateway, pca_model, index


def _find_noise_texts(gateway, pca_model, index) -> dict[str, str]:
    """Deterministically pick gibberish strings that no catalogue entry can
    claim: best similarity strictly under 0.55 leaves margin below the 0.6
    retrieval floor."""
    rng = random.Random(20200323)
    letters = "bcdfghjklmnpqrstvwxz"
    found = []
    while len(found) < len(NOISE_IDS):
        words = [
            "".join(rng.choice(letters) for _ in range(rng.randint(4, 7)))
            for _ in range(rng.randint(4, 6))
        ]
        text = " ".join(words)
        vec = transform(pca_model, gateway.embed_concat([text])[0])
        top = search_vector(index, vec, top_k=1, min_similarity=-1.0)
        if top and top[0].similarity < 0.55:
            found.append(text)
    return dict(zip(NOISE_IDS, found))


def _support_rows(noise_texts: dict[str, str]):
    rows = []
    for tid, hid, planned, iso, author, text in SUPPORT_PLAN:
        rows.append((tid, hid, planned, iso, author,
                     noise_texts[tid] if text is None else text))
    return rows


def _corpus_order(support_rows):
    """Tweet ids in retrieval order: query by query, page by page."""
    by_id = {row[0]: row for row in support_rows}
    ordered = []
    for _, _, pages in QUERY_PLAN:
        for page in pages:
            ordered.extend(by_id[tid] for tid in page)
    if len(ordered) != len(support_rows):
        missing = {r[0] for r in support_rows} - {r[0] for r in ordered}
        raise AssertionError(f"retrieval script misses tweets: {sorted(missing)}")
    return ordered


def _to_tweet_record(row) -> TweetRecord:
    tid, _, _, iso, author, text = row
    return TweetRecord(
        id=tid,
        text=text,
        created_at=parse_utc(iso),
        author_hash=hash_author(author, HASH_SALT),
        lang="es",
        is_reply=(tid == "t15"),
    )


def write_osn_fixture(support_rows) -> tuple[Path, Path]:
    by_id = {row[0]: row for row in support_rows}
    fixtures = []
    for _, query, pages in QUERY_PLAN:
        page_docs = []
        for page in pages:
            data = []
            for tid in page:
                _, _, _, iso, author, text = by_id[tid]
                doc = {
                    "id": tid,
                    "text": text,
                    "created_at": iso,
                    "author_id": author,
                    "lang": "es",
                }
                if tid == "t15":
                    doc["in_reply_to_user_id"] = "u-andres"
                data.append(doc)
            page_docs.append({"data": data, "meta": {"result_count": len(data)}})
        fixtures.append({"request_matcher": {"query": query}, "pages": page_docs})
    fixture_path = FIXTURES / "e2e_osn_fixture.json"
    with open(fixture_path, "w", encoding="utf-8") as fh:
        json.dump(fixtures, fh, ensure_ascii=False, indent=2)
        fh.write("\n")

    queries_path = FIXTURES / "e2e_queries.jsonl"
    _write_jsonl(queries_path, (
        {"hoax_id": hid, "query": query} for hid, query, _ in QUERY_PLAN
    ))
    return fixture_path, queries_path


def write_corpora(support_rows) -> tuple[Path, Path]:
    corpus_path = FIXTURES / "e2e_corpus.jsonl"
    counter_path = FIXTURES / "e2e_counter_corpus.jsonl"
    for path, rows in (
        (corpus_path, _corpus_order(support_rows)),
        (counter_path, COUNTER_PLAN),
    ):
        path.unlink(missing_ok=True)
        persist_tweets([_to_tweet_record(r) for r in rows], str(path))
    return corpus_path, counter_path


def _count_bins(rows, only_ids=None):
    counts: dict[int, int] = {}
    for tid, hid, planned, _, _, _ in rows:
        if hid is None:
            continue
        if only_ids is not None and hid not in only_ids:
            continue
        counts[planned] = counts.get(planned, 0) + 1
    return counts


def _peak(counts: dict[int, int]) -> int:
    best = max(counts.values())
    return min(b for b, c in counts.items() if c == best)


def write_expectations(support_rows) -> Path:
    labeled = [r for r in support_rows if r[1] is not None]
    totals: dict[str, dict[str, int]] = {}
    per_claim_bins: dict[int, dict[int, int]] = {}
    for _, hid, planned, _, _, _ in labeled:
        totals.setdefault(str(hid), {}).setdefault("ENTAILMENT", 0)
        totals[str(hid)]["ENTAILMENT"] += 1
        per_claim_bins.setdefault(hid, {}).setdefault(planned, 0)
        per_claim_bins[hid][planned] += 1

    aggregate = _count_bins(labeled)
    counter = _count_bins(COUNTER_PLAN)
    support_peak = _peak(aggregate)
    counter_peak = _peak(counter)
    all_bins = sorted(set(aggregate) | set(counter))

    doc = {
        "settings": {
            "top_k": 5,
            "min_similarity": 0.6,
            "bin_width_days": 7,
            "origin": "2020-01-01T00:00:00Z",
            "hash_salt": HASH_SALT,
        },
        "corpus_size": len(support_rows),
        "labeled_total": len(labeled),
        "dropped_count": len(support_rows) - len(labeled),
        "dropped_ids": list(NOISE_IDS),
        "assignments": {
            tid: {"hoax_id": hid, "label": "ENTAILMENT", "entailment": 0.92}
            for tid, hid, _, _, _, _ in labeled
        },
        "counter_assignments": {
            tid: {"hoax_id": hid, "label": "ENTAILMENT"}
            for tid, hid, _, _, _, _ in COUNTER_PLAN
        },
        "totals_by_hoax": dict(sorted(totals.items(), key=lambda kv: int(kv[0]))),
        "peak_by_hoax": {
            str(hid): _peak(bins)
            for hid, bins in sorted(per_claim_bins.items())
        },
        "aggregate_counts": {str(b): c for b, c in sorted(aggregate.items())},
        "support_counts": {str(b): c for b, c in sorted(aggregate.items())},
        "counter_counts": {str(b): c for b, c in sorted(counter.items())},
        "comparison": {
            "bins": [[b, aggregate.get(b, 0), counter.get(b, 0)] for b in all_bins],
            "support_total": sum(aggregate.values()),
            "counter_total": sum(counter.values()),
            "ratio_num": sum(counter.values()),
            "ratio_den": sum(aggregate.values()),
            "lag_of_peaks": counter_peak - support_peak,
        },
    }
    path = FIXTURES / "e2e_expectations.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return path


def verify_against_engine(catalogue_path, support_rows, fixture_path, queries_path):
    """Prove the plan is what the engine computes before freezing it."""
    hoaxes, gateway, pca_model, index = _fit_engine(catalogue_path)

    for rows, tag in ((support_rows, "support"), (COUNTER_PLAN, "counter")):
        records = [_to_tweet_record(r) for r in rows]
        dataset = build_dataset(hoaxes, records, index, gateway, pca_model,
                                top_k=5, min_similarity=0.6)
        got = {lt.tweet_id: lt for lt in dataset}
        planned = {r[0]: r[1] for r in rows if r[1] is not None}
        if set(got) != set(planned):
            raise AssertionError(
                f"{tag}: engine labeled {sorted(got)} but plan says {sorted(planned)}"
            )
        for tid, hid in planned.items():
            lt = got[tid]
            if lt.hoax_id != hid:
                raise AssertionError(f"{tag} {tid}: assigned {lt.hoax_id}, planned {hid}")
            if lt.label.value != "ENTAILMENT":
                raise AssertionError(f"{tag} {tid}: label {lt.label.value}")
            if tag == "support" and lt.scores.entailment != 0.92:
                raise AssertionError(f"{tag} {tid}: entailment {lt.scores.entailment}")
            if lt.similarity < 0.6:
                raise AssertionError(f"{tag} {tid}: similarity {lt.similarity}")

    # The recorded corpus must be exactly what a retrieval session yields.
    client = OsnClient(OsnClientConfig(endpoint="mock:" + str(fixture_path)))
    retrieved: list[TweetRecord] = []
    with open(queries_path, encoding="utf-8") as fh:
        for line in fh:
            doc = json.loads(line)
            job = SearchJob(hoax_id=doc["hoax_id"], query=doc["query"], since=ORIGIN)
            for page in client.run_search(job):
                retrieved.extend(page)
    expected = [_to_tweet_record(r) for r in _corpus_order(support_rows)]
    if retrieved != expected:
        raise AssertionError("mock retrieval does not reproduce the recorded corpus")


def write_bulk_corpus(noise_texts) -> Path:
    """A larger shuffled corpus for orchestration-equivalence tests: quoted
    claims, claims wrapped in chatter, two claims glued together, and noise."""
    rng = random.Random(424242)
    claims = [es for _, es in sorted(ES.items())]
    prefixes = ["RT @vecina_informada: ", "Atención: ", "Dicen que ", "URGENTE: ",
                "Mi cuñado asegura que ", "Visto en un grupo: "]
    suffixes = [" ¡compártelo!", " y nadie dice nada", " #covid19",
                " no lo verás en la tele", " (reenviado muchas veces)"]
    letters = "bcdfghjklmnpqrstvwxz"
    start = datetime(2020, 2, 1, tzinfo=timezone.utc)
    span = int(timedelta(days=334).total_seconds())

    records = []
    for i in range(1000):
        roll = rng.random()
        if roll < 0.40:
            text = rng.choice(claims)
        elif roll < 0.70:
            text = rng.choice(prefixes) + rng.choice(claims)
            if rng.random() < 0.5:
                text += rng.choice(suffixes)
        elif roll < 0.85:
            a, b = rng.sample(claims, 2)
            text = a + " y además " + b
        else:
            text = " ".join(
                "".join(rng.choice(letters) for _ in range(rng.randint(3, 8)))
                for _ in range(rng.randint(3, 7))
            )
        created = start + timedelta(seconds=rng.randrange(span))
        records.append(TweetRecord(
            id=f"a4-{i:04d}",
            text=text,
            created_at=created,
            author_hash=hash_author(f"bulk-user-{i % 97}", HASH_SALT),
            lang="es",
            is_reply=rng.random() < 0.1,
        ))
    path = FIXTURES / "bulk_corpus.jsonl"
    path.unlink(missing_ok=True)
    persist_tweets(records, str(path))
    return path


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    _check_planned_bins()

    catalogue_path = write_catalogue()
    write_sts()
    write_nli_labels()
    write_keywords()

    _, gateway, pca_model, index = _fit_engine(catalogue_path)
    noise_texts = _find_noise_texts(gateway, pca_model, index)
    support_rows = _support_rows(noise_texts)

    fixture_path, queries_path = write_osn_fixture(support_rows)
    write_corpora(support_rows)
    write_expectations(support_rows)
    verify_against_engine(catalogue_path, support_rows, fixture_path, queries_path)

    write_bulk_corpus(noise_texts)

    for p in sorted(FIXTURES.iterdir()):
        print(f"wrote {p.relative_to(ROOT)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
