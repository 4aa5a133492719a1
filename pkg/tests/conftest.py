import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make tests/oracles.py importable

from hoaxwatch import HoaxRecord, ModelGateway, ProviderConfig, build_index, fit_pca

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(scope="session")
def gw():
    return ModelGateway(ProviderConfig())


@pytest.fixture(scope="session")
def small_hoaxes():
    return [
        HoaxRecord(id=31, text="La mascarilla causa hipoxia",
                   alt_texts=("Masks cause hypoxia",),
                   fact_checkers=("Maldita.es", "Newtral.es")),
        HoaxRecord(id=50, text="Christine Lagarde dijo que los ancianos viven demasiado",
                   fact_checkers=("Chequeado",)),
        HoaxRecord(id=15, text="La definición de pandemia cambió en 2009 por la OMS",
                   fact_checkers=("Newtral.es",)),
        HoaxRecord(id=37, text="El vino previene o cura el coronavirus",
                   fact_checkers=("Maldita.es",)),
        HoaxRecord(id=51, text="La COVID-19 es una bacteria",
                   fact_checkers=("Chequeado",)),
    ]


@pytest.fixture(scope="session")
def fitted(gw, small_hoaxes):
    """(pca_model, index) over the small hoax set plus filler texts."""
    filler = [
        "los gatos duermen la mayor parte del día",
        "el tren llega a la estación a las nueve",
        "la receta lleva harina huevos y azúcar",
        "mañana se espera lluvia en toda la región",
    ]
    vecs = gw.embed_concat([h.text for h in small_hoaxes] + filler)
    pca_model = fit_pca(vecs, 6, ensemble_model_ids=gw.config.ensemble_model_ids)
    index = build_index(small_hoaxes, gw, pca_model)
    return pca_model, index
