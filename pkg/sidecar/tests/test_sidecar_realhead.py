"""Math of the real-mode components that runs without downloaded weights."""

from __future__ import annotations

import os

import pytest

torch = pytest.importorskip("torch")

from inference_sidecar.realmodels import NliHead, masked_mean  # noqa: E402


def test_masked_mean_ignores_padding():
    hidden = torch.arange(24, dtype=torch.float64).reshape(2, 3, 4)
    mask = torch.tensor([[1, 1, 1], [1, 1, 0]])
    pooled = masked_mean(hidden, mask)
    assert torch.allclose(pooled[0], hidden[0].mean(dim=0))
    assert torch.allclose(pooled[1], hidden[1, :2].mean(dim=0))


def test_masked_mean_is_padding_invariant():
    torch.manual_seed(0)
    row = torch.randn(1, 5, 8, dtype=torch.float64)
    mask = torch.ones(1, 5, dtype=torch.long)
    padded = torch.cat([row, torch.zeros(1, 3, 8, dtype=torch.float64)], dim=1)
    padded_mask = torch.cat([mask, torch.zeros(1, 3, dtype=torch.long)], dim=1)
    assert torch.equal(masked_mean(row, mask), masked_mean(padded, padded_mask))


def test_nli_head_outputs_simplex_and_is_deterministic_in_eval():
    torch.manual_seed(1)
    head = NliHead(hidden_size=16).eval()
    pooled = torch.randn(4, 16)
    with torch.no_grad():
        first = head(pooled)
        second = head(pooled)
    assert first.shape == (4, 3)
    assert torch.equal(first, second)  # dropout inert in eval mode
    assert torch.all(first >= 0)
    assert torch.allclose(first.sum(dim=1), torch.ones(4), atol=1e-6)


def test_nli_head_batch_matches_singletons():
    torch.manual_seed(2)
    head = NliHead(hidden_size=16).eval()
    pooled = torch.randn(2, 16)
    with torch.no_grad():
        batch = head(pooled)
        singles = torch.cat([head(pooled[:1]), head(pooled[1:])])
    assert torch.allclose(batch, singles, atol=1e-5)


def test_nli_head_dropout_active_in_train_mode():
    torch.manual_seed(3)
    head = NliHead(hidden_size=16).train()
    pooled = torch.randn(64, 16)
    first = head(pooled)
    second = head(pooled)
    assert not torch.equal(first, second)


@pytest.mark.skipif(
    not os.environ.get("SIDECAR_REAL_MODELS"),
    reason="set SIDECAR_REAL_MODELS=1 to download checkpoints and smoke-test real serving",
)
def test_real_backend_smoke():
    from inference_sidecar.config import ServiceConfig
    from inference_sidecar.realmodels import build_backend

    config = ServiceConfig(
        encoders={
            "minilm": "sentence-transformers/paraphrase-multilingual-MiniLM-L12-v2"
        }
    )
    backend = build_backend(config)
    dims = backend.dims()
    [row] = backend.embed(["minilm"], ["hola mundo"])
    assert len(row[0]) == dims["minilm"]
    [(e, c, n)] = backend.nli([("hola", "hola")])
    assert abs(e + c + n - 1.0) <= 1e-4
