"""
Shared test fixtures and configuration for Scrivener tests.

Test Isolation Strategy:
1. Each test gets a fresh temporary directory created with tempfile.TemporaryDirectory
2. The working directory is switched into it, so relative output paths land there
3. Logging is routed to a log directory inside it
4. Temp directories are automatically cleaned up after each test

Stub models implement the decoder interface (a ``config`` plus
``forward(src, tgt) -> (B, T, K)`` logits) with hand-chosen distributions.
"""

import json
from pathlib import Path
import tempfile
from typing import List, Sequence

import pytest
import torch
from torch import nn

from scrivener.models.schemas import TextPair
from scrivener.models.scrivener_config import ModelConfig
from scrivener.text.vocab import Vocab, build_vocab, encode

# Logit gap making a one-hot stub numerically certain in float64
CERTAIN = 1e4


@pytest.fixture(scope="function", autouse=True)
def setup_test_environment(monkeypatch):
    """Run every test inside its own temporary working directory."""
    with tempfile.TemporaryDirectory(prefix="scrivener_test_") as temp_dir:
        test_dir = Path(temp_dir)
        (test_dir / "logs").mkdir()

        monkeypatch.chdir(test_dir)
        monkeypatch.setenv("SCRIVENER_LOG_DIR", str(test_dir / "logs"))
        monkeypatch.setenv("SCRIVENER_TEST_MODE", "true")

        pytest.test_temp_dir = test_dir
        yield test_dir


@pytest.fixture
def workspace() -> Path:
    """The per-test temporary directory."""
    return pytest.test_temp_dir


@pytest.fixture
def sample_pairs() -> List[TextPair]:
    return [
        TextPair(student="norah lovs pes", teacher="norah loves peas!"),
        TextPair(student="we lern abot erth in sins", teacher="We learn about Earth in Science."),
        TextPair(student="the dinosor rns", teacher="The dinosaur runs"),
        TextPair(student="i lik my dog", teacher="I like my dog."),
        TextPair(student="mi mum is nis", teacher="My mum is nice."),
        TextPair(student="we plad in the park", teacher="We played in the park."),
    ]


@pytest.fixture
def sample_vocab(sample_pairs) -> Vocab:
    return build_vocab(text for pair in sample_pairs for text in (pair.student, pair.teacher))


@pytest.fixture
def micro_config() -> ModelConfig:
    """A model small enough to train in a unit test."""
    return ModelConfig(d_model=16, n_heads=2, n_encoder_layers=1, n_decoder_layers=1, d_ffn=32, max_seq_len=64, dropout_rate=0.0)


@pytest.fixture
def write_pairs(workspace):
    """Write pairs as JSON lines and return the path."""

    def _write(pairs: Sequence[TextPair], name: str = "pairs.jsonl") -> Path:
        path = workspace / name
        path.write_text("".join(json.dumps(p.model_dump(exclude_none=True)) + "\n" for p in pairs), encoding="utf-8")
        return path

    return _write


class ProbabilityStub(nn.Module):
    """Emits fixed next-token distributions, one per decoder position (the last repeats)."""

    def __init__(self, probs: Sequence[Sequence[float]], max_seq_len: int = 32, scale: float = 1.0):
        super().__init__()
        table = torch.tensor(probs, dtype=torch.float64)
        self.logits = scale * torch.log(table)
        self.config = ModelConfig(d_model=4, n_heads=1, n_encoder_layers=1, n_decoder_layers=1, d_ffn=4, max_seq_len=max_seq_len, vocab_size=table.shape[1])

    def forward(self, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        length = tgt.size(1)
        rows = [self.logits[min(i, len(self.logits) - 1)] for i in range(length)]
        return torch.stack(rows).unsqueeze(0).expand(tgt.size(0), -1, -1)


class SpellingStub(nn.Module):
    """Deterministically spells ``text`` followed by EOS, whatever the input."""

    def __init__(self, text: str, vocab: Vocab, max_seq_len: int = 32):
        super().__init__()
        self.sequence = encode(text, vocab) + [vocab.eos_id]
        self.vocab_size = vocab.size
        self.config = ModelConfig(d_model=4, n_heads=1, n_encoder_layers=1, n_decoder_layers=1, d_ffn=4, max_seq_len=max_seq_len, vocab_size=vocab.size)

    def forward(self, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        length = tgt.size(1)
        logits = torch.full((tgt.size(0), length, self.vocab_size), -CERTAIN, dtype=torch.float64)
        for i in range(length):
            logits[:, i, self.sequence[min(i, len(self.sequence) - 1)]] = 0.0
        return logits


class NeverEndingStub(nn.Module):
    """Always predicts the same non-EOS token."""

    def __init__(self, token: int, vocab_size: int, max_seq_len: int = 32):
        super().__init__()
        self.token = token
        self.vocab_size = vocab_size
        self.config = ModelConfig(d_model=4, n_heads=1, n_encoder_layers=1, n_decoder_layers=1, d_ffn=4, max_seq_len=max_seq_len, vocab_size=vocab_size)

    def forward(self, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        logits = torch.zeros((tgt.size(0), tgt.size(1), self.vocab_size), dtype=torch.float64)
        logits[..., self.token] = 5.0
        return logits


@pytest.fixture
def probability_stub():
    return ProbabilityStub


@pytest.fixture
def spelling_stub():
    return SpellingStub


@pytest.fixture
def never_ending_stub():
    return NeverEndingStub
