"""
Character-level encoder-decoder Transformer.

Pre-layer-norm residual blocks, learned positional embeddings and a token
embedding shared by the encoder, the decoder and the output projection.
Batches are right-padded with PAD; padded source positions are masked out of
every attention over the encoder memory.
"""

import math
from typing import Literal, Optional, Sequence

import torch
from torch import nn
import torch.nn.functional as F

from scrivener.constants import ErrorMessages, SpecialTokens
from scrivener.errors import SequenceTooLongError
from scrivener.lib.structured_logger import get_logger
from scrivener.models.scrivener_config import ModelConfig

logger = get_logger(__name__)

Mode = Literal["train", "eval"]


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, dropout_rate: float):
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.q_proj = nn.Linear(d_model, d_model)
        self.k_proj = nn.Linear(d_model, d_model)
        self.v_proj = nn.Linear(d_model, d_model)
        self.o_proj = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout_rate)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.view(batch, length, self.n_heads, self.d_head).transpose(1, 2)

    def forward(self, query: torch.Tensor, memory: torch.Tensor, mask: Optional[torch.Tensor] = None) -> torch.Tensor:
        """``mask`` broadcasts to (B, heads, Tq, Tk); True marks blocked positions."""
        q = self._split(self.q_proj(query))
        k = self._split(self.k_proj(memory))
        v = self._split(self.v_proj(memory))

        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if mask is not None:
            scores = scores.masked_fill(mask, torch.finfo(scores.dtype).min)
        weights = self.dropout(torch.softmax(scores, dim=-1))

        out = (weights @ v).transpose(1, 2).reshape(query.shape)
        return self.o_proj(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ffn: int, dropout_rate: float):
        super().__init__()
        self.fc_in = nn.Linear(d_model, d_ffn)
        self.fc_out = nn.Linear(d_ffn, d_model)
        self.dropout = nn.Dropout(dropout_rate)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.fc_out(self.dropout(F.relu(self.fc_in(x))))


class EncoderLayer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.self_attn_norm = nn.LayerNorm(config.d_model)
        self.self_attn = MultiHeadAttention(config.d_model, config.n_heads, config.dropout_rate)
        self.ffn_norm = nn.LayerNorm(config.d_model)
        self.ffn = FeedForward(config.d_model, config.d_ffn, config.dropout_rate)
        self.dropout = nn.Dropout(config.dropout_rate)

    def forward(self, x: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        h = self.self_attn_norm(x)
        x = x + self.dropout(self.self_attn(h, h, src_mask))
        return x + self.dropout(self.ffn(self.ffn_norm(x)))


class DecoderLayer(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.self_attn_norm = nn.LayerNorm(config.d_model)
        self.self_attn = MultiHeadAttention(config.d_model, config.n_heads, config.dropout_rate)
        self.cross_attn_norm = nn.LayerNorm(config.d_model)
        self.cross_attn = MultiHeadAttention(config.d_model, config.n_heads, config.dropout_rate)
        self.ffn_norm = nn.LayerNorm(config.d_model)
        self.ffn = FeedForward(config.d_model, config.d_ffn, config.dropout_rate)
        self.dropout = nn.Dropout(config.dropout_rate)

    def forward(self, y: torch.Tensor, memory: torch.Tensor, causal_mask: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        h = self.self_attn_norm(y)
        y = y + self.dropout(self.self_attn(h, h, causal_mask))
        y = y + self.dropout(self.cross_attn(self.cross_attn_norm(y), memory, src_mask))
        return y + self.dropout(self.ffn(self.ffn_norm(y)))


class Seq2SeqTransformer(nn.Module):
    """Maps a source batch and a decoder-input batch to next-token logits.

    ``forward(src, tgt)`` takes (B, S) and (B, T) id tensors and returns (B, T, K)
    logits where row ``i`` scores ``y_i`` given the source and ``tgt[:, :i+1]``.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.token_embedding = nn.Embedding(config.vocab_size, config.d_model)
        self.position_embedding = nn.Embedding(config.max_seq_len, config.d_model)
        self.encoder_layers = nn.ModuleList(EncoderLayer(config) for _ in range(config.n_encoder_layers))
        self.decoder_layers = nn.ModuleList(DecoderLayer(config) for _ in range(config.n_decoder_layers))
        self.encoder_norm = nn.LayerNorm(config.d_model)
        self.decoder_norm = nn.LayerNorm(config.d_model)
        self.output_bias = nn.Parameter(torch.zeros(config.vocab_size))
        self.dropout = nn.Dropout(config.dropout_rate)

    def _check_length(self, ids: torch.Tensor) -> None:
        length = ids.size(-1)
        if length > self.config.max_seq_len:
            raise SequenceTooLongError(ErrorMessages.SEQUENCE_TOO_LONG.format(length=length, max_len=self.config.max_seq_len))

    def _embed(self, ids: torch.Tensor) -> torch.Tensor:
        positions = torch.arange(ids.size(1), device=ids.device)
        return self.dropout(self.token_embedding(ids) + self.position_embedding(positions))

    def source_mask(self, src: torch.Tensor) -> torch.Tensor:
        """(B, 1, 1, S) mask blocking padded source positions."""
        return (src == SpecialTokens.PAD_ID)[:, None, None, :]

    def encode(self, src: torch.Tensor) -> torch.Tensor:
        self._check_length(src)
        mask = self.source_mask(src)
        x = self._embed(src)
        for layer in self.encoder_layers:
            x = layer(x, mask)
        return self.encoder_norm(x)

    def decode(self, memory: torch.Tensor, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        self._check_length(tgt)
        length = tgt.size(1)
        causal = torch.triu(torch.ones(length, length, dtype=torch.bool, device=tgt.device), diagonal=1)
        src_mask = self.source_mask(src)
        y = self._embed(tgt)
        for layer in self.decoder_layers:
            y = layer(y, memory, causal, src_mask)
        y = self.decoder_norm(y)
        return F.linear(y, self.token_embedding.weight, self.output_bias)

    def forward(self, src: torch.Tensor, tgt: torch.Tensor) -> torch.Tensor:
        return self.decode(self.encode(src), src, tgt)

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())


def init_params(config: ModelConfig, seed: int, dtype: torch.dtype = torch.float32) -> Seq2SeqTransformer:
    """Build a model with deterministic initial weights.

    Matrices are drawn from U(-b, b) with b = sqrt(6 / (fan_in + fan_out));
    biases and layer-norm offsets are 0, layer-norm scales are 1.
    """
    model = Seq2SeqTransformer(config).to(dtype)
    generator = torch.Generator().manual_seed(seed)

    with torch.no_grad():
        for name, param in model.named_parameters():
            if param.dim() >= 2:
                fan_out, fan_in = param.shape[0], param.shape[1]
                bound = math.sqrt(6.0 / (fan_in + fan_out))
                param.uniform_(-bound, bound, generator=generator)
            elif "norm" in name and name.endswith("weight"):
                param.fill_(1.0)
            else:
                param.zero_()

    logger.debug("Initialized model", seed=seed, parameters=model.parameter_count())
    return model


def forward(model: Seq2SeqTransformer, x: Sequence[int], y_prefix: Sequence[int], mode: Mode = "eval", seed: Optional[int] = None) -> torch.Tensor:
    """Logits of shape (len(y_prefix), K) for a single source and decoder prefix.

    In ``train`` mode dropout is active; passing ``seed`` draws the dropout masks
    from a private random stream so concurrent callers do not share state.

    Raises:
        SequenceTooLongError: If either sequence exceeds ``max_seq_len``
    """
    src = torch.tensor([list(x)], dtype=torch.long)
    tgt = torch.tensor([list(y_prefix)], dtype=torch.long)
    was_training = model.training
    model.train(mode == "train")
    try:
        if mode == "eval":
            with torch.no_grad():
                return model(src, tgt)[0]
        if seed is None:
            return model(src, tgt)[0]
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            return model(src, tgt)[0]
    finally:
        model.train(was_training)
