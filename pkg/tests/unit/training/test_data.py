"""
Unit tests for encoded pairs and batches.
"""

import pytest
import torch

from scrivener.errors import SequenceTooLongError
from scrivener.lm.ngram import fit, log_prob_seq
from scrivener.models.schemas import TextPair
from scrivener.text.vocab import build_vocab, encode
from scrivener.training.data import collate, encode_pair, encode_pairs


@pytest.fixture
def vocab():
    return build_vocab(["abc"])


class TestEncodePair:
    """Test teacher-forcing layouts."""

    def test_layout(self, vocab):
        """Test source + EOS, BOS + target, target + EOS."""
        example = encode_pair(TextPair(student="ab", teacher="cab"), vocab, max_seq_len=8)

        assert example.source == encode("ab", vocab) + [vocab.eos_id]
        assert example.decoder_input == [vocab.bos_id] + encode("cab", vocab)
        assert example.target == encode("cab", vocab) + [vocab.eos_id]
        assert example.lm_log_prob is None
        assert example.noisy is False

    def test_lm_score_cached(self, vocab):
        """Test the language-model score of the target is stored."""
        lm = fit([encode("abc", vocab) + [vocab.eos_id]], order=2, vocab_size=vocab.size)

        example = encode_pair(TextPair(student="a", teacher="ab"), vocab, max_seq_len=8, lm=lm)

        assert example.lm_log_prob == pytest.approx(log_prob_seq(lm, example.target))

    def test_too_long(self, vocab):
        """Test sequences longer than max_seq_len raise."""
        with pytest.raises(SequenceTooLongError):
            encode_pair(TextPair(student="abcabc", teacher="a"), vocab, max_seq_len=4)

    def test_noisy_flag_carried(self, vocab):
        """Test the diagnostic flag is kept."""
        examples = encode_pairs([TextPair(student="a", teacher="b", noisy=True)], vocab, max_seq_len=4)

        assert examples[0].noisy is True


class TestCollate:
    """Test padded batches."""

    def test_right_padding_and_mask(self, vocab):
        """Test shorter rows are PAD-filled and masked."""
        examples = encode_pairs([TextPair(student="a", teacher="abc"), TextPair(student="abc", teacher="a")], vocab, max_seq_len=8)

        batch = collate(examples)

        assert batch.size == 2
        assert batch.source.shape == (2, 4)
        assert batch.target.shape == (2, 4)
        assert batch.source[0, 2:].tolist() == [vocab.pad_id, vocab.pad_id]
        assert batch.mask.tolist() == [[True, True, True, True], [True, True, False, False]]
        assert batch.lm_log_prob is None

    def test_lm_scores_stacked(self, vocab):
        """Test language-model scores become a float64 tensor."""
        lm = fit([encode("abc", vocab) + [vocab.eos_id]], order=1, vocab_size=vocab.size)
        examples = encode_pairs([TextPair(student="a", teacher="b"), TextPair(student="b", teacher="c")], vocab, max_seq_len=8, lm=lm)

        batch = collate(examples)

        assert batch.lm_log_prob.dtype == torch.float64
        assert batch.lm_log_prob.shape == (2,)
