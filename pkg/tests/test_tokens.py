import base64
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from warc2meta.errors import VocabularyLoadError
from warc2meta.tokens import (
    PriceConfig,
    TokenizerHandle,
    count_tokens,
    encode,
    load_vocabulary,
    reduction_report,
)

PINNED_VOCAB = {
    b"he": 1,
    b"ll": 2,
    b"llo": 3,
    b"hello": 4,
    b" w": 5,
    b"or": 6,
    b"orl": 7,
    b"ab": 8,
    b"abc": 9,
}

TOK = TokenizerHandle(vocabulary=PINNED_VOCAB, special_tokens=frozenset(), name="pinned")

PRICES = PriceConfig(
    price_per_million_input=Decimal("2.50"),
    price_per_million_output=Decimal("10.00"),
)


def oracle_encode(text: str, vocab) -> list:
    """Reference BPE: repeatedly merge the lowest-rank pair, searching by
    vocabulary order instead of scanning positions for the minimum."""
    parts = [bytes([b]) for b in text.encode("utf-8")]
    by_rank = sorted(vocab.items(), key=lambda kv: kv[1])
    changed = True
    while changed and len(parts) > 1:
        changed = False
        for token, _rank in by_rank:
            for i in range(len(parts) - 1):
                if parts[i] + parts[i + 1] == token:
                    parts[i : i + 2] = [token]
                    changed = True
                    break
            if changed:
                break
    return parts


class TestCountTokens:
    def test_empty(self):
        assert count_tokens("", TOK) == 0
        assert count_tokens("", None) == 0

    def test_fallback_estimator(self):
        assert count_tokens("123456789", None) == 3  # ceil(9/4)
        assert count_tokens("1234", None) == 1

    def test_frozen_pinned_counts(self):
        # hand-simulated greedy merges over the pinned vocabulary
        assert count_tokens("hello", TOK) == 1
        assert count_tokens("abc", TOK) == 1
        assert count_tokens("abab", TOK) == 2
        assert count_tokens("world", TOK) == 3  # w, orl, d
        assert count_tokens("xyz", TOK) == 3  # no merges apply

    def test_oracle_equality_fixed_strings(self):
        for text in ["hello world", "abcabcabc", "he llo", "zzz", "a", ""]:
            assert len(oracle_encode(text, PINNED_VOCAB)) == count_tokens(text, TOK)

    @given(st.text(alphabet="helo wrabc", max_size=64))
    def test_oracle_equality_random(self, text):
        assert len(oracle_encode(text, PINNED_VOCAB)) == count_tokens(text, TOK)

    @given(st.text(max_size=200))
    def test_decode_roundtrip(self, text):
        assert b"".join(encode(text, TOK)) == text.encode("utf-8")

    @given(st.text(max_size=200))
    def test_deterministic(self, text):
        assert count_tokens(text, TOK) == count_tokens(text, TOK)

    @given(st.text(max_size=100), st.text(max_size=20))
    def test_fallback_monotone_in_length(self, a, b):
        assert count_tokens(a + b, None) >= count_tokens(a, None)


class TestVocabularyLoading:
    def test_rank_table_roundtrip(self, tmp_path):
        path = tmp_path / "vocab.txt"
        lines = [
            f"{base64.b64encode(tok).decode()} {rank}"
            for tok, rank in PINNED_VOCAB.items()
        ]
        path.write_text("\n".join(lines))
        tok = load_vocabulary(path, name="pinned")
        assert tok.vocabulary == PINNED_VOCAB
        assert count_tokens("hello", tok) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(VocabularyLoadError):
            load_vocabulary(tmp_path / "nope.txt")

    def test_garbled_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("not-base64!!! x\n")
        with pytest.raises(VocabularyLoadError):
            load_vocabulary(path)

    def test_duplicate_ranks_rejected(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text(
            f"{base64.b64encode(b'aa').decode()} 1\n"
            f"{base64.b64encode(b'bb').decode()} 1\n"
        )
        with pytest.raises(VocabularyLoadError):
            load_vocabulary(path)


class TestReductionReport:
    def test_headline_magnitude(self):
        before = ["x" * 4_000_000]  # 1,000,000 fallback tokens
        after = ["x" * 4_000]  # 1,000 tokens
        report = reduction_report(before, after, PRICES)
        assert report.tokens_before == 1_000_000
        assert report.tokens_after == 1_000
        assert report.reduction_ratio == Fraction(999, 1000)

    def test_no_reduction(self):
        report = reduction_report(["abcd"], ["abcd"], PRICES)
        assert report.reduction_ratio == 0

    def test_empty_before_degenerate(self):
        report = reduction_report([], ["abcd"], PRICES)
        assert report.degenerate
        assert report.reduction_ratio == 0

    def test_ratio_identity_exact(self):
        report = reduction_report(["x" * 4000], ["x" * 300], PRICES)
        assert report.reduction_ratio == 1 - Fraction(
            report.tokens_after, report.tokens_before
        )

    def test_cost_identity_exact(self):
        report = reduction_report(["x" * 4_000_000], ["x" * 4_000], PRICES)
        for tokens, cost in (
            (report.tokens_before, report.cost_before),
            (report.tokens_after, report.cost_after),
        ):
            expected = (
                Decimal(tokens) / Decimal(1_000_000) * PRICES.price_per_million_input
            ).quantize(Decimal("0.000001"))
            assert cost == expected

    def test_negative_prices_rejected(self):
        bad = PriceConfig(Decimal("-1"), Decimal("0"))
        with pytest.raises(ValueError):
            reduction_report(["x"], ["x"], bad)

    def test_approximate_flag(self):
        assert reduction_report(["x"], ["x"], PRICES).approximate
        assert not reduction_report(["x"], ["x"], PRICES, TOK).approximate
