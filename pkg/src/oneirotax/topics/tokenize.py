"""Tokenizer and n-gram term generation for topic representations."""

from __future__ import annotations

import re

from oneirotax.stopwords import STOP_WORDS

# lowercase words; apostrophes and hyphens survive only inside a word
_WORD_RE = re.compile(r"[a-z0-9]+(?:['-][a-z0-9]+)*")


def tokenize(text: str) -> list[str]:
    """Lowercase tokens, split on non-alphanumerics except intra-word ' and -."""
    return _WORD_RE.findall(text.lower())


def content_tokens(text: str) -> list[str]:
    """Tokens with stop words removed; the stream terms are built from."""
    return [t for t in tokenize(text) if t not in STOP_WORDS]


def terms_of(text: str) -> list[str]:
    """Unigrams and bigrams over the stop-word-filtered token stream.

    Bigrams join adjacent surviving tokens with '-', so "dream of dad"
    yields the bigram "dream-dad".
    """
    tokens = content_tokens(text)
    out = list(tokens)
    out.extend(f"{a}-{b}" for a, b in zip(tokens, tokens[1:]))
    return out
