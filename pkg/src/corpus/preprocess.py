"""Tweet text preprocessing: URL stripping, tokenization, stopwords, stemming."""

import re
from functools import lru_cache
from importlib import resources
from typing import FrozenSet, List

from nltk.stem.porter import PorterStemmer
from nltk.tokenize import RegexpTokenizer

from ..config import config

URL_PATTERN = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
MENTION_PATTERN = re.compile(config.MENTION_PATTERN)

# Mentions first so "@bob" survives punctuation stripping; apostrophes and underscores split words
_tokenizer = RegexpTokenizer(r"@\w+|[^\W_]+")
_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)


@lru_cache(maxsize=1)
def load_stopwords() -> FrozenSet[str]:
    """English stopword list shipped with the package."""
    text = resources.files("src.corpus").joinpath("data/stopwords.txt").read_text(encoding="utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


@lru_cache(maxsize=100_000)
def stem(token: str) -> str:
    """Porter stem, repeated until stable so that stems are fixed points."""
    current = token
    for _ in range(10):
        stemmed = _stemmer.stem(current)
        if stemmed == current:
            break
        current = stemmed
    return current


def strip_urls(text: str) -> str:
    return URL_PATTERN.sub(" ", text)


def extract_mentions(text: str) -> List[str]:
    """Lowercased @-handles (without the @) in order of appearance."""
    return [m[1:].lower() for m in MENTION_PATTERN.findall(strip_urls(text))]


def preprocess(text: str) -> List[str]:
    """
    Turn a raw tweet into stemmed content tokens.

    Mentions are kept verbatim as ``@handle`` tokens. Stopwords are removed
    both before and after stemming, so the output is stable under a second
    pass over ``" ".join(tokens)``.

    Args:
        text: Raw tweet text

    Returns:
        List of tokens
    """
    if not text:
        return []

    stopwords = load_stopwords()
    tokens = []
    for token in _tokenizer.tokenize(strip_urls(text).lower()):
        if token.startswith("@"):
            tokens.append(token)
            continue
        if token in stopwords:
            continue
        stemmed = stem(token)
        if stemmed and stemmed not in stopwords:
            tokens.append(stemmed)
    return tokens
