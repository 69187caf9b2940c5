"""TF-IDF view: vocabulary fitting and smoothed, l2-normalized term weights."""

from typing import Dict, List, Sequence, Union

import numpy as np
from scipy import sparse
from sklearn.feature_extraction.text import CountVectorizer, TfidfVectorizer
from sklearn.preprocessing import normalize

from ..models import UserDocument, Vocabulary
from ..utils.logger import logger
from ..validators import ValidationError

DocumentLike = Union[UserDocument, Sequence[str]]


def document_tokens(doc: DocumentLike) -> List[str]:
    return list(doc.tokens) if isinstance(doc, UserDocument) else list(doc)


def fit_vocabulary(docs: Sequence[DocumentLike], min_df: int) -> Vocabulary:
    """
    Build the term index from training documents.

    Terms kept are those contained in at least ``min_df`` documents; indices
    follow lexicographic term order. The idf of each term is
    ln((1 + n) / (1 + df)) + 1.

    Args:
        docs: Training documents only
        min_df: Minimum document frequency

    Returns:
        Vocabulary

    Raises:
        ValidationError: If the corpus is empty or min_df < 1
    """
    if min_df < 1:
        raise ValidationError(f"min_df must be at least 1, got {min_df}")
    if not docs:
        raise ValidationError("Cannot fit a vocabulary on an empty training corpus")

    vectorizer = TfidfVectorizer(
        analyzer=document_tokens,
        lowercase=False,
        min_df=min_df,
        smooth_idf=True,
        norm="l2",
        dtype=np.float64,
    )
    try:
        fitted = vectorizer.fit_transform(list(docs)).tocsc()
    except ValueError:
        # every term pruned, or no tokens at all
        logger.warning("text_features", "empty_vocabulary", documents=len(docs), min_df=min_df)
        return Vocabulary(n_documents=len(docs), min_df=min_df)

    terms = {term: int(i) for term, i in sorted(vectorizer.vocabulary_.items(), key=lambda item: item[1])}
    vocab = Vocabulary(
        terms=terms,
        document_frequency=np.diff(fitted.indptr).astype(int).tolist(),
        idf=vectorizer.idf_.tolist(),
        n_documents=len(docs),
        min_df=min_df,
    )
    logger.info("text_features", "vocabulary_fitted", terms=len(vocab), documents=len(docs), min_df=min_df)
    return vocab


def _weights(docs: Sequence[DocumentLike], vocab: Vocabulary) -> sparse.csr_matrix:
    if not len(vocab):
        return sparse.csr_matrix((len(docs), 0), dtype=np.float64)
    counts = CountVectorizer(analyzer=document_tokens, lowercase=False, vocabulary=vocab.terms)
    raw = counts.transform(list(docs)).astype(np.float64) @ sparse.diags(np.asarray(vocab.idf))
    matrix = normalize(sparse.csr_matrix(raw), norm="l2", copy=False)
    matrix.sort_indices()
    return matrix


def tfidf(doc: DocumentLike, vocab: Vocabulary) -> Dict[int, float]:
    """
    TF-IDF vector of one document as a sparse index to weight map.

    Raw in-document counts times idf, then l2-normalized.
    Out-of-vocabulary terms are ignored; no in-vocabulary term gives {}.
    """
    row = _weights([doc], vocab)
    return {int(i): float(w) for i, w in zip(row.indices, row.data) if w != 0.0}


def tfidf_matrix(docs: Sequence[DocumentLike], vocab: Vocabulary) -> sparse.csr_matrix:
    """Row-stacked TF-IDF vectors, shape (len(docs), len(vocab))."""
    matrix = _weights(docs, vocab)
    logger.info("text_features", "tfidf_computed", rows=matrix.shape[0], cols=matrix.shape[1], nnz=matrix.nnz)
    return matrix
