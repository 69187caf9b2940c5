"""Paragraph vectors, distributed bag-of-words variant, trained with negative sampling."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from ..models import PvdbowConfig, UserDocument, Vocabulary
from ..utils.logger import logger
from ..validators import ValidationError
from .sampling import UnigramTable
from .sgns import draw_negatives, init_input_matrix, linear_lr, run_chunks, sgd_step, split_even
from .text import DocumentLike, document_tokens, fit_vocabulary

Seed = Union[int, Sequence[int]]


@dataclass
class PvdbowModel:
    """Trained paragraph matrix D, output word matrix W and the noise table."""

    doc_vectors: np.ndarray
    word_vectors: np.ndarray
    vocab: Vocabulary
    noise: UnigramTable
    config: PvdbowConfig

    @property
    def dim(self) -> int:
        return self.doc_vectors.shape[1]


def _index_tokens(doc: DocumentLike, vocab: Vocabulary) -> np.ndarray:
    return np.array([vocab.terms[t] for t in document_tokens(doc) if t in vocab.terms], dtype=np.int64)


def train_pvdbow(
    docs: Sequence[DocumentLike],
    cfg: PvdbowConfig,
    vocab: Optional[Vocabulary] = None
) -> PvdbowModel:
    """
    Train paragraph vectors on the training documents.

    Each epoch visits the documents in a shuffled order and, per document,
    draws as many words uniformly from it as it has in-vocabulary tokens.
    Every (document, word) pair updates the paragraph vector and the touched
    output rows against the true word and ``cfg.negatives`` noise words.
    A single worker is deterministic given ``cfg.seed``.

    Args:
        docs: Training documents
        cfg: Hyperparameters
        vocab: Word index; fitted on ``docs`` with ``cfg.min_df`` when None

    Returns:
        PvdbowModel

    Raises:
        ValidationError: If the corpus or vocabulary is empty
    """
    if not docs:
        raise ValidationError("Cannot train paragraph vectors on an empty corpus")
    if vocab is None:
        vocab = fit_vocabulary(docs, cfg.min_df)
    if len(vocab) == 0:
        raise ValidationError("Cannot train paragraph vectors with an empty vocabulary")

    indexed = [_index_tokens(doc, vocab) for doc in docs]
    counts = np.zeros(len(vocab))
    for idx in indexed:
        np.add.at(counts, idx, 1)
    noise = UnigramTable(counts)

    rng = np.random.default_rng(cfg.seed)
    doc_vectors = init_input_matrix(rng, len(docs), cfg.dim)
    word_vectors = np.zeros((len(vocab), cfg.dim))

    tokens_per_epoch = int(sum(idx.size for idx in indexed))
    total_steps = cfg.epochs * tokens_per_epoch

    logger.info(
        "pvdbow",
        "training_started",
        documents=len(docs),
        vocabulary=len(vocab),
        dim=cfg.dim,
        epochs=cfg.epochs,
        workers=cfg.workers
    )

    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(len(docs))
        chunks = split_even(order, cfg.workers)
        offsets = np.cumsum([0] + [sum(indexed[d].size for d in chunk) for chunk in chunks])

        def train_chunk(chunk, chunk_index, epoch=epoch):
            chunk_rng = np.random.default_rng([cfg.seed, epoch, chunk_index])
            done = epoch * tokens_per_epoch + int(offsets[chunk_index])
            for d in chunk:
                words = indexed[d]
                if words.size == 0:
                    continue
                for w in chunk_rng.choice(words, size=words.size):
                    lr = linear_lr(cfg.lr_start, cfg.lr_end, done, total_steps)
                    negatives = draw_negatives(noise, chunk_rng, cfg.negatives, int(w))
                    sgd_step(doc_vectors, int(d), word_vectors, int(w), negatives, lr)
                    done += 1

        run_chunks(chunks, train_chunk, cfg.workers)
        logger.debug("pvdbow", "epoch_completed", epoch=epoch + 1)

    empty = [i for i, idx in enumerate(indexed) if idx.size == 0]
    if empty:
        doc_vectors[empty] = 0.0
        logger.warning("pvdbow", "empty_training_documents", count=len(empty))

    logger.info("pvdbow", "training_completed", steps=total_steps)
    return PvdbowModel(
        doc_vectors=doc_vectors, word_vectors=word_vectors, vocab=vocab, noise=noise, config=cfg
    )


def infer_paragraph(model: PvdbowModel, doc: DocumentLike, steps: int, seed: Seed) -> np.ndarray:
    """
    Fit a fresh paragraph vector for an unseen document against frozen word vectors.

    Args:
        model: Trained model
        doc: Document to embed
        steps: Passes over the document (each draws as many words as it has tokens)
        seed: Seed for initialization and sampling

    Returns:
        Vector of model.dim; zeros for a document with no known word
    """
    words = _index_tokens(doc, model.vocab)
    if words.size == 0:
        logger.warning("pvdbow", "empty_document_inferred")
        return np.zeros(model.dim)

    cfg = model.config
    rng = np.random.default_rng(seed)
    vec = init_input_matrix(rng, 1, model.dim)
    total = steps * words.size
    done = 0
    for _ in range(steps):
        for w in rng.choice(words, size=words.size):
            lr = linear_lr(cfg.lr_start, cfg.lr_end, done, total)
            negatives = draw_negatives(model.noise, rng, cfg.negatives, int(w))
            sgd_step(vec, 0, model.word_vectors, int(w), negatives, lr, learn_out=False)
            done += 1
    return vec[0]


def paragraph_matrix(model: PvdbowModel, docs: Sequence[UserDocument], train_ids: List[str]) -> np.ndarray:
    """
    Paragraph vectors for documents in order: trained rows for training users,
    inferred vectors for everyone else.

    Args:
        model: Model trained on the documents listed in ``train_ids`` (same order)
        docs: Documents to embed
        train_ids: User ids of the training documents, in training order
    """
    row_of = {user_id: i for i, user_id in enumerate(train_ids)}
    rows = np.zeros((len(docs), model.dim))
    inferred = 0
    for i, doc in enumerate(docs):
        if doc.user_id in row_of:
            rows[i] = model.doc_vectors[row_of[doc.user_id]]
        else:
            rows[i] = infer_paragraph(model, doc, model.config.infer_steps, [model.config.seed, i])
            inferred += 1
    logger.info("pvdbow", "paragraph_vectors_ready", rows=len(docs), inferred=inferred)
    return rows
