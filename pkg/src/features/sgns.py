"""Negative-sampling logistic loss shared by PV-DBOW and skip-gram training."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_expit

from .sampling import UnigramTable


def negative_sampling_loss(vec: np.ndarray, out_rows: np.ndarray, labels: np.ndarray) -> float:
    """
    Logistic loss of one input vector against a true row (label 1) and noise rows (label 0).

    Args:
        vec: Input vector, shape (d,)
        out_rows: Output vectors, shape (k + 1, d)
        labels: 1 for the true target, 0 for negatives
    """
    scores = out_rows @ vec
    return float(-np.sum(labels * log_expit(scores) + (1 - labels) * log_expit(-scores)))


def negative_sampling_grads(
    vec: np.ndarray,
    out_rows: np.ndarray,
    labels: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Gradients of :func:`negative_sampling_loss` w.r.t. ``vec`` and ``out_rows``."""
    g = expit(out_rows @ vec) - labels
    return g @ out_rows, np.outer(g, vec)


def draw_negatives(table: UnigramTable, rng: np.random.Generator, k: int, target: int) -> np.ndarray:
    """k noise indices; draws equal to the target are skipped."""
    if k <= 0:
        return np.empty(0, dtype=np.int64)
    drawn = table.draw(rng, k)
    return drawn[drawn != target]


def sgd_step(
    in_matrix: np.ndarray,
    row: int,
    out_matrix: np.ndarray,
    target: int,
    negatives: np.ndarray,
    lr: float,
    learn_out: bool = True
) -> None:
    """One in-place SGD update of ``in_matrix[row]`` (and the touched output rows)."""
    indices = np.concatenate(([target], negatives)).astype(np.int64)
    labels = np.zeros(indices.size)
    labels[0] = 1.0
    vec = in_matrix[row]
    out_rows = out_matrix[indices]

    grad_vec, grad_out = negative_sampling_grads(vec, out_rows, labels)
    if learn_out:
        np.add.at(out_matrix, indices, -lr * grad_out)
    in_matrix[row] -= lr * grad_vec


def linear_lr(lr_start: float, lr_end: float, done: int, total: int) -> float:
    """Learning rate decayed linearly from lr_start to lr_end over total steps."""
    if total <= 1:
        return lr_start
    frac = min(1.0, done / (total - 1))
    return lr_start + (lr_end - lr_start) * frac


def init_input_matrix(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    """Input vectors uniform in (-0.5/dim, 0.5/dim); output vectors start at zero."""
    return (rng.random((rows, dim)) - 0.5) / dim


def run_chunks(
    chunks: Sequence[Sequence],
    worker: Callable[[Sequence, int], None],
    workers: int
) -> None:
    """
    Run ``worker(chunk, chunk_index)`` over chunks.

    With more than one worker the chunks run on threads that update shared
    matrices without locks; results then depend on scheduling.
    """
    if workers <= 1 or len(chunks) <= 1:
        for i, chunk in enumerate(chunks):
            worker(chunk, i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(worker, chunks, range(len(chunks))))


def split_even(items: Sequence, parts: int) -> List[Sequence]:
    """Split a sequence into at most ``parts`` contiguous chunks."""
    parts = max(1, min(parts, len(items)))
    bounds = np.linspace(0, len(items), parts + 1).astype(int)
    return [items[bounds[i]:bounds[i + 1]] for i in range(parts)]
