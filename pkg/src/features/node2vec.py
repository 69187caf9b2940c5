"""Second-order biased random walks and skip-gram node embeddings."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from ..models import SkipGramConfig, WalkConfig
from ..utils.logger import logger
from ..validators import ValidationError
from .graph import MentionGraph
from .sampling import UnigramTable
from .sgns import draw_negatives, init_input_matrix, linear_lr, run_chunks, sgd_step, split_even

Walk = List[str]


@dataclass
class NodeEmbedding:
    """Node vectors; nodes never visited by a walk map to zeros."""

    nodes: List[str]
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def index(self) -> Dict[str, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    def vector(self, node: str) -> np.ndarray:
        i = self.index().get(node)
        return self.vectors[i].copy() if i is not None else np.zeros(self.dim)

    def matrix(self, nodes: Sequence[str]) -> np.ndarray:
        index = self.index()
        out = np.zeros((len(nodes), self.dim))
        for row, node in enumerate(nodes):
            i = index.get(node)
            if i is not None:
                out[row] = self.vectors[i]
        return out


def node2vec_walk(g: MentionGraph, start: str, cfg: WalkConfig, rng: np.random.Generator) -> Walk:
    """
    One walk from ``start``.

    The first step is weighted by edge weight; later steps weigh the edge to
    each neighbor x of the current node by 1/p if x is the previous node, 1 if
    x neighbors the previous node and 1/q otherwise.
    """
    walk = [start]
    while len(walk) < cfg.walk_length:
        cur = walk[-1]
        nbrs = g.neighbors(cur)
        if not nbrs:
            break
        if len(walk) == 1:
            table = g.node_alias(cur)
        else:
            table = g.edge_alias(walk[-2], cur, cfg.p, cfg.q)
        walk.append(nbrs[table.draw(rng)])
    return walk


def simulate_walks(g: MentionGraph, cfg: WalkConfig, workers: int = 1) -> List[Walk]:
    """
    ``walks_per_node`` walks from every non-isolated node.

    Each walk draws from its own generator seeded by (seed, node index, round),
    so the output is the same for any worker count.
    """
    nodes = g.nodes
    starts = [(r, i, node) for r in range(cfg.walks_per_node)
              for i, node in enumerate(nodes) if not g.is_isolated(node)]

    def run(task):
        r, i, node = task
        return node2vec_walk(g, node, cfg, np.random.default_rng([cfg.seed, i, r]))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            walks = list(pool.map(run, starts))
    else:
        walks = [run(task) for task in starts]

    logger.info(
        "node2vec",
        "walks_simulated",
        walks=len(walks),
        walk_length=cfg.walk_length,
        p=cfg.p,
        q=cfg.q
    )
    return walks


def _pairs_in_walk(length: int, window: int) -> int:
    pos = np.arange(length)
    return int(np.sum(np.minimum(window, pos) + np.minimum(window, length - 1 - pos)))


def train_node_embeddings(walks: Sequence[Walk], cfg: SkipGramConfig) -> NodeEmbedding:
    """
    Skip-gram with negative sampling over walks treated as sentences.

    Every node within ``cfg.window`` positions of a center node is a
    positive context; noise nodes follow the visit counts to the 3/4 power.
    A single worker is deterministic given ``cfg.seed``.

    Raises:
        ValidationError: If there are no walks
    """
    if not walks:
        raise ValidationError("Cannot train node embeddings without walks")

    nodes = sorted({node for walk in walks for node in walk})
    index = {node: i for i, node in enumerate(nodes)}
    sentences = [np.array([index[n] for n in walk], dtype=np.int64) for walk in walks]

    counts = np.zeros(len(nodes))
    for s in sentences:
        np.add.at(counts, s, 1)
    noise = UnigramTable(counts)

    rng = np.random.default_rng(cfg.seed)
    in_vectors = init_input_matrix(rng, len(nodes), cfg.dim)
    out_vectors = np.zeros((len(nodes), cfg.dim))

    pairs = [_pairs_in_walk(s.size, cfg.window) for s in sentences]
    pairs_per_epoch = int(sum(pairs))
    total_steps = cfg.epochs * pairs_per_epoch

    logger.info(
        "node2vec",
        "skipgram_started",
        nodes=len(nodes),
        walks=len(walks),
        dim=cfg.dim,
        epochs=cfg.epochs,
        workers=cfg.workers
    )

    for epoch in range(cfg.epochs):
        order = np.random.default_rng([cfg.seed, epoch]).permutation(len(sentences))
        chunks = split_even(order, cfg.workers)
        offsets = np.cumsum([0] + [sum(pairs[w] for w in chunk) for chunk in chunks])

        def train_chunk(chunk, chunk_index, epoch=epoch):
            chunk_rng = np.random.default_rng([cfg.seed, epoch, chunk_index])
            done = epoch * pairs_per_epoch + int(offsets[chunk_index])
            for w in chunk:
                sentence = sentences[w]
                for pos, center in enumerate(sentence):
                    lo, hi = max(0, pos - cfg.window), min(sentence.size, pos + cfg.window + 1)
                    for ctx_pos in range(lo, hi):
                        if ctx_pos == pos:
                            continue
                        context = int(sentence[ctx_pos])
                        lr = linear_lr(cfg.lr_start, cfg.lr_end, done, total_steps)
                        negatives = draw_negatives(noise, chunk_rng, cfg.negatives, context)
                        sgd_step(in_vectors, int(center), out_vectors, context, negatives, lr)
                        done += 1

        run_chunks(chunks, train_chunk, cfg.workers)
        logger.debug("node2vec", "epoch_completed", epoch=epoch + 1)

    logger.info("node2vec", "skipgram_completed", steps=total_steps)
    return NodeEmbedding(nodes=nodes, vectors=in_vectors)
