"""Weighted undirected @-mention graph over the users of interest."""

from collections import Counter, defaultdict
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import networkx as nx

from ..corpus.preprocess import extract_mentions
from ..models import UserDocument
from ..utils.logger import logger
from .sampling import AliasTable

Edge = Tuple[str, str]


def _edge(a: str, b: str) -> Edge:
    return (a, b) if a < b else (b, a)


class MentionGraph:
    """
    Users of interest joined by mention-derived integer weights.

    Neighbors are kept in sorted order so alias draws are reproducible.
    """

    def __init__(self, nodes: Iterable[str], weights: Dict[Edge, int]):
        self.graph = nx.Graph()
        self.graph.add_nodes_from(sorted(nodes))
        for (a, b), w in sorted(weights.items()):
            if a != b and w > 0:
                self.graph.add_edge(a, b, weight=int(w))
        self._node_alias: Dict[str, AliasTable] = {}
        self._edge_alias: Dict[Tuple[str, str, float, float], AliasTable] = {}

    @property
    def nodes(self) -> List[str]:
        return sorted(self.graph.nodes)

    def weight(self, a: str, b: str) -> int:
        data = self.graph.get_edge_data(a, b)
        return int(data["weight"]) if data else 0

    def edge_weights(self) -> Dict[Edge, int]:
        return {_edge(a, b): int(d["weight"]) for a, b, d in self.graph.edges(data=True)}

    def neighbors(self, node: str) -> List[str]:
        return sorted(self.graph.neighbors(node))

    def is_isolated(self, node: str) -> bool:
        return self.graph.degree(node) == 0

    def node_alias(self, node: str) -> AliasTable:
        """First-order table: neighbors weighted by edge weight."""
        if node not in self._node_alias:
            nbrs = self.neighbors(node)
            self._node_alias[node] = AliasTable([self.weight(node, x) for x in nbrs])
        return self._node_alias[node]

    def transition_weights(self, prev: str, cur: str, p: float, q: float) -> List[float]:
        """Unnormalized second-order weights over the sorted neighbors of ``cur``."""
        weights = []
        for x in self.neighbors(cur):
            w = self.weight(cur, x)
            if x == prev:
                weights.append(w / p)
            elif self.graph.has_edge(x, prev):
                weights.append(float(w))
            else:
                weights.append(w / q)
        return weights

    def edge_alias(self, prev: str, cur: str, p: float, q: float) -> AliasTable:
        key = (prev, cur, p, q)
        if key not in self._edge_alias:
            self._edge_alias[key] = AliasTable(self.transition_weights(prev, cur, p, q))
        return self._edge_alias[key]

    def export_edge_list(self, path: Path) -> None:
        """``user_a<TAB>user_b<TAB>weight`` per edge, sorted."""
        with open(path, "w", encoding="utf-8") as f:
            for (a, b), w in sorted(self.edge_weights().items()):
                f.write(f"{a}\t{b}\t{w}\n")


def mention_counts(docs: Sequence[UserDocument]) -> Dict[str, Counter]:
    """Per user, lowercased handle to number of mentions (self-mentions dropped)."""
    counts: Dict[str, Counter] = {}
    for doc in docs:
        own = doc.user_id.lower()
        c: Counter = Counter()
        for text in doc.raw_texts:
            c.update(h for h in extract_mentions(text) if h != own)
        counts[doc.user_id] = c
    return counts


def build_mention_graph(
    docs: Sequence[UserDocument],
    celebrity_threshold: int,
    prune_third_party_hubs: bool = True
) -> MentionGraph:
    """
    Build the mention graph over the documents' users.

    - Direct edge between two users of interest: total mentions in both directions.
    - Any account mentioned by several users of interest, whether or not it
      is a user of interest itself, adds, for each pair of them, the sum of their mention counts of
      it; contributions of several shared accounts accumulate on one edge.
      Accounts with more than ``celebrity_threshold`` distinct mentioners
      contribute no shared edges when ``prune_third_party_hubs`` is set.
    - Afterwards every user of interest with more than ``celebrity_threshold``
      distinct neighbors loses all incident edges.

    Handles match user ids case-insensitively.

    Args:
        docs: All documents (every split)
        celebrity_threshold: Maximum number of unique connections
        prune_third_party_hubs: Skip shared mentions of accounts above the threshold

    Returns:
        MentionGraph with every document's user as a node
    """
    users = sorted(doc.user_id for doc in docs)
    by_handle = {u.lower(): u for u in users}
    counts = mention_counts(docs)

    weights: Dict[Edge, int] = defaultdict(int)
    mentioners: Dict[str, Dict[str, int]] = defaultdict(dict)

    for user in users:
        for handle, n in counts[user].items():
            target = by_handle.get(handle)
            if target is not None and target != user:
                weights[_edge(user, target)] += n
            mentioners[handle][user] = n

    skipped_hubs = 0
    for handle in sorted(mentioners):
        who = mentioners[handle]
        if prune_third_party_hubs and len(who) > celebrity_threshold:
            skipped_hubs += 1
            continue
        for a, b in combinations(sorted(who), 2):
            weights[(a, b)] += who[a] + who[b]

    degree: Counter = Counter()
    for a, b in weights:
        degree[a] += 1
        degree[b] += 1
    celebrities = {u for u, d in degree.items() if d > celebrity_threshold}
    kept = {e: w for e, w in weights.items() if e[0] not in celebrities and e[1] not in celebrities}

    graph = MentionGraph(users, kept)
    logger.info(
        "mention_graph",
        "graph_built",
        nodes=graph.graph.number_of_nodes(),
        edges=graph.graph.number_of_edges(),
        celebrities=len(celebrities),
        third_party_hubs_skipped=skipped_hubs,
        isolated=sum(1 for u in users if graph.is_isolated(u))
    )
    return graph
