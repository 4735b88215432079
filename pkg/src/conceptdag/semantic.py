"""Semantic node merging: sibling merges at t1, parent-child merges at t2,
then merges of ontology-listed synonym nodes.

Both embedding passes batch all member texts up front, so a provider failure
aborts the stage before the graph is touched.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dag import ConceptDag, ConceptNode, merge_nodes, would_create_cycle
from .embedding import EmbeddingProvider, cosine, unit
from .ontology import Ontology


@dataclass(frozen=True)
class MergeConfig:
    t1: float = 0.9
    t2: float = 0.95

    def __post_init__(self) -> None:
        if not (0.0 < self.t1 <= self.t2 <= 1.0):
            raise ValueError(f"thresholds must satisfy 0 < t1 <= t2 <= 1, got {self.t1}, {self.t2}")


def node_vector(node: ConceptNode, provider: EmbeddingProvider) -> np.ndarray:
    """Unit-normalized mean of the member-string vectors; cached on the node."""
    if not node.members:
        raise ValueError(f"node {node.id} has no members to embed")
    if node.vector is None:
        vectors = provider.embed([m.text for m in node.members])
        node.vector = unit(np.mean(vectors, axis=0))
    return node.vector


def _warm_vectors(dag: ConceptDag, provider: EmbeddingProvider) -> None:
    texts = sorted({m.text for node in dag.nodes.values() for m in node.members})
    if texts:
        provider.embed(texts)
    for node in dag.nodes.values():
        if node.members:
            node_vector(node, provider)


def _node_sim(dag: ConceptDag, provider: EmbeddingProvider, a: int, b: int) -> float:
    na, nb = dag.nodes[a], dag.nodes[b]
    if not na.members or not nb.members:
        return 0.0
    return cosine(node_vector(na, provider), node_vector(nb, provider))


def _merge_child_pairs(
    dag: ConceptDag, parent: int, provider: EmbeddingProvider, t1: float
) -> int:
    """Merge qualifying child pairs of a node until fixpoint; returns merge count."""
    merged = 0
    while True:
        kids = sorted(dag.children[parent], key=lambda n: (dag.nodes[n].display_text(), n))
        hit = None
        for i in range(len(kids)):
            for j in range(i + 1, len(kids)):
                a, b = kids[i], kids[j]
                if _node_sim(dag, provider, a, b) >= t1 and not would_create_cycle(dag, a, b):
                    hit = (a, b)
                    break
            if hit:
                break
        if hit is None:
            return merged
        merge_nodes(dag, *hit)
        merged += 1


def merge_semantic(dag: ConceptDag, provider: EmbeddingProvider, config: MergeConfig) -> ConceptDag:
    """Two passes: sibling merges at t1 in DFS preorder, then parent-child at t2."""
    if dag.root is None:
        raise ValueError("dag must be rooted before semantic merging")
    _warm_vectors(dag, provider)

    visited: set[int] = set()

    def visit(node_id: int) -> None:
        visited.add(node_id)
        _merge_child_pairs(dag, node_id, provider, config.t1)
        for child in sorted(
            dag.children[node_id], key=lambda n: (dag.nodes[n].display_text(), n)
        ):
            if child not in visited and child in dag.nodes:
                visit(child)

    visit(dag.root)

    snapshot = sorted(
        ((p, c) for p, kids in dag.children.items() for c in kids),
        key=lambda e: (
            dag.nodes[e[0]].display_text(),
            dag.nodes[e[1]].display_text(),
            e[0],
            e[1],
        ),
    )
    alias: dict[int, int] = {}

    def resolve(nid: int) -> int:
        while nid in alias:
            nid = alias[nid]
        return nid

    for p, c in snapshot:
        p, c = resolve(p), resolve(c)
        if p == c or p not in dag.nodes or c not in dag.nodes:
            continue
        if p == dag.root or c not in dag.children[p]:
            continue
        if _node_sim(dag, provider, p, c) >= config.t2 and not would_create_cycle(dag, p, c):
            kept = merge_nodes(dag, p, c)
            alias[p if kept != p else c] = kept
    return dag


def merge_ontology_synonyms(dag: ConceptDag, ontology: Ontology) -> ConceptDag:
    """Merge nodes sharing an ontology concept; cycles forced shut are cut open.

    When a forced merge closes a cycle, every edge pointing from a descendant
    of the merged node back into it is deleted, which restores acyclicity
    while preserving downward navigation.
    """
    alias: dict[int, int] = {}

    def resolve(nid: int) -> int:
        while nid in alias:
            nid = alias[nid]
        return nid

    concept_nodes: dict[str, set[int]] = {}
    for node in dag.nodes.values():
        for member in node.members:
            for concept_id in ontology.name_index.get(member.normalized, ()):
                concept_nodes.setdefault(concept_id, set()).add(node.id)

    for concept_id in sorted(concept_nodes):
        ids = sorted({resolve(n) for n in concept_nodes[concept_id]})
        ids = [n for n in ids if n in dag.nodes]
        while len(ids) > 1:
            a, b = ids[0], ids[1]
            forced = would_create_cycle(dag, a, b)
            kept = merge_nodes(dag, a, b, force=True)
            alias[a if kept != a else b] = kept
            if forced:
                _cut_back_edges(dag, kept)
            ids = sorted({resolve(n) for n in ids if resolve(n) in dag.nodes})
    return dag


def _cut_back_edges(dag: ConceptDag, node_id: int) -> None:
    descendants = dag.descendants(node_id)
    for parent in sorted(dag.parents[node_id] & descendants):
        dag.remove_edge(parent, node_id)
