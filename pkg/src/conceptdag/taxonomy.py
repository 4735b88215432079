"""Ontology linking and taxonomic hierarchy nodes.

Nodes are linked to concepts by exact lexical match; concepts governing at
least two DAG nodes become hierarchy nodes (or extra edges when the concept
already has a node), with labels chosen by embedding similarity to the
governed nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dag import ConceptDag, Member, Origin
from .embedding import EmbeddingProvider, cosine, unit
from .ontology import Concept, Ontology
from .semantic import node_vector

import numpy as np


@dataclass(frozen=True)
class TaxonomyConfig:
    max_ancestor_depth: int = 3
    min_governed: int = 2

    def __post_init__(self) -> None:
        if self.max_ancestor_depth < 1:
            raise ValueError("max_ancestor_depth must be positive")
        if self.min_governed < 2:
            raise ValueError("min_governed must be at least 2")


def link_nodes(dag: ConceptDag, ontology: Ontology) -> dict[int, str]:
    """Map node id -> concept id via exact normalized member-name matches."""
    links: dict[int, str] = {}
    for node_id in sorted(dag.nodes):
        hits: set[str] = set()
        for member in dag.nodes[node_id].members:
            hits |= ontology.name_index.get(member.normalized, frozenset())
        if hits:
            links[node_id] = min(hits)
    return links


def governing_concepts(
    links: dict[int, str], ontology: Ontology, config: TaxonomyConfig
) -> list[tuple[str, frozenset[int]]]:
    """Concepts governing >= min_governed linked nodes, with their governed sets."""
    governed: dict[str, set[int]] = {}
    for node_id, concept_id in links.items():
        governed.setdefault(concept_id, set()).add(node_id)
        for ancestor in ontology.ancestors_within(concept_id, config.max_ancestor_depth):
            governed.setdefault(ancestor, set()).add(node_id)
    return [
        (cid, frozenset(nodes))
        for cid, nodes in sorted(governed.items())
        if len(nodes) >= config.min_governed
    ]


def choose_label(
    concept: Concept,
    governed_ids: frozenset[int],
    dag: ConceptDag,
    provider: EmbeddingProvider,
) -> str:
    """Synonym with the highest mean cosine to the governed nodes' vectors."""
    names = concept.names()
    if len(names) == 1:
        return names[0]
    vectors = [
        node_vector(dag.nodes[nid], provider)
        for nid in sorted(governed_ids)
        if dag.nodes[nid].members
    ]
    best: tuple[float, int, str] | None = None
    for name in names:
        vec = unit(np.asarray(provider.embed([name])[0], dtype=np.float64))
        score = float(np.mean([cosine(vec, v) for v in vectors])) if vectors else 0.0
        key = (-score, len(name), name)
        if best is None or key < best:
            best = key
    return best[2]


def add_taxonomic_nodes(
    dag: ConceptDag,
    ontology: Ontology,
    links: dict[int, str],
    provider: EmbeddingProvider,
    config: TaxonomyConfig,
) -> ConceptDag:
    """Materialize governing concepts as hierarchy nodes/edges above their nodes."""
    in_dag: dict[str, int] = {}
    for node_id, concept_id in links.items():
        if concept_id not in in_dag or node_id < in_dag[concept_id]:
            in_dag[concept_id] = node_id

    for concept_id, governed in governing_concepts(links, ontology, config):
        existing = in_dag.get(concept_id)
        if existing is not None:
            source = existing
        else:
            label = choose_label(ontology.concepts[concept_id], governed, dag, provider)
            node = dag.new_node([Member(label, 0, False)], frozenset(), Origin.TAXONOMIC)
            source = node.id
            node.representative = label
            if dag.root is not None:
                dag.add_edge(dag.root, source)
        for target in sorted(governed):
            if target == source or target not in dag.nodes:
                continue
            if dag.has_path(source, target):
                continue
            if dag.has_path(target, source):
                continue  # edge would close a cycle
            dag.add_edge(source, target)
    return dag
