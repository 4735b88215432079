"""DAG refinement: greedy set-cover pruning of children, collapse of
single-child hierarchy nodes, entry-point selection, and display ordering.

Pruning keeps, for every node, a minimal-ish set of children through which
all previously reachable input strings stay reachable (greedy set cover;
the exact minimum is NP-hard).  Entry points are picked by an affinity
weighted marginal-gain loop; inputs not reachable from any entry point are
parked under a synthetic "other" node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dag import (
    ConceptDag,
    ConceptNode,
    Member,
    Origin,
    all_reachable_inputs,
)
from .embedding import EmbeddingProvider
from .semantic import node_vector
from .textnorm import normalize_text


@dataclass(frozen=True)
class EntryPointConfig:
    k: int = 50
    affinity_floor: float = 0.0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass
class NavigationResult:
    entry_points: list[int]
    other_node: int
    display_order: dict[int, list[int]] = field(default_factory=dict)


def choose_representative(node: ConceptNode) -> str:
    """Display string: input members first, then count, token length, lexicographic."""
    if node.representative is not None:
        return node.representative
    if not node.members:
        return "root" if node.origin is Origin.ROOT else ""
    return min(node.members, key=_representative_key).text


def _representative_key(member: Member) -> tuple:
    norm = member.normalized
    return (not member.is_input, -member.count, len(norm.split()), norm, member.text)


def _node_label(dag: ConceptDag, node_id: int) -> str:
    return normalize_text(choose_representative(dag.nodes[node_id]))


def prune_children(dag: ConceptDag) -> ConceptDag:
    """Per node, keep a greedy set cover of children; drop edges to the rest."""
    if dag.root is None:
        raise ValueError("dag must be rooted before pruning")
    reach = {k: set(v) for k, v in all_reachable_inputs(dag).items()}

    for parent in dag.topological_order():
        kids = dag.children[parent]
        if not kids:
            continue
        universe = reach[parent] - {parent}
        ranked = sorted(
            kids,
            key=lambda c: (-dag.nodes[c].total_count, _node_label(dag, c), c),
        )
        uncovered = set(universe)
        selected: set[int] = set()
        while uncovered:
            best = None
            best_gain = 0
            for child in ranked:
                if child in selected:
                    continue
                gain = len(reach[child] & uncovered)
                if gain > best_gain:
                    best, best_gain = child, gain
            if best is None:
                break
            selected.add(best)
            uncovered -= reach[best]
        for child in sorted(kids - selected):
            dag.remove_edge(parent, child)

    alive = dag.reachable_from_root()
    for node_id in sorted(set(dag.nodes) - alive):
        dag.remove_node(node_id)
    return dag


def collapse_single_child(dag: ConceptDag) -> ConceptDag:
    """Remove non-input, non-root nodes with exactly one child; reconnect parents."""
    changed = True
    while changed:
        changed = False
        for node_id in sorted(dag.nodes):
            if node_id == dag.root:
                continue
            node = dag.nodes[node_id]
            if node.is_input or len(dag.children[node_id]) != 1:
                continue
            (child,) = dag.children[node_id]
            for parent in sorted(dag.parents[node_id]):
                dag.add_edge(parent, child)
            dag.remove_node(node_id)
            changed = True
    return dag


def display_order(dag: ConceptDag) -> dict[int, list[int]]:
    """Per-node child order: reachable inputs desc, count desc, label, id."""
    reach = all_reachable_inputs(dag)
    order: dict[int, list[int]] = {}
    for node_id in sorted(dag.nodes):
        order[node_id] = sorted(
            dag.children[node_id],
            key=lambda c: (
                -len(reach[c]),
                -dag.nodes[c].total_count,
                _node_label(dag, c),
                c,
            ),
        )
    return order


def select_entry_points(
    dag: ConceptDag, provider: EmbeddingProvider, config: EntryPointConfig
) -> NavigationResult:
    """Affinity-weighted greedy selection of up to k entry nodes, plus "other"."""
    if dag.root is None:
        raise ValueError("dag must be rooted before entry selection")

    reach = all_reachable_inputs(dag)
    input_ids = sorted(nid for nid, node in dag.nodes.items() if node.is_input)
    input_col = {nid: i for i, nid in enumerate(input_ids)}
    candidates = sorted(nid for nid in dag.nodes if nid != dag.root)

    entry_points: list[int] = []
    covered_ids: set[int] = set()

    if candidates and input_ids:
        m = len(input_ids)
        n = len(candidates)
        dim = None
        cand_vectors = []
        for nid in candidates:
            vec = node_vector(dag.nodes[nid], provider)
            dim = vec.size if dim is None else dim
            cand_vectors.append(vec)
        vc = np.stack(cand_vectors)
        vin = np.stack([node_vector(dag.nodes[nid], provider) for nid in input_ids])
        affinity = np.maximum(vc @ vin.T, config.affinity_floor)

        reach_mask = np.zeros((n, m), dtype=bool)
        for row, nid in enumerate(candidates):
            for target in reach[nid]:
                reach_mask[row, input_col[target]] = True

        scores = (affinity * reach_mask).sum(axis=1)
        reach_sizes = reach_mask.sum(axis=1)
        labels = [_node_label(dag, nid) for nid in candidates]
        available = np.ones(n, dtype=bool)
        covered = np.zeros(m, dtype=bool)

        for _ in range(config.k):
            if not available.any():
                break
            live = np.where(available)[0]
            best_score = scores[live].max()
            if covered.all() and best_score <= 0.0:
                break
            tied = [int(i) for i in live if scores[i] == best_score]
            tied.sort(key=lambda i: (-int(reach_sizes[i]), labels[i], candidates[i]))
            pick = tied[0]
            entry_points.append(candidates[pick])
            available[pick] = False
            weights = affinity[pick] * reach_mask[pick]
            scores = scores - (reach_mask @ weights) * available
            covered |= reach_mask[pick]

        covered_ids = {input_ids[i] for i in range(m) if covered[i]}

    other = dag.new_node([], frozenset(), Origin.ROOT)
    other.representative = "other"
    dag.add_edge(dag.root, other.id)
    for nid in sorted(set(input_ids) - covered_ids):
        dag.add_edge(other.id, nid)

    return NavigationResult(
        entry_points=entry_points,
        other_node=other.id,
        display_order=display_order(dag),
    )
