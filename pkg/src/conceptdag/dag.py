"""The concept DAG and its graph primitives.

Nodes wrap equivalence sets (plus induced head, taxonomic and root nodes);
edges express the specificity order between lemma bags.  All later stages
(semantic merging, taxonomy enrichment, pruning, entry selection) mutate a
single ConceptDag through the operations here, which keep it acyclic.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import MergeRejectedError
from .grouping import EquivalenceSet
from .spans import AnnotatedSpan, find_head
from .textnorm import LemmaBag, LemmaClassIndex, Lexicon, lemmatize, normalize_text, tokenize


class Origin(str, Enum):
    INPUT = "input"
    SUBSTRING = "substring"
    HEAD = "head"
    TAXONOMIC = "taxonomic"
    ROOT = "root"


# Merge keeps the strongest origin so input status is never lost.
_ORIGIN_RANK = {
    Origin.INPUT: 0,
    Origin.TAXONOMIC: 1,
    Origin.HEAD: 2,
    Origin.SUBSTRING: 3,
    Origin.ROOT: 4,
}


@dataclass(frozen=True)
class Member:
    text: str
    count: int
    is_input: bool

    @property
    def normalized(self) -> str:
        return normalize_text(self.text)


def _member_key(m: Member) -> tuple:
    return (not m.is_input, -m.count, len(m.text), m.text)


@dataclass
class ConceptNode:
    id: int
    members: list[Member]
    bag: LemmaBag
    origin: Origin
    vector: np.ndarray | None = None
    representative: str | None = None

    @property
    def is_input(self) -> bool:
        return any(m.is_input for m in self.members)

    @property
    def total_count(self) -> int:
        return sum(m.count for m in self.members)

    def display_text(self) -> str:
        """Canonical label: preset representative, else the best member."""
        if self.representative is not None:
            return self.representative
        if not self.members:
            return "root" if self.origin is Origin.ROOT else ""
        return min(self.members, key=_member_key).text


class ConceptDag:
    """Mutable DAG of concept nodes; single writer, acyclic at all times."""

    def __init__(self) -> None:
        self.nodes: dict[int, ConceptNode] = {}
        self.children: dict[int, set[int]] = {}
        self.parents: dict[int, set[int]] = {}
        self.root: int | None = None
        self.merge_count = 0
        self._next_id = 0
        self._version = 0
        self._reach_cache: tuple[int, dict[int, frozenset[int]]] | None = None

    # -- basic structure ---------------------------------------------------

    @property
    def edges(self) -> set[tuple[int, int]]:
        return {(p, c) for p, kids in self.children.items() for c in kids}

    def edge_count(self) -> int:
        return sum(len(kids) for kids in self.children.values())

    def new_node(self, members: list[Member], bag: LemmaBag, origin: Origin) -> ConceptNode:
        node = ConceptNode(id=self._next_id, members=members, bag=bag, origin=origin)
        self._next_id += 1
        self.nodes[node.id] = node
        self.children[node.id] = set()
        self.parents[node.id] = set()
        self._touch()
        return node

    def add_edge(self, parent: int, child: int) -> bool:
        if parent == child or child in self.children[parent]:
            return False
        self.children[parent].add(child)
        self.parents[child].add(parent)
        self._touch()
        return True

    def remove_edge(self, parent: int, child: int) -> None:
        self.children[parent].discard(child)
        self.parents[child].discard(parent)
        self._touch()

    def remove_node(self, node_id: int) -> None:
        for p in list(self.parents[node_id]):
            self.children[p].discard(node_id)
        for c in list(self.children[node_id]):
            self.parents[c].discard(node_id)
        del self.nodes[node_id], self.children[node_id], self.parents[node_id]
        self._touch()

    def _touch(self) -> None:
        self._version += 1

    # -- queries -----------------------------------------------------------

    def is_acyclic(self) -> bool:
        indeg = {n: len(self.parents[n]) for n in self.nodes}
        queue = deque(n for n, d in indeg.items() if d == 0)
        seen = 0
        while queue:
            n = queue.popleft()
            seen += 1
            for c in self.children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    queue.append(c)
        return seen == len(self.nodes)

    def topological_order(self) -> list[int]:
        indeg = {n: len(self.parents[n]) for n in self.nodes}
        queue = sorted(n for n, d in indeg.items() if d == 0)
        order: list[int] = []
        heap = deque(queue)
        while heap:
            n = heap.popleft()
            order.append(n)
            for c in sorted(self.children[n]):
                indeg[c] -= 1
                if indeg[c] == 0:
                    heap.append(c)
        if len(order) != len(self.nodes):
            raise ValueError("graph contains a cycle")
        return order

    def descendants(self, node_id: int) -> set[int]:
        out: set[int] = set()
        stack = [node_id]
        while stack:
            cur = stack.pop()
            for c in self.children[cur]:
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out

    def has_path(self, src: int, dst: int) -> bool:
        if src == dst:
            return True
        seen = {src}
        stack = [src]
        while stack:
            cur = stack.pop()
            for c in self.children[cur]:
                if c == dst:
                    return True
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def reachable_from_root(self) -> set[int]:
        if self.root is None:
            return set()
        out = {self.root}
        stack = [self.root]
        while stack:
            cur = stack.pop()
            for c in self.children[cur]:
                if c not in out:
                    out.add(c)
                    stack.append(c)
        return out


def reachable_inputs(dag: ConceptDag, node_id: int) -> frozenset[int]:
    """Ids of input nodes reachable from the node (itself included if input)."""
    if node_id not in dag.nodes:
        raise ValueError(f"unknown node id {node_id}")
    cache = dag._reach_cache
    if cache is None or cache[0] != dag._version:
        cache = (dag._version, {})
        dag._reach_cache = cache
    table = cache[1]
    if node_id not in table:
        _fill_reachable(dag, table)
    return table[node_id]


def _fill_reachable(dag: ConceptDag, table: dict[int, frozenset[int]]) -> None:
    for nid in reversed(dag.topological_order()):
        if nid in table:
            continue
        acc: set[int] = set()
        if dag.nodes[nid].is_input:
            acc.add(nid)
        for c in dag.children[nid]:
            acc |= table[c]
        table[nid] = frozenset(acc)


def all_reachable_inputs(dag: ConceptDag) -> dict[int, frozenset[int]]:
    """Reachable-input sets for every node, computed in one bottom-up pass."""
    cache = dag._reach_cache
    if cache is not None and cache[0] == dag._version and len(cache[1]) == len(dag.nodes):
        return cache[1]
    table: dict[int, frozenset[int]] = {}
    _fill_reachable(dag, table)
    dag._reach_cache = (dag._version, table)
    return table


def build_dag(sets: list[EquivalenceSet]) -> ConceptDag:
    """Hasse diagram of strict bag containment over the equivalence sets.

    Empty-bag sets become isolated nodes: the empty bag is vacuously contained
    in everything, so treating it as comparable would make degenerate strings
    ancestors of the whole graph.
    """
    dag = ConceptDag()
    for s in sets:
        members = [Member(m.text, m.count, m.is_input) for m in s.members]
        origin = Origin.INPUT if s.is_input else Origin.SUBSTRING
        dag.new_node(members, s.bag, origin)

    by_class: dict[str, set[int]] = defaultdict(set)
    for node in dag.nodes.values():
        for cls in node.bag:
            by_class[cls].add(node.id)

    order = sorted(dag.nodes.values(), key=lambda n: (len(n.bag), n.id))
    for node in order:
        if not node.bag:
            continue
        candidates: set[int] = set()
        for cls in node.bag:
            candidates |= by_class[cls]
        ancestors = [
            dag.nodes[c]
            for c in candidates
            if c != node.id
            and len(dag.nodes[c].bag) < len(node.bag)
            and dag.nodes[c].bag < node.bag
        ]
        ancestors.sort(key=lambda n: (-len(n.bag), n.id))
        parents: list[ConceptNode] = []
        for cand in ancestors:
            if not any(cand.bag < kept.bag for kept in parents):
                parents.append(cand)
        for p in parents:
            dag.add_edge(p.id, node.id)
    return dag


def head_class_of(
    span: AnnotatedSpan, lexicon: Lexicon, index: LemmaClassIndex
) -> tuple[str, str] | None:
    """(class id, head word form) for a span's head, or None if filtered out."""
    if span.tokens:
        idx = find_head(span, lexicon)
        form = span.tokens[idx].form
    else:
        words = tokenize(span.text)
        if not words:
            return None
        form = words[find_head(span, lexicon)]
    # Multi-word head forms (single-token entity annotations) keep their bag.
    lemma_classes = []
    for token in tokenize(form):
        lowered = token.lower()
        lemma = lemmatize(lowered, lexicon)
        if not lexicon.is_filtered(lowered, lemma):
            lemma_classes.append(index.lookup(lemma))
    if len(lemma_classes) != 1:
        return None
    return lemma_classes[0], form


def add_head_roots(
    dag: ConceptDag,
    spans: list[AnnotatedSpan],
    lexicon: Lexicon,
    index: LemmaClassIndex,
) -> ConceptDag:
    """Add head-word nodes above their mentions, then a single super-root."""
    heads: dict[str, str] = {}
    for span in spans:
        hit = head_class_of(span, lexicon, index)
        if hit is None:
            continue
        cls, form = hit
        form = form.lower()
        if cls not in heads or form < heads[cls]:
            heads[cls] = form

    by_bag: dict[LemmaBag, int] = {}
    for node in dag.nodes.values():
        by_bag.setdefault(node.bag, node.id)

    by_class: dict[str, set[int]] = defaultdict(set)
    for node in dag.nodes.values():
        for cls in node.bag:
            by_class[cls].add(node.id)

    for cls in sorted(heads):
        bag = frozenset([cls])
        head_id = by_bag.get(bag)
        if head_id is None:
            node = dag.new_node([Member(heads[cls], 0, False)], bag, Origin.HEAD)
            head_id = node.id
            by_bag[bag] = head_id
            by_class[cls].add(head_id)
        for target in sorted(by_class[cls]):
            if target == head_id:
                continue
            tbag = dag.nodes[target].bag
            blocked = any(
                other != target
                and other != head_id
                and dag.nodes[other].bag < tbag
                for other in by_class[cls]
            )
            if not blocked:
                dag.add_edge(head_id, target)

    root = dag.new_node([], frozenset(), Origin.ROOT)
    dag.root = root.id
    for nid in sorted(dag.nodes):
        if nid != root.id and not dag.parents[nid]:
            dag.add_edge(root.id, nid)
    return dag


def would_create_cycle(dag: ConceptDag, a: int, b: int) -> bool:
    """True iff merging a and b closes a cycle: a path of length >= 2 between them."""
    if a == b:
        raise ValueError("cannot merge a node with itself")
    for src, dst in ((a, b), (b, a)):
        starts = dag.children[src] - {dst}
        seen = set(starts)
        stack = list(starts)
        while stack:
            cur = stack.pop()
            if cur == dst:
                return True
            for c in dag.children[cur]:
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
    return False


def merge_nodes(dag: ConceptDag, a: int, b: int, *, force: bool = False) -> int:
    """Merge b into a (keeping the smaller id); rewires all edges.

    With force=True a cycle-closing merge is allowed; the caller must then
    restore acyclicity (see the ontology-merge cycle removal).
    """
    if a == b:
        raise ValueError("cannot merge a node with itself")
    if not force and would_create_cycle(dag, a, b):
        raise MergeRejectedError(f"merging {a} and {b} would create a cycle")
    keep, drop = (a, b) if a < b else (b, a)
    keep_node, drop_node = dag.nodes[keep], dag.nodes[drop]

    seen = {m.normalized for m in keep_node.members}
    for m in drop_node.members:
        if m.normalized not in seen:
            seen.add(m.normalized)
            keep_node.members.append(m)

    keep_node.bag = keep_node.bag | drop_node.bag
    if _ORIGIN_RANK[drop_node.origin] < _ORIGIN_RANK[keep_node.origin]:
        keep_node.origin = drop_node.origin
    keep_node.vector = None
    keep_node.representative = None

    new_parents = (dag.parents[keep] | dag.parents[drop]) - {keep, drop}
    new_children = (dag.children[keep] | dag.children[drop]) - {keep, drop}
    for p in list(dag.parents[drop]):
        dag.remove_edge(p, drop)
    for c in list(dag.children[drop]):
        dag.remove_edge(drop, c)
    for p in list(dag.parents[keep]):
        dag.remove_edge(p, keep)
    for c in list(dag.children[keep]):
        dag.remove_edge(keep, c)
    dag.remove_node(drop)
    for p in new_parents:
        dag.add_edge(p, keep)
    for c in new_children:
        dag.add_edge(keep, c)

    dag.merge_count += 1
    dag._touch()
    return keep
