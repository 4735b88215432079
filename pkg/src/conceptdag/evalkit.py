"""Evaluation kit: DAG statistics, click-effort to reach targets (DAG vs a
frequency-ranked flat list), and coverage of a known-answer list.

Effort counts label reads plus expansion clicks: at each level the 1-based
position of the next node in the visible list is read, and every expansion
costs one click.  The oracle effort is the minimum over all paths from any
entry point (or the "other" node, which sits after the entry points).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dag import ConceptDag, all_reachable_inputs
from .refine import NavigationResult, choose_representative
from .spans import AnnotatedSpan
from .textnorm import LemmaClassIndex, Lexicon, normalize_text, to_bag


@dataclass(frozen=True)
class DagMetrics:
    node_count: int
    max_depth: int
    leaves_per_entry_mean: float
    leaves_per_entry_min: int
    leaves_per_entry_max: int
    depth_per_entry_mean: float
    depth_per_entry_min: int
    depth_per_entry_max: int
    children_mean: float
    children_min: int
    children_max: int
    children_variance: float


@dataclass(frozen=True)
class TargetEffort:
    target: str
    found: bool
    flat_effort: int | None = None
    dag_effort_oracle: int | None = None
    path: tuple[int, ...] = ()


@dataclass(frozen=True)
class CoverageReport:
    present_in_inputs: int
    reachable_from_entries: int
    total_targets: int


def graph_metrics(dag: ConceptDag, nav: NavigationResult) -> DagMetrics:
    """Statistics over entry points and internal nodes of the final DAG."""
    entries = list(nav.entry_points)
    node_count = len(dag.nodes)
    if not entries:
        return DagMetrics(node_count, 0, 0.0, 0, 0, 0.0, 0, 0, 0.0, 0, 0, 0.0)

    reach = all_reachable_inputs(dag)
    leaves = {
        nid for nid, node in dag.nodes.items() if node.is_input and not dag.children[nid]
    }

    longest: dict[int, int] = {nid: 0 for nid in dag.nodes}
    for nid in reversed(dag.topological_order()):
        for child in dag.children[nid]:
            longest[nid] = max(longest[nid], 1 + longest[child])

    leaf_counts = []
    depths = []
    for entry in entries:
        reachable = _descendants_inclusive(dag, entry)
        leaf_counts.append(len(reachable & leaves))
        depths.append(longest[entry])

    skip = {dag.root, nav.other_node}
    child_counts = [
        len(dag.children[nid])
        for nid in dag.nodes
        if nid not in skip and dag.children[nid]
    ]

    def stats(values: list[int]) -> tuple[float, int, int]:
        if not values:
            return 0.0, 0, 0
        return sum(values) / len(values), min(values), max(values)

    leaf_mean, leaf_min, leaf_max = stats(leaf_counts)
    depth_mean, depth_min, depth_max = stats(depths)
    child_mean, child_min, child_max = stats(child_counts)
    variance = (
        sum((c - child_mean) ** 2 for c in child_counts) / len(child_counts)
        if child_counts
        else 0.0
    )
    return DagMetrics(
        node_count=node_count,
        max_depth=max(depths) if depths else 0,
        leaves_per_entry_mean=leaf_mean,
        leaves_per_entry_min=leaf_min,
        leaves_per_entry_max=leaf_max,
        depth_per_entry_mean=depth_mean,
        depth_per_entry_min=depth_min,
        depth_per_entry_max=depth_max,
        children_mean=child_mean,
        children_min=child_min,
        children_max=child_max,
        children_variance=variance,
    )


def _descendants_inclusive(dag: ConceptDag, nid: int) -> set[int]:
    out = {nid}
    stack = [nid]
    while stack:
        cur = stack.pop()
        for c in dag.children[cur]:
            if c not in out:
                out.add(c)
                stack.append(c)
    return out


def match_target(
    dag: ConceptDag, target: str, lexicon: Lexicon, index: LemmaClassIndex
) -> set[int]:
    """Nodes whose bag equals the target's bag or whose member text matches it."""
    if not target.strip():
        raise ValueError("target must be nonempty")
    bag = to_bag(target, lexicon, index)
    norm = normalize_text(target)
    hits: set[int] = set()
    for nid, node in dag.nodes.items():
        if bag and node.bag == bag:
            hits.add(nid)
        elif any(m.normalized == norm for m in node.members):
            hits.add(nid)
    return hits


def ranked_inputs(spans: list[AnnotatedSpan]) -> list[AnnotatedSpan]:
    """The flat baseline: input spans by descending count, then lexicographic."""
    return sorted(
        (s for s in spans if s.is_input),
        key=lambda s: (-s.count, s.normalized),
    )


def flat_effort(
    targets: list[str],
    spans: list[AnnotatedSpan],
    lexicon: Lexicon,
    index: LemmaClassIndex,
) -> dict[str, int | None]:
    """1-based rank of the first input matching each target; None when absent."""
    ranking = ranked_inputs(spans)
    bags = [to_bag(s.text, lexicon, index) for s in ranking]
    out: dict[str, int | None] = {}
    for target in targets:
        tbag = to_bag(target, lexicon, index)
        tnorm = normalize_text(target)
        rank = None
        for i, span in enumerate(ranking, start=1):
            if span.normalized == tnorm or (tbag and bags[i - 1] == tbag):
                rank = i
                break
        out[target] = rank
    return out


def dag_effort(
    dag: ConceptDag, nav: NavigationResult, target_nodes: set[int]
) -> tuple[int | None, tuple[int, ...]]:
    """Minimal (effort, path) over all target nodes; (None, ()) when unreachable."""
    if not target_nodes:
        return None, ()

    order = nav.display_order
    best: dict[int, tuple[int, tuple[int, ...]]] = {}
    for position, entry in enumerate(nav.entry_points, start=1):
        if (entry not in best) or (position, (entry,)) < best[entry]:
            best[entry] = (position, (entry,))
    other_pos = len(nav.entry_points) + 1
    if nav.other_node in dag.nodes:
        best[nav.other_node] = (other_pos, (nav.other_node,))

    for nid in dag.topological_order():
        if nid not in best:
            continue
        cost, path = best[nid]
        for position, child in enumerate(order.get(nid, ()), start=1):
            candidate = (cost + 1 + position, path + (child,))
            if child not in best or candidate < best[child]:
                best[child] = candidate

    found = [best[t] for t in target_nodes if t in best]
    if not found:
        return None, ()
    effort, path = min(found)
    return effort, path


def coverage(
    dag: ConceptDag,
    nav: NavigationResult,
    targets: list[str],
    lexicon: Lexicon,
    index: LemmaClassIndex,
) -> CoverageReport:
    """How many targets exist in the DAG, and how many sit under entry points."""
    if not targets:
        raise ValueError("targets must be nonempty")
    entry_reach: set[int] = set()
    for entry in nav.entry_points:
        entry_reach |= _descendants_inclusive(dag, entry)

    present = 0
    reachable = 0
    for target in targets:
        nodes = match_target(dag, target, lexicon, index)
        if nodes:
            present += 1
            if nodes & entry_reach:
                reachable += 1
    return CoverageReport(
        present_in_inputs=present,
        reachable_from_entries=reachable,
        total_targets=len(targets),
    )


def component_report(trace) -> list[dict]:
    """Per-stage contribution rows: nodes added/merged, edges added/removed."""
    rows = []
    for report in trace:
        row = report.as_dict() if hasattr(report, "as_dict") else dict(report)
        rows.append(
            {
                "stage": row["stage"],
                "nodes_added": row.get("nodes_added", 0),
                "nodes_merged": row.get("nodes_merged", 0),
                "edges_added": row.get("edges_added", 0),
                "edges_removed": row.get("edges_removed", 0),
            }
        )
    return rows


def evaluate_targets(
    dag: ConceptDag,
    nav: NavigationResult,
    targets: list[str],
    spans: list[AnnotatedSpan],
    lexicon: Lexicon,
    index: LemmaClassIndex,
) -> list[TargetEffort]:
    """Per-target flat and DAG efforts with the arg-min DAG path."""
    flat = flat_effort(targets, spans, lexicon, index)
    reports = []
    for target in targets:
        nodes = match_target(dag, target, lexicon, index)
        effort, path = dag_effort(dag, nav, nodes)
        reports.append(
            TargetEffort(
                target=target,
                found=bool(nodes),
                flat_effort=flat[target],
                dag_effort_oracle=effort,
                path=path,
            )
        )
    return reports
