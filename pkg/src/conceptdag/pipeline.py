"""Pipeline orchestration: run the full build in paper order with stage
auditing, producing the final DAG, the navigation result, and a trace.

Stage order: expand -> group -> build_dag -> add_head_roots -> semantic
merge -> ontology-synonym merge -> taxonomic nodes -> prune -> collapse ->
entry points -> representatives/display order.  Individual stages can be
toggled off; failures surface as StageError and discard partial state.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from .dag import ConceptDag, add_head_roots, build_dag
from .embedding import EmbeddingProvider, RemoteProvider, TrigramProvider, VectorsFileProvider
from .errors import StageError
from .grouping import group
from .ontology import Ontology, empty_ontology
from .refine import (
    EntryPointConfig,
    NavigationResult,
    choose_representative,
    collapse_single_child,
    prune_children,
    select_entry_points,
)
from .semantic import MergeConfig, merge_ontology_synonyms, merge_semantic
from .spans import AnnotatedSpan, expand_all
from .taxonomy import TaxonomyConfig, add_taxonomic_nodes, link_nodes
from .textnorm import LemmaClassIndex, Lexicon, build_class_index, vocabulary_of


@dataclass(frozen=True)
class PipelineConfig:
    t1: float = 0.9
    t2: float = 0.95
    k: int = 50
    affinity_floor: float = 0.0
    max_ancestor_depth: int = 3
    min_governed: int = 2
    provider_kind: str = "trigram"  # trigram | vectors | remote
    provider_location: str | None = None
    expand_substrings: bool = True
    semantic_merge: bool = True
    ontology_merge: bool = True
    taxonomy: bool = True
    pruning: bool = True

    def merge_config(self) -> MergeConfig:
        return MergeConfig(t1=self.t1, t2=self.t2)

    def entry_config(self) -> EntryPointConfig:
        return EntryPointConfig(k=self.k, affinity_floor=self.affinity_floor)

    def taxonomy_config(self) -> TaxonomyConfig:
        return TaxonomyConfig(
            max_ancestor_depth=self.max_ancestor_depth, min_governed=self.min_governed
        )

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})


def make_provider(config: PipelineConfig) -> EmbeddingProvider:
    if config.provider_kind == "trigram":
        return TrigramProvider()
    if config.provider_kind == "vectors":
        if not config.provider_location:
            raise ValueError("vectors provider requires a file path")
        return VectorsFileProvider(config.provider_location)
    if config.provider_kind == "remote":
        if not config.provider_location:
            raise ValueError("remote provider requires a URL")
        return RemoteProvider(config.provider_location)
    raise ValueError(f"unknown provider kind: {config.provider_kind!r}")


@dataclass
class StageReport:
    stage: str
    nodes_added: int = 0
    nodes_merged: int = 0
    edges_added: int = 0
    edges_removed: int = 0
    duration_s: float = 0.0

    def as_dict(self) -> dict:
        # duration is wall-clock noise; keeping it out preserves byte-identical
        # serialization of equal builds
        out = asdict(self)
        out.pop("duration_s")
        return out


@dataclass
class PipelineResult:
    dag: ConceptDag
    nav: NavigationResult
    trace: list[StageReport]
    spans: list[AnnotatedSpan]
    lexicon: Lexicon
    index: LemmaClassIndex
    vocabulary: list[str]


class _Audit:
    def __init__(self, trace: list[StageReport]):
        self.trace = trace

    def run(self, stage: str, dag: ConceptDag | None, fn):
        nodes_before = len(dag.nodes) if dag else 0
        edges_before = dag.edge_count() if dag else 0
        merges_before = dag.merge_count if dag else 0
        started = time.perf_counter()
        try:
            result = fn()
        except Exception as exc:
            raise StageError(stage, exc) from exc
        report = StageReport(stage=stage, duration_s=time.perf_counter() - started)
        out_dag = result if isinstance(result, ConceptDag) else dag
        if out_dag is not None:
            merged = out_dag.merge_count - merges_before
            delta_nodes = len(out_dag.nodes) - nodes_before
            delta_edges = out_dag.edge_count() - edges_before
            report.nodes_merged = merged
            report.nodes_added = max(0, delta_nodes + merged)
            report.edges_added = max(0, delta_edges)
            report.edges_removed = max(0, -delta_edges)
            if not out_dag.is_acyclic():
                raise StageError(stage, ValueError("stage produced a cyclic graph"))
        self.trace.append(report)
        return result


def run_pipeline(
    spans: list[AnnotatedSpan],
    lexicon: Lexicon,
    ontology: Ontology | None,
    provider: EmbeddingProvider,
    config: PipelineConfig,
) -> PipelineResult:
    """Run all enabled stages over the input spans; deterministic end to end."""
    if not spans:
        raise ValueError("run_pipeline requires at least one input span")
    ontology = ontology if ontology is not None else empty_ontology()
    trace: list[StageReport] = []
    audit = _Audit(trace)

    if config.expand_substrings:
        expanded = audit.run("expansion", None, lambda: expand_all(spans, lexicon))
        trace[-1].nodes_added = sum(1 for s in expanded if not s.is_input)
    else:
        expanded = expand_all(spans, lexicon)
        expanded = [s for s in expanded if s.is_input]

    vocabulary = sorted(vocabulary_of([s.text for s in expanded], lexicon))
    index = build_class_index(set(vocabulary), lexicon)
    sets = audit.run("grouping", None, lambda: group(expanded, lexicon, index))

    dag = audit.run("dag_construction", None, lambda: build_dag(sets))
    trace[-1].nodes_added = len(dag.nodes)
    trace[-1].edges_added = dag.edge_count()

    audit.run("head_roots", dag, lambda: add_head_roots(dag, expanded, lexicon, index))

    if config.semantic_merge:
        audit.run(
            "semantic_merge",
            dag,
            lambda: merge_semantic(dag, provider, config.merge_config()),
        )
    if config.ontology_merge:
        audit.run("ontology_merge", dag, lambda: merge_ontology_synonyms(dag, ontology))
    if config.taxonomy:
        links = link_nodes(dag, ontology)
        audit.run(
            "taxonomy",
            dag,
            lambda: add_taxonomic_nodes(dag, ontology, links, provider, config.taxonomy_config()),
        )
    if config.pruning:
        audit.run("pruning", dag, lambda: collapse_single_child(prune_children(dag)))

    nav = audit.run(
        "entry_points",
        dag,
        lambda: select_entry_points(dag, provider, config.entry_config()),
    )

    for node in dag.nodes.values():
        node.representative = choose_representative(node)

    return PipelineResult(
        dag=dag,
        nav=nav,
        trace=trace,
        spans=expanded,
        lexicon=lexicon,
        index=index,
        vocabulary=vocabulary,
    )
