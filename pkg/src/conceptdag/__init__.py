"""conceptdag: organize flat lists of extracted strings into navigable DAGs."""

from .dag import (
    ConceptDag,
    ConceptNode,
    Member,
    Origin,
    add_head_roots,
    build_dag,
    merge_nodes,
    reachable_inputs,
    would_create_cycle,
)
from .embedding import RemoteProvider, TrigramProvider, VectorsFileProvider
from .errors import (
    AnnotationError,
    ConceptDagError,
    MergeRejectedError,
    ParseError,
    ProviderError,
    ResourceError,
    StageError,
    UnsupportedVersionError,
)
from .grouping import EquivalenceSet, group
from .ontology import Ontology, load_ontology
from .pipeline import PipelineConfig, PipelineResult, make_provider, run_pipeline
from .refine import (
    EntryPointConfig,
    NavigationResult,
    choose_representative,
    collapse_single_child,
    display_order,
    prune_children,
    select_entry_points,
)
from .semantic import MergeConfig, merge_ontology_synonyms, merge_semantic, node_vector
from .spans import AnnotatedSpan, TokenAnnotation, expand, expand_all, find_head
from .taxonomy import TaxonomyConfig, add_taxonomic_nodes, choose_label, governing_concepts, link_nodes
from .textnorm import (
    LemmaClassIndex,
    Lexicon,
    build_class_index,
    lemmatize,
    load_lexicon,
    normalize_text,
    to_bag,
)

__version__ = "0.1.0"
