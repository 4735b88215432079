from __future__ import annotations

import json

import pytest

from conceptdag.dag import ConceptDag, Member, Origin, add_head_roots, build_dag
from conceptdag.embedding import TrigramProvider
from conceptdag.errors import ParseError
from conceptdag.grouping import group
from conceptdag.ontology import load_ontology
from conceptdag.spans import AnnotatedSpan
from conceptdag.taxonomy import (
    TaxonomyConfig,
    add_taxonomic_nodes,
    choose_label,
    governing_concepts,
    link_nodes,
)
from conceptdag.textnorm import Lexicon

from conftest import FakeProvider, make_index


def write_ontology(tmp_path, records):
    path = tmp_path / "ontology.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    return path


def respiratory_ontology(tmp_path):
    return load_ontology(
        write_ontology(
            tmp_path,
            [
                {"id": "C002", "preferred": "pneumonia", "synonyms": [], "parents": ["C010"]},
                {"id": "C003", "preferred": "pneumothorax", "synonyms": [], "parents": ["C010"]},
                {"id": "C010", "preferred": "respiratory diseases", "synonyms": [], "parents": []},
            ],
        )
    )


def rooted_dag(texts, lexicon=None):
    lexicon = lexicon or Lexicon()
    spans = [AnnotatedSpan(text=t) for t in texts]
    index = make_index(texts, lexicon)
    dag = build_dag(group(spans, lexicon, index))
    add_head_roots(dag, spans, lexicon, index)
    return dag


def node_by_member(dag, text):
    return next(n for n in dag.nodes.values() if any(m.text == text for m in n.members))


class TestOntologyLoad:
    def test_name_index_covers_synonyms(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [{"id": "C1", "preferred": "Myocardial Infarction", "synonyms": ["heart attack"], "parents": []}],
            )
        )
        assert onto.name_index["myocardial infarction"] == {"C1"}
        assert onto.name_index["heart attack"] == {"C1"}

    def test_unknown_parent_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_ontology(
                write_ontology(tmp_path, [{"id": "C1", "preferred": "x", "parents": ["nope"]}])
            )

    def test_cyclic_parents_rejected(self, tmp_path):
        with pytest.raises(ParseError):
            load_ontology(
                write_ontology(
                    tmp_path,
                    [
                        {"id": "A", "preferred": "a", "parents": ["B"]},
                        {"id": "B", "preferred": "b", "parents": ["A"]},
                    ],
                )
            )

    def test_ancestors_within_depth(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "D", "preferred": "d", "parents": ["C"]},
                    {"id": "C", "preferred": "c", "parents": ["B"]},
                    {"id": "B", "preferred": "b", "parents": ["A"]},
                    {"id": "A", "preferred": "a", "parents": []},
                ],
            )
        )
        assert onto.ancestors_within("D", 1) == {"C"}
        assert onto.ancestors_within("D", 2) == {"C", "B"}
        assert onto.ancestors_within("D", 9) == {"C", "B", "A"}


class TestLinkNodes:
    def test_exact_match(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia"])
        links = link_nodes(dag, onto)
        node = node_by_member(dag, "pneumonia")
        assert links == {node.id: "C002"}

    def test_no_entry_unlinked(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["crushing chest pain"])
        assert link_nodes(dag, onto) == {}

    def test_linked_via_any_member(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [{"id": "C1", "preferred": "myocardial infarction", "synonyms": [], "parents": []}],
            )
        )
        dag = ConceptDag()
        node = dag.new_node(
            [Member("MI", 4, True), Member("myocardial infarction", 2, True)],
            frozenset({"mi"}),
            Origin.INPUT,
        )
        assert link_nodes(dag, onto) == {node.id: "C1"}

    def test_ambiguity_resolved_by_smallest_id(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "C9", "preferred": "pneumonia", "synonyms": [], "parents": []},
                    {"id": "C2", "preferred": "pneumonia", "synonyms": [], "parents": []},
                ],
            )
        )
        dag = rooted_dag(["pneumonia"])
        node = node_by_member(dag, "pneumonia")
        assert link_nodes(dag, onto)[node.id] == "C2"


class TestGoverningConcepts:
    def test_shared_ancestor_governs_both(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "pneumothorax"])
        links = link_nodes(dag, onto)
        governing = governing_concepts(links, onto, TaxonomyConfig())
        assert len(governing) == 1
        cid, governed = governing[0]
        assert cid == "C010"
        assert governed == frozenset(links.keys())

    def test_single_governed_excluded(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "fracture"])
        links = link_nodes(dag, onto)
        assert governing_concepts(links, onto, TaxonomyConfig()) == []

    def test_depth_cap_limits_govern(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "L1", "preferred": "pneumonia", "parents": ["L2"]},
                    {"id": "L2", "preferred": "lung disease", "parents": ["L3"]},
                    {"id": "L3", "preferred": "disease", "parents": []},
                    {"id": "M1", "preferred": "pneumothorax", "parents": ["L3"]},
                ],
            )
        )
        dag = rooted_dag(["pneumonia", "pneumothorax"])
        links = link_nodes(dag, onto)
        shallow = governing_concepts(links, onto, TaxonomyConfig(max_ancestor_depth=1))
        assert [c for c, _ in shallow] == []
        deep = governing_concepts(links, onto, TaxonomyConfig(max_ancestor_depth=2))
        assert [c for c, _ in deep] == ["L3"]

    def test_four_governed_nodes(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "CV", "preferred": "cardiovascular disease", "parents": []},
                    {"id": "C1", "preferred": "heart disease", "parents": ["CV"]},
                    {"id": "C2", "preferred": "ischemia", "parents": ["CV"]},
                    {"id": "C3", "preferred": "hypotension", "parents": ["CV"]},
                    {"id": "C4", "preferred": "bleeding", "parents": ["CV"]},
                ],
            )
        )
        dag = rooted_dag(["heart disease", "ischemia", "hypotension", "bleeding"])
        links = link_nodes(dag, onto)
        governing = governing_concepts(links, onto, TaxonomyConfig())
        assert len(governing) == 1
        assert len(governing[0][1]) == 4


class TestChooseLabel:
    def test_single_synonym(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "pneumothorax"])
        label = choose_label(onto.concepts["C010"], frozenset(), dag, TrigramProvider())
        assert label == "respiratory diseases"

    def test_textually_closer_synonym_wins(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {
                        "id": "CV",
                        "preferred": "cardiovascular disease",
                        "synonyms": ["CVD"],
                        "parents": [],
                    }
                ],
            )
        )
        dag = rooted_dag(["cardiovascular disorder", "vascular disease"])
        governed = frozenset(
            n.id for n in dag.nodes.values() if n.origin is Origin.INPUT
        )
        label = choose_label(onto.concepts["CV"], governed, dag, TrigramProvider())
        assert label == "cardiovascular disease"

    def test_equal_scores_shorter_string_wins(self):
        from conceptdag.ontology import Concept

        concept = Concept(id="X", preferred="long label", synonyms=("tie",), parents=())
        provider = FakeProvider({"long label": [1.0, 0.0], "tie": [1.0, 0.0], "m": [1.0, 0.0]})
        dag = ConceptDag()
        node = dag.new_node([Member("m", 1, True)], frozenset({"m"}), Origin.INPUT)
        label = choose_label(concept, frozenset({node.id}), dag, provider)
        assert label == "tie"


class TestAddTaxonomicNodes:
    def test_new_taxonomic_node_added(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "pneumothorax", "fracture"])
        links = link_nodes(dag, onto)
        add_taxonomic_nodes(dag, onto, links, TrigramProvider(), TaxonomyConfig())
        tax = next(n for n in dag.nodes.values() if n.origin is Origin.TAXONOMIC)
        assert tax.representative == "respiratory diseases"
        kids = {node_by_member(dag, "pneumonia").id, node_by_member(dag, "pneumothorax").id}
        assert dag.children[tax.id] == kids
        assert dag.root in dag.parents[tax.id]

    def test_existing_concept_node_gains_edges(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "R", "preferred": "respiratory diseases", "parents": []},
                    {"id": "P1", "preferred": "pneumonia", "parents": ["R"]},
                    {"id": "P2", "preferred": "pneumothorax", "parents": ["R"]},
                ],
            )
        )
        dag = rooted_dag(["respiratory diseases", "pneumonia", "pneumothorax"])
        links = link_nodes(dag, onto)
        before = len(dag.nodes)
        add_taxonomic_nodes(dag, onto, links, TrigramProvider(), TaxonomyConfig())
        assert len(dag.nodes) == before  # no new node; edges only
        resp = node_by_member(dag, "respiratory diseases")
        assert node_by_member(dag, "pneumonia").id in dag.children[resp.id]
        assert node_by_member(dag, "pneumothorax").id in dag.children[resp.id]

    def test_no_duplicate_edge_when_path_exists(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "pneumothorax"])
        links = link_nodes(dag, onto)
        add_taxonomic_nodes(dag, onto, links, TrigramProvider(), TaxonomyConfig())
        edges_before = dag.edges
        add_taxonomic_nodes(dag, links=link_nodes(dag, onto), ontology=onto, provider=TrigramProvider(), config=TaxonomyConfig())
        assert dag.edges == edges_before

    def test_cycle_closing_edge_skipped(self, tmp_path):
        onto = load_ontology(
            write_ontology(
                tmp_path,
                [
                    {"id": "G", "preferred": "broad", "parents": []},
                    {"id": "A", "preferred": "alpha entry", "parents": ["G"]},
                    {"id": "B", "preferred": "beta entry", "parents": ["G"]},
                ],
            )
        )
        dag = ConceptDag()
        broad = dag.new_node([Member("broad", 1, True)], frozenset({"broad"}), Origin.INPUT)
        alpha = dag.new_node([Member("alpha entry", 1, True)], frozenset({"alpha"}), Origin.INPUT)
        beta = dag.new_node([Member("beta entry", 1, True)], frozenset({"beta"}), Origin.INPUT)
        root = dag.new_node([], frozenset(), Origin.ROOT)
        dag.root = root.id
        dag.add_edge(root.id, alpha.id)
        dag.add_edge(alpha.id, broad.id)  # broad sits BELOW alpha
        dag.add_edge(root.id, beta.id)
        links = link_nodes(dag, onto)
        add_taxonomic_nodes(dag, onto, links, TrigramProvider(), TaxonomyConfig())
        # edge broad->alpha would close a cycle and is skipped; broad->beta added
        assert alpha.id not in dag.children[broad.id]
        assert beta.id in dag.children[broad.id]
        assert dag.is_acyclic()

    def test_idempotent(self, tmp_path):
        onto = respiratory_ontology(tmp_path)
        dag = rooted_dag(["pneumonia", "pneumothorax", "fracture"])
        add_taxonomic_nodes(dag, onto, link_nodes(dag, onto), TrigramProvider(), TaxonomyConfig())
        nodes_before, edges_before = set(dag.nodes), dag.edges
        add_taxonomic_nodes(dag, onto, link_nodes(dag, onto), TrigramProvider(), TaxonomyConfig())
        assert set(dag.nodes) == nodes_before
        assert dag.edges == edges_before

    def test_min_governed_validated(self):
        with pytest.raises(ValueError):
            TaxonomyConfig(min_governed=1)
