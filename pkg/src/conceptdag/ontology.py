"""Ontology subset: concept records with synonyms and parent links.

The file format is a neutral export (one JSON object per line), not a raw
UMLS release; users export whatever licensed source they have access to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ResourceError
from .textnorm import normalize_text


@dataclass(frozen=True)
class Concept:
    id: str
    preferred: str
    synonyms: tuple[str, ...]
    parents: tuple[str, ...]

    def names(self) -> list[str]:
        out = [self.preferred]
        for s in self.synonyms:
            if s not in out:
                out.append(s)
        return out


@dataclass
class Ontology:
    concepts: dict[str, Concept] = field(default_factory=dict)
    name_index: dict[str, frozenset[str]] = field(default_factory=dict)

    def ancestors_within(self, concept_id: str, max_depth: int) -> set[str]:
        """Ancestor concept ids within max_depth parent hops (excludes self)."""
        out: set[str] = set()
        frontier = {concept_id}
        for _ in range(max_depth):
            nxt: set[str] = set()
            for cid in frontier:
                for parent in self.concepts[cid].parents:
                    if parent not in out:
                        out.add(parent)
                        nxt.add(parent)
            if not nxt:
                break
            frontier = nxt
        return out


def empty_ontology() -> Ontology:
    return Ontology()


def load_ontology(path: str | Path) -> Ontology:
    """Load and validate the JSONL concept file; parent links must form a DAG."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResourceError(f"cannot read ontology file {path}: {exc}") from exc

    concepts: dict[str, Concept] = {}
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", line=lineno, path=str(path))
        if not isinstance(record, dict) or "id" not in record or "preferred" not in record:
            raise ParseError("record needs 'id' and 'preferred'", line=lineno, path=str(path))
        cid = str(record["id"])
        if cid in concepts:
            raise ParseError(f"duplicate concept id {cid!r}", line=lineno, path=str(path))
        concepts[cid] = Concept(
            id=cid,
            preferred=str(record["preferred"]),
            synonyms=tuple(str(s) for s in record.get("synonyms", [])),
            parents=tuple(str(p) for p in record.get("parents", [])),
        )

    for concept in concepts.values():
        for parent in concept.parents:
            if parent not in concepts:
                raise ParseError(
                    f"concept {concept.id!r} references unknown parent {parent!r}",
                    path=str(path),
                )
    _check_acyclic(concepts, path)

    index: dict[str, set[str]] = {}
    for concept in concepts.values():
        for name in concept.names():
            index.setdefault(normalize_text(name), set()).add(concept.id)
    return Ontology(
        concepts=concepts,
        name_index={k: frozenset(v) for k, v in index.items()},
    )


def _check_acyclic(concepts: dict[str, Concept], path: Path) -> None:
    state: dict[str, int] = {}  # 1 = visiting, 2 = done

    def visit(cid: str) -> None:
        state[cid] = 1
        for parent in concepts[cid].parents:
            mark = state.get(parent)
            if mark == 1:
                raise ParseError(f"cycle in concept parents at {cid!r}", path=str(path))
            if mark is None:
                visit(parent)
        state[cid] = 2

    for cid in concepts:
        if cid not in state:
            visit(cid)
