"""File formats: input records, target lists, and DAG serialization.

Input files are either JSONL ({"text", "count"?, "tokens"?} per line) or raw
text (one string per line, count 1, no annotations); the mode is sniffed
from the first non-blank line.  Serialized DAGs are a single versioned JSON
document that round-trips losslessly, including the stage trace and the
lemma vocabulary needed to rebuild the class index at evaluation time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dag import ConceptDag, ConceptNode, Member, Origin
from .errors import AnnotationError, ParseError, UnsupportedVersionError
from .pipeline import PipelineConfig, PipelineResult
from .refine import NavigationResult
from .spans import AnnotatedSpan, TokenAnnotation, validate_token_tree
from .textnorm import normalize_text

FORMAT_VERSION = 1


def parse_input(path: str | Path) -> list[AnnotatedSpan]:
    """Parse an input file into spans; duplicate texts fold their counts."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read input file: {exc}", path=str(path))
    return parse_input_text(raw, label=str(path))


def parse_input_text(raw: str, label: str = "<input>") -> list[AnnotatedSpan]:
    """Parse input records from text; JSONL or one raw string per line."""
    lines = raw.splitlines()
    jsonl = False
    for line in lines:
        if line.strip():
            jsonl = line.lstrip().startswith("{")
            break

    merged: dict[str, dict] = {}
    order: list[str] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if jsonl:
            text, count, tokens = _parse_record(line, lineno, label)
        else:
            text, count, tokens = line.strip(), 1, None
        key = normalize_text(text)
        if not key:
            raise ParseError("record has empty text", line=lineno, path=label)
        entry = merged.get(key)
        if entry is None:
            merged[key] = {"text": text, "count": count, "tokens": tokens}
            order.append(key)
        else:
            entry["count"] += count
            if entry["tokens"] is None and tokens is not None:
                entry["tokens"] = tokens

    return [
        AnnotatedSpan(
            text=merged[k]["text"],
            count=merged[k]["count"],
            is_input=True,
            tokens=merged[k]["tokens"],
        )
        for k in order
    ]


def _parse_record(line: str, lineno: int, path: str):
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", line=lineno, path=path)
    if not isinstance(record, dict) or "text" not in record:
        raise ParseError("record must be an object with 'text'", line=lineno, path=path)
    text = str(record["text"])
    count = record.get("count", 1)
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ParseError(f"count must be an integer >= 1, got {count!r}", line=lineno, path=path)

    tokens = None
    if record.get("tokens") is not None:
        raw_tokens = record["tokens"]
        if not isinstance(raw_tokens, list) or not raw_tokens:
            raise ParseError("tokens must be a nonempty list", line=lineno, path=path)
        parsed = []
        for t in raw_tokens:
            if not isinstance(t, dict) or "form" not in t or "head" not in t:
                raise ParseError("token needs 'form' and 'head'", line=lineno, path=path)
            head = t["head"]
            if not isinstance(head, int) or isinstance(head, bool):
                raise ParseError("token head must be an integer", line=lineno, path=path)
            parsed.append(
                TokenAnnotation(
                    form=str(t["form"]),
                    head=head,
                    lemma=t.get("lemma"),
                    pos=t.get("pos"),
                )
            )
        tokens = tuple(parsed)
        joined = " ".join(t.form for t in tokens)
        if joined != " ".join(text.split()):
            raise AnnotationError(
                f"token forms {joined!r} do not spell the text {text!r}",
                line=lineno,
                path=path,
            )
        try:
            validate_token_tree(tokens)
        except AnnotationError as exc:
            raise AnnotationError(str(exc), line=lineno, path=path)
    return text, count, tokens


def load_targets(path: str | Path) -> list[str]:
    """Target strings, one per line; blank lines and '#' comments ignored."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read targets file: {exc}", path=str(path))
    targets = []
    for line in raw.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            targets.append(stripped)
    return targets


@dataclass
class DagDocument:
    dag: ConceptDag
    nav: NavigationResult
    config: dict = field(default_factory=dict)
    trace: list[dict] = field(default_factory=list)
    vocabulary: list[str] = field(default_factory=list)


def serialize_dag(doc: DagDocument) -> str:
    """Canonical JSON text of a finished build; byte-stable for equal inputs."""
    dag, nav = doc.dag, doc.nav
    payload = {
        "format_version": FORMAT_VERSION,
        "config": doc.config,
        "root": dag.root,
        "nodes": [
            {
                "id": node.id,
                "origin": node.origin.value,
                "representative": node.representative,
                "bag": sorted(node.bag),
                "members": [
                    {"text": m.text, "count": m.count, "is_input": m.is_input}
                    for m in node.members
                ],
            }
            for _, node in sorted(dag.nodes.items())
        ],
        "edges": sorted([p, c] for p, kids in dag.children.items() for c in kids),
        "entry_points": list(nav.entry_points),
        "other_node": nav.other_node,
        "display_order": {str(nid): kids for nid, kids in sorted(nav.display_order.items())},
        "vocabulary": list(doc.vocabulary),
        "trace": doc.trace,
    }
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def write_dag(doc: DagDocument, path: str | Path) -> None:
    Path(path).write_text(serialize_dag(doc), encoding="utf-8")


def load_dag(path: str | Path) -> DagDocument:
    """Inverse of serialize_dag; refuses unknown format versions."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read dag file: {exc}", path=str(path))
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid dag file: {exc}", path=str(path))
    if not isinstance(payload, dict):
        raise ParseError("dag file must contain a JSON object", path=str(path))
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported dag format version {version!r} (expected {FORMAT_VERSION})",
            path=str(path),
        )

    dag = ConceptDag()
    try:
        for record in payload["nodes"]:
            node_id = int(record["id"])
            node = ConceptNode(
                id=node_id,
                members=[
                    Member(str(m["text"]), int(m["count"]), bool(m["is_input"]))
                    for m in record["members"]
                ],
                bag=frozenset(str(c) for c in record["bag"]),
                origin=Origin(record["origin"]),
                representative=record.get("representative"),
            )
            dag.nodes[node_id] = node
            dag.children[node_id] = set()
            dag.parents[node_id] = set()
        dag._next_id = max(dag.nodes, default=-1) + 1
        for parent, child in payload["edges"]:
            dag.add_edge(int(parent), int(child))
        dag.root = payload["root"]
        nav = NavigationResult(
            entry_points=[int(n) for n in payload["entry_points"]],
            other_node=int(payload["other_node"]),
            display_order={
                int(nid): [int(c) for c in kids]
                for nid, kids in payload["display_order"].items()
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed dag file: {exc}", path=str(path))

    return DagDocument(
        dag=dag,
        nav=nav,
        config=payload.get("config", {}),
        trace=payload.get("trace", []),
        vocabulary=[str(v) for v in payload.get("vocabulary", [])],
    )


def document_from_result(result: PipelineResult, config: PipelineConfig) -> DagDocument:
    """Bundle a PipelineResult for serialization."""
    return DagDocument(
        dag=result.dag,
        nav=result.nav,
        config=config.as_dict(),
        trace=[r.as_dict() for r in result.trace],
        vocabulary=list(result.vocabulary),
    )
