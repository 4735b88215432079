"""Dataset store: content-addressed build registry with immutable snapshots.

A dataset is identified by the digest of (input bytes, config, resource
files).  Builds run in background threads; artifacts are written to a
temporary file and renamed into place, so readers only ever observe
finished snapshots.  Re-posting an input+config that already built (or is
building) returns the existing dataset.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .io import DagDocument, document_from_result, load_dag, parse_input_text, serialize_dag
from .ontology import Ontology, empty_ontology
from .pipeline import PipelineConfig, make_provider, run_pipeline


@dataclass
class DatasetRecord:
    dataset_id: str
    name: str
    digest: str
    status: str  # pending | running | done | failed
    created_at: float
    config: dict = field(default_factory=dict)
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


class DatasetStore:
    """Directory-backed registry; one writer per dataset, many readers."""

    def __init__(
        self,
        root: str | Path,
        lexicon,
        ontology: Ontology | None = None,
        resource_digest: str = "",
    ):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.lexicon = lexicon
        self.ontology = ontology or empty_ontology()
        self.resource_digest = resource_digest
        self._lock = threading.Lock()
        self._documents: dict[str, DagDocument] = {}

    # -- registry ----------------------------------------------------------

    def _meta_path(self, dataset_id: str) -> Path:
        return self.root / dataset_id / "meta.json"

    def _dag_path(self, dataset_id: str) -> Path:
        return self.root / dataset_id / "dag.json"

    def _write_meta(self, record: DatasetRecord) -> None:
        directory = self.root / record.dataset_id
        directory.mkdir(parents=True, exist_ok=True)
        tmp = directory / "meta.json.tmp"
        tmp.write_text(json.dumps(record.as_dict(), sort_keys=True), encoding="utf-8")
        tmp.replace(self._meta_path(record.dataset_id))

    def get(self, dataset_id: str) -> DatasetRecord | None:
        path = self._meta_path(dataset_id)
        if not path.exists():
            return None
        data = json.loads(path.read_text(encoding="utf-8"))
        return DatasetRecord(**data)

    def list(self) -> list[DatasetRecord]:
        records = []
        for meta in sorted(self.root.glob("*/meta.json")):
            data = json.loads(meta.read_text(encoding="utf-8"))
            records.append(DatasetRecord(**data))
        records.sort(key=lambda r: (r.created_at, r.dataset_id))
        return records

    def document(self, dataset_id: str) -> DagDocument | None:
        """The immutable built artifact, cached after first load."""
        with self._lock:
            cached = self._documents.get(dataset_id)
        if cached is not None:
            return cached
        record = self.get(dataset_id)
        if record is None or record.status != "done":
            return None
        doc = load_dag(self._dag_path(dataset_id))
        with self._lock:
            self._documents[dataset_id] = doc
        return doc

    # -- builds ------------------------------------------------------------

    def digest_of(self, input_text: str, config: PipelineConfig) -> str:
        payload = json.dumps(
            {
                "input": input_text,
                "config": config.as_dict(),
                "resources": self.resource_digest,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]

    def create_build(
        self,
        input_text: str,
        config: PipelineConfig,
        name: str = "",
        *,
        synchronous: bool = False,
    ) -> DatasetRecord:
        dataset_id = self.digest_of(input_text, config)
        with self._lock:
            existing = self.get(dataset_id)
            if existing is not None and existing.status != "failed":
                return existing
            record = DatasetRecord(
                dataset_id=dataset_id,
                name=name or dataset_id,
                digest=dataset_id,
                status="pending",
                created_at=time.time(),
                config=config.as_dict(),
            )
            self._write_meta(record)
        if synchronous:
            self._run_build(record, input_text, config)
        else:
            thread = threading.Thread(
                target=self._run_build, args=(record, input_text, config), daemon=True
            )
            thread.start()
        return self.get(dataset_id) or record

    def _run_build(self, record: DatasetRecord, input_text: str, config: PipelineConfig) -> None:
        record.status = "running"
        self._write_meta(record)
        try:
            spans = parse_input_text(input_text)
            provider = make_provider(config)
            result = run_pipeline(spans, self.lexicon, self.ontology, provider, config)
            doc = document_from_result(result, config)
            directory = self.root / record.dataset_id
            tmp = directory / "dag.json.tmp"
            tmp.write_text(serialize_dag(doc), encoding="utf-8")
            tmp.replace(self._dag_path(record.dataset_id))
            record.status = "done"
            self._write_meta(record)
        except Exception as exc:
            record.status = "failed"
            record.error = str(exc)
            self._write_meta(record)


def resource_digest(paths: list[Path]) -> str:
    h = hashlib.sha256()
    for path in sorted(p for p in paths if p and p.exists()):
        h.update(path.name.encode("utf-8"))
        h.update(path.read_bytes())
    return h.hexdigest()[:16]
