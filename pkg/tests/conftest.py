from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from conceptdag.embedding import TrigramProvider
from conceptdag.io import parse_input
from conceptdag.ontology import load_ontology
from conceptdag.pipeline import PipelineConfig, run_pipeline
from conceptdag.textnorm import Lexicon, build_class_index, load_lexicon, vocabulary_of

FIXTURES = Path(__file__).parent / "fixtures"
FIG2 = FIXTURES / "fig2"


@pytest.fixture(scope="session")
def fig2_lexicon():
    return load_lexicon(FIG2 / "resources")


@pytest.fixture(scope="session")
def fig2_spans():
    return parse_input(FIG2 / "input.jsonl")


@pytest.fixture(scope="session")
def fig2_ontology():
    return load_ontology(FIG2 / "ontology.jsonl")


@pytest.fixture(scope="session")
def fig2_result(fig2_spans, fig2_lexicon, fig2_ontology):
    config = PipelineConfig(k=5)
    return run_pipeline(fig2_spans, fig2_lexicon, fig2_ontology, TrigramProvider(), config)


@pytest.fixture()
def empty_lexicon():
    return Lexicon()


def make_index(texts, lexicon):
    return build_class_index(vocabulary_of(list(texts), lexicon), lexicon)


class FakeProvider:
    """Test provider with hand-assigned vectors per text."""

    def __init__(self, table: dict[str, list[float]], dimension: int | None = None):
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}
        self.dimension = dimension or len(next(iter(self.table.values())))

    def embed(self, texts):
        out = []
        for t in texts:
            if t not in self.table:
                raise KeyError(f"no vector for {t!r}")
            out.append(self.table[t])
        return out
