"""Lexical normalization: lexicon loading, lemmatization, and lemma-class bags.

A string becomes a "bag": the set of lemma classes of its content words,
after dropping stopwords, modal words and quantity words.  Lemma classes
are connected components over synonym links and small-edit-distance links,
so spelling variants ("disc"/"disk", "tumour"/"tumor") share a class.
"""

from __future__ import annotations

import re
import string
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ResourceError

LemmaBag = frozenset  # set of lemma-class ids (each id is the smallest member lemma)

STOPWORDS_FILE = "stopwords.txt"
MODALS_FILE = "modals.txt"
QUANTITIES_FILE = "quantities.txt"
LEMMAS_FILE = "lemmas.tsv"
SYNONYMS_FILE = "synonyms.tsv"

_NUMERAL = re.compile(r"\d+(?:\.\d+)?")
_EDGE_PUNCT = string.punctuation + "‘’“”–—"

# Suffix rules tried in order; first match wins.  (suffix, replacement, min word length)
_SUFFIX_RULES = (
    ("ies", "y", 0),
    ("ses", "s", 0),
    ("s", "", 4),
    ("ing", "", 7),  # remaining stem must keep length >= 4
    ("ed", "", 6),
)

_EDIT_LINK_MIN_LEN = 5


def normalize_text(text: str) -> str:
    """Lowercase and collapse internal whitespace; the canonical dedup key."""
    return " ".join(text.split()).lower()


def tokenize(text: str) -> list[str]:
    """Split on whitespace and strip edge punctuation; inner hyphens survive."""
    out = []
    for raw in text.split():
        tok = raw.strip(_EDGE_PUNCT)
        if tok:
            out.append(tok)
    return out


@dataclass
class Lexicon:
    """Immutable lexical resources; all entries lowercase."""

    stopwords: frozenset[str] = frozenset()
    modals: frozenset[str] = frozenset()
    quantities: frozenset[str] = frozenset()
    lemma_table: dict[str, str] = field(default_factory=dict)
    synonym_pairs: frozenset[tuple[str, str]] = frozenset()

    def is_filtered(self, token: str, lemma: str) -> bool:
        """True if the token (or its lemma) is a stopword, modal or quantity."""
        for form in (token, lemma):
            if form in self.stopwords or form in self.modals or form in self.quantities:
                return True
        return bool(_NUMERAL.fullmatch(token))


@dataclass
class LemmaClassIndex:
    """Partition of a lemma vocabulary into equivalence classes."""

    class_of: dict[str, str] = field(default_factory=dict)
    classes: dict[str, frozenset[str]] = field(default_factory=dict)

    def lookup(self, lemma: str) -> str:
        """Class id of a lemma; unseen lemmas are their own singleton class."""
        return self.class_of.get(lemma, lemma)


def _read_lines(path: Path) -> list[tuple[int, str]]:
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ResourceError(f"cannot read resource file {path}: {exc}") from exc
    lines = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        lines.append((lineno, stripped))
    return lines


def _load_word_set(path: Path) -> frozenset[str]:
    if not path.exists():
        return frozenset()
    return frozenset(text.lower() for _, text in _read_lines(path))


def load_lexicon(resource_directory: str | Path) -> Lexicon:
    """Load the resource directory; every file is optional and yields empty sets."""
    root = Path(resource_directory)
    if not root.is_dir():
        raise ResourceError(f"resource directory not found: {root}")

    stopwords = _load_word_set(root / STOPWORDS_FILE)
    modals = _load_word_set(root / MODALS_FILE)
    quantities = _load_word_set(root / QUANTITIES_FILE)

    lemma_table: dict[str, str] = {}
    lemmas_path = root / LEMMAS_FILE
    if lemmas_path.exists():
        for lineno, line in _read_lines(lemmas_path):
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ParseError("expected 'form<TAB>lemma'", line=lineno, path=str(lemmas_path))
            lemma_table[parts[0].strip().lower()] = parts[1].strip().lower()

    pairs: set[tuple[str, str]] = set()
    synonyms_path = root / SYNONYMS_FILE
    if synonyms_path.exists():
        for lineno, line in _read_lines(synonyms_path):
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
                raise ParseError("expected 'lemma<TAB>lemma'", line=lineno, path=str(synonyms_path))
            a, b = parts[0].strip().lower(), parts[1].strip().lower()
            if a != b:
                pairs.add((a, b))
                pairs.add((b, a))

    return Lexicon(
        stopwords=stopwords,
        modals=modals,
        quantities=quantities,
        lemma_table=lemma_table,
        synonym_pairs=frozenset(pairs),
    )


def lemmatize(word: str, lexicon: Lexicon) -> str:
    """Lemma of a word: table hit, else suffix rules, else the lowercased word."""
    lowered = word.lower()
    hit = lexicon.lemma_table.get(lowered)
    if hit is not None:
        return hit
    for suffix, replacement, min_len in _SUFFIX_RULES:
        if lowered.endswith(suffix) and len(lowered) >= max(min_len, len(suffix) + 1):
            return lowered[: -len(suffix)] + replacement
    return lowered


class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict[str, str] = {}

    def add(self, x: str) -> None:
        self.parent.setdefault(x, x)

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _edit_distance_links(vocabulary: set[str]) -> list[tuple[str, str]]:
    """Pairs at Levenshtein distance 1 where both lemmas have length >= 5."""
    eligible = sorted(w for w in vocabulary if len(w) >= _EDIT_LINK_MIN_LEN)
    links: list[tuple[str, str]] = []

    # Substitutions: same-length words sharing a one-hole pattern.
    buckets: dict[tuple[int, int, str, str], list[str]] = defaultdict(list)
    for w in eligible:
        for i in range(len(w)):
            buckets[(len(w), i, w[:i], w[i + 1 :])].append(w)
    for group in buckets.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                links.append((group[i], group[j]))

    # Insertions/deletions: deleting one char of the longer word hits the shorter.
    eligible_set = set(eligible)
    for w in eligible:
        if len(w) <= _EDIT_LINK_MIN_LEN:
            continue
        for i in range(len(w)):
            shorter = w[:i] + w[i + 1 :]
            if shorter in eligible_set:
                links.append((w, shorter))
    return links


def build_class_index(vocabulary: set[str], lexicon: Lexicon) -> LemmaClassIndex:
    """Partition the vocabulary by synonym links plus small-edit-distance links."""
    uf = _UnionFind()
    for lemma in vocabulary:
        uf.add(lemma)
    for a, b in lexicon.synonym_pairs:
        if a in vocabulary and b in vocabulary:
            uf.union(a, b)
    for a, b in _edit_distance_links(set(vocabulary)):
        uf.union(a, b)

    members: dict[str, set[str]] = defaultdict(set)
    for lemma in vocabulary:
        members[uf.find(lemma)].add(lemma)

    class_of: dict[str, str] = {}
    classes: dict[str, frozenset[str]] = {}
    for group in members.values():
        class_id = min(group)
        classes[class_id] = frozenset(group)
        for lemma in group:
            class_of[lemma] = class_id
    return LemmaClassIndex(class_of=class_of, classes=classes)


def to_bag(text: str, lexicon: Lexicon, index: LemmaClassIndex) -> LemmaBag:
    """Bag of lemma classes of the content words; empty if all tokens filtered."""
    classes: set[str] = set()
    for token in tokenize(text):
        lowered = token.lower()
        lemma = lemmatize(lowered, lexicon)
        if lexicon.is_filtered(lowered, lemma):
            continue
        classes.add(index.lookup(lemma))
    return frozenset(classes)


def vocabulary_of(texts: list[str], lexicon: Lexicon) -> set[str]:
    """All lemmas appearing in the texts; the input for build_class_index."""
    vocab: set[str] = set()
    for text in texts:
        for token in tokenize(text):
            vocab.add(lemmatize(token.lower(), lexicon))
    return vocab
