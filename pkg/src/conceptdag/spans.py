"""Input spans and granularity expansion.

Each maximal input string is expanded into its modification spans: the head
token plus any subset of its direct-modifier subtrees, provided the chosen
tokens are contiguous in the original order.  Unannotated spans expand to
just their head word.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import AnnotationError
from .textnorm import Lexicon, normalize_text, tokenize

MODIFIER_SUBSET_CAP = 10


@dataclass(frozen=True)
class TokenAnnotation:
    form: str
    head: int
    lemma: str | None = None
    pos: str | None = None


@dataclass(frozen=True)
class AnnotatedSpan:
    text: str
    count: int = 1
    is_input: bool = True
    tokens: tuple[TokenAnnotation, ...] | None = None

    @property
    def normalized(self) -> str:
        return normalize_text(self.text)


def validate_token_tree(tokens: tuple[TokenAnnotation, ...]) -> int:
    """Check the head links form a single tree; returns the root index."""
    n = len(tokens)
    roots = [i for i, t in enumerate(tokens) if t.head == -1]
    if len(roots) != 1:
        raise AnnotationError(f"expected exactly one root token, found {len(roots)}")
    for i, t in enumerate(tokens):
        if t.head != -1 and not (0 <= t.head < n):
            raise AnnotationError(f"token {i} head index {t.head} out of range")
        if t.head == i:
            raise AnnotationError(f"token {i} is its own head")
    # Walking up from every token must end at the root without revisits.
    for i in range(n):
        seen = set()
        cur = i
        while cur != -1:
            if cur in seen:
                raise AnnotationError(f"cyclic head links involving token {i}")
            seen.add(cur)
            cur = tokens[cur].head
    return roots[0]


def find_head(span: AnnotatedSpan, lexicon: Lexicon | None = None) -> int:
    """Head token index: the parse-tree root, or a last-content-word fallback."""
    if span.tokens:
        return validate_token_tree(span.tokens)
    words = tokenize(span.text)
    if not words:
        raise AnnotationError(f"span has no tokens: {span.text!r}")
    if lexicon is not None:
        for i in range(len(words) - 1, -1, -1):
            lowered = words[i].lower()
            if lowered not in lexicon.stopwords and lowered not in lexicon.modals:
                return i
    return len(words) - 1


def _subtree_indices(tokens: tuple[TokenAnnotation, ...], root: int) -> set[int]:
    children: dict[int, list[int]] = {}
    for i, t in enumerate(tokens):
        children.setdefault(t.head, []).append(i)
    out: set[int] = set()
    stack = [root]
    while stack:
        cur = stack.pop()
        out.add(cur)
        stack.extend(children.get(cur, ()))
    return out


def _contiguous(indices: set[int]) -> bool:
    return max(indices) - min(indices) + 1 == len(indices)


def expand(span: AnnotatedSpan, lexicon: Lexicon | None = None) -> set[str]:
    """Derived modification-span texts of a span, excluding the span itself."""
    original = span.normalized
    if not span.tokens:
        words = tokenize(span.text)
        if not words:
            return set()
        head_word = words[find_head(span, lexicon)]
        return {head_word} if normalize_text(head_word) != original else set()

    head = validate_token_tree(span.tokens)
    modifiers = [i for i, t in enumerate(span.tokens) if t.head == head]
    subtrees = [sorted(_subtree_indices(span.tokens, m)) for m in modifiers]

    if len(subtrees) > MODIFIER_SUBSET_CAP:
        # Fan-out cap: only prefixes of the modifiers closest to the head.
        order = sorted(range(len(modifiers)), key=lambda i: (abs(modifiers[i] - head), modifiers[i]))
        subsets = [tuple(order[:n]) for n in range(len(order) + 1)]
    else:
        subsets = [
            combo
            for size in range(len(subtrees) + 1)
            for combo in combinations(range(len(subtrees)), size)
        ]

    derived: set[str] = set()
    for subset in subsets:
        indices = {head}
        for s in subset:
            indices.update(subtrees[s])
        if not _contiguous(indices):
            continue
        text = " ".join(span.tokens[i].form for i in sorted(indices))
        if normalize_text(text) != original:
            derived.add(text)
    return derived


def expand_all(inputs: list[AnnotatedSpan], lexicon: Lexicon | None = None) -> list[AnnotatedSpan]:
    """Union of the originals and their derived substrings, deduplicated."""
    if not inputs:
        raise ValueError("expand_all requires at least one input span")

    by_norm: dict[str, AnnotatedSpan] = {}
    for span in inputs:
        key = span.normalized
        existing = by_norm.get(key)
        if existing is None:
            by_norm[key] = span
        elif not existing.is_input and span.is_input:
            by_norm[key] = span

    derived_texts: dict[str, str] = {}
    for span in inputs:
        for text in expand(span, lexicon):
            key = normalize_text(text)
            if key in by_norm:
                continue
            prev = derived_texts.get(key)
            if prev is None or text < prev:
                derived_texts[key] = text

    out = list(by_norm.values())
    for key in sorted(derived_texts):
        out.append(AnnotatedSpan(text=derived_texts[key], count=0, is_input=False))
    return out
