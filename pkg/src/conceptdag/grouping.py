"""Partition expanded spans into equivalence sets by canonical lemma bag."""

from __future__ import annotations

from dataclasses import dataclass

from .spans import AnnotatedSpan
from .textnorm import LemmaBag, LemmaClassIndex, Lexicon, to_bag


@dataclass(frozen=True)
class EquivalenceSet:
    members: tuple[AnnotatedSpan, ...]
    bag: LemmaBag
    is_input: bool
    total_count: int


def _member_sort_key(span: AnnotatedSpan) -> tuple:
    return (not span.is_input, -span.count, span.normalized)


def group(
    spans: list[AnnotatedSpan], lexicon: Lexicon, index: LemmaClassIndex
) -> list[EquivalenceSet]:
    """Group spans by bag equality; empty-bag spans are isolated by raw text."""
    buckets: dict[tuple, list[AnnotatedSpan]] = {}
    for span in spans:
        bag = to_bag(span.text, lexicon, index)
        key = ("text", span.normalized) if not bag else ("bag", bag)
        buckets.setdefault(key, []).append(span)

    sets: list[EquivalenceSet] = []
    for key, bucket in buckets.items():
        seen: set[str] = set()
        members: list[AnnotatedSpan] = []
        for span in sorted(bucket, key=_member_sort_key):
            if span.normalized in seen:
                continue
            seen.add(span.normalized)
            members.append(span)
        bag = key[1] if key[0] == "bag" else frozenset()
        sets.append(
            EquivalenceSet(
                members=tuple(members),
                bag=bag,
                is_input=any(m.is_input for m in members),
                total_count=sum(m.count for m in members),
            )
        )

    sets.sort(key=lambda s: (sorted(s.bag), s.members[0].normalized))
    return sets
