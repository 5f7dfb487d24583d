"""Dictionary spotting of KB surface forms and sameAs disambiguation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .kb_store import EntityId, KnowledgeBase
from .text_pipeline import CleanDocument, tokenize


@dataclass(frozen=True)
class Mention:
    doc_id: str
    start: int
    end: int
    surface: str
    candidates: frozenset[EntityId]

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class LinkedEntity:
    dbpedia_id: EntityId
    yago_id: EntityId | None
    mention_count: int

    def to_dict(self) -> dict:
        return {
            "dbpedia": self.dbpedia_id.local_name,
            "yago": self.yago_id.local_name if self.yago_id else None,
            "mentions": self.mention_count,
        }


class _Node:
    __slots__ = ("children", "candidates", "surface")

    def __init__(self):
        self.children: dict[str, _Node] = {}
        self.candidates: frozenset[EntityId] | None = None
        self.surface: str | None = None


class Matcher:
    """Token trie over every surface form; treat as immutable once built."""

    def __init__(self, patterns: dict[tuple[str, ...], frozenset[EntityId]]):
        self._root = _Node()
        self.max_len = 0
        for tokens, cands in patterns.items():
            if not tokens:
                continue
            node = self._root
            for tok in tokens:
                node = node.children.setdefault(tok, _Node())
            node.candidates = frozenset(cands) | (node.candidates or frozenset())
            node.surface = " ".join(tokens)
            self.max_len = max(self.max_len, len(tokens))
        self.patterns = frozenset(p for p in patterns if p)

    def __len__(self) -> int:
        return len(self.patterns)

    def longest_at(self, tokens: Sequence[str], i: int) -> tuple[int, _Node] | None:
        """Longest pattern beginning at ``tokens[i]`` as (end, node), or None."""
        node = self._root
        best = None
        for j in range(i, len(tokens)):
            node = node.children.get(tokens[j])
            if node is None:
                break
            if node.candidates:
                best = (j + 1, node)
        return best


def build_matcher(kb: KnowledgeBase) -> Matcher:
    patterns: dict[tuple[str, ...], frozenset[EntityId]] = {}
    for form, ids in kb.surface_forms.items():
        key = tuple(tokenize(form))
        patterns[key] = patterns.get(key, frozenset()) | ids
    return Matcher(patterns)


def spot(matcher: Matcher, tokens: Sequence[str], doc_id: str = "") -> list[Mention]:
    """Greedy leftmost-longest, non-overlapping matching."""
    out = []
    i = 0
    n = len(tokens)
    while i < n:
        hit = matcher.longest_at(tokens, i)
        if hit is None:
            i += 1
            continue
        end, node = hit
        out.append(Mention(doc_id, i, end, node.surface, node.candidates))
        i = end
    return out


def disambiguate(kb: KnowledgeBase, dbpedia_id: EntityId) -> EntityId | None:
    """Pick the sameAs target with the most properties.

    Ties go to the lexicographically smallest local name.
    """
    candidates = kb.same_as.get(dbpedia_id)
    if not candidates:
        return None
    return min(candidates, key=lambda y: (-kb.property_counts.get(y, 0), y.local_name))


def link_document(kb: KnowledgeBase, matcher: Matcher, doc: CleanDocument) -> list[LinkedEntity]:
    counts: dict[tuple[EntityId, EntityId | None], int] = {}
    resolved: dict[EntityId, EntityId | None] = {}
    for m in spot(matcher, doc.tokens, doc.doc_id):
        for dbp in sorted(m.candidates):
            if dbp not in resolved:
                resolved[dbp] = disambiguate(kb, dbp)
            key = (dbp, resolved[dbp])
            counts[key] = counts.get(key, 0) + 1
    # dicts keep insertion order == first occurrence
    return [LinkedEntity(dbp, yago, n) for (dbp, yago), n in counts.items()]
