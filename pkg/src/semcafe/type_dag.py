"""Upward closure of an entity's WordNet types through subclass edges."""

from __future__ import annotations

import threading
from collections import Counter, deque
from dataclasses import dataclass, field

from .kb_store import EntityId, KnowledgeBase


@dataclass(frozen=True)
class TypeDag:
    entity: EntityId
    nodes: frozenset[str] = frozenset()
    edges: frozenset[tuple[str, str]] = frozenset()
    reached_roots: frozenset[str] = frozenset()
    # non-root types without parents
    dead_ends: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class Diagnostics:
    """Mutable tally of soft failures collected along the pipeline."""

    dead_end_types: set = field(default_factory=set)
    dropped_types: Counter = field(default_factory=Counter)
    unlinked_entities: int = 0

    def merge(self, other: "Diagnostics") -> None:
        self.dead_end_types |= other.dead_end_types
        self.dropped_types.update(other.dropped_types)
        self.unlinked_entities += other.unlinked_entities

    def to_dict(self) -> dict:
        return {
            "dead_end_types": len(self.dead_end_types),
            "dropped_type_occurrences": sum(self.dropped_types.values()),
            "unlinked_entities": self.unlinked_entities,
        }


def closure(kb: KnowledgeBase, yago_id: EntityId) -> TypeDag:
    start = kb.direct_types.get(yago_id)
    if not start:
        return TypeDag(yago_id)
    nodes = set(start)
    edges = set()
    roots = set()
    dead = set()
    queue = deque(sorted(start))
    while queue:
        t = queue.popleft()
        if t in kb.roots:
            roots.add(t)
            continue
        parents = kb.subclass.get(t)
        if not parents:
            dead.add(t)
            continue
        for p in parents:
            edges.add((t, p))
            if p not in nodes:
                nodes.add(p)
                queue.append(p)
    return TypeDag(yago_id, frozenset(nodes), frozenset(edges), frozenset(roots), frozenset(dead))


class ClosureCache:
    """Thread-safe memo of :func:`closure` for one KB."""

    def __init__(self, kb: KnowledgeBase):
        self.kb = kb
        self._memo: dict[EntityId, TypeDag] = {}
        self._lock = threading.Lock()

    def __call__(self, yago_id: EntityId) -> TypeDag:
        with self._lock:
            hit = self._memo.get(yago_id)
        if hit is not None:
            return hit
        dag = closure(self.kb, yago_id)
        with self._lock:
            return self._memo.setdefault(yago_id, dag)


def type_vector(dag: TypeDag, vocab, diagnostics: Diagnostics | None = None) -> dict[int, int]:
    """0/1 indicator over ``vocab`` positions; types outside the vocabulary are dropped."""
    out = {}
    for t in dag.nodes:
        pos = vocab.index.get(t)
        if pos is None:
            if diagnostics is not None:
                diagnostics.dropped_types[t] += 1
        else:
            out[pos] = 1
    return out


def dag_to_edgelist(dag: TypeDag) -> str:
    lines = [f"entity\t{dag.entity}"]
    lines += [f"{c}\t{p}" for c, p in sorted(dag.edges)]
    return "\n".join(lines) + "\n"


def edgelist_to_edges(text: str) -> tuple[EntityId, set[tuple[str, str]]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head, ident = lines[0].split("\t")
    if head != "entity":
        raise ValueError("edge list must start with an 'entity' header line")
    edges = {tuple(ln.split("\t")) for ln in lines[1:]}
    return EntityId.parse(ident), edges
