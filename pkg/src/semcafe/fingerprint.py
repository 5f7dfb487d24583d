"""Type vocabulary and per-article semantic fingerprints.

A fingerprint counts, for every type in the vocabulary, how many of the
article's linked entities carry that type somewhere in their closed type DAG.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .entity_linker import LinkedEntity, Matcher, link_document
from .kb_store import KnowledgeBase
from .text_pipeline import CleanDocument
from .type_dag import ClosureCache, Diagnostics, TypeDag, type_vector

MODES = ("unique_entity", "mention_weighted")


@dataclass(frozen=True)
class TypeVocabulary:
    types: tuple[str, ...]
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.types)) != len(self.types):
            raise ValueError("duplicate types in vocabulary")
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.types)})

    def __len__(self) -> int:
        return len(self.types)

    def dumps(self) -> str:
        return "".join(t + "\n" for t in self.types)

    @classmethod
    def loads(cls, text: str) -> "TypeVocabulary":
        return cls(tuple(ln.strip() for ln in text.splitlines() if ln.strip()))


def build_vocabulary(dags: Iterable[TypeDag]) -> TypeVocabulary:
    types = set()
    for dag in dags:
        types |= dag.nodes
    return TypeVocabulary(tuple(sorted(types)))


@dataclass(frozen=True)
class Fingerprint:
    doc_id: str
    counts: dict[int, int]
    dim: int

    def __post_init__(self):
        for pos, c in self.counts.items():
            if not 0 <= pos < self.dim or c < 1:
                raise ValueError(f"bad fingerprint entry {pos}: {c} (dim {self.dim})")

    def dense(self) -> np.ndarray:
        v = np.zeros(self.dim)
        for pos, c in self.counts.items():
            v[pos] = c
        return v

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "dim": self.dim,
            "counts": {str(p): c for p, c in sorted(self.counts.items())},
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Fingerprint":
        return cls(obj["doc_id"], {int(p): int(c) for p, c in obj["counts"].items()}, int(obj["dim"]))


def fingerprint_document(
    doc_id: str,
    entities: Sequence[tuple[LinkedEntity, TypeDag]],
    vocab: TypeVocabulary,
    mode: str = "unique_entity",
    diagnostics: Diagnostics | None = None,
) -> Fingerprint:
    """Sum the type indicator vectors of the document's entities.

    Entities are distinct by their resolved YAGO id; unresolved entities
    contribute nothing. In ``mention_weighted`` mode each entity's vector is
    scaled by its total mention count.
    """
    if mode not in MODES:
        raise ValueError(f"unknown fingerprint mode {mode!r}")
    weight: dict = {}
    dags: dict = {}
    for ent, dag in entities:
        if ent.yago_id is None:
            if diagnostics is not None:
                diagnostics.unlinked_entities += 1
            continue
        weight[ent.yago_id] = weight.get(ent.yago_id, 0) + ent.mention_count
        dags[ent.yago_id] = dag
    counts: dict[int, int] = {}
    for yago, dag in dags.items():
        w = weight[yago] if mode == "mention_weighted" else 1
        for pos in type_vector(dag, vocab, diagnostics):
            counts[pos] = counts.get(pos, 0) + w
    if diagnostics is not None:
        for dag in dags.values():
            diagnostics.dead_end_types |= dag.dead_ends
    return Fingerprint(doc_id, counts, len(vocab))


def link_and_close(kb: KnowledgeBase, matcher: Matcher, docs: Sequence[CleanDocument],
                   cache: ClosureCache | None = None) -> list[list[tuple[LinkedEntity, TypeDag]]]:
    cache = cache or ClosureCache(kb)
    out = []
    for doc in docs:
        pairs = []
        for ent in link_document(kb, matcher, doc):
            dag = cache(ent.yago_id) if ent.yago_id is not None else TypeDag(ent.dbpedia_id)
            pairs.append((ent, dag))
        out.append(pairs)
    return out


def vocabulary_for(linked: Iterable[Sequence[tuple[LinkedEntity, TypeDag]]]) -> TypeVocabulary:
    return build_vocabulary(dag for pairs in linked for _, dag in pairs)


def fingerprint_corpus(
    docs: Sequence[CleanDocument],
    kb: KnowledgeBase,
    matcher: Matcher,
    vocab: TypeVocabulary | None = None,
    mode: str = "unique_entity",
    diagnostics: Diagnostics | None = None,
) -> list[Fingerprint]:
    """Link, close and fingerprint every document; output order follows input.

    With ``vocab=None`` the vocabulary is built from this corpus.
    """
    linked = link_and_close(kb, matcher, docs)
    if vocab is None:
        vocab = vocabulary_for(linked)
    return [
        fingerprint_document(doc.doc_id, pairs, vocab, mode, diagnostics)
        for doc, pairs in zip(docs, linked)
    ]


def dump_fingerprints(fps: Iterable[Fingerprint]) -> str:
    return "".join(json.dumps(fp.to_dict(), separators=(",", ":")) + "\n" for fp in fps)


def load_fingerprints(lines: Iterable[str]) -> list[Fingerprint]:
    return [Fingerprint.from_dict(json.loads(ln)) for ln in lines if ln.strip()]
