"""Synthetic KBs and labelled corpora with a known type-driven label rule.

Used by the acceptance tests and the experiment scripts. Every generator is
a pure function of its seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kb_store import EntityId, KnowledgeBase
from .text_pipeline import Label, RawDocument
from .type_dag import closure


@dataclass
class SyntheticCorpus:
    kb: KnowledgeBase
    docs: list[RawDocument]
    target_type: str


def type_name(i: int) -> str:
    return f"wordnet_synth{i}_{100000000 + i}"


def random_hierarchy(rng: np.random.Generator, n_types: int, n_roots: int = 5,
                     max_parents: int = 2) -> tuple[list[str], dict[str, set[str]], list[str]]:
    """Types 0..n_roots-1 are roots; every later type links to 1..max_parents earlier ones."""
    types = [type_name(i) for i in range(n_types)]
    subclass: dict[str, set[str]] = {}
    for i in range(n_roots, n_types):
        k = int(rng.integers(1, max_parents + 1))
        parents = rng.choice(i, size=min(k, i), replace=False)
        subclass[types[i]] = {types[int(p)] for p in parents}
    return types, subclass, types[:n_roots]


def _entity_kb(rng, types, subclass, roots, n_entities: int, name: str):
    non_roots = types[len(roots):]
    surfaces, same_as, counts, direct = {}, {}, {}, {}
    ents = []
    for j in range(n_entities):
        local = f"{name}_{j}"
        dbp, yago = EntityId.dbpedia(local), EntityId.yago(local)
        alias = EntityId.yago(f"{local}_alias")
        surfaces[f"{name}{j}"] = {dbp}
        same_as[dbp] = {yago, alias}
        counts[yago] = int(rng.integers(50, 100))
        counts[alias] = int(rng.integers(0, 50))
        k = int(rng.integers(1, 3))
        direct[yago] = {non_roots[int(t)] for t in rng.choice(len(non_roots), size=k, replace=False)}
        ents.append(yago)
    kb = KnowledgeBase.build(surfaces, same_as, counts, direct, subclass, roots)
    return kb, ents


def _pick_target(kb, ents, types, roots, lo=0.3, hi=0.6):
    closures = {e: closure(kb, e).nodes for e in ents}
    best, best_gap = None, None
    for t in types[len(roots):]:
        frac = sum(t in c for c in closures.values()) / len(ents)
        gap = 0.0 if lo <= frac <= hi else min(abs(frac - lo), abs(frac - hi))
        if best is None or gap < best_gap:
            best, best_gap = t, gap
    marked = [e for e in ents if best in closures[e]]
    plain = [e for e in ents if best not in closures[e]]
    if not marked or not plain:
        raise ValueError("no type splits the entity pool; use more entities or types")
    return best, marked, plain


def _noise(rng, n_words: int, length: int) -> list[str]:
    return [f"word{int(w)}" for w in rng.integers(0, n_words, size=length)]


def _make_doc(rng, doc_id, label, entity_names, n_noise_words, length):
    words = _noise(rng, n_noise_words, length)
    for name in entity_names:
        words.insert(int(rng.integers(0, len(words) + 1)), name)
    title = " ".join(_noise(rng, n_noise_words, 5))
    return RawDocument(doc_id, title, " ".join(words), source_domain="example.org", label=label)


def separable_corpus(n_docs: int = 1000, n_types: int = 30, n_entities: int = 60, seed: int = 0,
                     n_noise_words: int = 300, doc_length: int = 40) -> SyntheticCorpus:
    """Label is reliable iff some mentioned entity carries the target type.

    Entities are drawn from one shared pool, so surface tokens recur across
    documents.
    """
    rng = np.random.default_rng(seed)
    types, subclass, roots = random_hierarchy(rng, n_types)
    kb, ents = _entity_kb(rng, types, subclass, roots, n_entities, "ent")
    target, marked, plain = _pick_target(kb, ents, types, roots)
    docs = []
    for i in range(n_docs):
        reliable = bool(rng.integers(0, 2))
        k = int(rng.integers(1, 4))
        if reliable:
            chosen = [marked[int(rng.integers(len(marked)))]]
            pool = ents
        else:
            chosen = []
            pool = plain
        chosen += [pool[int(j)] for j in rng.integers(0, len(pool), size=k - len(chosen))]
        names = [e.local_name.replace("_", "") for e in chosen]
        label = Label.RELIABLE if reliable else Label.UNRELIABLE
        docs.append(_make_doc(rng, f"doc{i:05d}", label, names, n_noise_words, doc_length))
    return SyntheticCorpus(kb, docs, target)


def ablation_corpus(n_docs: int = 1000, n_types: int = 30, entities_per_doc: int = 3, seed: int = 0,
                    n_noise_words: int = 300, doc_length: int = 40) -> SyntheticCorpus:
    """Label depends only on entity types; text carries no transferable signal.

    Every entity is mentioned in exactly one document, so its surface tokens
    never reappear at test time, and the remaining words are label-independent
    noise.
    """
    rng = np.random.default_rng(seed)
    types, subclass, roots = random_hierarchy(rng, n_types)
    kb, ents = _entity_kb(rng, types, subclass, roots, n_docs * entities_per_doc * 2, "uniq")
    target, marked, plain = _pick_target(kb, ents, types, roots)
    marked_it, plain_it = iter(marked), iter(plain)
    docs = []
    for i in range(n_docs):
        reliable = bool(rng.integers(0, 2))
        if reliable:
            chosen = [next(marked_it)]
            for _ in range(entities_per_doc - 1):
                chosen.append(next(marked_it) if rng.integers(0, 2) else next(plain_it))
        else:
            chosen = [next(plain_it) for _ in range(entities_per_doc)]
        names = [e.local_name.replace("_", "") for e in chosen]
        label = Label.RELIABLE if reliable else Label.UNRELIABLE
        docs.append(_make_doc(rng, f"doc{i:05d}", label, names, n_noise_words, doc_length))
    return SyntheticCorpus(kb, docs, target)
