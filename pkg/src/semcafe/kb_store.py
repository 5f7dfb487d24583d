"""Offline knowledge-base snapshot: TSV loading, validation and lookup.

A KB directory holds six UTF-8, tab-separated files (``#`` lines are
comments)::

    surfaces.tsv   surface_form      dbpedia_local_name
    sameas.tsv     dbpedia_local     yago_local_name
    propcounts.tsv yago_local_name   integer
    types.tsv      yago_local_name   wordnet_type_id
    subclass.tsv   child_type_id     parent_type_id
    roots.tsv      wordnet_type_id

The loaded :class:`KnowledgeBase` is immutable and safe to share between
threads.
"""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from .errors import CycleDetected, DanglingReference, InvalidRoot, MalformedLine, MissingFile, MissingRoots
from .text_pipeline import normalize

log = logging.getLogger(__name__)

KB_FILES = ("surfaces.tsv", "sameas.tsv", "propcounts.tsv", "types.tsv", "subclass.tsv", "roots.tsv")
N_ROOTS = 5
NAMESPACES = ("dbpedia", "yago")

_TYPE_RE = re.compile(r"^wordnet_\S+_\d+$")


@dataclass(frozen=True, order=True)
class EntityId:
    namespace: str
    local_name: str

    def __post_init__(self):
        if self.namespace not in NAMESPACES:
            raise ValueError(f"unknown namespace {self.namespace!r}")
        if not self.local_name or any(c.isspace() for c in self.local_name):
            raise ValueError(f"invalid local name {self.local_name!r}")

    def __str__(self) -> str:
        return f"{self.namespace}:{self.local_name}"

    @classmethod
    def parse(cls, text: str) -> "EntityId":
        ns, sep, local = text.partition(":")
        if not sep:
            raise ValueError(f"not a namespaced id: {text!r}")
        return cls(ns, local)

    @classmethod
    def dbpedia(cls, local: str) -> "EntityId":
        return cls("dbpedia", local)

    @classmethod
    def yago(cls, local: str) -> "EntityId":
        return cls("yago", local)


def is_type_id(value: str) -> bool:
    return bool(_TYPE_RE.match(value))


def _freeze(d: Mapping) -> Mapping:
    return MappingProxyType({k: frozenset(v) for k, v in d.items()})


@dataclass(frozen=True)
class KnowledgeBase:
    surface_forms: Mapping[str, frozenset[EntityId]]
    same_as: Mapping[EntityId, frozenset[EntityId]]
    property_counts: Mapping[EntityId, int]
    direct_types: Mapping[EntityId, frozenset[str]]
    subclass: Mapping[str, frozenset[str]]
    roots: frozenset[str]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def build(cls, surface_forms=None, same_as=None, property_counts=None,
              direct_types=None, subclass=None, roots=(), warnings=()) -> "KnowledgeBase":
        """Assemble (and check acyclicity of) a KB from in-memory maps."""
        subclass = subclass or {}
        _check_acyclic(subclass)
        return cls(
            surface_forms=_freeze(surface_forms or {}),
            same_as=_freeze(same_as or {}),
            property_counts=MappingProxyType(dict(property_counts or {})),
            direct_types=_freeze(direct_types or {}),
            subclass=_freeze(subclass),
            roots=frozenset(roots),
            warnings=tuple(warnings),
        )

    def all_types(self) -> set[str]:
        out = set(self.roots)
        for ts in self.direct_types.values():
            out |= ts
        for child, parents in self.subclass.items():
            out.add(child)
            out |= parents
        return out

    def dbpedia_entities(self) -> set[EntityId]:
        out = set(self.same_as)
        for ids in self.surface_forms.values():
            out |= ids
        return out

    def yago_entities(self) -> set[EntityId]:
        out = set(self.property_counts) | set(self.direct_types)
        for ids in self.same_as.values():
            out |= ids
        return out

    def edge_count(self) -> int:
        return sum(len(p) for p in self.subclass.values())


# -- loading ------------------------------------------------------------------


def _rows(path: Path, ncols: int) -> Iterator[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != ncols or any(not c.strip() for c in cols):
                raise MalformedLine(path.name, lineno, f"expected {ncols} tab-separated columns")
            yield lineno, [c.strip() for c in cols]


def _entity(ns: str, text: str, path: Path, lineno: int) -> EntityId:
    try:
        return EntityId(ns, text)
    except ValueError as exc:
        raise MalformedLine(path.name, lineno, str(exc)) from None


def _type(text: str, path: Path, lineno: int) -> str:
    if not is_type_id(text):
        raise MalformedLine(path.name, lineno, f"not a wordnet type id: {text!r}")
    return text


def find_cycle(subclass: Mapping[str, Iterable]) -> list[str] | None:
    """Return one cycle as a closed type path (first == last), or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    color: dict[str, int] = defaultdict(int)
    for start in sorted(subclass):
        if color[start] != WHITE:
            continue
        stack = [(start, iter(sorted(subclass.get(start, ()))))]
        path = [start]
        color[start] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = BLACK
                stack.pop()
                path.pop()
            elif color[nxt] == GREY:
                return path[path.index(nxt):] + [nxt]
            elif color[nxt] == WHITE:
                color[nxt] = GREY
                path.append(nxt)
                stack.append((nxt, iter(sorted(subclass.get(nxt, ())))))
    return None


def _check_acyclic(subclass) -> None:
    cycle = find_cycle(subclass)
    if cycle is not None:
        raise CycleDetected(cycle)


def load_kb(directory, strictness: str = "lenient") -> KnowledgeBase:
    """Load and index the six KB files in ``directory``.

    strict: dangling sameAs targets (no property count), roots with parents,
    and a root count other than five raise. lenient: those are logged,
    root parent edges are dropped and missing counts read as 0.
    Subclass cycles are always an error.
    """
    if strictness not in ("strict", "lenient"):
        raise ValueError(f"strictness must be 'strict' or 'lenient', got {strictness!r}")
    strict = strictness == "strict"
    d = Path(directory)
    for name in KB_FILES:
        if not (d / name).is_file():
            raise MissingFile(d / name)
    warnings: list[str] = []

    def warn(msg: str):
        log.warning(msg)
        warnings.append(msg)

    surfaces: dict[str, set] = defaultdict(set)
    p = d / "surfaces.tsv"
    for lineno, (form, local) in _rows(p, 2):
        key = normalize(form)
        if not key:
            warn(f"surfaces.tsv:{lineno}: surface {form!r} is empty after normalization")
            continue
        surfaces[key].add(_entity("dbpedia", local, p, lineno))

    same_as: dict[EntityId, set] = defaultdict(set)
    p = d / "sameas.tsv"
    for lineno, (src, dst) in _rows(p, 2):
        same_as[_entity("dbpedia", src, p, lineno)].add(_entity("yago", dst, p, lineno))

    counts: dict[EntityId, int] = {}
    p = d / "propcounts.tsv"
    for lineno, (local, value) in _rows(p, 2):
        ent = _entity("yago", local, p, lineno)
        try:
            n = int(value)
        except ValueError:
            raise MalformedLine(p.name, lineno, f"not an integer: {value!r}") from None
        if n < 0:
            raise MalformedLine(p.name, lineno, "negative property count")
        if ent in counts and counts[ent] != n:
            raise MalformedLine(p.name, lineno, f"conflicting count for {ent}")
        counts[ent] = n

    types: dict[EntityId, set] = defaultdict(set)
    p = d / "types.tsv"
    for lineno, (local, t) in _rows(p, 2):
        types[_entity("yago", local, p, lineno)].add(_type(t, p, lineno))

    subclass: dict[str, set] = defaultdict(set)
    p = d / "subclass.tsv"
    for lineno, (child, parent) in _rows(p, 2):
        subclass[_type(child, p, lineno)].add(_type(parent, p, lineno))

    roots: set[str] = set()
    p = d / "roots.tsv"
    for lineno, (t,) in _rows(p, 1):
        roots.add(_type(t, p, lineno))

    _check_acyclic(subclass)

    if len(roots) != N_ROOTS:
        msg = f"roots.tsv lists {len(roots)} types, expected {N_ROOTS}"
        if strict:
            raise MissingRoots(msg)
        warn(msg)
    for r in sorted(roots):
        if subclass.get(r):
            msg = f"root {r} has parent edges: {sorted(subclass[r])}"
            if strict:
                raise InvalidRoot(msg)
            warn(msg + " (dropped)")
            del subclass[r]

    dangling = sorted({y for ys in same_as.values() for y in ys if y not in counts})
    if dangling:
        msg = f"{len(dangling)} sameAs targets without property counts: " + ", ".join(map(str, dangling[:10]))
        if strict:
            raise DanglingReference(msg)
        warn(msg + " (treated as 0)")

    return KnowledgeBase.build(surfaces, same_as, counts, types, subclass, roots, warnings)


# -- validation / lookup ------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    dbpedia_entities: int
    yago_entities: int
    surface_forms: int
    types: int
    edges: int
    roots: int
    dangling_refs: tuple[str, ...]
    unreachable_types: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.dangling_refs and not self.unreachable_types

    def to_dict(self) -> dict:
        return {
            "dbpedia_entities": self.dbpedia_entities,
            "yago_entities": self.yago_entities,
            "surface_forms": self.surface_forms,
            "types": self.types,
            "edges": self.edges,
            "roots": self.roots,
            "dangling_refs": list(self.dangling_refs),
            "unreachable_types": list(self.unreachable_types),
            "warnings": list(self.warnings),
        }


def unreachable_types(kb: KnowledgeBase) -> list[str]:
    """Types from which no root can be reached along subclass edges."""
    children: dict[str, set] = defaultdict(set)
    for child, parents in kb.subclass.items():
        for parent in parents:
            children[parent].add(child)
    reached = set(kb.roots)
    frontier = list(kb.roots)
    while frontier:
        node = frontier.pop()
        for c in children.get(node, ()):
            if c not in reached:
                reached.add(c)
                frontier.append(c)
    return sorted(kb.all_types() - reached)


def validate_kb(kb: KnowledgeBase) -> ValidationReport:
    dangling = sorted({str(y) for ys in kb.same_as.values() for y in ys if y not in kb.property_counts})
    return ValidationReport(
        dbpedia_entities=len(kb.dbpedia_entities()),
        yago_entities=len(kb.yago_entities()),
        surface_forms=len(kb.surface_forms),
        types=len(kb.all_types()),
        edges=kb.edge_count(),
        roots=len(kb.roots),
        dangling_refs=tuple(dangling),
        unreachable_types=tuple(unreachable_types(kb)),
        warnings=kb.warnings,
    )


def surface_lookup(kb: KnowledgeBase, form: str) -> frozenset[EntityId]:
    return kb.surface_forms.get(form, frozenset())


def dump_kb(kb: KnowledgeBase, directory) -> Path:
    """Write ``kb`` as a KB directory that :func:`load_kb` reads back."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)

    def write(name: str, header: str, rows):
        text = f"# {header}\n" + "".join("\t".join(r) + "\n" for r in sorted(rows))
        (d / name).write_text(text, encoding="utf-8")

    write("surfaces.tsv", "surface_form\tdbpedia",
          [(s, e.local_name) for s, ids in kb.surface_forms.items() for e in ids])
    write("sameas.tsv", "dbpedia\tyago",
          [(e.local_name, y.local_name) for e, ys in kb.same_as.items() for y in ys])
    write("propcounts.tsv", "yago\tcount", [(e.local_name, str(n)) for e, n in kb.property_counts.items()])
    write("types.tsv", "yago\ttype", [(e.local_name, t) for e, ts in kb.direct_types.items() for t in ts])
    write("subclass.tsv", "child\tparent", [(c, p) for c, ps in kb.subclass.items() for p in ps])
    write("roots.tsv", "type", [(r,) for r in kb.roots])
    return d
