"""Article ingestion and cleaning: boilerplate stripping, cleaning, tokenization.

All functions here are pure; ``preprocess`` can be mapped over documents in
parallel.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable

from .errors import DuplicateDocId, InvalidFieldValue, MalformedJson, MissingRequiredField

LINK_DENSITY_MAX = 0.33
MIN_BLOCK_CHARS = 25

_URL_RE = re.compile(r"(?:[A-Za-z][A-Za-z0-9+.\-]*://|www\.)\S*", re.IGNORECASE)
# \w minus underscore == str.isalnum(); \s == str.isspace()
_SPECIAL_RE = re.compile(r"[^\w\s]|_")
_TAG_RE = re.compile(r"<[A-Za-z!/][^>]*>")

REQUIRED_FIELDS = ("doc_id", "title", "body")
_KNOWN_FIELDS = REQUIRED_FIELDS + ("published_date", "source_domain", "language", "label")


class Label(str, Enum):
    RELIABLE = "reliable"
    UNRELIABLE = "unreliable"

    @property
    def numeric(self) -> int:
        return 1 if self is Label.RELIABLE else 0

    @classmethod
    def from_numeric(cls, y: int) -> "Label":
        return cls.RELIABLE if y == 1 else cls.UNRELIABLE


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    title: str
    body: str
    published_date: str | None = None
    source_domain: str = ""
    language: str = "en"
    label: Label | None = None
    # unknown corpus keys, kept verbatim for round-tripping
    extra: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class CleanDocument:
    doc_id: str
    title_tokens: tuple[str, ...]
    body_tokens: tuple[str, ...]
    normalized_text: str
    published_date: str | None = None
    source_domain: str = ""
    language: str = "en"
    label: Label | None = None

    @property
    def tokens(self) -> tuple[str, ...]:
        return self.title_tokens + self.body_tokens


# -- boilerplate removal ------------------------------------------------------

_BLOCK_TAGS = frozenset(
    "address article aside blockquote body br dd details div dl dt fieldset figcaption "
    "figure footer form h1 h2 h3 h4 h5 h6 header hr html li main nav ol p pre section "
    "summary table tbody td tfoot th thead title tr ul".split()
)
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template", "head", "svg", "iframe"})


class _BlockCollector(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.blocks: list[tuple[str, int]] = []  # (text, linked non-space chars)
        self._parts: list[str] = []
        self._linked = 0
        self._skip = 0
        self._in_link = 0

    def _flush(self):
        text = " ".join("".join(self._parts).split())
        if text:
            self.blocks.append((text, self._linked))
        self._parts = []
        self._linked = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip += 1
        elif tag == "a":
            self._in_link += 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip = max(0, self._skip - 1)
        elif tag == "a":
            self._in_link = max(0, self._in_link - 1)
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._skip:
            return
        self._parts.append(data)
        if self._in_link:
            self._linked += sum(1 for c in data if not c.isspace())

    def close(self):
        super().close()
        self._flush()


def strip_boilerplate(
    html_or_text: str,
    *,
    max_link_density: float = LINK_DENSITY_MAX,
    min_chars: int = MIN_BLOCK_CHARS,
) -> str:
    """Keep the content-bearing blocks of an HTML page.

    Text without markup is returned unchanged. Otherwise every block-level
    segment is kept iff it has at least ``min_chars`` characters and a link
    density (linked / total non-space characters) of at most
    ``max_link_density``. Script and style content is always dropped.
    """
    if not _TAG_RE.search(html_or_text):
        return html_or_text
    parser = _BlockCollector()
    parser.feed(html_or_text)
    parser.close()
    kept = []
    for text, linked in parser.blocks:
        total = sum(1 for c in text if not c.isspace())
        if len(text) >= min_chars and total and linked / total <= max_link_density:
            kept.append(text)
    return "\n".join(kept)


# -- cleaning / tokenization --------------------------------------------------


def clean_text(text: str) -> str:
    """Drop URLs, lowercase, replace special characters by spaces, squeeze whitespace."""
    text = _URL_RE.sub(" ", text)
    text = _SPECIAL_RE.sub(" ", text.lower())
    return " ".join(text.split())


normalize = clean_text


def tokenize(text: str) -> list[str]:
    return text.split()


def preprocess(doc: RawDocument) -> CleanDocument:
    title = clean_text(doc.title)
    body = clean_text(strip_boilerplate(doc.body))
    return CleanDocument(
        doc_id=doc.doc_id,
        title_tokens=tuple(tokenize(title)),
        body_tokens=tuple(tokenize(body)),
        normalized_text=" ".join(filter(None, (title, body))),
        published_date=doc.published_date,
        source_domain=doc.source_domain,
        language=doc.language,
        label=doc.label,
    )


# -- corpus I/O ---------------------------------------------------------------


def _record_to_doc(obj, lineno: int) -> RawDocument:
    if not isinstance(obj, dict):
        raise MalformedJson(lineno, "record is not a JSON object")
    for key in REQUIRED_FIELDS:
        if key not in obj:
            raise MissingRequiredField(key, lineno)
        if not isinstance(obj[key], str):
            raise InvalidFieldValue(key, lineno, obj[key])
    if not obj["doc_id"]:
        raise InvalidFieldValue("doc_id", lineno, obj["doc_id"])
    label = obj.get("label")
    if label is not None:
        try:
            label = Label(label)
        except ValueError:
            raise InvalidFieldValue("label", lineno, label) from None
    for key in ("published_date", "source_domain", "language"):
        if obj.get(key) is not None and not isinstance(obj[key], str):
            raise InvalidFieldValue(key, lineno, obj[key])
    return RawDocument(
        doc_id=obj["doc_id"],
        title=obj["title"],
        body=obj["body"],
        published_date=obj.get("published_date"),
        source_domain=obj.get("source_domain") or "",
        language=obj.get("language") or "en",
        label=label,
        extra={k: v for k, v in obj.items() if k not in _KNOWN_FIELDS},
    )


def parse_corpus_lines(lines: Iterable[str]) -> list[RawDocument]:
    docs: list[RawDocument] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedJson(lineno, exc.msg) from None
        doc = _record_to_doc(obj, lineno)
        if doc.doc_id in seen:
            raise DuplicateDocId(doc.doc_id)
        seen.add(doc.doc_id)
        docs.append(doc)
    return docs


def ingest_corpus(path) -> list[RawDocument]:
    """Read a JSON-Lines corpus file; blank lines are skipped, order is kept."""
    with open(path, encoding="utf-8") as fh:
        return parse_corpus_lines(fh)


def doc_to_record(doc: RawDocument) -> dict:
    rec = {"doc_id": doc.doc_id, "title": doc.title, "body": doc.body}
    if doc.published_date is not None:
        rec["published_date"] = doc.published_date
    rec["source_domain"] = doc.source_domain
    rec["language"] = doc.language
    if doc.label is not None:
        rec["label"] = doc.label.value
    rec.update(doc.extra)
    return rec


def dump_corpus(docs: Iterable[RawDocument]) -> str:
    return "".join(json.dumps(doc_to_record(d)) + "\n" for d in docs)


def clean_to_record(doc: CleanDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "title_tokens": list(doc.title_tokens),
        "body_tokens": list(doc.body_tokens),
        "normalized_text": doc.normalized_text,
        "published_date": doc.published_date,
        "source_domain": doc.source_domain,
        "language": doc.language,
        "label": doc.label.value if doc.label else None,
    }


def write_corpus(docs: Iterable[RawDocument], path) -> None:
    Path(path).write_text(dump_corpus(docs), encoding="utf-8")
