"""Stratified splitting, binary metrics and the end-to-end evaluation run."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classifier import SPLIT_SEED_OFFSET, ModelConfig, ModelParams, examples_from, predict, train
from .entity_linker import build_matcher
from .errors import DegenerateClass, EmptyInput, LengthMismatch, UnlabeledDocument
from .fingerprint import TypeVocabulary, fingerprint_document, link_and_close, vocabulary_for
from .kb_store import KnowledgeBase
from .text_pipeline import Label, RawDocument, preprocess
from .type_dag import ClosureCache, Diagnostics

LABEL_ORDER = (Label.UNRELIABLE, Label.RELIABLE)


class UndefinedMetricWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def stratified_split(corpus: Sequence, spec: SplitSpec) -> tuple[list, list]:
    """Per-label seeded shuffle; the first round(f * n_label) go to train.

    Documents keep their corpus order inside each half.
    """
    by_label: dict[Label, list[int]] = {lab: [] for lab in Label}
    for i, doc in enumerate(corpus):
        if doc.label is None:
            raise UnlabeledDocument(f"document {doc.doc_id!r} has no label")
        by_label[doc.label].append(i)
    for lab, idx in by_label.items():
        if len(idx) < 2:
            raise DegenerateClass(f"label {lab.value!r} has {len(idx)} document(s); need at least 2")
    rng = np.random.default_rng(spec.seed)
    train_idx: set[int] = set()
    for lab in sorted(by_label, key=lambda l: l.value):
        idx = by_label[lab]
        perm = rng.permutation(len(idx)).tolist()
        k = _round_half_up(spec.train_fraction * len(idx))
        train_idx.update(idx[j] for j in perm[:k])
    train_part = [d for i, d in enumerate(corpus) if i in train_idx]
    test_part = [d for i, d in enumerate(corpus) if i not in train_idx]
    return train_part, test_part


# -- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[Label, ClassMetrics]
    macro_f1: float
    micro_f1: float
    n: int
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "per_class": {
                lab.value: {
                    "precision": m.precision, "recall": m.recall, "f1": m.f1, "support": m.support,
                    "tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn,
                }
                for lab, m in ((l, self.per_class[l]) for l in LABEL_ORDER)
            },
        }
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        rows = ["metric,value", f"macro_f1,{self.macro_f1!r}", f"micro_f1,{self.micro_f1!r}"]
        for lab in LABEL_ORDER:
            m = self.per_class[lab]
            for name in ("precision", "recall", "f1", "support"):
                rows.append(f"{lab.value}_{name},{getattr(m, name)!r}")
        return "\n".join(rows) + "\n"


def _ratio(num: int, den: int, what: str) -> float:
    if den == 0:
        warnings.warn(f"{what} undefined (zero denominator); set to 0", UndefinedMetricWarning, stacklevel=3)
        return 0.0
    return num / den


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def compute_metrics(gold: Sequence[Label], pred: Sequence[Label]) -> EvalReport:
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(pred)} predictions")
    if not gold:
        raise EmptyInput("no labels to score")
    n = len(gold)
    per_class = {}
    pooled = [0, 0, 0]
    for lab in LABEL_ORDER:
        tp = sum(1 for g, p in zip(gold, pred) if g == lab and p == lab)
        fp = sum(1 for g, p in zip(gold, pred) if g != lab and p == lab)
        fn = sum(1 for g, p in zip(gold, pred) if g == lab and p != lab)
        prec = _ratio(tp, tp + fp, f"precision[{lab.value}]")
        rec = _ratio(tp, tp + fn, f"recall[{lab.value}]")
        per_class[lab] = ClassMetrics(prec, rec, _f1(prec, rec), tp + fn, tp, fp, fn, n - tp - fp - fn)
        pooled[0] += tp
        pooled[1] += fp
        pooled[2] += fn
    tp, fp, fn = pooled
    micro = _f1(_ratio(tp, tp + fp, "micro precision"), _ratio(tp, tp + fn, "micro recall"))
    macro = sum(m.f1 for m in per_class.values()) / len(per_class)
    return EvalReport(per_class, macro, micro, n)


# -- end-to-end ---------------------------------------------------------------


@dataclass
class PipelineResult:
    report: EvalReport
    model: ModelParams
    vocab: TypeVocabulary
    train_ids: list[str]
    test_ids: list[str]
    predictions: list[tuple[str, Label, float]]
    diagnostics: Diagnostics


def run_pipeline(corpus: Sequence[RawDocument], kb: KnowledgeBase, config: ModelConfig,
                 train_fraction: float = 0.7) -> PipelineResult:
    """Split, fit vocabulary and model on train only, score the test part."""
    train_raw, test_raw = stratified_split(corpus, SplitSpec(train_fraction, config.seed + SPLIT_SEED_OFFSET))
    train_docs = [preprocess(d) for d in train_raw]
    test_docs = [preprocess(d) for d in test_raw]
    matcher = build_matcher(kb)
    cache = ClosureCache(kb)
    diag = Diagnostics()

    train_linked = link_and_close(kb, matcher, train_docs, cache)
    vocab = vocabulary_for(train_linked)
    train_fps = [fingerprint_document(d.doc_id, pairs, vocab, config.fingerprint_mode, diag)
                 for d, pairs in zip(train_docs, train_linked)]
    model = train(examples_from(train_docs, train_fps, config, len(vocab)), config)

    test_linked = link_and_close(kb, matcher, test_docs, cache)
    test_fps = [fingerprint_document(d.doc_id, pairs, vocab, config.fingerprint_mode, diag)
                for d, pairs in zip(test_docs, test_linked)]
    preds = []
    for (x, _), d in zip(examples_from(test_docs, test_fps, config, len(vocab)), test_docs):
        label, p = predict(model, x)
        preds.append((d.doc_id, label, p))
    report = compute_metrics([d.label for d in test_docs], [lab for _, lab, _ in preds])
    return PipelineResult(report, model, vocab, [d.doc_id for d in train_docs],
                          [d.doc_id for d in test_docs], preds, diag)


def evaluate_pipeline(corpus: Sequence[RawDocument], kb: KnowledgeBase, config: ModelConfig,
                      train_fraction: float = 0.7) -> EvalReport:
    return run_pipeline(corpus, kb, config, train_fraction).report
