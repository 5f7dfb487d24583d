"""``semcafe`` command line: kb-validate, ingest, link, fingerprint, train, predict, evaluate.

Exit codes: 0 success, 1 domain/validation failure, 2 I/O or parse failure.
Failures print ``{"error": code, "detail": ...}`` on stderr. Successful runs
print one JSON summary line on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from ._io import atomic_write_text
from .classifier import examples_from, featurize, load_model, model_to_json, predict, save_model, train
from .config import RunConfig, resolve_config
from .entity_linker import build_matcher, link_document
from .errors import MalformedJson, MissingFile, MissingFingerprint, SemcafeError, UnlabeledDocument
from .eval_harness import run_pipeline
from .fingerprint import (
    MODES,
    TypeVocabulary,
    dump_fingerprints,
    fingerprint_document,
    link_and_close,
    load_fingerprints,
    vocabulary_for,
)
from .kb_store import load_kb, validate_kb
from .text_pipeline import clean_to_record, ingest_corpus, preprocess
from .type_dag import Diagnostics

_CONFIG_FLAGS = {
    "fingerprint_mode": dict(choices=MODES),
    "hash_dim": dict(type=int),
    "learning_rate": dict(type=float),
    "epochs": dict(type=int),
    "l2_penalty": dict(type=float),
    "seed": dict(type=int),
    "train_fraction": dict(type=float),
    "feature_set": dict(choices=("text+fingerprint", "text", "fingerprint")),
    "strictness": dict(choices=("strict", "lenient")),
}


def _jsonl(records) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


def _load_corpus(path):
    try:
        return ingest_corpus(path)
    except FileNotFoundError:
        raise MissingFile(path) from None


def _read_fingerprints(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError:
        raise MissingFile(path) from None
    try:
        fps = load_fingerprints(lines)
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedJson(0, f"{path}: {exc}") from None
    return {fp.doc_id: fp for fp in fps}


def _paired(docs, fps: dict):
    missing = [d.doc_id for d in docs if d.doc_id not in fps]
    if missing:
        raise MissingFingerprint(f"no fingerprint for {len(missing)} document(s), e.g. {missing[0]!r}")
    return [fps[d.doc_id] for d in docs]


def _kb(cfg: RunConfig, args):
    kb_dir = args.kb or cfg.kb_dir
    if not kb_dir:
        raise ValueError("a KB directory is required (--kb or kb_dir in the config file)")
    return load_kb(kb_dir, cfg.strictness)


def _corpus_path(cfg: RunConfig, args):
    path = args.corpus or cfg.corpus
    if not path:
        raise ValueError("a corpus file is required (--corpus or corpus in the config file)")
    return path


# -- commands -----------------------------------------------------------------


def cmd_kb_validate(args, cfg: RunConfig) -> tuple[int, dict]:
    kb = _kb(cfg, args)
    report = validate_kb(kb)
    print(json.dumps(report.to_dict(), sort_keys=True))
    failed = cfg.strictness == "strict" and not report.ok
    return (1 if failed else 0), {}


def cmd_ingest(args, cfg):
    docs = [preprocess(d) for d in _load_corpus(_corpus_path(cfg, args))]
    atomic_write_text(args.out, _jsonl(clean_to_record(d) for d in docs))
    return 0, {"documents": len(docs), "outputs": [str(args.out)]}


def cmd_link(args, cfg):
    raw = _load_corpus(_corpus_path(cfg, args))
    kb = _kb(cfg, args)
    matcher = build_matcher(kb)
    records = []
    n_ent = 0
    for doc in map(preprocess, raw):
        ents = link_document(kb, matcher, doc)
        n_ent += len(ents)
        records.append({"doc_id": doc.doc_id, "entities": [e.to_dict() for e in ents]})
    atomic_write_text(args.out, _jsonl(records))
    return 0, {"documents": len(records), "entities": n_ent, "outputs": [str(args.out)]}


def cmd_fingerprint(args, cfg):
    docs = [preprocess(d) for d in _load_corpus(_corpus_path(cfg, args))]
    kb = _kb(cfg, args)
    linked = link_and_close(kb, build_matcher(kb), docs)
    if args.vocab:
        vocab = TypeVocabulary.loads(Path(args.vocab).read_text(encoding="utf-8"))
    else:
        vocab = vocabulary_for(linked)
    diag = Diagnostics()
    fps = [fingerprint_document(d.doc_id, pairs, vocab, cfg.fingerprint_mode, diag)
           for d, pairs in zip(docs, linked)]
    outputs = [str(args.out)]
    if args.vocab_out:
        atomic_write_text(args.vocab_out, vocab.dumps())
        outputs.append(str(args.vocab_out))
    atomic_write_text(args.out, dump_fingerprints(fps))
    return 0, {"documents": len(fps), "vocab_size": len(vocab), "diagnostics": diag.to_dict(),
               "outputs": outputs}


def cmd_train(args, cfg):
    docs = [preprocess(d) for d in _load_corpus(_corpus_path(cfg, args))]
    unlabeled = [d.doc_id for d in docs if d.label is None]
    if unlabeled:
        raise UnlabeledDocument(f"training corpus has unlabeled document {unlabeled[0]!r}")
    fps = _paired(docs, _read_fingerprints(args.fingerprints))
    mc = cfg.model_config()
    model = train(examples_from(docs, fps, mc), mc)
    save_model(model, args.model_out)
    return 0, {"documents": len(docs), "vocab_size": model.vocab_size, "nonzero_weights": len(model.weights),
               "outputs": [str(args.model_out)]}


def cmd_predict(args, cfg):
    docs = [preprocess(d) for d in _load_corpus(_corpus_path(cfg, args))]
    fps = _paired(docs, _read_fingerprints(args.fingerprints))
    dims = {fp.dim for fp in fps}
    try:
        model = load_model(args.model, expected_vocab_size=dims.pop() if len(dims) == 1 else None)
    except FileNotFoundError:
        raise MissingFile(args.model) from None
    out = []
    for doc, fp in zip(docs, fps):
        label, p = predict(model, featurize(doc, fp, model.config, model.vocab_size))
        out.append({"doc_id": doc.doc_id, "label": label.value, "probability": p})
    atomic_write_text(args.out, _jsonl(out))
    return 0, {"documents": len(out), "outputs": [str(args.out)]}


def cmd_evaluate(args, cfg):
    raw = _load_corpus(_corpus_path(cfg, args))
    kb = _kb(cfg, args)
    result = run_pipeline(raw, kb, cfg.model_config(), cfg.train_fraction)
    outputs = []
    if args.model_out:
        atomic_write_text(args.model_out, model_to_json(result.model))
        outputs.append(str(args.model_out))
    if args.predictions_out:
        atomic_write_text(args.predictions_out, _jsonl(
            {"doc_id": i, "label": lab.value, "probability": p} for i, lab, p in result.predictions))
        outputs.append(str(args.predictions_out))
    if args.csv_out:
        atomic_write_text(args.csv_out, result.report.to_csv())
        outputs.append(str(args.csv_out))
    atomic_write_text(args.report_out, result.report.to_json())
    outputs.append(str(args.report_out))
    return 0, {"train_documents": len(result.train_ids), "test_documents": len(result.test_ids),
               "vocab_size": len(result.vocab), "macro_f1": result.report.macro_f1,
               "micro_f1": result.report.micro_f1, "outputs": outputs}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file (overridden by $SEMCAFE_CONFIG)")
    common.add_argument("--no-timings", action="store_true", help="omit elapsed time from the summary line")
    for name, kw in _CONFIG_FLAGS.items():
        common.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **kw)
    scaling = common.add_mutually_exclusive_group()
    scaling.add_argument("--feature-scaling", dest="feature_scaling", action="store_true", default=None)
    scaling.add_argument("--no-feature-scaling", dest="feature_scaling", action="store_false")

    parser = argparse.ArgumentParser(prog="semcafe", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    p = add("kb-validate", cmd_kb_validate, "load a KB directory and print a validation report")
    p.add_argument("--kb", help="KB directory")

    p = add("ingest", cmd_ingest, "clean and tokenize a corpus")
    p.add_argument("--corpus")
    p.add_argument("--out", required=True)

    p = add("link", cmd_link, "spot and disambiguate entities per document")
    p.add_argument("--corpus")
    p.add_argument("--kb")
    p.add_argument("--out", required=True)

    p = add("fingerprint", cmd_fingerprint, "compute semantic fingerprints")
    p.add_argument("--corpus")
    p.add_argument("--kb")
    p.add_argument("--out", required=True)
    p.add_argument("--vocab", help="reuse a frozen type vocabulary (one type per line)")
    p.add_argument("--vocab-out", help="write the type vocabulary used")

    p = add("train", cmd_train, "train the classifier from a labelled corpus and its fingerprints")
    p.add_argument("--corpus")
    p.add_argument("--fingerprints", required=True)
    p.add_argument("--model-out", required=True)

    p = add("predict", cmd_predict, "label documents with a trained model")
    p.add_argument("--corpus")
    p.add_argument("--fingerprints", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)

    p = add("evaluate", cmd_evaluate, "stratified split, train, and score on the held-out part")
    p.add_argument("--corpus")
    p.add_argument("--kb")
    p.add_argument("--report-out", required=True)
    p.add_argument("--csv-out")
    p.add_argument("--model-out")
    p.add_argument("--predictions-out")
    return parser


def _fail(code: str, detail: str, exit_code: int) -> int:
    print(json.dumps({"error": code, "detail": detail}), file=sys.stderr)
    return exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = resolve_config(args.config, {k: getattr(args, k, None) for k in RunConfig.__dataclass_fields__})
        cfg.model_config()  # validate hyper-parameters up front
        status, summary = args.func(args, cfg)
    except SemcafeError as exc:
        return _fail(exc.code, str(exc), exc.exit_code)
    except FileNotFoundError as exc:
        return _fail("MissingFile", str(exc), 2)
    except (OSError, UnicodeDecodeError) as exc:
        return _fail("IOError", str(exc), 2)
    except ValueError as exc:
        return _fail("InvalidConfig", str(exc), 2)
    if summary:
        summary = {"command": args.command, **summary}
        if not args.no_timings:
            summary["elapsed_s"] = round(time.perf_counter() - started, 4)
        print(json.dumps(summary, sort_keys=True))
    return status


if __name__ == "__main__":
    sys.exit(main())
