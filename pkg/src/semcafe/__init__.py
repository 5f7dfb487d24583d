"""Entity-type semantic fingerprints and a linear news-reliability classifier."""

from .classifier import ModelConfig, ModelParams, featurize, load_model, predict, save_model, train
from .entity_linker import LinkedEntity, Mention, build_matcher, disambiguate, link_document, spot
from .eval_harness import EvalReport, SplitSpec, compute_metrics, evaluate_pipeline, run_pipeline, stratified_split
from .fingerprint import Fingerprint, TypeVocabulary, build_vocabulary, fingerprint_corpus, fingerprint_document
from .kb_store import EntityId, KnowledgeBase, load_kb, surface_lookup, validate_kb
from .text_pipeline import CleanDocument, Label, RawDocument, clean_text, ingest_corpus, preprocess, strip_boilerplate, tokenize
from .type_dag import TypeDag, closure, type_vector

__version__ = "0.1.0"
