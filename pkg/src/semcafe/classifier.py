"""Hashed-text + fingerprint features and an L2-regularized logistic regression.

Feature layout: positions ``[0, H)`` hold hashed token counts, positions
``[H, H + |T|)`` hold the fingerprint. Labels encode reliable as 1.

Token hashing is pinned: BLAKE2b with an 8-byte digest, salted with the
hashing seed packed as little-endian unsigned 64-bit; the digest is read as a
little-endian integer and reduced mod H. Changing it invalidates every saved
model.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from collections import Counter
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ._io import atomic_write_text
from .errors import DimensionMismatch, EmptyCorpus, LayoutMismatch, MalformedModelFile, SingleClassCorpus
from .fingerprint import MODES, Fingerprint
from .text_pipeline import CleanDocument, Label

FORMAT_VERSION = 1
FEATURE_SETS = ("text+fingerprint", "text", "fingerprint")

# derived-seed offsets from the one top-level seed
SPLIT_SEED_OFFSET = 1
SHUFFLE_SEED_OFFSET = 2
HASH_SEED_OFFSET = 3

_P_LO = math.nextafter(0.0, 1.0)
_P_HI = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class ModelConfig:
    hash_dim: int = 2**18
    learning_rate: float = 0.5
    epochs: int = 10
    l2_penalty: float = 1e-5
    seed: int = 13
    fingerprint_mode: str = "unique_entity"
    feature_scaling: bool = True
    feature_set: str = "text+fingerprint"

    def __post_init__(self):
        if self.hash_dim < 1:
            raise ValueError("hash_dim must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.learning_rate <= 0 or not 0 <= self.l2_penalty or self.learning_rate * self.l2_penalty >= 1:
            raise ValueError("need learning_rate > 0, l2_penalty >= 0 and learning_rate * l2_penalty < 1")
        if self.fingerprint_mode not in MODES:
            raise ValueError(f"unknown fingerprint_mode {self.fingerprint_mode!r}")
        if self.feature_set not in FEATURE_SETS:
            raise ValueError(f"unknown feature_set {self.feature_set!r}")

    @property
    def hash_seed(self) -> int:
        return self.seed + HASH_SEED_OFFSET

    @property
    def shuffle_seed(self) -> int:
        return self.seed + SHUFFLE_SEED_OFFSET

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in obj.items() if k in known})


@dataclass(frozen=True)
class FeatureVector:
    entries: dict[int, float]
    dim: int

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.fromiter(sorted(self.entries), dtype=np.int64, count=len(self.entries))
        val = np.array([self.entries[i] for i in idx.tolist()], dtype=np.float64)
        return idx, val

    def dense(self) -> np.ndarray:
        v = np.zeros(self.dim)
        for i, x in self.entries.items():
            v[i] = x
        return v


@lru_cache(maxsize=1 << 17)
def token_hash(token: str, seed: int) -> int:
    salt = struct.pack("<Q", seed % (1 << 64))
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, salt=salt).digest()
    return int.from_bytes(digest, "little")


def _l2_scaled(block: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(sum(v * v for v in block.values()))
    return {k: v / norm for k, v in block.items()} if norm else block


def featurize(doc: CleanDocument, fp: Fingerprint, config: ModelConfig,
              vocab_size: int | None = None) -> FeatureVector:
    if vocab_size is not None and fp.dim != vocab_size:
        raise DimensionMismatch(f"fingerprint dim {fp.dim} != vocabulary size {vocab_size}")
    H = config.hash_dim
    entries: dict[int, float] = {}
    if config.feature_set != "fingerprint":
        text = Counter(token_hash(t, config.hash_seed) % H for t in doc.tokens)
        block = {k: float(v) for k, v in text.items()}
        entries.update(_l2_scaled(block) if config.feature_scaling else block)
    if config.feature_set != "text":
        block = {H + p: float(c) for p, c in fp.counts.items()}
        entries.update(_l2_scaled(block) if config.feature_scaling else block)
    return FeatureVector(entries, H + fp.dim)


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logistic_gradient(w: np.ndarray, b: float, x: np.ndarray, y: int, l2: float) -> tuple[np.ndarray, float]:
    """Gradient of -log-likelihood(y | x) + l2/2 * ||w||^2 w.r.t. (w, b)."""
    g = sigmoid(float(w @ x) + b) - y
    return g * x + l2 * w, g


@dataclass(frozen=True)
class ModelParams:
    weights: dict[int, float]
    bias: float
    config: ModelConfig
    vocab_size: int
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def dim(self) -> int:
        return self.config.hash_dim + self.vocab_size

    def decision(self, x: FeatureVector) -> float:
        if x.dim != self.dim:
            raise DimensionMismatch(f"feature dim {x.dim} != model dim {self.dim}")
        w = self.weights
        return self.bias + sum(w.get(i, 0.0) * v for i, v in x.entries.items())


def train(examples: Sequence[tuple[FeatureVector, Label]], config: ModelConfig) -> ModelParams:
    """Seeded per-example SGD on the logistic loss.

    Each step applies ``w <- w - lr*(p - y)*x - lr*l2*w`` and
    ``b <- b - lr*(p - y)``. The shrink term is carried as a scalar factor on
    the weight array so a step only touches the example's non-zeros.
    """
    if not examples:
        raise EmptyCorpus("no training examples")
    labels = {lab for _, lab in examples}
    if len(labels) < 2:
        raise SingleClassCorpus(f"training corpus has only label(s) {sorted(l.value for l in labels)}")
    dim = examples[0][0].dim
    if any(x.dim != dim for x, _ in examples):
        raise DimensionMismatch("training vectors do not share one layout")
    vocab_size = dim - config.hash_dim
    if vocab_size < 0:
        raise DimensionMismatch(f"feature dim {dim} smaller than hash_dim {config.hash_dim}")

    data = [(*x.arrays(), lab.numeric) for x, lab in examples]
    lr, l2 = config.learning_rate, config.l2_penalty
    shrink = 1.0 - lr * l2
    v = np.zeros(dim)
    scale = 1.0
    b = 0.0
    rng = np.random.default_rng(config.shuffle_seed)
    for _ in range(config.epochs):
        for k in rng.permutation(len(data)).tolist():
            idx, val, y = data[k]
            g = sigmoid(scale * float(v[idx] @ val) + b) - y
            scale *= shrink
            v[idx] -= (lr * g / scale) * val
            b -= lr * g
            if scale < 1e-150:
                v *= scale
                scale = 1.0
    w = v * scale
    nz = np.flatnonzero(w)
    return ModelParams({int(i): float(w[i]) for i in nz}, float(b), config, vocab_size)


def predict(model: ModelParams, x: FeatureVector) -> tuple[Label, float]:
    z = model.decision(x)
    p = min(max(sigmoid(z), _P_LO), _P_HI)
    return (Label.RELIABLE if z >= 0 else Label.UNRELIABLE), p


# -- persistence --------------------------------------------------------------


def model_to_json(model: ModelParams) -> str:
    obj = {
        "format_version": FORMAT_VERSION,
        "config": asdict(model.config),
        "vocab_size": model.vocab_size,
        "bias": model.bias,
        "weights": {str(i): repr(model.weights[i]) for i in sorted(model.weights)},
    }
    obj.update(model.extra)
    return json.dumps(obj, sort_keys=False, separators=(",", ":")) + "\n"


def save_model(model: ModelParams, path) -> None:
    atomic_write_text(path, model_to_json(model))


def model_from_json(text: str, expected_vocab_size: int | None = None) -> ModelParams:
    try:
        obj = json.loads(text)
        if not isinstance(obj, dict) or obj.get("format_version") != FORMAT_VERSION:
            raise ValueError("unsupported or missing format_version")
        config = ModelConfig.from_dict(obj["config"])
        vocab_size = int(obj["vocab_size"])
        bias = float(obj["bias"])
        weights = {int(k): float(v) for k, v in obj["weights"].items()}
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise MalformedModelFile(f"cannot read model: {exc}") from None
    if expected_vocab_size is not None and vocab_size != expected_vocab_size:
        raise LayoutMismatch(f"model vocab_size {vocab_size} != fingerprint dim {expected_vocab_size}")
    dim = config.hash_dim + vocab_size
    if any(not 0 <= i < dim for i in weights):
        raise LayoutMismatch(f"weight positions outside [0, {dim})")
    extra = {k: v for k, v in obj.items()
             if k not in ("format_version", "config", "vocab_size", "bias", "weights")}
    return ModelParams(weights, bias, config, vocab_size, extra)


def load_model(path, expected_vocab_size: int | None = None) -> ModelParams:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except UnicodeDecodeError as exc:
        raise MalformedModelFile(str(exc)) from None
    return model_from_json(text, expected_vocab_size)


def examples_from(docs: Iterable[CleanDocument], fps: Iterable[Fingerprint], config: ModelConfig,
                  vocab_size: int | None = None) -> list[tuple[FeatureVector, Label]]:
    return [(featurize(d, fp, config, vocab_size), d.label) for d, fp in zip(docs, fps)]
