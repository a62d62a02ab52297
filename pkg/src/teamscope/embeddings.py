"""Skip-gram with negative sampling over paper keyword bags.

Every paper's keyword list is one unordered context window: each ordered
pair of distinct positions is a positive (center, context) example.
"""

from __future__ import annotations

import hashlib
import json
import struct
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

VEC_MAGIC = b"TEAMSCOPE-VEC"
VEC_VERSION = 1


@dataclass(frozen=True)
class EmbeddingConfig:
    dim: int = 100
    epochs: int = 5
    negatives: int = 5
    lr: float = 0.025
    min_lr: float = 1e-4
    min_count: int = 5
    seed: int = 0
    batch_pairs: int = 512
    workers: int = 1

    def digest(self) -> str:
        fields = {k: v for k, v in asdict(self).items() if k != "workers"}
        return hashlib.sha256(json.dumps(fields, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class EmbeddingModel:
    vocab: list[str]
    vectors: np.ndarray
    config: EmbeddingConfig

    def __post_init__(self):
        self._index = {w: i for i, w in enumerate(self.vocab)}

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __contains__(self, key: object) -> bool:
        return key in self._index

    def __getitem__(self, key: str) -> np.ndarray:
        return self.vectors[self._index[key]]

    def save(self, path: str | Path) -> None:
        header = json.dumps({
            "dim": self.dim,
            "vocab_size": len(self.vocab),
            "config_hash": self.config.digest(),
            "config": asdict(self.config),
            "vocab": self.vocab,
        }, sort_keys=True).encode("utf-8")
        with open(path, "wb") as fh:
            fh.write(VEC_MAGIC)
            fh.write(struct.pack("<HI", VEC_VERSION, len(header)))
            fh.write(header)
            fh.write(np.ascontiguousarray(self.vectors, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingModel":
        data = Path(path).read_bytes()
        if not data.startswith(VEC_MAGIC):
            raise ValueError(f"{path}: not a teamscope embedding file")
        off = len(VEC_MAGIC)
        version, hlen = struct.unpack_from("<HI", data, off)
        if version != VEC_VERSION:
            raise ValueError(f"{path}: embedding version {version}, expected {VEC_VERSION}")
        off += struct.calcsize("<HI")
        header = json.loads(data[off:off + hlen])
        off += hlen
        vec = np.frombuffer(data, dtype="<f8", offset=off).reshape(header["vocab_size"], header["dim"])
        return cls(header["vocab"], vec.astype(float), EmbeddingConfig(**header["config"]))


def build_vocab(bags: Iterable[Sequence[str]], min_count: int) -> tuple[list[str], np.ndarray]:
    counts = Counter(k for bag in bags for k in bag)
    vocab = sorted(k for k, c in counts.items() if c >= min_count)
    return vocab, np.array([counts[k] for k in vocab], dtype=float)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _pairs(bag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    L = len(bag)
    ii, jj = np.nonzero(~np.eye(L, dtype=bool))
    return bag[ii], bag[jj]


def _train_shard(W_in, W_out, docs, noise_cdf, cfg, rng, progress):
    """SGD over a list of encoded keyword bags; updates W_in/W_out in place."""
    start, total = progress
    centers, contexts = [], []
    n_pairs = 0
    seen = start

    def flush():
        nonlocal centers, contexts
        if not centers:
            return
        c = np.concatenate(centers)
        o = np.concatenate(contexts)
        centers, contexts = [], []
        frac = min(1.0, seen / max(total, 1))
        lr = max(cfg.min_lr, cfg.lr * (1.0 - frac))
        neg = np.searchsorted(noise_cdf, rng.random((len(c), cfg.negatives)), side="right")
        neg = np.minimum(neg, len(noise_cdf) - 1)
        v = W_in[c]
        u_pos = W_out[o]
        u_neg = W_out[neg]
        g_pos = (1.0 - _sigmoid(np.einsum("ij,ij->i", v, u_pos))) * lr
        g_neg = -_sigmoid(np.einsum("ij,ikj->ik", v, u_neg)) * lr
        grad_in = g_pos[:, None] * u_pos + np.einsum("ik,ikj->ij", g_neg, u_neg)
        np.add.at(W_out, o, g_pos[:, None] * v)
        np.add.at(W_out, neg, g_neg[:, :, None] * v[:, None, :])
        np.add.at(W_in, c, grad_in)

    for doc in docs:
        c, o = _pairs(doc)
        centers.append(c)
        contexts.append(o)
        n_pairs += len(c)
        seen += len(c)
        if n_pairs >= cfg.batch_pairs:
            flush()
            n_pairs = 0
    flush()


def train_embeddings(bags: Iterable[Sequence[str]], config: EmbeddingConfig | None = None,
                     **overrides) -> EmbeddingModel:
    """Learn keyword vectors from co-occurrence within papers.

    With ``workers=1`` training is single-threaded and bitwise reproducible
    for a fixed seed. ``workers > 1`` shards papers across threads that
    update the shared matrices without locks; faster, not reproducible.
    Negatives come from the unigram distribution raised to 3/4.
    """
    cfg = config or EmbeddingConfig()
    if overrides:
        cfg = EmbeddingConfig(**{**asdict(cfg), **overrides})
    bags = [list(b) for b in bags]
    vocab, counts = build_vocab(bags, cfg.min_count)
    if not vocab:
        raise ValueError("empty vocabulary: no keyword reaches min_count")
    index = {k: i for i, k in enumerate(vocab)}
    docs = []
    for bag in bags:
        enc = np.array([index[k] for k in bag if k in index], dtype=np.int64)
        if len(enc) >= 2:
            docs.append(enc)
    if not docs:
        raise ValueError("no paper has two or more in-vocabulary keywords")

    ss = np.random.SeedSequence(cfg.seed)
    init_rng, order_ss, neg_ss = (np.random.default_rng(s) for s in ss.spawn(3))
    V, d = len(vocab), cfg.dim
    W_in = (init_rng.random((V, d)) - 0.5) / d
    W_out = np.zeros((V, d))
    noise = counts ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    pairs_per_epoch = sum(len(doc) * (len(doc) - 1) for doc in docs)
    total = pairs_per_epoch * cfg.epochs
    for epoch in range(cfg.epochs):
        order = order_ss.permutation(len(docs))
        epoch_docs = [docs[i] for i in order]
        start = epoch * pairs_per_epoch
        if cfg.workers <= 1:
            _train_shard(W_in, W_out, epoch_docs, noise_cdf, cfg, neg_ss, (start, total))
        else:
            shards = [epoch_docs[w::cfg.workers] for w in range(cfg.workers)]
            rngs = [np.random.default_rng(s) for s in
                    np.random.SeedSequence([cfg.seed, epoch]).spawn(cfg.workers)]
            with ThreadPoolExecutor(cfg.workers) as pool:
                list(pool.map(
                    lambda args: _train_shard(W_in, W_out, args[0], noise_cdf, cfg, args[1], (start, total)),
                    zip(shards, rngs),
                ))
    return EmbeddingModel(vocab, W_in, cfg)
