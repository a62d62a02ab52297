"""Lead-vs-support classification from byline and career features, and L-ratio extrapolation."""

from __future__ import annotations

import hashlib
import io
import json
import math
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import AuthorIndex, PaperRecord

FEATURE_NAMES = (
    "is_first_author", "is_corresponding", "frac_refs_introduced", "frac_topics_directed",
    "career_age", "log_prior_citations", "n_prior_topics", "n_prior_papers",
    "byline_position_norm", "refs_missing", "topics_missing",
)
MODEL_MAGIC = b"TEAMSCOPE-MODEL"
MODEL_VERSION = 1


def introduced_references(author_id: str, paper: PaperRecord, index: AuthorIndex) -> float:
    """Share of the paper's references the author had cited or written before this year.

    NaN when the paper has no references.
    """
    refs = set(paper.references)
    if not refs:
        return float("nan")
    prior = index.prior_references(author_id, paper.year)
    return len(refs & prior) / len(refs)


def directed_topics(author_id: str, paper: PaperRecord, index: AuthorIndex) -> float:
    """Share of the paper's topics the author had worked on before this year (NaN if no topics)."""
    topics = set(paper.topics)
    if not topics:
        return float("nan")
    prior = index.prior_topics(author_id, paper.year)
    return len(topics & prior) / len(topics)


@dataclass(frozen=True)
class AuthorPaperFeatures:
    is_first_author: float
    is_corresponding: float
    frac_refs_introduced: float
    frac_topics_directed: float
    career_age: float
    log_prior_citations: float
    n_prior_topics: float
    n_prior_papers: float
    byline_position_norm: float
    refs_missing: float
    topics_missing: float

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in FEATURE_NAMES], dtype=float)


def author_features(author_id: str, paper: PaperRecord, index: AuthorIndex) -> AuthorPaperFeatures:
    """Feature vector for one (author, paper); all career terms use data dated before the paper's year."""
    pos = paper.byline.index(author_id)
    n = paper.team_size
    refs = introduced_references(author_id, paper, index)
    topics = directed_topics(author_id, paper, index)
    return AuthorPaperFeatures(
        is_first_author=float(pos == 0),
        is_corresponding=float(author_id in paper.corresponding),
        frac_refs_introduced=0.0 if math.isnan(refs) else refs,
        frac_topics_directed=0.0 if math.isnan(topics) else topics,
        career_age=float(index.career_age(author_id, paper.year)),
        log_prior_citations=math.log1p(index.prior_citations(author_id, paper.year)),
        n_prior_topics=float(len(index.prior_topics(author_id, paper.year))),
        n_prior_papers=float(index.prior_papers(author_id, paper.year)),
        byline_position_norm=pos / (n - 1) if n > 1 else 0.0,
        refs_missing=float(math.isnan(refs)),
        topics_missing=float(math.isnan(topics)),
    )


def paper_feature_matrix(paper: PaperRecord, index: AuthorIndex) -> np.ndarray:
    return np.stack([author_features(a, paper, index).as_array() for a in paper.byline])


def evaluate_precision_recall(predictions: Sequence[int], labels: Sequence[int]) -> tuple[float, float]:
    """Precision and recall of the positive class; precision is NaN with no predicted positives."""
    pred = np.asarray(predictions).astype(bool)
    lab = np.asarray(labels).astype(bool)
    if pred.shape != lab.shape:
        raise ValueError("predictions and labels differ in length")
    tp = int((pred & lab).sum())
    fp = int((pred & ~lab).sum())
    fn = int((~pred & lab).sum())
    precision = tp / (tp + fp) if tp + fp else float("nan")
    recall = tp / (tp + fn) if tp + fn else float("nan")
    return precision, recall


def split_by_paper(paper_ids: Sequence[str], fractions=(0.6, 0.2, 0.2), seed: int = 0
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Boolean masks (train, validation, test) that never split a paper's rows."""
    ids = np.asarray(paper_ids)
    unique = np.unique(ids)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(unique))
    cuts = np.cumsum(np.asarray(fractions) / np.sum(fractions))[:-1]
    bounds = np.round(cuts * len(unique)).astype(int)
    groups = np.split(unique[perm], bounds)
    return tuple(np.isin(ids, g) for g in groups)


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 16
    epochs: int = 400
    lr: float = 0.01
    l2: float = 1e-4
    seed: int = 0
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    unevenness: str = "gini"  # "gini" | "variance" | "range"

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(asdict(self), sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RoleClassifier:
    """One-hidden-layer tanh network with a sigmoid output (probability of Lead)."""

    mean: np.ndarray
    scale: np.ndarray
    W1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    threshold: float = 0.5

    def predict_proba(self, X) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) - self.mean) / self.scale
        H = np.tanh(Z @ self.W1 + self.b1)
        logits = H @ self.w2 + self.b2
        # keep the output strictly inside (0, 1)
        return np.clip(1.0 / (1.0 + np.exp(-logits)), 1e-12, 1 - 1e-12)

    def predict(self, X, threshold: float | None = None) -> np.ndarray:
        t = self.threshold if threshold is None else threshold
        return (self.predict_proba(X) >= t).astype(int)


def _fit_network(X: np.ndarray, y: np.ndarray, cfg: TrainConfig) -> RoleClassifier:
    rng = np.random.default_rng(cfg.seed)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    d = X.shape[1]
    params = {
        "W1": rng.normal(0, 1 / math.sqrt(d), (d, cfg.hidden)),
        "b1": np.zeros(cfg.hidden),
        "w2": rng.normal(0, 1 / math.sqrt(cfg.hidden), cfg.hidden),
        "b2": np.zeros(1),
    }
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(v) for k, v in params.items()}
    b1, b2, eps = 0.9, 0.999, 1e-8
    n = len(y)
    for t in range(1, cfg.epochs + 1):
        H = np.tanh(Z @ params["W1"] + params["b1"])
        p = 1.0 / (1.0 + np.exp(-(H @ params["w2"] + params["b2"][0])))
        g_logit = (p - y) / n
        grads = {
            "w2": H.T @ g_logit + cfg.l2 * params["w2"],
            "b2": np.array([g_logit.sum()]),
        }
        g_h = np.outer(g_logit, params["w2"]) * (1 - H ** 2)
        grads["W1"] = Z.T @ g_h + cfg.l2 * params["W1"]
        grads["b1"] = g_h.sum(axis=0)
        for k in params:
            m[k] = b1 * m[k] + (1 - b1) * grads[k]
            v[k] = b2 * v[k] + (1 - b2) * grads[k] ** 2
            mhat = m[k] / (1 - b1 ** t)
            vhat = v[k] / (1 - b2 ** t)
            params[k] = params[k] - cfg.lr * mhat / (np.sqrt(vhat) + eps)
    return RoleClassifier(mean, scale, params["W1"], params["b1"], params["w2"], float(params["b2"][0]))


def best_f1_threshold(proba: np.ndarray, labels: np.ndarray) -> float:
    """Threshold among observed probabilities that maximizes F1 (lowest wins ties)."""
    labels = labels.astype(bool)
    best_t, best_f1 = 0.5, -1.0
    for t in np.unique(proba):
        pred = proba >= t
        tp = (pred & labels).sum()
        denom = pred.sum() + labels.sum()
        f1 = 2 * tp / denom if denom else 0.0
        if f1 > best_f1 + 1e-15:
            best_t, best_f1 = float(t), f1
    return best_t


@dataclass
class TrainReport:
    precision: float
    recall: float
    threshold: float
    n_train: int
    n_val: int
    n_test: int
    base_rate: float
    split_papers: dict[str, list[str]] = field(default_factory=dict, repr=False)


def train_role_classifier(X, labels, paper_ids, config: TrainConfig | None = None
                          ) -> tuple[RoleClassifier, TrainReport]:
    """Fit the classifier with paper-level train/validation/test splits.

    The decision threshold maximizes F1 on the validation split; precision
    and recall are reported on the test split.
    """
    cfg = config or TrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(labels).astype(float)
    if len(np.unique(y)) < 2:
        raise ValueError("training needs both Lead and Support examples")
    train, val, test = split_by_paper(paper_ids, cfg.fractions, cfg.seed)
    if len(np.unique(y[train])) < 2:
        raise ValueError("training split holds a single class")
    clf = _fit_network(X[train], y[train], cfg)
    if val.any():
        clf.threshold = best_f1_threshold(clf.predict_proba(X[val]), y[val])
    eval_mask = test if test.any() else train
    precision, recall = evaluate_precision_recall(clf.predict(X[eval_mask]), y[eval_mask])
    ids = np.asarray(paper_ids)
    report = TrainReport(
        precision, recall, clf.threshold, int(train.sum()), int(val.sum()), int(test.sum()),
        float(y[eval_mask].mean()),
        {name: sorted(set(ids[mask].tolist())) for name, mask in
         (("train", train), ("validation", val), ("test", test))},
    )
    return clf, report


def gini(values) -> float:
    """Gini coefficient of non-negative values (0 for all-equal or all-zero)."""
    x = np.asarray(values, dtype=float)
    if len(x) == 0 or x.sum() <= 0:
        return 0.0
    diff = np.abs(x[:, None] - x[None, :]).sum()
    return float(diff / (2 * len(x) ** 2 * x.mean()))


def unevenness(p, kind: str = "gini") -> float:
    p = np.asarray(p, dtype=float)
    if kind == "gini":
        return gini(p)
    if kind == "variance":
        return float(p.var())
    if kind == "range":
        return float(p.max() - p.min()) if len(p) else 0.0
    raise ValueError(f"unknown unevenness measure {kind!r}")


def team_design(proba: np.ndarray, threshold: float, kind: str = "gini") -> np.ndarray:
    """Team-level regressors for the L-ratio head."""
    n = len(proba)
    return np.array([1.0, proba.mean(), unevenness(proba, kind), 1.0 / n,
                     (proba >= threshold).mean()])


@dataclass
class LRatioPredictor:
    classifier: RoleClassifier
    head: np.ndarray
    unevenness: str = "gini"
    config_hash: str = ""

    def predict(self, X_team) -> float:
        """Predicted L-ratio for one team from its per-author feature rows, clipped to [1/n, 1]."""
        X_team = np.asarray(X_team, dtype=float)
        n = X_team.shape[0]
        proba = self.classifier.predict_proba(X_team)
        raw = float(team_design(proba, self.classifier.threshold, self.unevenness) @ self.head)
        return min(1.0, max(1.0 / n, raw))

    def save(self, path: str | Path) -> None:
        buf = io.BytesIO()
        c = self.classifier
        np.savez(buf, mean=c.mean, scale=c.scale, W1=c.W1, b1=c.b1, w2=c.w2,
                 b2=np.array([c.b2]), threshold=np.array([c.threshold]), head=self.head)
        meta = json.dumps({"unevenness": self.unevenness, "config_hash": self.config_hash,
                           "features": list(FEATURE_NAMES)}, sort_keys=True).encode()
        with open(path, "wb") as fh:
            fh.write(MODEL_MAGIC)
            fh.write(struct.pack("<HI", MODEL_VERSION, len(meta)))
            fh.write(meta)
            fh.write(buf.getvalue())

    @classmethod
    def load(cls, path: str | Path) -> "LRatioPredictor":
        data = Path(path).read_bytes()
        if not data.startswith(MODEL_MAGIC):
            raise ValueError(f"{path}: not a teamscope model file")
        off = len(MODEL_MAGIC)
        version, mlen = struct.unpack_from("<HI", data, off)
        if version != MODEL_VERSION:
            raise ValueError(f"{path}: model version {version}, expected {MODEL_VERSION}")
        off += struct.calcsize("<HI")
        meta = json.loads(data[off:off + mlen])
        arr = np.load(io.BytesIO(data[off + mlen:]))
        clf = RoleClassifier(arr["mean"], arr["scale"], arr["W1"], arr["b1"], arr["w2"],
                             float(arr["b2"][0]), float(arr["threshold"][0]))
        return cls(clf, arr["head"], meta["unevenness"], meta["config_hash"])


def fit_lratio_head(classifier: RoleClassifier, teams: Sequence[np.ndarray],
                    targets: Sequence[float], kind: str = "gini", ridge: float = 1e-6) -> np.ndarray:
    """Least-squares head mapping team aggregates to the observed L-ratio."""
    if not len(teams):
        raise ValueError("no training team has a known L-ratio")
    D = np.stack([team_design(classifier.predict_proba(T), classifier.threshold, kind) for T in teams])
    y = np.asarray(targets, dtype=float)
    A = D.T @ D + ridge * np.eye(D.shape[1])
    return np.linalg.solve(A, D.T @ y)


def train_lratio_predictor(X, labels, paper_ids, team_lratio: Mapping[str, float],
                           config: TrainConfig | None = None
                           ) -> tuple[LRatioPredictor, TrainReport]:
    """Train the role classifier, then fit the L-ratio head on the training papers."""
    cfg = config or TrainConfig()
    clf, report = train_role_classifier(X, labels, paper_ids, cfg)
    X = np.asarray(X, dtype=float)
    ids = np.asarray(paper_ids)
    train_papers = [p for p in report.split_papers["train"] if p in team_lratio]
    rows = {p: np.flatnonzero(ids == p) for p in train_papers}
    head = fit_lratio_head(clf, [X[rows[p]] for p in train_papers],
                           [team_lratio[p] for p in train_papers], cfg.unevenness)
    return LRatioPredictor(clf, head, cfg.unevenness, cfg.digest()), report


def predict_lratio(X_team, predictor: LRatioPredictor) -> float:
    return predictor.predict(X_team)
