"""File-level pipeline stages and the cached end-to-end runner."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .activity_graph import agreement_with_reference, build_cooccurrence, cluster_modularity, label_clusters
from .corpus import Snapshot, load_corpus_bundle, load_snapshot, read_corpus, save_snapshot, summarize
from .econometrics import bootstrap_binned_curve, ols, within_fixed_effects
from .embeddings import EmbeddingConfig, EmbeddingModel, train_embeddings
from .lexicon import REFERENCE_PARTITION, Role, load_lexicon
from .metrics import METRIC_COLUMNS, MetricOptions, compute_metrics
from .parser import ActivityProfile, extract_profiles
from .predictor import LRatioPredictor, TrainConfig, paper_feature_matrix, train_lratio_predictor
from .roles import RoleAssignment, assign_roles, lratios_from_assignments

logger = logging.getLogger(__name__)

CONTROL_COLUMNS = {"size": "n", "team_size": "n", "age_mean": "age_mean",
                   "mean_career_age": "age_mean", "age_sd": "age_sd", "sd_career_age": "age_sd"}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, error: Exception):
        super().__init__(f"stage {stage!r} failed: {error}")
        self.stage = stage
        self.error = error


# ---------------------------------------------------------------- file helpers

def file_digest(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    return str(v)


def write_csv(path: str | Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row.get(c)) for c in columns])


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _num(s: str) -> float:
    return float(s) if s not in ("", None) else float("nan")


def write_ndjson(path: str | Path, items) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(item.to_json(), sort_keys=True) + "\n")


def read_ndjson(path: str | Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_json(path: str | Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def _clean(obj):
    """Replace NaN floats by None so JSON output stays strict."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


# ---------------------------------------------------------------- stages

def stage_ingest(inputs: Sequence[str | Path], out: str | Path,
                 year_range: tuple[int, int] = (1900, 2100)) -> dict:
    corpus = read_corpus(list(inputs), tuple(year_range))
    snap = load_corpus_bundle(corpus)
    save_snapshot(snap, out)
    stats = summarize(corpus, snap.graph).as_dict()
    stats["timestamp_anomalies"] = snap.graph.anomalies
    return stats


def stage_parse(snapshot: str | Path, out: str | Path, report: str | Path,
                lexicon: str | Path | None = None) -> dict:
    snap = load_snapshot(snapshot)
    profiles, cov = extract_profiles(snap.corpus, load_lexicon(lexicon))
    write_ndjson(out, profiles)
    write_json(report, _clean(cov.to_json()))
    return cov.to_json()


def load_profiles(path) -> list[ActivityProfile]:
    return [ActivityProfile.from_json(r) for r in read_ndjson(path)]


def stage_cluster(profiles: str | Path, out: str | Path, seed: int = 0, resolution: float = 1.0,
                  unit: str = "pair") -> dict:
    graph = build_cooccurrence(load_profiles(profiles), unit=unit)
    part = cluster_modularity(graph, seed=seed, resolution=resolution)
    result = {
        **part.to_json(),
        "roles": label_clusters(part),
        "reference_agreement": agreement_with_reference(part),
        "seed": seed,
        "resolution": resolution,
        "unit": unit,
    }
    write_json(out, _clean(result))
    return result


def stage_roles(profiles: str | Path, out: str | Path, partition: str | Path | None = None,
                use_clusters: bool = False) -> dict:
    """Assign roles; the reference partition is used unless ``use_clusters`` is set."""
    mapping = REFERENCE_PARTITION
    if use_clusters:
        if partition is None:
            raise ValueError("use_clusters needs a partition file")
        with open(partition, encoding="utf-8") as fh:
            mapping = json.load(fh)["roles"]
    assignments = assign_roles(load_profiles(profiles), mapping)
    write_ndjson(out, assignments)
    counts = defaultdict(int)
    for a in assignments:
        counts[a.role.value] += 1
    return dict(counts)


def load_roles(path) -> list[RoleAssignment]:
    return [RoleAssignment.from_json(r) for r in read_ndjson(path)]


LRATIO_COLUMNS = ("paper_id", "n", "n_lead", "lratio", "tall", "source", "flags")


def stage_lratio(roles: str | Path, out: str | Path, promote: str | None = None) -> dict:
    lrs = lratios_from_assignments(load_roles(roles), promote=promote)
    rows = [{"paper_id": lr.paper_id, "n": lr.n, "n_lead": lr.n_lead, "lratio": lr.value,
             "tall": lr.tall, "source": lr.source, "flags": ";".join(lr.flags)} for lr in lrs]
    write_csv(out, LRATIO_COLUMNS, rows)
    return {"papers": len(rows), "valid": sum(lr.valid for lr in lrs)}


def _labeled_rows(snap: Snapshot, assignments: list[RoleAssignment]):
    by_paper: dict[str, dict[str, Role]] = defaultdict(dict)
    for a in assignments:
        by_paper[a.paper_id][a.author_id] = a.role
    X, y, ids, target = [], [], [], {}
    for pid, roles in by_paper.items():
        if pid not in snap.corpus:
            continue
        paper = snap.corpus[pid]
        if any(roles.get(a, Role.UNKNOWN) == Role.UNKNOWN for a in paper.byline):
            continue
        F = paper_feature_matrix(paper, snap.index)
        for k, a in enumerate(paper.byline):
            X.append(F[k])
            y.append(int(roles[a] == Role.LEAD))
            ids.append(pid)
        target[pid] = sum(roles[a] == Role.LEAD for a in paper.byline) / paper.team_size
    return np.array(X), np.array(y), np.array(ids), target


def stage_train(snapshot, roles, out, seed: int = 0, report: str | Path | None = None,
                **model_options) -> dict:
    snap = load_snapshot(snapshot)
    X, y, ids, target = _labeled_rows(snap, load_roles(roles))
    cfg = TrainConfig(seed=seed, **model_options)
    predictor, rep = train_lratio_predictor(X, y, ids, target, cfg)
    predictor.save(out)
    result = {"precision": rep.precision, "recall": rep.recall, "threshold": rep.threshold,
              "n_train": rep.n_train, "n_val": rep.n_val, "n_test": rep.n_test,
              "base_rate": rep.base_rate, "config_hash": cfg.digest()}
    if report is not None:
        write_json(report, _clean(result))
    return result


PRED_COLUMNS = ("paper_id", "n", "lratio", "tall", "source")


def stage_predict(snapshot, model, out, only_missing: bool = False,
                  roles: str | Path | None = None) -> dict:
    """Predicted L-ratio for every paper (or only papers lacking parsed roles)."""
    snap = load_snapshot(snapshot)
    predictor = LRatioPredictor.load(model)
    skip = set()
    if only_missing and roles is not None:
        skip = {a.paper_id for a in load_roles(roles)}
    rows = []
    for paper in snap.corpus:
        if paper.paper_id in skip:
            continue
        value = predictor.predict(paper_feature_matrix(paper, snap.index))
        rows.append({"paper_id": paper.paper_id, "n": paper.team_size, "lratio": value,
                     "tall": value < 0.5, "source": "predicted"})
    write_csv(out, PRED_COLUMNS, rows)
    return {"papers": len(rows)}


def stage_embed(snapshot, out, **options) -> dict:
    snap = load_snapshot(snapshot)
    cfg = EmbeddingConfig(**options)
    model = train_embeddings([p.topics for p in snap.corpus], cfg)
    model.save(out)
    return {"vocab_size": len(model.vocab), "dim": model.dim, "config_hash": cfg.digest()}


def stage_metrics(snapshot, roles, out, embeddings=None, predicted=None, model=None,
                  **options) -> dict:
    """Outcome table: parsed L-ratio where valid, otherwise the predicted one."""
    snap = load_snapshot(snapshot)
    assignments = load_roles(roles)
    role_map: dict[str, dict[str, Role]] = defaultdict(dict)
    for a in assignments:
        role_map[a.paper_id][a.author_id] = a.role
    lratio = {lr.paper_id: lr.value for lr in lratios_from_assignments(assignments) if lr.valid}
    if predicted is not None:
        predictor = LRatioPredictor.load(model) if model is not None else None
        for row in read_csv(predicted):
            pid = row["paper_id"]
            if pid in lratio or pid not in snap.corpus:
                continue
            lratio[pid] = float(row["lratio"])
            if predictor is not None:
                paper = snap.corpus[pid]
                lead = predictor.classifier.predict(paper_feature_matrix(paper, snap.index))
                role_map[pid] = {a: (Role.LEAD if l else Role.DIRECT) for a, l in zip(paper.byline, lead)}
    emb = EmbeddingModel.load(embeddings) if embeddings is not None else None
    ordered = {p.paper_id: lratio[p.paper_id] for p in snap.corpus if p.paper_id in lratio}
    rows = compute_metrics(snap.corpus, snap.graph, snap.index, ordered, role_map, emb,
                           MetricOptions(**options))
    write_csv(out, METRIC_COLUMNS, rows)
    return {"papers": len(rows)}


def _regression_frame(rows: list[dict], outcome: str, regressors: list[str]):
    keep = []
    for r in rows:
        vals = [_num(r[c]) for c in [outcome] + regressors]
        if any(math.isnan(v) for v in vals):
            continue
        if outcome == "c20plus" and "c20_censored" in r.get("flags", ""):
            continue
        keep.append((r, vals))
    return keep


def stage_regress(metrics, out, outcome: str, controls: Sequence[str] = (),
                  fe: str | None = None, snapshot=None, cluster: str | None = None) -> dict:
    """OLS of ``outcome`` on L-ratio plus controls, optionally with author fixed effects.

    With ``fe="author"`` each paper row is expanded to one row per byline
    author (needs ``snapshot``) and author means are absorbed.
    """
    rows = read_csv(metrics)
    if rows and outcome not in rows[0]:
        raise ValueError(f"unknown outcome column {outcome!r}")
    ctrl = []
    for c in controls:
        if c not in CONTROL_COLUMNS:
            raise ValueError(f"unknown control {c!r}; choose from {sorted(CONTROL_COLUMNS)}")
        ctrl.append(CONTROL_COLUMNS[c])
    regressors = ["lratio"] + list(dict.fromkeys(ctrl))
    data = _regression_frame(rows, outcome, regressors)
    if fe is None:
        y = np.array([v[0] for _, v in data])
        X = np.array([v[1:] for _, v in data]).reshape(len(data), len(regressors))
        if cluster is not None:
            raise ValueError("author clustering needs fe='author'")
        res = ols(y, X, regressors, add_intercept=True)
    elif fe == "author":
        if snapshot is None:
            raise ValueError("author fixed effects need --snapshot for bylines")
        snap = load_snapshot(snapshot)
        ys, Xs, ent = [], [], []
        for r, v in data:
            for a in snap.corpus[r["paper_id"]].byline:
                ys.append(v[0])
                Xs.append(v[1:])
                ent.append(a)
        cl = np.array(ent) if cluster == "author" else None
        res = within_fixed_effects(np.array(ys), np.array(Xs).reshape(len(ys), len(regressors)),
                                   np.array(ent), regressors, cluster=cl)
    else:
        raise ValueError(f"unsupported fixed effect {fe!r}")
    result = {"outcome": outcome, "fe": fe, "controls": list(controls), **res.to_json()}
    write_json(out, _clean(result))
    return result


CURVE_COLUMNS = ("bin", "lo", "hi", "n", "mean_x", "mean_y", "ci_low", "ci_high")


def stage_curve(metrics, out, x: str = "lratio", y: str = "novelty_score", bins: int = 10,
                n_boot: int = 1000, alpha: float = 0.05, seed: int = 0) -> dict:
    rows = read_csv(metrics)
    xs = np.array([_num(r[x]) for r in rows])
    ys = np.array([_num(r[y]) for r in rows])
    curve = bootstrap_binned_curve(xs, ys, bins, n_boot, alpha, seed)
    write_csv(out, CURVE_COLUMNS, [asdict(b) for b in curve])
    return {"bins": len(curve)}


# ---------------------------------------------------------------- runner

@dataclass
class PipelineConfig:
    inputs: list[str]
    output_dir: str = "teamscope_out"
    lexicon: str | None = None
    year_range: tuple[int, int] = (1900, 2100)
    seeds: dict = field(default_factory=lambda: {"cluster": 0, "train": 0, "bootstrap": 0,
                                                 "embedding": 0})
    resolution: float = 1.0
    cooccurrence_unit: str = "pair"
    promote: str | None = None
    model: dict = field(default_factory=dict)
    embedding: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    regressions: list = field(default_factory=lambda: [
        {"outcome": "novelty_score", "controls": ["size", "age_mean", "age_sd"]},
        {"outcome": "development_pct", "controls": ["size", "age_mean", "age_sd"]},
    ])
    curves: list = field(default_factory=lambda: [{"y": "novelty_score", "bins": 10}])
    base_dir: str = "."

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        raw.setdefault("base_dir", str(Path(path).resolve().parent))
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.year_range = tuple(cfg.year_range)
        return cfg

    def path(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q

    def validate(self) -> None:
        if not self.inputs:
            raise ValueError("config lists no input files")
        for p in self.inputs:
            if not self.path(p).exists():
                raise FileNotFoundError(f"input not found: {p}")
        if self.lexicon is not None and not self.path(self.lexicon).exists():
            raise FileNotFoundError(f"lexicon not found: {self.lexicon}")
        for name in ("cluster", "train", "bootstrap", "embedding"):
            if not isinstance(self.seeds.get(name), int):
                raise ValueError(f"seed {name!r} must be an explicit integer")

    def digest(self) -> str:
        raw = {k: v for k, v in asdict(self).items() if k != "base_dir"}
        return hashlib.sha256(json.dumps(raw, sort_keys=True, default=list).encode()).hexdigest()


@dataclass
class Stage:
    name: str
    inputs: list[Path]
    outputs: list[Path]
    params: dict
    run: Callable[[], dict]


def _stages(cfg: PipelineConfig) -> list[Stage]:
    out = cfg.path(cfg.output_dir)
    f = {name: out / name for name in (
        "corpus.snapshot", "profiles.ndjson", "coverage.json", "partition.json", "roles.ndjson",
        "lratio.csv", "model.bin", "train_report.json", "lratio_pred.csv", "model.vec",
        "metrics.csv")}
    inputs = [cfg.path(p) for p in cfg.inputs]
    lexicon = cfg.path(cfg.lexicon) if cfg.lexicon else None
    seeds = cfg.seeds
    emb = {"seed": seeds["embedding"], "min_count": 2, "dim": 32, **cfg.embedding}
    stages = [
        Stage("ingest", inputs, [f["corpus.snapshot"]], {"year_range": list(cfg.year_range)},
              lambda: stage_ingest(inputs, f["corpus.snapshot"], cfg.year_range)),
        Stage("parse", [f["corpus.snapshot"]] + ([lexicon] if lexicon else []),
              [f["profiles.ndjson"], f["coverage.json"]], {},
              lambda: stage_parse(f["corpus.snapshot"], f["profiles.ndjson"], f["coverage.json"], lexicon)),
        Stage("cluster", [f["profiles.ndjson"]], [f["partition.json"]],
              {"seed": seeds["cluster"], "resolution": cfg.resolution, "unit": cfg.cooccurrence_unit},
              lambda: stage_cluster(f["profiles.ndjson"], f["partition.json"], seeds["cluster"],
                                    cfg.resolution, cfg.cooccurrence_unit)),
        Stage("roles", [f["profiles.ndjson"]], [f["roles.ndjson"]], {},
              lambda: stage_roles(f["profiles.ndjson"], f["roles.ndjson"])),
        Stage("lratio", [f["roles.ndjson"]], [f["lratio.csv"]], {"promote": cfg.promote},
              lambda: stage_lratio(f["roles.ndjson"], f["lratio.csv"], cfg.promote)),
        Stage("train-roles", [f["corpus.snapshot"], f["roles.ndjson"]],
              [f["model.bin"], f["train_report.json"]], {"seed": seeds["train"], **cfg.model},
              lambda: stage_train(f["corpus.snapshot"], f["roles.ndjson"], f["model.bin"],
                                  seeds["train"], f["train_report.json"], **cfg.model)),
        Stage("predict", [f["corpus.snapshot"], f["model.bin"], f["roles.ndjson"]], [f["lratio_pred.csv"]],
              {"only_missing": True},
              lambda: stage_predict(f["corpus.snapshot"], f["model.bin"], f["lratio_pred.csv"],
                                    True, f["roles.ndjson"])),
        Stage("embed", [f["corpus.snapshot"]], [f["model.vec"]], emb,
              lambda: stage_embed(f["corpus.snapshot"], f["model.vec"], **emb)),
        Stage("metrics", [f["corpus.snapshot"], f["roles.ndjson"], f["model.vec"], f["lratio_pred.csv"],
                          f["model.bin"]], [f["metrics.csv"]], dict(cfg.metrics),
              lambda: stage_metrics(f["corpus.snapshot"], f["roles.ndjson"], f["metrics.csv"],
                                    f["model.vec"], f["lratio_pred.csv"], f["model.bin"], **cfg.metrics)),
    ]
    for spec in cfg.regressions:
        spec = dict(spec)
        name = "regress-" + spec["outcome"] + ("-fe" if spec.get("fe") else "")
        target = out / f"{name}.json"
        ins = [f["metrics.csv"]] + ([f["corpus.snapshot"]] if spec.get("fe") else [])
        stages.append(Stage(name, ins, [target], spec,
                            lambda spec=spec, target=target: stage_regress(
                                f["metrics.csv"], target, spec["outcome"], spec.get("controls", ()),
                                spec.get("fe"), f["corpus.snapshot"], spec.get("cluster"))))
    for spec in cfg.curves:
        spec = {"x": "lratio", "bins": 10, "n_boot": 1000, **spec}
        target = out / f"curve-{spec['y']}.csv"
        params = {**spec, "seed": seeds["bootstrap"]}
        stages.append(Stage(f"curve-{spec['y']}", [f["metrics.csv"]], [target], params,
                            lambda spec=spec, target=target: stage_curve(
                                f["metrics.csv"], target, spec["x"], spec["y"], spec["bins"],
                                spec["n_boot"], seed=seeds["bootstrap"])))
    return stages


def _stage_key(stage: Stage) -> tuple[str, dict]:
    digests = {str(p): file_digest(p) for p in stage.inputs}
    blob = json.dumps({"stage": stage.name, "params": stage.params, "inputs": sorted(digests.values()),
                       "version": __version__}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest(), digests


def run_pipeline(config: PipelineConfig, force: bool = False) -> dict:
    """Run all stages in order, skipping any whose inputs, params, and outputs are unchanged.

    Writes ``manifest.json`` into the output directory and returns it.
    """
    config.validate()
    out = config.path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_path = out / "manifest.json"
    previous = {}
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            previous = json.load(fh).get("stages", {})
    manifest = {"config_hash": config.digest(), "version": __version__, "stages": {}}
    for stage in _stages(config):
        key, in_digests = _stage_key(stage)
        prev = previous.get(stage.name, {})
        up_to_date = (
            not force
            and prev.get("key") == key
            and all(p.exists() and file_digest(p) == prev.get("outputs", {}).get(str(p))
                    for p in stage.outputs)
        )
        t0 = time.perf_counter()
        if up_to_date:
            logger.info("stage %s: up to date", stage.name)
            entry = {**prev, "skipped": True}
        else:
            logger.info("stage %s: running", stage.name)
            try:
                with _capture_warnings() as counter:
                    summary = stage.run()
            except Exception as exc:  # noqa: BLE001
                raise PipelineError(stage.name, exc) from exc
            entry = {
                "key": key,
                "inputs": in_digests,
                "outputs": {str(p): file_digest(p) for p in stage.outputs},
                "summary": _clean(summary),
                "warnings": counter.count,
                "skipped": False,
            }
        entry["seconds"] = round(time.perf_counter() - t0, 4)
        manifest["stages"][stage.name] = entry
    write_json(manifest_path, manifest)
    return manifest


class _WarningCounter(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.count = 0

    def emit(self, record):
        self.count += 1


class _capture_warnings:
    def __enter__(self):
        self.handler = _WarningCounter()
        logging.getLogger("teamscope").addHandler(self.handler)
        return self.handler

    def __exit__(self, *exc):
        logging.getLogger("teamscope").removeHandler(self.handler)
        return False
