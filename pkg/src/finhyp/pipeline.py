"""Runnable flows behind the CLI: configuration and ablation presets,
dataset I/O, cross-validation, train/predict round trips, OOV inspection
and definition augmentation.

Report files contain results only (no paths, timestamps, or configuration
echoes), so a rerun with identical inputs is byte-identical.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import tempfile
from dataclasses import dataclass

from .augment import (
    DEFAULT_MIN_SCORE,
    DefinitionDict,
    FetcherConfig,
    HttpFetcher,
    augment_dataset,
    fetch_definitions,
)
from .embeddings import (
    IN_VOCAB,
    EmbeddingFormatError,
    EmbeddingStore,
    TermTokens,
    load_embeddings,
    lookup,
)
from .evaluation import EvalReport, evaluate
from .features import (
    DEFAULT_INDICATORS,
    FeatureConfig,
    HandcraftedConfig,
    LabelSet,
    MinMaxScaler,
    assemble_features,
    build_features,
)
from .model import (
    LogRegModel,
    TrainConfig,
    grid_search,
    load_model,
    predict_top3,
    save_model,
)
from .oov import VARIANTS, OOVStrategy


class DataError(Exception):
    """Unreadable or inconsistent input files/artifacts (CLI exit code 2)."""


DEFAULT_C_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0)

# Ablation ladder: each preset fixes the frontend; everything else
# (embedding path, folds, seed, ...) comes from the surrounding config.
PRESETS: dict[str, dict] = {
    "BL": dict(
        oov_strategy="zero",
        handcrafted=False,
        cosine_features=False,
        edit_features=False,
        augment=False,
    ),
    "BL.HF": dict(
        oov_strategy="zero",
        handcrafted=True,
        cosine_features=False,
        edit_features=False,
        augment=False,
    ),
    "BL.HF.OOVl": dict(
        oov_strategy="levenshtein",
        handcrafted=True,
        cosine_features=False,
        edit_features=False,
        augment=False,
    ),
    "BL.HF.OOVl.D": dict(
        oov_strategy="levenshtein",
        handcrafted=True,
        cosine_features=True,
        edit_features=False,
        augment=False,
    ),
    "BL.HF.OOVl.D2": dict(
        oov_strategy="levenshtein",
        handcrafted=True,
        cosine_features=True,
        edit_features=True,
        augment=False,
    ),
    "BL.HF.OOVm.D2": dict(
        oov_strategy="ngram",
        handcrafted=True,
        cosine_features=True,
        edit_features=True,
        augment=False,
    ),
    "BL.HF.OOVm.D2.+": dict(
        oov_strategy="ngram",
        handcrafted=True,
        cosine_features=True,
        edit_features=True,
        augment=True,
    ),
}


@dataclass(frozen=True)
class PipelineConfig:
    embedding_path: str = ""
    oov_strategy: str = "zero"
    ngram_min: int = 3
    ngram_max: int = 6
    handcrafted: bool = False
    indicators: tuple[str, ...] = DEFAULT_INDICATORS
    cosine_features: bool = False
    edit_features: bool = False
    augment: bool = False
    snapshot_path: str = ""
    min_match_score: float = DEFAULT_MIN_SCORE
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    folds: int = 5
    seed: int = 0
    labels: tuple[str, ...] = ()  # empty: inferred from the dataset
    out_dir: str = "."
    fetcher_base_url: str = ""
    fetcher_timeout: float = 10.0
    fetcher_rate_limit: float = 1.0
    fetcher_user_agent: str = "finhyp/0.1"

    def __post_init__(self):
        if self.oov_strategy not in VARIANTS:
            raise ValueError(
                f"oov_strategy must be one of {', '.join(VARIANTS)}, "
                f"got {self.oov_strategy!r}"
            )
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValueError("c_grid must be non-empty and positive")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if not 1 <= self.ngram_min <= self.ngram_max:
            raise ValueError("require 1 <= ngram_min <= ngram_max")
        if not 0 <= self.min_match_score <= 1:
            raise ValueError("min_match_score must be in [0, 1]")


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(PipelineConfig)}
_TUPLE_FIELDS = ("indicators", "c_grid", "labels")


def config_from_dict(data: dict) -> PipelineConfig:
    unknown = sorted(set(data) - _CONFIG_FIELDS)
    if unknown:
        raise DataError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = dict(data)
    for key in _TUPLE_FIELDS:
        if key in kwargs:
            value = kwargs[key]
            if not isinstance(value, (list, tuple)):
                raise DataError(f"config key {key!r} must be a list")
            kwargs[key] = tuple(value)
    try:
        return PipelineConfig(**kwargs)
    except (TypeError, ValueError) as err:
        raise DataError(f"bad config: {err}") from None


def load_config(path) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise DataError(f"cannot read config: {err}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise DataError(f"{path}: invalid JSON: {err}") from None
    if not isinstance(data, dict):
        raise DataError(f"{path}: config must be a JSON object")
    return config_from_dict(data)


def apply_preset(cfg: PipelineConfig, name: str) -> PipelineConfig:
    if name not in PRESETS:
        raise ValueError(
            f"unknown preset {name!r}; known: {', '.join(PRESETS)}"
        )
    return dataclasses.replace(cfg, **PRESETS[name])


# ---------------------------------------------------------------- dataset I/O


def load_terms(path):
    """Terms (and labels when present) from a CSV with header "term,label"
    or just "term". Returns (terms, labels-or-None)."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise DataError(f"cannot read dataset: {err}") from None
    except UnicodeDecodeError as err:
        raise DataError(f"{path}: not UTF-8: {err}") from None
    except csv.Error as err:
        raise DataError(f"{path}: malformed CSV: {err}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = rows[0]
    if header == ["term", "label"]:
        with_label = True
    elif header == ["term"]:
        with_label = False
    else:
        raise DataError(
            f'{path}: header must be "term,label" or "term", '
            f"got {','.join(header)!r}"
        )
    terms: list[str] = []
    labels: list[str] = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(
                f"{path} line {lineno}: expected {len(header)} columns, "
                f"got {len(row)}"
            )
        if not row[0].strip():
            raise DataError(f"{path} line {lineno}: empty term")
        terms.append(row[0])
        if with_label:
            if not row[1].strip():
                raise DataError(f"{path} line {lineno}: empty label")
            labels.append(row[1])
    if not terms:
        raise DataError(f"{path}: no data rows")
    return terms, (labels if with_label else None)


def load_dataset(path):
    """(terms, labels) from a labeled CSV; a missing label column is an error."""
    terms, labels = load_terms(path)
    if labels is None:
        raise DataError(f'{path}: missing "label" column')
    return terms, labels


def atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_json(path, payload) -> None:
    atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _read_json(path, what: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise DataError(f"cannot read {what}: {err}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise DataError(f"{path}: invalid JSON: {err}") from None
    if not isinstance(data, dict):
        raise DataError(f"{path}: {what} must be a JSON object")
    return data


# ------------------------------------------------------------------ frontend


def make_resolver(cfg: PipelineConfig) -> OOVStrategy:
    return OOVStrategy(cfg.oov_strategy, cfg.ngram_min, cfg.ngram_max)


def _load_store(path) -> EmbeddingStore:
    if not path:
        raise DataError("no embedding_path configured")
    try:
        return load_embeddings(path)
    except OSError as err:
        raise DataError(f"cannot read embeddings: {err}") from None
    except EmbeddingFormatError as err:
        raise DataError(str(err)) from None


def _load_snapshot(path) -> DefinitionDict:
    if not path:
        raise DataError("augmentation requires snapshot_path")
    try:
        return DefinitionDict.from_snapshot(path)
    except OSError as err:
        raise DataError(f"cannot read snapshot: {err}") from None
    except (json.JSONDecodeError, UnicodeDecodeError, ValueError) as err:
        raise DataError(f"{path}: bad snapshot: {err}") from None


def _feature_config(handcrafted, indicators, cosine, edit) -> FeatureConfig:
    try:
        hcfg = HandcraftedConfig(tuple(indicators)) if handcrafted else None
    except ValueError as err:
        raise DataError(str(err)) from None
    return FeatureConfig(handcrafted=hcfg, cosine=bool(cosine), edit=bool(edit))


@dataclass
class Frontend:
    """Everything needed to turn raw terms into scaled feature rows."""

    store: EmbeddingStore
    resolver: OOVStrategy
    labels: tuple[str, ...]
    label_set: LabelSet
    fcfg: FeatureConfig
    texts: list[str]
    coverage: float | None  # None when augmentation is off


def prepare_frontend(cfg: PipelineConfig, terms, dataset_labels=None) -> Frontend:
    store = _load_store(cfg.embedding_path)
    resolver = make_resolver(cfg)
    if cfg.labels:
        labels = cfg.labels
    elif dataset_labels:
        labels = tuple(sorted(set(dataset_labels)))
    else:
        raise DataError("no label set: configure labels or use a labeled dataset")
    if dataset_labels:
        extra = sorted(set(dataset_labels) - set(labels))
        if extra:
            raise DataError(
                "dataset labels outside the configured label set: "
                + ", ".join(extra)
            )
    if cfg.augment:
        ddict = _load_snapshot(cfg.snapshot_path)
        augmented, coverage = augment_dataset(terms, ddict, cfg.min_match_score)
        texts = [a.text for a in augmented]
    else:
        texts, coverage = list(terms), None
    try:
        label_set = LabelSet.build(labels, store, resolver)
    except ValueError as err:
        raise DataError(f"bad label set: {err}") from None
    fcfg = _feature_config(
        cfg.handcrafted, cfg.indicators, cfg.cosine_features, cfg.edit_features
    )
    return Frontend(store, resolver, labels, label_set, fcfg, texts, coverage)


def _grid_payload(result) -> dict:
    return {
        "best_c": result.best_c,
        "rows": [
            {
                "c": row.c,
                "mean_rank": row.mean_rank,
                "accuracy": row.accuracy,
                "fold_mean_ranks": list(row.fold_mean_ranks),
                "fold_accuracies": list(row.fold_accuracies),
            }
            for row in result.rows
        ],
    }


# ---------------------------------------------------------------------- runs


@dataclass
class CvRun:
    report: EvalReport
    best_c: float
    coverage: float | None
    paths: dict[str, str]


def run_cv(cfg: PipelineConfig, dataset_path) -> CvRun:
    """Grid-searched cross-validation; writes report.txt, report.json,
    grid.json and folds.json under cfg.out_dir."""
    terms, gold_labels = load_dataset(dataset_path)
    fe = prepare_frontend(cfg, terms, gold_labels)
    X, _ = build_features(terms, fe.texts, fe.store, fe.resolver, fe.label_set, fe.fcfg)
    y = [fe.label_set.index(lab) for lab in gold_labels]
    tcfg = TrainConfig(c_grid=cfg.c_grid, folds=cfg.folds, seed=cfg.seed)
    try:
        result = grid_search(X, y, fe.labels, tcfg)
    except ValueError as err:
        raise DataError(f"cross-validation failed: {err}") from None
    report = evaluate(result.oof_predictions[result.best_c], y, fe.labels)

    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {
        "report_txt": os.path.join(cfg.out_dir, "report.txt"),
        "report_json": os.path.join(cfg.out_dir, "report.json"),
        "grid_json": os.path.join(cfg.out_dir, "grid.json"),
        "folds_json": os.path.join(cfg.out_dir, "folds.json"),
    }
    atomic_write(paths["report_txt"], report.to_text())
    atomic_write(paths["report_json"], report.to_json())
    _write_json(paths["grid_json"], _grid_payload(result))
    _write_json(
        paths["folds_json"],
        {"folds": [[int(i) for i in fold] for fold in result.folds]},
    )
    return CvRun(report, result.best_c, fe.coverage, paths)


@dataclass
class TrainRun:
    model: LogRegModel
    best_c: float
    coverage: float | None
    paths: dict[str, str]


def run_train(cfg: PipelineConfig, dataset_path) -> TrainRun:
    """Grid-search then fit on the full dataset; writes model.txt plus the
    frontend.json needed to rebuild identical feature rows at predict time."""
    terms, gold_labels = load_dataset(dataset_path)
    fe = prepare_frontend(cfg, terms, gold_labels)
    X, scaler = build_features(
        terms, fe.texts, fe.store, fe.resolver, fe.label_set, fe.fcfg
    )
    y = [fe.label_set.index(lab) for lab in gold_labels]
    tcfg = TrainConfig(c_grid=cfg.c_grid, folds=cfg.folds, seed=cfg.seed)
    try:
        result = grid_search(X, y, fe.labels, tcfg)
    except ValueError as err:
        raise DataError(f"training failed: {err}") from None

    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {
        "model": os.path.join(cfg.out_dir, "model.txt"),
        "frontend": os.path.join(cfg.out_dir, "frontend.json"),
        "grid_json": os.path.join(cfg.out_dir, "grid.json"),
    }
    fd, tmp = tempfile.mkstemp(dir=cfg.out_dir, prefix=".tmp-", suffix=".part")
    os.close(fd)
    try:
        save_model(result.model, tmp)
        os.replace(tmp, paths["model"])
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    _write_json(
        paths["frontend"],
        {
            "augment": cfg.augment,
            "cosine_features": cfg.cosine_features,
            "edit_features": cfg.edit_features,
            "embedding_dim": fe.store.dim,
            "handcrafted": cfg.handcrafted,
            "indicators": list(cfg.indicators),
            "labels": list(fe.labels),
            "min_match_score": cfg.min_match_score,
            "ngram_max": cfg.ngram_max,
            "ngram_min": cfg.ngram_min,
            "oov_strategy": cfg.oov_strategy,
            "scaler": scaler.state(),
        },
    )
    _write_json(paths["grid_json"], _grid_payload(result))
    return TrainRun(result.model, result.best_c, fe.coverage, paths)


_FRONTEND_KEYS = (
    "augment",
    "cosine_features",
    "edit_features",
    "embedding_dim",
    "handcrafted",
    "indicators",
    "labels",
    "min_match_score",
    "ngram_max",
    "ngram_min",
    "oov_strategy",
    "scaler",
)


@dataclass
class PredictRun:
    path: str
    n_terms: int


def run_predict(cfg: PipelineConfig, model_dir, terms_path) -> PredictRun:
    """Score terms with a trained model directory (model.txt + frontend.json);
    writes predictions.jsonl under cfg.out_dir."""
    try:
        model = load_model(os.path.join(model_dir, "model.txt"))
    except OSError as err:
        raise DataError(f"cannot read model: {err}") from None
    except ValueError as err:
        raise DataError(f"bad model file: {err}") from None
    frontend = _read_json(os.path.join(model_dir, "frontend.json"), "frontend")
    missing = sorted(set(_FRONTEND_KEYS) - set(frontend))
    if missing:
        raise DataError(f"frontend.json missing keys: {', '.join(missing)}")

    labels = tuple(frontend["labels"])
    if labels != model.labels:
        raise DataError("label set mismatch between model.txt and frontend.json")
    store = _load_store(cfg.embedding_path)
    if store.dim != frontend["embedding_dim"]:
        raise DataError(
            f"embedding dim {store.dim} != trained dim {frontend['embedding_dim']}"
        )
    try:
        resolver = OOVStrategy(
            frontend["oov_strategy"], frontend["ngram_min"], frontend["ngram_max"]
        )
    except ValueError as err:
        raise DataError(f"bad frontend: {err}") from None

    terms, _ = load_terms(terms_path)
    if frontend["augment"]:
        ddict = _load_snapshot(cfg.snapshot_path)
        augmented, _ = augment_dataset(terms, ddict, frontend["min_match_score"])
        texts = [a.text for a in augmented]
    else:
        texts = terms
    try:
        label_set = LabelSet.build(labels, store, resolver)
    except ValueError as err:
        raise DataError(f"bad label set: {err}") from None
    fcfg = _feature_config(
        frontend["handcrafted"],
        frontend["indicators"],
        frontend["cosine_features"],
        frontend["edit_features"],
    )
    matrix = assemble_features(terms, texts, store, resolver, label_set, fcfg)
    try:
        scaler = MinMaxScaler.from_state(frontend["scaler"])
    except (KeyError, TypeError, ValueError) as err:
        raise DataError(f"bad scaler state: {err}") from None
    if scaler.n_features != matrix.shape[1]:
        raise DataError(
            f"feature width {matrix.shape[1]} != trained width {scaler.n_features}"
        )
    if scaler.n_features != model.dim:
        raise DataError(
            f"model dim {model.dim} != trained feature width {scaler.n_features}"
        )
    X = scaler.transform(matrix)

    lines = []
    for term, row in zip(terms, X):
        ranked = predict_top3(model, row)
        lines.append(
            json.dumps(
                {
                    "term": term,
                    "top3": [lab for lab, _ in ranked],
                    "probs": [p for _, p in ranked],
                }
            )
        )
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "predictions.jsonl")
    atomic_write(out_path, "\n".join(lines) + "\n")
    return PredictRun(out_path, len(terms))


@dataclass
class OovRun:
    text: str
    path: str
    unique: int
    occurrences: int


def run_inspect_oov(cfg: PipelineConfig, dataset_path) -> OovRun:
    """List every out-of-vocabulary token with its resolution; writes oov.txt."""
    terms, _ = load_terms(dataset_path)
    store = _load_store(cfg.embedding_path)
    resolver = make_resolver(cfg)
    if cfg.augment:
        ddict = _load_snapshot(cfg.snapshot_path)
        augmented, _ = augment_dataset(terms, ddict, cfg.min_match_score)
        texts = [a.text for a in augmented]
    else:
        texts = terms

    occurrences = 0
    seen: dict[str, str] = {}
    for text in texts:
        for token in TermTokens.from_raw(text).tokens:
            _, res = lookup(store, token, resolver)
            if res.kind == IN_VOCAB:
                continue
            occurrences += 1
            if token not in seen:
                seen[token] = res.substitute if res.substitute else "ZERO"
    lines = [f"oov_unique: {len(seen)}", f"oov_occurrences: {occurrences}"]
    lines.extend(f"{token} -> {seen[token]}" for token in sorted(seen))
    report = "\n".join(lines) + "\n"

    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "oov.txt")
    atomic_write(out_path, report)
    return OovRun(report, out_path, len(seen), occurrences)


def run_augment_apply(cfg: PipelineConfig, dataset_path):
    """Write augmented.csv showing term/text/matched headword per row;
    returns (path, coverage)."""
    terms, gold_labels = load_terms(dataset_path)
    ddict = _load_snapshot(cfg.snapshot_path)
    augmented, coverage = augment_dataset(terms, ddict, cfg.min_match_score)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if gold_labels is None:
        writer.writerow(["term", "text", "matched_headword"])
        for a in augmented:
            writer.writerow([a.raw, a.text, a.matched_headword or ""])
    else:
        writer.writerow(["term", "label", "text", "matched_headword"])
        for a, lab in zip(augmented, gold_labels):
            writer.writerow([a.raw, lab, a.text, a.matched_headword or ""])
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, "augmented.csv")
    atomic_write(out_path, buf.getvalue())
    return out_path, coverage


def run_augment_fetch(cfg: PipelineConfig, terms_path, base_url: str = ""):
    """Fetch definitions for every term into a snapshot file;
    returns (snapshot path, entry count, failure count)."""
    terms, _ = load_terms(terms_path)
    url = base_url or cfg.fetcher_base_url
    if not url:
        raise DataError("no fetcher base URL configured")
    fetcher = HttpFetcher(
        FetcherConfig(
            base_url=url,
            timeout=cfg.fetcher_timeout,
            rate_limit=cfg.fetcher_rate_limit,
            user_agent=cfg.fetcher_user_agent,
        )
    )
    snapshot_out = cfg.snapshot_path or os.path.join(cfg.out_dir, "snapshot.json")
    directory = os.path.dirname(os.fspath(snapshot_out))
    if directory:
        os.makedirs(directory, exist_ok=True)
    ddict, failures = fetch_definitions(
        terms, fetcher, snapshot_out, cfg.fetcher_rate_limit
    )
    return snapshot_out, len(ddict), failures
