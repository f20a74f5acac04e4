"""Experiment orchestration: the full grid of (dataset x row x classifier x
fusion strategy) under stratified k-fold cross-validation, plus CSV reports.

Rows are the configured feature views and, optionally, their concatenation
("Concatenated Vector").  Per fold and row the runner fits normalizers on
the training rows only, trains the softmax head and both kernel SVMs,
predicts the held-out fold, fuses the three voters under all four
strategies and accumulates accuracies and confusion counts.  All randomness
derives from the single experiment seed, so a rerun of the same config over
the same bundle bytes reproduces every number and every report byte.

Fold tasks may run in parallel (``FUSELAB_THREADS`` caps the worker count,
0 or unset means auto); results are keyed and reduced in a fixed order, so
scheduling never affects output.
"""

from __future__ import annotations

import csv
import json
import os
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bundle import (
    FeatureBundle,
    FoldPlan,
    NormalizationStats,
    apply_normalizer,
    fit_normalizer,
    load_bundle,
    stratified_kfold,
)
from .errors import ConfigError, FuselabError
from .fusion import SOFTMAX, SVM_POLY, SVM_RBF, FusionStrategy, VoterOutput, fuse_all_strategies
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    FoldSummary,
    KappaResult,
    accuracy,
    aggregate_folds,
    class_metrics,
    confusion,
    format_mean_std,
    format_percent,
    kappa,
)
from .softmax import SgdConfig, predict_proba, train_softmax
from .svm import KernelSpec, SmoConfig, multiclass_predict_batch, multiclass_train

CONCATENATED_ROW = "Concatenated Vector"

GRID_COLUMNS = (SOFTMAX, SVM_RBF, SVM_POLY, "fusion1", "fusion2", "fusion3", "fusion4")

FUSION_COLUMNS = {
    "fusion1": FusionStrategy.RBF_POLY,
    "fusion2": FusionStrategy.SOFTMAX_RBF,
    "fusion3": FusionStrategy.SOFTMAX_POLY,
    "fusion4": FusionStrategy.ALL,
}

REPORT_FORMATS = ("grid", "per_class", "confusion", "pr")


@dataclass(frozen=True)
class ExperimentConfig:
    bundle_paths: tuple[str, ...]
    views: tuple[str, ...] | None = None
    include_concatenated: bool = True
    folds: int = 5
    seed: int = 0
    out_dir: str = "results"
    report_formats: tuple[str, ...] = REPORT_FORMATS
    report_row: str | None = None
    softmax: SgdConfig = field(default_factory=SgdConfig)
    smo: SmoConfig = field(default_factory=SmoConfig)
    rbf_gamma: float | None = None  # None: 1 / (d * var) on the training rows
    poly_gamma: float | None = None  # None: 1 / d
    poly_degree: int = 3
    poly_coef0: float = 0.0

    def __post_init__(self) -> None:
        if not self.bundle_paths:
            raise ConfigError("need at least one bundle path")
        if self.folds < 2:
            raise ConfigError(f"fold count must be >= 2, got {self.folds}")
        if self.seed < 0:
            raise ConfigError("seed must be unsigned")
        if self.views is not None and len(self.views) == 0:
            raise ConfigError("view list, when given, must not be empty")
        unknown = set(self.report_formats) - set(REPORT_FORMATS)
        if unknown:
            raise ConfigError(f"unknown report formats {sorted(unknown)}")


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from the master seed and task coordinates."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


@dataclass(frozen=True)
class FoldOutputs:
    """Everything one (row, fold) task produces."""

    fold: int
    test_indices: np.ndarray
    y_true: np.ndarray
    voter_labels: dict[str, np.ndarray]
    voter_conf: dict[str, np.ndarray]
    fused: dict[str, np.ndarray]
    stats: tuple[NormalizationStats, ...]
    softmax_params: tuple[np.ndarray, np.ndarray]
    svm_duals: dict[str, tuple[np.ndarray, ...]]


def run_fold(
    bundle: FeatureBundle,
    view_names: tuple[str, ...],
    plan: FoldPlan,
    fold: int,
    config: ExperimentConfig,
    ds_index: int,
    row_index: int,
) -> FoldOutputs:
    """Train all three classifiers on one fold's training rows and predict
    its held-out rows.  Never reads feature values outside the training rows
    except to predict."""
    train_idx = plan.train_indices(fold)
    test_idx = plan.test_indices(fold)
    train_parts, test_parts, stats_list = [], [], []
    for vn in view_names:
        view = bundle.view(vn)
        stats = fit_normalizer(view, train_idx)
        normalized = apply_normalizer(view, stats)
        train_parts.append(normalized.matrix[train_idx])
        test_parts.append(normalized.matrix[test_idx])
        stats_list.append(stats)
    x_train = np.concatenate(train_parts, axis=1)
    x_test = np.concatenate(test_parts, axis=1)
    y_train = bundle.labels[train_idx]
    y_test = bundle.labels[test_idx]
    n_classes = bundle.n_classes

    sm_config = replace(config.softmax, seed=derive_seed(config.seed, ds_index, row_index, fold, 0))
    sm_model = train_softmax(x_train, y_train, sm_config, n_classes=n_classes)
    proba = np.atleast_2d(predict_proba(sm_model, x_test))
    voter_labels = {SOFTMAX: proba.argmax(axis=1)}
    voter_conf = {SOFTMAX: proba.max(axis=1)}

    d = x_train.shape[1]
    if config.rbf_gamma is not None:
        rbf_kernel = KernelSpec(kind="rbf", gamma=config.rbf_gamma)
    else:
        var = float(x_train.var()) or 1.0
        rbf_kernel = KernelSpec(kind="rbf", gamma=1.0 / (d * var))
    poly_gamma = config.poly_gamma if config.poly_gamma is not None else 1.0 / d
    poly_kernel = KernelSpec(
        kind="polynomial", gamma=poly_gamma, degree=config.poly_degree, coef0=config.poly_coef0
    )

    svm_duals: dict[str, tuple[np.ndarray, ...]] = {}
    for role, voter, kernel in ((1, SVM_RBF, rbf_kernel), (2, SVM_POLY, poly_kernel)):
        smo = replace(config.smo, seed=derive_seed(config.seed, ds_index, row_index, fold, role))
        model = multiclass_train(x_train, y_train, kernel, smo, n_classes=n_classes)
        labels, votes, _ = multiclass_predict_batch(model, x_test)
        voter_labels[voter] = labels
        voter_conf[voter] = votes[np.arange(labels.size), labels] / max(1, n_classes - 1)
        svm_duals[voter] = tuple(m.dual_coef.copy() for m in model.models)

    voters = [
        VoterOutput(voter_id=v, labels=voter_labels[v], confidence=voter_conf[v])
        for v in (SOFTMAX, SVM_RBF, SVM_POLY)
    ]
    fused_by_strategy = fuse_all_strategies(voters)
    fused = {col: fused_by_strategy[strat] for col, strat in FUSION_COLUMNS.items()}
    return FoldOutputs(
        fold=fold,
        test_indices=test_idx,
        y_true=y_test,
        voter_labels=voter_labels,
        voter_conf=voter_conf,
        fused=fused,
        stats=tuple(stats_list),
        softmax_params=(sm_model.weights, sm_model.biases),
        svm_duals=svm_duals,
    )


@dataclass(frozen=True)
class RowResult:
    row: str
    cells: dict[str, FoldSummary]  # column -> fold accuracies in percent
    f4_confusion: ConfusionMatrix  # pooled over all test folds
    f4_class_metrics: tuple[ClassMetrics, ...]
    f4_accuracy: float
    f4_kappa: KappaResult
    folds: tuple[FoldOutputs, ...]


@dataclass(frozen=True)
class DatasetResult:
    name: str
    file_tag: str
    class_names: tuple[str, ...]
    sample_ids: tuple[str, ...]
    labels: np.ndarray
    fold_plan: FoldPlan
    rows: tuple[RowResult, ...]


@dataclass(frozen=True)
class ExperimentResult:
    config: ExperimentConfig
    datasets: tuple[DatasetResult, ...]


def _column_labels(out: FoldOutputs, column: str) -> np.ndarray:
    return out.voter_labels[column] if column in out.voter_labels else out.fused[column]


def _worker_count() -> int:
    raw = os.environ.get("FUSELAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as e:
        raise ConfigError(f"FUSELAB_THREADS must be an integer, got {raw!r}") from e
    if n < 0:
        raise ConfigError(f"FUSELAB_THREADS must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def _file_tag(name: str, taken: set[str]) -> str:
    tag = re.sub(r"[^A-Za-z0-9_.-]+", "_", name) or "dataset"
    base, i = tag, 2
    while tag in taken:
        tag = f"{base}_{i}"
        i += 1
    taken.add(tag)
    return tag


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the configured grid; raises with (dataset, fold, view,
    classifier) coordinates when any module fails."""
    bundles = []
    for path in config.bundle_paths:
        bundles.append(load_bundle(path))

    plans = []
    row_lists = []
    for bundle in bundles:
        view_names = config.views if config.views is not None else bundle.view_names
        for vn in view_names:
            bundle.view(vn)  # unknown names fail before any training
        rows: list[tuple[str, tuple[str, ...]]] = [(vn, (vn,)) for vn in view_names]
        if config.include_concatenated:
            rows.append((CONCATENATED_ROW, tuple(view_names)))
        row_lists.append(rows)
        plans.append(stratified_kfold(bundle.labels, config.folds, config.seed))

    tasks = [
        (ds_i, row_i, fold)
        for ds_i in range(len(bundles))
        for row_i in range(len(row_lists[ds_i]))
        for fold in range(config.folds)
    ]

    def execute(task: tuple[int, int, int]) -> tuple[tuple[int, int, int], FoldOutputs]:
        ds_i, row_i, fold = task
        row_name, view_names = row_lists[ds_i][row_i]
        try:
            out = run_fold(bundles[ds_i], view_names, plans[ds_i], fold, config, ds_i, row_i)
        except Exception as e:
            raise FuselabError(
                f"dataset={bundles[ds_i].manifest.dataset} fold={fold} view={row_name}: {e}"
            ) from e
        return task, out

    workers = _worker_count()
    results: dict[tuple[int, int, int], FoldOutputs] = {}
    if workers == 1:
        for task in tasks:
            key, out = execute(task)
            results[key] = out
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for key, out in pool.map(execute, tasks):
                results[key] = out

    datasets = []
    taken_tags: set[str] = set()
    for ds_i, bundle in enumerate(bundles):
        row_results = []
        for row_i, (row_name, _) in enumerate(row_lists[ds_i]):
            folds = tuple(results[(ds_i, row_i, fold)] for fold in range(config.folds))
            cells = {}
            for column in GRID_COLUMNS:
                per_fold = [
                    100.0 * float((_column_labels(f, column) == f.y_true).mean()) for f in folds
                ]
                cells[column] = aggregate_folds(per_fold)
            order = np.concatenate([f.test_indices for f in folds])
            pooled_true = np.concatenate([f.y_true for f in folds])
            pooled_f4 = np.concatenate([f.fused["fusion4"] for f in folds])
            sort = np.argsort(order)
            cm = confusion(pooled_true[sort], pooled_f4[sort], bundle.n_classes)
            row_results.append(
                RowResult(
                    row=row_name,
                    cells=cells,
                    f4_confusion=cm,
                    f4_class_metrics=tuple(class_metrics(cm)),
                    f4_accuracy=accuracy(cm),
                    f4_kappa=kappa(cm),
                    folds=folds,
                )
            )
        datasets.append(
            DatasetResult(
                name=bundle.manifest.dataset,
                file_tag=_file_tag(bundle.manifest.dataset, taken_tags),
                class_names=bundle.manifest.class_names,
                sample_ids=bundle.manifest.samples,
                labels=bundle.labels,
                fold_plan=plans[ds_i],
                rows=tuple(row_results),
            )
        )
    return ExperimentResult(config=config, datasets=tuple(datasets))


def _report_row_name(config: ExperimentConfig, ds: DatasetResult) -> str:
    if config.report_row is not None:
        return config.report_row
    return CONCATENATED_ROW if config.include_concatenated else ds.rows[0].row


def _open_csv(path: Path):
    fh = open(path, "w", encoding="utf-8", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_predictions(result: ExperimentResult, out_dir: Path | str) -> list[Path]:
    """Persist per-fold, per-sample predictions so fusion and metrics can be
    replayed without retraining."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for ds in result.datasets:
        path = out / f"predictions_{ds.file_tag}.csv"
        fh, writer = _open_csv(path)
        with fh:
            writer.writerow(
                [
                    "row",
                    "fold",
                    "sample",
                    "true",
                    "softmax_pred",
                    "softmax_conf",
                    "svm_rbf_pred",
                    "svm_rbf_conf",
                    "svm_poly_pred",
                    "svm_poly_conf",
                    "fusion1_pred",
                    "fusion2_pred",
                    "fusion3_pred",
                    "fusion4_pred",
                ]
            )
            for row in ds.rows:
                for fold_out in row.folds:
                    for i, sample_idx in enumerate(fold_out.test_indices):
                        writer.writerow(
                            [
                                row.row,
                                fold_out.fold,
                                ds.sample_ids[sample_idx],
                                int(fold_out.y_true[i]),
                                int(fold_out.voter_labels[SOFTMAX][i]),
                                repr(float(fold_out.voter_conf[SOFTMAX][i])),
                                int(fold_out.voter_labels[SVM_RBF][i]),
                                repr(float(fold_out.voter_conf[SVM_RBF][i])),
                                int(fold_out.voter_labels[SVM_POLY][i]),
                                repr(float(fold_out.voter_conf[SVM_POLY][i])),
                                int(fold_out.fused["fusion1"][i]),
                                int(fold_out.fused["fusion2"][i]),
                                int(fold_out.fused["fusion3"][i]),
                                int(fold_out.fused["fusion4"][i]),
                            ]
                        )
        written.append(path)
    info = {
        "datasets": [
            {
                "name": ds.name,
                "file_tag": ds.file_tag,
                "classes": list(ds.class_names),
                "rows": [row.row for row in ds.rows],
                "folds": ds.fold_plan.k,
            }
            for ds in result.datasets
        ],
        "seed": result.config.seed,
        "report_formats": list(result.config.report_formats),
        "report_row": {
            ds.name: _report_row_name(result.config, ds) for ds in result.datasets
        },
    }
    info_path = out / "run.json"
    info_path.write_text(json.dumps(info, indent=2) + "\n", encoding="utf-8")
    written.append(info_path)
    return written


def emit_reports(result: ExperimentResult, formats, out_dir: Path | str) -> list[Path]:
    """Write the requested report CSVs; empty format list warns and writes
    nothing."""
    formats = tuple(formats)
    unknown = set(formats) - set(REPORT_FORMATS)
    if unknown:
        raise ConfigError(f"unknown report formats {sorted(unknown)}")
    if not formats:
        warnings.warn("no report formats requested; nothing written", stacklevel=2)
        return []
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "grid" in formats:
        path = out / "grid.csv"
        fh, writer = _open_csv(path)
        with fh:
            writer.writerow(["dataset", "row", *GRID_COLUMNS])
            for ds in result.datasets:
                for row in ds.rows:
                    writer.writerow(
                        [ds.name, row.row]
                        + [format_mean_std(row.cells[col]) for col in GRID_COLUMNS]
                    )
        written.append(path)

    if "per_class" in formats:
        path = out / "per_class.csv"
        fh, writer = _open_csv(path)
        with fh:
            writer.writerow(["dataset", "row", "quantity", "class", "value"])
            for ds in result.datasets:
                row = next(r for r in ds.rows if r.row == _report_row_name(result.config, ds))
                for cid, name in enumerate(ds.class_names):
                    cm = row.f4_class_metrics[cid]
                    writer.writerow([ds.name, row.row, "precision", name, format_percent(cm.precision)])
                    writer.writerow([ds.name, row.row, "recall", name, format_percent(cm.recall)])
                    writer.writerow([ds.name, row.row, "f1", name, format_percent(cm.f1)])
                writer.writerow([ds.name, row.row, "accuracy", "", format_percent(row.f4_accuracy)])
                writer.writerow([ds.name, row.row, "kappa", "", f"{row.f4_kappa.value:.3f}"])
        written.append(path)

    if "confusion" in formats:
        path = out / "confusion.csv"
        fh, writer = _open_csv(path)
        with fh:
            writer.writerow(["dataset", "row", "true_class", "predicted_class", "count"])
            for ds in result.datasets:
                row = next(r for r in ds.rows if r.row == _report_row_name(result.config, ds))
                for i, tname in enumerate(ds.class_names):
                    for j, pname in enumerate(ds.class_names):
                        writer.writerow(
                            [ds.name, row.row, tname, pname, int(row.f4_confusion.counts[i, j])]
                        )
        written.append(path)

    if "pr" in formats:
        path = out / "precision_recall.csv"
        fh, writer = _open_csv(path)
        with fh:
            writer.writerow(["dataset", "row", "class", "precision", "recall"])
            for ds in result.datasets:
                for row in ds.rows:
                    for cid, name in enumerate(ds.class_names):
                        cm = row.f4_class_metrics[cid]
                        writer.writerow(
                            [ds.name, row.row, name, format_percent(cm.precision), format_percent(cm.recall)]
                        )
        written.append(path)
    return written


def replay_reports(results_dir: Path | str) -> list[Path]:
    """Rebuild all reports from the persisted predictions of an earlier run."""
    root = Path(results_dir)
    info_path = root / "run.json"
    if not info_path.is_file():
        raise FuselabError(f"missing run metadata: {info_path}")
    info = json.loads(info_path.read_text(encoding="utf-8"))
    written = []
    grid_fh, grid = _open_csv(root / "grid.csv")
    pc_fh, per_class = _open_csv(root / "per_class.csv")
    cf_fh, conf_w = _open_csv(root / "confusion.csv")
    pr_fh, pr = _open_csv(root / "precision_recall.csv")
    with grid_fh, pc_fh, cf_fh, pr_fh:
        grid.writerow(["dataset", "row", *GRID_COLUMNS])
        per_class.writerow(["dataset", "row", "quantity", "class", "value"])
        conf_w.writerow(["dataset", "row", "true_class", "predicted_class", "count"])
        pr.writerow(["dataset", "row", "class", "precision", "recall"])
        for ds in info["datasets"]:
            pred_path = root / f"predictions_{ds['file_tag']}.csv"
            if not pred_path.is_file():
                raise FuselabError(f"missing predictions file: {pred_path}")
            records: dict[str, dict[int, list[dict]]] = {r: {} for r in ds["rows"]}
            with open(pred_path, encoding="utf-8", newline="") as fh:
                for rec in csv.DictReader(fh):
                    records[rec["row"]].setdefault(int(rec["fold"]), []).append(rec)
            class_names = ds["classes"]
            n_classes = len(class_names)
            pred_cols = [f"{c}_pred" for c in GRID_COLUMNS[:3]] + [
                f"{c}_pred" for c in GRID_COLUMNS[3:]
            ]
            for row_name in ds["rows"]:
                by_fold = records[row_name]
                cells = {}
                for col in GRID_COLUMNS:
                    per_fold = []
                    for fold in range(ds["folds"]):
                        recs = by_fold[fold]
                        hits = sum(int(r[f"{col}_pred"]) == int(r["true"]) for r in recs)
                        per_fold.append(100.0 * hits / len(recs))
                    cells[col] = aggregate_folds(per_fold)
                grid.writerow(
                    [ds["name"], row_name] + [format_mean_std(cells[c]) for c in GRID_COLUMNS]
                )
                all_recs = [r for fold in range(ds["folds"]) for r in by_fold[fold]]
                y_true = [int(r["true"]) for r in all_recs]
                y_f4 = [int(r["fusion4_pred"]) for r in all_recs]
                cm = confusion(y_true, y_f4, n_classes)
                cms = class_metrics(cm)
                for cid, cname in enumerate(class_names):
                    pr.writerow(
                        [ds["name"], row_name, cname, format_percent(cms[cid].precision), format_percent(cms[cid].recall)]
                    )
                if row_name == info["report_row"][ds["name"]]:
                    for cid, cname in enumerate(class_names):
                        per_class.writerow([ds["name"], row_name, "precision", cname, format_percent(cms[cid].precision)])
                        per_class.writerow([ds["name"], row_name, "recall", cname, format_percent(cms[cid].recall)])
                        per_class.writerow([ds["name"], row_name, "f1", cname, format_percent(cms[cid].f1)])
                    per_class.writerow([ds["name"], row_name, "accuracy", "", format_percent(accuracy(cm))])
                    per_class.writerow([ds["name"], row_name, "kappa", "", f"{kappa(cm).value:.3f}"])
                    for i, tname in enumerate(class_names):
                        for j, pname in enumerate(class_names):
                            conf_w.writerow([ds["name"], row_name, tname, pname, int(cm.counts[i, j])])
    written += [root / "grid.csv", root / "per_class.csv", root / "confusion.csv", root / "precision_recall.csv"]
    return written


# --- flat key-value configuration files -------------------------------------

_BOOL = {"true": True, "false": False, "yes": True, "no": False, "1": True, "0": False}


def parse_kv_file(path: Path | str) -> dict[str, str]:
    """Flat ``key = value`` text with ``#`` comments; later keys override."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"missing config file: {path}")
    out: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = text.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _split_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _parse_bool(value: str, key: str) -> bool:
    try:
        return _BOOL[value.lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {value!r}") from None


_EXPERIMENT_KEYS = {
    "bundles",
    "views",
    "include_concatenated",
    "folds",
    "seed",
    "out",
    "reports",
    "report_row",
    "softmax.learning_rate",
    "softmax.momentum",
    "softmax.epochs",
    "softmax.batch_size",
    "softmax.l2",
    "svm.C",
    "svm.tolerance",
    "svm.max_passes",
    "svm.max_sweeps",
    "svm.cache_mb",
    "svm.rbf.gamma",
    "svm.poly.gamma",
    "svm.poly.degree",
    "svm.poly.coef0",
}


def load_experiment_config(path: Path | str, overrides: dict | None = None) -> ExperimentConfig:
    """Build an ExperimentConfig from a flat key-value file.

    ``overrides`` maps config fields (seed, folds, out_dir) to replacement
    values, used by the CLI flags.
    """
    kv = parse_kv_file(path)
    unknown = set(kv) - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "bundles" not in kv:
        raise ConfigError(f"{path}: 'bundles' is required")

    sm = SgdConfig(
        learning_rate=float(kv.get("softmax.learning_rate", 0.0001)),
        momentum=float(kv.get("softmax.momentum", 0.9)),
        epochs=int(kv.get("softmax.epochs", 50)),
        batch_size=int(kv.get("softmax.batch_size", 16)),
        l2=float(kv.get("softmax.l2", 0.0)),
    )
    smo = SmoConfig(
        C=float(kv.get("svm.C", 1.0)),
        tolerance=float(kv.get("svm.tolerance", 1e-3)),
        max_passes=int(kv.get("svm.max_passes", 10)),
        max_sweeps=int(kv.get("svm.max_sweeps", 1000)),
        cache_mb=int(kv.get("svm.cache_mb", 256)),
    )

    def gamma_of(key: str) -> float | None:
        raw = kv.get(key)
        if raw is None or raw in ("scale", "auto"):
            return None
        return float(raw)

    config = ExperimentConfig(
        bundle_paths=tuple(_split_list(kv["bundles"])),
        views=tuple(_split_list(kv["views"])) if "views" in kv else None,
        include_concatenated=_parse_bool(kv.get("include_concatenated", "true"), "include_concatenated"),
        folds=int(kv.get("folds", 5)),
        seed=int(kv.get("seed", 0)),
        out_dir=kv.get("out", "results"),
        report_formats=tuple(_split_list(kv["reports"])) if "reports" in kv else REPORT_FORMATS,
        report_row=kv.get("report_row"),
        softmax=sm,
        smo=smo,
        rbf_gamma=gamma_of("svm.rbf.gamma"),
        poly_gamma=gamma_of("svm.poly.gamma"),
        poly_degree=int(kv.get("svm.poly.degree", 3)),
        poly_coef0=float(kv.get("svm.poly.coef0", 0.0)),
    )
    if overrides:
        config = replace(config, **overrides)
    return config
