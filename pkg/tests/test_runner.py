"""Runner and CLI tests: grid completeness, leakage guards, fusion
replayability, report emission and end-to-end determinism."""

import csv
import subprocess
import sys

import numpy as np
import pytest

from fuselab.bundle import FeatureBundle, FeatureView, save_bundle, stratified_kfold
from fuselab.errors import ConfigError
from fuselab.fusion import SOFTMAX, SVM_POLY, SVM_RBF, FusionStrategy, VoterOutput, majority_vote
from fuselab.runner import (
    CONCATENATED_ROW,
    GRID_COLUMNS,
    ExperimentConfig,
    emit_reports,
    load_experiment_config,
    replay_reports,
    run_experiment,
    run_fold,
    write_predictions,
)
from fuselab.synthetic import complementary_spec, generate_synthetic

SMALL_SPEC = complementary_spec(class_sizes=(15, 15, 15), width=4)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("run")
    bundle = generate_synthetic(SMALL_SPEC, seed=11)
    save_bundle(bundle, tmp / "bundle")
    config = ExperimentConfig(
        bundle_paths=(str(tmp / "bundle"),), folds=3, seed=11, out_dir=str(tmp / "out")
    )
    result = run_experiment(config)
    return tmp, bundle, config, result


class TestConfig:
    def test_single_fold_rejected(self):
        with pytest.raises(ConfigError, match=">= 2"):
            ExperimentConfig(bundle_paths=("x",), folds=1)

    def test_no_bundles_rejected(self):
        with pytest.raises(ConfigError, match="at least one bundle"):
            ExperimentConfig(bundle_paths=())

    def test_unknown_report_format(self):
        with pytest.raises(ConfigError, match="unknown report formats"):
            ExperimentConfig(bundle_paths=("x",), report_formats=("grid", "pdf"))

    def test_config_file_round_trip(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text(
            "bundles = a, b\n"
            "folds = 4\n"
            "seed = 3  # master seed\n"
            "svm.C = 2.5\n"
            "softmax.epochs = 7\n"
            "svm.rbf.gamma = 0.125\n"
        )
        config = load_experiment_config(path, overrides={"seed": 9})
        assert config.bundle_paths == ("a", "b")
        assert config.folds == 4
        assert config.seed == 9
        assert config.smo.C == 2.5
        assert config.softmax.epochs == 7
        assert config.rbf_gamma == 0.125

    def test_unknown_config_key(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("bundles = a\nsvm.nu = 0.5\n")
        with pytest.raises(ConfigError, match="unknown keys"):
            load_experiment_config(path)


class TestRunExperiment:
    def test_grid_is_complete(self, small_run):
        _, bundle, config, result = small_run
        ds = result.datasets[0]
        assert [r.row for r in ds.rows] == ["alpha", "beta", CONCATENATED_ROW]
        for row in ds.rows:
            assert set(row.cells) == set(GRID_COLUMNS)
            for cell in row.cells.values():
                assert len(cell.values) == config.folds

    def test_concatenated_beats_single_views(self, small_run):
        _, _, _, result = small_run
        ds = result.datasets[0]
        concat = next(r for r in ds.rows if r.row == CONCATENATED_ROW)
        for row in ds.rows:
            if row.row == CONCATENATED_ROW:
                continue
            assert concat.cells[SOFTMAX].mean > row.cells[SOFTMAX].mean

    def test_pooled_confusion_totals_n(self, small_run):
        _, bundle, _, result = small_run
        for row in result.datasets[0].rows:
            assert row.f4_confusion.total == bundle.n_samples

    def test_fusion_column_replayable(self, small_run):
        """The stored fusion labels are a pure function of the stored voter
        labels and confidences."""
        _, _, _, result = small_run
        for row in result.datasets[0].rows:
            for fold_out in row.folds:
                voters = [
                    VoterOutput(v, fold_out.voter_labels[v], fold_out.voter_conf[v])
                    for v in (SOFTMAX, SVM_RBF, SVM_POLY)
                ]
                again = majority_vote(voters, FusionStrategy.ALL)
                assert np.array_equal(again, fold_out.fused["fusion4"])

    def test_deterministic_rerun(self, small_run):
        tmp, _, config, result = small_run
        repeat = run_experiment(config)
        for ds_a, ds_b in zip(result.datasets, repeat.datasets):
            for row_a, row_b in zip(ds_a.rows, ds_b.rows):
                for col in GRID_COLUMNS:
                    assert row_a.cells[col].values == row_b.cells[col].values

    def test_unknown_view_fails_before_training(self, small_run):
        tmp, _, config, _ = small_run
        from dataclasses import replace

        bad = replace(config, views=("alpha", "nope"))
        with pytest.raises(Exception, match="unknown view name 'nope'"):
            run_experiment(bad)


class TestLeakageGuard:
    def test_test_fold_rows_never_touch_training(self, small_run):
        """Replacing held-out rows with garbage changes neither the
        normalizer stats nor any trained parameter of that fold."""
        tmp, bundle, config, _ = small_run
        plan = stratified_kfold(bundle.labels, config.folds, config.seed)
        fold = 0
        test_idx = plan.test_indices(fold)
        poisoned_views = []
        rng = np.random.default_rng(99)
        for view in bundle.views:
            m = view.matrix.copy()
            m[test_idx] = rng.normal(size=(test_idx.size, view.width)) * 1e3
            poisoned_views.append(FeatureView(view.name, m))
        poisoned = FeatureBundle(bundle.manifest, tuple(poisoned_views), bundle.labels.copy())

        names = bundle.view_names
        a = run_fold(bundle, names, plan, fold, config, 0, 0)
        b = run_fold(poisoned, names, plan, fold, config, 0, 0)
        for sa, sb in zip(a.stats, b.stats):
            assert np.array_equal(sa.mean, sb.mean)
            assert np.array_equal(sa.std, sb.std)
        assert np.array_equal(a.softmax_params[0], b.softmax_params[0])
        assert np.array_equal(a.softmax_params[1], b.softmax_params[1])
        for voter in (SVM_RBF, SVM_POLY):
            for da, db in zip(a.svm_duals[voter], b.svm_duals[voter]):
                assert np.array_equal(da, db)


class TestReports:
    def test_report_files(self, small_run):
        tmp, _, config, result = small_run
        out = tmp / "reports"
        written = emit_reports(result, config.report_formats, out)
        names = sorted(p.name for p in written)
        assert names == ["confusion.csv", "grid.csv", "per_class.csv", "precision_recall.csv"]

    def test_per_class_shape(self, small_run):
        tmp, _, config, result = small_run
        out = tmp / "reports_shape"
        emit_reports(result, ("per_class",), out)
        with open(out / "per_class.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_quantity = {}
        for rec in rows:
            by_quantity.setdefault(rec["quantity"], []).append(rec)
        # three metric kinds spanning the three classes, plus the scalar rows
        for quantity in ("precision", "recall", "f1"):
            assert len(by_quantity[quantity]) == 3
        assert len(by_quantity["accuracy"]) == 1
        assert len(by_quantity["kappa"]) == 1

    def test_empty_format_list_warns(self, small_run, tmp_path):
        _, _, _, result = small_run
        with pytest.warns(UserWarning, match="no report formats"):
            written = emit_reports(result, (), tmp_path)
        assert written == []
        assert list(tmp_path.iterdir()) == []

    def test_replay_matches_original(self, small_run, tmp_path):
        _, _, config, result = small_run
        out = tmp_path / "replay"
        write_predictions(result, out)
        emit_reports(result, config.report_formats, out)
        originals = {
            name: (out / name).read_bytes()
            for name in ("grid.csv", "per_class.csv", "confusion.csv", "precision_recall.csv")
        }
        replay_reports(out)
        for name, payload in originals.items():
            assert (out / name).read_bytes() == payload


class TestCli:
    @staticmethod
    def cli(*args, cwd=None):
        return subprocess.run(
            [sys.executable, "-m", "fuselab.cli", *args], capture_output=True, text=True, cwd=cwd
        )

    def test_missing_config_exits_nonzero(self):
        proc = self.cli("run", "missing.cfg")
        assert proc.returncode == 1
        assert "missing.cfg" in proc.stderr

    def test_unknown_subcommand_exits_two(self):
        assert self.cli("frobnicate").returncode == 2

    def test_unknown_flag_exits_two(self):
        assert self.cli("run", "x.cfg", "--frobnicate").returncode == 2

    def test_synth_then_run_end_to_end(self, tmp_path):
        spec = tmp_path / "synth.cfg"
        spec.write_text("preset = complementary\nseed = 11\nsizes = 12, 12, 12\nwidth = 4\n")
        assert self.cli("synth", str(spec), str(tmp_path / "bundle")).returncode == 0
        cfg = tmp_path / "exp.cfg"
        cfg.write_text(
            f"bundles = {tmp_path / 'bundle'}\nfolds = 3\nseed = 11\nout = {tmp_path / 'out'}\n"
        )
        proc = self.cli("run", str(cfg))
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "out" / "grid.csv").is_file()
        assert (tmp_path / "out" / "predictions_complementary.csv").is_file()
        # replay without retraining
        assert self.cli("report", str(tmp_path / "out")).returncode == 0

    def test_cam_subcommand(self, tmp_path):
        from fuselab.bundle import write_matrix
        from fuselab.cam import ActivationTensor, save_tensor

        rng = np.random.default_rng(0)
        save_tensor(ActivationTensor(rng.normal(size=(4, 4, 3))), tmp_path / "a.camt")
        write_matrix(tmp_path / "w.fuse", rng.normal(size=(2, 3)))
        out = tmp_path / "map.pgm"
        proc = self.cli(
            "cam", str(tmp_path / "a.camt"), str(tmp_path / "w.fuse"), str(out),
            "--class-id", "1", "--upsample", "8x8", "--color",
        )
        assert proc.returncode == 0, proc.stderr
        assert out.read_bytes().startswith(b"P5\n8 8\n255\n")
        assert (tmp_path / "map.ppm").is_file()

    def test_blobs_preset(self, tmp_path):
        spec = tmp_path / "synth.cfg"
        spec.write_text(
            "preset = blobs\nclasses = 2\nsizes = 8, 8\nviews = u:3, w:2\nseed = 5\n"
        )
        proc = self.cli("synth", str(spec), str(tmp_path / "bundle"))
        assert proc.returncode == 0, proc.stderr
        from fuselab.bundle import load_bundle

        bundle = load_bundle(tmp_path / "bundle")
        assert bundle.n_samples == 16
        assert [v.width for v in bundle.views] == [3, 2]


class TestThreadEnvironment:
    def test_serial_and_parallel_agree(self, small_run, monkeypatch):
        _, _, config, result = small_run
        monkeypatch.setenv("FUSELAB_THREADS", "1")
        serial = run_experiment(config)
        monkeypatch.setenv("FUSELAB_THREADS", "3")
        parallel = run_experiment(config)
        for ds_a, ds_b in zip(serial.datasets, parallel.datasets):
            for row_a, row_b in zip(ds_a.rows, ds_b.rows):
                for col in GRID_COLUMNS:
                    assert row_a.cells[col].values == row_b.cells[col].values

    def test_invalid_thread_env(self, small_run, monkeypatch):
        _, _, config, _ = small_run
        monkeypatch.setenv("FUSELAB_THREADS", "lots")
        with pytest.raises(ConfigError, match="FUSELAB_THREADS"):
            run_experiment(config)
