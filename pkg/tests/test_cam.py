"""Class-activation-map tests: weighted-sum algebra, normalization,
bilinear resampling, quantized export and the CAMT1 file format."""

import numpy as np
import pytest

from fuselab.cam import (
    ActivationTensor,
    CamHeatmap,
    bilinear_upsample,
    compute_cam,
    export_heatmap,
    load_tensor,
    normalize_minmax,
    save_tensor,
)


def random_tensor(seed=0, shape=(5, 4, 6)):
    return ActivationTensor(np.random.default_rng(seed).normal(size=shape))


class TestComputeCam:
    def test_single_channel_identity(self):
        a = ActivationTensor(np.arange(6.0).reshape(2, 3, 1))
        assert np.array_equal(compute_cam(a, [1.0]), a.values[:, :, 0])

    def test_zero_weights(self):
        assert np.array_equal(compute_cam(random_tensor(), np.zeros(6)), np.zeros((5, 4)))

    def test_linearity(self):
        a = random_tensor(1)
        rng = np.random.default_rng(2)
        w1, w2 = rng.normal(size=6), rng.normal(size=6)
        lhs = compute_cam(a, w1 + w2)
        rhs = compute_cam(a, w1) + compute_cam(a, w2)
        assert np.abs(lhs - rhs).max() < 1e-9

    def test_channel_mismatch(self):
        with pytest.raises(ValueError, match="channels"):
            compute_cam(random_tensor(), np.zeros(5))

    def test_constant_channels(self):
        consts = np.array([2.0, -1.0, 0.5])
        values = np.broadcast_to(consts, (4, 3, 3)).copy()
        w = np.array([1.0, 2.0, 4.0])
        raw = compute_cam(ActivationTensor(values), w)
        assert np.allclose(raw, consts @ w)

    def test_relu_flag(self):
        a = ActivationTensor(np.array([[[-1.0]], [[2.0]]]))
        assert np.array_equal(compute_cam(a, [1.0], relu=True), [[0.0], [2.0]])


class TestNormalize:
    def test_basic(self):
        h = normalize_minmax(np.array([[0.0, 5.0, 10.0]]))
        assert np.array_equal(h.values, [[0.0, 0.5, 1.0]])
        assert not h.constant

    def test_constant_map_flagged(self):
        h = normalize_minmax(np.full((2, 2), 3.7))
        assert h.constant
        assert np.array_equal(h.values, np.zeros((2, 2)))

    def test_negative_values(self):
        h = normalize_minmax(np.array([[-2.0, 0.0, 2.0]]))
        assert np.array_equal(h.values, [[0.0, 0.5, 1.0]])

    def test_positive_scale_invariance(self):
        rng = np.random.default_rng(3)
        a = random_tensor(4)
        w = rng.normal(size=6)
        base = normalize_minmax(compute_cam(a, w)).values
        for lam in (0.5, 3.0, 1e6):
            scaled = normalize_minmax(compute_cam(a, lam * w)).values
            assert np.abs(scaled - base).max() < 1e-9

    def test_provenance(self):
        h = normalize_minmax(np.array([[0.0, 1.0]]), source_shape=(7, 7, 12), class_id=2)
        assert h.source_shape == (7, 7, 12)
        assert h.class_id == 2


class TestBilinearUpsample:
    def test_identity_target(self):
        m = np.random.default_rng(5).normal(size=(4, 6))
        assert np.allclose(bilinear_upsample(m, 4, 6), m)

    def test_one_by_one_input(self):
        out = bilinear_upsample(np.array([[3.5]]), 4, 5)
        assert np.array_equal(out, np.full((4, 5), 3.5))

    def test_hand_interpolated_middle_column(self):
        m = np.array([[0.0, 1.0], [0.0, 1.0]])
        out = bilinear_upsample(m, 2, 3)
        assert out.shape == (2, 3)
        assert np.allclose(out[:, 1], 0.5)
        assert np.allclose(out[:, 0], 0.0) and np.allclose(out[:, 2], 1.0)

    def test_range_containment(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            m = rng.normal(size=(int(rng.integers(1, 6)), int(rng.integers(1, 6))))
            out = bilinear_upsample(m, int(rng.integers(1, 12)), int(rng.integers(1, 12)))
            assert out.min() >= m.min() - 1e-12
            assert out.max() <= m.max() + 1e-12

    def test_zero_target_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            bilinear_upsample(np.zeros((2, 2)), 0, 3)


class TestExport:
    def test_quantization_bytes(self, tmp_path):
        h = CamHeatmap(np.array([[0.0, 1.0], [0.5, 0.25]]))
        export_heatmap(h, tmp_path / "m.pgm")
        data = (tmp_path / "m.pgm").read_bytes()
        assert data.startswith(b"P5\n2 2\n255\n")
        assert data[-4:] == bytes([0, 255, 128, 64])

    def test_all_zero_heatmap(self, tmp_path):
        export_heatmap(CamHeatmap(np.zeros((3, 3))), tmp_path / "z.pgm")
        assert (tmp_path / "z.pgm").read_bytes()[-9:] == bytes(9)

    def test_re_export_is_byte_identical(self, tmp_path):
        h = CamHeatmap(np.random.default_rng(7).random((6, 5)))
        export_heatmap(h, tmp_path / "a.pgm")
        export_heatmap(h, tmp_path / "b.pgm")
        assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()

    def test_color_ramp(self, tmp_path):
        h = CamHeatmap(np.array([[0.0, 1.0]]))
        export_heatmap(h, tmp_path / "c.pgm", color=True)
        ppm = (tmp_path / "c.ppm").read_bytes()
        assert ppm.startswith(b"P6\n2 1\n255\n")
        assert ppm[-6:] == bytes([0, 0, 255, 255, 0, 0])  # blue then red


class TestTensorFile:
    def test_round_trip(self, tmp_path):
        t = ActivationTensor(np.random.default_rng(8).normal(size=(3, 4, 5)).astype(np.float32))
        save_tensor(t, tmp_path / "t.camt")
        back = load_tensor(tmp_path / "t.camt")
        assert back.shape == (3, 4, 5)
        assert np.array_equal(back.values, t.values)

    def test_truncated(self, tmp_path):
        t = ActivationTensor(np.zeros((2, 2, 2)))
        save_tensor(t, tmp_path / "t.camt")
        data = (tmp_path / "t.camt").read_bytes()
        (tmp_path / "t.camt").write_bytes(data[:-3])
        with pytest.raises(ValueError, match="expected 49 bytes"):
            load_tensor(tmp_path / "t.camt")

    def test_bad_magic(self, tmp_path):
        (tmp_path / "t.camt").write_bytes(b"WRONG" + bytes(12))
        with pytest.raises(ValueError, match="bad magic"):
            load_tensor(tmp_path / "t.camt")

    def test_non_finite_rejected(self):
        values = np.zeros((2, 2, 1))
        values[0, 0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            ActivationTensor(values)
