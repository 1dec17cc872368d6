import numpy as np
import pytest

from npcloud.bankio import load_bank, save_bank
from npcloud.config import PipelineConfig, StageConfig
from npcloud.encoding import EncodingConfig
from npcloud.errors import ConfigHashMismatch, CorruptBank
from npcloud.inference import build_cls_bank, build_seg_bank
from npcloud.synth import make_classification_set, make_segmentation_set


def cls_cfg():
    return PipelineConfig(
        encoding=EncodingConfig(dim=12),
        stages=StageConfig(stages=2, k=8, points=64),
    )


def seg_cfg():
    return PipelineConfig(
        encoding=EncodingConfig(dim=24, mode="hybrid", fourier_l=2),
        stages=StageConfig(stages=2, k=8, points=64),
    )


@pytest.fixture(scope="module")
def cls_bank():
    clouds = make_classification_set(per_class=2, n_points=64, seed=0)
    return build_cls_bank(clouds, cls_cfg())


@pytest.fixture(scope="module")
def seg_bank():
    clouds = make_segmentation_set(3, 64, seed=1)
    return build_seg_bank(clouds, seg_cfg())


class TestClsRoundTrip:
    def test_lossless_fp32(self, cls_bank, tmp_path):
        path = tmp_path / "bank.npb"
        save_bank(cls_bank, path)
        back = load_bank(path)
        np.testing.assert_array_equal(back.descriptors, cls_bank.descriptors)
        np.testing.assert_array_equal(back.labels_onehot, cls_bank.labels_onehot)
        assert back.gamma == cls_bank.gamma
        assert back.class_names == cls_bank.class_names
        assert back.config_digest == cls_bank.config_digest

    def test_fp16_degradation_bounded(self, cls_bank, tmp_path):
        path = tmp_path / "bank16.npb"
        save_bank(cls_bank, path, precision="fp16")
        back = load_bank(path)
        np.testing.assert_allclose(
            back.descriptors.astype(np.float64),
            cls_bank.descriptors.astype(np.float64),
            rtol=1e-3,
            atol=1e-6,
        )

    def test_digest_check(self, cls_bank, tmp_path):
        path = tmp_path / "bank.npb"
        save_bank(cls_bank, path)
        load_bank(path, expected_digest=cls_cfg().digest())
        with pytest.raises(ConfigHashMismatch):
            load_bank(path, expected_digest="0" * 16)


class TestSegRoundTrip:
    def test_lossless_fp32(self, seg_bank, tmp_path):
        path = tmp_path / "seg.npb"
        save_bank(seg_bank, path)
        back = load_bank(path)
        assert set(back.categories) == set(seg_bank.categories)
        for cat, entry in seg_bank.categories.items():
            got = back.categories[cat]
            np.testing.assert_array_equal(got.prototypes, entry.prototypes)
            np.testing.assert_array_equal(got.part_ids, entry.part_ids)
            np.testing.assert_array_equal(got.valid_parts, entry.valid_parts)
        assert back.skipped_parts == seg_bank.skipped_parts


class TestCorruption:
    def test_crc_detects_flip(self, cls_bank, tmp_path):
        path = tmp_path / "bank.npb"
        save_bank(cls_bank, path)
        raw = bytearray(path.read_bytes())
        raw[40] ^= 0xFF
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptBank):
            load_bank(path)

    def test_truncation(self, cls_bank, tmp_path):
        path = tmp_path / "bank.npb"
        save_bank(cls_bank, path)
        path.write_bytes(path.read_bytes()[:10])
        with pytest.raises(CorruptBank):
            load_bank(path)

    def test_bad_magic(self, cls_bank, tmp_path):
        path = tmp_path / "bank.npb"
        save_bank(cls_bank, path)
        raw = bytearray(path.read_bytes())
        raw[:4] = b"XXXX"
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptBank):
            load_bank(path)
