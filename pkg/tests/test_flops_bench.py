import pytest

from npcloud.bench import benchmark
from npcloud.config import PipelineConfig, StageConfig, modelnet40_config
from npcloud.encoding import EncodingConfig
from npcloud.flops import estimate_flops, formula_sheet
from npcloud.synth import make_classification_set


def cfg_with(dim=12, k=8, stages=2, points=64, mode="adaptive"):
    return PipelineConfig(
        encoding=EncodingConfig(dim=dim, mode=mode),
        stages=StageConfig(stages=stages, k=k, points=points),
    )


class TestEstimate:
    def test_monotone_in_dim(self):
        counts = [estimate_flops(cfg_with(dim=d)).total for d in (12, 24, 48, 96)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_monotone_in_k(self):
        counts = [estimate_flops(cfg_with(k=k)).total for k in (4, 8, 16, 32)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_monotone_in_stages(self):
        counts = [estimate_flops(cfg_with(stages=t, points=256)).total for t in (1, 2, 3, 4)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_components_cover_total(self):
        est = estimate_flops(cfg_with())
        assert est.total == sum(est.by_component.values())
        assert est.by_component["decoder"] == 0  # cls path

    def test_seg_adds_decoder(self):
        cfg = cfg_with(dim=24, mode="hybrid")
        est = estimate_flops(cfg, task="seg")
        assert est.by_component["decoder"] > 0

    def test_formula_sheet_documents_convention(self):
        sheet = formula_sheet()
        assert "fused multiply-add = 2" in sheet
        assert "transcendental" in sheet

    def test_baseline_config_magnitude_informational(self, capsys):
        # Published GFLOP figures for this method family come from an
        # unstated profiler convention and sit far below a full arithmetic
        # count; the estimator documents its own convention instead. This
        # records the gap rather than asserting parity (the binding checks
        # are the monotonicity trends above).
        est = estimate_flops(modelnet40_config())
        print(f"baseline-config estimate: {est.gflops:.4f} GFLOPs (published family values ~0.002)")
        assert est.total > 0


@pytest.fixture(scope="module")
def clouds():
    return make_classification_set(per_class=1, n_points=64, seed=0)


class TestBenchmark:
    def test_single_repetition_is_single_run(self, clouds):
        out = benchmark(cfg_with(), clouds, repetitions=1, warmup=1)
        assert out.repetitions == 1
        assert out.ms_per_sample > 0

    def test_fields_complete(self, clouds):
        out = benchmark(cfg_with(), clouds, repetitions=2, warmup=1)
        assert out.n_samples == len(clouds)
        assert out.peak_mb > 0
        assert out.ms_per_sample > 0
