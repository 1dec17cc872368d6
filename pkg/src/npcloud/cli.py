"""Command-line interface.

Subcommands: ``synth``, ``convert``, ``bank build``, ``classify``,
``segment``, ``eval cls|seg``, ``fewshot``, ``bench``, ``sweep``.
Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click
import numpy as np

from .bankio import load_bank, save_bank
from .bench import benchmark
from .config import PipelineConfig, StageConfig
from .encoder import encode_classification, encode_segmentation
from .encoding import MODE_ADAPTIVE, MODE_HYBRID, EncodingConfig
from .errors import NPCloudError
from .flops import estimate_flops, formula_sheet
from .formats import convert as convert_sample
from .formats import load_sample, save_sample
from .inference import (
    build_cls_bank,
    build_seg_bank,
    classify as classify_descriptor,
    evaluate_classification,
    evaluate_segmentation,
    fewshot_episode,
    segment as segment_descriptors,
)
from .manifest import (
    TASK_CLS,
    TASK_SEG,
    dataset_digest,
    load_manifest,
    write_manifest,
)
from .report import EvalReport, emit
from .synth import (
    CLS_CLASS_NAMES,
    SEG_CATEGORY_NAME,
    SEG_PARTS,
    make_classification_set,
    make_segmentation_set,
)

_CONFIG_OPTIONS = [
    click.option("--dim", type=int, default=35, show_default=True, help="Encoding width d."),
    click.option("--k", type=int, default=110, show_default=True, help="Neighbors per centroid."),
    click.option("--stages", type=int, default=4, show_default=True, help="Stage count."),
    click.option("--points", type=int, default=1024, show_default=True, help="Points per shape."),
    click.option("--gamma", type=float, default=100.0, show_default=True, help="Softmax temperature."),
    click.option("--sigma0", type=float, default=0.3, show_default=True, help="Base bandwidth."),
    click.option("--tau", type=float, default=0.3, show_default=True, help="Blend threshold."),
    click.option("--kappa", type=float, default=10.0, show_default=True, help="Blend sharpness."),
    click.option("--alpha", type=float, default=100.0, show_default=True, help="Fourier frequency base."),
    click.option("--beta", type=float, default=1000.0, show_default=True, help="Fourier phase scale."),
    click.option("--fourier-l", type=int, default=0, show_default=True, help="Fourier frequencies per axis (0 derives dim/12)."),
    click.option("--mode", type=click.Choice([MODE_ADAPTIVE, MODE_HYBRID]), default=None, help="Encoding mode (default: adaptive for cls, hybrid for seg)."),
    click.option("--seed", type=int, default=0, show_default=True, help="Random seed."),
    click.option("--fixed-sigma", type=float, default=None, help="Disable bandwidth adaptivity at this value."),
    click.option("--fixed-blend", type=float, default=None, help="Disable blend adaptivity at this value."),
    click.option("--no-scale-norm", is_flag=True, help="Skip the unit-ball rescale during canonicalization."),
    click.option("--workers", type=int, default=None, help="Worker pool size (default: NPNET_THREADS or CPU count)."),
]


def config_options(fn):
    for opt in reversed(_CONFIG_OPTIONS):
        fn = opt(fn)
    return fn


def build_config(params: dict, default_mode: str = MODE_ADAPTIVE) -> PipelineConfig:
    mode = params["mode"] or default_mode
    return PipelineConfig(
        encoding=EncodingConfig(
            dim=params["dim"],
            sigma0=params["sigma0"],
            tau=params["tau"],
            kappa=params["kappa"],
            fourier_l=params["fourier_l"],
            alpha=params["alpha"],
            beta=params["beta"],
            mode=mode,
            fixed_sigma=params["fixed_sigma"],
            fixed_blend=params["fixed_blend"],
        ),
        stages=StageConfig(stages=params["stages"], k=params["k"], points=params["points"]),
        gamma=params["gamma"],
        normalize_scale=not params["no_scale_norm"],
        seed=params["seed"],
    )


def _echo_metrics(metrics: dict[str, float]) -> None:
    for name, value in metrics.items():
        click.echo(f"{name}={value:.6g}")


def _load_dataset(data, task: str, cfg: PipelineConfig, workers):
    """Manifest-backed dataset, or the built-in synthetic one when no
    manifest is given. Returns (train, test, names, parts_table, digest)."""
    if data is not None:
        manifest = load_manifest(data)
        if manifest.task != task:
            raise NPCloudError(f"manifest task {manifest.task!r}, command needs {task!r}")
        train = manifest.load_split("train", n_points=cfg.stages.points, workers=workers)
        test = manifest.load_split("test", n_points=cfg.stages.points, workers=workers)
        names = manifest.class_names or tuple(c.name for c in manifest.categories)
        parts = manifest.category_parts() if task == TASK_SEG else None
        return train, test, names, parts, dataset_digest(manifest)
    n = cfg.stages.points
    if task == TASK_CLS:
        train = make_classification_set(20, n, seed=cfg.seed)
        test = make_classification_set(20, n, seed=cfg.seed + 1)
        digest = f"synthetic-cls-{cfg.seed}-{n}"
        return train, test, CLS_CLASS_NAMES, None, digest
    train = make_segmentation_set(20, n, seed=cfg.seed)
    test = make_segmentation_set(20, n, seed=cfg.seed + 1)
    return train, test, (SEG_CATEGORY_NAME,), {0: SEG_PARTS}, f"synthetic-seg-{cfg.seed}-{n}"


@click.group()
def cli():
    """Training-free point-cloud classification and part segmentation."""


# --- dataset helpers ------------------------------------------------------


@cli.command()
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Output dataset directory.")
@click.option("--task", type=click.Choice([TASK_CLS, TASK_SEG]), default=TASK_CLS, show_default=True)
@click.option("--train", "n_train", type=int, default=40, show_default=True, help="Training shapes (per class for cls).")
@click.option("--test", "n_test", type=int, default=40, show_default=True, help="Test shapes (per class for cls).")
@click.option("--points", type=int, default=256, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--scale-min", type=float, default=None, help="Per-shape random scale lower bound.")
@click.option("--scale-max", type=float, default=None, help="Per-shape random scale upper bound.")
@click.option("--format", "fmt", type=click.Choice(["xyz", "npc1"]), default="xyz", show_default=True)
def synth(out, task, n_train, n_test, points, seed, scale_min, scale_max, fmt):
    """Generate the built-in synthetic dataset with a manifest."""
    scale = None
    if scale_min is not None or scale_max is not None:
        scale = (scale_min or 1.0, scale_max or 1.0)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".xyz" if fmt == "xyz" else ".npc"
    refs = {"train": [], "test": []}
    if task == TASK_CLS:
        splits = {
            "train": make_classification_set(n_train, points, seed=seed, scale_range=scale),
            "test": make_classification_set(n_test, points, seed=seed + 1, scale_range=scale),
        }
    else:
        splits = {
            "train": make_segmentation_set(n_train, points, seed=seed),
            "test": make_segmentation_set(n_test, points, seed=seed + 1),
        }
    for split, clouds in splits.items():
        (out / split).mkdir(exist_ok=True)
        for i, cloud in enumerate(clouds):
            rel = f"{split}/sample_{i:04d}{suffix}"
            save_sample(cloud, out / rel, fmt=fmt)
            refs[split].append((rel, cloud.category))
    write_manifest(
        out / "manifest.json",
        task=task,
        points=points,
        train=refs["train"],
        test=refs["test"],
        class_names=CLS_CLASS_NAMES if task == TASK_CLS else None,
        categories=[(SEG_CATEGORY_NAME, SEG_PARTS)] if task == TASK_SEG else None,
    )
    click.echo(f"wrote {len(refs['train'])} train + {len(refs['test'])} test samples to {out}")


@cli.command()
@click.argument("src", type=click.Path(exists=True, path_type=Path))
@click.argument("dst", type=click.Path(path_type=Path))
@click.option("--to", "fmt", type=click.Choice(["xyz", "npc1"]), default=None, help="Target format (default: by suffix).")
@click.option("--points", type=int, default=None, help="Resample to this point count.")
def convert(src, dst, fmt, points):
    """Convert a sample between XYZ text and NPC1 packed binary."""
    convert_sample(src, dst, fmt=fmt, n_points=points)
    click.echo(f"wrote {dst}")


# --- bank -----------------------------------------------------------------


@cli.group()
def bank():
    """Memory bank construction."""


@bank.command("build")
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None, help="Dataset manifest (default: built-in synthetic).")
@click.option("--task", type=click.Choice([TASK_CLS, TASK_SEG]), default=TASK_CLS, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True, help="Bank file to write.")
@click.option("--fp16-bank", is_flag=True, help="Store descriptors at half precision.")
@click.option("--proto-keep", type=float, default=1.0, show_default=True, help="Seeded fraction of segmentation prototypes to keep.")
@config_options
def bank_build(data, task, out, fp16_bank, proto_keep, **params):
    """Encode the training split once and save the bank."""
    cfg = build_config(params, default_mode=MODE_HYBRID if task == TASK_SEG else MODE_ADAPTIVE)
    train, _, names, parts, _ = _load_dataset(data, task, cfg, params["workers"])
    if task == TASK_CLS:
        built = build_cls_bank(train, cfg, class_names=names, workers=params["workers"])
        count = built.size
    else:
        built = build_seg_bank(
            train, cfg, category_parts=parts, proto_keep=proto_keep, workers=params["workers"]
        )
        count = sum(c.prototypes.shape[0] for c in built.categories.values())
    save_bank(built, out, precision="fp16" if fp16_bank else "fp32")
    click.echo(f"wrote {out} ({count} {'descriptors' if task == TASK_CLS else 'prototypes'}, config {cfg.digest()})")


# --- prediction -------------------------------------------------------------


@cli.command()
@click.option("--bank", "bank_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.argument("samples", nargs=-1, required=True, type=click.Path(exists=True, path_type=Path))
@config_options
def classify(bank_path, samples, **params):
    """Predict a class for each sample file."""
    cfg = build_config(params)
    stored = load_bank(bank_path, expected_digest=cfg.digest())
    for sample in samples:
        cloud = load_sample(sample, n_points=cfg.stages.points)
        pred = classify_descriptor(stored, encode_classification(cloud, cfg))
        name = stored.class_names[pred.label]
        click.echo(f"{sample}\t{pred.label}\t{name}\t{pred.scores[pred.label]:.4f}")


@cli.command()
@click.option("--bank", "bank_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--category", type=int, required=True, help="Shape category id (known at test time).")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Write per-point labels here (default: stdout).")
@click.argument("sample", type=click.Path(exists=True, path_type=Path))
@config_options
def segment(bank_path, category, out, sample, **params):
    """Predict a part label for every point of one sample."""
    cfg = build_config(params, default_mode=MODE_HYBRID)
    stored = load_bank(bank_path, expected_digest=cfg.digest())
    cloud = load_sample(sample, n_points=cfg.stages.points)
    pred = segment_descriptors(stored, category, encode_segmentation(cloud, cfg))
    text = "\n".join(str(int(v)) for v in pred.labels) + "\n"
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out} ({pred.labels.shape[0]} labels)")


# --- evaluation -------------------------------------------------------------


@cli.group("eval")
def eval_group():
    """Metric evaluation over a dataset split."""


def _eval_common(task, data, bank_path, split, out_base, figure, params):
    cfg = build_config(params, default_mode=MODE_HYBRID if task == TASK_SEG else MODE_ADAPTIVE)
    train, test, names, parts, digest = _load_dataset(data, task, cfg, params["workers"])
    shapes = train if split == "train" else test
    if bank_path is not None:
        stored = load_bank(bank_path, expected_digest=cfg.digest())
    elif task == TASK_CLS:
        stored = build_cls_bank(train, cfg, class_names=names, workers=params["workers"])
    else:
        stored = build_seg_bank(train, cfg, category_parts=parts, workers=params["workers"])
    if task == TASK_CLS:
        metrics = {
            "accuracy_pct": 100.0 * evaluate_classification(stored, shapes, cfg, params["workers"])
        }
    else:
        metrics = {
            "instance_miou_pct": 100.0 * evaluate_segmentation(stored, shapes, cfg, params["workers"])
        }
    metrics["gflops"] = estimate_flops(cfg, task=task).gflops
    report = EvalReport.create(metrics, cfg=cfg, seed=cfg.seed, dataset_digest=digest)
    written = emit(report, out_base, figure=figure)
    _echo_metrics(metrics)
    click.echo("wrote " + ", ".join(str(p) for p in written))


_EVAL_OPTIONS = [
    click.option("--data", type=click.Path(exists=True, path_type=Path), default=None, help="Dataset manifest (default: built-in synthetic)."),
    click.option("--bank", "bank_path", type=click.Path(exists=True, path_type=Path), default=None, help="Prebuilt bank (default: build from the train split)."),
    click.option("--split", type=click.Choice(["train", "test"]), default="test", show_default=True),
    click.option("--out", "out_base", type=click.Path(path_type=Path), default=Path("reports/eval"), show_default=True, help="Report base path (.csv/.json/.png appended)."),
    click.option("--no-figure", is_flag=True, help="Skip the PNG figure."),
]


def eval_options(fn):
    for opt in reversed(_EVAL_OPTIONS):
        fn = opt(fn)
    return fn


@eval_group.command("cls")
@eval_options
@config_options
def eval_cls(data, bank_path, split, out_base, no_figure, **params):
    """Overall accuracy on a classification split."""
    _eval_common(TASK_CLS, data, bank_path, split, out_base, not no_figure, params)


@eval_group.command("seg")
@eval_options
@config_options
def eval_seg(data, bank_path, split, out_base, no_figure, **params):
    """Instance mIoU on a segmentation split."""
    _eval_common(TASK_SEG, data, bank_path, split, out_base, not no_figure, params)


# --- few-shot ----------------------------------------------------------------


@cli.command()
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None, help="Dataset manifest (default: built-in synthetic).")
@click.option("--ways", type=int, default=3, show_default=True)
@click.option("--shots", type=int, default=5, show_default=True)
@click.option("--queries", type=int, default=5, show_default=True)
@click.option("--runs", type=int, default=10, show_default=True)
@click.option("--out", "out_base", type=click.Path(path_type=Path), default=Path("reports/fewshot"), show_default=True)
@click.option("--no-figure", is_flag=True)
@config_options
def fewshot(data, ways, shots, queries, runs, out_base, no_figure, **params):
    """Episodic N-way K-shot accuracy; banks are built from support only."""
    cfg = build_config(params)
    train, _, _, _, digest = _load_dataset(data, TASK_CLS, cfg, params["workers"])
    accs = [
        fewshot_episode(train, ways, shots, queries, cfg, seed=cfg.seed + run, workers=params["workers"])
        for run in range(runs)
    ]
    metrics = {
        "mean_accuracy_pct": 100.0 * float(np.mean(accs)),
        "std_accuracy_pct": 100.0 * float(np.std(accs)),
        "runs": float(runs),
        "ways": float(ways),
        "shots": float(shots),
    }
    report = EvalReport.create(metrics, cfg=cfg, seed=cfg.seed, dataset_digest=digest)
    written = emit(report, out_base, figure=not no_figure)
    _echo_metrics(metrics)
    click.echo("wrote " + ", ".join(str(p) for p in written))


# --- efficiency ---------------------------------------------------------------


@cli.command()
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None, help="Dataset manifest (default: built-in synthetic).")
@click.option("--task", type=click.Choice([TASK_CLS, TASK_SEG]), default=TASK_CLS, show_default=True)
@click.option("--repetitions", type=int, default=5, show_default=True)
@click.option("--samples", type=int, default=8, show_default=True, help="Clouds timed per pass.")
@click.option("--out", "out_base", type=click.Path(path_type=Path), default=Path("reports/bench"), show_default=True)
@click.option("--no-figure", is_flag=True)
@config_options
def bench(data, task, repetitions, samples, out_base, no_figure, **params):
    """Latency, peak allocation, and the analytic FLOP estimate."""
    cfg = build_config(params, default_mode=MODE_HYBRID if task == TASK_SEG else MODE_ADAPTIVE)
    _, test, _, _, digest = _load_dataset(data, task, cfg, params["workers"])
    clouds = test[: max(1, samples)]
    result = benchmark(cfg, clouds, repetitions=repetitions, task=task)
    est = estimate_flops(cfg, task=task)
    metrics = {
        "ms_per_sample": result.ms_per_sample,
        "peak_mb": result.peak_mb,
        "gflops": est.gflops,
        "samples": float(result.n_samples),
        "repetitions": float(result.repetitions),
    }
    report = EvalReport.create(metrics, cfg=cfg, seed=cfg.seed, dataset_digest=digest)
    written = emit(report, out_base, figure=not no_figure)
    written.append(Path(out_base).with_suffix(".flops.txt"))
    written[-1].write_text(
        formula_sheet()
        + "\n\ncomponents:\n"
        + "\n".join(f"  {k}: {v}" for k, v in est.by_component.items())
        + f"\n  total: {est.total}\n"
    )
    _echo_metrics(metrics)
    click.echo("wrote " + ", ".join(str(p) for p in written))


_SWEEPABLE = {
    "dim": lambda cfg, v: cfg.replace(encoding=_replace_enc(cfg, dim=int(v))),
    "k": lambda cfg, v: cfg.replace(stages=_replace_stage(cfg, k=int(v))),
    "stages": lambda cfg, v: cfg.replace(stages=_replace_stage(cfg, stages=int(v))),
    "fixed-sigma": lambda cfg, v: cfg.replace(encoding=_replace_enc(cfg, fixed_sigma=float(v))),
    "fixed-blend": lambda cfg, v: cfg.replace(encoding=_replace_enc(cfg, fixed_blend=float(v))),
}


def _replace_enc(cfg: PipelineConfig, **kwargs) -> EncodingConfig:
    from dataclasses import replace

    return replace(cfg.encoding, **kwargs)


def _replace_stage(cfg: PipelineConfig, **kwargs) -> StageConfig:
    from dataclasses import replace

    return replace(cfg.stages, **kwargs)


@cli.command()
@click.option("--data", type=click.Path(exists=True, path_type=Path), default=None, help="Dataset manifest (default: built-in synthetic).")
@click.option("--task", type=click.Choice([TASK_CLS, TASK_SEG]), default=TASK_CLS, show_default=True)
@click.option("--param", type=click.Choice(sorted(_SWEEPABLE)), required=True)
@click.option("--values", required=True, help="Comma-separated values to sweep.")
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.option("--bench-samples", type=int, default=4, show_default=True)
@click.option("--out", "out_base", type=click.Path(path_type=Path), default=Path("reports/sweep"), show_default=True)
@click.option("--no-figure", is_flag=True)
@config_options
def sweep(data, task, param, values, repetitions, bench_samples, out_base, no_figure, **params):
    """Ablation sweep: one evaluation + efficiency row per value, in order."""
    cfg = build_config(params, default_mode=MODE_HYBRID if task == TASK_SEG else MODE_ADAPTIVE)
    try:
        parsed = sorted(float(v) for v in values.split(",") if v.strip())
    except ValueError:
        raise click.UsageError(f"--values must be comma-separated numbers, got {values!r}")
    if not parsed:
        raise click.UsageError("--values is empty")
    train, test, names, parts, digest = _load_dataset(data, task, cfg, params["workers"])

    reports = []
    for value in parsed:
        run_cfg = _SWEEPABLE[param](cfg, value)
        if task == TASK_CLS:
            stored = build_cls_bank(train, run_cfg, class_names=names, workers=params["workers"])
            quality = 100.0 * evaluate_classification(stored, test, run_cfg, params["workers"])
            quality_name = "accuracy_pct"
        else:
            stored = build_seg_bank(train, run_cfg, category_parts=parts, workers=params["workers"])
            quality = 100.0 * evaluate_segmentation(stored, test, run_cfg, params["workers"])
            quality_name = "instance_miou_pct"
        result = benchmark(
            run_cfg, test[: max(1, bench_samples)], repetitions=repetitions, task=task, warmup=2
        )
        metrics = {
            param: value,
            quality_name: quality,
            "gflops": estimate_flops(run_cfg, task=task).gflops,
            "ms_per_sample": result.ms_per_sample,
            "peak_mb": result.peak_mb,
        }
        reports.append(EvalReport.create(metrics, cfg=run_cfg, seed=run_cfg.seed, dataset_digest=digest))
        click.echo(f"{param}={value:g}: {quality_name}={quality:.2f} ms={result.ms_per_sample:.2f}")
    written = emit(reports, out_base, x_metric=param, figure=not no_figure)
    click.echo("wrote " + ", ".join(str(p) for p in written))


def main(argv=None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except NPCloudError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 3
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
