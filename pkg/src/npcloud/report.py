"""Metric reports: CSV + JSON emission and figure rendering.

Every run that measures something produces an :class:`EvalReport` carrying
the metric values, a config echo, the seed, and the config/dataset digests
that make deterministic metrics reproducible. Reports are written as a CSV
(one metric per column, one row per report) and a schema-versioned JSON;
the report path also renders a matplotlib figure next to the delimited
output -- line charts against the swept parameter for multi-row reports,
a bar chart of the metrics for single runs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .config import PipelineConfig

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class EvalReport:
    metrics: dict[str, float]
    config: dict = field(default_factory=dict)
    seed: int = 0
    config_digest: str = ""
    dataset_digest: str = ""
    timestamp: str = ""

    @classmethod
    def create(
        cls,
        metrics: dict[str, float],
        cfg: PipelineConfig | None = None,
        seed: int = 0,
        dataset_digest: str = "",
    ) -> "EvalReport":
        return cls(
            metrics=dict(metrics),
            config=asdict(cfg) if cfg is not None else {},
            seed=seed,
            config_digest=cfg.digest() if cfg is not None else "",
            dataset_digest=dataset_digest,
            timestamp=datetime.now(timezone.utc).isoformat(),
        )


def _rows(reports: list[EvalReport]) -> tuple[list[str], list[dict]]:
    metric_names: list[str] = []
    for rep in reports:
        for name in rep.metrics:
            if name not in metric_names:
                metric_names.append(name)
    header = metric_names + ["seed", "config_digest", "dataset_digest", "timestamp"]
    rows = []
    for rep in reports:
        row = {name: rep.metrics.get(name, "") for name in metric_names}
        row.update(
            seed=rep.seed,
            config_digest=rep.config_digest,
            dataset_digest=rep.dataset_digest,
            timestamp=rep.timestamp,
        )
        rows.append(row)
    return header, rows


def write_csv(reports, path) -> Path:
    reports = [reports] if isinstance(reports, EvalReport) else list(reports)
    header, rows = _rows(reports)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_json(reports, path, extra: dict | None = None) -> Path:
    reports = [reports] if isinstance(reports, EvalReport) else list(reports)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "reports": [asdict(r) for r in reports],
    }
    if extra:
        payload.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def render_figure(reports, path, x_metric: str | None = None) -> Path:
    """Render the report(s) to a PNG.

    Multi-row reports plot each remaining metric against ``x_metric`` (the
    swept parameter, defaulting to the first metric column); a single
    report becomes a horizontal bar chart of its metrics.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    reports = [reports] if isinstance(reports, EvalReport) else list(reports)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    if len(reports) > 1:
        names = list(reports[0].metrics)
        x_name = x_metric or names[0]
        y_names = [n for n in names if n != x_name]
        xs = [r.metrics[x_name] for r in reports]
        fig, axes = plt.subplots(
            1, max(1, len(y_names)), figsize=(3.2 * max(1, len(y_names)), 3.0), squeeze=False
        )
        for ax, name in zip(axes[0], y_names):
            ax.plot(xs, [r.metrics.get(name, float("nan")) for r in reports], marker="o")
            ax.set_xlabel(x_name)
            ax.set_ylabel(name)
            ax.grid(True, alpha=0.4)
        fig.tight_layout()
    else:
        metrics = reports[0].metrics
        fig, ax = plt.subplots(figsize=(5.0, 0.6 + 0.5 * len(metrics)))
        names = list(metrics)
        ax.barh(range(len(names)), [metrics[n] for n in names])
        ax.set_yticks(range(len(names)), names)
        for i, name in enumerate(names):
            ax.annotate(f"{metrics[name]:.4g}", (metrics[name], i), va="center", fontsize=8)
        ax.set_xlabel("value")
        fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def emit(reports, base_path, x_metric: str | None = None, figure: bool = True) -> list[Path]:
    """Write CSV + JSON (+ PNG) for a report or report list; ``base_path``
    is extended with .csv/.json/.png."""
    base = Path(base_path)
    written = [
        write_csv(reports, base.with_suffix(".csv")),
        write_json(reports, base.with_suffix(".json")),
    ]
    if figure:
        written.append(render_figure(reports, base.with_suffix(".png"), x_metric=x_metric))
    return written
