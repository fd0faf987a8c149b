"""Supervised sample construction, chronological splits, and the
history x horizon RMSE sweep with its CSV/SVG outputs.

Samples are built per segment *after* splitting, so no test window ever
feeds a training sample. One model is trained per grid cell to keep the
two axes independent. The persistence baseline (forecast = last observed
value) is evaluated on exactly the same test samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import lstm
from .errors import DegenerateSplitError, EmptyInputError
from .windows import Window, build_features


@dataclass
class EvalGrid:
    histories: list[int]
    horizons: list[int]
    rmse: np.ndarray            # (len(histories), len(horizons))
    baseline_rmse: np.ndarray
    sample_counts: np.ndarray   # test samples per cell


def make_samples(features, cpu, history: int, horizon: int):
    """Sliding supervised samples over aligned feature/target sequences.

    Sample s has inputs ``features[s : s+history]`` and target
    ``cpu[s + history - 1 + horizon]``; the count is
    ``max(0, T - history - horizon + 1)``.
    """
    features = np.asarray(features, dtype=float)
    cpu = np.asarray(cpu, dtype=float)
    total = len(cpu)
    n = max(0, total - history - horizon + 1)
    if n == 0:
        return np.zeros((0, history, features.shape[1] if features.ndim == 2 else 0)), np.zeros(0)
    x = np.stack([features[s : s + history] for s in range(n)])
    y = cpu[history - 1 + horizon : history - 1 + horizon + n]
    return x, y.copy()


def rmse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if preds.shape != targets.shape:
        raise EmptyInputError(
            f"prediction/target lengths differ: {preds.shape} vs {targets.shape}"
        )
    if preds.size == 0:
        raise EmptyInputError("rmse of zero pairs is undefined")
    return float(np.sqrt(np.mean((preds - targets) ** 2)))


def chrono_split(
    n_windows: int, history: int, horizon: int, train_fraction: float = 0.8
) -> tuple[range, range]:
    """Index ranges of the chronological train/test segments.

    Raises DegenerateSplitError when either segment is too short to yield a
    single (history, horizon) sample.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    split = int(n_windows * train_fraction)
    train, test = range(0, split), range(split, n_windows)
    for segment, name in ((train, "train"), (test, "test")):
        if len(segment) - history - horizon + 1 <= 0:
            raise DegenerateSplitError(history, horizon, name)
    return train, test


def baseline_persistence(
    cpu, history: int, horizon: int, train_fraction: float = 0.8
) -> float:
    """RMSE of forecasting the last observed value, on the test samples."""
    cpu = np.asarray(cpu, dtype=float)
    _, test = chrono_split(len(cpu), history, horizon, train_fraction)
    segment = cpu[test.start : test.stop]
    n = len(segment) - history - horizon + 1
    anchors = segment[history - 1 : history - 1 + n]
    targets = segment[history - 1 + horizon : history - 1 + horizon + n]
    return rmse(anchors, targets)


def split_samples(features, cpu, history, horizon, train_fraction=0.8):
    """Per-segment samples for one grid cell; leakage-free by construction."""
    train, test = chrono_split(len(cpu), history, horizon, train_fraction)
    x_train, y_train = make_samples(
        features[train.start : train.stop], cpu[train.start : train.stop],
        history, horizon,
    )
    x_test, y_test = make_samples(
        features[test.start : test.stop], cpu[test.start : test.stop],
        history, horizon,
    )
    return (x_train, y_train), (x_test, y_test)


def grid_eval(
    windows: Sequence[Window],
    table,
    horizons: Sequence[int],
    histories: Sequence[int],
    train_config: lstm.TrainConfig | None = None,
    train_fraction: float = 0.8,
) -> EvalGrid:
    """Train and score one model per (history, horizon) cell."""
    if train_config is None:
        train_config = lstm.TrainConfig()
    features = build_features(list(windows), table)
    cpu = np.array([w.cpu_util for w in windows])
    shape = (len(histories), len(horizons))
    scores = np.zeros(shape)
    baselines = np.zeros(shape)
    counts = np.zeros(shape, dtype=int)
    for row, history in enumerate(histories):
        for col, horizon in enumerate(horizons):
            (x_tr, y_tr), (x_te, y_te) = split_samples(
                features, cpu, history, horizon, train_fraction
            )
            config = lstm.with_geometry(train_config, history, horizon)
            params, _ = lstm.train(x_tr, y_tr, config)
            preds = lstm.predict_batch(params, x_te)
            scores[row, col] = rmse(preds, y_te)
            baselines[row, col] = baseline_persistence(
                cpu, history, horizon, train_fraction
            )
            counts[row, col] = len(y_te)
    return EvalGrid(
        histories=list(histories),
        horizons=list(horizons),
        rmse=scores,
        baseline_rmse=baselines,
        sample_counts=counts,
    )


def write_grid_csv(grid: EvalGrid, path) -> None:
    lines = ["history,horizon,rmse,baseline_rmse,n"]
    for row, history in enumerate(grid.histories):
        for col, horizon in enumerate(grid.horizons):
            lines.append(
                f"{history},{horizon},{grid.rmse[row, col]:.6f},"
                f"{grid.baseline_rmse[row, col]:.6f},{grid.sample_counts[row, col]}"
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# Fixed palette so reruns are byte-identical.
_SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

_MARGIN_LEFT, _MARGIN_RIGHT = 60.0, 150.0
_MARGIN_TOP, _MARGIN_BOTTOM = 20.0, 45.0
_PLOT_W, _PLOT_H = 440.0, 300.0


def write_grid_svg(grid: EvalGrid, path) -> None:
    """Line chart: x = horizon, y = RMSE, one polyline per history value."""
    width = _MARGIN_LEFT + _PLOT_W + _MARGIN_RIGHT
    height = _MARGIN_TOP + _PLOT_H + _MARGIN_BOTTOM
    x_min, x_max = min(grid.horizons), max(grid.horizons)
    x_span = (x_max - x_min) or 1
    y_max = float(grid.rmse.max()) * 1.1 or 1.0

    def sx(h):
        return _MARGIN_LEFT + (h - x_min) / x_span * _PLOT_W

    def sy(v):
        return _MARGIN_TOP + _PLOT_H * (1.0 - v / y_max)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP + _PLOT_H}" '
        f'x2="{_MARGIN_LEFT + _PLOT_W}" y2="{_MARGIN_TOP + _PLOT_H}" stroke="black"/>',
        f'<line x1="{_MARGIN_LEFT}" y1="{_MARGIN_TOP}" '
        f'x2="{_MARGIN_LEFT}" y2="{_MARGIN_TOP + _PLOT_H}" stroke="black"/>',
    ]
    for horizon in grid.horizons:
        x = sx(horizon)
        parts.append(
            f'<line x1="{x:.2f}" y1="{_MARGIN_TOP + _PLOT_H}" '
            f'x2="{x:.2f}" y2="{_MARGIN_TOP + _PLOT_H + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{_MARGIN_TOP + _PLOT_H + 18:.2f}" '
            f'font-size="11" text-anchor="middle">{horizon}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        value = frac * y_max
        y = sy(value)
        parts.append(
            f'<line x1="{_MARGIN_LEFT - 5}" y1="{y:.2f}" '
            f'x2="{_MARGIN_LEFT}" y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">{value:.3f}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN_LEFT + _PLOT_W / 2:.2f}" '
        f'y="{_MARGIN_TOP + _PLOT_H + 36:.2f}" font-size="12" '
        f'text-anchor="middle">prediction horizon (windows)</text>'
    )
    parts.append(
        f'<text x="14" y="{_MARGIN_TOP + _PLOT_H / 2:.2f}" font-size="12" '
        f'text-anchor="middle" transform="rotate(-90 14 '
        f'{_MARGIN_TOP + _PLOT_H / 2:.2f})">test RMSE</text>'
    )
    for row, history in enumerate(grid.histories):
        color = _SERIES_COLORS[row % len(_SERIES_COLORS)]
        points = " ".join(
            f"{sx(h):.2f},{sy(grid.rmse[row, col]):.2f}"
            for col, h in enumerate(grid.horizons)
        )
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{color}" '
            f'stroke-width="2"/>'
        )
        ly = _MARGIN_TOP + 14 + 18 * row
        lx = _MARGIN_LEFT + _PLOT_W + 16
        parts.append(
            f'<line x1="{lx:.2f}" y1="{ly - 4:.2f}" x2="{lx + 22:.2f}" '
            f'y2="{ly - 4:.2f}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{lx + 28:.2f}" y="{ly:.2f}" font-size="11">'
            f"history={history}</text>"
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def emit_outputs(grid: EvalGrid, out_dir) -> tuple[Path, Path]:
    """Write grid.csv and grid.svg under out_dir; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "grid.csv"
    svg_path = out / "grid.svg"
    write_grid_csv(grid, csv_path)
    write_grid_svg(grid, svg_path)
    return csv_path, svg_path
