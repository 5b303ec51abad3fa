"""Segmentation accuracy, error statistics, and benchmark report assembly."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

STD_CONVENTION = "sample standard deviation (n-1 divisor)"


def accuracy(pred, truth):
    """Best matching rate between predicted and true labels.

    Maximizes, over injective mappings from predicted to true label values,
    the fraction of agreeing points; solved exactly as an assignment problem
    on the confusion matrix.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.ndim != 1 or truth.ndim != 1:
        raise ValueError("labels must be 1-D")
    if pred.shape[0] != truth.shape[0]:
        raise ValueError(f"length mismatch: {pred.shape[0]} vs {truth.shape[0]}")
    if pred.shape[0] == 0:
        raise ValueError("labels are empty")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    kp = int(pi.max()) + 1
    kt = int(ti.max()) + 1
    size = max(kp, kt)
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (pi, ti), 1)
    rows, cols = linear_sum_assignment(-confusion)
    return float(confusion[rows, cols].sum()) / pred.shape[0]


@dataclass(frozen=True)
class ErrorStats:
    """Max, mean, and sample standard deviation of error rates in [0, 1]."""

    max: float
    mean: float
    std: float


def error_stats(errors):
    """Summarize a nonempty list of error rates; std uses the n-1 divisor."""
    errors = np.asarray(errors, dtype=np.float64)
    if errors.ndim != 1 or errors.size == 0:
        raise ValueError("errors must be a nonempty 1-D sequence")
    if (errors < 0).any() or (errors > 1).any():
        raise ValueError("error rates must lie in [0, 1]")
    std = float(np.std(errors, ddof=1)) if errors.size > 1 else 0.0
    return ErrorStats(max=float(errors.max()), mean=float(errors.mean()), std=std)


def benchmark_report(cells, datasets=None, methods=None):
    """Assemble per-(dataset, method) rows from benchmark cell results.

    `cells` is an iterable of dicts with at least dataset, method, accuracy;
    optional keys (error, wall_time_s, iterations, lam, ...) are carried
    through. Grid positions without a cell are marked absent, never
    zero-filled.
    """
    cells = list(cells)
    by_key = {}
    for cell in cells:
        key = (cell["dataset"], cell["method"])
        if key in by_key:
            raise ValueError(f"duplicate cell for {key}")
        by_key[key] = cell
    if datasets is None:
        datasets = sorted({c["dataset"] for c in cells})
    if methods is None:
        methods = sorted({c["method"] for c in cells})
    rows = []
    for ds in datasets:
        for m in methods:
            cell = by_key.get((ds, m))
            if cell is None:
                rows.append({"dataset": ds, "method": m, "absent": True})
                continue
            row = {"dataset": ds, "method": m, "absent": False}
            row.update({k: v for k, v in cell.items() if k not in ("dataset", "method")})
            acc = row.get("accuracy")
            if acc is not None:
                if not (0.0 <= acc <= 1.0) or not math.isfinite(acc):
                    raise ValueError(f"accuracy out of range for {ds}/{m}: {acc}")
                row["error"] = 1.0 - acc
            rows.append(row)
    return {
        "datasets": list(datasets),
        "methods": list(methods),
        "std_convention": STD_CONVENTION,
        "rows": rows,
    }
