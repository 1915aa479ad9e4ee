"""Experiment reports: sample rows, fitted constants and verdicts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..io import rows_to_csv, write_json


@dataclass
class ExperimentReport:
    name: str
    columns: list
    rows: list = field(default_factory=list)
    fitted: dict = field(default_factory=dict)
    slopes: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(v) for v in self.verdicts.values())

    def add(self, **row) -> None:
        self.rows.append(row)

    def to_csv(self) -> str:
        return rows_to_csv(self.rows, self.columns)

    def summary(self) -> dict:
        return {
            "experiment": self.name,
            "verdict": "pass" if self.passed else "fail",
            "verdicts": {k: bool(v) for k, v in self.verdicts.items()},
            "fitted_constants": _clean(self.fitted),
            "slopes": _clean(self.slopes),
            "residuals": _clean(self.residuals),
            "diagnostics": _clean(self.diagnostics),
        }

    def write(self, path) -> list:
        """CSV rows at ``path`` plus a ``.summary.json`` next to it; a ``.json``
        path gets a single JSON document with the rows included."""
        path = Path(path)
        if path.suffix.lower() == ".json":
            doc = self.summary()
            doc["columns"] = list(self.columns)
            doc["rows"] = [{k: _clean(r.get(k)) for k in self.columns} for r in self.rows]
            write_json(path, doc)
            return [path]
        path.write_text(self.to_csv())
        side = path.with_suffix(".summary.json")
        write_json(side, self.summary())
        return [path, side]


def _clean(v):
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def fit_split(x, ratio):
    """One constant for a family, fitted at coarse scales and tested at fine ones.

    ``C`` is the largest ratio among samples with ``x`` at or above the
    geometric midpoint of the ``x`` range; ``holds`` says whether every sample
    below the midpoint also satisfies ``ratio <= C``.  Returns
    ``(C, fit_mask, holds)``.
    """
    x = np.asarray(x, dtype=np.float64)
    ratio = np.asarray(ratio, dtype=np.float64)
    pos = x > 0
    if not pos.any():
        return 0.0, np.zeros(len(x), dtype=bool), True
    mid = math.sqrt(float(x[pos].min()) * float(x[pos].max()))
    fit = x >= mid
    C = float(ratio[fit].max())
    holds = bool(np.all(ratio[~fit] <= C * (1 + 1e-12)))
    return C, fit, holds


def loglog_slope(x, y) -> tuple[float, float, float]:
    """Least-squares ``log y = s log x + b``; returns ``(s, b, rms residual)``."""
    lx = np.log(np.asarray(x, dtype=np.float64))
    ly = np.log(np.asarray(y, dtype=np.float64))
    s, b = np.polyfit(lx, ly, 1)
    res = float(np.sqrt(np.mean((ly - (s * lx + b)) ** 2)))
    return float(s), float(b), res


def envelope_slope(x, y) -> tuple[float, float, float, int]:
    """Slope of the upper envelope: the largest ``y`` in each dyadic ``x`` bin.

    Returns ``(slope, intercept, residual, number of bins)``.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    keep = (x > 0) & (y > 0)
    x, y = x[keep], y[keep]
    bins = np.floor(np.log2(x)).astype(int)
    xs, ys = [], []
    for b in np.unique(bins):
        sel = bins == b
        j = np.argmax(y[sel])
        xs.append(x[sel][j])
        ys.append(y[sel][j])
    if len(xs) < 2:
        return math.nan, math.nan, math.nan, len(xs)
    s, c, r = loglog_slope(xs, ys)
    return s, c, r, len(xs)
