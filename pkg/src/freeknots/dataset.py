"""Discrete data sets: validation, CSV input/output, and the dilution-series
transform used for MBC/MIC estimation."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Invalid or unparseable input data."""


@dataclass(frozen=True)
class DataSet:
    """Data points ``(x_i, f_i)``, ``i = 0..mu+1``, with strictly increasing
    abscissae.

    ``mu`` is the number of inner abscissae, so ``len(self) == mu + 2``.
    """

    abscissae: np.ndarray
    values: np.ndarray

    def __init__(self, abscissae: Sequence[float], values: Sequence[float]):
        x = np.array(abscissae, dtype=float)
        f = np.array(values, dtype=float)
        if x.ndim != 1 or f.ndim != 1:
            raise DataError("abscissae and values must be one-dimensional")
        if x.size != f.size:
            raise DataError(
                f"length mismatch: {x.size} abscissae, {f.size} values")
        if x.size < 2:
            raise DataError("at least 2 data points are required")
        for name, arr in (("abscissa", x), ("value", f)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise DataError(f"non-finite {name} at index {bad[0]}")
        dx = np.diff(x)
        bad = np.flatnonzero(dx <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            if dx[i - 1] == 0:
                raise DataError(f"duplicate abscissa at index {i}")
            raise DataError(f"abscissae not strictly increasing at index {i}")
        x.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "abscissae", x)
        object.__setattr__(self, "values", f)

    @property
    def mu(self) -> int:
        return self.abscissae.size - 2

    @property
    def a(self) -> float:
        return float(self.abscissae[0])

    @property
    def b(self) -> float:
        return float(self.abscissae[-1])

    def __len__(self) -> int:
        return self.abscissae.size

    def __eq__(self, other):
        if not isinstance(other, DataSet):
            return NotImplemented
        return (np.array_equal(self.abscissae, other.abscissae)
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self):
        return f"DataSet(n={len(self)}, x=[{self.a:g}, {self.b:g}])"


@dataclass(frozen=True)
class MedicalSeries:
    """Viability readings for a two-fold dilution series.

    The antibiotic concentration at step ``j`` is ``kappa0 * 2**-j``;
    ``viability_percent[j]`` is the surviving fraction (times 100) after
    exposure to it.
    """

    initial_concentration: float
    viability_percent: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "viability_percent",
                           tuple(float(v) for v in self.viability_percent))
        if not (self.initial_concentration > 0
                and math.isfinite(self.initial_concentration)):
            raise DataError("initial concentration must be positive")

    @property
    def dilution_steps(self) -> int:
        return len(self.viability_percent) - 1

    def concentration(self, step: float) -> float:
        return self.initial_concentration * 2.0 ** (-step)


def medical_to_dataset(series: MedicalSeries) -> DataSet:
    """Map a dilution series onto unit-spaced abscissae ``0, 1, ..., z``."""
    z = series.dilution_steps
    if z < 3:
        raise DataError(
            f"a dilution series needs at least 4 readings (z >= 3), got z={z}")
    return DataSet(np.arange(z + 1, dtype=float), series.viability_percent)


def _parse_float(text: str, row: int, col: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(
            f"row {row}: column {col} is not a number: {text!r}") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}: non-finite number {text!r}")
    return v


def parse_csv(text: str, has_header: bool | None = None) -> DataSet:
    """Parse two-column ``x,f`` CSV text.

    With ``has_header=None`` a first line whose first field is not numeric
    is treated as a header.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and has_header is None:
        try:
            float(rows[0][0])
            has_header = False
        except ValueError:
            has_header = True
    if has_header and rows:
        rows = rows[1:]
    xs, fs = [], []
    for n, r in enumerate(rows, start=2 if has_header else 1):
        if len(r) != 2:
            raise DataError(f"row {n}: expected 2 columns, got {len(r)}")
        xs.append(_parse_float(r[0].strip(), n, 1))
        fs.append(_parse_float(r[1].strip(), n, 2))
    return DataSet(xs, fs)


def load_csv(path, has_header: bool | None = None) -> DataSet:
    text = Path(path).read_text(encoding="utf-8")
    return parse_csv(text, has_header)


def format_float(v: float) -> str:
    return "%.17g" % v


def save_csv(data: DataSet, path, header: bool = True) -> None:
    """Write ``data`` so that :func:`load_csv` recovers it bit for bit."""
    lines = ["x,f"] if header else []
    lines += [f"{format_float(x)},{format_float(f)}"
              for x, f in zip(data.abscissae, data.values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
