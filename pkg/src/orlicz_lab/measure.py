"""Finite measure spaces and grid functions.

A :class:`MeasureSpace` is a finite family of cells with positive weights;
grid functions are plain float arrays holding one value per cell.
"""
import csv
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MeasureSpace:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size < 1:
            raise ValueError("measure space needs at least one cell")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("cell weights must be finite and positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self):
        return self.weights.size

    @property
    def total(self):
        return float(self.weights.sum())

    @classmethod
    def uniform(cls, n, total=1.0):
        return cls(np.full(n, total / n))

    def grid_function(self, values):
        """Validate ``values`` as a grid function on this space."""
        x = np.asarray(values, dtype=float).reshape(-1)
        if x.size != self.n:
            raise ValueError(f"grid function has {x.size} values, space has {self.n} cells")
        if not np.all(np.isfinite(x)):
            raise ValueError("grid function values must be finite")
        return x

    def ones(self):
        return np.ones(self.n)

    def lift(self, x, factor):
        """Carry a grid function to ``refine(self, factor)`` by repeating values."""
        return np.repeat(self.grid_function(x), factor)

    def to_json(self):
        return [float(v) for v in self.weights]

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, dict):
            obj = obj["weights"]
        return cls(np.asarray(obj, dtype=float))


def coupling(space, y, x):
    """``<y, x> = sum_i y_i x_i mu_i`` (real scalars)."""
    return float(np.dot(space.grid_function(y) * space.weights, space.grid_function(x)))


def l2_norm(space, x):
    x = space.grid_function(x)
    return float(np.sqrt(np.dot(x * x, space.weights)))


def indicator(space, cells):
    """Characteristic function of a set of cells, and the set's measure."""
    idx = np.unique(np.asarray(list(cells), dtype=int))
    if idx.size == 0:
        raise ValueError("indicator needs a nonempty set of cells")
    if idx.min() < 0 or idx.max() >= space.n:
        raise IndexError("cell index out of range")
    x = np.zeros(space.n)
    x[idx] = 1.0
    return x, float(space.weights[idx].sum())


def truncate_below(x, threshold):
    """Keep entries with ``|x_i| >= threshold`` and zero the rest."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) >= threshold, x, 0.0)


def refine(space, factor):
    """Split every cell into ``factor`` equal cells."""
    factor = int(factor)
    if factor < 2:
        raise ValueError("refinement factor must be at least 2")
    return MeasureSpace(np.repeat(space.weights / factor, factor))


def read_csv(path):
    """Read ``cell_index, weight, value`` rows into a space and a grid function."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].strip().lower() == "cell_index":
                continue
            rows.append((int(rec[0]), float(rec[1]), float(rec[2])))
    if not rows:
        raise ValueError(f"{path}: no cells")
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: cell indices must be 0..n-1")
    space = MeasureSpace(np.array([r[1] for r in rows]))
    return space, np.array([r[2] for r in rows])
