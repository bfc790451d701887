"""Optional trajectory dump: CSV with columns (t, s..., k, x..., r, done)."""
from __future__ import annotations

import csv

import numpy as np

from .base import EnvSpec, HybridAction, StepResult


class TrajectoryWriter:
    """Accumulates one episode's transitions and writes them as CSV."""

    def __init__(self, spec: EnvSpec):
        self._spec = spec
        self._rows: list[list] = []
        self._t = 0

    def record(self, state: np.ndarray, action: HybridAction,
               result: StepResult) -> None:
        x = np.zeros(self._spec.max_param_dim)
        x[:len(action.x)] = action.x
        self._rows.append(
            [self._t] + [repr(float(v)) for v in state] + [int(action.k)]
            + [repr(float(v)) for v in x]
            + [repr(float(result.reward)), int(result.done)])
        self._t += 1

    def write(self, path: str) -> None:
        header = (["t"] + [f"s{i}" for i in range(self._spec.state_dim)] + ["k"]
                  + [f"x{i}" for i in range(self._spec.max_param_dim)]
                  + ["r", "done"])
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(self._rows)
