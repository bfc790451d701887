"""Central finite-difference gradient checking.

Error metric: for each named entry, max |g_ad - g_fd| over the probed
coordinates divided by the entry's gradient scale max(|g_ad|, |g_fd|, 1e-12).
Normalizing by the entry scale (not per-coordinate) keeps h-sized difference
noise on near-zero coordinates from reading as huge relative error.
"""
from __future__ import annotations

import numpy as np

from .nets import ParameterSet


def finite_diff_check(loss_fn, params: ParameterSet, grads: dict,
                      h: float = 1e-5, samples_per_entry: int | None = None,
                      rng: np.random.Generator | None = None) -> dict:
    """Compare analytic grads against central differences of loss_fn.

    loss_fn() -> float re-evaluates the loss at the current params (which are
    perturbed in place and restored around each probe).  grads maps entry name
    -> analytic gradient array.  samples_per_entry=None probes every
    coordinate; an int probes that many seeded-random coordinates per entry.
    Returns name -> relative error; key "max" holds the worst one.
    """
    if samples_per_entry is not None and rng is None:
        rng = np.random.default_rng(0)
    report: dict[str, float] = {}
    worst = 0.0
    for name in params.names():
        view = params[name].reshape(-1)
        g_ad = np.asarray(grads[name], dtype=np.float64).reshape(-1)
        if g_ad.shape != view.shape:
            raise ValueError(f"{name}: grad shape {g_ad.shape} vs param {view.shape}")
        if samples_per_entry is None or samples_per_entry >= view.size:
            coords = np.arange(view.size)
        else:
            coords = rng.choice(view.size, size=samples_per_entry, replace=False)
        g_fd = np.empty(coords.size, dtype=np.float64)
        for j, c in enumerate(coords):
            orig = view[c]
            view[c] = orig + h
            f_plus = float(loss_fn())
            view[c] = orig - h
            f_minus = float(loss_fn())
            view[c] = orig
            g_fd[j] = (f_plus - f_minus) / (2.0 * h)
        diff = np.abs(g_ad[coords] - g_fd)
        scale = max(np.abs(g_ad[coords]).max(initial=0.0),
                    np.abs(g_fd).max(initial=0.0), 1e-12)
        err = float(diff.max(initial=0.0) / scale)
        report[name] = err
        worst = max(worst, err)
    report["max"] = worst
    return report
