"""Diagonal-Gaussian utilities (plain numpy; differentiable versions live on Tape)."""
from __future__ import annotations

import numpy as np

LOG_STD_MIN = -4.0
LOG_STD_MAX = 15.0


def reparam_sample(mu: np.ndarray, log_std: np.ndarray,
                   noise: np.ndarray) -> np.ndarray:
    """z = mu + exp(log_std) * noise with caller-supplied standard-normal noise."""
    return mu + np.exp(log_std) * noise


def kl_std_normal(mu: np.ndarray, log_std: np.ndarray) -> np.ndarray:
    """Closed-form KL(N(mu, diag exp(log_std)^2) || N(0, I)), summed over the
    last axis: 0.5 * sum(exp(2*log_std) + mu^2 - 1 - 2*log_std)."""
    return 0.5 * np.sum(np.exp(2.0 * log_std) + mu * mu - 1.0 - 2.0 * log_std,
                        axis=-1)
