"""CatchPoint: reach and grab a static target with limited catch chances.

Unit square; move(h) steps 0.1 along angle pi*h, catch consumes one of 10
chances and succeeds iff the agent is within 0.1 of the target.  The catch
action has no continuous parameter, so its latent decoding exercises the
zero-width branch of the representation.
"""
from __future__ import annotations

import numpy as np

from .base import EnvSpec, HybridEnv, StepResult

MOVE, CATCH = 0, 1
STEP_LEN = 0.1
CATCH_RADIUS = 0.1
CHANCES = 10
MIN_TARGET_DIST = 0.3
START = (0.5, 0.5)

SPEC = EnvSpec(env_id="catch_point", state_dim=5, num_discrete=2,
               param_dims=(1, 0), horizon=20)


class CatchPointEnv(HybridEnv):
    def __init__(self):
        super().__init__(SPEC)

    def _reset_state(self) -> np.ndarray:
        self._agent = np.array(START)
        while True:
            self._target = self._rng.uniform(0.0, 1.0, size=2)
            if float(np.hypot(*(self._target - self._agent))) >= MIN_TARGET_DIST:
                break
        self._chances = CHANCES
        return self._state()

    def _step_inner(self, k: int, x: np.ndarray) -> StepResult:
        success = False
        failed = False
        if k == MOVE:
            theta = np.pi * float(x[0])
            self._agent = np.clip(
                self._agent + STEP_LEN * np.array([np.cos(theta), np.sin(theta)]),
                0.0, 1.0)
        else:
            self._chances -= 1
            dist_now = float(np.hypot(*(self._agent - self._target)))
            if dist_now <= CATCH_RADIUS:
                success = True
            elif self._chances == 0:
                failed = True
        dist = float(np.hypot(*(self._agent - self._target)))
        reward = -dist + (10.0 if success else 0.0)
        return StepResult(self._state(), reward, success or failed, success)

    def _state(self) -> np.ndarray:
        return np.array([self._agent[0], self._agent[1],
                         self._target[0], self._target[1],
                         self._chances / CHANCES])
