"""Goal and HardGoal: dribble then beat a tracking keeper on a 2-D half-field.

Field [0,20] x [-10,10]; goal mouth at x=20, y in [-3,3]; keeper half-width
1.2 starts at a seeded uniform y in [-2,2] and slides along the mouth at
0.6/step toward the shot's projected crossing point (pre-shot: toward the
ball's y).  kick-to(x,y) carries agent and ball up
to 3.0 per step toward the mapped point; shots fly straight at 4.0/step and
resolve when they reach x=20: covered -> terminal 0, uncovered -> +1 success.
Non-terminal steps pay -dist(ball, nearest goal point)/24.  While a shot is in
flight the agent's inputs have no effect.  HardGoal replaces the two half-mouth
shots with ten fixed 0.6-wide slots.
"""
from __future__ import annotations

import numpy as np

from .base import EnvSpec, HybridEnv, StepResult

FIELD_X = 20.0
FIELD_Y = 10.0
GOAL_HALF = 3.0
KEEPER_HALF = 1.2
KEEPER_SPEED = 0.6
KICK_SPEED = 3.0
SHOT_SPEED = 4.0
D0 = 24.0
START = (8.0, 0.0)
HORIZON = 50


def goal_spec(hard: bool) -> EnvSpec:
    if hard:
        return EnvSpec(env_id="hard_goal", state_dim=14, num_discrete=11,
                       param_dims=(2,) + (1,) * 10, horizon=HORIZON)
    return EnvSpec(env_id="goal", state_dim=14, num_discrete=3,
                   param_dims=(2, 1, 1), horizon=HORIZON)


class GoalEnv(HybridEnv):
    def __init__(self, hard: bool = False):
        super().__init__(goal_spec(hard))
        self._hard = hard

    def _reset_state(self) -> np.ndarray:
        self._agent = np.array(START)
        self._ball = np.array(START)
        self._bvel = np.zeros(2)
        # the keeper's starting spot is the episode's only random draw
        self._keeper_y = float(self._rng.uniform(-2.0, 2.0))
        self._keeper_vy = 0.0
        self._possession = True
        self._shot_target_y = 0.0
        return self._state()

    def _shot_target(self, k: int, h: float) -> float:
        u = (h + 1.0) / 2.0
        if self._hard:
            return -3.0 + 0.6 * (k - 1) + 0.6 * u
        if k == 1:  # left half of the mouth
            return -3.0 + 3.0 * u
        return 0.0 + 3.0 * u

    def _keeper_track(self) -> None:
        if self._possession:
            want = self._ball[1]
        else:
            want = self._shot_target_y  # straight shots cross at their target
        want = float(np.clip(want, -GOAL_HALF, GOAL_HALF))
        dy = float(np.clip(want - self._keeper_y, -KEEPER_SPEED, KEEPER_SPEED))
        self._keeper_y += dy
        self._keeper_vy = dy

    def _shaping(self) -> float:
        yc = float(np.clip(self._ball[1], -GOAL_HALF, GOAL_HALF))
        dist = float(np.hypot(FIELD_X - self._ball[0], self._ball[1] - yc))
        return -dist / D0

    def _fly(self) -> StepResult:
        """Advance an in-flight ball one step, resolving at the goal line."""
        self._keeper_track()
        to_goal = np.array([FIELD_X, self._shot_target_y]) - self._ball
        dist = float(np.hypot(*to_goal))
        if dist <= SHOT_SPEED:
            self._ball = np.array([FIELD_X, self._shot_target_y])
            self._bvel = to_goal * (SHOT_SPEED / max(dist, 1e-12))
            covered = abs(self._shot_target_y - self._keeper_y) <= KEEPER_HALF
            if covered:
                return StepResult(self._state(), 0.0, True, False)
            return StepResult(self._state(), 1.0, True, True)
        self._ball = self._ball + to_goal * (SHOT_SPEED / dist)
        self._bvel = to_goal * (SHOT_SPEED / dist)
        if abs(self._ball[1]) > FIELD_Y or not 0.0 <= self._ball[0] <= FIELD_X:
            return StepResult(self._state(), 0.0, True, False)
        return StepResult(self._state(), self._shaping(), False, False)

    def _step_inner(self, k: int, x: np.ndarray) -> StepResult:
        if not self._possession:
            return self._fly()
        if k == 0:  # kick-to: carry the ball toward the mapped field point
            tx = (float(x[0]) + 1.0) * FIELD_X / 2.0
            ty = float(x[1]) * FIELD_Y
            to_tgt = np.array([tx, ty]) - self._ball
            dist = float(np.hypot(*to_tgt))
            move = to_tgt if dist <= KICK_SPEED else to_tgt * (KICK_SPEED / dist)
            self._ball = self._ball + move
            self._agent = self._ball.copy()
            self._bvel = move
            self._keeper_track()
            return StepResult(self._state(), self._shaping(), False, False)
        # shoot: fix the crossing point, release possession, first flight step
        self._shot_target_y = self._shot_target(k, float(x[0]))
        self._possession = False
        return self._fly()

    def _state(self) -> np.ndarray:
        bx, by = self._ball
        return np.array([
            self._agent[0] / FIELD_X,
            self._agent[1] / FIELD_Y,
            bx / FIELD_X,
            by / FIELD_Y,
            self._bvel[0] / SHOT_SPEED,
            self._bvel[1] / SHOT_SPEED,
            self._keeper_y / GOAL_HALF,
            self._keeper_vy / KEEPER_SPEED,
            (FIELD_X - bx) / D0,
            (0.0 - by) / D0,
            (FIELD_X - bx) / D0,
            (self._keeper_y - by) / D0,
            1.0 if self._possession else 0.0,
            (self._spec.horizon - self._t) / self._spec.horizon,
        ])
