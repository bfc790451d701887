"""Platform: 1-D runner over three platforms separated by gaps, with patrolling
enemies.  Discrete actions run/hop/leap, one continuous parameter each.

Geometry (fixed constants): platforms [0,10], [11.5,21], [22.5,28]; gaps of
width 1.5 open after x=10 and after x=21.  A hop covers at most 3.0, a leap at
most 5.0, so either jump clears a gap if taken near the lip with enough power.
Death: a run that ends inside an enemy's collision radius, any landing in a
gap, or a jump that fails to make the next platform.  Success at x >= 28
within the horizon of 20, which still times out sluggish rhythms; per-step
reward is the position gain /30.

Enemies start at their patrol midpoints; the reset seed only draws their
initial directions, which is the sole stochasticity here.  Collisions are
checked at end-of-step positions and only against run endings, so passing an
enemy means sprinting from behind it to well past it in one step.  The enemy
speed and radius are sized so that steady rhythms which respect the gaps can
cross reliably while careless ones still die.
"""
from __future__ import annotations

import numpy as np

from .base import EnvSpec, HybridEnv, StepResult

PLATFORMS = ((0.0, 10.0), (11.5, 21.0), (22.5, 28.0))
GAPS = ((10.0, 11.5), (21.0, 22.5))
GOAL_X = 28.0
RUN, HOP, LEAP = 0, 1, 2
MOVE_SCALE = (2.0, 3.0, 5.0)
ENEMY_SPEED = 0.05
ENEMY_RADIUS = 0.2
PATROL_HALF = 2.0  # patrol segment length 4
# patrol centers sit at each platform's head: agents meet an enemy early and
# close to its known start, and the rest of the platform is clear for running
PATROL_CENTERS = (2.0, 13.5, 24.5)

SPEC = EnvSpec(env_id="platform", state_dim=9, num_discrete=3,
               param_dims=(1, 1, 1), horizon=20)


def _patrol_segment(plat: int) -> tuple[float, float]:
    center = PATROL_CENTERS[plat]
    return center - PATROL_HALF, center + PATROL_HALF


def _platform_index(x: float) -> int:
    """Index of the platform containing x, or -1 if x is over a gap."""
    for i, (lo, hi) in enumerate(PLATFORMS):
        if lo <= x <= hi:
            return i
    return -1


class PlatformEnv(HybridEnv):
    def __init__(self):
        super().__init__(SPEC)

    def _reset_state(self) -> np.ndarray:
        self._pos = 0.0
        self._disp = 0.0
        self._plat = 0
        self._enemy = np.array([0.5 * sum(_patrol_segment(i)) for i in range(3)])
        # positions are pinned at the midpoints; the seed picks the directions
        self._edir = self._rng.integers(0, 2, size=3) * 2.0 - 1.0
        return self._state()

    def _advance_enemies(self) -> None:
        for i in range(3):
            lo, hi = _patrol_segment(i)
            e = self._enemy[i] + self._edir[i] * ENEMY_SPEED
            if e > hi:
                e = hi - (e - hi)
                self._edir[i] = -1.0
            elif e < lo:
                e = lo + (lo - e)
                self._edir[i] = 1.0
            self._enemy[i] = e

    def _step_inner(self, k: int, x: np.ndarray) -> StepResult:
        p = (float(x[0]) + 1.0) / 2.0
        old = self._pos
        target = old + p * MOVE_SCALE[k]
        dead = False
        success = False
        if k == RUN:
            _, edge = PLATFORMS[self._plat]
            if target >= GOAL_X:
                new = GOAL_X
                success = True
            elif target > edge:
                new = edge  # ran off the lip into the gap
                dead = True
            else:
                new = target
        else:  # hop or leap
            if target >= GOAL_X:
                new = GOAL_X
                success = True
            else:
                new = target
                land = _platform_index(new)
                if land <= self._plat:  # gap (-1) or not past the current one
                    dead = True
                else:
                    self._plat = land
        self._advance_enemies()
        if k == RUN and not dead and not success:
            if abs(new - self._enemy[self._plat]) <= ENEMY_RADIUS:
                dead = True
        self._disp = new - old
        self._pos = new
        reward = (new - old) / 30.0
        return StepResult(self._state(), reward, dead or success, success)

    def _state(self) -> np.ndarray:
        pos, plat = self._pos, self._plat
        if plat < len(GAPS):
            gap_lo, gap_hi = GAPS[plat]
            gap_dist = max(gap_lo - pos, 0.0)
            gap_width = gap_hi - gap_lo
        else:
            gap_dist = GOAL_X - pos
            gap_width = 0.0
        return np.array([
            pos / 30.0,
            self._disp / 5.0,
            (self._enemy[plat] - pos) / 10.0,
            self._edir[plat],
            gap_dist / 30.0,
            gap_width / 3.0,
            (GOAL_X - pos) / 30.0,
            plat / 2.0,
            (self._spec.horizon - self._t) / self._spec.horizon,
        ])
