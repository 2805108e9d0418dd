"""Low-level control: per-joint PD with filtered feedback, rate schedule.

The PD loop runs at the LLC rate on feedback passed through 50 Hz Butterworth
filters (never raw state).  The position path uses the 2nd-order filter; the
velocity path uses the 1st-order one because the extra phase lag of a biquad at
the contact-mode frequencies destabilizes the explicit 1 kHz loop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .dynamics import (BipedState, ContactState, ExternalPush, NonFiniteError,
                       _dyn_args)
from .filters import LowPassFilter
from .model import BipedModel

# Table order follows the model joints: ankle, knee, hip, waist.
DEFAULT_KP = (3160.0, 2580.0, 1080.0, 720.0)   # N*m/rad
DEFAULT_KD = (300.0, 150.0, 70.0, 60.0)        # N*m*s/rad


@dataclass
class PdGains:
    kp: tuple = DEFAULT_KP
    kd: tuple = DEFAULT_KD

    def __post_init__(self):
        if len(self.kp) != 4 or len(self.kd) != 4:
            raise ValueError("gains must cover exactly 4 joints")
        if any(g <= 0 for g in self.kp) or any(g <= 0 for g in self.kd):
            raise ValueError("gains must be positive")


@dataclass
class ControlSchedule:
    physics_hz: int = 1000
    llc_hz: int = 1000
    hlc_hz: int = 25
    feedback_cutoff_hz: float = 50.0

    def __post_init__(self):
        if not self.physics_hz >= self.llc_hz >= self.hlc_hz > 0:
            raise ValueError("rates must satisfy physics >= llc >= hlc > 0")
        if self.physics_hz % self.llc_hz or self.llc_hz % self.hlc_hz:
            raise ValueError("rates must be integer multiples")

    @property
    def dt(self) -> float:
        return 1.0 / self.physics_hz

    @property
    def steps_per_llc(self) -> int:
        return self.physics_hz // self.llc_hz

    @property
    def steps_per_hlc(self) -> int:
        return self.physics_hz // self.hlc_hz


def pd_torque(gains: PdGains, target, q_filtered, qd_filtered,
              torque_limits) -> np.ndarray:
    """u = Kp (target - q) - Kd qd, clamped to the actuator limits last."""
    u = (np.asarray(gains.kp) * (np.asarray(target) - np.asarray(q_filtered))
         - np.asarray(gains.kd) * np.asarray(qd_filtered))
    return np.clip(u, -np.asarray(torque_limits), np.asarray(torque_limits))


class LowLevelController:
    """PD stack with its feedback filter bank; one per simulator instance."""

    def __init__(self, model: BipedModel, gains: PdGains | None = None,
                 schedule: ControlSchedule | None = None):
        self.model = model
        self.gains = gains if gains is not None else PdGains()
        self.schedule = schedule if schedule is not None else ControlSchedule()
        self._kp = np.asarray(self.gains.kp, dtype=float)
        self._kd = np.asarray(self.gains.kd, dtype=float)

        fc = self.schedule.feedback_cutoff_hz
        fs = float(self.schedule.llc_hz)
        pos_proto = LowPassFilter(fc, fs, 2)
        vel_proto = LowPassFilter(fc, fs, 1)
        self._pos_coef = np.tile(
            np.array([pos_proto._gain[0], pos_proto._d1[0], pos_proto._d2[0]]),
            (4, 1))
        self._vel_coef = np.tile(
            np.array([vel_proto._fo["g"], vel_proto._fo["d"]]), (4, 1))
        self._pos_state = np.zeros((4, 2))
        self._vel_state = np.zeros(4)

    def reset(self, state: BipedState):
        """Prime the feedback filters with the current measurements."""
        for j in range(4):
            w = state.q[3 + j] / (1.0 - self._pos_coef[j, 1] - self._pos_coef[j, 2])
            self._pos_state[j, 0] = w
            self._pos_state[j, 1] = w
            self._vel_state[j] = state.qd[3 + j] / (1.0 - self._vel_coef[j, 1])

    def filtered_feedback(self, state: BipedState):
        """Peek at the filter outputs for `state` without advancing them."""
        q = np.empty(4)
        qd = np.empty(4)
        for j in range(4):
            coef, st = self._pos_coef[j], self._pos_state[j]
            w0 = coef[1] * st[0] + coef[2] * st[1] + state.q[3 + j]
            q[j] = coef[0] * (w0 + 2.0 * st[0] + st[1])
            w0 = self._vel_coef[j, 1] * self._vel_state[j] + state.qd[3 + j]
            qd[j] = self._vel_coef[j, 0] * (w0 + self._vel_state[j])
        return q, qd

    def run_llc_window(self, state: BipedState, theta_target, n_steps: int,
                       push: ExternalPush | None = None,
                       log: np.ndarray | None = None) -> BipedState:
        """Hold `theta_target` for n_steps of filtered PD + physics.

        `log` (n_steps, 18) collects the per-step rollout row documented in
        `_core.llc_window_core`.  Raises NonFiniteError on divergence.
        """
        if n_steps == 0:
            return state
        if log is None:
            log = np.empty((0, 18))
        pf, ps, pdur = 0.0, 0.0, 0.0
        if push is not None:
            pf, ps, pdur = push.force, push.start, push.duration
        target = np.asarray(theta_target, dtype=float)
        q, qd, t, contact, ok, steps_done = _core.llc_window_core(
            state.q, state.qd, state.t, state.contacts.as_array(),
            target, self._kp, self._kd,
            self._pos_coef, self._pos_state, self._vel_coef, self._vel_state,
            pf, ps, pdur, n_steps, self.schedule.steps_per_llc, log,
            self.model.total_mass, *_dyn_args(self.model), self.schedule.dt)
        self.last_steps_done = steps_done
        if not ok:
            raise NonFiniteError(f"dynamics diverged at t={t:.4f}s")
        return BipedState(q, qd, t, ContactState.from_array(contact))
