"""Episode-level environments stepped at the policy (HLC) rate.

BalanceEnv wraps the biped: each step holds the commanded joint targets through
one LLC window, then scores the physics-grounded reward.  Episodes terminate
only on falls (low pelvis or excessive torso pitch); the time cap is handled by
the caller so timeout transitions still bootstrap.  PointMassEnv is the tiny
1-D sanity task used to smoke-test the learner end to end.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import observation as obs_mod
from .control import ControlSchedule, LowLevelController, PdGains
from .dynamics import ExternalPush, NonFiniteError, com_state, kinematics, nominal_state
from .model import BipedModel, build_default_model
from .reward import RewardBreakdown, RewardConfig, compute_reward


@dataclass
class EpisodeConfig:
    max_time: float = 30.0          # s, cap; reaching it is not a fall
    fall_pelvis_height: float = 0.7  # m
    fall_torso_angle: float = 1.0    # rad
    init_joint_noise: float = 0.02   # rad, uniform reset perturbation


@dataclass
class TrainPushConfig:
    """Random pelvis pulses injected during training episodes."""

    prob: float = 0.0        # per-episode probability of scheduling a pulse
    min_force: float = 100.0  # N, magnitude; direction is random
    max_force: float = 400.0
    duration: float = 0.1    # s
    min_time: float = 2.0    # s after episode start
    max_time: float = 20.0


class BalanceEnv:
    """Biped quiet-standing / push-recovery task at HLC granularity."""

    def __init__(self, model: BipedModel | None = None,
                 gains: PdGains | None = None,
                 schedule: ControlSchedule | None = None,
                 reward_cfg: RewardConfig | None = None,
                 episode: EpisodeConfig | None = None,
                 train_push: TrainPushConfig | None = None,
                 recorder=None):
        self.model = model if model is not None else build_default_model()
        self.schedule = schedule if schedule is not None else ControlSchedule()
        self.llc = LowLevelController(self.model, gains, self.schedule)
        self.reward_cfg = reward_cfg if reward_cfg is not None else RewardConfig()
        self.episode = episode if episode is not None else EpisodeConfig()
        self.train_push = train_push
        self.recorder = recorder  # optional RolloutRecorder, LLC-rate logging

        self.state_dim = obs_mod.observation_dim()
        self.action_dim = 4
        self.action_low = self.model.angle_lo.copy()
        self.action_high = self.model.angle_hi.copy()
        self.home_pose = np.zeros(4)

        self._bank = obs_mod.make_filter_bank(float(self.schedule.hlc_hz))
        self._state = None
        self._pushes: list[ExternalPush] = []

    @property
    def max_steps(self) -> int:
        return int(round(self.episode.max_time * self.schedule.hlc_hz))

    @property
    def dt(self) -> float:
        return 1.0 / self.schedule.hlc_hz

    @property
    def sim_state(self):
        return self._state

    def reset(self, rng: np.random.Generator,
              pushes: list[ExternalPush] | None = None) -> np.ndarray:
        """Nominal pose with a small random joint perturbation."""
        st = nominal_state(self.model)
        noise = self.episode.init_joint_noise
        if noise > 0.0:
            st.q[3:] += rng.uniform(-noise, noise, size=4)
        self._state = st
        self._pushes = list(pushes) if pushes is not None else []
        if pushes is None and self.train_push is not None \
                and rng.random() < self.train_push.prob:
            tp = self.train_push
            force = rng.uniform(tp.min_force, tp.max_force)
            if rng.random() < 0.5:
                force = -force
            start = rng.uniform(tp.min_time, tp.max_time)
            self._pushes = [ExternalPush(force, start, tp.duration)]
        self.llc.reset(st)
        self._bank.reset()
        return obs_mod.observe(self.model, st, self._bank)

    def _active_push(self, t0: float, t1: float) -> ExternalPush | None:
        for p in self._pushes:
            if t0 < p.start + p.duration and p.start < t1:
                return p
        return None

    def step(self, action) -> tuple:
        """Hold the joint targets for one HLC period.

        Returns (obs, reward, terminal, info); terminal marks falls only.
        """
        target = np.clip(np.asarray(action, dtype=float),
                         self.action_low, self.action_high)
        st = self._state
        push = self._active_push(st.t, st.t + self.dt)
        log = None
        if self.recorder is not None:
            log = self.recorder.window(self.schedule.steps_per_hlc)
        try:
            st = self.llc.run_llc_window(st, target,
                                         self.schedule.steps_per_hlc, push,
                                         log=log)
        except NonFiniteError:
            # integration blow-up: terminate with zero reward for the step
            if self.recorder is not None:
                self.recorder.commit(self.llc.last_steps_done, None)
            o = np.concatenate([np.zeros(self.state_dim - 2), [0.0, 0.0]])
            info = {"fell": True, "blown_up": True, "breakdown": None}
            return o, 0.0, True, info
        self._state = st

        kin = kinematics(self.model, st.q, st.qd)
        x, z, xd, zd = com_state(self.model, st)
        br = self._reward(kin, x, z, xd, zd)
        if self.recorder is not None:
            self.recorder.commit(self.llc.last_steps_done, br)
        fell = (kin.coms[obs_mod.PELVIS, 1] < self.episode.fall_pelvis_height
                or abs(kin.theta[obs_mod.TORSO]) > self.episode.fall_torso_angle)
        o = obs_mod.observe(self.model, st, self._bank)
        info = {"fell": fell, "blown_up": False, "breakdown": br,
                "com": (x, z, xd, zd), "t": st.t}
        return o, br.total, fell, info

    def _reward(self, kin, x, z, xd, zd) -> RewardBreakdown:
        cfg = self.reward_cfg
        c, s = np.cos(self._state.q[2]), np.sin(self._state.q[2])
        mid = 0.5 * (self.model.heel_x + self.model.toe_x)
        foot_center_x = (self._state.q[0] + mid * c
                         + self.model.foot_thickness * s)
        return compute_reward(
            cfg,
            phi_torso=kin.theta[obs_mod.TORSO],
            phi_pelvis=kin.theta[obs_mod.PELVIS],
            x_com=x - foot_center_x,
            z_com=z,
            xd_com=xd,
            zd_com=zd,
        )


class PointMassEnv:
    """1-D double integrator: drive the mass to the origin and keep it there.

    Reward is exp(-x^2 - 0.1 v^2): near 1 per step parked at the origin, small
    at the starting positions, so a do-nothing policy scores poorly.  Episodes
    never terminate early.
    """

    state_dim = 2
    action_dim = 1

    def __init__(self, dt: float = 0.05, max_steps: int = 100):
        self.dt = dt
        self.max_steps = max_steps
        self.action_low = np.array([-1.0])
        self.action_high = np.array([1.0])
        self._x = 0.0
        self._v = 0.0

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._x = rng.uniform(1.0, 2.0) * (1.0 if rng.random() < 0.5 else -1.0)
        self._v = 0.0
        return np.array([self._x, self._v])

    def step(self, action) -> tuple:
        u = float(np.clip(np.asarray(action, dtype=float),
                          self.action_low, self.action_high)[0])
        self._v += self.dt * u
        self._x += self.dt * self._v
        r = float(np.exp(-(self._x**2 + 0.1 * self._v**2)))
        return np.array([self._x, self._v]), r, False, {}
