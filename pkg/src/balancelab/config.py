"""Experiment configuration: flat dotted-key text files over typed defaults.

Format: one `section.key = value` per line, `#` comments, blank lines ignored.
Unknown keys are hard errors so a misspelled override fails loudly instead of
silently running the defaults.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .control import ControlSchedule, PdGains
from .ddpg import Hyperparams
from .env import BalanceEnv, EpisodeConfig, TrainPushConfig
from .model import BipedModel, ContactParams, build_default_model
from .reward import RewardConfig


class ConfigError(ValueError):
    """Bad config file: unknown key, bad literal, or violated constraint."""


def _floats(text: str):
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _ints(text: str):
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


# key -> (converter, default)
SCHEMA = {
    "model.foot_thickness": (float, 0.08),
    "model.mu": (float, 1.0),
    "model.torque_limit": (float, 500.0),
    "model.contact_normal_stiffness": (float, 3e5),
    "model.contact_normal_damping": (float, 1e3),
    "model.contact_tangential_stiffness": (float, 3e5),
    "model.contact_tangential_damping": (float, 1e3),

    "control.physics_hz": (int, 1000),
    "control.llc_hz": (int, 1000),
    "control.hlc_hz": (int, 25),
    "control.feedback_cutoff_hz": (float, 50.0),
    "control.kp_ankle": (float, 3160.0),
    "control.kp_knee": (float, 2580.0),
    "control.kp_hip": (float, 1080.0),
    "control.kp_waist": (float, 720.0),
    "control.kd_ankle": (float, 300.0),
    "control.kd_knee": (float, 150.0),
    "control.kd_hip": (float, 70.0),
    "control.kd_waist": (float, 60.0),

    "reward.epsilon": (float, 1e-5),
    "reward.theta_max": (float, math.pi / 4.0),
    "reward.pendulum_length": (float, 1.086),
    "reward.w_phi_torso": (float, 1.0),
    "reward.w_phi_pelvis": (float, 1.0),
    "reward.w_x_com": (float, 1.0),
    "reward.w_z_com": (float, 5.0),
    "reward.w_xd_com": (float, 1.0),
    "reward.w_zd_com": (float, 1.0),

    "ddpg.gamma": (float, 0.99),
    "ddpg.tau": (float, 1e-3),
    "ddpg.batch_size": (int, 64),
    "ddpg.buffer_capacity": (int, 1_000_000),
    "ddpg.actor_lr": (float, 1e-4),
    "ddpg.critic_lr": (float, 1e-3),
    "ddpg.actor_optimizer": (str, "sgd"),
    "ddpg.critic_optimizer": (str, "sgd"),
    "ddpg.noise_theta": (float, 0.15),
    "ddpg.noise_sigma": (float, 0.2),
    "ddpg.noise_final_scale": (float, 0.2),
    "ddpg.episodes": (int, 300),
    "ddpg.warmup_steps": (int, 1000),

    "episode.max_time": (float, 30.0),
    "episode.fall_pelvis_height": (float, 0.7),
    "episode.fall_torso_angle": (float, 1.0),
    "episode.init_joint_noise": (float, 0.02),
    "episode.settle_time": (float, 2.0),

    "push.direction": (str, "forward"),
    "push.magnitude": (float, 300.0),
    "push.duration": (float, 0.1),
    "push.onset": (float, 2.0),

    "train.push_prob": (float, 0.5),
    "train.push_min_force": (float, 100.0),
    "train.push_max_force": (float, 400.0),
    "train.push_min_time": (float, 2.0),
    "train.push_max_time": (float, 20.0),

    "sweep.magnitudes": (_floats, (100.0, 200.0, 300.0, 400.0, 500.0)),
    "experiment.seeds": (_ints, (0,)),
    "experiment.rollouts": (int, 10),
    "experiment.workers": (int, 0),  # 0 = one per sweep point, capped by CPUs
}


@dataclass
class ExperimentConfig:
    """Typed view over the flat key-value map."""

    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {k: default for k, (_, default) in SCHEMA.items()}
        merged.update(self.values)
        self.values = merged
        self._validate()

    def _validate(self):
        v = self.values
        if v["push.duration"] <= 0.0:
            raise ConfigError("push.duration must be positive")
        if v["episode.settle_time"] < 2.0:
            raise ConfigError("episode.settle_time must be >= 2 s")
        if v["push.onset"] < v["episode.settle_time"]:
            raise ConfigError("push.onset must come after the settling period")
        if v["push.direction"] not in ("forward", "backward"):
            raise ConfigError(
                f"push.direction must be forward|backward, got {v['push.direction']!r}")
        for key in ("ddpg.actor_optimizer", "ddpg.critic_optimizer"):
            if v[key] not in ("sgd", "adam"):
                raise ConfigError(f"{key} must be sgd|adam, got {v[key]!r}")
        if any(m <= 0 for m in v["sweep.magnitudes"]):
            raise ConfigError("sweep.magnitudes must be positive")

    def __getitem__(self, key: str):
        return self.values[key]

    def raw(self) -> dict:
        return dict(self.values)

    # builders -------------------------------------------------------------
    def build_model(self) -> BipedModel:
        v = self.values
        return build_default_model(
            foot_thickness=v["model.foot_thickness"],
            mu=v["model.mu"],
            torque_limit=v["model.torque_limit"],
            contact=ContactParams(
                v["model.contact_normal_stiffness"],
                v["model.contact_normal_damping"],
                v["model.contact_tangential_stiffness"],
                v["model.contact_tangential_damping"]))

    def build_schedule(self) -> ControlSchedule:
        v = self.values
        return ControlSchedule(v["control.physics_hz"], v["control.llc_hz"],
                               v["control.hlc_hz"], v["control.feedback_cutoff_hz"])

    def build_gains(self) -> PdGains:
        v = self.values
        return PdGains(
            kp=(v["control.kp_ankle"], v["control.kp_knee"],
                v["control.kp_hip"], v["control.kp_waist"]),
            kd=(v["control.kd_ankle"], v["control.kd_knee"],
                v["control.kd_hip"], v["control.kd_waist"]))

    def build_reward(self) -> RewardConfig:
        v = self.values
        return RewardConfig(
            weights=(v["reward.w_phi_torso"], v["reward.w_phi_pelvis"],
                     v["reward.w_x_com"], v["reward.w_z_com"],
                     v["reward.w_xd_com"], v["reward.w_zd_com"]),
            epsilon=v["reward.epsilon"],
            theta_max=v["reward.theta_max"],
            pendulum_length=v["reward.pendulum_length"])

    def build_hyperparams(self) -> Hyperparams:
        v = self.values
        cap = int(round(v["episode.max_time"] * v["control.hlc_hz"]))
        return Hyperparams(
            gamma=v["ddpg.gamma"], tau=v["ddpg.tau"],
            batch_size=v["ddpg.batch_size"],
            buffer_capacity=v["ddpg.buffer_capacity"],
            actor_lr=v["ddpg.actor_lr"], critic_lr=v["ddpg.critic_lr"],
            actor_optimizer=v["ddpg.actor_optimizer"],
            critic_optimizer=v["ddpg.critic_optimizer"],
            noise_theta=v["ddpg.noise_theta"], noise_sigma=v["ddpg.noise_sigma"],
            noise_final_scale=v["ddpg.noise_final_scale"],
            episodes=v["ddpg.episodes"], episode_cap=cap,
            warmup_steps=v["ddpg.warmup_steps"])

    def build_episode(self) -> EpisodeConfig:
        v = self.values
        return EpisodeConfig(
            max_time=v["episode.max_time"],
            fall_pelvis_height=v["episode.fall_pelvis_height"],
            fall_torso_angle=v["episode.fall_torso_angle"],
            init_joint_noise=v["episode.init_joint_noise"])

    def build_train_push(self) -> TrainPushConfig:
        v = self.values
        return TrainPushConfig(
            prob=v["train.push_prob"],
            min_force=v["train.push_min_force"],
            max_force=v["train.push_max_force"],
            duration=v["push.duration"],
            min_time=v["train.push_min_time"],
            max_time=v["train.push_max_time"])

    def make_env(self, training: bool = False) -> BalanceEnv:
        return BalanceEnv(
            model=self.build_model(),
            gains=self.build_gains(),
            schedule=self.build_schedule(),
            reward_cfg=self.build_reward(),
            episode=self.build_episode(),
            train_push=self.build_train_push() if training else None)

    def signed_push_force(self, magnitude: float | None = None) -> float:
        mag = self.values["push.magnitude"] if magnitude is None else magnitude
        return mag if self.values["push.direction"] == "forward" else -mag


def parse_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
        conv = SCHEMA[key][0]
        try:
            values[key] = conv(val)
        except ValueError as e:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {e}") from e
    return ExperimentConfig(values)


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config_text(text, source=path)
