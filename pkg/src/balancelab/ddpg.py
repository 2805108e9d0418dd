"""Off-policy actor-critic trainer: replay buffer, target networks, soft
updates, temporally correlated exploration noise, and inverting-gradient
action bounding.

The training loop is single-threaded and fully reproducible per seed; the
per-episode log rows are (episode, steps, return, critic_loss_mean,
exploration_scale).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .nets import (ActorNet, CriticNet, assign_params, clone_params,
                   make_optimizer)

CHECKPOINT_MAGIC = "balancelab-ckpt-1"


class NonFiniteLossError(RuntimeError):
    """Critic loss went NaN/Inf: training halted; message carries diagnostics."""


class CheckpointCorrupt(RuntimeError):
    """Checkpoint file is missing, truncated, or not ours."""


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s2: np.ndarray
    terminal: bool


@dataclass
class Hyperparams:
    gamma: float = 0.99
    tau: float = 1e-3
    batch_size: int = 64
    buffer_capacity: int = 1_000_000
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    actor_optimizer: str = "sgd"   # adam defeats the inverting-gradient scaling
    critic_optimizer: str = "sgd"
    hidden: tuple = (100, 100)
    noise_theta: float = 0.15        # per-step mean reversion
    noise_sigma: float = 0.2         # x half joint range
    noise_final_scale: float = 0.2   # linear anneal endpoint
    episodes: int = 300              # M
    episode_cap: int = 750           # T, HLC steps
    warmup_steps: int = 1000         # transitions before updates start

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError(f"tau must lie in (0, 1], got {self.tau}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class ReplayBuffer:
    """Ring buffer over transition arrays; grows lazily up to capacity."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        self.capacity = int(capacity)
        self.state_dim = state_dim
        self.action_dim = action_dim
        self._alloc = 0
        self._next = 0
        self.size = 0
        self.inserted = 0
        self._s = self._a = self._r = self._s2 = self._term = None

    def _grow(self):
        new_alloc = min(self.capacity, max(1024, self._alloc * 2))
        def grow(arr, width):
            out = np.zeros((new_alloc, width)) if width else np.zeros(new_alloc)
            if arr is not None:
                out[:self._alloc] = arr
            return out
        self._s = grow(self._s, self.state_dim)
        self._a = grow(self._a, self.action_dim)
        self._r = grow(self._r, 0)
        self._s2 = grow(self._s2, self.state_dim)
        self._term = grow(self._term, 0)
        self._alloc = new_alloc

    def add(self, t: Transition):
        if self.size == self._alloc and self._alloc < self.capacity:
            self._grow()
        i = self._next
        self._s[i] = t.s
        self._a[i] = t.a
        self._r[i] = t.r
        self._s2[i] = t.s2
        self._term[i] = 1.0 if t.terminal else 0.0
        self._next = (i + 1) % self.capacity if self._alloc == self.capacity \
            else (i + 1) % self._alloc
        self.size = min(self.size + 1, self.capacity)
        self.inserted += 1

    def __contains__(self, t: Transition) -> bool:
        if self.size == 0:
            return False
        match = np.all(self._s[:self.size] == t.s, axis=1)
        match &= np.all(self._a[:self.size] == t.a, axis=1)
        match &= self._r[:self.size] == t.r
        return bool(match.any())

    def sample(self, rng: np.random.Generator, n: int):
        """Uniform minibatch without replacement."""
        idx = rng.choice(self.size, size=n, replace=False)
        return (self._s[idx], self._a[idx], self._r[idx],
                self._s2[idx], self._term[idx])


class OUNoise:
    """Zero-mean temporally correlated exploration noise per action channel.

    Discrete update x += theta*(0 - x) + sigma*N(0,1); the lag-1
    autocorrelation is therefore (1 - theta).
    """

    def __init__(self, dim: int, theta: float, sigma: np.ndarray):
        self.dim = dim
        self.theta = theta
        self.sigma = np.asarray(sigma, dtype=float)
        self.scale = 1.0
        self.x = np.zeros(dim)

    def reset(self):
        self.x = np.zeros(self.dim)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        self.x = self.x + self.theta * (-self.x) \
            + self.sigma * self.scale * rng.standard_normal(self.dim)
        return self.x


def invert_gradients(grad: np.ndarray, p: np.ndarray,
                     p_min: np.ndarray, p_max: np.ndarray) -> np.ndarray:
    """Scale dQ/da by its headroom toward the bound it pushes against.

    Increasing components shrink as p nears p_max (and invert past it);
    decreasing components likewise against p_min.
    """
    p_min = np.asarray(p_min, dtype=float)
    p_max = np.asarray(p_max, dtype=float)
    span = p_max - p_min
    factor = np.where(grad >= 0.0, (p_max - p) / span, (p - p_min) / span)
    return grad * factor


def soft_update(target: dict, source: dict, tau: float):
    """target <- tau*source + (1-tau)*target, elementwise."""
    for k in target:
        target[k] *= (1.0 - tau)
        target[k] += tau * source[k]


class DdpgAgent:
    """Actor/critic pair with target copies and bounded-action updates."""

    def __init__(self, state_dim: int, action_dim: int,
                 action_low, action_high, h: Hyperparams,
                 rng: np.random.Generator):
        self.h = h
        self.action_low = np.asarray(action_low, dtype=float)
        self.action_high = np.asarray(action_high, dtype=float)
        self.actor = ActorNet(state_dim, action_dim, rng, h.hidden)
        self.critic = CriticNet(state_dim, action_dim, rng, h.hidden)
        self.actor_target = clone_params(self.actor)
        self.critic_target = clone_params(self.critic)
        self._target_actor_net = ActorNet(state_dim, action_dim, rng, h.hidden)
        self._target_critic_net = CriticNet(state_dim, action_dim, rng, h.hidden)
        assign_params(self._target_actor_net, self.actor_target)
        assign_params(self._target_critic_net, self.critic_target)
        self.actor_opt = make_optimizer(h.actor_optimizer, self.actor,
                                        h.actor_lr, maximize=True)
        self.critic_opt = make_optimizer(h.critic_optimizer, self.critic,
                                         h.critic_lr)

    def act(self, s: np.ndarray) -> np.ndarray:
        """Deterministic policy output, clamped to the joint limits."""
        a = self.actor.forward(s)[0]
        return np.clip(a, self.action_low, self.action_high)

    def critic_update(self, batch) -> float:
        """One mean-squared TD-error step; returns the pre-step loss."""
        s, a, r, s2, term = batch
        assign_params(self._target_actor_net, self.actor_target)
        assign_params(self._target_critic_net, self.critic_target)
        a2 = self._target_actor_net.forward(s2)
        q2 = self._target_critic_net.forward(s2, a2)
        y = r + self.h.gamma * q2 * (1.0 - term)
        q = self.critic.forward(s, a)
        err = q - y
        loss = float(np.mean(err**2))
        if not np.isfinite(loss):
            raise NonFiniteLossError(
                f"critic loss diverged: loss={loss}, |q|max={np.abs(q).max()}, "
                f"|y|max={np.abs(y).max()}")
        grads = self.critic.backward(2.0 * err / len(err))
        self.critic_opt.apply(grads)
        return loss

    def actor_update(self, batch):
        """Deterministic policy-gradient step with inverted action gradients."""
        s = batch[0]
        a = self.actor.forward(s)
        da = self.critic.action_gradient(s, a)
        da = invert_gradients(da, a, self.action_low, self.action_high)
        grads = self.actor.backward(da / len(s))
        self.actor_opt.apply(grads)

    def update_targets(self):
        soft_update(self.actor_target, self.actor.params(), self.h.tau)
        soft_update(self.critic_target, self.critic.params(), self.h.tau)


@dataclass
class TrainResult:
    episodes: list = field(default_factory=list)  # per-episode log rows
    agent: DdpgAgent | None = None

    def returns(self) -> np.ndarray:
        return np.array([row[2] for row in self.episodes])


LOG_COLUMNS = ("episode", "steps", "return", "critic_loss_mean",
               "exploration_scale")


def train(env, h: Hyperparams, seed: int,
          episode_callback=None) -> TrainResult:
    """Run the full training loop against `env` (reset(rng)/step(a) protocol).

    Per episode: reset the noise process, act with exploration, store
    transitions, and once the warmup is over do one critic + actor + target
    update per step.  Deterministic for a fixed seed.
    """
    root = np.random.SeedSequence(seed)
    s_agent, s_env, s_noise, s_batch = root.spawn(4)
    rng_env = np.random.default_rng(s_env)
    rng_noise = np.random.default_rng(s_noise)
    rng_batch = np.random.default_rng(s_batch)

    agent = DdpgAgent(env.state_dim, env.action_dim,
                      env.action_low, env.action_high, h,
                      np.random.default_rng(s_agent))
    buffer = ReplayBuffer(h.buffer_capacity, env.state_dim, env.action_dim)
    half_range = 0.5 * (agent.action_high - agent.action_low)
    noise = OUNoise(env.action_dim, h.noise_theta, h.noise_sigma * half_range)

    result = TrainResult(agent=agent)
    cap = min(h.episode_cap, env.max_steps)
    for ep in range(1, h.episodes + 1):
        # linear anneal of the exploration scale across the run
        frac = (ep - 1) / max(1, h.episodes - 1)
        noise.scale = 1.0 - (1.0 - h.noise_final_scale) * frac
        noise.reset()
        s = env.reset(rng_env)
        ep_return = 0.0
        losses = []
        steps = 0
        for _ in range(cap):
            a = agent.actor.forward(s)[0] + noise.sample(rng_noise)
            a = np.clip(a, agent.action_low, agent.action_high)
            s2, r, terminal, info = env.step(a)
            buffer.add(Transition(s, a, r, s2, terminal))
            ep_return += r
            steps += 1
            s = s2
            if buffer.size >= max(h.batch_size, h.warmup_steps):
                batch = buffer.sample(rng_batch, h.batch_size)
                losses.append(agent.critic_update(batch))
                agent.actor_update(batch)
                agent.update_targets()
            if terminal:
                break
        row = (ep, steps, ep_return,
               float(np.mean(losses)) if losses else 0.0, noise.scale)
        result.episodes.append(row)
        if episode_callback is not None:
            episode_callback(row, agent)
    return result


def save_checkpoint(path: str, agent: DdpgAgent, h: Hyperparams,
                    seed: int, episode: int):
    """Versioned container with every weight matrix; write-then-rename."""
    meta = {"hyperparams": asdict(h), "seed": seed, "episode": episode,
            "action_low": agent.action_low.tolist(),
            "action_high": agent.action_high.tolist(),
            "state_dim": agent.actor.state_dim,
            "action_dim": agent.actor.action_dim}
    arrays = {"magic": np.array(CHECKPOINT_MAGIC),
              "meta": np.array(json.dumps(meta))}
    for prefix, params in (("actor", agent.actor.params()),
                           ("critic", agent.critic.params()),
                           ("actor_target", agent.actor_target),
                           ("critic_target", agent.critic_target)):
        for k, v in params.items():
            arrays[f"{prefix}.{k}"] = np.ascontiguousarray(v, dtype=np.float64)
    tmp = path + ".tmp"
    with open(tmp, "wb") as f:
        np.savez(f, **arrays)
    os.replace(tmp, path)


def load_checkpoint(path: str):
    """Returns (agent, hyperparams, meta).  Raises CheckpointCorrupt."""
    try:
        data = np.load(path, allow_pickle=False)
    except Exception as e:
        raise CheckpointCorrupt(f"cannot read checkpoint {path}: {e}") from e
    try:
        if str(data["magic"]) != CHECKPOINT_MAGIC:
            raise KeyError("bad magic")
        meta = json.loads(str(data["meta"]))
        hp = meta["hyperparams"]
        hp["hidden"] = tuple(hp["hidden"])
        h = Hyperparams(**hp)
        agent = DdpgAgent(meta["state_dim"], meta["action_dim"],
                          np.array(meta["action_low"]),
                          np.array(meta["action_high"]), h,
                          np.random.default_rng(0))
        for prefix, params in (("actor", agent.actor.params()),
                               ("critic", agent.critic.params()),
                               ("actor_target", agent.actor_target),
                               ("critic_target", agent.critic_target)):
            for k in params:
                params[k][...] = data[f"{prefix}.{k}"]
    except CheckpointCorrupt:
        raise
    except Exception as e:
        raise CheckpointCorrupt(f"malformed checkpoint {path}: {e}") from e
    return agent, h, meta
