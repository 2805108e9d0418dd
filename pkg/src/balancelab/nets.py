"""Dense actor/critic networks with hand-rolled backprop (numpy, float64).

Actor: state -> 100 ReLU -> 100 ReLU -> action (linear).
Critic: state -> 100 ReLU, then the action joins at the second hidden layer
(concatenated with the first hidden activations) -> 100 ReLU -> scalar Q.

Hidden layers use uniform fan-in init; the output layers start in +-3e-3 so the
initial policy sits near the pose center and initial Q estimates are small.
"""

from __future__ import annotations

import numpy as np

FINAL_INIT = 3e-3


def _init(rng: np.random.Generator, fan_in: int, fan_out: int,
          scale: float | None = None):
    if scale is None:
        scale = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-scale, scale, size=(fan_in, fan_out))
    b = rng.uniform(-scale, scale, size=fan_out)
    return w, b


class ActorNet:
    def __init__(self, state_dim: int, action_dim: int,
                 rng: np.random.Generator, hidden: tuple = (100, 100)):
        h1, h2 = hidden
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.hidden = (h1, h2)
        self.w1, self.b1 = _init(rng, state_dim, h1)
        self.w2, self.b2 = _init(rng, h1, h2)
        self.w3, self.b3 = _init(rng, h2, action_dim, FINAL_INIT)
        self._cache = None

    def params(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2,
                "w3": self.w3, "b3": self.b3}

    def forward(self, s: np.ndarray) -> np.ndarray:
        s = np.atleast_2d(s)
        z1 = s @ self.w1 + self.b1
        h1 = np.maximum(z1, 0.0)
        z2 = h1 @ self.w2 + self.b2
        h2 = np.maximum(z2, 0.0)
        a = h2 @ self.w3 + self.b3
        self._cache = (s, z1, h1, z2, h2)
        return a

    def backward(self, d_a: np.ndarray) -> dict:
        """Gradients of sum(d_a * a) w.r.t. params, for the cached forward."""
        s, z1, h1, z2, h2 = self._cache
        d_a = np.atleast_2d(d_a)
        g = {"w3": h2.T @ d_a, "b3": d_a.sum(axis=0)}
        d_h2 = (d_a @ self.w3.T) * (z2 > 0.0)
        g["w2"] = h1.T @ d_h2
        g["b2"] = d_h2.sum(axis=0)
        d_h1 = (d_h2 @ self.w2.T) * (z1 > 0.0)
        g["w1"] = s.T @ d_h1
        g["b1"] = d_h1.sum(axis=0)
        return g


class CriticNet:
    def __init__(self, state_dim: int, action_dim: int,
                 rng: np.random.Generator, hidden: tuple = (100, 100)):
        h1, h2 = hidden
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.hidden = (h1, h2)
        self.w1, self.b1 = _init(rng, state_dim, h1)
        # action skips the first hidden layer and joins here
        self.w2, self.b2 = _init(rng, h1 + action_dim, h2)
        self.w3, self.b3 = _init(rng, h2, 1, FINAL_INIT)
        self._cache = None

    def params(self) -> dict:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2,
                "w3": self.w3, "b3": self.b3}

    def forward(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        s = np.atleast_2d(s)
        a = np.atleast_2d(a)
        z1 = s @ self.w1 + self.b1
        h1 = np.maximum(z1, 0.0)
        h1a = np.concatenate([h1, a], axis=1)
        z2 = h1a @ self.w2 + self.b2
        h2 = np.maximum(z2, 0.0)
        q = (h2 @ self.w3 + self.b3)[:, 0]
        self._cache = (s, a, z1, h1, h1a, z2, h2)
        return q

    def backward(self, d_q: np.ndarray, need_action_grad: bool = False):
        """Gradients of sum(d_q * q); optionally also dQ/da for the batch."""
        s, a, z1, h1, h1a, z2, h2 = self._cache
        d_q = np.asarray(d_q).reshape(-1, 1)
        g = {"w3": h2.T @ d_q, "b3": d_q.sum(axis=0)}
        d_h2 = (d_q @ self.w3.T) * (z2 > 0.0)
        g["w2"] = h1a.T @ d_h2
        g["b2"] = d_h2.sum(axis=0)
        d_h1a = d_h2 @ self.w2.T
        nh = h1.shape[1]
        d_h1 = d_h1a[:, :nh] * (z1 > 0.0)
        g["w1"] = s.T @ d_h1
        g["b1"] = d_h1.sum(axis=0)
        if need_action_grad:
            return g, d_h1a[:, nh:]
        return g

    def action_gradient(self, s: np.ndarray, a: np.ndarray) -> np.ndarray:
        """dQ/da per sample, without touching any weights."""
        self.forward(s, a)
        _, da = self.backward(np.ones(np.atleast_2d(s).shape[0]),
                              need_action_grad=True)
        return da


def clone_params(net) -> dict:
    return {k: v.copy() for k, v in net.params().items()}


def assign_params(net, params: dict):
    for k, v in net.params().items():
        v[...] = params[k]


class Sgd:
    """Plain gradient descent; `maximize` flips to ascent for the actor."""

    def __init__(self, net, lr: float, maximize: bool = False):
        self.net = net
        self.lr = lr
        self.sign = 1.0 if maximize else -1.0

    def apply(self, grads: dict):
        for k, v in self.net.params().items():
            v += self.sign * self.lr * grads[k].reshape(v.shape)


class Adam:
    """Adaptive-moment option; kept bitwise deterministic (no randomness)."""

    def __init__(self, net, lr: float, maximize: bool = False,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.net = net
        self.lr = lr
        self.sign = 1.0 if maximize else -1.0
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in net.params().items()}
        self.v = {k: np.zeros_like(v) for k, v in net.params().items()}

    def apply(self, grads: dict):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        corr1 = 1.0 - b1**self.t
        corr2 = 1.0 - b2**self.t
        for k, p in self.net.params().items():
            g = grads[k].reshape(p.shape)
            self.m[k] = b1 * self.m[k] + (1.0 - b1) * g
            self.v[k] = b2 * self.v[k] + (1.0 - b2) * g * g
            step = (self.m[k] / corr1) / (np.sqrt(self.v[k] / corr2) + self.eps)
            p += self.sign * self.lr * step


def make_optimizer(kind: str, net, lr: float, maximize: bool = False):
    if kind == "sgd":
        return Sgd(net, lr, maximize)
    if kind == "adam":
        return Adam(net, lr, maximize)
    raise ValueError(f"unknown optimizer {kind!r}")
