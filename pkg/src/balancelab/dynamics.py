"""Planar articulated dynamics for the five-link biped with heel/toe contacts.

Generalized coordinates (7): ankle position (x, z), foot pitch, then the four
relative joint angles ankle/knee/hip/waist.  Link pitch is measured CCW from
vertical, so +x is forward and a forward lean has negative pitch.  The equations
of motion are assembled from per-link COM Jacobians (mass matrix + centripetal
bias) and integrated with semi-implicit Euler at 1 kHz; the arithmetic lives in
the jitted kernels of `_core` and this module is its dataclass face.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from .model import BipedModel

N_COORDS = 7
N_LINKS = 5


class NonFiniteError(RuntimeError):
    """Integration produced NaN/Inf; the caller must terminate the episode."""


class PivotInactiveError(RuntimeError):
    """Torque ceiling requested about a contact point that is not touching."""


@dataclass
class ContactPoint:
    active: bool = False
    normal: float = 0.0       # N, >= 0
    tangential: float = 0.0   # N, |ft| <= mu * normal
    penetration: float = 0.0  # m
    anchor_x: float | None = None  # stick-friction anchor, None when airborne


@dataclass
class ContactState:
    heel: ContactPoint
    toe: ContactPoint

    @staticmethod
    def airborne() -> "ContactState":
        return ContactState(ContactPoint(), ContactPoint())

    def point(self, name: str) -> ContactPoint:
        if name == "heel":
            return self.heel
        if name == "toe":
            return self.toe
        raise ValueError(f"unknown contact point {name!r}")

    def as_array(self) -> np.ndarray:
        out = np.zeros((2, 5))
        for i, p in enumerate((self.heel, self.toe)):
            out[i, 0] = 1.0 if p.active else 0.0
            out[i, 1] = p.normal
            out[i, 2] = p.tangential
            out[i, 3] = p.penetration
            out[i, 4] = np.nan if p.anchor_x is None else p.anchor_x
        return out

    @staticmethod
    def from_array(arr: np.ndarray) -> "ContactState":
        pts = []
        for i in range(2):
            anchor = arr[i, 4]
            pts.append(ContactPoint(
                active=arr[i, 0] != 0.0,
                normal=float(arr[i, 1]),
                tangential=float(arr[i, 2]),
                penetration=float(arr[i, 3]),
                anchor_x=None if np.isnan(anchor) else float(anchor)))
        return ContactState(*pts)


@dataclass
class BipedState:
    q: np.ndarray    # (7,)
    qd: np.ndarray   # (7,)
    t: float
    contacts: ContactState

    def copy(self) -> "BipedState":
        return BipedState(self.q.copy(), self.qd.copy(), self.t,
                          ContactState.from_array(self.contacts.as_array()))


@dataclass
class ExternalPush:
    """Horizontal pulse on the pelvis; positive force is forward (+x)."""

    force: float      # N, signed
    start: float      # s
    duration: float   # s

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ValueError(f"push duration must be positive, got {self.duration}")

    def active_at(self, t: float) -> bool:
        return self.start <= t < self.start + self.duration


@dataclass
class Kinematics:
    theta: np.ndarray    # (5,) absolute link pitch, rad
    omega: np.ndarray    # (5,) absolute pitch rate, rad/s
    pivots: np.ndarray   # (5, 2) pivot point of each angle parameter
    coms: np.ndarray     # (5, 2) link COM positions
    vcoms: np.ndarray    # (5, 2) link COM velocities


def _dyn_args(model: BipedModel):
    args = getattr(model, "_dyn_args_cache", None)
    if args is None:
        c = model.contact
        args = (model.masses, model.inertias, model.lengths,
                np.ascontiguousarray(model.com_offsets[:, 0]),
                np.ascontiguousarray(model.com_offsets[:, 1]),
                model.armatures, model.angle_lo, model.angle_hi,
                model.torque_limits, model.g, model.mu,
                c.normal_stiffness, c.normal_damping,
                c.tangential_stiffness, c.tangential_damping,
                model.heel_x, model.toe_x, model.foot_thickness)
        model._dyn_args_cache = args
    return args


def kinematics(model: BipedModel, q: np.ndarray, qd: np.ndarray) -> Kinematics:
    theta, omega, pivots, coms, vcoms = _core.kinematics_core(
        q, qd, model.lengths,
        np.ascontiguousarray(model.com_offsets[:, 0]),
        np.ascontiguousarray(model.com_offsets[:, 1]))
    return Kinematics(theta, omega, pivots, coms, vcoms)


def step(model: BipedModel, state: BipedState, joint_torques,
         push: ExternalPush | None = None, dt: float = 1e-3,
         enable_contact: bool = True) -> BipedState:
    """Advance one physics step; pure in (model, state, torques, push, dt).

    Torques are clamped to the actuator limits before application.  Raises
    NonFiniteError if the integration blows up.
    """
    torques = np.asarray(joint_torques, dtype=float)
    push_force = 0.0
    if push is not None and push.active_at(state.t):
        push_force = push.force
    q2, qd2, contact2, ok = _core.step_core(
        state.q, state.qd, state.t, state.contacts.as_array(),
        torques, push_force, *_dyn_args(model), dt, enable_contact)
    if not ok:
        raise NonFiniteError(f"dynamics diverged at t={state.t:.4f}s")
    return BipedState(q2, qd2, state.t + dt, ContactState.from_array(contact2))


def com_state(model: BipedModel, state: BipedState):
    """Aggregate COM position and velocity: (x, z, xd, zd)."""
    kin = kinematics(model, state.q, state.qd)
    m = model.masses
    total = m.sum()
    pos = m @ kin.coms / total
    vel = m @ kin.vcoms / total
    return float(pos[0]), float(pos[1]), float(vel[0]), float(vel[1])


def foot_torque_ceiling(model: BipedModel, state: BipedState,
                        pivot: str) -> float:
    """Gravitational ankle-torque limit while tilting about the heel or toe.

    During single-point support no actuator torque can act about the pivot, so
    the largest sustainable ankle torque is the moment of gravity through the
    current COM about that tip.
    """
    cpnt = state.contacts.point(pivot)
    if not cpnt.active:
        raise PivotInactiveError(f"{pivot} is not in contact")
    dx = model.heel_x if pivot == "heel" else model.toe_x
    c, s = np.cos(state.q[2]), np.sin(state.q[2])
    tip_x = state.q[0] + dx * c + model.foot_thickness * s
    x_com, _, _, _ = com_state(model, state)
    return model.total_mass * model.g * abs(x_com - tip_x)


def mechanical_energy(model: BipedModel, state: BipedState) -> float:
    """Kinetic plus gravitational potential energy (ground z = 0 reference)."""
    kin = kinematics(model, state.q, state.qd)
    m = model.masses
    ke = 0.5 * float(m @ np.sum(kin.vcoms**2, axis=1))
    ke += 0.5 * float(model.inertias @ kin.omega**2)
    ke += 0.5 * float(model.armatures @ state.qd[3:]**2)  # rotor spin
    pe = model.g * float(m @ kin.coms[:, 1])
    return ke + pe


def nominal_state(model: BipedModel, settle: bool = True) -> BipedState:
    """Upright home pose; `settle` preloads the static contact penetration."""
    z = model.foot_thickness
    if settle:
        z -= model.total_mass * model.g / (2.0 * model.contact.normal_stiffness)
    q = np.zeros(N_COORDS)
    q[1] = z
    return BipedState(q, np.zeros(N_COORDS), 0.0, ContactState.airborne())
