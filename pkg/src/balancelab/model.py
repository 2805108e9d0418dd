"""Planar five-link biped model calibrated to Valkyrie-scale aggregates.

Link chain (ground up): foot - ankle - shank - knee - thigh - hip - pelvis -
waist - torso.  Both legs are merged into one effective planar leg so the
action space is exactly the four sagittal joints.

Calibration targets (nominal standing pose, all joint angles zero):
  total mass 127.6 kg, aggregate COM height 1.084 m, COM horizontally above
  the ankle with the toe tip 0.189 m ahead and the heel tip 0.111 m behind.
Per-link values (mass kg / length m / COM offset along link m):
  foot   6.38 / 0.300 (heel to toe) / COM at ankle x, half sole depth
  shank  19.14 / 0.45 / 0.225
  thigh  25.52 / 0.48 / 0.240
  pelvis 31.90 / 0.28 / 0.140
  torso  44.66 / 0.60 / solved in build_default_model() so the aggregate COM
                        height equals 1.084 m exactly
Only the aggregates are published; the per-link split (foot 5%, shank 15%,
thigh 20%, pelvis 25%, torso 35%) is a documented modelling choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81

LINK_NAMES = ("foot", "shank", "thigh", "pelvis", "torso")
JOINT_NAMES = ("ankle", "knee", "hip", "waist")

TOTAL_MASS = 127.6          # kg
COM_HEIGHT_NOMINAL = 1.084  # m, aggregate COM above ground at the nominal pose
TOE_X = 0.189               # m ahead of the ankle
HEEL_X = -0.111             # m behind the ankle


@dataclass
class Link:
    name: str
    mass: float        # kg
    length: float      # m, proximal joint to distal joint
    com_offset: tuple  # (x, z) m in the link frame, from the proximal joint
    inertia: float     # kg*m^2 about the COM


@dataclass
class Joint:
    name: str
    angle_min: float    # rad
    angle_max: float    # rad
    torque_limit: float  # N*m
    armature: float      # kg*m^2, reflected actuator inertia at the joint


@dataclass
class ContactParams:
    """Penalty spring-damper at the heel and toe points with a Coulomb clamp.

    Stiffness is sized so single-point support of the full weight stays under
    5 mm of penetration; damping is sized to the light foot so the explicit
    1 kHz step stays stable.
    """

    normal_stiffness: float = 3e5      # N/m
    normal_damping: float = 1e3       # N*s/m
    tangential_stiffness: float = 3e5  # N/m, stick anchor spring
    tangential_damping: float = 1e3   # N*s/m


@dataclass
class BipedModel:
    links: tuple            # 5 Link, foot..torso
    joints: tuple           # 4 Joint, ankle..waist
    foot_thickness: float   # m, sole to ankle
    heel_x: float = HEEL_X  # m, heel tip from the ankle in the foot frame
    toe_x: float = TOE_X    # m, toe tip from the ankle in the foot frame
    g: float = GRAVITY
    mu: float = 1.0
    contact: ContactParams = field(default_factory=ContactParams)

    # Cached arrays for the dynamics hot loop.
    masses: np.ndarray = field(init=False)
    inertias: np.ndarray = field(init=False)
    lengths: np.ndarray = field(init=False)
    com_offsets: np.ndarray = field(init=False)
    angle_lo: np.ndarray = field(init=False)
    angle_hi: np.ndarray = field(init=False)
    torque_limits: np.ndarray = field(init=False)
    armatures: np.ndarray = field(init=False)

    def __post_init__(self):
        self.masses = np.array([l.mass for l in self.links])
        self.inertias = np.array([l.inertia for l in self.links])
        self.lengths = np.array([l.length for l in self.links])
        self.com_offsets = np.array([l.com_offset for l in self.links])
        self.angle_lo = np.array([j.angle_min for j in self.joints])
        self.angle_hi = np.array([j.angle_max for j in self.joints])
        self.torque_limits = np.array([j.torque_limit for j in self.joints])
        self.armatures = np.array([j.armature for j in self.joints])

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def validate(self):
        if any(m <= 0 for m in self.masses):
            raise ValueError("link masses must be positive")
        if any(i <= 0 for i in self.inertias):
            raise ValueError("link inertias must be positive")
        if any(l.length <= 0 for l in self.links):
            raise ValueError("link lengths must be positive")
        if self.foot_thickness <= 0:
            raise ValueError("foot thickness must be positive")
        if self.mu <= 0:
            raise ValueError("friction coefficient must be positive")


def build_default_model(foot_thickness: float = 0.08,
                        mu: float = 1.0,
                        torque_limit: float = 500.0,
                        contact: ContactParams | None = None) -> BipedModel:
    """Biped with the documented mass split, COM-calibrated torso offset.

    `torque_limit` (per joint) is deliberately above the ~237 N*m contact
    geometry ceiling so the foot geometry, not the actuator, binds during
    toe/heel tilting.
    """
    m_foot, m_shank, m_thigh, m_pelvis, m_torso = (
        TOTAL_MASS * 0.05, TOTAL_MASS * 0.15, TOTAL_MASS * 0.20,
        TOTAL_MASS * 0.25, TOTAL_MASS * 0.35)
    l_shank, l_thigh, l_pelvis, l_torso = 0.45, 0.48, 0.28, 0.60
    foot_len = TOE_X - HEEL_X

    # Joint heights in the nominal pose, sole resting on the ground.
    z_ankle = foot_thickness
    z_knee = z_ankle + l_shank
    z_hip = z_knee + l_thigh
    z_waist = z_hip + l_pelvis

    # COM offsets: midpoint for the lower links, foot COM directly below the
    # ankle so the aggregate COM x sits over the ankle; the torso offset is
    # solved so the aggregate COM height lands exactly on the target.
    c_shank, c_thigh, c_pelvis = 0.5 * l_shank, 0.5 * l_thigh, 0.5 * l_pelvis
    fixed_moment = (m_foot * (z_ankle - 0.5 * foot_thickness)
                    + m_shank * (z_ankle + c_shank)
                    + m_thigh * (z_knee + c_thigh)
                    + m_pelvis * (z_hip + c_pelvis))
    c_torso = (TOTAL_MASS * COM_HEIGHT_NOMINAL - fixed_moment
               - m_torso * z_waist) / m_torso
    if not 0.0 < c_torso < l_torso:
        raise ValueError(f"torso COM calibration out of range: {c_torso}")

    links = (
        Link("foot", m_foot, foot_len, (0.0, -0.5 * foot_thickness),
             m_foot * (foot_len**2 + foot_thickness**2) / 12.0),
        Link("shank", m_shank, l_shank, (0.0, c_shank),
             m_shank * l_shank**2 / 12.0),
        Link("thigh", m_thigh, l_thigh, (0.0, c_thigh),
             m_thigh * l_thigh**2 / 12.0),
        Link("pelvis", m_pelvis, l_pelvis, (0.0, c_pelvis),
             m_pelvis * l_pelvis**2 / 12.0),
        Link("torso", m_torso, l_torso, (0.0, c_torso),
             m_torso * l_torso**2 / 12.0),
    )
    # Anatomical stops: the knee blocks just past straight (hyperextension)
    # so a knee-lock strategy can lean on structure instead of torque.
    # Armature is the gearbox-reflected rotor inertia; without it the damping
    # gains of the stock PD controller exceed what a 1 kHz explicit step can
    # integrate on the light foot side of the ankle.
    joints = (
        Joint("ankle", -1.0, 1.0, torque_limit, armature=0.30),
        Joint("knee", -0.05, 2.1, torque_limit, armature=0.20),
        Joint("hip", -2.2, 0.8, torque_limit, armature=0.15),
        Joint("waist", -0.8, 0.8, torque_limit, armature=0.15),
    )
    model = BipedModel(links=links, joints=joints,
                       foot_thickness=foot_thickness, mu=mu,
                       contact=contact if contact is not None else ContactParams())
    model.validate()
    return model
