"""Policy state features: pelvis height, joints, body pitch, per-link COM
displacement and velocity, ground contact flags.

Continuous channels pass through a 10 Hz Butterworth bank sampled at the
policy (HLC) rate; the two contact flags stay untouched.  For the 5-link biped
the vector is 1 + 4 + 4 + 2 + 2 + 10 + 10 + 2 = 35 features.
"""

from __future__ import annotations

import numpy as np

from .dynamics import BipedState, kinematics
from .filters import FilterBank
from .model import BipedModel, JOINT_NAMES, LINK_NAMES

PELVIS = 3  # link index
TORSO = 4

OBS_CUTOFF_HZ = 10.0
OBS_FILTER_ORDER = 2


def observation_dim(n_links: int = 5) -> int:
    return 1 + 4 + 4 + 2 + 2 + 2 * n_links + 2 * n_links + 2


def n_continuous(n_links: int = 5) -> int:
    return observation_dim(n_links) - 2


def feature_names(n_links: int = 5):
    names = ["pelvis_height"]
    names += [f"q_{j}" for j in JOINT_NAMES]
    names += [f"qd_{j}" for j in JOINT_NAMES]
    names += ["phi_torso", "phi_pelvis", "phid_torso", "phid_pelvis"]
    names += [f"{l}_rel_{ax}" for l in LINK_NAMES for ax in ("x", "z")]
    names += [f"{l}_vel_{ax}" for l in LINK_NAMES for ax in ("x", "z")]
    names += ["contact_heel", "contact_toe"]
    return names


def raw_features(model: BipedModel, state: BipedState):
    """Unfiltered (continuous, flags) pair straight from simulator state."""
    kin = kinematics(model, state.q, state.qd)
    rel = kin.coms - kin.coms[PELVIS]
    cont = np.concatenate([
        [kin.coms[PELVIS, 1]],
        state.q[3:],
        state.qd[3:],
        [kin.theta[TORSO], kin.theta[PELVIS],
         kin.omega[TORSO], kin.omega[PELVIS]],
        rel.ravel(),
        kin.vcoms.ravel(),
    ])
    flags = np.array([
        1.0 if state.contacts.heel.active else 0.0,
        1.0 if state.contacts.toe.active else 0.0,
    ])
    return cont, flags


def make_filter_bank(sample_hz: float, cutoff_hz: float = OBS_CUTOFF_HZ,
                     order: int = OBS_FILTER_ORDER, n_links: int = 5) -> FilterBank:
    return FilterBank(n_continuous(n_links), cutoff_hz, sample_hz, order)


def observe(model: BipedModel, state: BipedState,
            filters: FilterBank) -> np.ndarray:
    """Full feature vector; advances the filter bank by one sample."""
    cont, flags = raw_features(model, state)
    return np.concatenate([filters.step(cont), flags])
