"""Capture-point balance analytics on the linear inverted pendulum (LIP)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAVITY = 9.81  # m/s^2


@dataclass
class LipState:
    """Point-mass pendulum state at constant COM height."""

    x_com: float        # m
    xd_com: float       # m/s
    z0: float           # constant COM height, m
    g: float = GRAVITY

    def __post_init__(self):
        if self.z0 <= 0.0:
            raise ValueError(f"z0 must be positive, got {self.z0}")
        if self.g <= 0.0:
            raise ValueError(f"g must be positive, got {self.g}")


@dataclass
class ImpulseBudget:
    """Maximum rejectable disturbance for a COP held at a fixed offset."""

    j_reject: float     # N*s
    v_max: float        # m/s
    f_max: float        # N
    t_impulse: float    # s
    delta_cop: float    # m, signed COP offset from the initial COM
    mass: float         # kg
    z_com: float        # m


def capture_point(s: LipState) -> float:
    """Ground point where holding the COP brings the pendulum to rest."""
    return s.x_com + s.xd_com * np.sqrt(s.z0 / s.g)


def impulse_budget(mass: float, z_com: float, delta_cop: float,
                   t_impulse: float, g: float = GRAVITY) -> ImpulseBudget:
    """Rejectable impulse for a COP offset, plus the matching velocity and force limits.

    delta_cop may be signed (negative = COP behind the COM, i.e. backward pushes).
    """
    if mass <= 0.0 or z_com <= 0.0 or t_impulse <= 0.0:
        raise ValueError("mass, z_com and t_impulse must be positive")
    j = mass * np.sqrt(g / z_com) * delta_cop
    return ImpulseBudget(
        j_reject=j,
        v_max=j / mass,
        f_max=j / t_impulse,
        t_impulse=t_impulse,
        delta_cop=delta_cop,
        mass=mass,
        z_com=z_com,
    )


def lip_simulate(s: LipState, cop_x: float, horizon: float,
                 dt: float = 1e-3) -> np.ndarray:
    """Integrate the LIP about a fixed COP; rows are (t, x, xd).

    RK4 is used on purpose: the capture-point initial condition sits exactly on
    the stable manifold of a saddle, and lower-order schemes leak enough error
    into the diverging mode to ruin long horizons.
    """
    if dt > 1e-3:
        raise ValueError(f"dt must be <= 1 ms for oracle accuracy, got {dt}")
    w2 = s.g / s.z0
    n = int(round(horizon / dt))
    out = np.empty((n + 1, 3))
    x, xd = s.x_com, s.xd_com
    out[0] = (0.0, x, xd)
    for k in range(n):
        # RK4 on (x, xd) with xdd = w2 * (x - cop_x)
        k1x, k1v = xd, w2 * (x - cop_x)
        k2x, k2v = xd + 0.5 * dt * k1v, w2 * (x + 0.5 * dt * k1x - cop_x)
        k3x, k3v = xd + 0.5 * dt * k2v, w2 * (x + 0.5 * dt * k2x - cop_x)
        k4x, k4v = xd + dt * k3v, w2 * (x + dt * k3x - cop_x)
        x += dt * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
        xd += dt * (k1v + 2.0 * k2v + 2.0 * k3v + k4v) / 6.0
        out[k + 1] = ((k + 1) * dt, x, xd)
    return out
