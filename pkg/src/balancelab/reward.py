"""Physics-grounded balance reward: six exponential terms with friction-cone ranges.

Each term maps an error (value minus target) to (0, 1] through exp(-alpha * err^2).
The alpha factors are sized so a term decays to a floor probability epsilon when
its error reaches the largest value still inside the friction cone, which is what
makes the six heterogeneous channels commensurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

GRAVITY = 9.81

# Term order used throughout: torso pitch, pelvis pitch, x_com, z_com, xd_com, zd_com.
TERM_NAMES = ("phi_torso", "phi_pelvis", "x_com", "z_com", "xd_com", "zd_com")

DEFAULT_EPSILON = 1e-5
DEFAULT_THETA_MAX = math.pi / 4.0   # friction cone half-angle for mu = 1
DEFAULT_PENDULUM_LENGTH = 1.086     # m, foot center to COM


@dataclass
class ErrorRanges:
    """Largest error per channel before the pendulum leaves the friction cone."""

    phi_torso: float    # rad
    phi_pelvis: float   # rad
    x_com: float        # m
    z_com: float        # m
    xd_com: float       # m/s
    zd_com: float       # m/s

    def as_tuple(self):
        return (self.phi_torso, self.phi_pelvis, self.x_com,
                self.z_com, self.xd_com, self.zd_com)


@dataclass
class RewardBreakdown:
    """Individual reward terms in (0, 1] plus their weighted sum."""

    phi_torso: float
    phi_pelvis: float
    x_com: float
    z_com: float
    xd_com: float
    zd_com: float
    total: float

    def terms(self):
        return (self.phi_torso, self.phi_pelvis, self.x_com,
                self.z_com, self.xd_com, self.zd_com)


def error_ranges(l: float = DEFAULT_PENDULUM_LENGTH,
                 theta_max: float = DEFAULT_THETA_MAX,
                 g: float = GRAVITY) -> ErrorRanges:
    """Error ranges at the friction-cone boundary for pendulum length l.

    Orientations max out with the body horizontal (pi/2).  Positions follow the
    pendulum tilted to theta_max.  The horizontal-velocity range combines the
    capture-point limit at the tilted height with the tangential component of
    the vertical fall speed; the vertical range is the fall-speed projection.
    """
    if l <= 0.0:
        raise ValueError(f"pendulum length must be positive, got {l}")
    if not 0.0 < theta_max < math.pi / 2.0:
        raise ValueError(f"theta_max must lie in (0, pi/2), got {theta_max}")
    sin_t = math.sin(theta_max)
    cos_t = math.cos(theta_max)
    e_x = sin_t * l
    e_z = (1.0 - cos_t) * l
    v_fall = math.sqrt(2.0 * g * (1.0 - cos_t) * l)  # speed after falling e_z
    e_xd = sin_t * l * math.sqrt(g / (cos_t * l)) + cos_t * v_fall
    e_zd = sin_t * v_fall
    return ErrorRanges(
        phi_torso=math.pi / 2.0,
        phi_pelvis=math.pi / 2.0,
        x_com=e_x,
        z_com=e_z,
        xd_com=e_xd,
        zd_com=e_zd,
    )


def normalization_factors(e: ErrorRanges, epsilon: float = DEFAULT_EPSILON):
    """alpha_i = -ln(eps)/e_i^2 so each term equals eps at its error range."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    ranges = e.as_tuple()
    if any(r <= 0.0 for r in ranges):
        raise ValueError("all error ranges must be positive")
    scale = -math.log(epsilon)
    return tuple(scale / r**2 for r in ranges)


@dataclass
class RewardConfig:
    """Weights, targets and normalization for the six balance objectives.

    Defaults reproduce the published calibration: weights all 1 except z_com = 5,
    targets at quiet standing (zero pitch, COM over the foot center at standing
    height, zero COM velocity).
    """

    weights: tuple = (1.0, 1.0, 1.0, 5.0, 1.0, 1.0)
    epsilon: float = DEFAULT_EPSILON
    theta_max: float = DEFAULT_THETA_MAX
    pendulum_length: float = DEFAULT_PENDULUM_LENGTH
    g: float = GRAVITY
    x_com_target: float = 0.0       # m, foot-center x
    z_com_target: float = 1.084     # m
    xd_com_target: float = 0.0      # m/s, balance seeks stillness
    zd_com_target: float = 0.0      # m/s
    phi_torso_target: float = 0.0   # rad
    phi_pelvis_target: float = 0.0  # rad
    alphas: tuple = field(init=False)

    def __post_init__(self):
        if any(w < 0.0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        ranges = error_ranges(self.pendulum_length, self.theta_max, self.g)
        self.alphas = normalization_factors(ranges, self.epsilon)

    @property
    def max_total(self) -> float:
        return sum(self.weights)


def compute_reward(cfg: RewardConfig, phi_torso: float, phi_pelvis: float,
                   x_com: float, z_com: float, xd_com: float,
                   zd_com: float) -> RewardBreakdown:
    """Evaluate the six exponential terms and their weighted sum."""
    targets = (cfg.phi_torso_target, cfg.phi_pelvis_target, cfg.x_com_target,
               cfg.z_com_target, cfg.xd_com_target, cfg.zd_com_target)
    values = (phi_torso, phi_pelvis, x_com, z_com, xd_com, zd_com)
    terms = tuple(
        math.exp(-a * (t - v)**2)
        for a, t, v in zip(cfg.alphas, targets, values)
    )
    total = sum(w * r for w, r in zip(cfg.weights, terms))
    return RewardBreakdown(*terms, total=total)
