"""Physical-layer model of the monitored relay link and the aerial monitor.

Geometry, LoS channel gains, relay amplification, SNRs at the destination and
at the monitor, achievable rates, the eavesdropping-rate success rule, and the
rotary-wing propulsion power curves. All quantities are kept in linear SI
units internally; dB/dBm inputs are converted once at scenario load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

import numpy as np

LN2 = math.log(2.0)


def db_to_linear(db: float) -> float:
    """Convert a dB ratio to a linear ratio."""
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm power to watts."""
    return 10.0 ** (dbm / 10.0) * 1e-3


@dataclass(frozen=True)
class RotorParams:
    """Rotary-wing power-curve constants."""

    p_0: float      # blade profile power, W
    p_i: float      # induced power, W
    u_tip: float    # rotor blade tip speed, m/s
    v_0: float      # mean rotor induced velocity in hover, m/s
    d_0: float      # fuselage drag ratio
    rho: float      # air density, kg/m^3
    s: float        # rotor solidity
    a: float        # rotor disc area, m^2


@dataclass(frozen=True)
class Scenario:
    """All physical constants, node geometry, budgets, and the flight horizon.

    Every field is stored in linear SI units (W, m, s). Use
    :func:`scenario_from_dict` to load a config that carries dB-suffixed keys.
    """

    q_s: np.ndarray          # source horizontal position, m
    q_d: np.ndarray          # destination horizontal position, m
    q_r: np.ndarray          # relay horizontal position, m
    z_r: float               # relay height, m
    q_i: np.ndarray          # monitor initial horizontal position, m
    q_f: np.ndarray          # monitor final horizontal position, m
    h_i: float               # initial altitude (3D mode), m
    h_f: float               # final altitude (3D mode), m
    z_e_fixed: float         # fixed altitude (2D mode), m
    h_min: float             # altitude floor, m
    h_max: float             # altitude ceiling, m
    v_xy_max: float          # horizontal speed limit, m/s
    v_z_max: float           # vertical speed limit, m/s
    a_xy_max: float          # horizontal acceleration limit, m/s^2
    a_z_max: float           # vertical acceleration limit, m/s^2
    p_s: float               # source transmit power, W
    p_r: float               # relay transmit power, W
    p_e_max: float           # maximum jamming power, W
    sigma2: float            # noise power, W
    beta0: float             # reference channel power gain, linear
    rotor: RotorParams
    p_hor_ave: float         # average horizontal propulsion budget, W
    p_ver_ave: float         # average vertical propulsion budget, W
    w_weight: float          # aircraft weight, N
    t: float                 # flight period, s
    n: int                   # number of slots
    epsilon: float = 1e-3    # BCD stopping tolerance

    def __post_init__(self):
        for name in ("q_s", "q_d", "q_r", "q_i", "q_f"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        positives = {
            "z_r": self.z_r, "p_s": self.p_s, "p_r": self.p_r,
            "p_e_max": self.p_e_max, "sigma2": self.sigma2, "beta0": self.beta0,
            "t": self.t, "n": self.n, "v_xy_max": self.v_xy_max,
            "v_z_max": self.v_z_max, "a_xy_max": self.a_xy_max,
            "a_z_max": self.a_z_max, "p_hor_ave": self.p_hor_ave,
            "p_ver_ave": self.p_ver_ave, "w_weight": self.w_weight,
            "epsilon": self.epsilon,
        }
        for name, value in positives.items():
            if not value > 0:
                raise ValueError(f"scenario field {name} must be > 0, got {value}")
        if self.h_min > self.h_max:
            raise ValueError("h_min must not exceed h_max")
        if not self.z_r < self.h_min:
            raise ValueError("relay rooftop z_r must lie below the altitude floor h_min")

    @property
    def delta_t(self) -> float:
        return self.t / self.n

    # Fixed-geometry link terms reused across the whole pipeline.
    @property
    def d_sr(self) -> float:
        return float(np.sum((self.q_r - self.q_s) ** 2) + self.z_r ** 2)

    @property
    def h2_sr(self) -> float:
        return self.beta0 / self.d_sr

    @property
    def d_rd(self) -> float:
        return float(np.sum((self.q_r - self.q_d) ** 2) + self.z_r ** 2)

    @property
    def h2_rd(self) -> float:
        return self.beta0 / self.d_rd

    @property
    def k2(self) -> float:
        """Squared relay amplification coefficient."""
        return self.p_r / (self.sigma2 + self.p_s * self.h2_sr)

    @property
    def rho_s(self) -> float:
        """Source transmit SNR, P_S / sigma^2."""
        return self.p_s / self.sigma2

    @property
    def c_sig(self) -> float:
        """Numerator of the destination SNR, P_S K^2 h_SR^2 h_RD^2."""
        return self.p_s * self.k2 * self.h2_sr * self.h2_rd

    @property
    def d_noise(self) -> float:
        """Jamming-free denominator of the destination SNR, (1+K^2 h_RD^2) sigma^2."""
        return (1.0 + self.k2 * self.h2_rd) * self.sigma2

    def to_dict(self) -> dict:
        out = asdict(self)
        for name in ("q_s", "q_d", "q_r", "q_i", "q_f"):
            out[name] = [float(v) for v in out[name]]
        return out


@dataclass(frozen=True)
class UavPose:
    """Monitor position in one slot: horizontal coordinate and altitude."""

    q: np.ndarray
    z: float

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))


@dataclass(frozen=True)
class LinkGains:
    """Channel power gains of the five links for one monitor pose."""

    h2_se: float
    h2_sr: float
    h2_re: float
    h2_rd: float
    h2_ed: float


# dB-suffixed config keys accepted by scenario_from_dict, mapped to the
# linear field name and the converter.
_DB_KEYS = {
    "sigma2_dbm": ("sigma2", dbm_to_watts),
    "beta0_db": ("beta0", db_to_linear),
    "p_s_dbm": ("p_s", dbm_to_watts),
    "p_r_dbm": ("p_r", dbm_to_watts),
    "p_e_max_dbm": ("p_e_max", dbm_to_watts),
}

_ALIASES = {"p_e_max_w": "p_e_max", "t_s": "t", "w": "w_weight"}


def scenario_from_dict(cfg: dict) -> Scenario:
    """Build a Scenario from a config mapping, converting dB-suffixed keys.

    Base keys carry linear units; ``*_dbm`` / ``*_db`` variants are converted
    on load. Supplying both forms of the same quantity is rejected.
    """
    cfg = dict(cfg)
    out: dict = {}
    for key, (target, conv) in _DB_KEYS.items():
        if key in cfg:
            if target in cfg:
                raise ValueError(f"config gives both {key} and {target}")
            out[target] = conv(float(cfg.pop(key)))
    for key, target in _ALIASES.items():
        if key in cfg:
            cfg[target] = cfg.pop(key)
    rotor_cfg = cfg.pop("rotor", None)
    if rotor_cfg is None:
        raise ValueError("config missing rotor parameter block")
    out["rotor"] = RotorParams(**{k: float(v) for k, v in rotor_cfg.items()})
    known = set(Scenario.__dataclass_fields__)
    for key, value in cfg.items():
        if key not in known:
            raise ValueError(f"unknown scenario config key: {key}")
        out[key] = value
    if "n" not in out and "t" in out:
        # default slot length 1 s
        out["n"] = int(round(float(out["t"])))
    if "z_e_fixed" not in out and "h_i" in out:
        out["z_e_fixed"] = out["h_i"]
    missing = known - set(out) - {"epsilon"}
    if missing:
        raise ValueError(f"scenario config missing keys: {sorted(missing)}")
    out["n"] = int(out["n"])
    for key in known - {"q_s", "q_d", "q_r", "q_i", "q_f", "rotor", "n"}:
        if key in out:
            out[key] = float(out[key])
    return Scenario(**out)


def channel_gain(p1, p2, beta0: float) -> float:
    """LoS channel power gain between two 3D points, beta0 / distance^2."""
    if beta0 <= 0:
        raise ValueError("beta0 must be positive")
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d2 = float(np.sum((p1 - p2) ** 2))
    if d2 == 0.0:
        raise ValueError("coincident endpoints give a singular channel gain")
    return beta0 / d2


def squared_distances(s: Scenario, pose: UavPose) -> tuple[float, float, float]:
    """Squared 3D distances (d_SE, d_RE, d_ED) from the monitor pose."""
    d_se = float(np.sum((pose.q - s.q_s) ** 2)) + pose.z ** 2
    d_re = float(np.sum((pose.q - s.q_r) ** 2)) + (pose.z - s.z_r) ** 2
    d_ed = float(np.sum((pose.q - s.q_d) ** 2)) + pose.z ** 2
    return d_se, d_re, d_ed


def link_gains(s: Scenario, pose: UavPose) -> LinkGains:
    """All five link power gains for one monitor pose."""
    d_se, d_re, d_ed = squared_distances(s, pose)
    return LinkGains(
        h2_se=s.beta0 / d_se,
        h2_sr=s.h2_sr,
        h2_re=s.beta0 / d_re,
        h2_rd=s.h2_rd,
        h2_ed=s.beta0 / d_ed,
    )


def amplification_coeff(s: Scenario) -> float:
    """Relay amplification coefficient K = sqrt(P_R / (sigma^2 + P_S h_SR^2))."""
    return math.sqrt(s.k2)


def snr_destination(s: Scenario, pose: UavPose, p_e: float) -> float:
    """SNR at the destination under jamming power p_e from the given pose."""
    if p_e < 0:
        raise ValueError("jamming power must be nonnegative")
    h2_ed = link_gains(s, pose).h2_ed
    return s.c_sig / (s.d_noise + p_e * h2_ed)


def snr_eavesdropper(s: Scenario, pose: UavPose) -> float:
    """SNR at the monitor, coherent sum of the direct and relayed copies."""
    g = link_gains(s, pose)
    k = math.sqrt(s.k2)
    amp = math.sqrt(g.h2_se) + k * math.sqrt(g.h2_sr) * math.sqrt(g.h2_re)
    return s.p_s * amp ** 2 / ((1.0 + s.k2 * g.h2_re) * s.sigma2)


def rate(gamma: float) -> float:
    """Achievable rate log2(1 + gamma), bits/s/Hz."""
    if gamma < 0:
        raise ValueError("SNR must be nonnegative")
    return math.log2(1.0 + gamma)


def eavesdropping_rate(r_d: float, r_e: float) -> float:
    """Per-slot eavesdropping rate: r_d when surveillance succeeds, else 0."""
    return r_d if r_e >= r_d else 0.0


def rates_along(s: Scenario, plan, p_e) -> tuple[np.ndarray, np.ndarray]:
    """Per-slot destination and monitor rates along a trajectory plan.

    ``plan`` must expose per-slot arrays ``q`` (N+1, 2) and ``z`` (N+1,);
    ``p_e`` is a per-slot jamming power array of matching length.
    """
    q = np.asarray(plan.q, dtype=float)
    z = np.asarray(plan.z, dtype=float)
    p_e = np.asarray(getattr(p_e, "p_e", p_e), dtype=float)
    if not (len(q) == len(z) == len(p_e)):
        raise ValueError("plan and schedule slot counts differ")
    d_ed = np.sum((q - s.q_d) ** 2, axis=1) + z ** 2
    d_se = np.sum((q - s.q_s) ** 2, axis=1) + z ** 2
    d_re = np.sum((q - s.q_r) ** 2, axis=1) + (z - s.z_r) ** 2
    gamma_d = s.c_sig / (s.d_noise + p_e * s.beta0 / d_ed)
    k = math.sqrt(s.k2)
    amp = np.sqrt(s.beta0 / d_se) + k * math.sqrt(s.h2_sr) * np.sqrt(s.beta0 / d_re)
    gamma_e = s.p_s * amp ** 2 / ((1.0 + s.k2 * s.beta0 / d_re) * s.sigma2)
    return np.log2(1.0 + gamma_d), np.log2(1.0 + gamma_e)


def average_er(s: Scenario, plan, sched) -> float:
    """Average eavesdropping rate over all evaluated slots (arithmetic mean)."""
    r_d, r_e = rates_along(s, plan, sched)
    er = np.where(r_e >= r_d, r_d, 0.0)
    return float(np.mean(er))


def induced_radical(v: float, v_0: float) -> float:
    """Induced-power radical sqrt(1 + v^4/(4 v_0^4)) - v^2/(2 v_0^2), in (0, 1]."""
    r2 = v ** 2 / (2.0 * v_0 ** 2)
    return math.sqrt(1.0 + r2 ** 2) - r2


def horizontal_power(v: float, rotor: RotorParams) -> float:
    """Rotary-wing level-flight power at horizontal speed v."""
    if v < 0:
        raise ValueError("speed must be nonnegative")
    blade = rotor.p_0 * (1.0 + 3.0 * v ** 2 / rotor.u_tip ** 2)
    parasite = 0.5 * rotor.d_0 * rotor.rho * rotor.s * rotor.a * v ** 3
    induced = rotor.p_i * math.sqrt(induced_radical(v, rotor.v_0))
    return blade + parasite + induced


def vertical_power(v_z: float, w_weight: float) -> float:
    """Climb power W * v_z for ascending flight; zero when not climbing."""
    return w_weight * v_z if v_z > 0 else 0.0
