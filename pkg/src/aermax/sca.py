"""First-order surrogate bounds used inside each convex subproblem.

Every bound is an affine tangent of the original rate/power expression at
the current iterate: it matches the original value exactly at the expansion
point and its gradient matches the analytic partial derivatives. Lower
bounds of convex originals hold globally; upper bounds of concave originals
likewise.

Also provides the numerical convexity checker for the two-variable
log-composite family log2(c1 + c2/x + c3/y + c4/sqrt(xy)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from aermax.model import LN2, Scenario, induced_radical

# Expansion distances are floored here (m^2) to keep the surrogate
# coefficients finite under degenerate geometry.
DIST_FLOOR = 1.0


@dataclass(frozen=True)
class AffineBound:
    """Affine one-sided bound, tangent to the bounded expression.

    Evaluates as constant + gradient . (values - expansion_point); at the
    expansion point it equals the original function exactly.
    """

    constant: float
    gradient: dict[str, float]
    expansion_point: dict[str, float]
    sense: str  # "lower" | "upper"

    def __call__(self, **values: float) -> float:
        acc = self.constant
        for name, g in self.gradient.items():
            acc += g * (values[name] - self.expansion_point[name])
        return acc


@dataclass(frozen=True)
class SlackState:
    """Per-slot expansion point of one BCD iterate.

    Squared-distance slacks are the true distances of the iterate (floored),
    the altitude slacks are z^2 and (z - z_R)^2, and (upsilon, tau) are the
    speed magnitude and the induced-power radical root for slots 1..N.
    """

    d_se: np.ndarray      # N+1
    d_re: np.ndarray      # N+1
    d_ed: np.ndarray      # N+1
    z_h: np.ndarray       # N+1
    z_er: np.ndarray      # N+1
    upsilon: np.ndarray   # N (slots 1..N)
    tau: np.ndarray       # N (slots 1..N)
    p_e: np.ndarray       # N+1

    @classmethod
    def from_iterate(cls, s: Scenario, plan, sched) -> "SlackState":
        q = np.asarray(plan.q, dtype=float)
        z = np.asarray(plan.z, dtype=float)
        p_e = np.asarray(getattr(sched, "p_e", sched), dtype=float)
        d_se = np.sum((q - s.q_s) ** 2, axis=1) + z ** 2
        d_re = np.sum((q - s.q_r) ** 2, axis=1) + (z - s.z_r) ** 2
        d_ed = np.sum((q - s.q_d) ** 2, axis=1) + z ** 2
        speeds = np.linalg.norm(np.asarray(plan.v_xy, dtype=float), axis=1)[1:]
        tau = np.sqrt([induced_radical(v, s.rotor.v_0) for v in speeds])
        return cls(
            d_se=np.maximum(d_se, DIST_FLOOR),
            d_re=np.maximum(d_re, DIST_FLOOR),
            d_ed=np.maximum(d_ed, DIST_FLOOR),
            z_h=z ** 2,
            z_er=(z - s.z_r) ** 2,
            upsilon=speeds,
            tau=tau,
            p_e=p_e,
        )


def _re1_terms(s: Scenario):
    """Constant factors of the monitor-rate log argument."""
    k2 = s.k2
    c_re = s.beta0 * k2 * (1.0 + s.rho_s * s.beta0 / s.d_sr)
    c_se = s.rho_s * s.beta0
    c_cross = s.rho_s * math.sqrt(4.0 * s.beta0 ** 3 * k2 / s.d_sr)
    return c_re, c_se, c_cross


def re1_value(s: Scenario, d_se: float, d_re: float) -> float:
    """log2 argument form of the first monitor-rate split term."""
    c_re, c_se, c_cross = _re1_terms(s)
    return math.log2(1.0 + c_re / d_re + c_se / d_se + c_cross / math.sqrt(d_se * d_re))


def re1_coefficients(s: Scenario, d_se0: float, d_re0: float):
    """(A1, B1, C1): value of the log argument and its d_RE / d_SE partials.

    The square-root cross term contributes half of its printed magnitude to
    each partial (chain rule on (x y)^{-1/2}).
    """
    if d_se0 <= 0 or d_re0 <= 0:
        raise ValueError("expansion distances must be positive")
    c_re, c_se, c_cross = _re1_terms(s)
    root = math.sqrt(d_se0 * d_re0)
    a1 = 1.0 + c_re / d_re0 + c_se / d_se0 + c_cross / root
    b1 = -c_re / d_re0 ** 2 - 0.5 * c_cross / (root * d_re0)
    c1 = -c_se / d_se0 ** 2 - 0.5 * c_cross / (root * d_se0)
    return a1, b1, c1


def lb_RE1_horizontal(state: SlackState, s: Scenario) -> list[AffineBound]:
    """Per-slot affine lower bound of the first monitor-rate term in
    (d_re, d_se)."""
    out = []
    for d_se0, d_re0 in zip(state.d_se, state.d_re):
        a1, b1, c1 = re1_coefficients(s, d_se0, d_re0)
        out.append(AffineBound(
            constant=math.log2(a1),
            gradient={"d_re": b1 / (LN2 * a1), "d_se": c1 / (LN2 * a1)},
            expansion_point={"d_re": float(d_re0), "d_se": float(d_se0)},
            sense="lower",
        ))
    return out


def lb_distance_ED(q_expansion, s: Scenario, z_e: float) -> AffineBound:
    """Affine-in-position lower bound of the squared monitor-destination
    distance, tangent at the expansion position."""
    q0 = np.asarray(q_expansion, dtype=float)
    diff = q0 - s.q_d
    const = float(np.sum(diff ** 2)) + z_e ** 2
    return AffineBound(
        constant=const,
        gradient={"qx": 2.0 * float(diff[0]), "qy": 2.0 * float(diff[1])},
        expansion_point={"qx": float(q0[0]), "qy": float(q0[1])},
        sense="lower",
    )


def rd_hat_value(s: Scenario, p_e: float, d_ed: float) -> float:
    """Destination rate as a function of the ED squared-distance slack."""
    return math.log2(1.0 + s.c_sig / (s.d_noise + p_e * s.beta0 / d_ed))


def rd_coefficients(s: Scenario, p_e: float, d_ed0: float):
    """(A0, B0): destination-rate log argument and its d_ED partial."""
    if d_ed0 <= 0:
        raise ValueError("expansion distance must be positive")
    jam = p_e * s.beta0 / d_ed0
    a0 = 1.0 + s.c_sig / (s.d_noise + jam)
    b0 = s.c_sig * (p_e * s.beta0 / d_ed0 ** 2) / (s.d_noise + jam) ** 2
    return a0, b0


def ub_RD_horizontal(state: SlackState, s: Scenario) -> list[AffineBound]:
    """Per-slot affine upper bound of the destination rate in d_ed."""
    out = []
    for p_e, d_ed0 in zip(state.p_e, state.d_ed):
        a0, b0 = rd_coefficients(s, p_e, d_ed0)
        out.append(AffineBound(
            constant=math.log2(a0),
            gradient={"d_ed": b0 / (LN2 * a0)},
            expansion_point={"d_ed": float(d_ed0)},
            sense="upper",
        ))
    return out


def re2_value(s: Scenario, d_re: float) -> float:
    return math.log2(1.0 + s.beta0 * s.k2 / d_re)


def re2_coefficients(s: Scenario, d_re0: float):
    """(A2, B2): relayed-noise rate log argument and its d_RE partial."""
    if d_re0 <= 0:
        raise ValueError("expansion distance must be positive")
    a2 = 1.0 + s.beta0 * s.k2 / d_re0
    b2 = -s.beta0 * s.k2 / d_re0 ** 2
    return a2, b2


def lb_RE2_horizontal(state: SlackState, s: Scenario) -> list[AffineBound]:
    """Per-slot affine lower bound of the second monitor-rate term in d_re."""
    out = []
    for d_re0 in state.d_re:
        a2, b2 = re2_coefficients(s, d_re0)
        out.append(AffineBound(
            constant=math.log2(a2),
            gradient={"d_re": b2 / (LN2 * a2)},
            expansion_point={"d_re": float(d_re0)},
            sense="lower",
        ))
    return out


def lb_propulsion_tau(state: SlackState, v_0: float) -> list[AffineBound]:
    """Per-slot affine lower bound of tau^2 + upsilon^2 / v_0^2, tangent at
    the iterate; used as the RHS of the 1/tau^2 propulsion constraint."""
    out = []
    for tau0, ups0 in zip(state.tau, state.upsilon):
        if tau0 < 0 or ups0 < 0:
            raise ValueError("expansion (tau, upsilon) must be nonnegative")
        out.append(AffineBound(
            constant=tau0 ** 2 + ups0 ** 2 / v_0 ** 2,
            gradient={"tau": 2.0 * tau0, "upsilon": 2.0 * ups0 / v_0 ** 2},
            expansion_point={"tau": float(tau0), "upsilon": float(ups0)},
            sense="lower",
        ))
    return out


def rd_power_value(s: Scenario, p_e: float, h2_ed: float) -> float:
    """Destination rate as a function of jamming power at fixed gains."""
    return math.log2(1.0 + s.c_sig / (s.d_noise + p_e * h2_ed))


def lb_RD_power(state: SlackState, h2_ed: np.ndarray, s: Scenario) -> list[AffineBound]:
    """Per-slot affine lower bound of the destination rate in p_e."""
    out = []
    for p_e0, h2 in zip(state.p_e, h2_ed):
        if p_e0 < 0:
            raise ValueError("expansion jamming power must be nonnegative")
        den = s.d_noise + p_e0 * h2
        a = 1.0 + s.c_sig / den
        b = -s.c_sig * h2 / den ** 2
        out.append(AffineBound(
            constant=math.log2(a),
            gradient={"p_e": b / (LN2 * a)},
            expansion_point={"p_e": float(p_e0)},
            sense="lower",
        ))
    return out


def rd1_value(s: Scenario, p_e: float, h2_ed: float) -> float:
    """First destination-rate split term log2(D + p_e h2_ed + C)."""
    return math.log2(s.d_noise + p_e * h2_ed + s.c_sig)


def rd2_value(s: Scenario, p_e: float, h2_ed: float) -> float:
    """Second destination-rate split term log2(D + p_e h2_ed)."""
    return math.log2(s.d_noise + p_e * h2_ed)


def ub_RD1_power(state: SlackState, h2_ed: np.ndarray, s: Scenario) -> list[AffineBound]:
    """Per-slot affine upper bound of the concave split term in p_e."""
    out = []
    for p_e0, h2 in zip(state.p_e, h2_ed):
        a3 = s.d_noise + p_e0 * h2 + s.c_sig
        out.append(AffineBound(
            constant=math.log2(a3),
            gradient={"p_e": h2 / (LN2 * a3)},
            expansion_point={"p_e": float(p_e0)},
            sense="upper",
        ))
    return out


def re1_vertical_value(s: Scenario, hq_se: float, hq_re: float,
                       z_h: float, z_er: float) -> float:
    """First monitor-rate term through the altitude slacks, at fixed
    horizontal squared distances hq_se, hq_re."""
    return re1_value(s, hq_se + z_h, hq_re + z_er)


def bounds_vertical(state: SlackState, s: Scenario, plan) -> dict[str, list[AffineBound]]:
    """The four per-slot affine bounds of the vertical subproblem.

    Keys: re1_lb and re2_lb in (z_h, z_er), rd_ub in z_h, zsq_lb in z_e.
    The altitude slack z_h feeds the SE and ED distances, z_er feeds the RE
    distance, so the d_SE-partial multiplies z_h and the d_RE-partial
    multiplies z_er.
    """
    q = np.asarray(plan.q, dtype=float)
    z = np.asarray(plan.z, dtype=float)
    hq_se = np.sum((q - s.q_s) ** 2, axis=1)
    hq_re = np.sum((q - s.q_r) ** 2, axis=1)
    hq_ed = np.sum((q - s.q_d) ** 2, axis=1)

    re1_lb, rd_ub, re2_lb, zsq_lb = [], [], [], []
    for i in range(len(q)):
        z_h0 = float(state.z_h[i])
        z_er0 = float(state.z_er[i])
        d_se0 = max(hq_se[i] + z_h0, DIST_FLOOR)
        d_re0 = max(hq_re[i] + z_er0, DIST_FLOOR)
        d_ed0 = max(hq_ed[i] + z_h0, DIST_FLOOR)
        if d_se0 <= 0 or d_re0 <= 0 or d_ed0 <= 0:
            raise ValueError("vertical expansion distances must be positive")

        a4, b4, c4 = re1_coefficients(s, d_se0, d_re0)
        re1_lb.append(AffineBound(
            constant=math.log2(a4),
            gradient={"z_h": c4 / (LN2 * a4), "z_er": b4 / (LN2 * a4)},
            expansion_point={"z_h": z_h0, "z_er": z_er0},
            sense="lower",
        ))

        a5, b5 = rd_coefficients(s, float(state.p_e[i]), d_ed0)
        rd_ub.append(AffineBound(
            constant=math.log2(a5),
            gradient={"z_h": b5 / (LN2 * a5)},
            expansion_point={"z_h": z_h0},
            sense="upper",
        ))

        a6, b6 = re2_coefficients(s, d_re0)
        re2_lb.append(AffineBound(
            constant=math.log2(a6),
            gradient={"z_er": b6 / (LN2 * a6)},
            expansion_point={"z_er": z_er0},
            sense="lower",
        ))

        zsq_lb.append(AffineBound(
            constant=z[i] ** 2,
            gradient={"z_e": 2.0 * z[i]},
            expansion_point={"z_e": float(z[i])},
            sense="lower",
        ))

    return {"re1_lb": re1_lb, "rd_ub": rd_ub, "re2_lb": re2_lb, "zsq_lb": zsq_lb}


# -- convexity checker for f = log2(c1 + c2/x + c3/y + c4/sqrt(xy)) ----------

def lemma_f(c, x: float, y: float) -> float:
    c1, c2, c3, c4 = c
    return math.log2(c1 + c2 / x + c3 / y + c4 / math.sqrt(x * y))


def lemma_grad_x(c, x: float, y: float) -> float:
    """Analytic x-partial of the log composite."""
    c1, c2, c3, c4 = c
    arg = c1 + c2 / x + c3 / y + c4 * x ** -0.5 * y ** -0.5
    return (-c2 * x ** -2 - 0.5 * c4 * x ** -1.5 * y ** -0.5) / (LN2 * arg)


def _fd_hessian(c, x: float, y: float, rel_step: float = 1e-4) -> np.ndarray:
    hx = rel_step * x
    hy = rel_step * y
    f = lambda a, b: lemma_f(c, a, b)
    fxx = (f(x + hx, y) - 2.0 * f(x, y) + f(x - hx, y)) / hx ** 2
    fyy = (f(x, y + hy) - 2.0 * f(x, y) + f(x, y - hy)) / hy ** 2
    fxy = (f(x + hx, y + hy) - f(x + hx, y - hy)
           - f(x - hx, y + hy) + f(x - hx, y - hy)) / (4.0 * hx * hy)
    return np.array([[fxx, fxy], [fxy, fyy]])


def check_lemma1_convexity(c1: float, c2: float, c3: float, c4: float,
                           n_samples: int = 1000, seed: int = 0,
                           box=(0.1, 100.0), tol: float = -1e-8):
    """Sample the positive quadrant and test the finite-difference Hessian.

    Returns (True, None) when both leading principal minors stay above tol
    at every sample, otherwise (False, (x, y)) with the first violator.
    """
    if min(c1, c2, c3) <= 0 or c4 < 0:
        raise ValueError("coefficients must be positive (c4 may be zero)")
    rng = np.random.default_rng(seed)
    c = (c1, c2, c3, c4)
    lo, hi = box
    for _ in range(n_samples):
        x, y = rng.uniform(lo, hi, size=2)
        h = _fd_hessian(c, x, y)
        if h[0, 0] < tol or np.linalg.det(h) < tol:
            return False, (float(x), float(y))
    return True, None
