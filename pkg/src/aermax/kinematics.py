"""Slot-discretized trajectory state, feasibility checks, and initialization.

A plan holds N+1 per-slot samples (n = 0..N) of horizontal position,
altitude, velocity, and acceleration. Controls act on the N steps between
samples; the acceleration entry at n = N is unused by the dynamics and is
kept at zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from aermax.model import Scenario, horizontal_power, vertical_power

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class TrajectoryPlan:
    """Per-slot monitor state: q (N+1, 2), z, v_xy (N+1, 2), v_z, a_xy, a_z."""

    q: np.ndarray
    z: np.ndarray
    v_xy: np.ndarray
    v_z: np.ndarray
    a_xy: np.ndarray
    a_z: np.ndarray

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        m = len(self.q)
        shapes = {
            "q": (m, 2), "z": (m,), "v_xy": (m, 2),
            "v_z": (m,), "a_xy": (m, 2), "a_z": (m,),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ValueError(f"plan field {name} has shape {got}, expected {want}")

    @property
    def n_slots(self) -> int:
        """Number of steps N; arrays hold N+1 samples."""
        return len(self.q) - 1

    def speeds(self) -> np.ndarray:
        return np.linalg.norm(self.v_xy, axis=1)


@dataclass(frozen=True)
class Violation:
    constraint: str
    slot: int | None
    magnitude: float


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]

    KINEMATIC = ("dynamics_pos", "dynamics_vel", "boundary_vel",
                 "dynamics_alt", "dynamics_vz", "boundary_vz",
                 "speed", "accel", "vspeed", "vaccel", "altitude")

    def ok(self, categories=None) -> bool:
        if categories is None:
            return not self.violations
        return not [v for v in self.violations if v.constraint in categories]

    def by_constraint(self, name: str) -> list[Violation]:
        return [v for v in self.violations if v.constraint == name]


def initial_trajectory(s: Scenario, mode: str = "3d") -> TrajectoryPlan:
    """Straight-line initial plan with constant velocity and zero acceleration.

    Sample n sits at fraction n/(N+1) of the segment, so the final sample
    stops one interior step short of the target endpoints; the first
    trajectory solve restores the endpoint equalities exactly.
    """
    n = s.n
    frac = np.arange(n + 1) / (n + 1)
    q = s.q_i[None, :] + frac[:, None] * (s.q_f - s.q_i)[None, :]
    v = np.tile((s.q_f - s.q_i) / ((n + 1) * s.delta_t), (n + 1, 1))
    a = np.zeros((n + 1, 2))
    if mode == "3d":
        z = s.h_i + frac * (s.h_f - s.h_i)
        vz = np.full(n + 1, (s.h_f - s.h_i) / ((n + 1) * s.delta_t))
    else:
        z = np.full(n + 1, s.z_e_fixed)
        vz = np.zeros(n + 1)
    az = np.zeros(n + 1)
    return TrajectoryPlan(q=q, z=z, v_xy=v, v_z=vz, a_xy=a, a_z=az)


def check_feasibility(s: Scenario, plan: TrajectoryPlan, mode: str = "3d",
                      tol: float = DEFAULT_TOL) -> FeasibilityReport:
    """Report every violated motion, altitude, and budget constraint.

    Equality constraints use absolute tolerance ``tol`` in SI units. Budget
    checks average the propulsion curves over slots 1..N.
    """
    n = plan.n_slots
    dt = s.delta_t
    out: list[Violation] = []

    def flag(name, slot, mag):
        if mag > tol:
            out.append(Violation(name, slot, float(mag)))

    flag("endpoint", 0, np.linalg.norm(plan.q[0] - s.q_i))
    flag("endpoint", n, np.linalg.norm(plan.q[n] - s.q_f))
    for i in range(n):
        pos_res = plan.q[i] + plan.v_xy[i] * dt + 0.5 * plan.a_xy[i] * dt ** 2 - plan.q[i + 1]
        flag("dynamics_pos", i, np.linalg.norm(pos_res))
        vel_res = plan.v_xy[i] + plan.a_xy[i] * dt - plan.v_xy[i + 1]
        flag("dynamics_vel", i, np.linalg.norm(vel_res))
    flag("boundary_vel", None, np.linalg.norm(plan.v_xy[0] - plan.v_xy[n]))
    speeds = plan.speeds()
    accels = np.linalg.norm(plan.a_xy, axis=1)
    for i in range(n + 1):
        flag("speed", i, speeds[i] - s.v_xy_max)
        flag("accel", i, accels[i] - s.a_xy_max)
    hor = np.array([horizontal_power(v, s.rotor) for v in speeds[1:]])
    flag("budget_hor", None, float(np.mean(hor)) - s.p_hor_ave)

    if mode == "3d":
        flag("endpoint_alt", 0, abs(plan.z[0] - s.h_i))
        flag("endpoint_alt", n, abs(plan.z[n] - s.h_f))
        for i in range(n):
            flag("dynamics_alt", i,
                 abs(plan.z[i] + plan.v_z[i] * dt + 0.5 * plan.a_z[i] * dt ** 2 - plan.z[i + 1]))
            flag("dynamics_vz", i, abs(plan.v_z[i] + plan.a_z[i] * dt - plan.v_z[i + 1]))
        flag("boundary_vz", None, abs(plan.v_z[0] - plan.v_z[n]))
        for i in range(n + 1):
            flag("vspeed", i, abs(plan.v_z[i]) - s.v_z_max)
            flag("vaccel", i, abs(plan.a_z[i]) - s.a_z_max)
            flag("altitude", i, max(s.h_min - plan.z[i], plan.z[i] - s.h_max))
        ver = np.array([vertical_power(abs(vz), s.w_weight) for vz in plan.v_z[1:]])
        flag("budget_ver", None, float(np.mean(ver)) - s.p_ver_ave)
    else:
        for i in range(n + 1):
            flag("altitude", i, abs(plan.z[i] - s.z_e_fixed))

    return FeasibilityReport(violations=tuple(out))


_CSV_COLUMNS = ("n", "t", "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az")


def plan_to_csv(plan: TrajectoryPlan, path, delta_t: float) -> None:
    """Write the plan as one CSV row per slot."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for i in range(plan.n_slots + 1):
            writer.writerow([
                i, repr(i * delta_t),
                repr(float(plan.q[i, 0])), repr(float(plan.q[i, 1])), repr(float(plan.z[i])),
                repr(float(plan.v_xy[i, 0])), repr(float(plan.v_xy[i, 1])), repr(float(plan.v_z[i])),
                repr(float(plan.a_xy[i, 0])), repr(float(plan.a_xy[i, 1])), repr(float(plan.a_z[i])),
            ])


def plan_from_csv(path) -> TrajectoryPlan:
    """Load a plan previously written by :func:`plan_to_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != _CSV_COLUMNS:
            raise ValueError(f"unexpected trajectory CSV header: {header}")
        rows = [[float(v) for v in row] for row in reader]
    arr = np.asarray(rows)
    return TrajectoryPlan(
        q=arr[:, 2:4], z=arr[:, 4], v_xy=arr[:, 5:7], v_z=arr[:, 7],
        a_xy=arr[:, 8:10], a_z=arr[:, 10],
    )
