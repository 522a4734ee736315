import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from aermax.model import Scenario, scenario_from_dict

SCENARIO_DIR = Path(__file__).resolve().parents[1] / "src" / "aermax" / "scenarios"


def load_scenario1() -> Scenario:
    with open(SCENARIO_DIR / "scenario1.json") as fh:
        return scenario_from_dict(json.load(fh))


def load_scenario2() -> Scenario:
    with open(SCENARIO_DIR / "scenario2.json") as fh:
        return scenario_from_dict(json.load(fh))


@pytest.fixture(scope="session")
def scenario1() -> Scenario:
    return load_scenario1()


@pytest.fixture(scope="session")
def scenario2() -> Scenario:
    return load_scenario2()


@pytest.fixture(scope="session")
def scenario1_small(scenario1) -> Scenario:
    """Scenario 1 geometry with a shorter horizon for fast solver tests."""
    return dataclasses.replace(scenario1, t=40.0, n=40)


def exact_straight_plan(s: Scenario, mode: str = "2d"):
    """Straight line with n/N spacing: hits both endpoints, dynamics exact."""
    from aermax.kinematics import TrajectoryPlan

    n = s.n
    frac = np.arange(n + 1) / n
    q = s.q_i[None, :] + frac[:, None] * (s.q_f - s.q_i)[None, :]
    v = np.tile((s.q_f - s.q_i) / (n * s.delta_t), (n + 1, 1))
    if mode == "3d":
        z = s.h_i + frac * (s.h_f - s.h_i)
        vz = np.full(n + 1, (s.h_f - s.h_i) / (n * s.delta_t))
    else:
        z = np.full(n + 1, s.z_e_fixed)
        vz = np.zeros(n + 1)
    return TrajectoryPlan(q=q, z=z, v_xy=v, v_z=vz,
                          a_xy=np.zeros((n + 1, 2)), a_z=np.zeros(n + 1))
