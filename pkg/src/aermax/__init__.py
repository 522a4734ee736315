"""Aerial monitor trajectory and jamming-power optimization toolkit."""

from aermax.model import (
    LinkGains,
    RotorParams,
    Scenario,
    UavPose,
    scenario_from_dict,
)

__all__ = [
    "LinkGains",
    "RotorParams",
    "Scenario",
    "UavPose",
    "scenario_from_dict",
]

__version__ = "0.1.0"
