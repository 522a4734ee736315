"""Conic solution of the subproblem programs plus the power-step oracle.

``solve`` translates a :class:`~aermax.subproblems.ConvexProgram` into a
cvxpy model and hands it to an interior-point conic backend. The translation
rescales position-like variables into characteristic units (1e2 m, 1e4 m^2),
normalizes constraint rows, and lowers the cube and reciprocal-square shapes
to second-order cones; all three steps are exact reformulations that keep
the returned SI-unit solution unchanged while keeping the solver's data
range manageable. Primal feasibility of every returned solution is
re-verified against the original program in SI units.

The jamming-power subproblem additionally has an independent closed-form
bisection solver used both as the production power step and as a
cross-check oracle for the generic path.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import cvxpy as cp
import numpy as np

from aermax.model import LN2, Scenario
from aermax.subproblems import AffMap, ConvexProgram

FEAS_TOL = 1e-7
OPT_TOL = 1e-6
BISECT_TOL = 1e-9

# characteristic units for the scaled translation: hectometer positions,
# hectometer-squared distance slacks
_VAR_UNITS = {
    "qx": 1e2, "qy": 1e2, "z_e": 1e2,
    "d_se": 1e4, "d_re": 1e4, "d_ed": 1e4, "z_h": 1e4, "z_er": 1e4,
}


@dataclass(frozen=True)
class SolverTolerances:
    feas_tol: float = FEAS_TOL
    opt_tol: float = OPT_TOL


@dataclass(frozen=True)
class Solution:
    """Solver outcome: values, objective, status, and the primal residual."""

    variables: dict[str, np.ndarray]
    objective: float
    status: str              # optimal | infeasible | max_iter
    residual: float
    solve_time: float


class MalformedProgramError(ValueError):
    pass


def _pick_backend() -> str:
    choice = os.environ.get("AERMAX_SOLVER", "").upper()
    installed = cp.installed_solvers()
    if choice:
        if choice not in installed:
            raise RuntimeError(f"requested backend {choice} is not installed")
        return choice
    for name in ("CLARABEL", "CVXOPT", "SCS"):
        if name in installed:
            return name
    raise RuntimeError("no conic backend available")


def _translate(program: ConvexProgram):
    """Scaled, row-normalized, SOC-lowered cvxpy model of the program."""
    scales = {name: _VAR_UNITS.get(name, 1.0) for name in program.variables}
    cvars = {name: cp.Variable(size, name=name)
             for name, size in program.variables.items()}

    def expr(am: AffMap, rowdiv=None):
        const = am.const if rowdiv is None else am.const / rowdiv
        e = cp.Constant(const)
        for var, mat in am.terms.items():
            if var not in cvars:
                raise MalformedProgramError(f"constraint references unknown variable {var}")
            scaled = mat * scales[var]
            if rowdiv is not None:
                scaled = scaled / rowdiv[:, None]
            e = e + scaled @ cvars[var]
        return e

    def row_norms(ams, consts=()):
        mags = []
        for am in ams:
            per_row = [np.abs(am.const)]
            for var, mat in am.terms.items():
                per_row.append(np.abs(mat * scales[var]).max(axis=1))
            mags.append(np.max(np.stack(per_row), axis=0))
        for c in consts:
            mags.append(np.abs(c))
        return np.maximum(np.max(np.stack(mags), axis=0), 1.0)

    constraints = []
    for g in program.groups:
        if g.kind == "lin_eq":
            constraints.append(expr(g.expr, row_norms([g.expr])) == 0)
        elif g.kind == "lin_ineq":
            constraints.append(expr(g.expr, row_norms([g.expr])) <= 0)
        elif g.kind == "soc":
            rd = row_norms(list(g.components) + [g.rhs])
            stacked = cp.vstack([expr(c, rd) for c in g.components])
            constraints.append(cp.norm(stacked, 2, axis=0) <= expr(g.rhs, rd))
        elif g.kind == "quad":
            rd = row_norms(list(g.components) + [g.rhs], consts=(g.offset,))
            stacked = cp.vstack([expr(c, np.sqrt(rd)) for c in g.components])
            constraints.append(cp.sum(cp.square(stacked), axis=0) + g.offset / rd
                               <= expr(g.rhs, rd))
        elif g.kind == "cube":
            # epi >= arg^3 on arg >= 0, via w >= arg^2 and w^2 <= epi*arg
            u = expr(g.arg)
            t = expr(g.epi)
            w = cp.Variable(g.arg.rows)
            constraints += [
                cp.norm(cp.vstack([2 * u, w - 1]), 2, axis=0) <= w + 1,
                cp.norm(cp.vstack([2 * w, t - u]), 2, axis=0) <= t + u,
                u >= 0,
            ]
        elif g.kind == "recip_sq":
            # 1/arg^2 <= rhs via u*arg >= 1 and rhs >= u^2
            tau = expr(g.arg)
            r = expr(g.rhs)
            u = cp.Variable(g.arg.rows)
            two = np.full(g.arg.rows, 2.0)
            constraints += [
                cp.norm(cp.vstack([two + 0 * u, u - tau]), 2, axis=0) <= u + tau,
                cp.norm(cp.vstack([2 * u, r - 1]), 2, axis=0) <= r + 1,
            ]
        elif g.kind == "log":
            constraints.append(expr(g.aff) - cp.log(expr(g.logarg)) / LN2 <= 0)
        else:
            raise MalformedProgramError(f"unknown constraint kind {g.kind}")

    objective = cp.Maximize(cp.sum(expr(program.objective)))
    return cp.Problem(objective, constraints), cvars, scales


def solve(program: ConvexProgram, tol: SolverTolerances = SolverTolerances()) -> Solution:
    """Solve the program; never raises on infeasibility, only on bad input."""
    problem, cvars, scales = _translate(program)
    backend = _pick_backend()
    max_iters = int(os.environ.get("AERMAX_SOLVER_MAX_ITERS", "400"))
    kwargs = {}
    if backend == "CLARABEL":
        kwargs = {"max_iter": max_iters}
    elif backend == "SCS":
        kwargs = {"max_iters": max(max_iters * 250, 20000), "eps": 1e-8}
    start = time.perf_counter()
    try:
        problem.solve(solver=backend, **kwargs)
    except cp.error.SolverError as exc:
        raise MalformedProgramError(str(exc)) from exc
    elapsed = time.perf_counter() - start

    raw = problem.status
    if raw in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        return Solution(variables={}, objective=math.nan, status="infeasible",
                        residual=math.inf, solve_time=elapsed)
    if raw in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
        raise MalformedProgramError("program is unbounded")
    values = {}
    for name, var in cvars.items():
        if var.value is None:
            return Solution(variables={}, objective=math.nan, status="max_iter",
                            residual=math.inf, solve_time=elapsed)
        values[name] = np.atleast_1d(np.asarray(var.value, dtype=float)) * scales[name]
    residual = program.max_violation(values)
    status = "optimal" if raw == cp.OPTIMAL and residual <= tol.feas_tol else "max_iter"
    return Solution(variables=values, objective=program.evaluate_objective(values),
                    status=status, residual=residual, solve_time=elapsed)


def solve_power_bisection(s: Scenario, gains, r_e: float, p_e_prev: float,
                          tol: float = BISECT_TOL) -> tuple[float, bool]:
    """Smallest feasible jamming power for one slot, by bisection.

    The surrogate objective decreases in the jamming power, so the optimum
    sits at the smallest power satisfying the success constraint
    ub(R_D1) - R_D2 <= r_e. Returns (power, feasible); an infeasible slot
    reports the power cap with feasible=False.
    """
    h2_ed = float(getattr(gains, "h2_ed", gains))
    if h2_ed <= 0:
        raise ValueError("slot gain must be positive")
    a3 = s.d_noise + p_e_prev * h2_ed + s.c_sig
    slope = h2_ed / (LN2 * a3)

    def margin(p: float) -> float:
        ub_rd1 = math.log2(a3) + slope * (p - p_e_prev)
        return ub_rd1 - math.log2(s.d_noise + p * h2_ed) - r_e

    if margin(0.0) <= 0.0:
        return 0.0, True
    # stationary point of the constraint surface; the margin decreases up to it
    p_knee = p_e_prev + s.c_sig / h2_ed
    hi = min(s.p_e_max, p_knee)
    if margin(hi) > 0.0:
        return s.p_e_max, False
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return hi, True


@dataclass(frozen=True)
class KktReport:
    """Primal feasibility summary of one solution."""

    per_group: dict[str, float]
    max_violation: float
    objective: float
    stationarity: float | None = None

    def to_json(self) -> dict:
        return {
            "per_group": {k: self.per_group[k] for k in sorted(self.per_group)},
            "max_violation": self.max_violation,
            "objective": self.objective,
            "stationarity": self.stationarity,
        }


def kkt_residuals(program: ConvexProgram, sol: Solution) -> KktReport:
    """Per-constraint violation magnitudes for a candidate solution."""
    per_group = program.group_violations(sol.variables)
    return KktReport(
        per_group=per_group,
        max_violation=max(per_group.values(), default=0.0),
        objective=program.evaluate_objective(sol.variables),
    )
