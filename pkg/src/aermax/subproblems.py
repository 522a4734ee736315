"""Assembly of the per-iteration convex programs.

Each builder turns the current iterate (trajectory plan, jamming schedule,
expansion state) into a solver-agnostic :class:`ConvexProgram`: named vector
variables, an affine maximize objective over the rate slacks, and constraint
groups drawn from a small set of convex shapes (affine, second-order cone,
squared-norm epigraph, cube epigraph, reciprocal-square, and an affine-minus-
log form for the jamming-power step).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from aermax import sca
from aermax.kinematics import TrajectoryPlan
from aermax.model import LN2, Scenario, rates_along
from aermax.sca import SlackState


# -- affine maps over named vector variables ---------------------------------

@dataclass(frozen=True)
class AffMap:
    """Rows of an affine expression: sum_v terms[v] @ v + const."""

    terms: dict[str, np.ndarray]
    const: np.ndarray

    @property
    def rows(self) -> int:
        return len(self.const)

    def evaluate(self, assign: dict[str, np.ndarray]) -> np.ndarray:
        out = self.const.copy()
        for var, mat in self.terms.items():
            out = out + mat @ np.asarray(assign[var], dtype=float)
        return out

    def __add__(self, other: "AffMap") -> "AffMap":
        terms = {k: v.copy() for k, v in self.terms.items()}
        for var, mat in other.terms.items():
            terms[var] = terms[var] + mat if var in terms else mat.copy()
        return AffMap(terms, self.const + other.const)

    def __sub__(self, other: "AffMap") -> "AffMap":
        return self + (other * -1.0)

    def __mul__(self, scale: float) -> "AffMap":
        return AffMap({k: v * scale for k, v in self.terms.items()}, self.const * scale)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {
            "const": self.const.tolist(),
            "terms": {k: v.tolist() for k, v in sorted(self.terms.items())},
        }

    @classmethod
    def from_json(cls, data: dict) -> "AffMap":
        return cls(
            terms={k: np.asarray(v, dtype=float) for k, v in data["terms"].items()},
            const=np.asarray(data["const"], dtype=float),
        )

    def dump_rows(self) -> list[str]:
        lines = []
        for i in range(self.rows):
            parts = []
            for var in sorted(self.terms):
                row = self.terms[var][i]
                for j in np.nonzero(row)[0]:
                    parts.append(f"{row[j]:+.12e}*{var}[{j}]")
            parts.append(f"{self.const[i]:+.12e}")
            lines.append(" ".join(parts))
        return lines


def _const(vec) -> AffMap:
    return AffMap({}, np.atleast_1d(np.asarray(vec, dtype=float)).copy())


def _sel(var: str, idx, size: int, coef=1.0) -> AffMap:
    """Selection rows: row i picks coef * var[idx[i]]."""
    idx = np.atleast_1d(np.asarray(idx, dtype=int))
    coef = np.broadcast_to(np.asarray(coef, dtype=float), idx.shape)
    mat = np.zeros((len(idx), size))
    mat[np.arange(len(idx)), idx] = coef
    return AffMap({var: mat}, np.zeros(len(idx)))


def _vstack(maps: list[AffMap]) -> AffMap:
    """Stack affine maps rowwise."""
    rows = [m.rows for m in maps]
    offsets = np.concatenate([[0], np.cumsum(rows)])
    total = int(offsets[-1])
    terms: dict[str, np.ndarray] = {}
    for k, am in enumerate(maps):
        for var, mat in am.terms.items():
            if var not in terms:
                terms[var] = np.zeros((total, mat.shape[1]))
            terms[var][offsets[k]:offsets[k + 1]] = mat
    return AffMap(terms, np.concatenate([m.const for m in maps]))


# -- constraint groups --------------------------------------------------------

@dataclass(frozen=True)
class LinEq:
    """expr == 0 rowwise."""
    name: str
    expr: AffMap
    kind = "lin_eq"

    def violations(self, assign) -> np.ndarray:
        return np.abs(self.expr.evaluate(assign))


@dataclass(frozen=True)
class LinIneq:
    """expr <= 0 rowwise."""
    name: str
    expr: AffMap
    kind = "lin_ineq"

    def violations(self, assign) -> np.ndarray:
        return np.maximum(self.expr.evaluate(assign), 0.0)


@dataclass(frozen=True)
class SocIneq:
    """norm over components <= rhs rowwise."""
    name: str
    components: tuple[AffMap, ...]
    rhs: AffMap
    kind = "soc"

    def violations(self, assign) -> np.ndarray:
        stacked = np.stack([c.evaluate(assign) for c in self.components])
        return np.maximum(np.linalg.norm(stacked, axis=0) - self.rhs.evaluate(assign), 0.0)


@dataclass(frozen=True)
class QuadIneq:
    """sum of squared components + offset <= rhs rowwise."""
    name: str
    components: tuple[AffMap, ...]
    offset: np.ndarray
    rhs: AffMap
    kind = "quad"

    def violations(self, assign) -> np.ndarray:
        stacked = np.stack([c.evaluate(assign) for c in self.components])
        return np.maximum(np.sum(stacked ** 2, axis=0) + self.offset - self.rhs.evaluate(assign), 0.0)


@dataclass(frozen=True)
class CubeIneq:
    """epi >= arg^3 rowwise, arg nonnegative."""
    name: str
    arg: AffMap
    epi: AffMap
    kind = "cube"

    def violations(self, assign) -> np.ndarray:
        return np.maximum(self.arg.evaluate(assign) ** 3 - self.epi.evaluate(assign), 0.0)


@dataclass(frozen=True)
class RecipSqIneq:
    """1 / arg^2 <= rhs rowwise, arg positive."""
    name: str
    arg: AffMap
    rhs: AffMap
    kind = "recip_sq"

    def violations(self, assign) -> np.ndarray:
        a = self.arg.evaluate(assign)
        bad = a <= 0
        v = np.where(bad, np.inf, 1.0 / np.where(bad, 1.0, a) ** 2)
        return np.maximum(v - self.rhs.evaluate(assign), 0.0)


@dataclass(frozen=True)
class LogIneq:
    """aff - log2(logarg) <= 0 rowwise, logarg positive."""
    name: str
    aff: AffMap
    logarg: AffMap
    kind = "log"

    def violations(self, assign) -> np.ndarray:
        arg = self.logarg.evaluate(assign)
        bad = arg <= 0
        logs = np.where(bad, -np.inf, np.log(np.where(bad, 1.0, arg)) / LN2)
        return np.maximum(self.aff.evaluate(assign) - logs, 0.0)


_GROUP_KINDS = {
    "lin_eq": LinEq, "lin_ineq": LinIneq, "soc": SocIneq, "quad": QuadIneq,
    "cube": CubeIneq, "recip_sq": RecipSqIneq, "log": LogIneq,
}


def _group_to_json(g) -> dict:
    data = {"kind": g.kind, "name": g.name}
    if g.kind in ("lin_eq", "lin_ineq"):
        data["expr"] = g.expr.to_json()
    elif g.kind == "soc":
        data["components"] = [c.to_json() for c in g.components]
        data["rhs"] = g.rhs.to_json()
    elif g.kind == "quad":
        data["components"] = [c.to_json() for c in g.components]
        data["offset"] = g.offset.tolist()
        data["rhs"] = g.rhs.to_json()
    elif g.kind == "cube":
        data["arg"] = g.arg.to_json()
        data["epi"] = g.epi.to_json()
    elif g.kind == "recip_sq":
        data["arg"] = g.arg.to_json()
        data["rhs"] = g.rhs.to_json()
    elif g.kind == "log":
        data["aff"] = g.aff.to_json()
        data["logarg"] = g.logarg.to_json()
    return data


def _group_from_json(data: dict):
    kind = data["kind"]
    name = data["name"]
    if kind in ("lin_eq", "lin_ineq"):
        return _GROUP_KINDS[kind](name, AffMap.from_json(data["expr"]))
    if kind == "soc":
        return SocIneq(name, tuple(AffMap.from_json(c) for c in data["components"]),
                       AffMap.from_json(data["rhs"]))
    if kind == "quad":
        return QuadIneq(name, tuple(AffMap.from_json(c) for c in data["components"]),
                        np.asarray(data["offset"], dtype=float), AffMap.from_json(data["rhs"]))
    if kind == "cube":
        return CubeIneq(name, AffMap.from_json(data["arg"]), AffMap.from_json(data["epi"]))
    if kind == "recip_sq":
        return RecipSqIneq(name, AffMap.from_json(data["arg"]), AffMap.from_json(data["rhs"]))
    if kind == "log":
        return LogIneq(name, AffMap.from_json(data["aff"]), AffMap.from_json(data["logarg"]))
    raise ValueError(f"unknown constraint kind: {kind}")


@dataclass(frozen=True)
class ConvexProgram:
    """One SCA subproblem: variables, maximize objective, constraint groups."""

    variables: dict[str, int]
    objective: AffMap
    groups: tuple
    label: str = ""

    def evaluate_objective(self, assign) -> float:
        return float(np.sum(self.objective.evaluate(assign)))

    def group_violations(self, assign) -> dict[str, float]:
        return {g.name: float(np.max(g.violations(assign), initial=0.0)) for g in self.groups}

    def max_violation(self, assign) -> float:
        return max(self.group_violations(assign).values(), default=0.0)

    def dump(self) -> str:
        lines = [f"convex-program {self.label}".rstrip()]
        lines.append("variables:")
        for name in sorted(self.variables):
            lines.append(f"  {name}: {self.variables[name]}")
        lines.append("objective (maximize):")
        for row in self.objective.dump_rows():
            lines.append(f"  {row}")
        lines.append("groups:")
        for g in self.groups:
            rows = g.expr.dump_rows() if g.kind in ("lin_eq", "lin_ineq") else None
            header = f"  [{g.kind}] {g.name}"
            if rows is not None:
                op = "== 0" if g.kind == "lin_eq" else "<= 0"
                lines.append(f"{header}: {len(rows)} rows {op}")
                lines.extend(f"    {r}" for r in rows)
            elif g.kind == "soc":
                lines.append(f"{header}: {g.rhs.rows} rows norm(...) <= rhs")
                for i, c in enumerate(g.components):
                    lines.extend(f"    comp{i}: {r}" for r in c.dump_rows())
                lines.extend(f"    rhs: {r}" for r in g.rhs.dump_rows())
            elif g.kind == "quad":
                lines.append(f"{header}: {g.rhs.rows} rows sum_sq(...) + offset <= rhs")
                for i, c in enumerate(g.components):
                    lines.extend(f"    comp{i}: {r}" for r in c.dump_rows())
                lines.append("    offset: " + " ".join(f"{v:+.12e}" for v in g.offset))
                lines.extend(f"    rhs: {r}" for r in g.rhs.dump_rows())
            elif g.kind == "cube":
                lines.append(f"{header}: {g.arg.rows} rows arg^3 <= epi")
                lines.extend(f"    arg: {r}" for r in g.arg.dump_rows())
                lines.extend(f"    epi: {r}" for r in g.epi.dump_rows())
            elif g.kind == "recip_sq":
                lines.append(f"{header}: {g.arg.rows} rows arg^-2 <= rhs")
                lines.extend(f"    arg: {r}" for r in g.arg.dump_rows())
                lines.extend(f"    rhs: {r}" for r in g.rhs.dump_rows())
            elif g.kind == "log":
                lines.append(f"{header}: {g.aff.rows} rows aff - log2(logarg) <= 0")
                lines.extend(f"    aff: {r}" for r in g.aff.dump_rows())
                lines.extend(f"    logarg: {r}" for r in g.logarg.dump_rows())
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        data = {
            "label": self.label,
            "variables": self.variables,
            "objective": self.objective.to_json(),
            "groups": [_group_to_json(g) for g in self.groups],
        }
        return json.dumps(data, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ConvexProgram":
        data = json.loads(text)
        return cls(
            variables={k: int(v) for k, v in data["variables"].items()},
            objective=AffMap.from_json(data["objective"]),
            groups=tuple(_group_from_json(g) for g in data["groups"]),
            label=data.get("label", ""),
        )


# -- iterate bundle -----------------------------------------------------------

@dataclass(frozen=True)
class Iterate:
    """Current BCD point: plan, jamming powers, and the expansion state."""

    plan: TrajectoryPlan
    p_e: np.ndarray
    state: SlackState

    @classmethod
    def from_plan_sched(cls, s: Scenario, plan: TrajectoryPlan, p_e) -> "Iterate":
        p_e = np.asarray(getattr(p_e, "p_e", p_e), dtype=float)
        return cls(plan=plan, p_e=p_e, state=SlackState.from_iterate(s, plan, p_e))


def _bound_rhs_affine(bounds, var_names, m) -> AffMap:
    """Affine map of a per-slot AffineBound list over program variables."""
    const = np.empty(m)
    grads = {v: np.zeros(m) for v in var_names}
    for i, b in enumerate(bounds):
        c = b.constant
        for v, g in b.gradient.items():
            grads[v][i] = g
            c -= g * b.expansion_point[v]
        const[i] = c
    out = _const(const)
    for v in var_names:
        out = out + AffMap({v: np.diag(grads[v])}, np.zeros(m))
    return out


def build_horizontal(s: Scenario, it: Iterate) -> ConvexProgram:
    """Horizontal-trajectory subproblem at the given iterate.

    Decision variables: position/velocity/acceleration components, the three
    rate slacks, the three squared-distance slacks, and the propulsion
    epigraph variables (speed cover, induced radical, squared and cubed
    speed). The eavesdropping-success constraint is not imposed here; the
    rate chain caps the objective credit at the surrogate monitor rate.
    """
    n = s.n
    m = n + 1
    dt = s.delta_t
    z = np.asarray(it.plan.z, dtype=float)
    sizes = {
        "qx": m, "qy": m, "vx": m, "vy": m, "ax": m, "ay": m,
        "s1": m, "s2": m, "s3": m, "d_se": m, "d_re": m, "d_ed": m,
        "upsilon": n, "tau": n, "cube": n, "sq": n,
    }
    steps = np.arange(n)
    all_slots = np.arange(m)
    groups = []

    groups.append(LinEq("endpoints", _vstack([
        _sel("qx", [0, n], m) - _const([s.q_i[0], s.q_f[0]]),
        _sel("qy", [0, n], m) - _const([s.q_i[1], s.q_f[1]]),
    ])))

    for axis, (p, v, a) in {"x": ("qx", "vx", "ax"), "y": ("qy", "vy", "ay")}.items():
        pos = (_sel(p, steps + 1, m) - _sel(p, steps, m)
               - _sel(v, steps, m, dt) - _sel(a, steps, m, 0.5 * dt ** 2))
        groups.append(LinEq(f"dyn_pos_{axis}", pos))
        vel = _sel(v, steps + 1, m) - _sel(v, steps, m) - _sel(a, steps, m, dt)
        groups.append(LinEq(f"dyn_vel_{axis}", vel))
    groups.append(LinEq("boundary_vel", _vstack([
        _sel("vx", [0], m) - _sel("vx", [n], m),
        _sel("vy", [0], m) - _sel("vy", [n], m),
    ])))
    groups.append(LinEq("accel_final", _vstack([
        _sel("ax", [n], m), _sel("ay", [n], m),
    ])))

    groups.append(SocIneq("speed", ( _sel("vx", all_slots, m), _sel("vy", all_slots, m)),
                          _const(np.full(m, s.v_xy_max))))
    groups.append(SocIneq("accel", (_sel("ax", all_slots, m), _sel("ay", all_slots, m)),
                          _const(np.full(m, s.a_xy_max))))
    groups.append(SocIneq("speed_cover", (_sel("vx", steps + 1, m), _sel("vy", steps + 1, m)),
                          _sel("upsilon", steps, n)))

    groups.append(QuadIneq("dist_se",
                           (_sel("qx", all_slots, m) - _const(np.full(m, s.q_s[0])),
                            _sel("qy", all_slots, m) - _const(np.full(m, s.q_s[1]))),
                           z ** 2, _sel("d_se", all_slots, m)))
    groups.append(QuadIneq("dist_re",
                           (_sel("qx", all_slots, m) - _const(np.full(m, s.q_r[0])),
                            _sel("qy", all_slots, m) - _const(np.full(m, s.q_r[1]))),
                           (z - s.z_r) ** 2, _sel("d_re", all_slots, m)))

    ued = [sca.lb_distance_ED(it.plan.q[i], s, z[i]) for i in range(m)]
    ued_aff = _bound_rhs_affine(ued, ("qx", "qy"), m)
    groups.append(LinIneq("dist_ed_ub", _sel("d_ed", all_slots, m) - ued_aff))

    rd_ub = _bound_rhs_affine(sca.ub_RD_horizontal(it.state, s), ("d_ed",), m)
    groups.append(LinIneq("s1_rd", _sel("s1", all_slots, m) - rd_ub))
    re1_lb = _bound_rhs_affine(sca.lb_RE1_horizontal(it.state, s), ("d_re", "d_se"), m)
    groups.append(LinIneq("s2_re1", _sel("s2", all_slots, m) - re1_lb))
    re2_lb = _bound_rhs_affine(sca.lb_RE2_horizontal(it.state, s), ("d_re",), m)
    groups.append(LinIneq("s3_re2", re2_lb - _sel("s3", all_slots, m)))
    groups.append(LinIneq("rate_chain",
                          _sel("s1", all_slots, m) - _sel("s2", all_slots, m)
                          + _sel("s3", all_slots, m)))

    idx = np.arange(n)
    groups.append(CubeIneq("speed_cube", _sel("upsilon", idx, n), _sel("cube", idx, n)))
    groups.append(QuadIneq("speed_sq", (_sel("upsilon", idx, n),), np.zeros(n),
                           _sel("sq", idx, n)))
    tau_lb = _bound_rhs_affine(sca.lb_propulsion_tau(it.state, s.rotor.v_0),
                               ("tau", "upsilon"), n)
    groups.append(RecipSqIneq("induced_recip", _sel("tau", idx, n), tau_lb))

    r = s.rotor
    budget = (_sel("sq", idx, n, 3.0 * r.p_0 / r.u_tip ** 2)
              + _sel("tau", idx, n, r.p_i)
              + _sel("cube", idx, n, 0.5 * r.d_0 * r.rho * r.s * r.a))
    budget_row = AffMap(
        terms={v: mat.sum(axis=0, keepdims=True) / n for v, mat in budget.terms.items()},
        const=np.array([r.p_0 - s.p_hor_ave]))
    groups.append(LinIneq("budget_hor", budget_row))

    objective = AffMap({"s1": np.full((1, m), 1.0 / n)}, np.zeros(1))
    return ConvexProgram(variables=sizes, objective=objective,
                         groups=tuple(groups), label="horizontal")


def build_power(s: Scenario, it: Iterate, slots=None) -> ConvexProgram:
    """Jamming-power subproblem at a fixed trajectory.

    One scalar power per selected slot; the program decouples slotwise. The
    success constraint pairs the affine upper bound of the first rate split
    with the exact concave log term.
    """
    slots = np.arange(s.n + 1) if slots is None else np.atleast_1d(np.asarray(slots, int))
    m = len(slots)
    h2_ed = s.beta0 / it.state.d_ed[slots]
    _, r_e = rates_along(s, it.plan, it.p_e)
    r_e = r_e[slots]
    p0 = it.state.p_e[slots]

    sub = SlackState(
        d_se=it.state.d_se[slots], d_re=it.state.d_re[slots], d_ed=it.state.d_ed[slots],
        z_h=it.state.z_h[slots], z_er=it.state.z_er[slots],
        upsilon=it.state.upsilon, tau=it.state.tau, p_e=p0)
    idx = np.arange(m)
    groups = [
        LinIneq("power_lo", _sel("p_e", idx, m, -1.0)),
        LinIneq("power_hi", _sel("p_e", idx, m) - _const(np.full(m, s.p_e_max))),
    ]
    rd1_ub = _bound_rhs_affine(sca.ub_RD1_power(sub, h2_ed, s), ("p_e",), m)
    groups.append(LogIneq(
        "success",
        rd1_ub - _const(r_e),
        _sel("p_e", idx, m, h2_ed) + _const(np.full(m, s.d_noise)),
    ))
    obj = _bound_rhs_affine(sca.lb_RD_power(sub, h2_ed, s), ("p_e",), m)
    objective = AffMap(
        terms={v: mat.sum(axis=0, keepdims=True) / s.n for v, mat in obj.terms.items()},
        const=np.array([obj.const.sum() / s.n]))
    return ConvexProgram(variables={"p_e": m}, objective=objective,
                         groups=tuple(groups), label="power")


def build_vertical(s: Scenario, it: Iterate) -> ConvexProgram:
    """Vertical-trajectory subproblem at fixed horizontal plan and powers."""
    n = s.n
    m = n + 1
    dt = s.delta_t
    sizes = {
        "z_e": m, "vz": m, "az": m, "s4": m, "s5": m, "s6": m,
        "z_h": m, "z_er": m, "u_abs": n,
    }
    steps = np.arange(n)
    all_slots = np.arange(m)
    groups = []

    groups.append(LinEq("endpoints_alt",
                        _sel("z_e", [0, n], m) - _const([s.h_i, s.h_f])))
    groups.append(LinEq("dyn_alt",
                        _sel("z_e", steps + 1, m) - _sel("z_e", steps, m)
                        - _sel("vz", steps, m, dt) - _sel("az", steps, m, 0.5 * dt ** 2)))
    groups.append(LinEq("dyn_vz",
                        _sel("vz", steps + 1, m) - _sel("vz", steps, m) - _sel("az", steps, m, dt)))
    groups.append(LinEq("boundary_vz", _sel("vz", [0], m) - _sel("vz", [n], m)))
    groups.append(LinEq("az_final", _sel("az", [n], m)))

    groups.append(LinIneq("alt_ceiling", _sel("z_e", all_slots, m) - _const(np.full(m, s.h_max))))
    groups.append(LinIneq("alt_floor", _const(np.full(m, s.h_min)) - _sel("z_e", all_slots, m)))
    groups.append(LinIneq("vz_hi", _sel("vz", all_slots, m) - _const(np.full(m, s.v_z_max))))
    groups.append(LinIneq("vz_lo", _sel("vz", all_slots, m, -1.0) - _const(np.full(m, s.v_z_max))))
    groups.append(LinIneq("az_hi", _sel("az", all_slots, m) - _const(np.full(m, s.a_z_max))))
    groups.append(LinIneq("az_lo", _sel("az", all_slots, m, -1.0) - _const(np.full(m, s.a_z_max))))

    bounds = sca.bounds_vertical(it.state, s, it.plan)
    rd_ub = _bound_rhs_affine(bounds["rd_ub"], ("z_h",), m)
    groups.append(LinIneq("s4_rd", _sel("s4", all_slots, m) - rd_ub))
    re1_lb = _bound_rhs_affine(bounds["re1_lb"], ("z_h", "z_er"), m)
    groups.append(LinIneq("s5_re1", _sel("s5", all_slots, m) - re1_lb))
    re2_lb = _bound_rhs_affine(bounds["re2_lb"], ("z_er",), m)
    groups.append(LinIneq("s6_re2", re2_lb - _sel("s6", all_slots, m)))
    groups.append(LinIneq("rate_chain",
                          _sel("s4", all_slots, m) - _sel("s5", all_slots, m)
                          + _sel("s6", all_slots, m)))

    zsq_lb = _bound_rhs_affine(bounds["zsq_lb"], ("z_e",), m)
    groups.append(LinIneq("z_h_ub", _sel("z_h", all_slots, m) - zsq_lb))
    groups.append(QuadIneq("z_er_cover",
                           (_sel("z_e", all_slots, m) - _const(np.full(m, s.z_r)),),
                           np.zeros(m), _sel("z_er", all_slots, m)))

    idx = np.arange(n)
    groups.append(LinIneq("abs_pos", _sel("vz", steps + 1, m) - _sel("u_abs", idx, n)))
    groups.append(LinIneq("abs_neg", _sel("vz", steps + 1, m, -1.0) - _sel("u_abs", idx, n)))
    groups.append(LinIneq("budget_ver", AffMap(
        terms={"u_abs": np.full((1, n), s.w_weight / n)},
        const=np.array([-s.p_ver_ave]))))

    objective = AffMap({"s4": np.full((1, m), 1.0 / n)}, np.zeros(1))
    return ConvexProgram(variables=sizes, objective=objective,
                         groups=tuple(groups), label="vertical")


# -- reference assignments (self-feasibility, warm starts, tests) -------------

def horizontal_assignment(s: Scenario, it: Iterate) -> dict[str, np.ndarray]:
    """Variable assignment matching the iterate, slacks set tight."""
    plan = it.plan
    st = it.state
    re1 = [b(**b.expansion_point) for b in sca.lb_RE1_horizontal(st, s)]
    re2 = [b(**b.expansion_point) for b in sca.lb_RE2_horizontal(st, s)]
    rd = [b(**b.expansion_point) for b in sca.ub_RD_horizontal(st, s)]
    s2 = np.asarray(re1)
    s3 = np.asarray(re2)
    s1 = np.minimum(np.asarray(rd), s2 - s3)
    return {
        "qx": plan.q[:, 0].copy(), "qy": plan.q[:, 1].copy(),
        "vx": plan.v_xy[:, 0].copy(), "vy": plan.v_xy[:, 1].copy(),
        "ax": plan.a_xy[:, 0].copy(), "ay": plan.a_xy[:, 1].copy(),
        "s1": s1, "s2": s2, "s3": s3,
        "d_se": st.d_se.copy(), "d_re": st.d_re.copy(), "d_ed": st.d_ed.copy(),
        "upsilon": st.upsilon.copy(), "tau": st.tau.copy(),
        "cube": st.upsilon ** 3, "sq": st.upsilon ** 2,
    }


def vertical_assignment(s: Scenario, it: Iterate) -> dict[str, np.ndarray]:
    plan = it.plan
    bounds = sca.bounds_vertical(it.state, s, plan)
    s5 = np.asarray([b(**b.expansion_point) for b in bounds["re1_lb"]])
    s6 = np.asarray([b(**b.expansion_point) for b in bounds["re2_lb"]])
    s4 = np.minimum(np.asarray([b(**b.expansion_point) for b in bounds["rd_ub"]]), s5 - s6)
    return {
        "z_e": plan.z.copy(), "vz": plan.v_z.copy(), "az": plan.a_z.copy(),
        "s4": s4, "s5": s5, "s6": s6,
        "z_h": it.state.z_h.copy(), "z_er": it.state.z_er.copy(),
        "u_abs": np.abs(plan.v_z[1:]),
    }
