"""Sparse linear / mixed-integer linear model container.

An :class:`OptModel` is a plain builder: variables with box bounds and
an optional integrality flag, a linear objective with constant offset,
and named constraint rows with relation <=, = or >=.  Absolute-value
objective terms get the standard epigraph reformulation (auxiliary t
with expr <= t and -expr <= t), which is exact only when the weight
penalizes t, i.e. weight >= 0 under minimization.

Solvers live in :mod:`gridsched.solver`; :func:`export_lp_text` writes
the industry LP text format for interchange with external solvers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidModelError, InvalidParameterError

MINIMIZE = "min"
MAXIMIZE = "max"

LE = "<="
EQ = "="
GE = ">="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"


@dataclass
class Variable:
    name: str
    lb: float
    ub: float
    integer: bool


@dataclass
class Constraint:
    name: str
    coeffs: dict[int, float]
    relation: str
    rhs: float


@dataclass
class Solution:
    """Solver output: primal values indexed like ``model.variables``.

    ``duals`` (one per constraint row) and ``dual_objective`` are filled
    by the LP solver only.  Sign convention: a dual value is the rate of
    change of the optimal objective per unit increase of the row's
    right-hand side.
    """

    status: str
    objective: float | None = None
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    dual_objective: float | None = None
    iterations: int = 0
    nodes: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL

    def value(self, var_index: int) -> float:
        return float(self.x[var_index])


class OptModel:
    """Mutable LP/MILP under construction.  Single-writer; solving never mutates it."""

    def __init__(self, sense: str = MINIMIZE, name: str = "model"):
        if sense not in (MINIMIZE, MAXIMIZE):
            raise InvalidParameterError("sense must be 'min' or 'max'")
        self.sense = sense
        self.name = name
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.objective: dict[int, float] = {}
        self.objective_constant: float = 0.0
        self._var_names: set[str] = set()
        self._con_names: set[str] = set()

    # -- construction -------------------------------------------------

    def add_var(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = math.inf,
        integer: bool = False,
    ) -> int:
        if name in self._var_names:
            raise InvalidParameterError(f"duplicate variable name {name!r}")
        if lb > ub:
            raise InvalidParameterError(f"variable {name!r} has lb > ub")
        self._var_names.add(name)
        self.variables.append(Variable(name, float(lb), float(ub), bool(integer)))
        return len(self.variables) - 1

    def add_constraint(self, name: str, coeffs: dict[int, float], relation: str, rhs: float) -> int:
        if relation not in (LE, EQ, GE):
            raise InvalidParameterError(f"unknown relation {relation!r}")
        if name in self._con_names:
            raise InvalidParameterError(f"duplicate constraint name {name!r}")
        nvars = len(self.variables)
        for j in coeffs:
            if not 0 <= j < nvars:
                raise InvalidParameterError(f"constraint {name!r} references unknown variable {j}")
        self._con_names.add(name)
        clean = {int(j): float(v) for j, v in coeffs.items() if v != 0.0}
        self.constraints.append(Constraint(name, clean, relation, float(rhs)))
        return len(self.constraints) - 1

    def set_objective_coeff(self, var: int, coeff: float) -> None:
        if coeff == 0.0:
            self.objective.pop(var, None)
        else:
            self.objective[var] = float(coeff)

    def add_objective_term(self, var: int, coeff: float) -> None:
        new = self.objective.get(var, 0.0) + float(coeff)
        self.set_objective_coeff(var, new)

    def add_abs_term(self, expr: dict[int, float], weight: float, constant: float = 0.0, name: str | None = None) -> int:
        """Penalize |expr + constant| with ``weight`` via the epigraph trick.

        Returns the auxiliary variable's index so callers can read the
        absolute value at the optimum.  The reformulation is exact only
        for penalized absolute values, hence weight >= 0.
        """
        if weight < 0.0:
            raise InvalidParameterError("abs-term weight must be non-negative")
        k = len(self.variables)
        base = name or f"abs{k}"
        t = self.add_var(f"{base}_t", lb=0.0)
        up = dict(expr)
        up[t] = up.get(t, 0.0) - 1.0
        self.add_constraint(f"{base}_ub", up, LE, -constant)
        dn = {j: -v for j, v in expr.items()}
        dn[t] = dn.get(t, 0.0) - 1.0
        self.add_constraint(f"{base}_lb", dn, LE, constant)
        self.add_objective_term(t, weight if self.sense == MINIMIZE else -weight)
        return t

    # -- introspection ------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    @property
    def integer_indices(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.integer]

    def dense_data(self):
        """(c, A, relations, b, lb, ub) as numpy arrays, minimization-agnostic."""
        n = len(self.variables)
        m = len(self.constraints)
        c = np.zeros(n)
        for j, v in self.objective.items():
            c[j] = v
        A = np.zeros((m, n))
        b = np.zeros(m)
        rel = []
        for i, con in enumerate(self.constraints):
            for j, v in con.coeffs.items():
                A[i, j] = v
            b[i] = con.rhs
            rel.append(con.relation)
        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        return c, A, rel, b, lb, ub


_NAME_RE = re.compile(r"[^A-Za-z0-9_]")


def _sanitize_names(raw_names: list[str]) -> list[str]:
    out: list[str] = []
    seen: set[str] = set()
    for raw in raw_names:
        name = _NAME_RE.sub("_", raw)
        if not name or not (name[0].isalpha()):
            name = "v_" + name
        base = name
        k = 2
        while name in seen:
            name = f"{base}_{k}"
            k += 1
        seen.add(name)
        out.append(name)
    return out


def _num(x: float) -> str:
    return f"{x:.12g}"


def _expr_text(coeffs: dict[int, float], names: list[str]) -> str:
    parts: list[str] = []
    for j in sorted(coeffs):
        v = coeffs[j]
        sign = "-" if v < 0 else "+"
        if not parts and sign == "+":
            parts.append(f"{_num(v)} {names[j]}")
        else:
            parts.append(f"{sign} {_num(abs(v))} {names[j]}")
    return " ".join(parts) if parts else "0 " + (names[0] if names else "x")


def export_lp_text(model: OptModel) -> str:
    """Serialize to the industry LP text format.

    Deterministic: declaration order, names sanitized to [A-Za-z0-9_],
    coefficients with 12 significant digits.
    """
    for j, v in model.objective.items():
        if not math.isfinite(v):
            raise InvalidModelError(f"non-finite objective coefficient on variable {j}")
    if not math.isfinite(model.objective_constant):
        raise InvalidModelError("non-finite objective constant")
    for con in model.constraints:
        if not math.isfinite(con.rhs) or any(not math.isfinite(v) for v in con.coeffs.values()):
            raise InvalidModelError(f"non-finite data in constraint {con.name!r}")

    vnames = _sanitize_names([v.name for v in model.variables])
    cnames = _sanitize_names([c.name for c in model.constraints])

    lines: list[str] = []
    lines.append("Maximize" if model.sense == MAXIMIZE else "Minimize")
    obj = _expr_text(model.objective, vnames) if model.objective else ""
    if model.objective_constant:
        const = model.objective_constant
        tail = f"+ {_num(const)}" if const > 0 else f"- {_num(-const)}"
        obj = f"{obj} {tail}".strip() if obj else _num(const)
    if not obj:
        obj = "0"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    rel_map = {LE: "<=", EQ: "=", GE: ">="}
    for con, cname in zip(model.constraints, cnames):
        lines.append(f" {cname}: {_expr_text(con.coeffs, vnames)} {rel_map[con.relation]} {_num(con.rhs)}")
    lines.append("Bounds")
    binaries: list[str] = []
    generals: list[str] = []
    for var, vname in zip(model.variables, vnames):
        if var.integer and var.lb == 0.0 and var.ub == 1.0:
            binaries.append(vname)
            continue
        if var.integer:
            generals.append(vname)
        if var.lb == 0.0 and var.ub == math.inf:
            continue  # LP-format default bound
        if var.lb == -math.inf and var.ub == math.inf:
            lines.append(f" {vname} free")
        elif var.ub == math.inf:
            lines.append(f" {vname} >= {_num(var.lb)}")
        elif var.lb == -math.inf:
            lines.append(f" {vname} <= {_num(var.ub)}")
        else:
            lines.append(f" {_num(var.lb)} <= {vname} <= {_num(var.ub)}")
    if generals:
        lines.append("General")
        for vname in generals:
            lines.append(f" {vname}")
    if binaries:
        lines.append("Binary")
        for vname in binaries:
            lines.append(f" {vname}")
    lines.append("End")
    return "\n".join(lines) + "\n"
