"""Embedded LP and MILP solvers for desk-scale instances.

The LP solver is a dense two-phase revised simplex over general box
bounds: inequality rows get bounded slacks, phase 1 starts from a basis
of artificial columns and minimizes total infeasibility, phase 2 prices
with Dantzig's rule (most negative effective reduced cost, lowest index
on ties) and falls back to Bland's least-index rule after 1000
consecutive degenerate pivots to guarantee termination.  The basis
inverse is maintained by product-form updates with periodic
refactorization.

The MILP solver is best-bound branch and bound over LP relaxations,
branching on the most fractional integer variable (lowest index on
ties).  A rounding heuristic (fix integers to rounded or rounded-up
values and re-solve the continuous restriction) runs at the root and
periodically to seed incumbents.

``enumerate_oracle`` exhaustively enumerates integer assignments and is
the test-suite ground truth for small models.
"""

from __future__ import annotations

import heapq
import itertools
import math

import numpy as np
from scipy.linalg.blas import dger

try:  # simplex pivots are small matvecs; BLAS thread fan-out only adds latency,
    # so pin the BLAS pools to one thread for the whole process
    import threadpoolctl

    threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # pragma: no cover
    pass

from .errors import InvalidParameterError, WrongSolverError
from .optmodel import (
    EQ,
    GE,
    INFEASIBLE,
    ITERATION_LIMIT,
    LE,
    MAXIMIZE,
    OPTIMAL,
    UNBOUNDED,
    OptModel,
    Solution,
)

_BASIC, _AT_LB, _AT_UB, _FREE = 0, 1, 2, 3

_PIV_TOL = 1e-10
_DEGEN_TOL = 1e-11
_BLAND_TRIGGER = 1000
_REFACTOR_EVERY = 400


class _Simplex:
    """Bounded-variable simplex over equality form A z = b, lb <= z <= ub.

    ``slack_cols`` maps each row to its +1-coefficient slack column so
    the crash start can put feasible slacks directly into the basis;
    artificial columns are created only for rows whose slack bounds
    cannot absorb the initial residual.
    """

    def __init__(self, A, b, lb, ub, slack_cols, feas_tol, opt_tol):
        self.m, n = A.shape
        m = self.m
        # layout: [structural+slack columns | m artificial columns]
        self.n_real = n
        self.N = n + m
        self.b = b.astype(float)
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol

        x = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        vstat = np.where(
            np.isfinite(lb), _AT_LB, np.where(np.isfinite(ub), _AT_UB, _FREE)
        ).astype(np.int8)

        resid = b - A @ x
        sign = np.where(resid >= 0.0, 1.0, -1.0)
        A_art = np.zeros((m, m))
        A_art[np.arange(m), np.arange(m)] = sign
        # Fortran order: the hot loop pulls single columns out of A
        self.A = np.asfortranarray(np.hstack([A, A_art]))
        self.lb = np.concatenate([lb, np.zeros(m)])
        self.ub = np.concatenate([ub, np.full(m, np.inf)])
        self.x = np.concatenate([x, np.zeros(m)])
        self.vstat = np.concatenate([vstat, np.full(m, _AT_LB, dtype=np.int8)])
        self.basis = np.empty(m, dtype=int)
        self.Binv = np.zeros((m, m), order="F")

        for i in range(m):
            j = slack_cols[i]
            if j >= 0 and lb[j] - feas_tol <= resid[i] <= ub[j] + feas_tol:
                # slack absorbs the residual: no artificial needed
                self.basis[i] = j
                self.x[j] = resid[i]
                self.vstat[j] = _BASIC
                self.Binv[i, i] = 1.0
                self.ub[n + i] = 0.0  # pin the unused artificial
            else:
                art = n + i
                self.basis[i] = art
                self.x[art] = abs(resid[i])
                self.vstat[art] = _BASIC
                self.Binv[i, i] = sign[i]

        self.bland = False
        self._degen_run = 0
        self.iterations = 0

    # -- maintenance ----------------------------------------------------

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.asfortranarray(np.linalg.inv(B))
        except np.linalg.LinAlgError:
            return
        nb_x = self.x.copy()
        nb_x[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.A @ nb_x)

    def residual(self) -> float:
        return float(np.max(np.abs(self.A @ self.x - self.b), initial=0.0))

    # -- core loop ------------------------------------------------------

    def _rebuild_caches(self, c):
        """Basis-aligned working arrays, refreshed at phase entry and refactor."""
        self._cB = c[self.basis]
        self._lbB = self.lb[self.basis]
        self._ubB = self.ub[self.basis]
        self._xB = self.x[self.basis].astype(float)
        vs = self.vstat[: self.n_real]
        open_b = self.lb[: self.n_real] < self.ub[: self.n_real]
        sgn = np.zeros(self.n_real)
        sgn[(vs == _AT_LB) & open_b] = -1.0
        sgn[(vs == _AT_UB) & open_b] = 1.0
        self._sgn = sgn
        self._free_idx = list(np.flatnonzero(vs == _FREE))

    def _sync_x(self):
        self.x[self.basis] = self._xB

    def iterate(self, c, max_iter):
        """Run simplex pivots for cost vector ``c``; returns a status string.

        Pricing only scans real (structural + slack) columns: artificial
        columns are never eligible to enter -- they start basic or pinned.
        """
        A, lb, ub = self.A, self.lb, self.ub
        nr = self.n_real
        A_real = A[:, :nr]
        c_real = c[:nr]
        self._rebuild_caches(c)
        while True:
            if self.iterations >= max_iter:
                self._sync_x()
                return ITERATION_LIMIT
            self.iterations += 1
            if self.iterations % _REFACTOR_EVERY == 0:
                self._sync_x()
                self._refactor()
                self._rebuild_caches(c)

            y = self.Binv.T @ self._cB
            d = c_real - A_real.T @ y

            # eligibility score: -d at lower bound, +d at upper, |d| if free
            score = d * self._sgn
            for fj in self._free_idx:
                score[fj] = abs(d[fj])

            if self.bland:
                hits = score > self.opt_tol
                if not hits.any():
                    self._sync_x()
                    return OPTIMAL
                j = int(np.argmax(hits))
            else:
                j = int(np.argmax(score))
                if score[j] <= self.opt_tol:
                    self._sync_x()
                    return OPTIMAL

            if self.vstat[j] == _AT_LB:
                dirj = 1.0
            elif self.vstat[j] == _AT_UB:
                dirj = -1.0
            else:
                dirj = 1.0 if d[j] < 0.0 else -1.0

            w = self.Binv @ A[:, j]
            delta = -dirj * w

            xB = self._xB
            ratios = np.full(self.m, np.inf)
            pos = delta > _PIV_TOL
            neg = delta < -_PIV_TOL
            with np.errstate(invalid="ignore"):
                ratios[pos] = (self._ubB[pos] - xB[pos]) / delta[pos]
                ratios[neg] = (xB[neg] - self._lbB[neg]) / (-delta[neg])
            ratios[np.isnan(ratios)] = np.inf

            t_block = float(np.min(ratios)) if self.m else np.inf
            span = ub[j] - lb[j]
            t_own = span if np.isfinite(span) else np.inf
            t_star = min(t_block, t_own)
            if not np.isfinite(t_star):
                self._sync_x()
                return UNBOUNDED
            t_star = max(t_star, 0.0)

            if t_star <= _DEGEN_TOL:
                self._degen_run += 1
                if self._degen_run >= _BLAND_TRIGGER:
                    self.bland = True
            else:
                self._degen_run = 0

            if t_own <= t_block:
                # entering variable flips to its opposite bound
                xB += delta * t_star
                self.x[j] = ub[j] if dirj > 0 else lb[j]
                self.vstat[j] = _AT_UB if dirj > 0 else _AT_LB
                self._sgn[j] = 1.0 if dirj > 0 else -1.0
                continue

            blockers = np.flatnonzero(ratios <= t_star + 1e-12)
            if self.bland:
                r = int(blockers[np.argmin(self.basis[blockers])])
            else:
                r = int(blockers[np.argmax(np.abs(delta[blockers]))])

            xB += delta * t_star
            enter_val = self.x[j] + dirj * t_star
            leaving = self.basis[r]
            if delta[r] > 0:
                self.x[leaving] = ub[leaving]
                if leaving < nr:
                    self.vstat[leaving] = _AT_UB
                    self._sgn[leaving] = 1.0 if lb[leaving] < ub[leaving] else 0.0
                else:
                    self.vstat[leaving] = _AT_UB
            else:
                self.x[leaving] = lb[leaving]
                if leaving < nr:
                    self.vstat[leaving] = _AT_LB
                    self._sgn[leaving] = -1.0 if lb[leaving] < ub[leaving] else 0.0
                else:
                    self.vstat[leaving] = _AT_LB
            if self.vstat[j] == _FREE:
                self._free_idx.remove(j)
            self.vstat[j] = _BASIC
            self._sgn[j] = 0.0
            self.x[j] = enter_val
            self.basis[r] = j
            xB[r] = enter_val
            self._cB[r] = c[j]
            self._lbB[r] = lb[j]
            self._ubB[r] = ub[j]

            piv = w[r]
            Binv_r = self.Binv[r] / piv
            self.Binv = dger(-1.0, w, Binv_r, a=self.Binv, overwrite_a=1)
            self.Binv[r] = Binv_r

    def drive_out_artificials(self):
        """Pin artificials at zero and pivot basic ones out where possible."""
        self.lb[self.n_real :] = 0.0
        self.ub[self.n_real :] = 0.0
        for r in range(self.m):
            if self.basis[r] < self.n_real:
                continue
            row = self.Binv[r] @ self.A[:, : self.n_real]
            row[self.vstat[: self.n_real] == _BASIC] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) <= 1e-9:
                continue  # redundant row; artificial stays basic at zero
            w = self.Binv @ self.A[:, j]
            art = self.basis[r]
            self.x[art] = 0.0
            self.vstat[art] = _AT_LB
            self.vstat[j] = _BASIC
            self.basis[r] = j
            piv = w[r]
            Binv_r = self.Binv[r] / piv
            self.Binv -= np.outer(w, Binv_r)
            self.Binv[r] = Binv_r


def _solve_arrays(c, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter):
    """Two-phase simplex on row-form data.  Minimization only.

    Returns (status, x, objective, duals, dual_objective, iterations)
    where x covers the structural variables only.
    """
    m, n = A.shape
    slack_lb = np.zeros(m)
    slack_ub = np.zeros(m)
    for i, r in enumerate(rel):
        if r == LE:
            slack_ub[i] = np.inf
        elif r == GE:
            slack_lb[i] = -np.inf
        # EQ keeps the slack pinned at zero
    A_ext = np.hstack([A, np.eye(m)])
    lb_ext = np.concatenate([lb, slack_lb])
    ub_ext = np.concatenate([ub, slack_ub])
    slack_cols = np.arange(n, n + m)

    sx = _Simplex(A_ext, b, lb_ext, ub_ext, slack_cols, feas_tol, opt_tol)
    c1 = np.zeros(sx.N)
    c1[sx.n_real :] = 1.0
    status = sx.iterate(c1, max_iter)
    if status == ITERATION_LIMIT:
        return ITERATION_LIMIT, None, None, None, None, sx.iterations
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    phase1 = float(c1 @ sx.x)
    if phase1 > feas_tol * scale:
        return INFEASIBLE, None, None, None, None, sx.iterations
    sx.drive_out_artificials()

    c2 = np.zeros(sx.N)
    c2[:n] = c
    status = sx.iterate(c2, max_iter)
    if status == ITERATION_LIMIT:
        return ITERATION_LIMIT, None, None, None, None, sx.iterations
    if status == UNBOUNDED:
        return UNBOUNDED, None, None, None, None, sx.iterations

    if sx.residual() > 0.5 * feas_tol * scale:
        sx._refactor()

    y = sx.Binv.T @ c2[sx.basis]
    d = c2 - sx.A.T @ y
    x = sx.x[:n].copy()
    obj = float(c @ x)

    dual_obj = float(y @ b)
    nonbasic_lb = (sx.vstat[:n] == _AT_LB) & np.isfinite(lb)
    nonbasic_ub = (sx.vstat[:n] == _AT_UB) & np.isfinite(ub)
    dual_obj += float(d[:n][nonbasic_lb] @ lb[nonbasic_lb])
    dual_obj += float(d[:n][nonbasic_ub] @ ub[nonbasic_ub])

    return OPTIMAL, x, obj, y.copy(), dual_obj, sx.iterations


def _default_max_iter(m: int, n: int) -> int:
    return 20000 + 100 * (m + n)


def solve_lp(model: OptModel, feas_tol: float = 1e-9, opt_tol: float = 1e-9, max_iter: int | None = None) -> Solution:
    """Solve a pure LP; integral variables are a caller error."""
    if model.integer_indices:
        raise WrongSolverError("model has integral variables; use solve_milp")
    c, A, rel, b, lb, ub = model.dense_data()
    return _solve_lp_data(model, c, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter)


def _solve_lp_data(model, c, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter):
    m, n = A.shape
    if max_iter is None:
        max_iter = _default_max_iter(m, n)
    sign = -1.0 if model.sense == MAXIMIZE else 1.0
    status, x, obj, duals, dual_obj, iters = _solve_arrays(
        sign * c, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter
    )
    if status != OPTIMAL:
        return Solution(status=status, iterations=iters)
    return Solution(
        status=OPTIMAL,
        objective=sign * obj + model.objective_constant,
        x=x,
        duals=sign * duals,
        dual_objective=sign * dual_obj + model.objective_constant,
        iterations=iters,
    )


def _fractionality(x, int_idx, int_tol):
    vals = x[int_idx]
    frac = np.abs(vals - np.round(vals))
    return frac > int_tol, frac


def solve_milp(
    model: OptModel,
    int_tol: float = 1e-6,
    gap_tol: float = 1e-6,
    node_limit: int = 100000,
    feas_tol: float = 1e-9,
    opt_tol: float = 1e-9,
) -> Solution:
    """Best-bound branch and bound over LP relaxations.

    The returned objective is within ``gap_tol`` (absolute or relative,
    whichever is larger) of the global optimum; ``iteration-limit``
    carries the incumbent when ``node_limit`` is exhausted.
    """
    if node_limit is None or node_limit < 1:
        raise InvalidParameterError("node_limit must be at least 1")
    int_idx = np.array(model.integer_indices, dtype=int)
    if int_idx.size == 0:
        return solve_lp(model, feas_tol=feas_tol, opt_tol=opt_tol)

    c, A, rel, b, lb0, ub0 = model.dense_data()
    m, n = A.shape
    max_iter = _default_max_iter(m, n)
    sense_sign = -1.0 if model.sense == MAXIMIZE else 1.0
    c_min = sense_sign * c

    def lp(lb, ub):
        return _solve_arrays(c_min, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter)

    incumbent_x = None
    incumbent_key = np.inf

    def gap_eff():
        if incumbent_x is None:
            return gap_tol
        return max(gap_tol, gap_tol * abs(incumbent_key))

    def try_heuristic(x_rel, lb, ub, mode):
        nonlocal incumbent_x, incumbent_key
        lb_h = lb.copy()
        ub_h = ub.copy()
        vals = x_rel[int_idx]
        if mode == "round":
            fixed = np.round(vals)
        else:  # round already-integral values, push fractional ones up
            fixed = np.where(np.abs(vals - np.round(vals)) <= int_tol, np.round(vals), np.ceil(vals))
        fixed = np.clip(fixed, lb_h[int_idx], ub_h[int_idx])
        lb_h[int_idx] = fixed
        ub_h[int_idx] = fixed
        st, x, obj, _, _, _ = lp(lb_h, ub_h)
        if st == OPTIMAL and obj < incumbent_key - 1e-12:
            incumbent_x = x
            incumbent_key = obj

    status, x, obj, _, _, _ = lp(lb0, ub0)
    nodes = 1
    if status == INFEASIBLE:
        return Solution(status=INFEASIBLE, nodes=nodes)
    if status == UNBOUNDED:
        return Solution(status=UNBOUNDED, nodes=nodes)
    if status == ITERATION_LIMIT:
        return Solution(status=ITERATION_LIMIT, nodes=nodes)

    heap = []
    seq = itertools.count()
    heapq.heappush(heap, (obj, next(seq), x, lb0, ub0))
    root_tried = False

    while heap:
        bound_key, _, x_rel, lb, ub = heapq.heappop(heap)
        if incumbent_x is not None and bound_key >= incumbent_key - gap_eff():
            break  # best-bound order: nothing better remains

        is_frac, frac = _fractionality(x_rel, int_idx, int_tol)
        if not np.any(is_frac):
            if bound_key < incumbent_key:
                incumbent_x = x_rel
                incumbent_key = bound_key
            continue

        if not root_tried or nodes % 25 == 0:
            root_tried = True
            try_heuristic(x_rel, lb, ub, "round")
            try_heuristic(x_rel, lb, ub, "ceil")
            if incumbent_x is not None and bound_key >= incumbent_key - gap_eff():
                continue

        # most fractional variable, lowest index on ties
        dist = np.where(is_frac, np.minimum(frac, 1.0 - frac), -1.0)
        pick = int(np.argmax(dist))
        var = int(int_idx[pick])
        val = x_rel[var]

        for side in ("down", "up"):
            if nodes >= node_limit:
                break
            lb_c = lb.copy()
            ub_c = ub.copy()
            if side == "down":
                ub_c[var] = math.floor(val)
            else:
                lb_c[var] = math.ceil(val)
            if lb_c[var] > ub_c[var]:
                continue
            st, x_c, obj_c, _, _, _ = lp(lb_c, ub_c)
            nodes += 1
            if st == INFEASIBLE:
                continue
            if st != OPTIMAL:
                # a child of a bounded root cannot be unbounded, so this is
                # an honest iteration-limit abort carrying the incumbent
                if incumbent_x is None:
                    return Solution(status=ITERATION_LIMIT, nodes=nodes)
                return Solution(
                    status=ITERATION_LIMIT,
                    objective=sense_sign * incumbent_key + model.objective_constant,
                    x=incumbent_x,
                    nodes=nodes,
                )
            if incumbent_x is not None and obj_c >= incumbent_key - gap_eff():
                continue
            heapq.heappush(heap, (obj_c, next(seq), x_c, lb_c, ub_c))

        if nodes >= node_limit:
            if incumbent_x is None:
                return Solution(status=ITERATION_LIMIT, nodes=nodes)
            return Solution(
                status=ITERATION_LIMIT,
                objective=sense_sign * incumbent_key + model.objective_constant,
                x=incumbent_x,
                nodes=nodes,
            )

    if incumbent_x is None:
        return Solution(status=INFEASIBLE, nodes=nodes)
    return Solution(
        status=OPTIMAL,
        objective=sense_sign * incumbent_key + model.objective_constant,
        x=incumbent_x,
        nodes=nodes,
    )


_ORACLE_MAX_INTS = 20
_ORACLE_MAX_COMBOS = 2_000_000


def enumerate_oracle(model: OptModel, feas_tol: float = 1e-9, opt_tol: float = 1e-9) -> Solution:
    """Exhaustive ground truth: try every integral assignment, LP-solve the rest."""
    int_idx = model.integer_indices
    if not int_idx:
        return solve_lp(model, feas_tol=feas_tol, opt_tol=opt_tol)
    if len(int_idx) > _ORACLE_MAX_INTS:
        raise InvalidParameterError(
            f"enumerate_oracle refuses {len(int_idx)} integral variables (> {_ORACLE_MAX_INTS})"
        )
    ranges = []
    for j in int_idx:
        v = model.variables[j]
        if not (math.isfinite(v.lb) and math.isfinite(v.ub)):
            raise InvalidParameterError(f"integral variable {v.name!r} must have finite bounds")
        lo, hi = math.ceil(v.lb - 1e-9), math.floor(v.ub + 1e-9)
        if lo > hi:
            return Solution(status=INFEASIBLE)
        ranges.append(range(lo, hi + 1))
    total = 1
    for r in ranges:
        total *= len(r)
        if total > _ORACLE_MAX_COMBOS:
            raise InvalidParameterError("enumeration would exceed the combinatorial guard")

    c, A, rel, b, lb0, ub0 = model.dense_data()
    m, n = A.shape
    max_iter = _default_max_iter(m, n)
    sense_sign = -1.0 if model.sense == MAXIMIZE else 1.0
    c_min = sense_sign * c

    best_obj = np.inf
    best_x = None
    for combo in itertools.product(*ranges):
        lb = lb0.copy()
        ub = ub0.copy()
        for j, v in zip(int_idx, combo):
            lb[j] = v
            ub[j] = v
        st, x, obj, _, _, _ = _solve_arrays(c_min, A, rel, b, lb, ub, feas_tol, opt_tol, max_iter)
        if st == UNBOUNDED:
            return Solution(status=UNBOUNDED)
        if st == OPTIMAL and obj < best_obj:
            best_obj = obj
            best_x = x
    if best_x is None:
        return Solution(status=INFEASIBLE)
    return Solution(
        status=OPTIMAL,
        objective=sense_sign * best_obj + model.objective_constant,
        x=best_x,
    )
