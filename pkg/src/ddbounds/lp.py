"""Bounded-variable linear programming via the revised simplex method.

Solves  min c.x  s.t.  A x = b,  lo <= x <= hi  (entries of lo/hi may be
infinite; free variables are handled natively, not split).

Implementation notes
--------------------
* Two phases.  Phase 1 appends one artificial column ``+e_i`` per row with
  a sign-dependent bound/cost so its contribution is |value|; phase 2 locks
  artificials to [0, 0].
* The basis is factorised with sparse LU (scipy splu) plus a product-form
  eta file, refactorised every `REFACTOR_EVERY` pivots and before the final
  solution refresh.
* Dantzig pricing; Bland's rule engages after 50 * n_rows consecutive
  degenerate pivots and disengages on strict progress, which guarantees
  termination.
* A previous `Basis` can warm start the solve; if it is stale (wrong shape,
  singular, or primal infeasible) the solver silently cold starts.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIV_TOL = 1e-10
DEGEN_TOL = 1e-10
REFACTOR_EVERY = 100
MAX_PIVOTS = 50_000


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


@dataclass(frozen=True)
class Basis:
    """Opaque warm-start handle: basic column ids + nonbasic bound sides."""

    basic: np.ndarray
    at_upper: np.ndarray


@dataclass
class LpProblem:
    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if not sp.issparse(self.A):
            self.A = sp.csc_matrix(np.atleast_2d(np.asarray(self.A, dtype=float)))
        else:
            self.A = self.A.tocsc()
        n_c, n_v = self.A.shape
        if self.c.shape != (n_v,):
            raise ValueError(f"c has shape {self.c.shape}, expected ({n_v},)")
        if self.b.shape != (n_c,):
            raise ValueError(f"b has shape {self.b.shape}, expected ({n_c},)")
        if self.lo.shape != (n_v,) or self.hi.shape != (n_v,):
            raise ValueError("bound vectors must match the variable count")
        if np.any(self.lo > self.hi):
            bad = int(np.argmax(self.lo > self.hi))
            raise ValueError(f"lo > hi for variable {bad}")
        if not (np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.c))):
            raise ValueError("b and c must be finite")
        if n_c:
            coo = self.A.tocoo()
            occupied = np.zeros(n_c, dtype=bool)
            occupied[coo.row[coo.data != 0.0]] = True
            if not occupied.all():
                raise ValueError(
                    f"equality row {int(np.argmin(occupied))} is all zero"
                )

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray | None = None
    objective: float | None = None
    iterations: int = 0
    basis: Basis | None = None
    message: str = ""


class _Breakdown(Exception):
    """Internal signal: basis factorisation failed mid-solve."""


class _Factor:
    """splu factorisation of the basis plus a product-form eta file."""

    def __init__(self, A_aug: sp.csc_matrix):
        self.A = A_aug
        self.m = A_aug.shape[0]
        self.lu = None
        self.etas: list[tuple[int, np.ndarray]] = []

    def refactor(self, basic: np.ndarray) -> None:
        if self.m == 0:
            self.lu = None
            self.etas.clear()
            return
        B = self.A[:, basic]
        lu = splu(B.tocsc())  # raises RuntimeError if singular
        self.lu = lu
        self.etas.clear()

    def ftran(self, v: np.ndarray) -> np.ndarray:
        if self.m == 0:
            return np.empty(0)
        y = self.lu.solve(v)
        for r, w in self.etas:
            yr = y[r] / w[r]
            y -= w * yr
            y[r] = yr
        return y

    def btran(self, v: np.ndarray) -> np.ndarray:
        if self.m == 0:
            return np.empty(0)
        u = v.copy()
        for r, w in reversed(self.etas):
            ur = (u[r] - (w @ u - w[r] * u[r])) / w[r]
            u[r] = ur
        return self.lu.solve(u, trans="T")

    def push_eta(self, r: int, w: np.ndarray) -> None:
        self.etas.append((r, w.copy()))

    @property
    def n_etas(self) -> int:
        return len(self.etas)


def lp_solve(
    problem: LpProblem,
    warm: Basis | None = None,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
) -> LpSolution:
    """Solve a bounded-variable LP; never reports a wrong OPTIMAL."""
    return _Simplex(problem, feas_tol, opt_tol).run(warm)


class _Simplex:
    def __init__(self, p: LpProblem, feas_tol: float, opt_tol: float):
        self.p = p
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        m, n = p.n_rows, p.n_vars
        self.m = m
        self.n_struct = n
        self.n_tot = n + m
        # augmented system: structural columns then +e_i artificials
        if m:
            self.A = sp.hstack([p.A, sp.identity(m, format="csc")], format="csc")
        else:
            self.A = p.A.tocsc()
        self.At = self.A.transpose().tocsr()
        self.lo = np.concatenate([p.lo, np.zeros(m)])
        self.hi = np.concatenate([p.hi, np.zeros(m)])
        self.cost = np.concatenate([p.c, np.zeros(m)])
        self.factor = _Factor(self.A)
        self.pivots = 0

    # -- helpers -----------------------------------------------------------

    def _column(self, j: int) -> np.ndarray:
        out = np.zeros(self.m)
        A = self.A
        s, e = A.indptr[j], A.indptr[j + 1]
        out[A.indices[s:e]] = A.data[s:e]
        return out

    def _nonbasic_value(self, j: int) -> float:
        lo, hi = self.lo[j], self.hi[j]
        if self.at_upper[j] and np.isfinite(hi):
            return hi
        if np.isfinite(lo):
            return lo
        if np.isfinite(hi):
            return hi
        return 0.0

    def _sanitize_sides(self) -> None:
        # nonbasic placement flags must point at a finite bound when one exists
        lo, hi = self.lo, self.hi
        self.at_upper &= np.isfinite(hi)
        self.at_upper |= ~np.isfinite(lo) & np.isfinite(hi)

    def _set_nonbasic_values(self) -> None:
        for j in range(self.n_tot):
            if not self.in_basis[j]:
                self.x[j] = self._nonbasic_value(j)

    def _refresh_basic_values(self) -> None:
        """Refactor and recompute x_B = B^-1 (b - N x_N)."""
        try:
            self.factor.refactor(self.basic)
        except RuntimeError as exc:
            raise _Breakdown(f"singular basis: {exc}") from exc
        if self.m == 0:
            return
        xn = self.x.copy()
        xn[self.basic] = 0.0
        rhs = self.p.b - self.A @ xn
        self.x[self.basic] = self.factor.ftran(rhs)

    # -- main driver -------------------------------------------------------

    def _run_phases(self, warm: Basis | None) -> LpStatus:
        if warm is not None and self._try_warm(warm):
            return self._iterate(phase=2)
        self._cold_setup()
        status = self._iterate(phase=1)
        if status is LpStatus.UNBOUNDED:
            return LpStatus.FAILED  # phase-1 objective is bounded below
        if status is not LpStatus.OPTIMAL:
            return status
        phase1_obj = float(self.cost_cur @ self.x)
        if phase1_obj > self.feas_tol:
            return LpStatus.INFEASIBLE
        self._enter_phase2()
        return self._iterate(phase=2)

    def run(self, warm: Basis | None) -> LpSolution:
        try:
            status = self._run_phases(warm)
        except _Breakdown as exc:
            return LpSolution(LpStatus.FAILED, iterations=self.pivots,
                              message=str(exc))
        if status is LpStatus.INFEASIBLE:
            return LpSolution(status, iterations=self.pivots)
        if status is not LpStatus.OPTIMAL:
            return LpSolution(status, iterations=self.pivots)
        try:
            self._refresh_basic_values()
        except _Breakdown:
            return LpSolution(LpStatus.FAILED, iterations=self.pivots,
                              message="singular final basis")
        viol = self._bound_violation()
        res = self._equality_residual()
        if viol > self.feas_tol or res > max(self.feas_tol, 1e-11 * (1.0 + np.abs(self.p.b).max(initial=0.0))):
            return LpSolution(LpStatus.FAILED, iterations=self.pivots,
                              message=f"residual {res:.2e} / bound violation {viol:.2e}")
        x = self.x[: self.n_struct].copy()
        return LpSolution(
            LpStatus.OPTIMAL,
            x=x,
            objective=float(self.p.c @ x),
            iterations=self.pivots,
            basis=Basis(self.basic.copy(), self.at_upper.copy()),
        )

    def _bound_violation(self) -> float:
        lo_v = np.maximum(self.lo - self.x, 0.0)
        hi_v = np.maximum(self.x - self.hi, 0.0)
        lo_v[~np.isfinite(lo_v)] = 0.0
        hi_v[~np.isfinite(hi_v)] = 0.0
        return float(max(lo_v.max(initial=0.0), hi_v.max(initial=0.0)))

    def _equality_residual(self) -> float:
        if self.m == 0:
            return 0.0
        return float(np.abs(self.p.b - self.A @ self.x).max())

    # -- setup paths -------------------------------------------------------

    def _cold_setup(self) -> None:
        n, m = self.n_struct, self.m
        self.at_upper = np.zeros(self.n_tot, dtype=bool)
        # bounded structurals start at the finite bound nearest zero
        lo, hi = self.p.lo, self.p.hi
        two_sided = np.isfinite(lo) & np.isfinite(hi)
        self.at_upper[:n] = (two_sided & (np.abs(hi) < np.abs(lo))) | (
            ~np.isfinite(lo) & np.isfinite(hi)
        )
        self.basic = np.arange(n, n + m)
        self.in_basis = np.zeros(self.n_tot, dtype=bool)
        self.in_basis[self.basic] = True
        self.x = np.zeros(self.n_tot)
        self._set_nonbasic_values()
        if m:
            r = self.p.b - self.p.A @ self.x[:n]
            neg = r < 0.0
            # artificial i carries value r_i; its sign picks the half-line
            # and the +/-1 cost, so the phase-1 objective is sum |a_i|
            self.lo[n:] = np.where(neg, -np.inf, 0.0)
            self.hi[n:] = np.where(neg, 0.0, np.inf)
            self.x[n:] = r
            self.phase1_cost = np.concatenate(
                [np.zeros(n), np.where(neg, -1.0, 1.0)]
            )
        else:
            self.phase1_cost = np.zeros(self.n_tot)
        self.cost_cur = self.phase1_cost
        self.locked = np.zeros(self.n_tot, dtype=bool)
        self.factor.refactor(self.basic)

    def _enter_phase2(self) -> None:
        n, m = self.n_struct, self.m
        art = np.arange(n, n + m)
        basic_art = art[self.in_basis[art]]
        # try to pivot zero-valued artificials out onto structural columns
        for a in basic_art:
            r = int(np.where(self.basic == a)[0][0])
            e = np.zeros(m)
            e[r] = 1.0
            rho = self.factor.btran(e)
            alpha = self.At @ rho
            alpha[self.in_basis] = 0.0
            alpha[n:] = 0.0
            alpha[self.locked] = 0.0
            j = int(np.argmax(np.abs(alpha)))
            if abs(alpha[j]) > 1e-7:
                w = self.factor.ftran(self._column(j))
                self._apply_pivot(j, r, w, t=0.0, dirn=1.0)
        # artificials are frozen at zero for phase 2
        self.lo[n:] = 0.0
        self.hi[n:] = 0.0
        self.x[n:] = np.where(np.abs(self.x[n:]) <= self.feas_tol, 0.0, self.x[n:])
        self.cost_cur = self.cost

    def _try_warm(self, warm: Basis) -> bool:
        if warm.basic.shape != (self.m,) or warm.at_upper.shape != (self.n_tot,):
            return False
        if np.any(warm.basic < 0) or np.any(warm.basic >= self.n_tot):
            return False
        if len(np.unique(warm.basic)) != self.m:
            return False
        self.basic = warm.basic.copy()
        self.at_upper = warm.at_upper.copy()
        self.in_basis = np.zeros(self.n_tot, dtype=bool)
        self.in_basis[self.basic] = True
        self.lo[self.n_struct:] = 0.0
        self.hi[self.n_struct:] = 0.0
        self._sanitize_sides()
        self.x = np.zeros(self.n_tot)
        self._set_nonbasic_values()
        self.cost_cur = self.cost
        self.locked = np.zeros(self.n_tot, dtype=bool)
        self.locked[self.n_struct:] = True
        try:
            self._refresh_basic_values()
        except _Breakdown:
            return False
        return self._bound_violation() <= self.feas_tol

    # -- simplex iterations --------------------------------------------------

    def _iterate(self, phase: int) -> LpStatus:
        m = self.m
        degen_run = 0
        bland = False
        bland_after = 50 * max(m, 1)
        while True:
            if self.pivots > MAX_PIVOTS:
                return LpStatus.FAILED
            movable = self.hi > self.lo  # fixed vars can never enter
            cb = self.cost_cur[self.basic]
            z = self.factor.btran(cb)
            d = self.cost_cur - (self.At @ z if m else 0.0)
            free = ~np.isfinite(self.lo) & ~np.isfinite(self.hi)
            can_up = ~self.in_basis & movable & (
                (~self.at_upper & ~free) | free
            )
            can_dn = ~self.in_basis & movable & (self.at_upper | free)
            score = np.zeros(self.n_tot)
            up_mask = can_up & (d < -self.opt_tol)
            dn_mask = can_dn & (d > self.opt_tol)
            score[up_mask] = -d[up_mask]
            score[dn_mask] = np.maximum(score[dn_mask], d[dn_mask])
            if not score.any():
                return LpStatus.OPTIMAL
            if bland:
                q = int(np.nonzero(score > 0.0)[0][0])
            else:
                q = int(np.argmax(score))
            dirn = 1.0 if (up_mask[q] and (not dn_mask[q] or d[q] < 0)) else -1.0
            w = self.factor.ftran(self._column(q)) if m else np.empty(0)
            t, r, hit_upper = self._ratio_test(q, dirn, w, bland)
            if t is None:
                return LpStatus.UNBOUNDED if phase == 2 else LpStatus.FAILED
            if t <= DEGEN_TOL:
                degen_run += 1
                if degen_run > bland_after:
                    bland = True
            else:
                degen_run = 0
                bland = False
            if r < 0:
                # entering variable runs to its opposite bound; basis unchanged
                self.x[q] += dirn * t
                if m:
                    self.x[self.basic] -= dirn * t * w
                self.at_upper[q] = not self.at_upper[q]
                self.x[q] = self.hi[q] if self.at_upper[q] else self.lo[q]
            else:
                self._apply_pivot(q, r, w, t, dirn, hit_upper)
            self.pivots += 1

    def _ratio_test(self, q: int, dirn: float, w: np.ndarray, bland: bool):
        """Return (step, blocking_row, leaves_at_upper); row -1 = bound flip."""
        t_bb = self.hi[q] - self.lo[q]
        best_t = t_bb if np.isfinite(t_bb) else np.inf
        r_best = -1
        hit_upper = False
        if self.m:
            g = dirn * w
            xb = self.x[self.basic]
            lob = self.lo[self.basic]
            hib = self.hi[self.basic]
            with np.errstate(divide="ignore", invalid="ignore"):
                t_lo = np.where(g > PIV_TOL, (xb - lob) / g, np.inf)
                t_hi = np.where(g < -PIV_TOL, (hib - xb) / (-g), np.inf)
            t_lo[~np.isfinite(lob)] = np.inf
            t_hi[~np.isfinite(hib)] = np.inf
            t_rows = np.minimum(t_lo, t_hi)
            t_rows = np.maximum(t_rows, 0.0)
            t_min = t_rows.min(initial=np.inf)
            if t_min < best_t - 1e-15 or (t_min <= best_t and t_min < np.inf):
                ties = np.nonzero(t_rows <= t_min + 1e-12)[0]
                if bland:
                    r_best = int(ties[np.argmin(self.basic[ties])])
                else:
                    r_best = int(ties[np.argmax(np.abs(g[ties]))])
                best_t = float(t_rows[r_best])
                hit_upper = bool(t_hi[r_best] <= t_lo[r_best])
        if not np.isfinite(best_t):
            return None, -1, False
        if r_best >= 0 and np.isfinite(t_bb) and t_bb < best_t:
            return float(t_bb), -1, False
        if r_best < 0:
            return float(best_t), -1, False
        return best_t, r_best, hit_upper

    def _apply_pivot(self, q, r, w, t, dirn, hit_upper=False):
        leaving = self.basic[r]
        self.x[q] = self._nonbasic_value(q) + dirn * t
        if self.m:
            self.x[self.basic] -= dirn * t * w
        bound = self.hi[leaving] if hit_upper else self.lo[leaving]
        if np.isfinite(bound):
            self.x[leaving] = bound
        self.at_upper[leaving] = hit_upper
        if leaving >= self.n_struct:
            # an artificial that leaves the basis is frozen out for good
            self.lo[leaving] = 0.0
            self.hi[leaving] = 0.0
            self.x[leaving] = 0.0
        self.basic[r] = q
        self.in_basis[leaving] = False
        self.in_basis[q] = True
        self.factor.push_eta(r, w)
        if self.factor.n_etas >= REFACTOR_EVERY:
            self._refresh_basic_values()


def vertex_enumerate(problem: LpProblem, tol: float = 1e-9):
    """Brute-force optimum by enumerating all basic solutions.

    Independent oracle for small dense problems with finite bounds; returns
    (status, objective) where status is OPTIMAL or INFEASIBLE.
    """
    import itertools

    A = problem.A.toarray()
    m, n = A.shape
    best = None
    if m == 0:
        x = np.where(problem.c >= 0, problem.lo, problem.hi)
        return LpStatus.OPTIMAL, float(problem.c @ x)
    for basis in itertools.combinations(range(n), m):
        B = A[:, basis]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        nonbasic = [j for j in range(n) if j not in basis]
        for sides in itertools.product((0, 1), repeat=len(nonbasic)):
            x = np.zeros(n)
            for j, s in zip(nonbasic, sides):
                x[j] = problem.hi[j] if s else problem.lo[j]
            rhs = problem.b - A[:, nonbasic] @ x[list(nonbasic)]
            xb = np.linalg.solve(B, rhs)
            x[list(basis)] = xb
            if np.all(x >= problem.lo - tol) and np.all(x <= problem.hi + tol):
                val = float(problem.c @ x)
                if best is None or val < best:
                    best = val
    if best is None:
        return LpStatus.INFEASIBLE, None
    return LpStatus.OPTIMAL, best


def dump_problem(p: LpProblem) -> str:
    """Plain-text fixed-column dump for external cross-checking."""
    out = io.StringIO()
    A = p.A.toarray()
    out.write("MIN " + " ".join(f"{v:>14.6e}" for v in p.c) + "\n")
    for i in range(p.n_rows):
        out.write(
            f"EQ{i:>4d} "
            + " ".join(f"{v:>14.6e}" for v in A[i])
            + f" = {p.b[i]:>14.6e}\n"
        )
    for j in range(p.n_vars):
        out.write(f"BND{j:>4d} {p.lo[j]:>14.6e} {p.hi[j]:>14.6e}\n")
    return out.getvalue()
