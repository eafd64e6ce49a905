"""Truss models: geometry, director-cosine operators, reference solvers.

Global dof numbering is node-major (node i owns dofs dim*i .. dim*i+dim-1).
Bar strain is elongation over length with the director cosines taken from
node a toward node b, so a bar stretches (positive strain) when its end
displacements move apart along the bar axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operators import MemberOperators


class GeometryError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = residual_history or []


MAX_NEWTON = 200
MAX_BACKTRACK = 30
TANGENT_CAP = 1e6


@dataclass
class TrussModel:
    nodes: np.ndarray                    # (n_nodes, 2 or 3)
    bars: list[tuple[int, int, float]]   # (node_a, node_b, area)
    fixed_dofs: frozenset[int]
    loads: dict[int, float]              # global dof -> value

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.fixed_dofs = frozenset(int(d) for d in self.fixed_dofs)
        if self.nodes.ndim != 2 or self.nodes.shape[1] not in (2, 3):
            raise GeometryError("nodes must be (n, 2) or (n, 3) coordinates")

    @property
    def spatial_dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_dofs(self) -> int:
        return self.nodes.shape[0] * self.spatial_dim

    @property
    def free_dofs(self) -> np.ndarray:
        return np.array(
            [d for d in range(self.n_dofs) if d not in self.fixed_dofs], dtype=int
        )

    def load_vector(self) -> np.ndarray:
        p = np.zeros(self.n_dofs)
        for dof, val in self.loads.items():
            if int(dof) in self.fixed_dofs:
                raise GeometryError(f"load applied to fixed dof {dof}")
            p[int(dof)] = float(val)
        return p[self.free_dofs]


@dataclass(frozen=True)
class TrussOperators:
    """Per-bar direction rows over free dofs plus lengths and areas."""

    b_rows: np.ndarray   # (m, n_free) director cosines, a->b convention
    lengths: np.ndarray  # (m,)
    areas: np.ndarray    # (m,)
    loads: np.ndarray    # (n_free,)

    @property
    def n_bars(self) -> int:
        return self.b_rows.shape[0]

    def strains(self, u: np.ndarray) -> np.ndarray:
        return (self.b_rows @ u) / self.lengths

    def internal_force(self, sig: np.ndarray) -> np.ndarray:
        return self.b_rows.T @ (self.areas * sig)

    def generic(self) -> MemberOperators:
        """Weighted view with w_e = A_e l_e (bar volume), B_e = b_e / l_e."""
        B = (self.b_rows / self.lengths[:, None])[:, None, :]
        return MemberOperators(
            B=B, weights=self.areas * self.lengths, loads=self.loads.copy()
        )


def build_operators(model: TrussModel) -> TrussOperators:
    """Assemble director cosines restricted to free dofs; checks geometry."""
    dim = model.spatial_dim
    free = model.free_dofs
    col_of = {int(d): i for i, d in enumerate(free)}
    m = len(model.bars)
    b_rows = np.zeros((m, len(free)))
    lengths = np.zeros(m)
    areas = np.zeros(m)
    for e, (a, b, area) in enumerate(model.bars):
        vec = model.nodes[b] - model.nodes[a]
        length = float(np.linalg.norm(vec))
        if length <= 0.0:
            raise GeometryError(f"bar {e} has zero length")
        n_hat = vec / length
        for k in range(dim):
            for node, sign in ((b, 1.0), (a, -1.0)):
                dof = dim * node + k
                if dof in col_of:
                    b_rows[e, col_of[dof]] += sign * n_hat[k]
        lengths[e] = length
        areas[e] = float(area)
    ops = TrussOperators(b_rows, lengths, areas, model.load_vector())
    _check_stiffness(ops)
    return ops


def _check_stiffness(ops: TrussOperators) -> None:
    k = unit_stiffness(ops)
    sign, logdet = np.linalg.slogdet(k)
    if sign <= 0 or not np.isfinite(logdet):
        raise GeometryError(
            "unit-modulus stiffness is singular; model is under-constrained"
        )


def unit_stiffness(ops: TrussOperators) -> np.ndarray:
    w = ops.areas / ops.lengths
    return (ops.b_rows.T * w) @ ops.b_rows


def solve_linear_elastic(ops: TrussOperators, modulus: float = 1.0):
    """Direct stiffness solution for sigma = E * eps."""
    k = modulus * unit_stiffness(ops)
    u = np.linalg.solve(k, ops.loads)
    eps = ops.strains(u)
    return u, eps, modulus * eps


def reference_solve(model_or_ops, law, dlaw=None):
    """Newton-Raphson solve of equilibrium with a scalar law sigma(eps).

    `law` must be vectorised over strain arrays.  The tangent comes from
    `dlaw` when given, otherwise a central difference; it is capped at
    TANGENT_CAP and replaced by a secant through +/-1e-9 near zero strain
    (cube-root-type laws have an unbounded slope at the origin).
    """
    ops = model_or_ops if isinstance(model_or_ops, TrussOperators) else build_operators(model_or_ops)
    p = ops.loads
    tol = 1e-10 * (1.0 + np.abs(p).max(initial=0.0))

    def residual(u):
        return ops.internal_force(law(ops.strains(u))) - p

    def tangent_moduli(eps):
        if dlaw is not None:
            t = np.asarray(dlaw(eps), dtype=float)
        else:
            h = 1e-7 * np.maximum(np.abs(eps), 1e-3)
            t = (law(eps + h) - law(eps - h)) / (2.0 * h)
        near_zero = np.abs(eps) < 1e-9
        if np.any(near_zero):
            secant = (law(1e-9) - law(-1e-9)) / 2e-9
            t = np.where(near_zero, secant, t)
        return np.clip(t, 1e-12, TANGENT_CAP)

    # start from the unit-modulus elastic guess; much better scaled than 0
    # for laws with steep small-strain response
    u = np.linalg.solve(unit_stiffness(ops), p)
    r = residual(u)
    history = [float(np.abs(r).max())]
    for _ in range(MAX_NEWTON):
        if history[-1] <= tol:
            eps = ops.strains(u)
            return u, eps, law(eps)
        eps = ops.strains(u)
        t = tangent_moduli(eps)
        w = ops.areas * t / ops.lengths
        k = (ops.b_rows.T * w) @ ops.b_rows
        try:
            du = np.linalg.solve(k, -r)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular tangent: {exc}", history) from exc
        step = 1.0
        for _ in range(MAX_BACKTRACK):
            r_new = residual(u + step * du)
            if np.abs(r_new).max() < history[-1]:
                break
            step *= 0.5
        else:
            # Picard fallback: secant-modulus fixed point step
            eps_safe = np.where(np.abs(eps) < 1e-9, 1e-9, eps)
            sec = np.clip(law(eps_safe) / eps_safe, 1e-12, TANGENT_CAP)
            w = ops.areas * sec / ops.lengths
            k = (ops.b_rows.T * w) @ ops.b_rows
            u_new = np.linalg.solve(k, p)
            r_new = residual(u_new)
            if np.abs(r_new).max() >= history[-1]:
                raise ConvergenceError(
                    f"no descent after {MAX_BACKTRACK} halvings", history
                )
            u = u_new
            r = r_new
            history.append(float(np.abs(r).max()))
            continue
        u = u + step * du
        r = r_new
        history.append(float(np.abs(r).max()))
    if history[-1] <= tol:
        eps = ops.strains(u)
        return u, eps, law(eps)
    raise ConvergenceError(
        f"Newton did not converge in {MAX_NEWTON} iterations "
        f"(residual {history[-1]:.3e})",
        history,
    )


def cube_root_law(eps):
    return np.cbrt(eps)


def cube_root_tangent(eps):
    e = np.abs(np.asarray(eps, dtype=float))
    with np.errstate(divide="ignore"):
        t = np.where(e > 0, np.cbrt(e) / (3.0 * np.where(e > 0, e, 1.0)), TANGENT_CAP)
    return t


def linear_law(modulus: float):
    return lambda eps: modulus * np.asarray(eps, dtype=float)


# -- canonical example structures ---------------------------------------------


def make_three_bar() -> TrussModel:
    """Planar three-bar bracket: two unit bars plus a sqrt(2) diagonal.

    The free node sits at the origin, loaded by |p| = sqrt(2)/2 at 45
    degrees (+x, +y).  Bars run to (-1, 0), (-1, 1) and (0, -1); the
    diagonal is perpendicular to the load line, so with a uniform modulus E
    the loaded-direction response is U1 = U2 = 0.5 / E.
    """
    nodes = np.array(
        [[0.0, 0.0], [-1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]]
    )
    bars = [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]
    fixed = frozenset(range(2, 8))  # all dofs of nodes 1..3
    half = float(np.sqrt(2.0) / 2.0 * np.cos(np.pi / 4.0))  # = 0.5
    return TrussModel(nodes, bars, fixed, {0: half, 1: half})


def make_box_truss(nx: int = 2, ny: int = 2, nz: int = 4, area: float = 1.0,
                   load: float = -0.75) -> TrussModel:
    """3-D grid tower with edge and face-diagonal bracing.

    Nodes on the integer grid (nx+1, ny+1, nz+1); the base z=0 is clamped
    and the total z-load is split over the top-face nodes.
    """
    shape = (nx + 1, ny + 1, nz + 1)

    def nid(i, j, k):
        return (k * shape[1] + j) * shape[0] + i

    nodes = np.array(
        [
            [float(i), float(j), float(k)]
            for k in range(shape[2])
            for j in range(shape[1])
            for i in range(shape[0])
        ]
    )
    bars: list[tuple[int, int, float]] = []

    def add(a, b):
        bars.append((a, b, area))

    for k in range(shape[2]):
        for j in range(shape[1]):
            for i in range(shape[0]):
                if i < nx:
                    add(nid(i, j, k), nid(i + 1, j, k))
                if j < ny:
                    add(nid(i, j, k), nid(i, j + 1, k))
                if k < nz:
                    add(nid(i, j, k), nid(i, j, k + 1))
                # face diagonals keep every panel shear-stiff
                if i < nx and j < ny:
                    add(nid(i, j, k), nid(i + 1, j + 1, k))
                    add(nid(i + 1, j, k), nid(i, j + 1, k))
                if i < nx and k < nz:
                    add(nid(i, j, k), nid(i + 1, j, k + 1))
                    add(nid(i + 1, j, k), nid(i, j, k + 1))
                if j < ny and k < nz:
                    add(nid(i, j, k), nid(i, j + 1, k + 1))
                    add(nid(i, j + 1, k), nid(i, j, k + 1))
    fixed = set()
    for j in range(shape[1]):
        for i in range(shape[0]):
            n = nid(i, j, 0)
            fixed.update((3 * n, 3 * n + 1, 3 * n + 2))
    top = [nid(i, j, nz) for j in range(shape[1]) for i in range(shape[0])]
    loads = {3 * n + 2: load / len(top) for n in top}
    return TrussModel(nodes, bars, frozenset(fixed), loads)


# -- JSON interchange -----------------------------------------------------------


def truss_to_dict(model: TrussModel) -> dict:
    return {
        "nodes": model.nodes.tolist(),
        "bars": [{"a": int(a), "b": int(b), "area": float(ar)} for a, b, ar in model.bars],
        "fixed_dofs": sorted(model.fixed_dofs),
        "loads": {str(k): float(v) for k, v in model.loads.items()},
    }


def truss_from_dict(doc: dict) -> TrussModel:
    bars = [(int(e["a"]), int(e["b"]), float(e["area"])) for e in doc["bars"]]
    return TrussModel(
        np.asarray(doc["nodes"], dtype=float),
        bars,
        frozenset(int(d) for d in doc["fixed_dofs"]),
        {int(k): float(v) for k, v in doc["loads"].items()},
    )


def write_truss(model: TrussModel, path) -> None:
    Path(path).write_text(json.dumps(truss_to_dict(model), indent=2) + "\n")


def read_truss(path) -> TrussModel:
    return truss_from_dict(json.loads(Path(path).read_text()))
