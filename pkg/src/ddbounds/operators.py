"""Member-level compatibility/equilibrium operators shared by all solvers.

Every structural model reduces to the same algebra: per member e (a bar or
a Gauss point) a matrix ``B_e`` maps free-dof displacements to the member
strain vector, and a weight ``w_e`` (bar volume or quadrature weight) makes
the pair work-conjugate:

    strain_e = B_e @ U            (d components)
    sum_e w_e B_e^T stress_e = p  (equilibrium over free dofs)

The SLP driver, the classical direct search and the error metrics all run
on this view and never see nodes or meshes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MemberOperators:
    B: np.ndarray        # (m, d, n_free)
    weights: np.ndarray  # (m,)
    loads: np.ndarray    # (n_free,)

    def __post_init__(self):
        if self.B.ndim != 3:
            raise ValueError("B must have shape (m, d, n_free)")
        if self.weights.shape != (self.B.shape[0],):
            raise ValueError("one weight per member required")
        if self.loads.shape != (self.B.shape[2],):
            raise ValueError("loads must live on the free dofs")
        if np.any(self.weights <= 0.0):
            raise ValueError("member weights must be positive")

    @property
    def n_members(self) -> int:
        return self.B.shape[0]

    @property
    def dimension(self) -> int:
        return self.B.shape[1]

    @property
    def n_free(self) -> int:
        return self.B.shape[2]

    def strains(self, u: np.ndarray) -> np.ndarray:
        """(m, d) member strains for a free-dof displacement vector."""
        return np.einsum("edn,n->ed", self.B, u)

    def internal_force(self, sig: np.ndarray) -> np.ndarray:
        """Assembled nodal force sum_e w_e B_e^T sigma_e for (m, d) stresses."""
        return np.einsum("e,edn,ed->n", self.weights, self.B, sig)

    def equilibrium_residual(self, sig: np.ndarray) -> float:
        return float(np.abs(self.internal_force(sig) - self.loads).max())

    def gram(self, diag: np.ndarray) -> np.ndarray:
        """sum_e w_e B_e^T D B_e with D = diag(scale); used by projections."""
        d = np.asarray(diag, dtype=float)
        if d.shape != (self.dimension,):
            raise ValueError("scale diagonal must match member dimension")
        WB = self.B * (self.weights[:, None, None] * d[None, :, None])
        return np.einsum("edn,edm->nm", WB, self.B)
