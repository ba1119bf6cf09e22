"""Gaussian-state calculus on Majorana correlation matrices.

The correlation matrix of a state rho is Gamma_ij = Tr(rho [c_i, c_j]) / 2,
Hermitian and purely imaginary with ||Gamma|| <= 1; pure Gaussian states
satisfy Gamma^2 = 1.  For a Hamiltonian with coefficient matrix H:

    ground state:  Gamma = sign(H)
    Gibbs state:   Gamma = tanh(GIBBS_RATE * beta * H)
    dynamics:      Gamma(t) = exp(-i HEISENBERG_RATE H t) Gamma(0) exp(+...)

The two rate constants are forced by the Clifford normalization
{c_i, c_j} = 2 delta_ij together with the ordered-pair double counting in
the quadratic form sum_ij h_ij c_i c_j (a mode of frequency lambda carries
excitation energy 4*lambda); both are pinned by the exact Fock-space
reference on small systems, as is the overall orientation of Gamma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from fermistab.hamiltonian import (
    CouplingMatrix,
    NumericalError,
    eigenfrequencies,
    max_row_terms,
)

# Heisenberg phase rotation rate per unit eigenfrequency.
HEISENBERG_RATE = 4.0
# Thermal occupation argument per unit (beta * eigenfrequency).
GIBBS_RATE = 2.0

# Eigenvalues below this fraction of ||H|| count as zero modes for sign().
ZERO_MODE_RTOL = 1e-12


class NormalizationError(ValueError):
    pass


@dataclass
class CorrelationMatrix:
    """Majorana two-point matrix of a Gaussian state.

    ``zero_modes`` counts eigenfrequencies that were mapped to 0 by the
    sign function's degeneracy threshold when the state was built.
    """

    mat: np.ndarray
    zero_modes: int = 0

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    def validate(self, pure: bool = False) -> None:
        mat = self.mat
        scale = max(np.abs(mat).max(), 1e-300)
        if np.abs(mat.real).max() > 1e-10 * scale:
            raise ValueError("correlation matrix must be purely imaginary")
        if np.abs(mat + mat.T).max() > 1e-10 * scale:
            raise ValueError("correlation matrix must be Hermitian")
        w = np.linalg.eigvalsh(mat)
        if np.abs(w).max() > 1.0 + 1e-10:
            raise ValueError(f"||Gamma|| = {np.abs(w).max()} exceeds 1")
        if pure and np.abs(np.abs(w) - 1.0).max() > 1e-10:
            raise ValueError("state is not pure: Gamma^2 != 1")


def normalize(
    H: CouplingMatrix,
    coupling_bound: float | None = None,
    row_terms: int | None = None,
) -> tuple[CouplingMatrix, float]:
    """Rescale H by the locality-based a-priori bound s = r * J.

    r is the maximum number of nonzero coefficients per row and J the
    coupling bound (pass ``coupling_bound = J + delta`` to reserve headroom
    for a perturbation ensemble).  The scale never looks at the instance
    spectrum, so one s serves a target matrix and all its perturbations,
    and ||H/s|| <= 1 < pi/2 by the row-count norm bound.
    """
    J = H.coupling_bound if coupling_bound is None else coupling_bound
    r = max_row_terms(H) if row_terms is None else row_terms
    s = r * J
    if s <= 0:
        raise NormalizationError("cannot normalize a zero coupling matrix")
    out = CouplingMatrix(H.lattice, H.mat / s, H.coupling_bound / s)
    return out, float(s)


def _spectral_map(H: CouplingMatrix, fn: Callable[[np.ndarray], np.ndarray]) -> tuple[np.ndarray, int]:
    lam, U = eigenfrequencies(H)
    cut = ZERO_MODE_RTOL * max(np.abs(lam).max(), 1e-300)
    zero = int(np.count_nonzero(np.abs(lam) < cut))
    vals = fn(np.where(np.abs(lam) < cut, 0.0, lam))
    mat = (U * vals) @ U.conj().T
    return mat, zero


def ground_state_correlation(H: CouplingMatrix) -> CorrelationMatrix:
    """Gamma = sign(H), with sign acting on the eigenvalues.

    Eigenfrequencies below ZERO_MODE_RTOL * ||H|| map to 0 (their count is
    reported in ``zero_modes``); elsewhere the result squares to the
    identity.  Scale-invariant: normalizing H first changes nothing.
    """
    mat, zero = _spectral_map(H, np.sign)
    return CorrelationMatrix(mat, zero_modes=zero)


def gibbs_correlation(H: CouplingMatrix, beta: float) -> CorrelationMatrix:
    """Thermal correlation matrix tanh(GIBBS_RATE * beta * H).

    beta = 0 gives the maximally mixed Gamma = 0; beta -> infinity
    recovers the ground-state sign function.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    mat, zero = _spectral_map(H, lambda lam: np.tanh(GIBBS_RATE * beta * lam))
    return CorrelationMatrix(mat, zero_modes=zero)


def evolve(Gamma0: CorrelationMatrix, H: CouplingMatrix, t: float) -> CorrelationMatrix:
    """Heisenberg evolution of the correlation matrix for time t.

    Gamma(t) = P Gamma(0) P^dagger with P = exp(-i * HEISENBERG_RATE * H * t);
    the spectrum of Gamma is preserved.
    """
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    if t == 0.0:
        return CorrelationMatrix(Gamma0.mat.copy(), zero_modes=Gamma0.zero_modes)
    lam, U = eigenfrequencies(H)
    P = (U * np.exp(-1j * HEISENBERG_RATE * lam * t)) @ U.conj().T
    return CorrelationMatrix(P @ Gamma0.mat @ P.conj().T, zero_modes=Gamma0.zero_modes)


def evolve_schedule(
    Gamma0: CorrelationMatrix,
    path: Callable[[float], CouplingMatrix],
    T: float,
    steps: int,
) -> CorrelationMatrix:
    """Evolve under the time-dependent Hamiltonian path(s), s = t/T in [0, 1].

    Piecewise-constant midpoint rule: step k applies the exact exponential
    of path((k + 1/2)/steps) for duration T/steps.  Second order in the
    step size; the propagator accumulates in the real rotation group
    (coefficient matrices are i * real-antisymmetric), so the conjugation
    is exactly unitary at every step.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = T / steps
    m = Gamma0.n
    R_total = np.eye(m)
    for k in range(steps):
        s = (k + 0.5) / steps
        A = path(s).antisymmetric_part
        try:
            R = sla.expm(HEISENBERG_RATE * dt * A)
        except Exception as exc:  # pragma: no cover
            raise NumericalError(f"propagator exponential failed at s={s}: {exc}") from exc
        R_total = R @ R_total
    B = Gamma0.mat.imag
    return CorrelationMatrix(
        1j * (R_total @ B @ R_total.T), zero_modes=Gamma0.zero_modes
    )


def product_state_correlation(occupations: np.ndarray) -> CorrelationMatrix:
    """Correlation matrix of a product of single-mode number eigenstates.

    occupations[j] in {0, 1} is the fermion number of complex mode j; the
    j-th 2x2 Majorana block is [[0, i], [-i, 0]] for an empty mode and its
    negative for an occupied one.
    """
    occ = np.asarray(occupations)
    n = 2 * occ.size
    mat = np.zeros((n, n), dtype=complex)
    for j, o in enumerate(occ.tolist()):
        s = -1.0 if o else 1.0
        mat[2 * j, 2 * j + 1] = 1j * s
        mat[2 * j + 1, 2 * j] = -1j * s
    return CorrelationMatrix(mat)
