"""Brute-force Fock-space reference for tiny Majorana systems.

Builds explicit 2^{n/2}-dimensional matrices for up to 8 Majorana modes via
a Jordan-Wigner chain: mode 2j (flavor 1 of fermion j) maps to
Z^{onestimes j} X I..., mode 2j+1 (flavor 2) to Z^{otimes j} Y I..., which
satisfies {c_i, c_j} = 2 delta_ij.  The basis ordering is the tensor
product of single-fermion {empty, occupied} spaces, fermion 0 slowest.

Used only in tests: every correlation-matrix formula (ground state, Gibbs,
dynamics) is validated entrywise against exact many-body linear algebra,
which is what pins the sign and rate conventions of the fast path.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla

from fermistab.hamiltonian import CouplingMatrix
from fermistab.correlations import CorrelationMatrix

MAX_MODES = 8

DEGENERACY_TOL = 1e-10

_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
_I = np.eye(2, dtype=complex)


class OracleSizeError(ValueError):
    pass


class DegenerateGroundState(RuntimeError):
    pass


def _kron_chain(ops) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def represent_majoranas(n_modes: int) -> list[np.ndarray]:
    """Dense Majorana operators on the 2^{n/2} Fock space."""
    if n_modes % 2 != 0 or n_modes < 2:
        raise OracleSizeError("n_modes must be even and >= 2")
    if n_modes > MAX_MODES:
        raise OracleSizeError(f"n_modes = {n_modes} exceeds the oracle cap {MAX_MODES}")
    nf = n_modes // 2
    ops = []
    for j in range(nf):
        for P in (_X, _Y):
            ops.append(_kron_chain([_Z] * j + [P] + [_I] * (nf - j - 1)))
    return ops


def fock_hamiltonian(H: CouplingMatrix) -> tuple[np.ndarray, list[np.ndarray]]:
    """Many-body matrix sum_ij h_ij c_i c_j and the Majorana operators."""
    n = H.n
    cs = represent_majoranas(n)
    dim = cs[0].shape[0]
    out = np.zeros((dim, dim), dtype=complex)
    ii, jj = np.nonzero(H.mat)
    for i, j in zip(ii.tolist(), jj.tolist()):
        out += H.mat[i, j] * (cs[i] @ cs[j])
    return out, cs


def _gamma_entrywise(weight, cs) -> CorrelationMatrix:
    """Gamma_ij = Tr(rho [c_i, c_j]) / 2 for rho given as weight(op)."""
    n = len(cs)
    mat = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            val = weight(cs[i] @ cs[j])  # <c_i c_j> = Gamma_ij for i != j
            mat[i, j] = 1j * val.imag
            mat[j, i] = -1j * val.imag
    return CorrelationMatrix(mat)


def exact_ground_correlation(H: CouplingMatrix) -> CorrelationMatrix:
    """Correlation matrix of the unique many-body ground state."""
    Hmb, cs = fock_hamiltonian(H)
    w, V = np.linalg.eigh(Hmb)
    if w[1] - w[0] < DEGENERACY_TOL:
        raise DegenerateGroundState(
            f"many-body gap {w[1] - w[0]:.3e} below tolerance {DEGENERACY_TOL}"
        )
    psi = V[:, 0]
    return _gamma_entrywise(lambda op: complex(psi.conj() @ (op @ psi)), cs)


def exact_ground_energy(H: CouplingMatrix) -> float:
    Hmb, _ = fock_hamiltonian(H)
    return float(np.linalg.eigvalsh(Hmb)[0])


def exact_gibbs_correlation(H: CouplingMatrix, beta: float) -> CorrelationMatrix:
    """Correlation matrix of the many-body thermal state at inverse T beta."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    Hmb, cs = fock_hamiltonian(H)
    rho = sla.expm(-beta * Hmb)
    rho /= np.trace(rho)
    return _gamma_entrywise(lambda op: complex(np.trace(rho @ op)), cs)


def exact_evolved_correlation(
    H_initial: CouplingMatrix, H: CouplingMatrix, t: float
) -> CorrelationMatrix:
    """Evolve the ground state of H_initial under H for time t, exactly.

    The initial many-body state is the (unique) ground state of H_initial;
    the return value is the correlation matrix of exp(-iHt) |psi0>.
    """
    Hmb0, cs = fock_hamiltonian(H_initial)
    w, V = np.linalg.eigh(Hmb0)
    if w[1] - w[0] < DEGENERACY_TOL:
        raise DegenerateGroundState("initial state ill-defined: degenerate ground space")
    psi = V[:, 0]
    Hmb, _ = fock_hamiltonian(H)
    psi_t = sla.expm(-1j * Hmb * t) @ psi
    return _gamma_entrywise(lambda op: complex(psi_t.conj() @ (op @ psi_t)), cs)
