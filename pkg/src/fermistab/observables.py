"""Quadratic observables, translation averages, and expectation values.

An observable O = sum_ij o_ij c_i c_j is stored through its coefficient
matrix, same structure class as the Hamiltonians (Hermitian, purely
imaginary, zero diagonal, hence traceless).  Its expectation in a Gaussian
state follows from <c_i c_j> = delta_ij + Gamma_ij:

    <O> = sum_ij o_ij Gamma_ij

an elementwise pairing of the two matrices (equivalently -Tr(o Gamma));
the orientation matches the Fock-space reference.  Observables with a
scalar part, like site occupation n = 1/2 + i c^1 c^2 / 2, are represented
by their quadratic part plus an explicit offset.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from fermistab.correlations import CorrelationMatrix
from fermistab.hamiltonian import CouplingMatrix, HOPPING_SCALE
from fermistab.lattice import LatticeSpec

KIND_LOCAL = "local"
KIND_TRANSLATION_AVERAGED = "translation-averaged"

EXPECTATION_IMAG_TOL = 1e-10


class ConventionError(RuntimeError):
    """Raised when an expectation value carries an imaginary residue."""


@dataclass
class QuadraticObservable:
    """Coefficient matrix of a quadratic observable with support metadata.

    support is the set of sites the observable acts on (local kind); a
    translation-averaged observable keeps the generating local observable
    and its site count k in ``base`` instead.
    """

    lattice: LatticeSpec
    mat: np.ndarray
    kind: str = KIND_LOCAL
    support: frozenset = frozenset()
    base: tuple | None = None  # (O0 matrix, k) for the averaged kind

    @property
    def k(self) -> int:
        if self.kind == KIND_TRANSLATION_AVERAGED and self.base is not None:
            return self.base[1]
        return len(self.support)

    def validate(self) -> None:
        mat = self.mat
        scale = max(np.abs(mat).max(), 1e-300)
        if np.abs(mat.real).max() != 0.0:
            raise ValueError("observable coefficients must be purely imaginary")
        if np.abs(mat + mat.T).max() > 1e-12 * scale:
            raise ValueError("observable matrix must be Hermitian")
        if self.kind == KIND_LOCAL:
            modes = self._support_modes()
            outside = np.ones(self.lattice.n_modes, dtype=bool)
            outside[modes] = False
            if np.any(mat[outside, :] != 0) or np.any(mat[:, outside] != 0):
                raise ValueError("nonzero coefficients outside the declared support")
        else:
            shifted = _translate_matrix(self.lattice, mat, (1,) * self.lattice.d)
            if np.abs(shifted - mat).max() > 1e-12 * scale:
                raise ValueError("translation-averaged observable is not shift invariant")

    def _support_modes(self) -> list[int]:
        lat = self.lattice
        return [
            lat.mode_index(site, a)
            for site in sorted(self.support)
            for a in range(1, 2 * lat.D + 1)
        ]


def _mode_permutation(lattice: LatticeSpec, v) -> np.ndarray:
    """perm[i] = mode index of mode i translated by v."""
    n = lattice.n_modes
    nf = 2 * lattice.D
    perm = np.empty(n, dtype=int)
    for rank in range(lattice.n_sites):
        site = lattice.site_from_rank(rank)
        new_rank = lattice.site_rank(lattice.translated(site, v))
        for a in range(nf):
            perm[rank * nf + a] = new_rank * nf + a
    return perm


def _translate_matrix(lattice: LatticeSpec, mat: np.ndarray, v) -> np.ndarray:
    perm = _mode_permutation(lattice, v)
    out = np.zeros_like(mat)
    out[np.ix_(perm, perm)] = mat
    return out


def local_observable(lattice: LatticeSpec, terms: list) -> QuadraticObservable:
    """Build a k-local observable from (x, y, alpha, beta, coeff) terms."""
    n = lattice.n_modes
    mat = np.zeros((n, n), dtype=complex)
    sites = set()
    for x, y, alpha, beta, coeff in terms:
        coeff = complex(coeff)
        if coeff.real != 0.0:
            raise ValueError("observable coefficients must be purely imaginary")
        i = lattice.mode_index(x, alpha)
        j = lattice.mode_index(y, beta)
        if i == j:
            continue
        mat[i, j] += coeff
        mat[j, i] += coeff.conjugate()
        sites.add(lattice.coerce_site(x))
        sites.add(lattice.coerce_site(y))
    return QuadraticObservable(lattice, mat, KIND_LOCAL, frozenset(sites))


def number_observable(lattice: LatticeSpec, site, mode: int = 1) -> tuple[QuadraticObservable, float]:
    """Occupation of complex mode ``mode`` at ``site`` as (quadratic, offset).

    n = offset + quadratic part with offset 1/2; expectation(Gamma, quad)
    + offset is the physical occupation.
    """
    a1, a2 = 2 * mode - 1, 2 * mode
    obs = local_observable(lattice, [(site, site, a1, a2, 0.25j), (site, site, a2, a1, -0.25j)])
    return obs, 0.5


def bond_observable(lattice: LatticeSpec, x, y, amplitude: float = 1.0) -> QuadraticObservable:
    """Hopping term amplitude * (a_x^+ a_y + h.c.) between first modes."""
    c = 1j * amplitude * HOPPING_SCALE
    return local_observable(lattice, [(x, y, 1, 2, c), (x, y, 2, 1, -c)])


def expectation(Gamma: CorrelationMatrix, O: QuadraticObservable) -> float:
    """<O> in the Gaussian state Gamma (scalar offsets excluded).

    The imaginary residue must stay below EXPECTATION_IMAG_TOL relative to
    the coefficient scale; a violation signals a convention breakage.
    """
    if Gamma.n != O.mat.shape[0]:
        raise ValueError("dimension mismatch between state and observable")
    val = complex(np.sum(O.mat * Gamma.mat))
    scale = max(np.abs(O.mat).max() * Gamma.n, 1e-300)
    if abs(val.imag) > EXPECTATION_IMAG_TOL * scale:
        raise ConventionError(f"imaginary residue {val.imag:g} in expectation value")
    return float(val.real)


def translate(O: QuadraticObservable, v) -> QuadraticObservable:
    """Shift an observable by the lattice vector v (torus wrap included)."""
    mat = _translate_matrix(O.lattice, O.mat, v)
    support = frozenset(O.lattice.translated(s, v) for s in O.support)
    return replace(O, mat=mat, support=support)


def support_extent(lattice: LatticeSpec, support) -> int:
    """Extent of the smallest axis-aligned torus window covering the support.

    Per axis the minimal covering window is L minus the largest gap between
    consecutive occupied coordinates on the ring; the extent is the max
    over axes.  A single site has extent 0.
    """
    sites = [lattice.coerce_site(s) for s in support]
    if len(sites) <= 1:
        return 0
    extent = 0
    for axis in range(lattice.d):
        coords = sorted({s[axis] for s in sites})
        gaps = [b - a for a, b in zip(coords, coords[1:])]
        gaps.append(coords[0] + lattice.L - coords[-1])
        extent = max(extent, lattice.L - max(gaps))
    return extent


def translation_average(O0: QuadraticObservable) -> QuadraticObservable:
    """(1 / n_sites) * sum over all lattice shifts of O0.

    Requires a local O0 whose support fits in a window of extent at most
    L/2, so a shifted copy never wraps onto itself.
    """
    lat = O0.lattice
    if O0.kind != KIND_LOCAL:
        raise ValueError("translation_average expects a local observable")
    if support_extent(lat, O0.support) > lat.L // 2:
        raise ValueError("support too large to translation-average")
    acc = np.zeros_like(O0.mat)
    for site in lat.sites():
        acc += _translate_matrix(lat, O0.mat, site)
    acc /= lat.n_sites
    return QuadraticObservable(
        lat, acc, KIND_TRANSLATION_AVERAGED, frozenset(), base=(O0.mat.copy(), len(O0.support))
    )


def energy_density(H_ideal: CouplingMatrix, Gamma: CorrelationMatrix) -> float:
    """Energy of the ideal Hamiltonian in the state Gamma, per lattice site."""
    if Gamma.n != H_ideal.n:
        raise ValueError("dimension mismatch between state and Hamiltonian")
    val = complex(np.sum(H_ideal.mat * Gamma.mat))
    scale = max(np.abs(H_ideal.mat).max() * Gamma.n, 1e-300)
    if abs(val.imag) > EXPECTATION_IMAG_TOL * scale:
        raise ConventionError(f"imaginary residue {val.imag:g} in energy density")
    return float(val.real) / H_ideal.lattice.n_sites


def weighted_average(weighted_terms: list) -> QuadraticObservable:
    """sum_i w_i O_i with sum |w_i| = 1 (to 1e-12), stored expanded."""
    if not weighted_terms:
        raise ValueError("empty weighted average")
    total = sum(abs(w) for w, _ in weighted_terms)
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"weights must satisfy sum|w| = 1, got {total}")
    lat = weighted_terms[0][1].lattice
    acc = np.zeros_like(weighted_terms[0][1].mat)
    support = set()
    kinds = set()
    for w, O in weighted_terms:
        acc = acc + w * O.mat
        support |= O.support
        kinds.add(O.kind)
    kind = KIND_LOCAL if kinds == {KIND_LOCAL} else KIND_TRANSLATION_AVERAGED
    return QuadraticObservable(lat, acc, kind, frozenset(support))
