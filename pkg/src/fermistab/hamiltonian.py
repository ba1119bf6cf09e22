"""Quadratic Majorana coefficient matrices and the hardware-error ensemble.

A quadratic Hamiltonian ``H = sum_ij h_ij c_i c_j`` over Majorana operators
with ``{c_i, c_j} = 2 delta_ij`` is stored through its coefficient matrix
``h`` (attribute ``mat``): Hermitian, purely imaginary, zero on the diagonal,
and supported only on mode pairs within the lattice interaction range.  With
``a = (c^1 + i c^2)/2`` a complex-fermion hopping ``t (a_x^+ a_y + h.c.)``
contributes Majorana coefficients of magnitude ``t/4`` (HOPPING_SCALE).

Hardware errors are modelled as i.i.d. uniform[-delta, delta] shifts of the
independent upper-triangle coefficients, drawn from a counter-based stream
keyed by (seed, instance) so that disorder instances are reproducible and a
given instance uses the same unit draws for every delta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fermistab.lattice import LatticeSpec

# Majorana coefficient produced by a unit complex-fermion hopping amplitude.
HOPPING_SCALE = 0.25

HERMITICITY_RTOL = 1e-12

PERTURB_EXISTING = "existing-terms"
PERTURB_ALL_LOCAL = "all-local-terms"


class ConstructionError(ValueError):
    """Raised when a term violates locality, magnitude, or structure rules."""


class NumericalError(RuntimeError):
    """Raised when an eigensolver or quadrature fails to converge."""


@dataclass
class CouplingMatrix:
    """Coefficient matrix of a quadratic Majorana Hamiltonian.

    Attributes
    ----------
    lattice : LatticeSpec
        Geometry; fixes the mode indexing and the locality range R.
    mat : ndarray
        n x n complex matrix, Hermitian with purely imaginary entries.
    coupling_bound : float
        A-priori bound J on the magnitude of every coefficient.
    """

    lattice: LatticeSpec
    mat: np.ndarray
    coupling_bound: float

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @property
    def antisymmetric_part(self) -> np.ndarray:
        """Real antisymmetric A with mat = i*A (a view, not a copy)."""
        return self.mat.imag

    def validate(self, check_magnitude: bool = True) -> None:
        """Check the structural invariants, raising ConstructionError."""
        mat = self.mat
        if mat.shape != (self.lattice.n_modes, self.lattice.n_modes):
            raise ConstructionError("matrix shape does not match lattice")
        if np.any(mat.real != 0.0):
            raise ConstructionError("coefficients must be purely imaginary")
        scale = max(np.abs(mat).max(), 1e-300)
        if np.abs(mat + mat.T).max() > HERMITICITY_RTOL * scale:
            # purely imaginary Hermitian <=> antisymmetric imaginary part
            raise ConstructionError("matrix is not Hermitian")
        if check_magnitude and np.abs(mat).max() > self.coupling_bound * (1 + 1e-12):
            raise ConstructionError(
                f"coefficient magnitude {np.abs(mat).max():g} exceeds "
                f"bound {self.coupling_bound:g}"
            )
        viol = _locality_violations(self.lattice, mat)
        if viol:
            i, j = viol[0]
            raise ConstructionError(
                f"nonzero coupling between modes {i} and {j} at distance "
                f"> R={self.lattice.R}"
            )


def _locality_violations(lattice: LatticeSpec, mat: np.ndarray) -> list[tuple[int, int]]:
    ii, jj = np.nonzero(mat)
    out = []
    for i, j in zip(ii.tolist(), jj.tolist()):
        if i < j and lattice.torus_distance(lattice.site_of_mode(i), lattice.site_of_mode(j)) > lattice.R:
            out.append((i, j))
    return out


@dataclass(frozen=True)
class PerturbationSpec:
    """Hardware-error model: per-coefficient bound and RNG stream identity.

    ``mode`` selects the perturbation support: the nonzero couplings of the
    target matrix (existing-terms) or every coefficient allowed by the
    locality radius, including on-site pairs (all-local-terms).
    """

    delta: float
    mode: str = PERTURB_EXISTING
    seed: int = 0
    instance: int = 0

    def __post_init__(self):
        if self.delta < 0:
            raise ConstructionError("delta must be nonnegative")
        if self.mode not in (PERTURB_EXISTING, PERTURB_ALL_LOCAL):
            raise ConstructionError(f"unknown perturbation mode {self.mode!r}")

    def rng(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.instance,))
        return np.random.default_rng(seq)


def build_quadratic(
    lattice: LatticeSpec,
    terms: list,
    coupling_bound: float | None = None,
) -> CouplingMatrix:
    """Assemble a coefficient matrix from (x, y, alpha, beta, coeff) terms.

    Each term sets the upper coefficient together with its conjugate
    transpose, so Hermiticity holds by construction.  Coefficients must be
    purely imaginary; duplicated index pairs accumulate.
    """
    n = lattice.n_modes
    mat = np.zeros((n, n), dtype=complex)
    max_abs = 0.0
    for k, (x, y, alpha, beta, coeff) in enumerate(terms):
        coeff = complex(coeff)
        if coeff.real != 0.0:
            raise ConstructionError(f"term {k}: coefficient {coeff} is not purely imaginary")
        if lattice.torus_distance(x, y) > lattice.R:
            raise ConstructionError(f"term {k}: sites {x}, {y} beyond range R={lattice.R}")
        i = lattice.mode_index(x, alpha)
        j = lattice.mode_index(y, beta)
        if i == j:
            if coeff != 0:
                raise ConstructionError(f"term {k}: diagonal coefficient must vanish")
            continue
        mat[i, j] += coeff
        mat[j, i] += coeff.conjugate()
        max_abs = max(max_abs, abs(coeff))
        if coupling_bound is not None and abs(coeff) > coupling_bound * (1 + 1e-12):
            raise ConstructionError(
                f"term {k}: |coefficient| {abs(coeff):g} exceeds bound {coupling_bound:g}"
            )
    bound = coupling_bound if coupling_bound is not None else max(np.abs(mat).max(), 0.0)
    out = CouplingMatrix(lattice, mat, float(bound) if bound else 0.0)
    return out


def ssh_lattice(n_sites: int) -> LatticeSpec:
    return LatticeSpec(d=1, L=n_sites, D=1, R=1)


def ssh_bond_terms(n_sites: int, bonds: str = "all", J: float = 1.0) -> list:
    """Hopping terms of the alternating chain as build_quadratic input.

    Bond b joins sites b and b+1 mod n_sites with amplitude 1 for even b
    and J for odd b (so the periodic closure bond carries J).  ``bonds``
    selects "all", "odd-amplitude" (the unit bonds) or "J-amplitude".
    """
    terms = []
    for b in range(n_sites):
        t = 1.0 if b % 2 == 0 else J
        if bonds == "odd-amplitude" and b % 2 == 1:
            continue
        if bonds == "J-amplitude" and b % 2 == 0:
            continue
        x, y = b, (b + 1) % n_sites
        c = 1j * t * HOPPING_SCALE
        terms.append((x, y, 1, 2, c))
        terms.append((x, y, 2, 1, -c))
    return terms


def build_ssh(n_sites: int, J: float) -> CouplingMatrix:
    """Alternating-hopping periodic chain with amplitudes 1, J, 1, J, ...

    The model is gapped except at J = 1, where the single-particle gap
    closes as 1/n.  Two Majoranas per site, n = 2 * n_sites modes.  The
    mapping of hoppings into coefficients is the HOPPING_SCALE convention
    validated against the exact Fock-space reference on small chains.
    """
    if n_sites % 2 != 0 or n_sites < 4:
        raise ConstructionError("n_sites must be even and >= 4")
    if J < 0:
        raise ConstructionError("J must be nonnegative")
    lattice = ssh_lattice(n_sites)
    out = build_quadratic(lattice, ssh_bond_terms(n_sites, "all", J))
    out.coupling_bound = max(1.0, J) * HOPPING_SCALE
    return out


def perturbation_support(H: CouplingMatrix, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Upper-triangle index pairs (rows, cols) eligible for perturbation.

    The pair order is fixed (row-major upper triangle) so draws are
    reproducible and shared across deltas for a given (seed, instance).
    """
    lattice = H.lattice
    if mode == PERTURB_EXISTING:
        mask = np.triu(H.mat != 0, k=1)
    elif mode == PERTURB_ALL_LOCAL:
        n = H.n
        allowed = np.zeros((n, n), dtype=bool)
        sites = [lattice.site_of_mode(i) for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                allowed[i, j] = lattice.torus_distance(sites[i], sites[j]) <= lattice.R
        mask = allowed
    else:
        raise ConstructionError(f"unknown perturbation mode {mode!r}")
    return np.nonzero(mask)


def perturb(H: CouplingMatrix, spec: PerturbationSpec) -> CouplingMatrix:
    """Add i.i.d. uniform[-delta, delta] shifts to independent coefficients.

    Deterministic given (spec.seed, spec.instance); the underlying unit
    draws do not depend on delta, so sweeps over delta reuse common random
    numbers per instance.
    """
    rows, cols = perturbation_support(H, spec.mode)
    unit = spec.rng().uniform(-1.0, 1.0, size=rows.size)
    mat = H.mat.copy()
    shift = 1j * spec.delta * unit
    mat[rows, cols] += shift
    mat[cols, rows] -= shift
    return CouplingMatrix(H.lattice, mat, H.coupling_bound + spec.delta)


def operator_norm(M: np.ndarray) -> float:
    """Largest singular value; Hermitian inputs take the eigenvalue route."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("operator_norm expects a square matrix")
    try:
        if np.allclose(M, M.conj().T, rtol=0, atol=1e-13 * max(1.0, np.abs(M).max())):
            return float(np.abs(np.linalg.eigvalsh(M)).max()) if M.size else 0.0
        return float(np.linalg.svd(M, compute_uv=False)[0])
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"eigensolver failure: {exc}") from exc


def eigenfrequencies(H: CouplingMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and unitary eigenbasis of the coefficient matrix."""
    try:
        return np.linalg.eigh(H.mat)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalError(f"eigensolver failure: {exc}") from exc


def density_of_modes(spectrum: np.ndarray, eta: float) -> int:
    """Number of eigenfrequencies in the window [-eta, eta]."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    return int(np.count_nonzero(np.abs(np.asarray(spectrum)) <= eta))


def max_row_terms(H: CouplingMatrix, mode: str = PERTURB_EXISTING) -> int:
    """Largest number of nonzero coefficients any row can carry.

    For existing-terms this is read off the actual sparsity pattern; for
    all-local-terms it is the structural cap 2D(2R+1)^d - 1 set by the
    locality radius (diagonal excluded).
    """
    if mode == PERTURB_ALL_LOCAL:
        lat = H.lattice
        reach = min((2 * lat.R + 1) ** lat.d, lat.n_sites)
        return 2 * lat.D * reach - 1
    return int(np.count_nonzero(H.mat != 0, axis=1).max(initial=0))
