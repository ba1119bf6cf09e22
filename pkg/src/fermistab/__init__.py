"""Numerical laboratory for hardware-error stability of free-fermion simulators.

The package simulates quadratic Majorana Hamiltonians on periodic lattices
through their correlation matrices, measures how bounded per-coefficient
hardware errors propagate into local and translation-averaged observables,
certifies the truncated-Fourier error bounds that underpin those stability
estimates, and reproduces the SSH ground-state stability study and the noisy
adiabatic-algorithm study as reproducible sweeps.
"""

from fermistab.lattice import LatticeSpec
from fermistab.hamiltonian import CouplingMatrix, PerturbationSpec
from fermistab.correlations import CorrelationMatrix
from fermistab.observables import QuadraticObservable

__all__ = [
    "LatticeSpec",
    "CouplingMatrix",
    "PerturbationSpec",
    "CorrelationMatrix",
    "QuadraticObservable",
]

__version__ = "0.1.0"
