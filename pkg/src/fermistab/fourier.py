"""Truncated Fourier approximants of sign and tanh on [-pi, pi].

The order-M approximant of an odd 2*pi-periodic target f is
``f_M(x) = sum_{|n| <= M} c_n exp(i n x)`` with ``c_n`` the exact Fourier
coefficients; equivalently the convolution of f with the Dirichlet kernel
``D_M(x) = sin((M + 1/2) x) / (2 pi sin(x/2))``.

For sign the coefficients are closed-form, ``c_n = 2 / (i pi n)`` for odd n
and zero otherwise; for tanh(beta x) they are computed by adaptive
oscillatory quadrature.  The certify_* routines measure worst-case grid
errors and check them against the bounds the stability analysis relies on:

  sign:  |sign - sign_M| <= 1/M + 1/(M eta)   for eta <= |x| <= pi - eta
         |sign_M|        <= 5                 on [-pi, pi]
  tanh:  |t_M - tanh(beta x)| <= q(beta)/M    on [-pi/2, pi/2]
         sum |n c_n|          <= 2 M (beta + 1)

with q(beta) = 12 pi^2 b^3 + 2 pi^2 b^2 + (2 + pi^2/2) b + (4 sqrt2/pi + pi^2/2).

These series exist to verify the bounds; production state preparation uses
exact eigendecomposition instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from fermistab.hamiltonian import CouplingMatrix, NumericalError, operator_norm

TARGET_SIGN = "sign"
TARGET_TANH = "tanh"

COEFF_SYMMETRY_TOL = 1e-12

SIGN_MAX_BOUND = 5.0


@dataclass
class FourierApprox:
    """Truncated Fourier series: coeffs[M + n] = c_n for n in [-M, M]."""

    M: int
    target: str
    coeffs: np.ndarray
    beta: float | None = None

    def coeff(self, n: int) -> complex:
        return complex(self.coeffs[self.M + n])

    def validate(self) -> None:
        if abs(self.coeff(0)) > COEFF_SYMMETRY_TOL:
            raise ValueError("c_0 must vanish for an odd target")
        ns = np.arange(1, self.M + 1)
        err = np.abs(self.coeffs[self.M + ns] - np.conj(self.coeffs[self.M - ns])).max()
        if err > COEFF_SYMMETRY_TOL:
            raise ValueError(f"coefficient symmetry c_-n = conj(c_n) violated by {err:g}")


def sign_coefficients(M: int) -> FourierApprox:
    """Closed-form square-wave coefficients: c_n = 2/(i pi n), odd n only."""
    if M < 1:
        raise ValueError("M must be >= 1")
    ns = np.arange(-M, M + 1)
    coeffs = np.zeros(2 * M + 1, dtype=complex)
    odd = ns % 2 != 0
    coeffs[odd] = 2.0 / (1j * np.pi * ns[odd])
    return FourierApprox(M, TARGET_SIGN, coeffs)


def tanh_coefficients(M: int, beta: float) -> FourierApprox:
    """Fourier coefficients of tanh(beta x) on [-pi, pi] by quadrature.

    c_n = -(i / pi) * integral_0^pi tanh(beta x) sin(n x) dx, evaluated
    with the oscillatory sine-weight rule to absolute tolerance 1e-12.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if beta <= 0:
        raise ValueError("beta must be positive")
    coeffs = np.zeros(2 * M + 1, dtype=complex)
    for n in range(1, M + 1):
        val, err = integrate.quad(
            lambda x: np.tanh(beta * x),
            0.0,
            np.pi,
            weight="sin",
            wvar=n,
            epsabs=1e-13,
            epsrel=1e-13,
            limit=400,
        )
        if err > 1e-11:
            raise NumericalError(f"tanh coefficient quadrature stalled at n={n}: err={err:g}")
        c = -1j * val / np.pi
        coeffs[M + n] = c
        coeffs[M - n] = np.conj(c)
    return FourierApprox(M, TARGET_TANH, coeffs, beta=beta)


def evaluate(approx: FourierApprox, x) -> np.ndarray:
    """Evaluate the truncated series at x in [-pi, pi] (vectorized).

    The c_{-n} = conj(c_n), c_0 = 0 symmetry is what makes the complex sum
    exactly real, so it is verified up front (a violation means a
    coefficient bug would leak an imaginary residue); the sum then reduces
    to the sine series -2 sum_{n>0} Im(c_n) sin(n x).
    """
    approx.validate()
    x = np.atleast_1d(np.asarray(x, dtype=float))
    ns = np.arange(1, approx.M + 1)
    b = -2.0 * approx.coeffs[approx.M + 1 :].imag
    live = b != 0.0
    ns, b = ns[live], b[live]
    if ns.size == 0:
        return np.zeros(x.shape)
    out = np.empty(x.shape, dtype=float)
    chunk = max(1, int(4e6 // max(ns.size, 1)))
    for start in range(0, x.size, chunk):
        xs = x[start : start + chunk]
        out[start : start + chunk] = np.sin(np.outer(xs, ns)) @ b
    return out


def dirichlet_kernel(M: int, x) -> np.ndarray:
    """D_M(x) = sin((M + 1/2) x) / (2 pi sin(x / 2)), with the x -> 0 limit."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s = np.sin(x / 2.0)
    small = np.abs(s) < 1e-12
    out = np.empty_like(x)
    out[~small] = np.sin((M + 0.5) * x[~small]) / (2.0 * np.pi * s[~small])
    out[small] = (2 * M + 1) / (2.0 * np.pi)
    return out


def sign_m_via_dirichlet(M: int, x: float, epsabs: float = 1e-10) -> float:
    """sign_M(x) as the Dirichlet-kernel convolution, by direct quadrature.

    Slow; used as the independent second route against the series sum.
    """
    def integrand(y):
        return dirichlet_kernel(M, x - y)[0] - dirichlet_kernel(M, x + y)[0]

    val, err = integrate.quad(integrand, 0.0, np.pi, epsabs=epsabs, epsrel=0.0, limit=800)
    if err > 100 * epsabs:
        raise NumericalError(f"Dirichlet quadrature stalled: err={err:g}")
    return float(val)


def q_tanh(beta: float) -> float:
    """Error constant for the order-M tanh approximant on [-pi/2, pi/2]."""
    return (
        12.0 * np.pi**2 * beta**3
        + 2.0 * np.pi**2 * beta**2
        + (2.0 + np.pi**2 / 2.0) * beta
        + (4.0 * np.sqrt(2.0) / np.pi + np.pi**2 / 2.0)
    )


def _certification_grid(lo: float, hi: float, n_uniform: int) -> np.ndarray:
    """Uniform grid plus Chebyshev clustering toward both interval ends."""
    uniform = np.linspace(lo, hi, n_uniform)
    theta = np.linspace(0.0, np.pi, max(64, n_uniform // 16))
    cheb = lo + (hi - lo) * 0.5 * (1.0 - np.cos(theta))
    return np.unique(np.concatenate([uniform, cheb]))


@dataclass
class CertificationReport:
    name: str
    M: int
    bound: float
    measured_max: float
    argmax_x: float
    grid_points: int
    refined_max: float
    passed: bool
    extras: dict

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "M": self.M,
            "bound": self.bound,
            "measured_max": self.measured_max,
            "argmax_x": self.argmax_x,
            "grid_points": self.grid_points,
            "refined_max": self.refined_max,
            "passed": self.passed,
        }
        out.update(self.extras)
        return out


def _grid_max(fn, grid: np.ndarray) -> tuple[float, float]:
    vals = fn(grid)
    idx = int(np.argmax(vals))
    return float(vals[idx]), float(grid[idx])


def certify_sign_error(M: int, eta: float, n_grid: int = 100_000) -> CertificationReport:
    """Worst grid error of sign_M against sign on eta <= |x| <= pi - eta.

    The asserted bound is 1/M + 1/(M eta).  The grid is refined 2x to
    confirm the maximum is resolved to about a percent.
    """
    if not 0.0 < eta < np.pi / 2:
        raise ValueError("eta must lie in (0, pi/2)")
    approx = sign_coefficients(M)

    def err(grid):
        g = np.concatenate([grid, -grid])
        return np.abs(np.sign(g) - evaluate(approx, g)).reshape(2, -1).max(axis=0)

    grid = _certification_grid(eta, np.pi - eta, n_grid)
    measured, argmax = _grid_max(err, grid)
    refined, _ = _grid_max(err, _certification_grid(eta, np.pi - eta, 2 * n_grid))
    bound = 1.0 / M + 1.0 / (M * eta)
    return CertificationReport(
        name="sign-error",
        M=M,
        bound=bound,
        measured_max=measured,
        argmax_x=argmax,
        grid_points=grid.size,
        refined_max=refined,
        passed=bool(refined <= bound and abs(refined - measured) <= 0.01 * max(measured, 1e-30)),
        extras={"eta": eta},
    )


def certify_sign_max(M: int, n_grid: int = 100_000) -> CertificationReport:
    """Grid maximum of |sign_M| on [-pi, pi], asserted against 5."""
    approx = sign_coefficients(M)

    def absval(grid):
        return np.abs(evaluate(approx, grid))

    grid = _certification_grid(0.0, np.pi, n_grid)  # odd symmetry
    measured, argmax = _grid_max(absval, grid)
    refined, _ = _grid_max(absval, _certification_grid(0.0, np.pi, 2 * n_grid))
    return CertificationReport(
        name="sign-max",
        M=M,
        bound=SIGN_MAX_BOUND,
        measured_max=measured,
        argmax_x=argmax,
        grid_points=grid.size,
        refined_max=refined,
        passed=bool(refined <= SIGN_MAX_BOUND and abs(refined - measured) <= 0.01 * measured),
        extras={},
    )


def certify_tanh_error(M: int, beta: float, n_grid: int = 100_000) -> CertificationReport:
    """Worst grid error of t_M against tanh(beta x) on [-pi/2, pi/2].

    Asserted against q(beta)/M; also checks the coefficient-decay facts
    |c_n| <= (beta + 1)/n and sum |n c_n| <= 2 M (beta + 1).
    """
    approx = tanh_coefficients(M, beta)

    def err(grid):
        g = np.concatenate([grid, -grid])
        return np.abs(np.tanh(beta * g) - evaluate(approx, g)).reshape(2, -1).max(axis=0)

    grid = _certification_grid(0.0, np.pi / 2, n_grid)
    measured, argmax = _grid_max(err, grid)
    refined, _ = _grid_max(err, _certification_grid(0.0, np.pi / 2, 2 * n_grid))
    bound = q_tanh(beta) / M
    ns = np.arange(1, M + 1)
    cn = np.abs(approx.coeffs[approx.M + ns])
    coeff_sum = float(2.0 * np.sum(ns * cn))  # both signs of n
    coeff_sum_bound = 2.0 * M * (beta + 1.0)
    decay_ok = bool(np.all(cn <= (beta + 1.0) / ns + 1e-12))
    return CertificationReport(
        name="tanh-error",
        M=M,
        bound=bound,
        measured_max=measured,
        argmax_x=argmax,
        grid_points=grid.size,
        refined_max=refined,
        passed=bool(
            refined <= bound
            and coeff_sum <= coeff_sum_bound
            and decay_ok
            and abs(refined - measured) <= 0.01 * max(measured, 1e-30)
        ),
        extras={
            "beta": beta,
            "coeff_sum": coeff_sum,
            "coeff_sum_bound": coeff_sum_bound,
            "coeff_decay_ok": decay_ok,
        },
    )


def matrix_series_apply(approx: FourierApprox, H: CouplingMatrix) -> np.ndarray:
    """sum_n c_n exp(i n H) through the eigendecomposition of H.

    Requires a normalized input, ||H|| <= pi.  All series terms share the
    eigenbasis of H, so the sum reduces to the scalar series applied to
    the eigenvalues.  Verification-only; not a production state builder.
    """
    if operator_norm(H.mat) > np.pi * (1 + 1e-10):
        raise ValueError("matrix_series_apply requires ||H|| <= pi; normalize first")
    lam, U = np.linalg.eigh(H.mat)
    ns = np.arange(-approx.M, approx.M + 1)
    vals = np.exp(1j * np.outer(lam, ns)) @ approx.coeffs
    return (U * vals) @ U.conj().T
