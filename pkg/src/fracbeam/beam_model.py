"""Assembly of the modal generator and energy inner product.

State layout throughout the package: one vector of length 4N in the fixed
block order (a, alpha, b, beta) where a are the modal coefficients of the
transverse displacement u, alpha those of w = u_t, b those of the rotation
angle psi, and beta those of v = psi_t. The basis is e_k(x) =
sqrt(2/L) sin(k pi x / L), the orthonormal Dirichlet eigenfunctions of
A = -d^2/dx^2 with eigenvalues mu_k = (k pi / L)^2, so every fractional
power A^theta acts diagonally as mu_k^theta.

A second, independent finite-difference discretization is provided as a
cross-validation oracle for eigenvalues. Its generator is not exactly
dissipative (centered first differences only commute with the Laplacian up
to O(h^2)), so it is never used for inequality verification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalParams:
    """The seven scalars of the beam system plus the truncation level.

    rho1: mass density x cross-section area
    rho2: mass density x moment of inertia
    kappa: shear stiffness
    b_coef: bending stiffness
    length: beam length L
    tau: damping exponent on u, in [0, 1]
    sigma: damping exponent on psi, in [0, 1]
    n_modes: truncation level N
    """

    rho1: float = 1.0
    rho2: float = 1.0
    kappa: float = 1.0
    b_coef: float = 1.0
    length: float = math.pi
    tau: float = 1.0
    sigma: float = 1.0
    n_modes: int = 64

    def validate(self) -> None:
        """Raise ValueError naming the offending field on any range violation."""
        for name in ("rho1", "rho2", "kappa", "b_coef", "length"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value}")
        for name in ("tau", "sigma"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not (isinstance(self.n_modes, (int, np.integer)) and self.n_modes >= 1):
            raise ValueError(f"n_modes must be a positive integer, got {self.n_modes}")


@dataclass(frozen=True)
class ModalBasis:
    """Dirichlet sine eigenbasis: mu[k-1] = (k pi / L)^2, ascending."""

    n_modes: int
    mu: np.ndarray


@dataclass(frozen=True)
class CouplingMatrix:
    """Modal projection of d/dx: g[k-1, j-1] = <e_j', e_k>, skew-symmetric."""

    g: np.ndarray


@dataclass(frozen=True)
class ModalModel:
    """Immutable bundle of everything assembled from one parameter set.

    generator is the 4N x 4N real matrix B_N; energy is the symmetric
    positive definite matrix M of the energy inner product; energy_factor
    is upper triangular C with M = C^T C, used for norm changes.
    """

    params: PhysicalParams
    basis: ModalBasis
    coupling: CouplingMatrix
    generator: np.ndarray
    energy: np.ndarray
    energy_factor: np.ndarray


def split_state(x: np.ndarray, n_modes: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Split a 4N state vector into its (a, alpha, b, beta) blocks."""
    if x.shape[-1] != 4 * n_modes:
        raise ValueError(f"state length {x.shape[-1]} does not match 4*n_modes = {4 * n_modes}")
    n = n_modes
    return x[..., :n], x[..., n : 2 * n], x[..., 2 * n : 3 * n], x[..., 3 * n :]


def join_state(a: np.ndarray, alpha: np.ndarray, b: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Concatenate blocks into one state vector in the fixed order."""
    if not (len(a) == len(alpha) == len(b) == len(beta)):
        raise ValueError("state blocks must share one length")
    return np.concatenate([a, alpha, b, beta])


def build_modal_basis(params: PhysicalParams) -> ModalBasis:
    """Closed-form eigenvalues mu_k = (k pi / L)^2 for k = 1..N."""
    params.validate()
    k = np.arange(1, params.n_modes + 1, dtype=float)
    mu = (k * math.pi / params.length) ** 2
    return ModalBasis(n_modes=params.n_modes, mu=mu)


def build_coupling_matrix(params: PhysicalParams) -> CouplingMatrix:
    """Closed-form G_kj = 4kj / (L (k^2 - j^2)) for k+j odd, 0 for k+j even."""
    params.validate()
    n = params.n_modes
    k = np.arange(1, n + 1, dtype=float)[:, None]
    j = np.arange(1, n + 1, dtype=float)[None, :]
    g = np.zeros((n, n))
    odd = ((k + j) % 2) == 1
    # k != j wherever k+j is odd, so the denominator is safe under the mask
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = 4.0 * k * j / (params.length * (k**2 - j**2))
    g[odd] = vals[odd]
    return CouplingMatrix(g=g)


def assemble_generator(params: PhysicalParams, basis: ModalBasis, coupling: CouplingMatrix) -> np.ndarray:
    """Assemble the 4N x 4N generator B_N in block order (a, alpha, b, beta).

    Block rows:
        a'     = alpha
        alpha' = (1/rho1) [ -kappa diag(mu) a + kappa G b - diag(mu^tau) alpha ]
        b'     = beta
        beta'  = (1/rho2) [ -kappa G a - (b_coef diag(mu) + kappa I) b - diag(mu^sigma) beta ]
    """
    n = basis.n_modes
    if coupling.g.shape != (n, n):
        raise ValueError(f"coupling shape {coupling.g.shape} does not match n_modes = {n}")
    mu = basis.mu
    g = coupling.g
    eye = np.eye(n)
    zero = np.zeros((n, n))
    d_mu = np.diag(mu)
    d_tau = np.diag(mu**params.tau)
    d_sigma = np.diag(mu**params.sigma)
    row_alpha = (1.0 / params.rho1) * np.hstack([-params.kappa * d_mu, -d_tau, params.kappa * g, zero])
    row_beta = (1.0 / params.rho2) * np.hstack(
        [-params.kappa * g, zero, -(params.b_coef * d_mu + params.kappa * eye), -d_sigma]
    )
    return np.vstack(
        [
            np.hstack([zero, eye, zero, zero]),
            row_alpha,
            np.hstack([zero, zero, zero, eye]),
            row_beta,
        ]
    )


def assemble_energy_matrix(
    params: PhysicalParams, basis: ModalBasis, coupling: CouplingMatrix
) -> tuple[np.ndarray, np.ndarray]:
    """Assemble M with X^T M X = rho1|alpha|^2 + rho2|beta|^2 + kappa||u_x+psi||^2 + b||A^(1/2)psi||^2.

    The kappa bracket expands to a^T diag(mu) a + 2 b^T G a + b^T b, exact in
    the truncated basis. Returns (M, C) with M = C^T C, C upper triangular.
    Cholesky failure would signal loss of positive definiteness and is
    re-raised as an internal error.
    """
    n = basis.n_modes
    if coupling.g.shape != (n, n):
        raise ValueError(f"coupling shape {coupling.g.shape} does not match n_modes = {n}")
    mu = basis.mu
    g = coupling.g
    eye = np.eye(n)
    zero = np.zeros((n, n))
    m = np.vstack(
        [
            np.hstack([params.kappa * np.diag(mu), zero, params.kappa * g.T, zero]),
            np.hstack([zero, params.rho1 * eye, zero, zero]),
            np.hstack([params.kappa * g, zero, params.kappa * eye + params.b_coef * np.diag(mu), zero]),
            np.hstack([zero, zero, zero, params.rho2 * eye]),
        ]
    )
    try:
        chol_lower = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("energy matrix lost positive definiteness") from exc
    return m, chol_lower.T


def build_model(params: PhysicalParams) -> ModalModel:
    """Validate params and assemble the full modal model."""
    params.validate()
    basis = build_modal_basis(params)
    coupling = build_coupling_matrix(params)
    generator = assemble_generator(params, basis, coupling)
    energy, factor = assemble_energy_matrix(params, basis, coupling)
    return ModalModel(
        params=params,
        basis=basis,
        coupling=coupling,
        generator=generator,
        energy=energy,
        energy_factor=factor,
    )


def fd_fractional_power(n_grid: int, length: float, theta: float) -> np.ndarray:
    """A_h^theta via the discrete sine eigendecomposition of the tridiagonal Laplacian."""
    h = length / (n_grid + 1)
    k = np.arange(1, n_grid + 1)
    mu_h = (4.0 / h**2) * np.sin(k * math.pi / (2 * (n_grid + 1))) ** 2
    i = np.arange(1, n_grid + 1)
    v = np.sqrt(2.0 / (n_grid + 1)) * np.sin(np.outer(i, k) * math.pi / (n_grid + 1))
    return (v * mu_h**theta) @ v.T


def assemble_fd_generator(params: PhysicalParams, n_grid: int) -> tuple[np.ndarray, np.ndarray]:
    """Independent finite-difference discretization on n_grid interior points.

    A_h = (1/h^2) tridiag(-1, 2, -1); first derivative by centered differences
    with zero Dirichlet extension; fractional powers through the exact discrete
    sine eigendecomposition. Returns (generator, energy matrix). The energy
    matrix mirrors the modal one with h-weighted inner products and
    ||u_x + psi||^2 -> h |D_h u + psi|^2. Eigenvalue oracle only: the centered
    D_h breaks exact dissipativity at O(h^2).
    """
    params.validate()
    if n_grid < 3:
        raise ValueError(f"n_grid must be >= 3, got {n_grid}")
    n = n_grid
    h = params.length / (n + 1)
    lap = (np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)) / h**2
    diff = (np.diag(np.full(n - 1, 1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)) / (2.0 * h)
    a_tau = fd_fractional_power(n, params.length, params.tau)
    a_sigma = fd_fractional_power(n, params.length, params.sigma)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    gen = np.vstack(
        [
            np.hstack([zero, eye, zero, zero]),
            (1.0 / params.rho1) * np.hstack([-params.kappa * lap, -a_tau, params.kappa * diff, zero]),
            np.hstack([zero, zero, zero, eye]),
            (1.0 / params.rho2)
            * np.hstack([-params.kappa * diff, zero, -(params.b_coef * lap + params.kappa * eye), -a_sigma]),
        ]
    )
    energy = h * np.vstack(
        [
            np.hstack([params.kappa * diff.T @ diff, zero, params.kappa * diff.T, zero]),
            np.hstack([zero, params.rho1 * eye, zero, zero]),
            np.hstack([params.kappa * diff, zero, params.kappa * eye + params.b_coef * lap, zero]),
            np.hstack([zero, zero, zero, params.rho2 * eye]),
        ]
    )
    return gen, energy
