"""Assembly-level tests: closed forms against quadrature and small hand oracles."""

import math

import numpy as np
import pytest
import scipy.integrate
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbeam.beam_model import (
    PhysicalParams,
    assemble_energy_matrix,
    assemble_fd_generator,
    assemble_generator,
    build_coupling_matrix,
    build_modal_basis,
    build_model,
    fd_fractional_power,
    join_state,
    split_state,
)


def quad_coupling_entry(length: float, k: int, j: int) -> float:
    """Independent quadrature oracle for <e_j', e_k>."""

    def integrand(x):
        scale = 2.0 / length
        return scale * (j * math.pi / length) * math.cos(j * math.pi * x / length) * math.sin(k * math.pi * x / length)

    value, _ = scipy.integrate.quad(integrand, 0.0, length, limit=200)
    return value


class TestModalBasis:
    def test_eigenvalues_unit_interval_pi(self):
        basis = build_modal_basis(PhysicalParams(length=math.pi, n_modes=3))
        assert np.allclose(basis.mu, [1.0, 4.0, 9.0], rtol=0, atol=1e-15)

    def test_eigenvalue_unit_length(self):
        basis = build_modal_basis(PhysicalParams(length=1.0, n_modes=1))
        assert basis.mu[0] == pytest.approx(math.pi**2, rel=1e-15)

    def test_eigenvalues_length_two(self):
        basis = build_modal_basis(PhysicalParams(length=2.0, n_modes=2))
        assert np.allclose(basis.mu, [math.pi**2 / 4.0, math.pi**2], rtol=1e-15)

    def test_rejects_nonpositive_mode_count(self):
        with pytest.raises(ValueError, match="n_modes"):
            build_modal_basis(PhysicalParams(n_modes=0))


class TestParamsValidation:
    @pytest.mark.parametrize("field", ["rho1", "rho2", "kappa", "b_coef", "length"])
    def test_rejects_nonpositive_scalars(self, field):
        with pytest.raises(ValueError, match=field):
            PhysicalParams(**{field: 0.0}).validate()

    @pytest.mark.parametrize("field,value", [("tau", -0.1), ("tau", 1.5), ("sigma", 2.0)])
    def test_rejects_exponents_outside_unit_interval(self, field, value):
        with pytest.raises(ValueError, match=field):
            PhysicalParams(**{field: value}).validate()


class TestCouplingMatrix:
    def test_first_offdiagonal_entry_closed_form(self):
        g = build_coupling_matrix(PhysicalParams(length=math.pi, n_modes=4)).g
        assert g[0, 1] == pytest.approx(-8.0 / (3.0 * math.pi), rel=1e-14)
        assert g[0, 1] == pytest.approx(quad_coupling_entry(math.pi, 1, 2), abs=1e-10)

    def test_transposed_entry_flips_sign(self):
        g = build_coupling_matrix(PhysicalParams(length=math.pi, n_modes=4)).g
        assert g[1, 0] == pytest.approx(8.0 / (3.0 * math.pi), rel=1e-14)
        assert g[1, 0] == pytest.approx(quad_coupling_entry(math.pi, 2, 1), abs=1e-10)

    def test_diagonal_vanishes(self):
        g = build_coupling_matrix(PhysicalParams(length=2.7, n_modes=6)).g
        assert np.all(np.diag(g) == 0.0)

    @pytest.mark.parametrize("length", [math.pi, 1.0, 5.5])
    def test_all_entries_match_quadrature(self, length):
        g = build_coupling_matrix(PhysicalParams(length=length, n_modes=8)).g
        for k in range(1, 9):
            for j in range(1, 9):
                assert g[k - 1, j - 1] == pytest.approx(quad_coupling_entry(length, k, j), abs=1e-10)

    @settings(deadline=None, max_examples=25)
    @given(
        n=st.integers(min_value=1, max_value=12),
        length=st.floats(min_value=0.3, max_value=12.0, allow_nan=False),
    )
    def test_skew_symmetry_and_parity_sparsity(self, n, length):
        g = build_coupling_matrix(PhysicalParams(length=length, n_modes=n)).g
        assert np.array_equal(g, -g.T)
        k = np.arange(1, n + 1)
        even = ((k[:, None] + k[None, :]) % 2) == 0
        assert np.all(g[even] == 0.0)


class TestGenerator:
    def test_single_mode_eigenvalues_default_params(self):
        model = build_model(PhysicalParams(n_modes=1))
        eig = np.sort_complex(np.linalg.eigvals(model.generator))
        expected = np.sort_complex(
            np.array(
                [(-1 + 1j * math.sqrt(3)) / 2, (-1 - 1j * math.sqrt(3)) / 2,
                 (-1 + 1j * math.sqrt(7)) / 2, (-1 - 1j * math.sqrt(7)) / 2]
            )
        )
        assert np.allclose(eig, expected, atol=1e-10)

    def test_single_mode_eigenvalues_generic_params(self):
        # roots of rho1 x^2 + mu^tau x + kappa mu = 0 and rho2 x^2 + mu^sigma x + (b mu + kappa) = 0
        params = PhysicalParams(rho1=2.0, rho2=3.0, kappa=1.5, b_coef=0.7, length=2.0, tau=0.5, sigma=0.25, n_modes=1)
        model = build_model(params)
        mu = model.basis.mu[0]
        expected = np.concatenate(
            [
                np.roots([params.rho1, mu**params.tau, params.kappa * mu]),
                np.roots([params.rho2, mu**params.sigma, params.b_coef * mu + params.kappa]),
            ]
        )
        eig = np.linalg.eigvals(model.generator)
        for root in expected:
            assert np.min(np.abs(eig - root)) < 1e-10

    def test_zero_exponent_gives_identity_damping_block(self):
        params = PhysicalParams(tau=0.0, n_modes=5)
        model = build_model(params)
        n = 5
        damping = model.generator[n : 2 * n, n : 2 * n]
        assert np.allclose(damping, -np.eye(n) / params.rho1, rtol=0, atol=0)

    def test_velocity_identity_block(self):
        model = build_model(PhysicalParams(n_modes=7, tau=0.3, sigma=0.9))
        n = 7
        assert np.array_equal(model.generator[:n, n : 2 * n], np.eye(n))
        assert np.array_equal(model.generator[2 * n : 3 * n, 3 * n :], np.eye(n))

    def test_dimension_mismatch_rejected(self):
        params = PhysicalParams(n_modes=4)
        basis = build_modal_basis(params)
        coupling = build_coupling_matrix(PhysicalParams(n_modes=5))
        with pytest.raises(ValueError, match="coupling"):
            assemble_generator(params, basis, coupling)


class TestEnergyMatrix:
    def test_single_mode_diagonal_values(self):
        params = PhysicalParams(n_modes=1)
        basis = build_modal_basis(params)
        coupling = build_coupling_matrix(params)
        m, factor = assemble_energy_matrix(params, basis, coupling)
        assert np.allclose(m, np.diag([1.0, 1.0, 2.0, 1.0]), atol=1e-15)
        assert np.allclose(factor.T @ factor, m, atol=1e-15)

    def test_zero_state_zero_energy(self):
        model = build_model(PhysicalParams(n_modes=3))
        x = np.zeros(12)
        assert x @ model.energy @ x == 0.0

    def test_single_rotation_mode_energy(self):
        params = PhysicalParams(kappa=1.3, b_coef=0.9, n_modes=3)
        model = build_model(params)
        x = join_state(np.zeros(3), np.zeros(3), np.array([1.0, 0.0, 0.0]), np.zeros(3))
        expected = params.kappa + params.b_coef * model.basis.mu[0]
        assert x @ model.energy @ x == pytest.approx(expected, rel=1e-14)

    def test_quadratic_form_matches_stated_expansion(self):
        params = PhysicalParams(rho1=1.1, rho2=0.8, kappa=2.0, b_coef=0.5, length=1.7, n_modes=6)
        model = build_model(params)
        rng = np.random.default_rng(5)
        x = rng.standard_normal(24)
        a, alpha, b, beta = split_state(x, 6)
        mu, g = model.basis.mu, model.coupling.g
        expected = (
            params.rho1 * alpha @ alpha
            + params.rho2 * beta @ beta
            + params.kappa * (a @ (mu * a) + 2.0 * b @ (g @ a) + b @ b)
            + params.b_coef * b @ (mu * b)
        )
        assert x @ model.energy @ x == pytest.approx(expected, rel=1e-13)

    @settings(deadline=None, max_examples=25)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_energy_positive_away_from_zero(self, seed):
        model = build_model(PhysicalParams(n_modes=8, tau=0.5, sigma=0.75))
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(32)
        energy_sq = float(np.linalg.norm(model.energy_factor @ x) ** 2)
        assert energy_sq == pytest.approx(x @ model.energy @ x, rel=1e-12)
        assert energy_sq > 0.0

    def test_energy_matrix_positive_definite_across_configs(self):
        for tau in (0.0, 0.5, 1.0):
            for n in (1, 4, 16):
                model = build_model(PhysicalParams(tau=tau, sigma=1 - tau, n_modes=n))
                assert np.linalg.eigvalsh(model.energy).min() > 0.0


class TestDissipativityIdentity:
    @pytest.mark.parametrize("n_modes", [1, 4, 16])
    @pytest.mark.parametrize("tau,sigma", [(0.0, 0.0), (0.25, 0.75), (1.0, 1.0), (0.5, 1.0)])
    def test_structural_identity_exact_scale(self, n_modes, tau, sigma):
        model = build_model(PhysicalParams(tau=tau, sigma=sigma, n_modes=n_modes))
        mu = model.basis.mu
        damping = np.diag(np.concatenate([np.zeros(n_modes), mu**tau, np.zeros(n_modes), mu**sigma]))
        mb = model.energy @ model.generator
        residual = np.linalg.norm(mb + mb.T + 2.0 * damping)
        assert residual <= 1e-12 * np.linalg.norm(mb)


class TestStateLayout:
    def test_split_join_roundtrip(self):
        rng = np.random.default_rng(0)
        blocks = [rng.standard_normal(5) for _ in range(4)]
        x = join_state(*blocks)
        for original, recovered in zip(blocks, split_state(x, 5)):
            assert np.array_equal(original, recovered)

    def test_split_rejects_wrong_length(self):
        with pytest.raises(ValueError, match="4\\*n_modes"):
            split_state(np.zeros(10), 3)

    def test_join_rejects_mixed_lengths(self):
        with pytest.raises(ValueError):
            join_state(np.zeros(3), np.zeros(3), np.zeros(4), np.zeros(3))


class TestFiniteDifferenceOracle:
    def test_discrete_sine_vectors_are_eigenvectors(self):
        params = PhysicalParams()
        n = 40
        h = params.length / (n + 1)
        lap = (
            np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)
        ) / h**2
        i = np.arange(1, n + 1)
        for k in (1, 3, 17, 40):
            mu_k = (4.0 / h**2) * math.sin(k * math.pi / (2 * (n + 1))) ** 2
            v = math.sqrt(2.0 / (n + 1)) * np.sin(i * k * math.pi / (n + 1))
            assert np.linalg.norm(lap @ v - mu_k * v) <= 1e-10 * mu_k

    def test_full_power_recovers_laplacian(self):
        params = PhysicalParams()
        n = 25
        h = params.length / (n + 1)
        lap = (
            np.diag(np.full(n, 2.0)) + np.diag(np.full(n - 1, -1.0), 1) + np.diag(np.full(n - 1, -1.0), -1)
        ) / h**2
        power = fd_fractional_power(n, params.length, 1.0)
        assert np.linalg.norm(power - lap) <= 1e-10 * np.linalg.norm(lap)

    def test_zero_power_is_identity(self):
        power = fd_fractional_power(30, 2.0, 0.0)
        assert np.allclose(power, np.eye(30), atol=1e-12)

    def test_rejects_tiny_grids(self):
        with pytest.raises(ValueError, match="n_grid"):
            assemble_fd_generator(PhysicalParams(), 2)

    def test_energy_matrix_symmetric_positive_definite(self):
        _, energy = assemble_fd_generator(PhysicalParams(tau=0.5, sigma=0.75), 30)
        assert np.allclose(energy, energy.T, atol=1e-14)
        assert np.linalg.eigvalsh(energy).min() > 0.0

    def test_velocity_blocks_mirror_modal_layout(self):
        gen, _ = assemble_fd_generator(PhysicalParams(), 10)
        assert np.array_equal(gen[:10, 10:20], np.eye(10))
        assert np.array_equal(gen[20:30, 30:], np.eye(10))
