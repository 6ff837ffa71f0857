"""Numerical verification toolkit for a Timoshenko beam with two fractional dampings.

The beam system

    rho1 u_tt - kappa (u_x + psi)_x + A^tau u_t   = 0
    rho2 psi_tt - b psi_xx + kappa (u_x + psi) + A^sigma psi_t = 0

with A = -d^2/dx^2 under Dirichlet conditions on (0, L) is reduced to a
first-order system U' = B U and discretized by Galerkin truncation in the
exact sine eigenbasis of A. Fractional powers are then diagonal and the
dissipativity of B holds as an exact matrix identity. The package computes
spectra, energy-norm resolvents along the imaginary axis, decay-exponent
fits, semigroup propagation, and the full battery of inequality checks that
characterize exponential stability, Gevrey regularity, and analyticity of
the solution semigroup.
"""

from fracbeam.beam_model import (
    CouplingMatrix,
    ModalBasis,
    ModalModel,
    PhysicalParams,
    assemble_energy_matrix,
    assemble_fd_generator,
    assemble_generator,
    build_coupling_matrix,
    build_modal_basis,
    build_model,
    join_state,
    split_state,
)

__all__ = [
    "CouplingMatrix",
    "ModalBasis",
    "ModalModel",
    "PhysicalParams",
    "assemble_energy_matrix",
    "assemble_fd_generator",
    "assemble_generator",
    "build_coupling_matrix",
    "build_modal_basis",
    "build_model",
    "join_state",
    "split_state",
]
