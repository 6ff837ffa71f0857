"""Spectrum, energy-norm resolvent, exponent fits, and inequality checks.

All norms here are taken in the energy inner product: for M = C^T C the
operator norm of a matrix X is the largest singular value of C X C^{-1},
and the norm of a state vector x is ||C x||_2. Resolvent norms along the
imaginary axis are computed as 1/sigma_min(C (i lambda I - B) C^{-1}),
one dense SVD per point, which is exact within roundoff at desk scale.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from fracbeam.beam_model import ModalBasis, ModalModel, split_state

# Paper-style floor on |lambda| for the lemma-type estimates.
DELTA_FLOOR = 1.0

# Condition limit past which a shifted solve is reported as singular.
COND_LIMIT = 1e14


class CheckFailure(Exception):
    """A verification check did not hold within its stated tolerance."""


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues of the generator plus summary statistics.

    sector_half_angle is the max of atan(|Im| / |Re|) over eigenvalues,
    excluding any with |Re| < 1e-12; 0.0 when all are excluded.
    """

    eigenvalues: np.ndarray
    spectral_abscissa: float
    sector_half_angle: float


@dataclass(frozen=True)
class ResolventSample:
    """One (lambda, ||(i lambda I - B)^(-1)||_M) measurement; lambda > 0 real."""

    lam: float
    norm: float


@dataclass(frozen=True)
class ExponentFit:
    """Least-squares decay exponent of a resolvent sweep.

    phi_hat is the negated slope of log(norm) vs log(lambda) over the window.
    """

    phi_hat: float
    r_squared: float
    window: tuple[float, float]


@dataclass(frozen=True)
class LemmaReport:
    """Empirical ratios (left/right with C_delta = 1) for the lemma-type estimates.

    Arrays hold the per-lambda maxima over trials. no_growth flags record
    whether the last-decade max stays below twice the overall median.
    """

    lambdas: np.ndarray
    resolvent_bound: np.ndarray
    potential_vs_kinetic: np.ndarray
    shear_velocity: np.ndarray | None
    rotation_velocity: np.ndarray | None
    maxima: dict[str, float] = field(default_factory=dict)
    no_growth: dict[str, bool] = field(default_factory=dict)


@dataclass(frozen=True)
class HilleYosidaReport:
    """Per-lambda norms of (lambda I - B)^(-1) against the 1/lambda bound."""

    lambdas: np.ndarray
    norms: np.ndarray
    all_ok: bool
    worst_ratio: float


@dataclass(frozen=True)
class DissipativityReport:
    """Residual of the structural identity M B + B^T M = -2 blockdiag(0, mu^tau, 0, mu^sigma)."""

    residual_rel: float
    sym_part_max_eig: float
    scale: float
    ok: bool


def energy_norm(model: ModalModel, x: np.ndarray) -> float:
    """Norm of a state vector in the energy inner product."""
    return float(np.linalg.norm(model.energy_factor @ x))


def _factor_inverse(model: ModalModel) -> np.ndarray:
    c = model.energy_factor
    return sla.solve_triangular(c, np.eye(c.shape[0]), lower=False)


def compute_spectrum(model: ModalModel) -> SpectrumReport:
    """All 4N eigenvalues of the generator via a dense nonsymmetric eigensolver."""
    try:
        eigenvalues = np.linalg.eigvals(model.generator)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed on generator of size {model.generator.shape}") from exc
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    abscissa = float(eigenvalues.real.max())
    away_from_axis = np.abs(eigenvalues.real) >= 1e-12
    if np.any(away_from_axis):
        lam = eigenvalues[away_from_axis]
        sector = float(np.max(np.arctan(np.abs(lam.imag) / np.abs(lam.real))))
    else:
        sector = 0.0
    return SpectrumReport(eigenvalues=eigenvalues, spectral_abscissa=abscissa, sector_half_angle=sector)


def _shifted_norm(model: ModalModel, shift: complex, c_inv: np.ndarray) -> float:
    """||(shift I - B)^(-1)||_M with a conditioning guard."""
    c = model.energy_factor
    size = model.generator.shape[0]
    transformed = c @ (shift * np.eye(size) - model.generator) @ c_inv
    singular_values = np.linalg.svd(transformed, compute_uv=False)
    if singular_values[-1] == 0.0 or singular_values[0] / singular_values[-1] > COND_LIMIT:
        raise CheckFailure(f"shift {shift} is numerically singular (condition above {COND_LIMIT:g})")
    return float(1.0 / singular_values[-1])


def resolvent_norm(model: ModalModel, lam: float) -> float:
    """||(i lambda I - B)^(-1)|| in the energy norm, via one dense SVD.

    Equals the largest singular value of C (i lambda I - B)^(-1) C^{-1}.
    Raises CheckFailure naming lambda when the shift is numerically singular.
    """
    try:
        return _shifted_norm(model, 1j * float(lam), _factor_inverse(model))
    except CheckFailure as exc:
        raise CheckFailure(f"resolvent at lambda = {lam}: {exc}") from None


def resolvent_sweep(
    model: ModalModel, lambda_grid: np.ndarray, workers: int | None = None
) -> list[ResolventSample]:
    """One ResolventSample per grid point, deterministically ordered by lambda.

    Points are independent; workers > 1 evaluates them in a thread pool.
    Per-point failures are recorded as warnings and skipped unless more than
    10% of the grid fails, which raises.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("lambda grid must be a nonempty 1-d array")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("lambda grid must be strictly increasing")
    c_inv = _factor_inverse(model)

    def sample_one(lam: float) -> ResolventSample | tuple[float, str]:
        try:
            return ResolventSample(lam=float(lam), norm=_shifted_norm(model, 1j * float(lam), c_inv))
        except CheckFailure as exc:
            return (float(lam), str(exc))

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(sample_one, grid))
    else:
        raw = [sample_one(lam) for lam in grid]
    samples = [r for r in raw if isinstance(r, ResolventSample)]
    failures = [r for r in raw if not isinstance(r, ResolventSample)]
    for lam, message in failures:
        warnings.warn(f"resolvent sweep skipped lambda = {lam}: {message}", stacklevel=2)
    if len(failures) > 0.10 * grid.size:
        raise RuntimeError(f"resolvent sweep failed at {len(failures)} of {grid.size} points")
    return sorted(samples, key=lambda s: s.lam)


def default_fit_window(samples: list[ResolventSample]) -> tuple[float, float]:
    """Top two decades of the sampled lambda range."""
    lam_max = max(s.lam for s in samples)
    return (lam_max / 100.0, lam_max)


def fit_decay_exponent(samples: list[ResolventSample], window: tuple[float, float] | None = None) -> ExponentFit:
    """Least-squares slope of log(norm) vs log(lambda); phi_hat = -slope.

    window defaults to the top two decades of the sweep, where truncation
    effects are smallest before the truncation ceiling. At least 3 samples
    must fall inside the window.
    """
    if window is None:
        if not samples:
            raise ValueError("cannot fit an empty sample list")
        window = default_fit_window(samples)
    lo, hi = window
    used = [s for s in samples if lo * (1 - 1e-12) <= s.lam <= hi * (1 + 1e-12)]
    if len(used) < 3:
        raise ValueError(f"need at least 3 samples in window [{lo:g}, {hi:g}], found {len(used)}")
    log_lam = np.log([s.lam for s in used])
    log_norm = np.log([s.norm for s in used])
    if np.ptp(log_lam) == 0.0:
        raise ValueError("degenerate window: all lambda values equal")
    slope, intercept = np.polyfit(log_lam, log_norm, 1)
    residual = log_norm - (slope * log_lam + intercept)
    total = log_norm - log_norm.mean()
    ss_tot = float(total @ total)
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - float(residual @ residual) / ss_tot
    return ExponentFit(
        phi_hat=float(-slope),
        r_squared=r_squared,
        window=(float(min(s.lam for s in used)), float(max(s.lam for s in used))),
    )


def hille_yosida_check(model: ModalModel, lambda_grid: np.ndarray) -> HilleYosidaReport:
    """Check ||(lambda I - B)^(-1)||_M <= (1/lambda)(1 + 1e-8) for real lambda > 0."""
    grid = np.asarray(lambda_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("Hille-Yosida check requires strictly positive real lambda")
    c_inv = _factor_inverse(model)
    norms = np.array([_shifted_norm(model, lam + 0j, c_inv) for lam in grid])
    ratios = norms * grid
    return HilleYosidaReport(
        lambdas=grid,
        norms=norms,
        all_ok=bool(np.all(ratios <= 1.0 + 1e-8)),
        worst_ratio=float(ratios.max()),
    )


def damping_block(model: ModalModel) -> np.ndarray:
    """blockdiag(0, diag(mu^tau), 0, diag(mu^sigma)) of the dissipativity identity."""
    mu = model.basis.mu
    zeros = np.zeros_like(mu)
    return np.diag(np.concatenate([zeros, mu**model.params.tau, zeros, mu**model.params.sigma]))


def verify_dissipativity(model: ModalModel) -> DissipativityReport:
    """Residual of M B + B^T M + 2 blockdiag(0, mu^tau, 0, mu^sigma) = 0.

    Also reports the largest eigenvalue of the symmetric part of M B, which
    must not exceed 1e-10 times the Frobenius scale of M B.
    """
    mb = model.energy @ model.generator
    residual = mb + mb.T + 2.0 * damping_block(model)
    scale = float(np.linalg.norm(mb))
    residual_rel = float(np.linalg.norm(residual)) / scale
    sym_max = float(np.linalg.eigvalsh(0.5 * (mb + mb.T)).max())
    ok = residual_rel <= 1e-12 and sym_max <= 1e-10 * scale
    return DissipativityReport(residual_rel=residual_rel, sym_part_max_eig=sym_max, scale=scale, ok=ok)


def verify_interpolation(
    basis: ModalBasis,
    alpha: float,
    beta: float,
    gamma: float,
    trial_count: int,
    seed: int = 42,
) -> float:
    """Max over random vectors of ||A^beta u|| / (||A^alpha u||^p ||A^gamma u||^q).

    p = (gamma - beta)/(gamma - alpha), q = (beta - alpha)/(gamma - alpha).
    For commuting diagonal positive powers the sharp constant is 1 (Hoelder),
    so the max must stay below 1 + 1e-10; exceeding it raises CheckFailure.
    """
    if not (alpha < beta < gamma):
        raise ValueError(f"need alpha < beta < gamma, got ({alpha}, {beta}, {gamma})")
    if trial_count < 1:
        raise ValueError("trial_count must be >= 1")
    rng = np.random.default_rng(seed)
    mu = basis.mu
    p = (gamma - beta) / (gamma - alpha)
    q = (beta - alpha) / (gamma - alpha)
    worst = 0.0
    for _ in range(trial_count):
        u = rng.standard_normal(basis.n_modes) + 1j * rng.standard_normal(basis.n_modes)
        while not np.any(u):
            u = rng.standard_normal(basis.n_modes) + 1j * rng.standard_normal(basis.n_modes)
        weights = np.abs(u) ** 2
        norm_beta = np.sqrt(float(np.sum(mu ** (2 * beta) * weights)))
        norm_alpha = np.sqrt(float(np.sum(mu ** (2 * alpha) * weights)))
        norm_gamma = np.sqrt(float(np.sum(mu ** (2 * gamma) * weights)))
        worst = max(worst, norm_beta / (norm_alpha**p * norm_gamma**q))
    if worst > 1.0 + 1e-10:
        raise CheckFailure(f"interpolation ratio {worst} exceeds 1 + 1e-10 for ({alpha}, {beta}, {gamma})")
    return worst


def random_unit_state(model: ModalModel, rng: np.random.Generator) -> np.ndarray:
    """Random complex state vector with unit energy norm."""
    size = model.generator.shape[0]
    f = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return f / np.linalg.norm(model.energy_factor @ f)


def _energy_split(model: ModalModel, u: np.ndarray) -> tuple[float, float]:
    """(potential, kinetic) parts of the energy of a complex state.

    potential = kappa ||u_x + psi||^2 + b ||A^(1/2) psi||^2
    kinetic   = rho1 ||w||^2 + rho2 ||v||^2
    """
    p = model.params
    mu = model.basis.mu
    g = model.coupling.g
    a, alpha, b, beta = split_state(u, model.basis.n_modes)
    shear = float(np.real(np.vdot(a, mu * a)) + 2.0 * np.real(np.vdot(b, g @ a)) + np.real(np.vdot(b, b)))
    potential = p.kappa * shear + p.b_coef * float(np.real(np.vdot(b, mu * b)))
    kinetic = p.rho1 * float(np.real(np.vdot(alpha, alpha))) + p.rho2 * float(np.real(np.vdot(beta, beta)))
    return potential, kinetic


def verify_lemma_estimates(
    model: ModalModel, lambda_grid: np.ndarray, trials: int, seed: int = 42
) -> LemmaReport:
    """Empirical ratios for the resolvent-equation estimates, C_delta = 1.

    For random right-hand sides F of unit energy norm and U solving
    (i lambda I - B) U = F, records per lambda the maxima over trials of:

      resolvent_bound:      ||U|| / ||F||            (bounded-resolvent form)
      potential_vs_kinetic: |lambda| [kappa||u_x+psi||^2 + b||A^(1/2)psi||^2]
                            / (|lambda| [rho1||w||^2 + rho2||v||^2] + ||F|| ||U||)
      shear_velocity:       |lambda| ||w||^2 / (||F|| ||U||), when tau >= 1/2
      rotation_velocity:    |lambda| ||v||^2 / (||F|| ||U||), when sigma >= 1/2

    The grid must respect the floor |lambda| >= 1; per-point resolvent
    failures are recorded and skipped.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if np.any(grid < DELTA_FLOOR):
        raise ValueError(f"lambda grid enters the excluded range: the floor |lambda| >= {DELTA_FLOOR:g} applies")
    rng = np.random.default_rng(seed)
    size = model.generator.shape[0]
    n = model.basis.n_modes
    track_shear = model.params.tau >= 0.5
    track_rotation = model.params.sigma >= 0.5
    kept_lambdas: list[float] = []
    res_bound: list[float] = []
    pot_kin: list[float] = []
    shear_vel: list[float] = []
    rot_vel: list[float] = []
    for lam in grid:
        shifted = 1j * lam * np.eye(size) - model.generator
        try:
            lu, piv = sla.lu_factor(shifted)
        except (ValueError, np.linalg.LinAlgError) as exc:
            warnings.warn(f"lemma sweep skipped lambda = {lam}: {exc}", stacklevel=2)
            continue
        m5 = m6 = mw = mv = 0.0
        for _ in range(trials):
            f = random_unit_state(model, rng)
            u = sla.lu_solve((lu, piv), f)
            norm_u = energy_norm(model, u)
            norm_f = 1.0
            potential, kinetic = _energy_split(model, u)
            m5 = max(m5, norm_u / norm_f)
            m6 = max(m6, lam * potential / (lam * kinetic + norm_f * norm_u))
            _, alpha, _, beta = split_state(u, n)
            if track_shear:
                mw = max(mw, lam * float(np.real(np.vdot(alpha, alpha))) / (norm_f * norm_u))
            if track_rotation:
                mv = max(mv, lam * float(np.real(np.vdot(beta, beta))) / (norm_f * norm_u))
        kept_lambdas.append(float(lam))
        res_bound.append(m5)
        pot_kin.append(m6)
        shear_vel.append(mw)
        rot_vel.append(mv)

    lambdas = np.array(kept_lambdas)
    report_arrays = {
        "resolvent_bound": np.array(res_bound),
        "potential_vs_kinetic": np.array(pot_kin),
    }
    if track_shear:
        report_arrays["shear_velocity"] = np.array(shear_vel)
    if track_rotation:
        report_arrays["rotation_velocity"] = np.array(rot_vel)
    last_decade = lambdas >= lambdas.max() / 10.0
    maxima = {key: float(vals.max()) for key, vals in report_arrays.items()}
    no_growth = {
        key: bool(vals[last_decade].max() <= 2.0 * np.median(vals)) for key, vals in report_arrays.items()
    }
    return LemmaReport(
        lambdas=lambdas,
        resolvent_bound=report_arrays["resolvent_bound"],
        potential_vs_kinetic=report_arrays["potential_vs_kinetic"],
        shear_velocity=report_arrays.get("shear_velocity"),
        rotation_velocity=report_arrays.get("rotation_velocity"),
        maxima=maxima,
        no_growth=no_growth,
    )


def static_solve(model: ModalModel, f: np.ndarray) -> np.ndarray:
    """Solve B U = F (0 is in the resolvent set for positive parameters)."""
    f = np.asarray(f)
    if not np.all(np.isfinite(f)):
        raise ValueError("right-hand side must be finite")
    try:
        u = np.linalg.solve(model.generator, f)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("generator is singular; positive parameters should prevent this") from exc
    if not np.all(np.isfinite(u)):
        raise RuntimeError("static solve produced non-finite values")
    return u
