"""Experiment orchestration: config parsing, subcommands, CSV emission.

Subcommands: verify, spectrum, resolvent, fit-exponent, simulate, region-map.
Exit codes: 0 success, 1 check failure, 2 usage or config error. All CSV
output is UTF-8 with LF line endings and floats rendered with 17 significant
digits, so identical config and seed reproduce byte-identical files.

Config files are line-oriented `key = value`; blank lines and lines starting
with `#` are ignored. Keys: rho1, rho2, kappa, b, L, tau, sigma, n_modes,
seed, lambda_min, lambda_max, points_per_decade, t_final, steps, tau_grid,
sigma_grid, tolerance. Omitted keys default to rho1 = rho2 = kappa = b = 1,
L = pi, tau = sigma = 1, n_modes = 64, seed = 42, lambda range [1, 1e4] at
20 points per decade, t_final = 40 with 800 steps, tau/sigma grids
{0.25, 0.5, 0.75, 1.0}, tolerance 0.05.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, replace

import numpy as np
import scipy.integrate
import scipy.linalg as sla

from fracbeam import beam_model, spectral_analysis, time_evolution
from fracbeam.beam_model import ModalModel, PhysicalParams, build_model
from fracbeam.spectral_analysis import CheckFailure

CSV_SCHEMAS = {
    "spectrum": ["re", "im"],
    "resolvent": ["lambda", "norm"],
    "energy": ["t", "energy"],
    "regionmap": ["tau", "sigma", "region", "phi_theory", "phi_hat", "r2", "pass"],
    "checks": ["check", "status", "detail"],
}

_GRID_KEYS = {"tau_grid", "sigma_grid"}
_INT_KEYS = {"n_modes", "seed", "points_per_decade", "steps"}
_FLOAT_KEYS = {"rho1", "rho2", "kappa", "b", "L", "tau", "sigma", "lambda_min", "lambda_max", "t_final", "tolerance"}
_ALL_KEYS = _GRID_KEYS | _INT_KEYS | _FLOAT_KEYS

_PARAM_FIELD = {"rho1": "rho1", "rho2": "rho2", "kappa": "kappa", "b": "b_coef", "L": "length",
                "tau": "tau", "sigma": "sigma", "n_modes": "n_modes"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run settings; see the module docstring for defaults."""

    params: PhysicalParams = PhysicalParams()
    seed: int = 42
    lambda_min: float = 1.0
    lambda_max: float = 1e4
    points_per_decade: int = 20
    t_final: float = 40.0
    steps: int = 800
    tau_grid: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    sigma_grid: tuple[float, ...] = (0.25, 0.5, 0.75, 1.0)
    tolerance: float = 0.05


@dataclass(frozen=True)
class RegionClassification:
    """One region-map row: the Gevrey/analyticity classification of (tau, sigma)."""

    tau: float
    sigma: float
    region: str
    phi_theory: float
    phi_hat: float
    r_squared: float
    passed: bool


class ConfigError(Exception):
    """Malformed or out-of-range configuration input."""


def _parse_scalar(key: str, text: str, line_no: int):
    try:
        if key in _INT_KEYS:
            return int(text)
        return float(text)
    except ValueError:
        raise ConfigError(f"line {line_no}: cannot parse value for {key}: {text!r}") from None


def _check_range(key: str, value, line_no: int) -> None:
    positives = {"rho1", "rho2", "kappa", "b", "L", "lambda_min", "lambda_max", "t_final"}
    if key in positives and not value > 0:
        raise ConfigError(f"line {line_no}: {key} must be strictly positive, got {value}")
    if key in {"tau", "sigma"} and not (0.0 <= value <= 1.0):
        raise ConfigError(f"line {line_no}: {key} must lie in [0, 1], got {value}")
    if key == "n_modes" and value < 1:
        raise ConfigError(f"line {line_no}: n_modes must be >= 1, got {value}")
    if key in {"points_per_decade", "steps"} and value < 1:
        raise ConfigError(f"line {line_no}: {key} must be >= 1, got {value}")
    if key == "seed" and value < 0:
        raise ConfigError(f"line {line_no}: seed must be >= 0, got {value}")
    if key == "tolerance" and value < 0:
        raise ConfigError(f"line {line_no}: tolerance must be >= 0, got {value}")


def parse_config(text: str) -> RunConfig:
    """Parse line-oriented `key = value` text into a validated RunConfig."""
    settings: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        if key in _GRID_KEYS:
            try:
                grid = tuple(float(part) for part in value_text.split(","))
            except ValueError:
                raise ConfigError(f"line {line_no}: cannot parse value for {key}: {value_text!r}") from None
            for g in grid:
                if not (0.0 <= g <= 1.0):
                    raise ConfigError(f"line {line_no}: {key} entries must lie in [0, 1], got {g}")
            settings[key] = grid
        else:
            value = _parse_scalar(key, value_text, line_no)
            _check_range(key, value, line_no)
            settings[key] = value

    param_kwargs = {field: settings.pop(key) for key, field in _PARAM_FIELD.items() if key in settings}
    params = PhysicalParams(**param_kwargs)
    params.validate()
    config = RunConfig(params=params, **settings)
    if config.lambda_min >= config.lambda_max:
        raise ConfigError(f"lambda_min = {config.lambda_min} must be below lambda_max = {config.lambda_max}")
    return config


def format_value(value) -> str:
    """CSV cell rendering: floats at 17 significant digits, bools as true/false."""
    if isinstance(value, bool) or isinstance(value, np.bool_):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(rows, columns: list[str], path: str) -> None:
    """Emit rows under a header, UTF-8, LF endings, deterministic rendering."""
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} does not match schema width {len(columns)}")
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


def read_resolvent_csv(path: str) -> list[spectral_analysis.ResolventSample]:
    """Read a (lambda, norm) CSV produced by the resolvent subcommand."""
    with open(path, encoding="utf-8") as handle:
        lines = [line.strip() for line in handle if line.strip()]
    if not lines or lines[0].split(",") != CSV_SCHEMAS["resolvent"]:
        raise ConfigError(f"{path}: expected header 'lambda,norm'")
    samples = []
    for line in lines[1:]:
        lam_text, norm_text = line.split(",")
        samples.append(spectral_analysis.ResolventSample(lam=float(lam_text), norm=float(norm_text)))
    return samples


def lambda_grid(lambda_min: float, lambda_max: float, points_per_decade: int) -> np.ndarray:
    """Log-spaced grid with the requested density, endpoints included."""
    decades = math.log10(lambda_max / lambda_min)
    count = max(2, round(points_per_decade * decades) + 1)
    return np.logspace(math.log10(lambda_min), math.log10(lambda_max), count)


def classify_region(tau: float, sigma: float) -> str:
    """R_A on [1/2,1]^2, R_CG on the rest of the open unit square, none outside."""
    if 0.5 <= tau <= 1.0 and 0.5 <= sigma <= 1.0:
        return "R_A"
    if 0.0 < tau < 1.0 and 0.0 < sigma < 1.0:
        return "R_CG"
    return "none"


def phi_theory(tau: float, sigma: float) -> float:
    """Predicted resolvent decay exponent 2m/(m+1), m = min(tau, sigma)."""
    m = min(tau, sigma)
    return 2.0 * m / (m + 1.0)


def region_map(config: RunConfig) -> list[RegionClassification]:
    """Sweep the (tau, sigma) grid; fit phi_hat per cell; classify and gate."""
    rows = []
    for tau in config.tau_grid:
        for sigma in config.sigma_grid:
            params = replace(config.params, tau=tau, sigma=sigma)
            model = build_model(params)
            samples = spectral_analysis.resolvent_sweep(
                model, lambda_grid(config.lambda_min, config.lambda_max, config.points_per_decade)
            )
            fit = spectral_analysis.fit_decay_exponent(samples)
            theory = phi_theory(tau, sigma)
            rows.append(
                RegionClassification(
                    tau=tau,
                    sigma=sigma,
                    region=classify_region(tau, sigma),
                    phi_theory=theory,
                    phi_hat=fit.phi_hat,
                    r_squared=fit.r_squared,
                    passed=bool(fit.phi_hat >= theory - config.tolerance),
                )
            )
    return rows


def _quadrature_coupling_entry(length: float, k: int, j: int) -> float:
    def integrand(x: float) -> float:
        scale = 2.0 / length
        return scale * (j * math.pi / length) * math.cos(j * math.pi * x / length) * math.sin(k * math.pi * x / length)

    value, _ = scipy.integrate.quad(integrand, 0.0, length, limit=200)
    return value


def run_verify(config: RunConfig) -> list[tuple[str, bool, str]]:
    """The invariant suite of the three computation modules, at the config's params.

    Returns (name, ok, detail) triples; the CLI renders one line per check.
    """
    checks: list[tuple[str, bool, str]] = []
    params = config.params
    model = build_model(params)
    mu = model.basis.mu
    n = params.n_modes

    checks.append(("params_valid", True, "all ranges respected"))

    ascending = bool(np.all(np.diff(mu) > 0)) and bool(np.all(mu > 0))
    checks.append(("basis_ascending_positive", ascending, f"mu_1 = {mu[0]:.6g}, mu_N = {mu[-1]:.6g}"))

    worst_quad = 0.0
    for k in range(1, min(8, n) + 1):
        for j in range(1, min(8, n) + 1):
            reference = _quadrature_coupling_entry(params.length, k, j)
            worst_quad = max(worst_quad, abs(model.coupling.g[k - 1, j - 1] - reference))
    checks.append(("coupling_quadrature", worst_quad <= 1e-10, f"max abs deviation {worst_quad:.3g}"))

    g = model.coupling.g
    skew = float(np.max(np.abs(g + g.T)))
    idx = np.arange(1, n + 1)
    parity_zeros = float(np.max(np.abs(g[((idx[:, None] + idx[None, :]) % 2) == 0])))
    structural = skew == 0.0 and parity_zeros == 0.0
    checks.append(("coupling_structure", structural, f"skew residual {skew:g}, even-parity residual {parity_zeros:g}"))

    min_eig = float(np.linalg.eigvalsh(model.energy).min())
    checks.append(("energy_positive_definite", min_eig > 0.0, f"min eigenvalue {min_eig:.6g}"))

    dissip_ok = True
    dissip_detail = []
    for small_n in sorted({1, 4, n}):
        small = build_model(replace(params, n_modes=small_n))
        report = spectral_analysis.verify_dissipativity(small)
        dissip_ok = dissip_ok and report.ok
        dissip_detail.append(f"N={small_n}: rel={report.residual_rel:.3g}")
    checks.append(("dissipativity_identity", dissip_ok, "; ".join(dissip_detail)))

    hy = spectral_analysis.hille_yosida_check(model, np.array([0.01, 1.0, 100.0]))
    checks.append(("hille_yosida", hy.all_ok, f"worst lambda*norm = {hy.worst_ratio:.12g}"))

    spectrum = spectral_analysis.compute_spectrum(model)
    eigenvalues = spectrum.eigenvalues
    unpaired = 0
    for lam in eigenvalues:
        if abs(lam.imag) > 1e-8 and np.min(np.abs(eigenvalues - lam.conjugate())) > 1e-8 * max(1.0, abs(lam)):
            unpaired += 1
    checks.append(("spectrum_conjugate_symmetry", unpaired == 0, f"{unpaired} unpaired eigenvalues"))

    checks.append(
        ("spectral_abscissa_negative", spectrum.spectral_abscissa < 0, f"abscissa = {spectrum.spectral_abscissa:.6g}")
    )

    rng = np.random.default_rng(config.seed)
    f = rng.standard_normal(4 * n)
    u = spectral_analysis.static_solve(model, f)
    residual = float(np.linalg.norm(model.generator @ u - f) / np.linalg.norm(f))
    c_observed = spectral_analysis.energy_norm(model, u) / spectral_analysis.energy_norm(model, f)
    checks.append(
        ("static_solve_roundtrip", residual <= 1e-10, f"relative residual {residual:.3g}, C = {c_observed:.6g}")
    )

    sym_dev = 0.0
    for lam in (3.7, 41.0):
        plus = spectral_analysis.resolvent_norm(model, lam)
        minus = spectral_analysis.resolvent_norm(model, -lam)
        sym_dev = max(sym_dev, abs(plus - minus) / plus)
    checks.append(("resolvent_symmetry", sym_dev <= 1e-8, f"max relative asymmetry {sym_dev:.3g}"))

    interp_ok = True
    interp_detail = []
    triples = [(0.0, 0.5, 1.0)]
    if params.tau > 0:
        triples.append((-0.5, 0.0, params.tau / 2.0))
    if params.sigma > 0 and params.sigma != params.tau:
        triples.append((-0.5, 0.0, params.sigma / 2.0))
    for triple in triples:
        try:
            worst = spectral_analysis.verify_interpolation(model.basis, *triple, trial_count=200, seed=config.seed)
            interp_detail.append(f"{triple}: max {worst:.12g}")
        except CheckFailure as exc:
            interp_ok = False
            interp_detail.append(str(exc))
    checks.append(("interpolation_inequality", interp_ok, "; ".join(interp_detail)))

    c = model.energy_factor
    c_inv = sla.solve_triangular(c, np.eye(4 * n), lower=False)
    contraction_worst = 0.0
    for t in (0.1, 1.0, 5.0):
        propagator = sla.expm(model.generator * t)
        contraction_worst = max(contraction_worst, float(np.linalg.svd(c @ propagator @ c_inv, compute_uv=False)[0]))
    checks.append(("semigroup_contraction", contraction_worst <= 1.0 + 1e-9, f"max norm {contraction_worst:.12g}"))

    t_a, t_b = 0.7, 1.9
    combined = sla.expm(model.generator * (t_a + t_b))
    composed = sla.expm(model.generator * t_a) @ sla.expm(model.generator * t_b)
    semigroup_err = float(np.linalg.norm(combined - composed) / np.linalg.norm(combined))
    checks.append(("semigroup_property", semigroup_err <= 1e-8, f"relative deviation {semigroup_err:.3g}"))

    x0 = rng.standard_normal(4 * n)
    x0 /= spectral_analysis.energy_norm(model, x0)
    trajectory = time_evolution.propagate(model, x0, np.linspace(0.0, 2.0, 201))
    try:
        trace = time_evolution.energy_trace(model, trajectory)
        checks.append(("energy_monotone", True, f"E(0) = {trace.energies[0]:.6g}, E(2) = {trace.energies[-1]:.6g}"))
    except CheckFailure as exc:
        checks.append(("energy_monotone", False, str(exc)))

    lemma = spectral_analysis.verify_lemma_estimates(
        model, np.logspace(0, 2, 11), trials=3, seed=config.seed
    )
    lemma_ok = all(math.isfinite(v) for v in lemma.maxima.values())
    lemma_detail = ", ".join(f"{key} max {value:.4g}" for key, value in sorted(lemma.maxima.items()))
    checks.append(("lemma_ratios_finite", lemma_ok, lemma_detail))

    probe = time_evolution.derivative_norm_probe(model, np.array([0.01 * 2**k for k in range(8)]))
    probe_ok = bool(np.all(np.isfinite(probe.norms)))
    checks.append(("derivative_probe_finite", probe_ok, f"sup t*norm = {probe.sup_t_norm:.6g}"))

    return checks


def _cmd_verify(config: RunConfig, out_path: str | None) -> int:
    checks = run_verify(config)
    for name, ok, detail in checks:
        print(f"check={name} status={'PASS' if ok else 'FAIL'} {detail}")
    if out_path:
        write_csv(
            [(name, "PASS" if ok else "FAIL", detail) for name, ok, detail in checks],
            CSV_SCHEMAS["checks"],
            out_path,
        )
    return 0 if all(ok for _, ok, _ in checks) else 1


def _cmd_spectrum(config: RunConfig, out_path: str) -> int:
    model = build_model(config.params)
    report = spectral_analysis.compute_spectrum(model)
    write_csv([(lam.real, lam.imag) for lam in report.eigenvalues], CSV_SCHEMAS["spectrum"], out_path)
    print(
        f"spectral_abscissa={format_value(report.spectral_abscissa)} "
        f"sector_half_angle={format_value(report.sector_half_angle)}"
    )
    return 0


def _cmd_resolvent(config: RunConfig, out_path: str) -> int:
    model = build_model(config.params)
    grid = lambda_grid(config.lambda_min, config.lambda_max, config.points_per_decade)
    samples = spectral_analysis.resolvent_sweep(model, grid)
    write_csv([(s.lam, s.norm) for s in samples], CSV_SCHEMAS["resolvent"], out_path)
    return 0


def _cmd_fit_exponent(config: RunConfig, in_path: str, out_path: str | None, window_given: bool) -> int:
    samples = read_resolvent_csv(in_path)
    window = (config.lambda_min, config.lambda_max) if window_given else None
    try:
        fit = spectral_analysis.fit_decay_exponent(samples, window)
    except ValueError as exc:
        print(f"check=fit_exponent status=FAIL {exc}")
        return 1
    print(
        f"phi_hat={format_value(fit.phi_hat)} r_squared={format_value(fit.r_squared)} "
        f"window=[{fit.window[0]:g},{fit.window[1]:g}]"
    )
    if out_path:
        write_csv(
            [(fit.phi_hat, fit.r_squared, fit.window[0], fit.window[1])],
            ["phi_hat", "r_squared", "window_min", "window_max"],
            out_path,
        )
    return 0


def _cmd_simulate(config: RunConfig, out_path: str) -> int:
    model = build_model(config.params)
    rng = np.random.default_rng(config.seed)
    x0 = rng.standard_normal(4 * config.params.n_modes)
    x0 /= spectral_analysis.energy_norm(model, x0)
    times = np.linspace(0.0, config.t_final, config.steps + 1)
    trajectory = time_evolution.propagate(model, x0, times)
    try:
        trace = time_evolution.energy_trace(model, trajectory)
    except CheckFailure as exc:
        print(f"check=energy_monotone status=FAIL {exc}")
        return 1
    write_csv(list(zip(trace.times, trace.energies)), CSV_SCHEMAS["energy"], out_path)
    print(f"fitted_rate={format_value(trace.fitted_rate)} method={trajectory.method}")
    return 0


def _cmd_region_map(config: RunConfig, out_path: str) -> int:
    rows = region_map(config)
    write_csv(
        [(r.tau, r.sigma, r.region, r.phi_theory, r.phi_hat, r.r_squared, r.passed) for r in rows],
        CSV_SCHEMAS["regionmap"],
        out_path,
    )
    failed = [r for r in rows if not r.passed]
    for r in failed:
        print(
            f"check=region_map status=FAIL tau={r.tau:g} sigma={r.sigma:g} "
            f"phi_hat={r.phi_hat:.6g} bound={r.phi_theory - config.tolerance:.6g}"
        )
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracbeam",
        description="Verification experiments for the fractionally damped Timoshenko beam model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "spectrum", "resolvent", "fit-exponent", "simulate", "region-map"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="path to a key = value config file")
        cmd.add_argument("--out", help="output CSV path")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--lambda-min", type=float, dest="lambda_min")
        cmd.add_argument("--lambda-max", type=float, dest="lambda_max")
        cmd.add_argument("--points-per-decade", type=int, dest="points_per_decade")
        cmd.add_argument("--t-final", type=float, dest="t_final")
        cmd.add_argument("--steps", type=int)
        cmd.add_argument("--tau-grid", dest="tau_grid", help="comma-separated tau values")
        cmd.add_argument("--sigma-grid", dest="sigma_grid", help="comma-separated sigma values")
        cmd.add_argument("--tolerance", type=float)
        if name == "fit-exponent":
            cmd.add_argument("--in", dest="in_path", help="resolvent CSV to read")
    return parser


def _merged_config(args: argparse.Namespace) -> RunConfig:
    text = ""
    if args.config:
        with open(args.config, encoding="utf-8") as handle:
            text = handle.read()
    config = parse_config(text)
    overrides = {}
    for key in ("seed", "lambda_min", "lambda_max", "points_per_decade", "t_final", "steps", "tolerance"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    for key in ("tau_grid", "sigma_grid"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = tuple(float(part) for part in value.split(","))
    config = replace(config, **overrides)
    if config.lambda_min >= config.lambda_max:
        raise ConfigError(f"lambda_min = {config.lambda_min} must be below lambda_max = {config.lambda_max}")
    return config


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _merged_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    needs_out = args.command in {"spectrum", "resolvent", "simulate", "region-map"}
    if needs_out and not args.out:
        print(f"usage error: {args.command} requires --out", file=sys.stderr)
        return 2
    if args.command == "verify":
        return _cmd_verify(config, args.out)
    if args.command == "spectrum":
        return _cmd_spectrum(config, args.out)
    if args.command == "resolvent":
        return _cmd_resolvent(config, args.out)
    if args.command == "fit-exponent":
        if not args.in_path:
            print("usage error: fit-exponent requires --in", file=sys.stderr)
            return 2
        window_given = args.lambda_min is not None or args.lambda_max is not None
        return _cmd_fit_exponent(config, args.in_path, args.out, window_given)
    if args.command == "simulate":
        return _cmd_simulate(config, args.out)
    if args.command == "region-map":
        return _cmd_region_map(config, args.out)
    raise AssertionError(f"unhandled command {args.command}")


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
