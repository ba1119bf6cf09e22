"""Command-line entry point: configuration, sweeps, and artifact output.

Each run writes two artifacts into the output directory:

* ``records.csv`` with the fixed column set
  experiment, J, beta, t, T, n_sites, delta, instance, value_perturbed,
  value_ideal, abs_error, diag_zero_modes, diag_steps
  (decimal fields carry 17 significant digits; empty means not applicable;
  rows are sorted by key so output is independent of evaluation order).
* ``summary.json`` with a schema-version field, the full configuration echo,
  fit results, per-experiment assertion outcomes, and wall-clock timings.

For fourier-certify the CSV reuses the schema with a documented mapping:
n_sites holds the truncation order, delta the window parameter, beta the
thermal parameter, value_ideal the asserted bound and value_perturbed the
measured grid maximum.

Exit codes: 0 success, 1 configuration error, 2 built-in assertion failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from fermistab import experiments as xp
from fermistab.correlations import evolve, gibbs_correlation, ground_state_correlation
from fermistab.fourier import certify_sign_error, certify_sign_max, certify_tanh_error
from fermistab.hamiltonian import NumericalError, PERTURB_EXISTING, PERTURB_ALL_LOCAL
from fermistab.lattice import LatticeSpec
from fermistab.oracle import (
    DegenerateGroundState,
    exact_evolved_correlation,
    exact_gibbs_correlation,
    exact_ground_correlation,
)

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "ssh-stability",
    "dynamics",
    "gibbs",
    "anderson",
    "nonlocal-counterexample",
    "thermo-extrapolate",
    "adiabatic",
    "fourier-certify",
    "oracle-check",
)


class ConfigError(ValueError):
    pass


def _default_panel_c_grid():
    return [round(0.5 + 0.05 * k, 2) for k in range(21)]


@dataclass
class RunConfig:
    """Full run configuration; unknown keys are rejected on load."""

    experiment: str
    out_dir: str = ""
    seed: int = 12345
    threads: int = 0
    instances: int | None = None
    perturbation_mode: str = PERTURB_EXISTING
    # grids
    deltas: list = field(default_factory=lambda: [0.001, 0.003, 0.01, 0.03, 0.1])
    n_sites: list | None = None
    t_values: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0, 8.0])
    T_values: list | None = None
    betas: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 5.0])
    J_values: list = field(default_factory=lambda: [0.5, 1.0, 1.5])
    M_values: list = field(default_factory=lambda: [1, 2, 5, 10, 50, 100, 500])
    etas: list = field(default_factory=lambda: [0.05, 0.1, 0.3])
    # scalars
    J: float = 1.0
    panels: list = field(default_factory=lambda: ["a", "b", "c"])
    panel_c_delta: float = 0.03
    panel_c_n: int = 200
    panel_c_J_values: list = field(default_factory=_default_panel_c_grid)
    window_scale: float = 2.0
    initial: str = "cdw"
    schedule: str = "smooth"
    steps_per_time: float = 2.0
    min_steps: int = 200
    size_ratio: float = 3.0
    n_cap: int = 400
    calibration_instances: int = 48
    calibration_n: int = 200
    check_convergence: bool = True
    n_cases: int = 20

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config must name an experiment")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.perturbation_mode not in (PERTURB_EXISTING, PERTURB_ALL_LOCAL):
            raise ConfigError(f"unknown perturbation mode {self.perturbation_mode!r}")
        if self.schedule not in ("smooth", "linear"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.initial not in ("cdw", "vacuum"):
            raise ConfigError(f"unknown initial state {self.initial!r}")
        if any(d < 0 for d in self.deltas):
            raise ConfigError("deltas must be nonnegative")
        if self.instances is not None and self.instances < 1:
            raise ConfigError("instances must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    def resolved_out_dir(self) -> str:
        if self.out_dir:
            return self.out_dir
        return os.environ.get("FERMISTAB_OUT", "runs")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def write_records_csv(path: str, records) -> None:
    cols = xp.ExperimentRecord.CSV_FIELDS
    lines = [",".join(cols)]
    for rec in sorted(records, key=lambda r: r.key()):
        lines.append(",".join(format_cell(getattr(rec, c)) for c in cols))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def write_summary_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiment dispatch
# ---------------------------------------------------------------------------


def _run_ssh_stability(cfg: RunConfig) -> xp.SweepResult:
    instances = 500 if cfg.instances is None else cfg.instances
    n_values = cfg.n_sites or [50, 100, 200, 400]
    deltas = [d for d in cfg.deltas if d > 0]
    return xp.ground_state_stability_sweep(
        J_values=cfg.J_values,
        deltas=deltas,
        n_values=n_values,
        instances=instances,
        seed=cfg.seed,
        mode=cfg.perturbation_mode,
        threads=cfg.threads,
        panel_c_J_values=cfg.panel_c_J_values if "c" in cfg.panels else None,
        panel_c_delta=cfg.panel_c_delta,
        panel_c_n=cfg.panel_c_n,
        panel_c_instances=instances,
    )


def _run_dynamics(cfg: RunConfig) -> xp.SweepResult:
    instances = 100 if cfg.instances is None else cfg.instances
    return xp.dynamics_stability_sweep(
        J=cfg.J,
        t_values=cfg.t_values,
        deltas=[d for d in cfg.deltas if d > 0],
        n_values=cfg.n_sites or [100, 400],
        instances=instances,
        seed=cfg.seed,
        mode=cfg.perturbation_mode,
        initial=cfg.initial,
        threads=cfg.threads,
    )


def _run_gibbs(cfg: RunConfig) -> xp.SweepResult:
    instances = 200 if cfg.instances is None else cfg.instances
    return xp.gibbs_stability_sweep(
        J=cfg.J,
        betas=cfg.betas,
        deltas=[d for d in cfg.deltas if d > 0],
        n_values=cfg.n_sites or [100, 200],
        instances=instances,
        seed=cfg.seed,
        mode=cfg.perturbation_mode,
        threads=cfg.threads,
    )


def _run_anderson(cfg: RunConfig) -> xp.SweepResult:
    instances = 100 if cfg.instances is None else cfg.instances
    deltas = [d for d in cfg.deltas if d > 0] or [0.125, 0.25, 0.5]
    return xp.anderson_counterexample(
        deltas=deltas,
        n_values=cfg.n_sites or [100, 200, 400],
        instances=instances,
        seed=cfg.seed,
        window_scale=cfg.window_scale,
        threads=cfg.threads,
    )


def _run_nonlocal(cfg: RunConfig) -> xp.SweepResult:
    return xp.gapped_nonlocal_counterexample(
        deltas=cfg.deltas,
        n_values=cfg.n_sites or [10, 100, 1000],
    )


def _run_thermo(cfg: RunConfig) -> xp.SweepResult:
    return xp.thermodynamic_extrapolation(
        J=cfg.J,
        n_values=cfg.n_sites or [52, 100, 200, 400, 800],
    )


def _run_adiabatic(cfg: RunConfig) -> xp.SweepResult:
    instances = 2 if cfg.instances is None else cfg.instances
    return xp.adiabatic_run(
        J_target=cfg.J,
        deltas=[d for d in cfg.deltas if d > 0] or [0.003, 0.01, 0.03],
        T_values=cfg.T_values,
        instances=instances,
        seed=cfg.seed,
        mode=cfg.perturbation_mode,
        schedule=cfg.schedule,
        steps_per_time=cfg.steps_per_time,
        min_steps=cfg.min_steps,
        size_ratio=cfg.size_ratio,
        n_cap=cfg.n_cap,
        calibration_instances=cfg.calibration_instances,
        calibration_n=cfg.calibration_n,
        threads=cfg.threads,
        check_convergence=cfg.check_convergence,
    )


def _run_fourier_certify(cfg: RunConfig) -> xp.SweepResult:
    result = xp.SweepResult("fourier-certify")
    reports = []
    for M in cfg.M_values:
        M = int(M)
        for eta in cfg.etas:
            rep = certify_sign_error(M, eta)
            reports.append(rep.as_dict())
            result.records.append(
                xp.ExperimentRecord(
                    experiment="fourier-certify",
                    n_sites=M,
                    delta=eta,
                    instance=0,
                    value_perturbed=rep.measured_max,
                    value_ideal=rep.bound,
                    abs_error=rep.measured_max,
                )
            )
        rep = certify_sign_max(M)
        reports.append(rep.as_dict())
        result.records.append(
            xp.ExperimentRecord(
                experiment="fourier-certify",
                n_sites=M,
                instance=1,
                value_perturbed=rep.measured_max,
                value_ideal=rep.bound,
                abs_error=rep.measured_max,
            )
        )
        for beta in cfg.betas:
            rep = certify_tanh_error(M, beta)
            reports.append(rep.as_dict())
            result.records.append(
                xp.ExperimentRecord(
                    experiment="fourier-certify",
                    beta=beta,
                    n_sites=M,
                    instance=2,
                    value_perturbed=rep.measured_max,
                    value_ideal=rep.bound,
                    abs_error=rep.measured_max,
                )
            )
    result.summary["reports"] = reports
    result.summary["all_passed"] = all(r["passed"] for r in reports)
    return result


def _oracle_random_coupling(lattice, rng, scale):
    n = lattice.n_modes
    mat = np.zeros((n, n), dtype=complex)
    sites = [lattice.site_of_mode(i) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if lattice.torus_distance(sites[i], sites[j]) <= lattice.R:
                a = scale * rng.uniform(-1, 1)
                mat[i, j] = 1j * a
                mat[j, i] = -1j * a
    from fermistab.hamiltonian import CouplingMatrix

    return CouplingMatrix(lattice, mat, scale)


def run_oracle_check(cfg: RunConfig) -> xp.SweepResult:
    """Convention gate: random small instances vs the Fock-space oracle."""
    result = xp.SweepResult("oracle-check")
    lattice = LatticeSpec(d=1, L=4, R=2)
    rng = np.random.default_rng(cfg.seed)
    done = 0
    attempt = 0
    while done < cfg.n_cases:
        attempt += 1
        if attempt > 50 * cfg.n_cases:
            raise NumericalError("could not sample enough non-degenerate instances")
        H = _oracle_random_coupling(lattice, rng, 0.7)
        H0 = _oracle_random_coupling(lattice, rng, 0.7)
        beta = float(rng.uniform(0.2, 2.0))
        t = float(rng.uniform(0.2, 2.0))
        try:
            dev_g = np.abs(
                exact_ground_correlation(H).mat - ground_state_correlation(H).mat
            ).max()
            dev_b = np.abs(
                exact_gibbs_correlation(H, beta).mat - gibbs_correlation(H, beta).mat
            ).max()
            dev_t = np.abs(
                exact_evolved_correlation(H0, H, t).mat
                - evolve(ground_state_correlation(H0), H, t).mat
            ).max()
        except DegenerateGroundState:
            continue
        dev = float(max(dev_g, dev_b, dev_t))
        result.records.append(
            xp.ExperimentRecord(
                experiment="oracle-check",
                beta=beta,
                t=t,
                n_sites=lattice.n_sites,
                instance=done,
                abs_error=dev,
            )
        )
        done += 1
    worst = max(r.abs_error for r in result.records)
    result.summary["max_deviation"] = worst
    return result


RUNNERS = {
    "ssh-stability": _run_ssh_stability,
    "dynamics": _run_dynamics,
    "gibbs": _run_gibbs,
    "anderson": _run_anderson,
    "nonlocal-counterexample": _run_nonlocal,
    "thermo-extrapolate": _run_thermo,
    "adiabatic": _run_adiabatic,
    "fourier-certify": _run_fourier_certify,
    "oracle-check": run_oracle_check,
}


# ---------------------------------------------------------------------------
# built-in assertions
# ---------------------------------------------------------------------------


def builtin_assertions(cfg: RunConfig, result: xp.SweepResult) -> list[dict]:
    checks = [
        {
            "name": "records-nonempty",
            "passed": len(result.records) > 0,
            "detail": f"{len(result.records)} records",
        }
    ]
    name = result.experiment
    if name == "ssh-stability" and "plateau_rel_change" in result.summary:
        worst = max(r["rel_change"] for r in result.summary["plateau_rel_change"])
        checks.append(
            {
                "name": "plateau-flattening",
                "passed": worst < 0.25,
                "detail": f"worst relative change between top sizes: {worst:.3f}",
            }
        )
    if name == "dynamics":
        slopes = [f.exponent for k, f in result.fits.items() if k.startswith("error-vs-t")]
        if slopes:
            checks.append(
                {
                    "name": "dynamics-sublinear-growth",
                    "passed": max(slopes) <= 1.2,
                    "detail": f"max log-log slope in t: {max(slopes):.3f}",
                }
            )
    if name == "gibbs":
        rows = result.summary["mean_errors"]
        ok = True
        for beta in {r["beta"] for r in rows}:
            for n in {r["n_sites"] for r in rows}:
                errs = [
                    r["mean_abs_error"]
                    for r in sorted(rows, key=lambda r: r["delta"])
                    if r["beta"] == beta and r["n_sites"] == n
                ]
                ok = ok and all(a <= b * (1 + 1e-9) for a, b in zip(errs, errs[1:]))
        checks.append(
            {
                "name": "gibbs-monotone-in-delta",
                "passed": ok,
                "detail": "mean error non-increasing as delta decreases",
            }
        )
    if name == "anderson":
        rows = result.summary["window_density"]
        top = max(rows, key=lambda r: (r["n_sites"], r["delta"]))
        checks.append(
            {
                "name": "localization-contrast",
                "passed": top["ratio"] > 5.0,
                "detail": f"disordered/clean window density ratio {top['ratio']:.1f}",
            }
        )
    if name == "nonlocal-counterexample":
        exact = all(
            abs(r.value_perturbed - (1 + r.delta**2) ** (-r.n_sites / 2)) < 1e-15
            for r in result.records
        )
        checks.append({"name": "closed-form-exact", "passed": exact, "detail": ""})
    if name == "thermo-extrapolate":
        fit = result.fits["finite-size"]
        checks.append(
            {
                "name": "power-law-quality",
                "passed": fit.r_squared > 0.98,
                "detail": f"R^2 = {fit.r_squared:.5f}, exponent {fit.exponent:.3f}",
            }
        )
        checks.append(
            {
                "name": "reference-quadrature-stable",
                "passed": result.summary["e_star_refinement_shift"] <= 1e-10,
                "detail": f"refinement shift {result.summary['e_star_refinement_shift']:.2e}",
            }
        )
    if name == "adiabatic":
        floors = result.summary["floors"]
        monotone = all(
            a["floor"] <= b["floor"] * (1 + 1e-9)
            for a, b in zip(floors, floors[1:])
        )
        checks.append(
            {
                "name": "floors-present-and-monotone",
                "passed": all(f["floored"] for f in floors) and monotone,
                "detail": f"floors: {[(f['delta'], f['floor']) for f in floors]}",
            }
        )
        if "runtime-vs-precision" in result.fits:
            fit = result.fits["runtime-vs-precision"]
            checks.append(
                {
                    "name": "runtime-scaling-fit",
                    "passed": fit.r_squared > 0.9,
                    "detail": f"R^2 = {fit.r_squared:.4f}, exponent {fit.exponent:.3f}",
                }
            )
        if "integrator_checks" in result.summary:
            worst = max(c["shift"] for c in result.summary["integrator_checks"])
            checks.append(
                {
                    "name": "integrator-converged",
                    "passed": worst < 1e-6,
                    "detail": f"worst step-doubling shift {worst:.2e}",
                }
            )
    if name == "fourier-certify":
        checks.append(
            {
                "name": "all-certifications-pass",
                "passed": result.summary["all_passed"],
                "detail": f"{len(result.summary['reports'])} reports",
            }
        )
    if name == "oracle-check":
        worst = result.summary["max_deviation"]
        checks.append(
            {
                "name": "oracle-agreement",
                "passed": worst < 1e-9,
                "detail": f"max correlation-matrix deviation {worst:.2e}",
            }
        )
    return checks


def run(cfg: RunConfig) -> int:
    """Execute one experiment and write its artifacts; returns exit code."""
    cfg.validate()
    out_dir = cfg.resolved_out_dir()
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    try:
        result = RUNNERS[cfg.experiment](cfg)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    elapsed = time.time() - t0
    checks = builtin_assertions(cfg, result)

    csv_path = os.path.join(out_dir, "records.csv")
    write_records_csv(csv_path, result.records)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "experiment": result.experiment,
        "config": cfg.to_dict(),
        "fits": {k: f.as_dict() for k, f in result.fits.items()},
        "summary": result.summary,
        "assertions": checks,
        "timings": {"total_seconds": elapsed},
    }
    write_summary_json(os.path.join(out_dir, "summary.json"), payload)
    for chk in checks:
        status = "PASS" if chk["passed"] else "FAIL"
        print(f"[{status}] {result.experiment}:{chk['name']} {chk['detail']}")
    print(f"wrote {csv_path} ({len(result.records)} records) in {elapsed:.1f}s")
    failures = result.summary.get("numerical_failures")
    if failures:
        print(f"numerical failures on {len(failures)} instance(s)", file=sys.stderr)
        return 3
    if not all(chk["passed"] for chk in checks):
        return 2
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list:
    return [float(tok) for tok in text.split(",") if tok]


def _int_list(text: str) -> list:
    return [int(tok) for tok in text.split(",") if tok]


def _str_list(text: str) -> list:
    return [tok for tok in text.split(",") if tok]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fermistab",
        description="Hardware-error stability experiments for free-fermion simulators",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    flag_specs = {
        "config": dict(type=str, help="JSON config file (flags override it)"),
        "out": dict(type=str, dest="out_dir", help="output directory"),
        "seed": dict(type=int),
        "threads": dict(type=int, help="worker threads (0 = auto)"),
        "instances": dict(type=int),
        "perturbation-mode": dict(
            type=str, dest="perturbation_mode", choices=[PERTURB_EXISTING, PERTURB_ALL_LOCAL]
        ),
        "deltas": dict(type=_float_list),
        "n-sites": dict(type=_int_list, dest="n_sites"),
        "t-values": dict(type=_float_list, dest="t_values"),
        "T": dict(type=_float_list, dest="T_values"),
        "betas": dict(type=_float_list),
        "J-values": dict(type=_float_list, dest="J_values"),
        "M": dict(type=_int_list, dest="M_values"),
        "etas": dict(type=_float_list),
        "J": dict(type=float),
        "panels": dict(type=_str_list),
        "panel-c-delta": dict(type=float, dest="panel_c_delta"),
        "panel-c-n": dict(type=int, dest="panel_c_n"),
        "window-scale": dict(type=float, dest="window_scale"),
        "initial": dict(type=str, choices=["cdw", "vacuum"]),
        "schedule": dict(type=str, choices=["smooth", "linear"]),
        "steps-per-time": dict(type=float, dest="steps_per_time"),
        "min-steps": dict(type=int, dest="min_steps"),
        "size-ratio": dict(type=float, dest="size_ratio"),
        "n-cap": dict(type=int, dest="n_cap"),
        "n-cases": dict(type=int, dest="n_cases"),
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        for flag, kwargs in flag_specs.items():
            p.add_argument(f"--{flag}", **dict(kwargs, default=None))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    data = {}
    config_path = getattr(ns, "config", None)
    if config_path:
        try:
            with open(config_path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        if data.get("experiment", ns.experiment) != ns.experiment:
            print(
                f"config error: config is for {data.get('experiment')!r}, "
                f"command line says {ns.experiment!r}",
                file=sys.stderr,
            )
            return 1
    data["experiment"] = ns.experiment
    for key, val in vars(ns).items():
        if key in ("experiment", "config") or val is None:
            continue
        data[key] = val
    try:
        cfg = RunConfig.from_dict(data)
    except (ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
