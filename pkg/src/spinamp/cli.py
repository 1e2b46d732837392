"""Reproducible experiment runner: config ingestion, figure data, sweeps,
validation suite, CSV/JSON emission.

Config files carry ordinary frequencies in MHz; everything internal is
angular (rad/us). CSVs are written with 9 significant digits, '.' decimal
separators and LF line endings so identical configs give byte-identical
output. Every CSV gets a `<out>.meta.json` sidecar with the fully resolved
configuration.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__, analytic, dynamics, oracle
from .hilbert import DensityMatrix, Operator, SpaceDims, eig_hermitian, identity, kron, ladder
from .model import SystemParams, build_drive, build_hc, build_anc, collapse_ops

CUTOFF_TOL = 1e-3      # max-normalized curve change under cutoff doubling
TIMESTEP_TOL = 1e-6    # max-normalized curve change under step halving
CONSERVATION_TOL = 1e-6
ORACLE_TOL = 0.05
ANALYTIC_STEADY_TOL = 1e-4

DEFAULT_CONFIG = {
    "experiment": None,
    "params": {
        "nu_t": 412.5,
        "nu_bar": 0.0,
        "g": 75.0,
        "lambda_d": 40.0,
        "gamma": 12.5,
        "gamma_s": 0.0,
        "drive": "matched",
    },
    "fock_cutoff": 16,
    "grid": {"t_start_us": 0.0, "t_end_us": None, "n_steps": 0, "n_record": 500},
    "gamma_sweep_mhz": [5.0, 10.0, 12.5, 25.0, 50.0],
    "seeds": [11, 13, 17],
    "oracle_n": 2000,
    "n_levels": 11,
    "convergence_checks": True,
    "output_path": None,
}

T_END_DEFAULT = {"figure2": 0.5, "figure3": 1.0, "sweep": 1.0,
                 "validate": 1.0, "spectrum": 0.5}

EXPERIMENTS = tuple(T_END_DEFAULT)


class ConfigError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: SystemParams
    params_mhz: dict
    fock_cutoff: int
    t_start: float
    t_end: float
    n_steps: int
    n_record: int
    gamma_sweep: list
    seeds: list
    oracle_n: int
    n_levels: int
    convergence_checks: bool
    output_path: str | None
    resolved: dict


def _merge(defaults: dict, user: dict, path: str = "") -> dict:
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        here = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{here} must be an object")
            out[key] = _merge(defaults[key], value, here)
        else:
            out[key] = value
    return out


def load_config(path: str | None) -> dict:
    if path is None:
        return copy.deepcopy(DEFAULT_CONFIG)
    try:
        with open(path, encoding="utf-8") as fh:
            user = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    return _merge(DEFAULT_CONFIG, user)


def apply_overrides(cfg: dict, overrides: list[str]) -> dict:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            if not isinstance(node, dict) or part not in node:
                raise ConfigError(f"unknown override path: {key}")
            node = node[part]
        if not isinstance(node, dict) or parts[-1] not in node:
            raise ConfigError(f"unknown override path: {key}")
        node[parts[-1]] = value
    return cfg


def resolve_config(cfg: dict, experiment: str) -> RunConfig:
    if cfg["experiment"] is not None and cfg["experiment"] != experiment:
        raise ConfigError(
            f"config experiment {cfg['experiment']!r} conflicts with subcommand {experiment!r}")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    cfg = copy.deepcopy(cfg)
    cfg["experiment"] = experiment

    pm = cfg["params"]
    for key in ("nu_t", "nu_bar", "g", "lambda_d", "gamma", "gamma_s"):
        if not isinstance(pm[key], (int, float)) or not np.isfinite(pm[key]):
            raise ConfigError(f"params.{key} must be a finite number")
    if pm["g"] <= 0:
        raise ConfigError("params.g must be > 0")
    if pm["gamma"] < 0 or pm["gamma_s"] < 0:
        raise ConfigError("decay rates must be >= 0")
    drive = pm["drive"]
    if not (drive == "matched" or isinstance(drive, (int, float))):
        raise ConfigError('params.drive must be "matched" or a nu_d value in MHz')
    try:
        params = SystemParams.from_mhz(**pm)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    grid = cfg["grid"]
    t_start = float(grid["t_start_us"])
    t_end = grid["t_end_us"]
    t_end = float(T_END_DEFAULT[experiment] if t_end is None else t_end)
    if t_end <= t_start:
        raise ConfigError("grid.t_end_us must exceed grid.t_start_us")
    n_steps = int(grid["n_steps"])
    n_record = int(grid["n_record"])
    if n_record < 1:
        raise ConfigError("grid.n_record must be >= 1")
    if n_steps and n_steps % n_record:
        raise ConfigError("grid.n_steps must be a multiple of grid.n_record")

    cutoff = int(cfg["fock_cutoff"])
    if cutoff < 2:
        raise ConfigError("fock_cutoff must be >= 2")
    sweep = list(cfg["gamma_sweep_mhz"])
    if experiment in ("figure3", "sweep") and not sweep:
        raise ConfigError("gamma_sweep_mhz must be non-empty")
    if any((not isinstance(g, (int, float))) or g < 0 for g in sweep):
        raise ConfigError("gamma_sweep_mhz entries must be numbers >= 0")

    cfg["grid"]["t_end_us"] = t_end
    return RunConfig(
        experiment=experiment, params=params, params_mhz=dict(pm),
        fock_cutoff=cutoff, t_start=t_start, t_end=t_end, n_steps=n_steps,
        n_record=n_record, gamma_sweep=sweep, seeds=list(cfg["seeds"]),
        oracle_n=int(cfg["oracle_n"]), n_levels=int(cfg["n_levels"]),
        convergence_checks=bool(cfg["convergence_checks"]),
        output_path=cfg["output_path"], resolved=cfg)


# ---------------------------------------------------------------------------
# simulation helpers
# ---------------------------------------------------------------------------

def _n_workers() -> int:
    env = os.environ.get("SPINAMP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _pmap(fn, items):
    items = list(items)
    workers = min(_n_workers(), len(items)) or 1
    if workers == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _joint_observables(d: int):
    a = ladder(d)
    idq = identity(SpaceDims((2,)))
    num = kron(idq, a.dag() @ a)
    num = Operator(num.dims, num.mat, hermitian=True)
    proj_e = Operator(SpaceDims((2,)), np.diag([0.0, 1.0]), hermitian=True)
    qubit = kron(proj_e, identity(SpaceDims((d,))))
    qubit = Operator(qubit.dims, qubit.mat, hermitian=True)
    return num, qubit


def _run_branch_meta(p: SystemParams, d: int, state: str, t_start: float,
                     t_end: float, n_record: int, n_steps: int = 0,
                     dt_factor: float = dynamics.DT_FACTOR, drive: bool = True):
    """One reduced-model Lindblad run from |state, 0>; returns (Trajectory, grid)."""
    h = build_hc(p, d)
    if drive:
        h = Operator(h.dims, (h + build_drive(p, d)).mat, hermitian=True)
    ops = collapse_ops(p, d)
    if n_steps:
        grid = dynamics.TimeGrid(t_start, t_end, n_steps,
                                 record_every=n_steps // n_record)
    else:
        grid = dynamics.TimeGrid.auto(h, t_start, t_end, n_record, ops, dt_factor)
    num, qubit = _joint_observables(d)
    rho0 = DensityMatrix.basis(SpaceDims((2, d)), 1 if state == "e" else 0, 0)
    traj = dynamics.evolve(h, ops, rho0, grid, [num, qubit], gamma=p.gamma)
    return traj, grid


def _max_normalized_dev(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def _check_cutoff(p, d, states, t_start, t_end, n_record, base: dict) -> float:
    """Max-normalized change of <A†A> curves under cutoff doubling."""
    def run(state):
        traj, _ = _run_branch_meta(p, 2 * d, state, t_start, t_end, n_record,
                                   dt_factor=dynamics.DT_FACTOR_COARSE)
        return traj
    doubled = dict(zip(states, _pmap(run, states)))
    return max(_max_normalized_dev(base[s].collective_n, doubled[s].collective_n)
               for s in states)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return f"{x:.9g}"


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def write_meta(out_path: str, rc: RunConfig, extra: dict) -> None:
    meta = {
        "code_version": __version__,
        "experiment": rc.experiment,
        "config": rc.resolved,
        "units": {"config_frequencies": "MHz", "time": "us",
                  "internal": "rad/us (omega = 2*pi*nu)"},
    }
    meta.update(extra)
    with open(out_path + ".meta.json", "w", encoding="utf-8", newline="") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def run_figure2(rc: RunConfig, out: str) -> dict:
    p = rc.params
    d = rc.fock_cutoff
    states = ("e", "g")

    def run(state):
        return _run_branch_meta(p, d, state, rc.t_start, rc.t_end, rc.n_record,
                                n_steps=rc.n_steps)
    (traj_e, grid), (traj_g, _) = _pmap(run, states)
    trajs = {"e": traj_e, "g": traj_g}

    checks = {}
    if rc.convergence_checks:
        dev_c = _check_cutoff(p, d, states, rc.t_start, rc.t_end, rc.n_record, trajs)
        checks["cutoff_convergence"] = dev_c
        if dev_c > CUTOFF_TOL:
            raise ConvergenceError(
                f"cutoff_convergence failed: curve change {dev_c:.3g} > {CUTOFF_TOL}; "
                f"retry with fock_cutoff={2 * d}")
        half, _ = _run_branch_meta(p, d, "e", rc.t_start, rc.t_end, rc.n_record,
                                   n_steps=2 * grid.n_steps)
        dev_t = _max_normalized_dev(traj_e.collective_n, half.collective_n)
        checks["timestep_convergence"] = dev_t
        if dev_t > TIMESTEP_TOL:
            raise ConvergenceError(
                f"timestep_convergence failed: curve change {dev_t:.3g} > {TIMESTEP_TOL}; "
                f"retry with grid.n_steps={2 * grid.n_steps}")

    times = traj_e.times
    ana_e = analytic.excited_population(times, p)
    ana_g = analytic.ground_population(times, p)
    rows = zip(times, traj_e.collective_n, ana_e, traj_g.collective_n, ana_g)
    write_csv(out, ["t_us", "n_num_e", "n_ana_e", "n_num_g", "n_ana_g"], rows)
    meta = {"n_steps": grid.n_steps, "dt_us": grid.dt,
            "record_every": grid.record_every, "checks": checks}
    write_meta(out, rc, meta)
    return meta


def _figure3_rows(rc: RunConfig):
    """(gamma_mhz, times, total_e, total_g) per sweep value."""
    tasks = [(g_mhz, state) for g_mhz in rc.gamma_sweep for state in ("e", "g")]

    def run(task):
        g_mhz, state = task
        p = SystemParams.from_mhz(**{**rc.params_mhz, "gamma": g_mhz})
        return _run_branch_meta(p, rc.fock_cutoff, state, rc.t_start, rc.t_end,
                                rc.n_record, n_steps=rc.n_steps)

    results = dict(zip(tasks, _pmap(run, tasks)))
    per_gamma = []
    grids = {}
    for g_mhz in rc.gamma_sweep:
        traj_e, grid = results[(g_mhz, "e")]
        traj_g, _ = results[(g_mhz, "g")]
        per_gamma.append((g_mhz, traj_e, traj_g))
        grids[g_mhz] = grid
    return per_gamma, grids


def run_figure3(rc: RunConfig, out: str) -> dict:
    per_gamma, grids = _figure3_rows(rc)
    checks = {}
    if rc.convergence_checks:
        worst = 0.0
        for g_mhz, traj_e, traj_g in per_gamma:
            p = SystemParams.from_mhz(**{**rc.params_mhz, "gamma": g_mhz})
            dev = _check_cutoff(p, rc.fock_cutoff, ("e", "g"), rc.t_start, rc.t_end,
                                rc.n_record, {"e": traj_e, "g": traj_g})
            worst = max(worst, dev)
        checks["cutoff_convergence"] = worst
        if worst > CUTOFF_TOL:
            raise ConvergenceError(
                f"cutoff_convergence failed: curve change {worst:.3g} > {CUTOFF_TOL}; "
                f"retry with fock_cutoff={2 * rc.fock_cutoff}")
        g_min = min(rc.gamma_sweep)
        p_min = SystemParams.from_mhz(**{**rc.params_mhz, "gamma": g_min})
        base = next(t_e for g, t_e, _ in per_gamma if g == g_min)
        half, _ = _run_branch_meta(p_min, rc.fock_cutoff, "e", rc.t_start, rc.t_end,
                                   rc.n_record, n_steps=2 * grids[g_min].n_steps)
        dev_t = _max_normalized_dev(base.collective_n, half.collective_n)
        checks["timestep_convergence"] = dev_t
        if dev_t > TIMESTEP_TOL:
            raise ConvergenceError(
                f"timestep_convergence failed: curve change {dev_t:.3g} > {TIMESTEP_TOL}; "
                f"retry with grid.n_steps={2 * grids[g_min].n_steps}")

    rows = []
    for g_mhz, traj_e, traj_g in per_gamma:
        gain = dynamics.readout_gain(traj_e, traj_g)
        for i, t in enumerate(traj_e.times):
            rows.append((t, g_mhz, traj_e.total_n[i], traj_g.total_n[i], gain[i]))
    write_csv(out, ["t_us", "gamma_mhz", "total_e", "total_g", "gain"], rows)
    meta = {"n_steps": {str(g): grids[g].n_steps for g in rc.gamma_sweep},
            "dt_us": {str(g): grids[g].dt for g in rc.gamma_sweep},
            "gamma_sweep_mhz": rc.gamma_sweep, "checks": checks,
            "sweep_note": "gamma set and 1 us duration are artifact defaults, "
                          "not asserted values"}
    write_meta(out, rc, meta)
    return meta


def run_sweep(rc: RunConfig, out: str) -> dict:
    per_gamma, grids = _figure3_rows(rc)
    rows = []
    for g_mhz, traj_e, traj_g in per_gamma:
        gain = dynamics.readout_gain(traj_e, traj_g)
        i = int(np.argmax(gain))
        rows.append((g_mhz, gain[i], traj_e.times[i],
                     traj_e.total_n[-1], traj_g.total_n[-1]))
    write_csv(out, ["gamma_mhz", "max_gain", "t_at_max_us", "total_e_final",
                    "total_g_final"], rows)
    meta = {"n_steps": {str(g): grids[g].n_steps for g in rc.gamma_sweep}}
    write_meta(out, rc, meta)
    return meta


def numeric_doublet(h: Operator, d: int, n: int) -> tuple[float, float]:
    """Eigenvalues of the (n+1)-excitation block of the joint Hamiltonian,
    classified by the conserved total-excitation number."""
    w, v = eig_hermitian(h)
    num, qubit = _joint_observables(d)
    ntot = qubit.mat + num.mat
    exc = np.real(np.einsum("ij,jk,ki->i", v.conj().T, ntot, v))
    block = np.sort(w[np.abs(exc - (n + 1)) < 0.5])
    if len(block) != 2:
        raise RuntimeError(f"excitation block {n + 1} has {len(block)} levels")
    return float(block[0]), float(block[1])


def run_spectrum(rc: RunConfig, out: str) -> dict:
    p = rc.params
    d = rc.fock_cutoff
    n_max = min(rc.n_levels - 1, d - 2)
    h = build_hc(p, d)
    rows = []
    two_pi = 2.0 * np.pi
    for n in range(n_max + 1):
        level = analytic.jc_spectrum(n, p)
        lo, hi = numeric_doublet(h, d, n)
        gap = max(abs(level.omega_minus - lo) / max(abs(level.omega_minus), 1e-300),
                  abs(level.omega_plus - hi) / max(abs(level.omega_plus), 1e-300))
        rows.append((n, level.omega_plus / two_pi, level.omega_minus / two_pi,
                     level.phi_n, hi / two_pi, lo / two_pi, gap))
    write_csv(out, ["n", "Omega_plus_mhz", "Omega_minus_mhz", "phi_n_rad",
                    "num_plus_mhz", "num_minus_mhz", "rel_gap"], rows)
    meta = {"n_levels": n_max + 1}
    write_meta(out, rc, meta)
    return meta


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def _check(name, value, threshold, lower_is_pass=True):
    passed = bool(value <= threshold) if lower_is_pass else bool(value >= threshold)
    return {"name": name, "value": float(value), "threshold": float(threshold),
            "passed": passed}


def run_validate(rc: RunConfig, out: str | None) -> tuple[list[dict], bool]:
    p = rc.params
    d = rc.fock_cutoff
    checks = []

    h = build_hc(p, d)
    h = Operator(h.dims, (h + build_drive(p, d)).mat, hermitian=True)
    ops = collapse_ops(p, d)
    wmax = dynamics.omega_max(h, ops)
    if rc.n_steps:
        grid = dynamics.TimeGrid(rc.t_start, rc.t_end, rc.n_steps,
                                 record_every=rc.n_steps // rc.n_record)
    else:
        grid = dynamics.TimeGrid.auto(h, rc.t_start, rc.t_end, rc.n_record, ops)
    checks.append(_check("timestep_guard", grid.dt * wmax, dynamics.STABILITY_LIMIT))

    # conservation bookkeeping (undriven, initial |e,0>) plus state hygiene
    p0 = SystemParams(omega_t=p.omega_t, omega_bar=p.omega_bar, omega_d=p.omega_d,
                      g_collective=p.g_collective, lambda_d=0.0, gamma=p.gamma)
    traj0, _ = _run_branch_meta(p0, d, "e", 0.0, rc.t_end, rc.n_record, drive=False)
    q = traj0.qubit_excited + traj0.total_n
    checks.append(_check("conservation", np.max(np.abs(q - 1.0)), CONSERVATION_TOL))
    checks.append(_check("trace_error", traj0.trace_err.max(), dynamics.TRACE_TOL))
    checks.append(_check("hermiticity", traj0.herm_err.max(), 1e-9))
    checks.append(_check("positivity", -traj0.min_eig.min(), dynamics.POSITIVITY_TOL))

    # short driven windows for the convergence checks
    t_short = min(rc.t_end, 0.2)
    base, g_short = _run_branch_meta(p, d, "e", 0.0, t_short, 200)
    try:
        dev_c = _check_cutoff(p, d, ("e",), 0.0, t_short, 200, {"e": base})
        checks.append(_check("cutoff_convergence", dev_c, CUTOFF_TOL))
    except dynamics.IntegrationError as exc:
        checks.append({"name": "cutoff_convergence", "value": None,
                       "threshold": CUTOFF_TOL, "passed": False, "error": str(exc)})
    half, _ = _run_branch_meta(p, d, "e", 0.0, t_short, 200,
                               n_steps=2 * g_short.n_steps)
    dev_t = _max_normalized_dev(base.collective_n, half.collective_n)
    checks.append(_check("timestep_convergence", dev_t, TIMESTEP_TOL))

    # closed-form spectrum vs numerical diagonalization
    h_c = build_hc(p, d)
    gap = 0.0
    for n in range(min(10, d - 2) + 1):
        level = analytic.jc_spectrum(n, p)
        lo, hi = numeric_doublet(h_c, d, n)
        gap = max(gap,
                  abs(level.omega_minus - lo) / max(abs(level.omega_minus), 1e-300),
                  abs(level.omega_plus - hi) / max(abs(level.omega_plus), 1e-300))
    checks.append(_check("jc_spectrum_match", gap, 1e-9))

    # analytic steady values vs the integrator under the frozen-qubit model
    t_steady = 10.0 / p.gamma if p.gamma > 0 else 0.3
    for state, ana in (("e", analytic.excited_population),
                       ("g", analytic.ground_population)):
        h_anc = build_anc(p, state, d)
        anc_ops = collapse_ops(p, d, include_qubit=False)
        g_anc = dynamics.TimeGrid.auto(h_anc, 0.0, t_steady, 200, anc_ops)
        a = ladder(d)
        num = Operator(SpaceDims((d,)), (a.dag() @ a).mat, hermitian=True)
        rho0 = DensityMatrix.basis(SpaceDims((d,)), 0)
        traj = dynamics.evolve(h_anc, anc_ops, rho0, g_anc, [num], gamma=p.gamma)
        ref = float(ana(np.array([t_steady]), p)[0])
        checks.append(_check(f"analytic_steady_{state}",
                             abs(traj.collective_n[-1] - ref), ANALYTIC_STEADY_TOL))

    # oracle trace-out: collective-amplitude envelope over gamma*t <= 3
    t_oracle = 3.0 / p.gamma if p.gamma > 0 else 0.05
    worst_env = 0.0
    worst_norm = 0.0
    for seed in rc.seeds:
        sample = oracle.sample_frequencies(rc.oracle_n, p.omega_bar, p.gamma,
                                           seed, g_collective=p.g_collective)
        s_grid = oracle.auto_grid(sample, p.delta, t_oracle, n_record=400)
        res = oracle.single_excitation_evolve(sample, p.delta, s_grid)
        _, c_red = oracle.reduced_single_excitation(p.delta, p.g_collective,
                                                    p.gamma, res.times)
        worst_env = max(worst_env, envelope_deviation(res.times,
                                                      np.abs(res.collective),
                                                      np.abs(c_red)))
        worst_norm = max(worst_norm, float(np.max(np.abs(res.norm - 1.0))))
    checks.append(_check("oracle_traceout", worst_env, ORACLE_TOL))
    checks.append(_check("oracle_norm", worst_norm, 1e-8))

    all_passed = all(c["passed"] for c in checks)
    report = {"code_version": __version__, "passed": all_passed, "checks": checks,
              "config": rc.resolved}
    text = json.dumps(report, indent=2, sort_keys=True)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text + "\n")
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: value={c['value']} threshold={c['threshold']}")
    return checks, all_passed


def envelope_deviation(times: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Max relative deviation between the oscillation envelopes of two
    nonnegative series (local maxima, linearly interpolated, compared on the
    interior where both envelopes are defined)."""
    ia = _local_maxima(a)
    ib = _local_maxima(b)
    if len(ia) < 2 or len(ib) < 2:
        scale = max(float(np.max(b)), 1e-300)
        return float(np.max(np.abs(a - b))) / scale
    lo = max(times[ia[0]], times[ib[0]])
    hi = min(times[ia[-1]], times[ib[-1]])
    mask = (times >= lo) & (times <= hi)
    env_a = np.interp(times[mask], times[ia], a[ia])
    env_b = np.interp(times[mask], times[ib], b[ib])
    return float(np.max(np.abs(env_a - env_b) / np.maximum(env_b, 1e-300)))


def _local_maxima(y: np.ndarray) -> np.ndarray:
    inner = (y[1:-1] >= y[:-2]) & (y[1:-1] > y[2:])
    return np.flatnonzero(inner) + 1


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinamp",
        description="Spin-amplification readout simulator: figure data, "
                    "spectra, sweeps and validation")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="JSON config path")
        sp.add_argument("--out", default=None, help="output path")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="dot-path config override")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args.override)
        rc = resolve_config(cfg, args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = args.out or rc.output_path
    try:
        if rc.experiment == "validate":
            _, ok = run_validate(rc, out)
            return 0 if ok else 1
        if out is None:
            out = f"{rc.experiment}.csv"
        runner = {"figure2": run_figure2, "figure3": run_figure3,
                  "sweep": run_sweep, "spectrum": run_spectrum}[rc.experiment]
        runner(rc, out)
        print(f"wrote {out} and {out}.meta.json")
        return 0
    except (ConvergenceError, dynamics.IntegrationError,
            dynamics.StabilityError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
