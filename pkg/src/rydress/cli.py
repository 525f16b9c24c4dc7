"""Command-line experiment runners.

Each subcommand reads an INI config (a path or a shipped scenario name),
writes CSV curves and a JSON summary into the output directory, and exits
with 0 on success, 1 on a config error and 2 on a numerical or extraction
error. Outputs contain no timestamps, so identical configs and seeds give
byte-identical files for any ``--threads``.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import SCENARIOS, ExperimentConfig, load_config
from .dressing import (
    doppler_detuning_sigma,
    j_finite_blockade,
    j_perfect_blockade,
    j_vs_r,
    single_atom_light_shift,
)
from .dynamics import (
    BASIS_LABELS,
    LEVEL_INDEX,
    TwoAtomRegister,
    doppler_shot_drive,
    dressed_rabi_frequency,
    fit_lifetime,
    fit_rabi_frequency,
    simulate_blockaded_rabi,
    simulate_lifetime,
)
from .entanglement import (
    fidelity_report,
    parity_scan,
    prepare_phi_plus,
    prepare_psi_plus,
    psi_plus_pulse_time,
)
from .errors import ConfigError, NotFoundError, RydressError
from .measurement import TrapParams, detect, prepare_initial, recapture_curve
from .pairpotential import PerfectBlockade, blockade_radius, u_dd
from .rng import parallel_map, stream
from .spectroscopy import extract_j, mw_scan

# finite stand-in for an infinite pair shift inside the dynamics
PERFECT_BLOCKADE_U = -1e6


# -- output helpers ----------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return obj


def write_csv(path: Path, header, rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_json(path: Path, subcommand: str, cfg: ExperimentConfig, results: dict, warns=()):
    payload = {
        "artifact": "rydress",
        "version": __version__,
        "subcommand": subcommand,
        "config": cfg.as_dict(),
        "results": results,
        "warnings": list(warns),
    }
    text = json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8")


def _out_dir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.get("run", "out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- shared config resolution --------------------------------------------------

def resolve_u_dd(cfg: ExperimentConfig) -> float:
    """Pair shift from ``pair.u_dd`` or from the model at ``pair.distance``."""
    if cfg.has("pair", "u_dd"):
        return cfg.float("pair", "u_dd")
    model = cfg.pair_model()
    if isinstance(model, PerfectBlockade):
        return PERFECT_BLOCKADE_U
    r = cfg.float("pair", "distance")
    if r <= 0:
        raise ConfigError(f"pair.distance: must be positive, got {r}")
    return float(u_dd(model, r))


def _doppler_sigma(cfg, drive):
    temp = cfg.float("noise", "temperature", 0.0, minimum=0.0)
    return doppler_detuning_sigma(temp, drive.wavelength) if temp > 0 else 0.0


def _branching(cfg):
    d0 = cfg.float("noise", "decay_to_0", 0.0, minimum=0.0)
    d1 = cfg.float("noise", "decay_to_1", 0.0, minimum=0.0)
    if d0 + d1 > 1:
        raise ConfigError("noise.decay_to_0 + noise.decay_to_1: must not exceed 1")
    return {"decay_to_0": d0, "decay_to_1": d1}


def _shots(cfg, sigma):
    shots = cfg.int("run", "shots", 1, minimum=1)
    return shots if sigma > 0 else 1


def _shot_drives(cfg, drive, sigma):
    """One drive per Monte Carlo shot, each from its own counter-based stream."""
    n = _shots(cfg, sigma)
    if sigma == 0:
        return [drive]
    seed = cfg.seed
    return [doppler_shot_drive(drive, sigma, stream(seed, i)) for i in range(n)]


# -- subcommands ---------------------------------------------------------------

def cmd_jcurve(cfg: ExperimentConfig):
    drives = cfg.drive_list("jcurve", "drives")
    r = cfg.grid("jcurve", "r_grid")
    if np.any(r <= 0):
        raise ConfigError("jcurve.r_grid: distances must be positive")
    model = cfg.pair_model()
    cols, header, summary = [r], ["R_um"], []
    for d in drives:
        curve = j_vs_r(d, model, r)
        cols.append(curve.j)
        header.append(f"J_MHz[rabi={d.rabi_freq:g};detuning={d.detuning:g}]")
        try:
            rb = blockade_radius(model, d) if not isinstance(model, PerfectBlockade) else math.inf
        except NotFoundError:
            rb = None
        summary.append({
            "rabi_freq": d.rabi_freq,
            "detuning": d.detuning,
            "plateau": j_perfect_blockade(d),
            "j_min_r": float(curve.j[0]),
            "j_max_r": float(curve.j[-1]),
            "blockade_radius_um": rb,
        })
    out = _out_dir(cfg)
    write_csv(out / "jcurve.csv", header, np.column_stack(cols))
    write_json(out / "jcurve.json", "jcurve", cfg, {"drives": summary})
    return {"drives": summary}


def cmd_scan(cfg: ExperimentConfig):
    drive = cfg.drive()
    u = resolve_u_dd(cfg)
    j_pred = j_finite_blockade(drive, u)
    raw_mw = cfg.get("scan", "mw_rabi", "auto").strip()
    if raw_mw == "auto":
        if j_pred == 0:
            raise ConfigError("scan.mw_rabi: 'auto' needs a nonzero J; give a value")
        mw = abs(j_pred) / 10
    else:
        mw = cfg.float("scan", "mw_rabi", minimum=0.0)
    raw_t = cfg.get("scan", "pulse_time", "auto").strip()
    t_pulse = psi_plus_pulse_time(drive, mw) if raw_t == "auto" else cfg.float("scan", "pulse_time", minimum=0.0)
    grid = cfg.grid("scan", "grid")
    origin = cfg.get("scan", "grid_origin", "light_shift").strip()
    if origin == "light_shift":
        grid = grid + single_atom_light_shift(drive)
    elif origin != "bare":
        raise ConfigError(f"scan.grid_origin: expected light_shift or bare, got {origin!r}")
    if grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError("scan.grid: needs at least two strictly increasing points")
    gamma = cfg.float("noise", "gamma_r", 0.0, minimum=0.0)

    warns = []
    step = float(np.median(np.diff(grid)))
    if j_pred != 0 and step > abs(j_pred) / 4:
        warns.append(f"coarse grid: step {step:.4g} MHz exceeds |J|/4 = {abs(j_pred) / 4:.4g} MHz")
        # surfaced now too, since a too-coarse grid usually makes the fit fail below
        print(f"warning: {warns[-1]}", file=sys.stderr)

    scan = mw_scan(drive, u, mw, t_pulse, grid, gamma_r=gamma, threads=cfg.threads)
    out = _out_dir(cfg)
    write_csv(out / "scan.csv",
              ["mw_detuning_MHz", "P11", "P10", "P01", "P00", "P_single"], scan.rows())
    ext = extract_j(scan, full=True)
    results = {
        "u_dd_MHz": u,
        "mw_rabi_MHz": mw,
        "pulse_time_us": t_pulse,
        "light_shift_MHz": single_atom_light_shift(drive),
        "single_flip_center_MHz": ext.single.center,
        "single_flip_width_MHz": ext.single.width,
        "two_photon_center_MHz": ext.double.center,
        "two_photon_width_MHz": ext.double.width,
        "j_extracted_MHz": ext.j,
        "j_predicted_MHz": j_pred,
        "grid_step_MHz": step,
    }
    write_json(out / "scan.json", "scan", cfg, results, warns)
    return results


def first_period_peak(times, y, freq):
    """Largest value of ``y`` within one oscillation period ``1 / freq``.

    The dressing adds fast small-amplitude wiggles to bare-basis populations,
    so a local-maximum search would latch onto those.
    """
    sel = times <= times[0] + 1.0 / freq
    return float(np.max(y[sel]))


def cmd_rabi(cfg: ExperimentConfig):
    drive = cfg.drive()
    u = resolve_u_dd(cfg)
    mw = cfg.float("rabi", "mw_rabi", minimum=0.0)
    if mw == 0:
        raise ConfigError("rabi.mw_rabi: must be positive")
    times = cfg.grid("rabi", "times")
    if times.size < 8 or np.any(np.diff(times) <= 0):
        raise ConfigError("rabi.times: needs at least 8 strictly increasing points")
    gamma = cfg.float("noise", "gamma_r", 0.0, minimum=0.0)
    branching = _branching(cfg)
    sigma = _doppler_sigma(cfg, drive)
    drives = _shot_drives(cfg, drive, sigma)

    def shot(d):
        two = simulate_blockaded_rabi(d, u, mw, gamma, times, **branching)
        free = simulate_blockaded_rabi(d, 0.0, mw, gamma, times, **branching)
        p1 = free.trajectory.populations.reshape(-1, 4, 4)[:, LEVEL_INDEX["1"], :].sum(axis=1)
        return two.trajectory.populations, p1

    res = parallel_map(shot, drives, cfg.threads)
    pops = sum(r[0] for r in res) / len(res)
    p1 = sum(r[1] for r in res) / len(res)
    idx = {lab: i for i, lab in enumerate(BASIS_LABELS)}
    p11, p00 = pops[:, idx["11"]], pops[:, idx["00"]]
    p_single = pops[:, idx["10"]] + pops[:, idx["01"]]

    damped = gamma > 0 or sigma > 0
    f_two = fit_rabi_frequency(times, p11, damped=damped)
    f_one = fit_rabi_frequency(times, p1, damped=damped)
    out = _out_dir(cfg)
    header = ["time_us"] + [f"P_{lab}" for lab in BASIS_LABELS] + \
        ["P11", "P_single", "P00", "P1_single_atom"]
    write_csv(out / "rabi.csv", header, np.column_stack([times, pops, p11, p_single, p00, p1]))
    results = {
        "u_dd_MHz": u,
        "j_MHz": j_finite_blockade(drive, u),
        "shots": len(drives),
        "doppler_sigma_MHz": sigma,
        "dressed_rabi_MHz": dressed_rabi_frequency(drive, mw),
        "f_two_atom_MHz": f_two,
        "f_single_atom_MHz": f_one,
        "enhancement": f_two / f_one,
        "expected_enhancement": math.sqrt(2),
        "max_p00": float(p00.max()),
        "first_peak_p_single": first_period_peak(times, p_single, f_two),
    }
    write_json(out / "rabi.json", "rabi", cfg, results)
    return results


def cmd_bell(cfg: ExperimentConfig):
    drive = cfg.drive()
    u = resolve_u_dd(cfg)
    mw = cfg.float("bell", "mw_rabi", minimum=0.0)
    gamma = cfg.float("noise", "gamma_r", 0.0, minimum=0.0)
    branching = _branching(cfg)
    pump = cfg.float("noise", "pump_efficiency", 1.0)
    if not 0 <= pump <= 1:
        raise ConfigError(f"noise.pump_efficiency: must be in [0, 1], got {pump}")
    det = {
        "rydberg_loss_fraction": cfg.float("noise", "rydberg_loss_fraction", 1.0),
        "recaptured_bright_fraction": cfg.float("noise", "recaptured_bright_fraction", 0.5),
    }
    for key, val in det.items():
        if not 0 <= val <= 1:
            raise ConfigError(f"noise.{key}: must be in [0, 1], got {val}")
    phases = cfg.grid("bell", "phases")
    inject = cfg.get("bell", "inject", "none").strip()
    method = cfg.get("bell", "phi_plus_method", "global_half_pi").strip()
    if method not in ("global_half_pi", "two_photon"):
        raise ConfigError(f"bell.phi_plus_method: unknown method {method!r}")
    sigma = _doppler_sigma(cfg, drive)
    initial = prepare_initial(pump)
    warns = []

    def averaged(make):
        regs = parallel_map(make, _shot_drives(cfg, drive, sigma), cfg.threads)
        return TwoAtomRegister(sum(r.rho for r in regs) / len(regs))

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if inject == "mixture":
            psi = TwoAtomRegister.mixture([(0.5, TwoAtomRegister.from_labels("0", "1")),
                                           (0.5, TwoAtomRegister.from_labels("1", "0"))])
        elif inject == "none":
            psi = averaged(lambda d: prepare_psi_plus(d, u, mw, gamma, initial, cfg.strict,
                                                      **branching))
        else:
            raise ConfigError(f"bell.inject: expected none or mixture, got {inject!r}")
        phi = None
        # an injected mixture replaces the Psi+ stage only
        if cfg.bool("bell", "phi_plus", True) and inject == "none":
            if method == "global_half_pi":
                phi = prepare_phi_plus(psi, "global_half_pi")
            else:
                phi = averaged(lambda d: prepare_phi_plus(initial, "two_photon", d, u, mw, gamma))
    for w in caught:
        msg = str(w.message)
        if msg not in warns:
            warns.append(msg)

    try:
        out_reports = {}
        out = _out_dir(cfg)
        for name, reg in (("psi_plus", psi), ("phi_plus", phi)):
            if reg is None:
                continue
            scan = parity_scan(reg, phases, **det)
            rep = fidelity_report(scan, name, detect(reg, **det), reg)
            write_csv(out / f"bell_{name}.csv",
                      ["phase_rad", "Q", "P11", "P10", "P01", "P00"], scan.rows())
            out_reports[name] = rep.to_dict()
    except ValueError as exc:
        raise ConfigError(f"bell.phases: {exc}") from None
    results = {"u_dd_MHz": u, "j_MHz": j_finite_blockade(drive, u), "reports": out_reports}
    write_json(out / "bell.json", "bell", cfg, results, warns)
    return results


def cmd_lifetime(cfg: ExperimentConfig):
    drive = cfg.drive()
    gamma = cfg.float("noise", "gamma_r", 0.0, minimum=0.0)
    branching = _branching(cfg)
    raw = cfg.get("lifetime", "delays", "auto").strip()
    if raw == "auto":
        delays = np.linspace(0.0, 3.0 / gamma if gamma > 0 else 30.0, 31)
    else:
        delays = cfg.grid("lifetime", "delays")
    if np.any(delays < 0):
        raise ConfigError("lifetime.delays: delays must be non-negative")
    p = simulate_lifetime(drive, gamma, delays, **branching)
    fit = fit_lifetime(delays, p)
    out = _out_dir(cfg)
    write_csv(out / "lifetime.csv", ["delay_us", "P_ground"], np.column_stack([delays, p]))
    results = {
        "tau_us": fit.tau,
        "tau_expected_us": 1.0 / gamma if gamma > 0 else math.inf,
        "amplitude": fit.amplitude,
        "offset": fit.offset,
    }
    write_json(out / "lifetime.json", "lifetime", cfg, results)
    return results


def cmd_recapture(cfg: ExperimentConfig):
    s = "recapture"
    try:
        trap = TrapParams(
            waist=cfg.float(s, "waist", 1.29),
            depth=cfg.float(s, "depth", 1.0),
            temperature=cfg.float(s, "temperature", 20.0),
            recapture_window=cfg.float(s, "recapture_window", 10.0),
            wavelength=cfg.float(s, "wavelength", 938.0),
            atom_mass=cfg.float(s, "atom_mass", 132.905),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"recapture: {exc}") from None
    times = cfg.grid(s, "release_times")
    if np.any(times < 0):
        raise ConfigError("recapture.release_times: must be non-negative")
    n = cfg.int(s, "n_samples", 10_000, minimum=1000)
    res = recapture_curve(trap, times, n, cfg.seed, cfg.threads)
    rows = [[t, r.probability, r.stderr] for t, r in zip(times, res)]
    out = _out_dir(cfg)
    write_csv(out / "recapture.csv", ["release_time_us", "probability", "stderr"], rows)
    results = {"points": [{"release_time_us": t, "probability": p, "stderr": e} for t, p, e in rows],
               "n_samples": n}
    write_json(out / "recapture.json", "recapture", cfg, results)
    return results


COMMANDS = {
    "jcurve": cmd_jcurve,
    "scan": cmd_scan,
    "rabi": cmd_rabi,
    "bell": cmd_bell,
    "lifetime": cmd_lifetime,
    "recapture": cmd_recapture,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rydress", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rydress {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment (default scenario: {SCENARIOS[name]})")
        p.add_argument("--config", help="INI file or shipped scenario name")
        p.add_argument("--seed", type=int, help="RNG seed (overrides run.seed)")
        p.add_argument("--out", help="output directory (overrides run.out)")
        p.add_argument("--strict", action="store_true", help="blockade-validity violations are errors")
        p.add_argument("--shots", type=int, help="Monte Carlo shots (overrides run.shots)")
        p.add_argument("--threads", type=int, help="worker cap; never changes results")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        for key in ("seed", "out", "shots", "threads"):
            val = getattr(args, key)
            if val is not None:
                cfg.set("run", key, val)
        if args.strict:
            cfg.set("run", "strict", "true")
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except RydressError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.command} outputs to {cfg.get('run', 'out', 'out')}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
