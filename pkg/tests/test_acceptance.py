"""Exit criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line; the lines are repeated in a summary
section at the end of the pytest run.
"""
import time

import numpy as np
import pytest

from rydress.cli import main
from rydress.dressing import (
    LaserDrive,
    dressed_ground_amplitude,
    j_finite_blockade,
    j_perfect_blockade,
    single_atom_light_shift,
)
from rydress.dynamics import (
    TwoAtomRegister,
    evolve,
    fit_lifetime,
    fit_rabi_frequency,
    rabi_segment,
    simulate_blockaded_rabi,
    simulate_lifetime,
)
from rydress.entanglement import (
    bell_state,
    fidelity_report,
    parity_scan,
    prepare_phi_plus,
    prepare_psi_plus,
    psi_plus_pulse_time,
)
from rydress.measurement import prepare_initial
from rydress.pairpotential import VanDerWaals, u_dd
from rydress.spectroscopy import extract_j, mw_scan

pytestmark = pytest.mark.acceptance

PHASES64 = np.arange(64) * np.pi / 64
BELL_DRIVE = LaserDrive(4.3, 1.1)
BELL_U = u_dd(VanDerWaals(1e5), 2.9)


def ground_connected_eigenvalue(h):
    w, v = np.linalg.eigh(h)
    return w[np.argmax(np.abs(v[0]) ** 2)]


def eigensolve_j(rabi, det, u):
    """J from explicit 2x2 and 3x3 (symmetric pair basis) eigenproblems."""
    s = rabi / np.sqrt(2)
    e2 = ground_connected_eigenvalue(np.array([[0, s, 0], [s, -det, s], [0, s, -2 * det + u]]))
    e1 = ground_connected_eigenvalue(np.array([[0, rabi / 2], [rabi / 2, -det]]))
    return e2 - 2 * e1


class Hygiene:
    """Collects trace and unitary-purity deviations seen during acceptance runs."""
    trace_drift = 0.0
    purity_loss = 0.0

    @classmethod
    def trajectory(cls, traj):
        cls.trace_drift = max(cls.trace_drift, float(np.max(np.abs(traj.populations.sum(axis=1) - 1))))

    @classmethod
    def register(cls, reg, unitary_from=None):
        cls.trace_drift = max(cls.trace_drift, abs(reg.trace() - 1))
        if unitary_from is not None:
            cls.purity_loss = max(cls.purity_loss, abs(reg.purity() - unitary_from.purity()))


def test_closed_form_vs_eigensolve(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for rabi, det in rng.uniform(0.5, 10.0, size=(100, 2)):
        oracle = eigensolve_j(rabi, det, -1e9)
        worst = max(worst, abs(j_perfect_blockade(LaserDrive(rabi, det)) / oracle - 1))
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 1.0
    assert criterion(1, "closed form vs 3x3 eigensolve", ok, f"max rel err {worst:.2e}, {dt:.2f} s")


def test_reference_values(criterion):
    t0 = time.perf_counter()
    p_strong = dressed_ground_amplitude(LaserDrive(4.3, 1.3))[0] ** 2
    p_weak = dressed_ground_amplitude(LaserDrive(4.4, 4.0))[0] ** 2
    j = abs(j_perfect_blockade(BELL_DRIVE))
    dt = time.perf_counter() - t0
    ok = (abs(p_strong - 0.64) <= 0.01 and abs(p_weak - 0.84) <= 0.01
          and abs(j - 0.7986) < 1e-4 and abs(j / 0.75 - 1) < 0.15 and dt < 1.0)
    assert criterion(2, "reference values", ok,
                     f"P0 {p_strong:.4f}/{p_weak:.4f}, |J| {j:.4f} MHz")


def test_j_curve_shape(criterion, tmp_path):
    t0 = time.perf_counter()
    assert main(["jcurve", "--out", str(tmp_path)]) == 0
    data = np.loadtxt(tmp_path / "jcurve.csv", delimiter=",", skiprows=1)
    dt = time.perf_counter() - t0
    details, ok = [], dt < 5.0
    r = data[:, 0]
    assert r[0] == 1.5 and r[-1] == 10.0
    for col, drive in zip(data[:, 1:].T, (LaserDrive(4.4, 4.0), LaserDrive(4.3, 1.3))):
        plateau = j_perfect_blockade(drive)
        flat = abs(col[0] - plateau) / abs(plateau)
        tail = abs(col[-1]) / abs(plateau)
        ok &= flat < 0.01 and tail < 0.10
        details.append(f"{flat:.1e}/{tail:.3f}")
    assert criterion(3, "J(R) plateau and decay", ok, ", ".join(details) + f", {dt:.2f} s")


def test_spectroscopy_round_trip(criterion):
    t0 = time.perf_counter()
    drive = LaserDrive(4.3, 1.3)
    ls = single_atom_light_shift(drive)
    errs = []
    for u in (-10.0, -50.0, -200.0, -1e6):
        j = j_finite_blockade(drive, u)
        mw = abs(j) / 10
        grid = ls + np.arange(-0.8 * abs(j), 0.4 * abs(j), abs(j) / 40)
        scan = mw_scan(drive, u, mw, psi_plus_pulse_time(drive, mw), grid)
        errs.append(abs(extract_j(scan) / j - 1))
    dt = time.perf_counter() - t0
    ok = max(errs) < 0.05 and dt < 30.0
    assert criterion(4, "spectroscopy round trip", ok,
                     "rel errs " + ", ".join(f"{e:.3f}" for e in errs) + f", {dt:.1f} s")


def test_blockaded_rabi(criterion):
    t0 = time.perf_counter()
    times = np.linspace(0, 12, 241)
    two = simulate_blockaded_rabi(BELL_DRIVE, BELL_U, 0.17678, 0.0, times)
    one = simulate_blockaded_rabi(BELL_DRIVE, 0.0, 0.17678, 0.0, times)
    p1 = one.trajectory.populations.reshape(-1, 4, 4)[:, 0, :].sum(axis=1)
    ratio = fit_rabi_frequency(times, two.p11) / fit_rabi_frequency(times, p1)
    rk4 = simulate_blockaded_rabi(BELL_DRIVE, BELL_U, 0.17678, 0.0, times, integrator="rk4")
    p00, p00_rk4 = two.p00.max(), rk4.p00.max()
    dt = time.perf_counter() - t0
    for run in (two, one, rk4):
        Hygiene.trajectory(run.trajectory)
    ok = abs(ratio / np.sqrt(2) - 1) < 0.02 and abs(p00 - p00_rk4) < 1e-4 and p00 < 0.15 and dt < 10.0
    assert criterion(5, "blockaded Rabi enhancement", ok,
                     f"ratio {ratio:.4f}, max P00 {p00:.5f} vs RK4 {p00_rk4:.5f}, {dt:.2f} s")


def test_parity_exactness(criterion):
    t0 = time.perf_counter()
    psi = bell_state("psi_plus")
    # the protocol's Phi+: a global pi/2 pulse applied to exact Psi+
    phi = prepare_phi_plus(psi)
    mix = TwoAtomRegister.mixture([(0.5, TwoAtomRegister.from_labels("0", "1")),
                                   (0.5, TwoAtomRegister.from_labels("1", "0"))])
    e_psi = np.max(np.abs(parity_scan(psi, PHASES64).q - 1))
    e_phi = np.max(np.abs(parity_scan(phi, PHASES64).q - np.cos(2 * PHASES64)))
    e_mix = np.max(np.abs(parity_scan(mix, PHASES64).q))
    Hygiene.register(phi, unitary_from=psi)
    dt = time.perf_counter() - t0
    ok = max(e_psi, e_phi, e_mix) < 1e-9 and dt < 1.0
    assert criterion(6, "parity exactness", ok,
                     f"errs {e_psi:.1e}/{e_phi:.1e}/{e_mix:.1e}, {dt:.2f} s")


def test_lifetime_fit(criterion):
    t0 = time.perf_counter()
    errs = []
    for tau in (10.0, 40.0, 150.0):
        delays = np.linspace(0, 3 * tau, 31)
        fit = fit_lifetime(delays, simulate_lifetime(LaserDrive(4.3, 0.0), 1 / tau, delays))
        errs.append(abs(fit.tau / tau - 1))
    dt = time.perf_counter() - t0
    ok = max(errs) < 0.01 and dt < 10.0
    assert criterion(7, "lifetime fit", ok, "rel errs " + ", ".join(f"{e:.1e}" for e in errs)
                     + f", {dt:.2f} s")


def _bell_bounds(gamma, pump):
    initial = prepare_initial(pump)
    psi = prepare_psi_plus(BELL_DRIVE, BELL_U, 0.05, gamma, initial)
    phi = prepare_phi_plus(psi)
    Hygiene.register(psi)
    if gamma == 0:
        Hygiene.register(psi, unitary_from=initial)
    return (fidelity_report(parity_scan(psi, PHASES64), "psi_plus").bound,
            fidelity_report(parity_scan(phi, PHASES64), "phi_plus").bound)


def test_noise_monotonicity(criterion):
    t0 = time.perf_counter()
    by_gamma = np.array([_bell_bounds(g, 1.0) for g in (0.0, 0.05, 0.1, 0.2)])
    by_pump = np.array([_bell_bounds(0.0, p) for p in (1.0, 0.95, 0.9)])
    dt = time.perf_counter() - t0
    ok = (np.all(np.diff(by_gamma, axis=0) < 0) and np.all(np.diff(by_pump, axis=0) < 0)
          and np.all(by_gamma[0] >= 0.99) and dt < 60.0)
    assert criterion(8, "noise monotonicity", ok,
                     "Psi+ vs gamma " + "/".join(f"{b:.4f}" for b in by_gamma[:, 0])
                     + ", vs pump " + "/".join(f"{b:.4f}" for b in by_pump[:, 0]) + f", {dt:.2f} s")


def test_numerical_hygiene(criterion, tmp_path, make_config):
    seg = rabi_segment(BELL_DRIVE, BELL_U, 0.17678, 0.0, 12.0)
    start = TwoAtomRegister.from_labels("1", "1")
    Hygiene.register(evolve(start.copy(), seg), unitary_from=start)
    lossy = rabi_segment(BELL_DRIVE, BELL_U, 0.17678, 0.2, 12.0)
    Hygiene.register(evolve(start.copy(), lossy))

    identical = True
    doppler = make_config("fig3", {("noise", "temperature"): 10.0, ("run", "shots"): 4,
                                   ("rabi", "times"): "linspace(0, 6, 61)"})
    runs = [("recapture", None, "recapture"), ("rabi", doppler, "rabi")]
    for cmd, cfg, stem in runs:
        outs = []
        for threads in (1, 3):
            out = tmp_path / f"{cmd}{threads}"
            argv = [cmd, "--out", str(out), "--threads", str(threads), "--seed", "7"]
            if cfg:
                argv += ["--config", cfg]
            assert main(argv) == 0
            outs.append(out)
        for ext in ("csv", "json"):
            identical &= (outs[0] / f"{stem}.{ext}").read_bytes() == (outs[1] / f"{stem}.{ext}").read_bytes()
    ok = Hygiene.trace_drift < 1e-6 and Hygiene.purity_loss < 1e-8 and identical
    assert criterion(9, "numerical hygiene", ok,
                     f"trace drift {Hygiene.trace_drift:.1e}, purity loss {Hygiene.purity_loss:.1e}, "
                     f"byte-identical {identical}")
