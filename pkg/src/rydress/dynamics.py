"""Open-system dynamics of two atoms under piecewise-constant drives.

Each atom has four levels ordered ``(|1>, |0>, |r>, |d>)``: the two clock
states, the Rydberg level and a dark "lost" level. The two-atom product basis
index is ``4 * atom1 + atom2``. Hamiltonians are H/h in MHz and times in us, so
the von Neumann equation reads ``drho/dt = -2 pi i [H, rho] + D[rho]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import expm
from scipy.optimize import curve_fit, least_squares

from .dressing import LaserDrive, dressed_ground_amplitude, single_atom_light_shift
from .errors import IntegratorError

__all__ = [
    "LEVELS",
    "LEVEL_INDEX",
    "BASIS_LABELS",
    "basis_index",
    "TwoAtomRegister",
    "Microwave",
    "PulseSegment",
    "PulseSequence",
    "build_hamiltonian",
    "collapse_operators",
    "liouvillian",
    "evolve",
    "evolve_rk4",
    "run_sequence",
    "Trajectory",
    "RabiCurves",
    "simulate_blockaded_rabi",
    "simulate_single_atom_rabi",
    "fit_rabi_frequency",
    "dressed_rabi_frequency",
    "rabi_segment",
    "doppler_shot_drive",
    "simulate_lifetime",
    "qubit_rotation",
    "apply_global_rotation",
    "fit_lifetime",
    "LifetimeFit",
]

LEVELS = ("1", "0", "r", "d")
LEVEL_INDEX = {name: i for i, name in enumerate(LEVELS)}
BASIS_LABELS = tuple(a + b for a in LEVELS for b in LEVELS)
DIM = 16

TRACE_TOL = 1e-6
HYPERFINE_SPLITTING_MHZ = 9192.631770  # documentation only; never enters a frame

_I4 = np.eye(4)


def basis_index(a: str, b: str) -> int:
    return 4 * LEVEL_INDEX[a] + LEVEL_INDEX[b]


def _ket(level):
    v = np.zeros(4, dtype=complex)
    v[LEVEL_INDEX[level]] = 1.0
    return v


def _op(level_to, level_from):
    return np.outer(_ket(level_to), _ket(level_from).conj())


def _on_atom(op, atom):
    return np.kron(op, _I4) if atom == 0 else np.kron(_I4, op)


class TwoAtomRegister:
    """Density operator of the two-atom register (16x16, complex).

    Evolution functions mutate the register in place; use :meth:`copy` to
    branch.
    """

    def __init__(self, rho):
        rho = np.array(rho, dtype=complex)
        if rho.shape != (DIM, DIM):
            raise ValueError(f"density matrix must be {DIM}x{DIM}, got {rho.shape}")
        self.rho = rho

    @classmethod
    def from_labels(cls, a: str, b: str):
        """Pure product state |a, b> with a, b in ``LEVELS``."""
        psi = np.kron(_ket(a), _ket(b))
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def from_state_vector(cls, psi):
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def from_qubit_state(cls, amplitudes):
        """Pure state from amplitudes keyed by qubit labels, e.g. ``{"01": 1, "10": 1}``."""
        psi = np.zeros(DIM, dtype=complex)
        for label, amp in amplitudes.items():
            psi[basis_index(label[0], label[1])] = amp
        return cls.from_state_vector(psi)

    @classmethod
    def mixture(cls, weighted):
        """Convex combination of ``(weight, register)`` pairs."""
        rho = sum(w * reg.rho for w, reg in weighted)
        return cls(rho)

    def copy(self):
        return TwoAtomRegister(self.rho.copy())

    @property
    def labels(self):
        return BASIS_LABELS

    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def population(self, a: str, b: str) -> float:
        return float(self.rho[basis_index(a, b), basis_index(a, b)].real)

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def purity(self) -> float:
        return float(np.einsum("ij,ji->", self.rho, self.rho).real)

    def check(self, herm_tol=1e-10, trace_tol=1e-8, pos_tol=1e-8):
        """Raise ``ValueError`` unless the register is a valid density matrix."""
        asym = np.max(np.abs(self.rho - self.rho.conj().T))
        if asym > herm_tol:
            raise ValueError(f"density matrix not Hermitian (max asymmetry {asym:.3g})")
        if abs(self.trace() - 1.0) > trace_tol:
            raise ValueError(f"trace {self.trace():.12g} != 1")
        lam = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min()
        if lam < -pos_tol:
            raise ValueError(f"negative eigenvalue {lam:.3g}")
        return self

    def __repr__(self):
        pops = self.populations()
        top = np.argsort(pops)[::-1][:4]
        body = ", ".join(f"|{BASIS_LABELS[i]}>: {pops[i]:.4f}" for i in top if pops[i] > 1e-6)
        return f"TwoAtomRegister({body})"


@dataclass(frozen=True)
class Microwave:
    """Clock-transition drive; ``detuning`` is the MHz offset of the drive frame."""

    rabi_freq: float
    detuning: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if not self.rabi_freq >= 0:
            raise ValueError(f"microwave rabi_freq must be >= 0, got {self.rabi_freq}")


@dataclass(frozen=True)
class PulseSegment:
    """One piecewise-constant step of a pulse sequence.

    ``decay_to_0`` and ``decay_to_1`` are branching fractions of Rydberg decay
    back into the clock states; the remainder goes to the lost level.
    """

    duration: float
    microwave: Optional[Microwave] = None
    dressing: Optional[LaserDrive] = None
    u_dd: float = 0.0
    rydberg_decay_rate: float = 0.0
    decay_to_0: float = 0.0
    decay_to_1: float = 0.0

    def __post_init__(self):
        if not self.duration >= 0:
            raise ValueError(f"duration must be >= 0, got {self.duration}")
        if not self.rydberg_decay_rate >= 0:
            raise ValueError("rydberg_decay_rate must be >= 0")
        if not (0 <= self.decay_to_0 and 0 <= self.decay_to_1
                and self.decay_to_0 + self.decay_to_1 <= 1):
            raise ValueError("decay branching fractions must be in [0, 1] and sum to <= 1")
        if not np.isfinite(self.u_dd):
            raise ValueError("u_dd must be finite; use a large value for strong blockade")

    @property
    def is_unitary(self) -> bool:
        return self.rydberg_decay_rate == 0


@dataclass
class PulseSequence:
    segments: list
    seed: int = 0

    def __post_init__(self):
        if not self.segments:
            raise ValueError("pulse sequence must contain at least one segment")

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))


def build_hamiltonian(segment: PulseSegment) -> np.ndarray:
    """H/h (MHz) in the frame rotating with both the microwave and the laser."""
    mw = segment.microwave or Microwave(0.0, 0.0, 0.0)
    laser = segment.dressing
    omega_l = laser.rabi_freq if laser else 0.0
    delta_l = laser.detuning if laser else 0.0

    h1 = np.zeros((4, 4), dtype=complex)
    h1 += 0.5 * mw.rabi_freq * np.exp(-1j * mw.phase) * _op("0", "1")
    h1 += 0.5 * omega_l * _op("r", "0")
    h1 = h1 + h1.conj().T
    h1 += -mw.detuning * _op("0", "0") - (delta_l + mw.detuning) * _op("r", "r")

    h = _on_atom(h1, 0) + _on_atom(h1, 1)
    rr = basis_index("r", "r")
    h[rr, rr] += segment.u_dd
    return h


def collapse_operators(segment: PulseSegment):
    """List of ``(rate, operator)`` pairs for Rydberg decay of both atoms."""
    g = segment.rydberg_decay_rate
    if g == 0:
        return []
    p0, p1 = segment.decay_to_0, segment.decay_to_1
    channels = [("d", 1.0 - p0 - p1), ("0", p0), ("1", p1)]
    ops = []
    for atom in (0, 1):
        for target, frac in channels:
            if frac > 0:
                ops.append((g * frac, _on_atom(_op(target, "r"), atom)))
    return ops


def liouvillian(segment: PulseSegment) -> np.ndarray:
    """256x256 generator acting on row-major ``rho.reshape(-1)`` (units 1/us)."""
    h = build_hamiltonian(segment)
    eye = np.eye(DIM)
    lv = -2j * np.pi * (np.kron(h, eye) - np.kron(eye, h.T))
    for rate, c in collapse_operators(segment):
        cdc = c.conj().T @ c
        lv += rate * (np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T))
    return lv


@lru_cache(maxsize=256)
def _eig_hamiltonian(segment: PulseSegment):
    w, v = np.linalg.eigh(build_hamiltonian(segment))
    return w, v


@lru_cache(maxsize=256)
def _liouvillian_cached(segment: PulseSegment):
    return liouvillian(segment)


@lru_cache(maxsize=1024)
def _propagator(segment: PulseSegment, dt: float):
    if segment.is_unitary:
        w, v = _eig_hamiltonian(segment)
        return (v * np.exp(-2j * np.pi * w * dt)) @ v.conj().T
    return expm(_liouvillian_cached(segment) * dt)


def _apply(register: TwoAtomRegister, segment: PulseSegment, dt: float):
    if dt == 0:
        return register
    key = float(np.round(dt, 12))
    prop = _propagator(segment, key)
    tr0 = np.trace(register.rho).real
    if segment.is_unitary:
        register.rho = prop @ register.rho @ prop.conj().T
    else:
        register.rho = (prop @ register.rho.reshape(-1)).reshape(DIM, DIM)
    # restore exact Hermiticity lost to rounding
    register.rho = 0.5 * (register.rho + register.rho.conj().T)
    drift = abs(np.trace(register.rho).real - tr0)
    if drift > TRACE_TOL:
        raise IntegratorError(
            f"trace drift {drift:.3g} exceeds {TRACE_TOL:g} over step dt={dt:.6g} us"
        )
    return register


def evolve(register: TwoAtomRegister, segment: PulseSegment, duration=None) -> TwoAtomRegister:
    """Evolve ``register`` in place through ``segment`` (or a partial ``duration``)."""
    dt = segment.duration if duration is None else duration
    return _apply(register, segment, dt)


def _max_frequency(segment: PulseSegment) -> float:
    w = np.linalg.eigvalsh(build_hamiltonian(segment))
    return max(float(w[-1] - w[0]), segment.rydberg_decay_rate / (2 * np.pi), 1e-12)


def _rk4_step(segment: PulseSegment, step: float, rho):
    h = -2j * np.pi * build_hamiltonian(segment)
    ops = [(rate, c, c.conj().T @ c) for rate, c in collapse_operators(segment)]

    def rhs(r):
        out = h @ r - r @ h
        for rate, c, cdc in ops:
            out += rate * (c @ r @ c.conj().T - 0.5 * (cdc @ r + r @ cdc))
        return out

    k1 = rhs(rho)
    k2 = rhs(rho + 0.5 * step * k1)
    k3 = rhs(rho + 0.5 * step * k2)
    k4 = rhs(rho + step * k3)
    return rho + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


@lru_cache(maxsize=64)
def _rk4_step_matrix(segment: PulseSegment, step: float):
    # the RK4 update is linear in rho: tabulate it on the 256 matrix units
    units = np.eye(DIM * DIM, dtype=complex).reshape(DIM * DIM, DIM, DIM)
    cols = [_rk4_step(segment, step, e).reshape(-1) for e in units]
    return np.array(cols).T


@lru_cache(maxsize=64)
def _rk4_propagator(segment: PulseSegment, step: float, n: int):
    return np.linalg.matrix_power(_rk4_step_matrix(segment, step), n)


def evolve_rk4(register: TwoAtomRegister, segment: PulseSegment, dt=None,
               duration=None) -> TwoAtomRegister:
    """Fixed-step RK4 integration of the master equation (reference oracle).

    Default step is ``1 / (50 * f_max)`` with ``f_max`` the largest transition
    frequency of the segment Hamiltonian. The step is shrunk so that an
    integer number of steps spans ``duration``.
    """
    total = float(np.round(segment.duration if duration is None else duration, 12))
    if total == 0:
        return register
    if dt is None:
        dt = 1.0 / (50.0 * _max_frequency(segment))
    n = max(1, int(math.ceil(total / dt - 1e-9)))
    step = total / n
    if n <= 8:
        rho = register.rho
        for _ in range(n):
            rho = _rk4_step(segment, step, rho)
        register.rho = rho
        return register
    prop = _rk4_propagator(segment, step, n)
    register.rho = (prop @ register.rho.reshape(-1)).reshape(DIM, DIM)
    return register


def qubit_rotation(angle: float, phase: float) -> np.ndarray:
    """Single-atom 4x4 rotation exp[-i angle/2 (cos(phase) X + sin(phase) Y)] on {|1>, |0>}.

    X and Y follow the microwave coupling in :func:`build_hamiltonian`, so a
    resonant microwave of area ``angle`` and phase ``phase`` produces exactly
    this operator. |r> and |d> are left untouched.
    """
    gen = np.exp(-1j * phase) * _op("0", "1")
    gen = gen + gen.conj().T
    u = np.eye(4, dtype=complex)
    q = [LEVEL_INDEX["1"], LEVEL_INDEX["0"]]
    block = gen[np.ix_(q, q)]
    u[np.ix_(q, q)] = np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * block
    return u


def apply_global_rotation(register: TwoAtomRegister, angle: float, phase: float) -> TwoAtomRegister:
    """Apply the same qubit rotation to both atoms, in place."""
    u1 = qubit_rotation(angle, phase)
    u = np.kron(u1, u1)
    register.rho = u @ register.rho @ u.conj().T
    return register


class Trajectory(NamedTuple):
    times: np.ndarray
    populations: np.ndarray  # (n_times, 16)

    def population(self, a: str, b: str) -> np.ndarray:
        return self.populations[:, basis_index(a, b)]

    @property
    def p11(self):
        return self.population("1", "1")

    @property
    def p00(self):
        return self.population("0", "0")

    @property
    def p_single(self):
        return self.population("1", "0") + self.population("0", "1")


def run_sequence(initial: TwoAtomRegister, seq: PulseSequence, sample_times,
                 integrator: str = "exact") -> Trajectory:
    """Populations of all 16 basis states at ``sample_times`` (us, sorted).

    ``initial`` is not modified.
    """
    times = np.asarray(sample_times, dtype=float)
    total = seq.duration
    if times.size and (np.any(np.diff(times) < 0) or times[0] < 0 or times[-1] > total * (1 + 1e-12) + 1e-12):
        raise ValueError("sample_times must be sorted and lie within the sequence duration")
    step = evolve if integrator == "exact" else evolve_rk4
    reg = initial.copy()
    out = np.empty((times.size, DIM))
    k = 0
    t_now = 0.0
    seg_start = 0.0
    for seg in seq.segments:
        seg_end = seg_start + seg.duration
        while k < times.size and times[k] <= seg_end + 1e-12:
            step(reg, seg, duration=max(times[k] - t_now, 0.0))
            t_now = times[k]
            pops = reg.populations()
            if abs(pops.sum() - 1.0) > TRACE_TOL:
                raise IntegratorError(f"populations sum to {pops.sum():.9f} at t={t_now}")
            out[k] = pops
            k += 1
        step(reg, seg, duration=max(seg_end - t_now, 0.0))
        t_now = seg_start = seg_end
    return Trajectory(times, out)


class RabiCurves(NamedTuple):
    times: np.ndarray
    p11: np.ndarray
    p_single: np.ndarray
    p00: np.ndarray
    trajectory: Trajectory


def rabi_segment(drive: LaserDrive, u_dd: float, mw_rabi: float, gamma_r: float,
                 duration: float, mw_detuning=None, phase=0.0, decay_to_0=0.0,
                 decay_to_1=0.0) -> PulseSegment:
    """Dressing plus microwave, detuned onto the dressed single-flip resonance."""
    if mw_detuning is None:
        mw_detuning = single_atom_light_shift(drive)
    return PulseSegment(
        duration=duration,
        microwave=Microwave(mw_rabi, mw_detuning, phase),
        dressing=drive,
        u_dd=u_dd,
        rydberg_decay_rate=gamma_r,
        decay_to_0=decay_to_0,
        decay_to_1=decay_to_1,
    )


def simulate_blockaded_rabi(drive: LaserDrive, u_dd: float, mw_rabi: float,
                            gamma_r: float, times, initial: TwoAtomRegister | None = None,
                            mw_detuning=None, integrator="exact", **branching) -> RabiCurves:
    """Two-atom Rabi flopping from |1,1> with dressing and microwave on together."""
    times = np.asarray(times, dtype=float)
    seg = rabi_segment(drive, u_dd, mw_rabi, gamma_r, float(times.max()) if times.size else 0.0,
                       mw_detuning=mw_detuning, **branching)
    start = initial if initial is not None else TwoAtomRegister.from_labels("1", "1")
    traj = run_sequence(start, PulseSequence([seg]), times, integrator=integrator)
    return RabiCurves(times, traj.p11, traj.p_single, traj.p00, traj)


def simulate_single_atom_rabi(drive: LaserDrive, mw_rabi: float, gamma_r: float, times,
                              mw_detuning=None):
    """Probability that one dressed atom is still in |1>.

    Uses the two-atom register with no interaction and traces out atom 2.
    """
    curves = simulate_blockaded_rabi(drive, 0.0, mw_rabi, gamma_r, times, mw_detuning=mw_detuning)
    pops = curves.trajectory.populations.reshape(-1, 4, 4)
    return pops[:, LEVEL_INDEX["1"], :].sum(axis=1)


def _rabi_design(t, f, kappa):
    env = np.exp(-kappa * t)
    ph = 2 * np.pi * f * t
    return np.column_stack([
        np.ones_like(t), env,
        env * np.cos(ph), env * np.sin(ph),
        env * np.cos(2 * ph), env * np.sin(2 * ph),
    ])


def fit_rabi_frequency(times, signal, damped=False) -> float:
    """Fundamental oscillation frequency (MHz) of a Rabi-flopping signal.

    The model carries the fundamental and its second harmonic with linear
    amplitudes, so product-state curves such as cos^4 are fitted without
    bias. Only frequency (and an optional decay rate) are nonlinear.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    dt = np.median(np.diff(t))
    n_pad = 16 * t.size
    spec = np.abs(np.fft.rfft(y - y.mean(), n_pad))
    freqs = np.fft.rfftfreq(n_pad, dt)
    f0 = freqs[1 + np.argmax(spec[1:])]

    def resid(p):
        f, kappa = p[0], (p[1] if damped else 0.0)
        a = _rabi_design(t, f, kappa)
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        return a @ coef - y

    x0 = [f0, 0.0] if damped else [f0]
    lb = [0.5 * f0, 0.0] if damped else [0.5 * f0]
    ub = [1.5 * f0, np.inf] if damped else [1.5 * f0]
    sol = least_squares(resid, x0, bounds=(lb, ub), xtol=1e-12, ftol=1e-12, gtol=1e-12)
    return float(sol.x[0])


def dressed_rabi_frequency(drive: LaserDrive, mw_rabi: float) -> float:
    """Effective single-atom clock Rabi frequency once |0> is dressed."""
    if drive.rabi_freq == 0:
        return mw_rabi
    return dressed_ground_amplitude(drive)[0] * mw_rabi


class LifetimeFit(NamedTuple):
    tau: float
    amplitude: float
    offset: float


def simulate_lifetime(drive: LaserDrive, gamma_r: float, delays, decay_to_0=0.0,
                      decay_to_1=0.0) -> np.ndarray:
    """Ground-return probability after pi - delay - pi on atom 1 (atom 2 idles in |1>).

    ``drive`` supplies the optical Rabi frequency; its detuning is ignored and
    the pulses are applied on bare resonance.
    """
    laser = LaserDrive(drive.rabi_freq, 0.0, drive.wavelength)
    t_pi = 1.0 / (2.0 * laser.rabi_freq)
    common = dict(rydberg_decay_rate=gamma_r, decay_to_0=decay_to_0, decay_to_1=decay_to_1)
    pulse = PulseSegment(t_pi, dressing=laser, **common)
    start = TwoAtomRegister.from_labels("0", "1")
    first = evolve(start.copy(), pulse)
    out = []
    for delay in np.asarray(delays, dtype=float):
        reg = first.copy()
        evolve(reg, PulseSegment(float(delay), **common))
        evolve(reg, pulse)
        pops = reg.populations().reshape(4, 4)
        out.append(pops[LEVEL_INDEX["0"], :].sum())
    return np.array(out)


def fit_lifetime(delays, probability) -> LifetimeFit:
    """Fit ``A exp(-t / tau) + B``; a flat curve gives ``tau = inf``."""
    t = np.asarray(delays, dtype=float)
    y = np.asarray(probability, dtype=float)
    if np.ptp(y) <= 1e-9 * max(1.0, np.abs(y).max()):
        return LifetimeFit(math.inf, 0.0, float(y.mean()))
    span = t.max() - t.min()

    def model(t, a, tau, b):
        return a * np.exp(-t / tau) + b

    popt, _ = curve_fit(model, t, y, p0=[y[0] - y[-1], span / 2, y[-1]],
                        bounds=([-np.inf, 1e-9, -np.inf], np.inf), maxfev=20000)
    return LifetimeFit(float(popt[1]), float(popt[0]), float(popt[2]))


def doppler_shot_drive(drive: LaserDrive, sigma: float, rng: np.random.Generator) -> LaserDrive:
    """Drive with a quasi-static Doppler offset added to the detuning."""
    return replace(drive, detuning=drive.detuning + rng.normal(0.0, sigma))
