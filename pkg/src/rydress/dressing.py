"""Dressed-state energies and the ground-state interaction strength J.

All energies are E/h in MHz, lengths in um. The optical rotating frame puts
the bare ground state |0> at zero and the Rydberg state |r> at -detuning, so a
blue (positive) detuning gives a positive single-atom light shift.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import constants

from .errors import BranchTrackingError, DegenerateBranchError
from .pairpotential import PairPotentialModel, PerfectBlockade, u_dd as pair_shift

__all__ = [
    "LaserDrive",
    "DressedSpectrum",
    "JCurve",
    "single_atom_light_shift",
    "dressed_ground_amplitude",
    "j_perfect_blockade",
    "j_finite_blockade",
    "dressed_spectrum",
    "j_vs_r",
    "doppler_detuning_sigma",
    "doppler_j_spread",
    "track_branch",
    "symmetric_pair_hamiltonian",
]

# cross-checked ramp parameters for adiabatic branch continuation
N_RAMP_STEPS = 64
MIN_OVERLAP = 0.6


@dataclass(frozen=True)
class LaserDrive:
    """Dressing laser: Rabi frequency and detuning as ordinary frequencies (MHz)."""

    rabi_freq: float
    detuning: float
    wavelength: float = 319.0  # nm

    def __post_init__(self):
        if not self.rabi_freq >= 0:
            raise ValueError(f"rabi_freq must be >= 0, got {self.rabi_freq}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be > 0, got {self.wavelength}")

    @property
    def generalized_rabi(self) -> float:
        return float(np.hypot(self.detuning, self.rabi_freq))


@dataclass(frozen=True)
class DressedSpectrum:
    single_atom_shift: float
    two_atom_shift: float
    j: float
    ground_amplitude: float
    rydberg_amplitude: float


class JCurve(NamedTuple):
    r: np.ndarray
    j: np.ndarray


def _require_detuning(drive: LaserDrive):
    if drive.detuning == 0:
        raise DegenerateBranchError()


def single_atom_light_shift(drive: LaserDrive) -> float:
    """Light shift of the dressed ground state of one atom (MHz).

    Eigenvalue of ``[[0, W/2], [W/2, -D]]`` that tends to zero with the drive.
    """
    if drive.rabi_freq == 0:
        return 0.0
    _require_detuning(drive)
    d = drive.detuning
    return 0.5 * (-d + np.sign(d) * np.hypot(d, drive.rabi_freq))


def dressed_ground_amplitude(drive: LaserDrive) -> tuple[float, float]:
    """Bare-ground and Rydberg amplitudes (both >= 0) of the dressed ground state."""
    _require_detuning(drive)
    x = abs(drive.detuning) / drive.generalized_rabi
    return float(np.sqrt(0.5 * (1.0 + x))), float(np.sqrt(0.5 * (1.0 - x)))


def j_perfect_blockade(drive: LaserDrive) -> float:
    """Plateau value of J (MHz) for an infinitely strong pair shift."""
    _require_detuning(drive)
    d, w = drive.detuning, drive.rabi_freq
    s = np.sign(d)
    return 0.5 * (d + s * (np.sqrt(d * d + 2 * w * w) - 2 * np.sqrt(d * d + w * w)))


def symmetric_pair_hamiltonian(rabi_freq, detuning, u_dd) -> np.ndarray:
    """3x3 Hamiltonian on {|00>, (|0r>+|r0>)/sqrt2, |rr>} in MHz."""
    g = rabi_freq / np.sqrt(2.0)
    return np.array(
        [
            [0.0, g, 0.0],
            [g, -detuning, g],
            [0.0, g, -2.0 * detuning + u_dd],
        ]
    )


def track_branch(hamiltonian_at, start_index: int, n_steps: int = N_RAMP_STEPS):
    """Follow the eigenvector starting on basis state ``start_index``.

    ``hamiltonian_at(s)`` returns the Hermitian matrix at ramp fraction
    ``s`` in [0, 1]; the bare basis state must be an eigenvector at s = 0.
    Returns ``(energy, eigenvector)`` at s = 1.
    """
    h0 = hamiltonian_at(0.0)
    vec = np.zeros(h0.shape[0], dtype=h0.dtype)
    vec[start_index] = 1.0
    energy = h0[start_index, start_index].real
    for s in np.linspace(0.0, 1.0, n_steps + 1)[1:]:
        w, v = np.linalg.eigh(hamiltonian_at(s))
        overlaps = np.abs(v.conj().T @ vec)
        k = int(np.argmax(overlaps))
        if overlaps[k] < MIN_OVERLAP:
            raise BranchTrackingError(
                f"branch tracking failed at ramp fraction {s:.4f}: "
                f"max overlap {overlaps[k]:.3f} < {MIN_OVERLAP}"
            )
        vec, energy = v[:, k], w[k]
    return float(energy), vec


def _two_atom_shift(drive: LaserDrive, u_dd: float) -> float:
    d = drive.detuning
    # bare |00> is degenerate with |rr> at u_dd = 2*detuning (anti-blockade)
    if abs(u_dd - 2.0 * d) <= 1e-9 * max(1.0, abs(d)):
        raise BranchTrackingError(
            f"anti-blockade resonance: u_dd={u_dd} MHz equals 2*detuning; "
            "the dressed |00> branch is not defined"
        )
    energy, _ = track_branch(
        lambda s: symmetric_pair_hamiltonian(s * drive.rabi_freq, d, u_dd), 0
    )
    return energy


def j_finite_blockade(drive: LaserDrive, u_dd: float) -> float:
    """J (MHz) for a finite doubly-excited pair shift ``u_dd`` (MHz)."""
    _require_detuning(drive)
    if drive.rabi_freq == 0:
        return 0.0
    return _two_atom_shift(drive, u_dd) - 2.0 * single_atom_light_shift(drive)


def dressed_spectrum(drive: LaserDrive, u_dd: float | None = None) -> DressedSpectrum:
    """Bundle the dressed energies; ``u_dd=None`` means perfect blockade."""
    e1 = single_atom_light_shift(drive)
    j = j_perfect_blockade(drive) if u_dd is None else j_finite_blockade(drive, u_dd)
    a0, ar = dressed_ground_amplitude(drive)
    return DressedSpectrum(e1, j + 2.0 * e1, j, a0, ar)


def j_vs_r(drive: LaserDrive, model: PairPotentialModel, r_grid) -> JCurve:
    """J along a distance grid for a pair-potential model."""
    r = np.asarray(r_grid, dtype=float)
    if isinstance(model, PerfectBlockade):
        pair_shift(model, r)  # domain check only
        return JCurve(r, np.full(r.shape, j_perfect_blockade(drive)))
    u = np.atleast_1d(pair_shift(model, r))
    j = np.array([j_finite_blockade(drive, float(ui)) for ui in u]).reshape(r.shape)
    return JCurve(r, j)


def doppler_detuning_sigma(temperature, wavelength=319.0, atom_mass=132.905) -> float:
    """1-sigma Doppler detuning noise (MHz) along the beam.

    temperature in uK, wavelength in nm, atom_mass in atomic mass units.
    """
    v_rms = np.sqrt(constants.k * temperature * 1e-6 / (atom_mass * constants.atomic_mass))
    return float(v_rms / (wavelength * 1e-9) * 1e-6)


def doppler_j_spread(drive: LaserDrive, sigma: float, n_samples: int = 10_000,
                     seed: int = 0, u_dd: float | None = None):
    """Mean and standard deviation of J under quasi-static detuning noise."""
    rng = np.random.default_rng(seed)
    offsets = rng.normal(0.0, sigma, n_samples)
    if u_dd is None:
        # vectorized closed form
        d = drive.detuning + offsets
        w = drive.rabi_freq
        js = 0.5 * (d + np.sign(d) * (np.sqrt(d * d + 2 * w * w) - 2 * np.sqrt(d * d + w * w)))
    else:
        js = np.array([
            j_finite_blockade(LaserDrive(drive.rabi_freq, drive.detuning + x), u_dd)
            for x in offsets
        ])
    return float(js.mean()), float(js.std())
