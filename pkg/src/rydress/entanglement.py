"""Bell-state preparation, parity analysis and fidelity bounds.

Phase convention: a global pi/2 pulse of phase pi/2 maps Psi+ onto
(|0,0> - |1,1>)/sqrt2, whose parity signal is +cos(2 phi). We call that state
the protocol's Phi+; it equals (|0,0> + |1,1>)/sqrt2 up to a local phase. The
exact-fidelity estimate for Phi+ maximizes over this relative phase.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dressing import LaserDrive, j_finite_blockade, single_atom_light_shift
from .dynamics import (
    TwoAtomRegister,
    apply_global_rotation,
    basis_index,
    dressed_rabi_frequency,
    evolve,
    rabi_segment,
)
from .errors import BlockadeValidityError, BlockadeValidityWarning
from .measurement import MeasurementRecord, detect

__all__ = [
    "QUBIT_INDICES",
    "bell_state",
    "global_rotation",
    "psi_plus_pulse_time",
    "prepare_psi_plus",
    "prepare_phi_plus",
    "two_photon_pulse_time",
    "ParityScan",
    "parity_scan",
    "FidelityReport",
    "fidelity_report",
    "bell_fidelity",
    "qubit_block",
]

QUBIT_LABELS = ("11", "10", "01", "00")
QUBIT_INDICES = [basis_index(label[0], label[1]) for label in QUBIT_LABELS]
BLOCKADE_MARGIN = 5.0


def bell_state(name: str, relative_phase: float = 0.0) -> TwoAtomRegister:
    """``psi_plus``: (|01> + e^{i chi}|10>)/sqrt2; ``phi_plus``: (|00> + e^{i chi}|11>)/sqrt2."""
    w = np.exp(1j * relative_phase)
    if name == "psi_plus":
        return TwoAtomRegister.from_qubit_state({"01": 1.0, "10": w})
    if name == "phi_plus":
        return TwoAtomRegister.from_qubit_state({"00": 1.0, "11": w})
    raise ValueError(f"unknown Bell state {name!r}")


def global_rotation(register: TwoAtomRegister, angle: float, phase: float) -> TwoAtomRegister:
    """Rotated copy of ``register``; both qubits see the same undressed pulse."""
    return apply_global_rotation(register.copy(), angle, phase)


def _check_blockade(drive, u_dd, mw_rabi, strict):
    j = j_finite_blockade(drive, u_dd)
    if abs(j) < BLOCKADE_MARGIN * mw_rabi:
        msg = (f"spin-flip blockade not valid: |J| = {abs(j):.4g} MHz < "
               f"{BLOCKADE_MARGIN:g} x mw_rabi = {BLOCKADE_MARGIN * mw_rabi:.4g} MHz")
        if strict:
            raise BlockadeValidityError(msg)
        warnings.warn(msg, BlockadeValidityWarning, stacklevel=3)
    return j


def psi_plus_pulse_time(drive: LaserDrive, mw_rabi: float) -> float:
    """Pulse length giving sqrt2 * (dressed Rabi frequency) * T = 1/2 cycle."""
    return 1.0 / (2.0 * np.sqrt(2.0) * dressed_rabi_frequency(drive, mw_rabi))


def prepare_psi_plus(drive: LaserDrive, u_dd: float, mw_rabi: float, gamma_r: float = 0.0,
                     initial: Optional[TwoAtomRegister] = None, strict: bool = False,
                     decay_to_0: float = 0.0, decay_to_1: float = 0.0) -> TwoAtomRegister:
    """Blockaded Rabi pi pulse from |1,1> (or ``initial``) onto Psi+.

    The pulse is tuned to the dressed single-flip resonance and timed with
    the dressed Rabi frequency, so the drive is a pi pulse of the collective
    sqrt2-enhanced transition.
    """
    reg = (initial or TwoAtomRegister.from_labels("1", "1")).copy()
    if mw_rabi == 0:
        return reg
    _check_blockade(drive, u_dd, mw_rabi, strict)
    seg = rabi_segment(drive, u_dd, mw_rabi, gamma_r, psi_plus_pulse_time(drive, mw_rabi),
                       decay_to_0=decay_to_0, decay_to_1=decay_to_1)
    return evolve(reg, seg)


def two_photon_pulse_time(drive: LaserDrive, u_dd: float, mw_rabi: float) -> float:
    """pi/2 time of the |1,1> <-> |0,0> two-photon transition (second order in mw_rabi)."""
    j = j_finite_blockade(drive, u_dd)
    om = dressed_rabi_frequency(drive, mw_rabi)
    return abs(j) / (8.0 * om * om)


def prepare_phi_plus(register: TwoAtomRegister, method: str = "global_half_pi",
                     drive: Optional[LaserDrive] = None, u_dd: Optional[float] = None,
                     mw_rabi: float = 0.0, gamma_r: float = 0.0,
                     phase: float = np.pi / 2) -> TwoAtomRegister:
    """Phi+ from Psi+ by a global pi/2 pulse, or from |1,1> by a two-photon pi/2 pulse.

    ``global_half_pi`` needs the dressing off (``drive`` None or zero Rabi
    frequency). ``two_photon`` needs the dressing on and drives at the
    dressed resonance shifted by J/2; it is slower and therefore less
    faithful once decay is present.
    """
    dressed = drive is not None and drive.rabi_freq > 0
    if method == "global_half_pi":
        if dressed:
            raise ValueError("global_half_pi requires the dressing laser off")
        return global_rotation(register, np.pi / 2, phase)
    if method == "two_photon":
        if not dressed or u_dd is None:
            raise ValueError("two_photon requires a dressing drive and u_dd")
        reg = register.copy()
        if mw_rabi == 0:
            return reg
        j = j_finite_blockade(drive, u_dd)
        seg = rabi_segment(drive, u_dd, mw_rabi, gamma_r,
                           two_photon_pulse_time(drive, u_dd, mw_rabi),
                           mw_detuning=single_atom_light_shift(drive) + 0.5 * j)
        return evolve(reg, seg)
    raise ValueError(f"unknown Phi+ method {method!r}")


@dataclass
class ParityScan:
    phases: np.ndarray
    q: np.ndarray
    p11: np.ndarray
    p10: np.ndarray
    p01: np.ndarray
    p00: np.ndarray
    survival: float

    def rows(self):
        return np.column_stack([self.phases, self.q, self.p11, self.p10, self.p01, self.p00])


def parity_scan(register: TwoAtomRegister, phases, **detect_kwargs) -> ParityScan:
    """Parity after a global pi/2 analysis pulse of each phase.

    Populations are loss-conditioned detection probabilities.
    """
    phases = np.asarray(phases, dtype=float)
    cols = {k: np.empty(phases.size) for k in QUBIT_LABELS}
    survival = 1.0
    for i, phi in enumerate(phases):
        rec = detect(global_rotation(register, np.pi / 2, phi), **detect_kwargs)
        for k in QUBIT_LABELS:
            cols[k][i] = rec.conditional[k]
        survival = rec.survival
    q = cols["11"] + cols["00"] - cols["01"] - cols["10"]
    return ParityScan(phases, q, cols["11"], cols["10"], cols["01"], cols["00"], survival)


@dataclass
class FidelityReport:
    target: str
    coherence: float
    bound: float
    bound_with_loss: float
    survival: float
    exact_fidelity: Optional[float] = None
    exact_fidelity_with_loss: Optional[float] = None
    population_term: Optional[float] = None

    @property
    def entangled(self) -> bool:
        return self.bound > 0.5

    def to_dict(self):
        out = {k: v for k, v in self.__dict__.items()}
        out["entangled"] = self.entangled
        return out


def qubit_block(register: TwoAtomRegister) -> np.ndarray:
    """4x4 block of rho on the qubit states ordered (11, 10, 01, 00)."""
    return register.rho[np.ix_(QUBIT_INDICES, QUBIT_INDICES)]


def bell_fidelity(register: TwoAtomRegister, target: str, conditioned: bool = True) -> float:
    """Fidelity with the target Bell state; Phi+ is optimized over its relative phase.

    With ``conditioned`` the qubit block is renormalized, matching runs in
    which both atoms are found in the traps.
    """
    block = qubit_block(register)
    if conditioned:
        tr = np.trace(block).real
        if tr <= 0:
            return 0.0
        block = block / tr
    i11, i10, i01, i00 = range(4)
    if target == "psi_plus":
        f = 0.5 * (block[i01, i01] + block[i10, i10]).real + block[i01, i10].real
    elif target == "phi_plus":
        f = 0.5 * (block[i00, i00] + block[i11, i11]).real + abs(block[i00, i11])
    else:
        raise ValueError(f"unknown target {target!r}")
    return float(f)


def _check_period(phases):
    phases = np.sort(np.asarray(phases, dtype=float))
    if phases.size < 3:
        raise ValueError("parity scan needs at least 3 phases")
    steps = np.diff(phases)
    if not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-12):
        raise ValueError("parity scan phases must be uniformly spaced")
    if phases.size * steps[0] < np.pi * (1 - 1e-9):
        raise ValueError("parity scan must cover at least one full period (pi) of the phase")


def fidelity_report(scan: ParityScan, target: str,
                    populations_before_pulse: Optional[MeasurementRecord] = None,
                    register: Optional[TwoAtomRegister] = None) -> FidelityReport:
    """Coherence-based fidelity bound from a parity scan.

    ``psi_plus`` uses the mean parity, ``phi_plus`` the amplitude of the
    cos(2 phi)/sin(2 phi) component from a linear least-squares fit. The
    bound with loss multiplies by the two-atom survival probability.
    """
    _check_period(scan.phases)
    if target == "psi_plus":
        coherence = float(np.mean(scan.q))
    elif target == "phi_plus":
        a = np.column_stack([np.ones_like(scan.phases), np.cos(2 * scan.phases),
                             np.sin(2 * scan.phases)])
        coef, *_ = np.linalg.lstsq(a, scan.q, rcond=None)
        coherence = float(np.hypot(coef[1], coef[2]))
    else:
        raise ValueError(f"unknown target {target!r}")
    bound = float(np.clip(coherence, 0.0, 1.0))
    report = FidelityReport(target, coherence, bound, bound * scan.survival, scan.survival)
    if populations_before_pulse is not None:
        c = populations_before_pulse.conditional
        pair = ("01", "10") if target == "psi_plus" else ("00", "11")
        report.population_term = float(c[pair[0]] + c[pair[1]])
    if register is not None:
        report.exact_fidelity = bell_fidelity(register, target, conditioned=True)
        report.exact_fidelity_with_loss = bell_fidelity(register, target, conditioned=False)
    return report
