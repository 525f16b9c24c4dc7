"""Microwave spectroscopy of the dressed pair and extraction of J.

The microwave detuning grid is absolute (MHz, in the frame of the bare clock
transition). The single-flip line sits at the single-atom light shift and
the two-photon |1,1> -> |0,0> line at the light shift plus J/2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .dressing import LaserDrive
from .dynamics import TwoAtomRegister, evolve, rabi_segment
from .errors import ExtractionError, FitError
from .rng import parallel_map

__all__ = [
    "ScanResult",
    "PeakFit",
    "lorentzian",
    "mw_scan",
    "fit_peak",
    "extract_j",
    "JExtraction",
]


@dataclass
class ScanResult:
    detuning: np.ndarray
    p11: np.ndarray
    p10: np.ndarray
    p01: np.ndarray
    p00: np.ndarray

    @property
    def p_single(self):
        return self.p10 + self.p01

    @property
    def step(self) -> float:
        return float(np.median(np.diff(self.detuning)))

    def rows(self):
        return np.column_stack([self.detuning, self.p11, self.p10, self.p01, self.p00, self.p_single])

    def shifted(self, offset):
        return ScanResult(self.detuning + offset, self.p11, self.p10, self.p01, self.p00)


@dataclass(frozen=True)
class PeakFit:
    center: float
    width: float  # FWHM
    amplitude: float
    offset: float
    residual_norm: float


def lorentzian(x, center, width, amplitude, offset):
    """Peak of height ``amplitude`` and full width ``width`` above ``offset``."""
    hw = 0.5 * width
    return offset + amplitude * hw * hw / ((x - center) ** 2 + hw * hw)


def mw_scan(drive: LaserDrive, u_dd: float, mw_rabi: float, pulse_time: float, grid,
            gamma_r: float = 0.0, threads=None, initial: TwoAtomRegister | None = None) -> ScanResult:
    """Final clock-state populations after one dressed microwave pulse per detuning."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("detuning grid must be strictly increasing")
    start = initial or TwoAtomRegister.from_labels("1", "1")

    def point(x):
        seg = rabi_segment(drive, u_dd, mw_rabi, gamma_r, pulse_time, mw_detuning=float(x))
        reg = evolve(start.copy(), seg)
        return [reg.population(a, b) for a, b in ("11", "10", "01", "00")]

    pops = np.array(parallel_map(point, grid, threads)).reshape(-1, 4)
    return ScanResult(grid, *pops.T)


def fit_peak(x, y, window, max_iter: int = 500, tol: float = 1e-8) -> PeakFit:
    """Lorentzian least-squares fit inside ``window = (lo, hi)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lo, hi = window
    sel = (x >= lo) & (x <= hi)
    xs, ys = x[sel], y[sel]
    if xs.size < 7:
        raise FitError(f"window [{lo:.4g}, {hi:.4g}] holds {xs.size} points; need >= 7")
    k = int(np.argmax(ys))
    if k == 0 or k == xs.size - 1:
        raise FitError(f"no local maximum inside window [{lo:.4g}, {hi:.4g}]")

    offset0 = float(ys.min())
    amp0 = float(ys[k] - offset0)
    half = ys > offset0 + 0.5 * amp0
    width0 = max(float(np.ptp(xs[half])), float(np.median(np.diff(xs))))
    p0 = np.array([xs[k], width0, amp0, offset0])
    scale = np.array([width0, width0, max(amp0, 1e-12), max(amp0, 1e-12)])

    def resid(p):
        return lorentzian(xs, *p) - ys

    sol = least_squares(resid, p0, x_scale=scale, xtol=tol, ftol=tol, gtol=tol,
                        max_nfev=max_iter, method="lm")
    c, w, a, off = sol.x
    if sol.status <= 0:
        raise FitError(f"Lorentzian fit did not converge: {sol.message}", last_params=sol.x)
    w = abs(w)
    if a < 0:
        raise FitError("fitted peak has negative amplitude", last_params=sol.x)
    return PeakFit(float(c), float(w), float(a), float(off), float(np.linalg.norm(sol.fun)))


@dataclass(frozen=True)
class JExtraction:
    j: float
    single: PeakFit
    double: PeakFit


def _fwhm_estimate(x, y):
    k = int(np.argmax(y))
    half = y.min() + 0.5 * (y[k] - y.min())
    lo = k
    while lo > 0 and y[lo - 1] > half:
        lo -= 1
    hi = k
    while hi < y.size - 1 and y[hi + 1] > half:
        hi += 1
    return float(x[hi] - x[lo])


def extract_j(scan: ScanResult, halfwidth=None, full=False):
    """J = 2 (two-photon center - single-flip center), each from its own channel.

    Each fit window is centred on the channel argmax. Its default half-width
    is the channel's half-maximum width, capped at a quarter of the argmax
    separation when the two lines are resolved, and never below 4 grid steps.
    """
    x = scan.detuning
    step = scan.step
    channels = {"single-flip (P_single)": scan.p_single, "two-photon (P_00)": scan.p00}
    for name, y in channels.items():
        if np.ptp(y) <= 1e-9:
            raise ExtractionError(f"missing {name} resonance: channel is flat")
    sep = abs(x[np.argmax(scan.p00)] - x[np.argmax(scan.p_single)])
    fits = []
    for name, y in channels.items():
        hw = halfwidth
        if hw is None:
            hw = _fwhm_estimate(x, y)
            if sep > 8 * step:
                hw = min(hw, 0.25 * sep)
            hw = max(hw, 4.0 * step)
        k = int(np.argmax(y))
        window = (x[k] - hw - 1e-9 * step, x[k] + hw + 1e-9 * step)
        try:
            fits.append(fit_peak(x, y, window))
        except FitError as exc:
            raise ExtractionError(f"missing {name} resonance: {exc}") from exc
    j = 2.0 * (fits[1].center - fits[0].center)
    return JExtraction(j, fits[0], fits[1]) if full else j
