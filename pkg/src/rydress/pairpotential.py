"""Distance-dependent shift u_dd(R) of the doubly excited pair state |r,r>.

Energies in MHz, distances in um. Attractive (red) shifts are negative.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, NotFoundError

__all__ = [
    "PerfectBlockade",
    "VanDerWaals",
    "ForsterTwoChannel",
    "PairPotentialModel",
    "Blockaded",
    "BLOCKADED",
    "u_dd",
    "blockade_radius",
    "DEFAULT_C6",
]

# illustrative only; not a literature value for any particular Rydberg pair
DEFAULT_C6 = 1.0e5  # MHz um^6
DEFAULT_C3 = 3.0e3  # MHz um^3
DEFAULT_FORSTER_DEFECT = 100.0  # MHz


class Blockaded:
    """Sentinel returned by :func:`u_dd` for the perfect-blockade model."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "BLOCKADED"

    def __float__(self):
        raise TypeError("perfect blockade has no finite u_dd; use the plateau formula")


BLOCKADED = Blockaded()


@dataclass(frozen=True)
class PerfectBlockade:
    pass


@dataclass(frozen=True)
class VanDerWaals:
    """u_dd = -c6 / R^6 (red shift for c6 > 0)."""

    c6: float = DEFAULT_C6


@dataclass(frozen=True)
class ForsterTwoChannel:
    """Pair state dipole-coupled (c3/R^3) to one channel offset by ``forster_defect``.

    Crosses over from -c3^2/(defect R^6) at long range to -+|c3|/R^3 at short
    range.
    """

    c3: float = DEFAULT_C3
    forster_defect: float = DEFAULT_FORSTER_DEFECT

    def __post_init__(self):
        if self.forster_defect == 0:
            raise ValueError("forster_defect must be nonzero")


PairPotentialModel = Union[PerfectBlockade, VanDerWaals, ForsterTwoChannel]


def _forster_shift(c3, defect, r):
    v = c3 / r**3
    # branch of [[0, v], [v, defect]] continuous with 0 as v -> 0, written in
    # the cancellation-free form -2 v^2 / (defect + sign(defect) sqrt(defect^2 + 4 v^2))
    return -2.0 * v * v / (defect + np.sign(defect) * np.sqrt(defect * defect + 4.0 * v * v))


def u_dd(model: PairPotentialModel, r):
    """Pair shift at distance ``r`` (scalar or array, um) in MHz.

    Returns :data:`BLOCKADED` for :class:`PerfectBlockade`.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError(f"distance must be > 0, got {r}")
    if isinstance(model, PerfectBlockade):
        return BLOCKADED
    if isinstance(model, VanDerWaals):
        out = -model.c6 / r_arr**6
    elif isinstance(model, ForsterTwoChannel):
        out = _forster_shift(model.c3, model.forster_defect, r_arr)
    else:
        raise TypeError(f"unknown pair-potential model {model!r}")
    return float(out) if out.ndim == 0 else out


def blockade_radius(model: PairPotentialModel, drive, r_min=0.1, r_max=100.0,
                    tol=1e-4) -> float:
    """Distance where |u_dd| equals sqrt(detuning^2 + 2 rabi^2), by bisection."""
    if isinstance(model, PerfectBlockade):
        raise DomainError("blockade radius is undefined for PerfectBlockade")
    target = np.sqrt(drive.detuning**2 + 2.0 * drive.rabi_freq**2)

    def excess(r):
        return abs(u_dd(model, r)) - target

    lo, hi = r_min, r_max
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0:
        raise NotFoundError(
            f"no blockade-radius crossing in [{r_min}, {r_max}] um "
            f"(|u_dd| target {target:.4g} MHz)"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = excess(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
