"""Detection, state preparation and release-recapture of the two atoms."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .dynamics import LEVEL_INDEX, TwoAtomRegister, qubit_rotation
from .rng import parallel_map, stream

__all__ = [
    "OUTCOMES",
    "MeasurementRecord",
    "detect",
    "outcome_matrix",
    "prepare_initial",
    "TrapParams",
    "RecaptureResult",
    "recapture_probability",
    "recapture_curve",
]

OUTCOMES = ("bright", "dark", "lost")
QUBIT_LABELS = ("11", "10", "01", "00")


@dataclass
class MeasurementRecord:
    """Joint detection probabilities for the two atoms.

    ``joint[i, j]`` is the probability that atom 1 gives ``OUTCOMES[i]`` and
    atom 2 gives ``OUTCOMES[j]``. ``conditional`` holds P_{x,y} restricted to
    runs where both atoms were recaptured (bright = |0>, dark = |1>).
    """

    joint: np.ndarray
    survival: float
    conditional: dict = field(default_factory=dict)

    @property
    def parity(self) -> float:
        c = self.conditional
        return c["11"] + c["00"] - c["01"] - c["10"]

    @property
    def unconditional(self) -> dict:
        """P_{x,y} including lost runs in the denominator."""
        return {k: v * self.survival for k, v in self.conditional.items()}

    def to_dict(self):
        return {
            "outcomes": list(OUTCOMES),
            "joint": self.joint.tolist(),
            "survival": self.survival,
            "conditional": dict(self.conditional),
            "parity": self.parity,
        }


def outcome_matrix(rydberg_loss_fraction=1.0, recaptured_bright_fraction=0.5) -> np.ndarray:
    """3x4 map from single-atom level populations to detection outcomes.

    Rydberg population that is not lost is assumed to decay back inside the
    recapture window, a ``recaptured_bright_fraction`` of it into F=4.
    """
    f = rydberg_loss_fraction
    m = np.zeros((3, 4))
    m[1, LEVEL_INDEX["1"]] = 1.0
    m[0, LEVEL_INDEX["0"]] = 1.0
    m[2, LEVEL_INDEX["d"]] = 1.0
    r = LEVEL_INDEX["r"]
    m[:, r] = [(1 - f) * recaptured_bright_fraction, (1 - f) * (1 - recaptured_bright_fraction), f]
    return m


def detect(register: TwoAtomRegister, rydberg_loss_fraction=1.0,
           recaptured_bright_fraction=0.5) -> MeasurementRecord:
    m = outcome_matrix(rydberg_loss_fraction, recaptured_bright_fraction)
    pops = np.clip(register.populations(), 0.0, None).reshape(4, 4)
    pops = pops / pops.sum()
    joint = m @ pops @ m.T
    present = joint[:2, :2]
    survival = float(present.sum())
    if survival > 0:
        b, d = 0, 1
        cond = {
            "11": present[d, d] / survival,
            "10": present[d, b] / survival,
            "01": present[b, d] / survival,
            "00": present[b, b] / survival,
        }
    else:
        cond = {k: 0.0 for k in QUBIT_LABELS}
    return MeasurementRecord(joint, survival, {k: float(v) for k, v in cond.items()})


def prepare_initial(pump_efficiency: float, dark_remainder: float = 0.0) -> TwoAtomRegister:
    """Optically pumped pair after the global pi rotation into |1,1>.

    Each atom is pumped into |0> with probability ``pump_efficiency``; the
    remainder sits incoherently in the F=3 manifold. A ``dark_remainder``
    fraction of that remainder stands in for non-clock F=3 sublevels and is
    not rotated by the clock pi pulse.
    """
    if not 0 <= pump_efficiency <= 1:
        raise ValueError(f"pump_efficiency must be in [0, 1], got {pump_efficiency}")
    if not 0 <= dark_remainder <= 1:
        raise ValueError("dark_remainder must be in [0, 1]")
    eta = pump_efficiency
    rest = 1.0 - eta
    pumped = np.zeros((4, 4), dtype=complex)
    pumped[LEVEL_INDEX["0"], LEVEL_INDEX["0"]] = eta
    pumped[LEVEL_INDEX["1"], LEVEL_INDEX["1"]] = rest * (1.0 - dark_remainder)
    u = qubit_rotation(np.pi, 0.0)
    single = u @ pumped @ u.conj().T
    # unrotated F=3 proxy weight lands in the dark manifold
    single[LEVEL_INDEX["1"], LEVEL_INDEX["1"]] += rest * dark_remainder
    return TwoAtomRegister(np.kron(single, single))


@dataclass(frozen=True)
class TrapParams:
    """Gaussian-beam tweezer and atom-cloud parameters.

    The 1 mK depth is an assumption; it is not a measured value.
    """

    waist: float = 1.29  # um
    depth: float = 1.0  # mK
    temperature: float = 20.0  # uK
    release_time: float = 10.0  # us
    recapture_window: float = 10.0  # us
    wavelength: float = 938.0  # nm
    atom_mass: float = 132.905  # u

    def __post_init__(self):
        for name in ("waist", "depth", "wavelength", "atom_mass", "recapture_window"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.temperature < 0 or self.release_time < 0:
            raise ValueError("temperature and release_time must be non-negative")

    @property
    def rayleigh_range(self) -> float:
        return np.pi * self.waist**2 / (self.wavelength * 1e-3)


@dataclass(frozen=True)
class RecaptureResult:
    probability: float
    stderr: float
    n_samples: int


BLOCK = 8192


def _recapture_block(trap: TrapParams, n: int, rng: np.random.Generator):
    # SI units throughout this block
    m = trap.atom_mass * constants.atomic_mass
    u0 = trap.depth * 1e-3 * constants.k
    w0 = trap.waist * 1e-6
    zr = trap.rayleigh_range * 1e-6
    kt = constants.k * trap.temperature * 1e-6
    t = trap.release_time * 1e-6
    omega_r = np.sqrt(4 * u0 / (m * w0**2))
    omega_z = np.sqrt(2 * u0 / (m * zr**2))
    sig_v = np.sqrt(kt / m)
    sig_x = np.array([sig_v / omega_r, sig_v / omega_r, sig_v / omega_z])

    x0 = rng.normal(size=(n, 3)) * sig_x
    v0 = rng.normal(size=(n, 3)) * sig_v

    def energy(x, v):
        # beam along z, gravity along -y
        wz2 = w0**2 * (1 + (x[:, 2] / zr) ** 2)
        pot = -u0 * (w0**2 / wz2) * np.exp(-2 * (x[:, 0] ** 2 + x[:, 1] ** 2) / wz2)
        return 0.5 * m * np.einsum("ij,ij->i", v, v) + pot

    g = np.array([0.0, -constants.g, 0.0])
    x1 = x0 + v0 * t + 0.5 * g * t**2
    v1 = v0 + g * t
    bound0 = energy(x0, v0) < 0
    kept = bound0 & (energy(x1, v1) < 0)
    return int(kept.sum()), int(bound0.sum())


def recapture_probability(trap: TrapParams, n_samples: int = 10_000, seed: int = 0,
                          threads=None) -> RecaptureResult:
    """Monte Carlo release-and-recapture probability with its binomial error.

    Samples are drawn from a thermal cloud in the harmonic approximation of
    the trap; only initially bound atoms enter the denominator. Sample blocks
    use independent counter-based streams, so the result is identical for any
    ``threads``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    sizes = [BLOCK] * (n_samples // BLOCK)
    if n_samples % BLOCK:
        sizes.append(n_samples % BLOCK)
    results = parallel_map(
        lambda ib: _recapture_block(trap, ib[1], stream(seed, ib[0])),
        list(enumerate(sizes)), threads,
    )
    kept = sum(k for k, _ in results)
    bound = sum(b for _, b in results)
    p = kept / bound if bound else 0.0
    return RecaptureResult(p, float(np.sqrt(p * (1 - p) / max(bound, 1))), bound)


def recapture_curve(trap: TrapParams, release_times, n_samples=10_000, seed=0, threads=None):
    """Recapture probability for each release time (same seed per point)."""
    return [
        recapture_probability(replace(trap, release_time=float(t)), n_samples, seed, threads)
        for t in release_times
    ]
