# %% [markdown]
# # Rydberg lifetime and release-recapture
#
# A resonant pi pulse, a wait, and a second pi pulse return the surviving
# Rydberg population to the ground state; the return probability decays
# with the Rydberg lifetime. Separately, thermal atoms released from the
# trap escape over time, which limits how long the trap can stay off.

# %%
import numpy as np

from rydress.dressing import LaserDrive
from rydress.dynamics import fit_lifetime, simulate_lifetime
from rydress.measurement import TrapParams, recapture_curve

for tau in (10.0, 40.0, 150.0):
    delays = np.linspace(0, 3 * tau, 31)
    fit = fit_lifetime(delays, simulate_lifetime(LaserDrive(4.3, 0.0), 1 / tau, delays))
    print(f"tau {tau:6.1f} us -> fitted {fit.tau:.3f} us")

# %%
trap = TrapParams(waist=1.29, depth=1.0, temperature=20.0)
times = [0, 5, 10, 20, 40]
for t, r in zip(times, recapture_curve(trap, times, 20_000, seed=1, threads=4)):
    print(f"release {t:3d} us: recaptured {r.probability:.4f} +- {r.stderr:.4f}")
