# %% [markdown]
# # Blockaded Rabi oscillations
#
# Starting from |1,1> with the dressing on, the microwave couples to the
# symmetric single-flip state only. The collective Rabi frequency is sqrt2
# times the single-atom one and |0,0> stays nearly empty.

# %%
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rydress.dressing import LaserDrive
from rydress.dynamics import dressed_rabi_frequency, fit_rabi_frequency, simulate_blockaded_rabi
from rydress.pairpotential import VanDerWaals, u_dd

drive = LaserDrive(4.3, 1.1)
u = u_dd(VanDerWaals(1e5), 2.9)
mw = 0.17678
t = np.linspace(0, 12, 241)
two = simulate_blockaded_rabi(drive, u, mw, 0.0, t)
free = simulate_blockaded_rabi(drive, 0.0, mw, 0.0, t)
p1 = free.trajectory.populations.reshape(-1, 4, 4)[:, 0, :].sum(axis=1)

# %%
f2, f1 = fit_rabi_frequency(t, two.p11), fit_rabi_frequency(t, p1)
print(f"dressed single-atom Rabi {dressed_rabi_frequency(drive, mw):.4f} MHz, fitted {f1:.4f}")
print(f"two-atom {f2:.4f} MHz, ratio {f2 / f1:.4f} (sqrt2 = {np.sqrt(2):.4f})")
print(f"max P(0,0) = {two.p00.max():.4f}")

fig, ax = plt.subplots()
ax.plot(t, two.p11, label="P(1,1)")
ax.plot(t, two.p_single, label="one flipped")
ax.plot(t, two.p00, label="P(0,0)")
ax.plot(t, p1, "k:", label="single atom in |1>")
ax.set_xlabel("t (us)")
ax.legend()
fig.savefig("blockaded_rabi.png", dpi=120)

# %% [markdown]
# Rydberg decay damps the oscillation.

# %%
for gamma in (0.0, 0.05, 0.1, 0.2):
    r = simulate_blockaded_rabi(drive, u, mw, gamma, t)
    print(f"gamma {gamma}: min P(1,1) {r.p11.min():.3f}, bare qubit population at 12 us "
          f"{r.trajectory.populations[-1, [0, 1, 4, 5]].sum():.3f}")
