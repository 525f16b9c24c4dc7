# %% [markdown]
# # Dressed pair interaction
#
# Ground-state atoms pick up a light shift from the off-resonant Rydberg
# laser. For a pair, the doubly excited state is shifted by the dipole
# interaction, and the pair light shift differs from twice the single-atom
# one. That difference is J.

# %%
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from rydress.dressing import (LaserDrive, dressed_ground_amplitude, j_finite_blockade,
                              j_perfect_blockade, j_vs_r, single_atom_light_shift)
from rydress.pairpotential import ForsterTwoChannel, VanDerWaals, blockade_radius, u_dd

strong, weak = LaserDrive(4.3, 1.3), LaserDrive(4.4, 4.0)
for d in (strong, weak):
    p0 = dressed_ground_amplitude(d)[0] ** 2
    print(f"rabi {d.rabi_freq} det {d.detuning}: shift {single_atom_light_shift(d):.4f} MHz, "
          f"P(ground) {p0:.3f}, J plateau {j_perfect_blockade(d):.4f} MHz")

# %% [markdown]
# With a finite interaction J interpolates between zero and the plateau.

# %%
for u in (-1.0, -10.0, -100.0, -1e4):
    print(f"U = {u:>8g} MHz  J = {j_finite_blockade(strong, u):.4f} MHz")

# %% [markdown]
# J versus separation. The van der Waals tail and a Förster crossover model
# give the same plateau, and both fall off beyond the blockade radius.

# %%
r = np.linspace(1.5, 10, 86)
vdw, forster = VanDerWaals(1e5), ForsterTwoChannel(3e3, 100.0)
fig, ax = plt.subplots()
for d, ls in ((weak, "-"), (strong, "--")):
    ax.plot(r, j_vs_r(d, vdw, r).j, ls, label=f"vdW, det {d.detuning}")
    ax.plot(r, j_vs_r(d, forster, r).j, ls, alpha=0.5, label=f"Förster, det {d.detuning}")
    print(f"det {d.detuning}: blockade radius {blockade_radius(vdw, d):.2f} um")
ax.set_xlabel("R (um)")
ax.set_ylabel("J (MHz)")
ax.legend()
fig.savefig("dressed_interaction.png", dpi=120)
print("U_dd(2.9 um) =", u_dd(vdw, 2.9), "MHz")
