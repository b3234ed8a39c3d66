"""Plot the output of `fano general examples/fig5.toml -o fig5.csv`."""

import sys

import matplotlib.pyplot as plt
import pandas as pd

path = sys.argv[1] if len(sys.argv) > 1 else "fig5.csv"
df = pd.read_csv(path, comment="#")
fig, ax = plt.subplots(figsize=(6, 3.5))
for col in [c for c in df.columns if c.startswith("continuum_") and c != "continuum_total"]:
    ax.plot(df["omega_L"], df[col], label=col)
ax.plot(df["omega_L"], df["continuum_total"], "k", label="total")
ax.set_xlabel(r"$\omega_L$ ($n\pi V^2$)")
ax.set_ylabel("continuum population")
ax.legend()
fig.tight_layout()
fig.savefig(path.replace(".csv", ".png"), dpi=150)
