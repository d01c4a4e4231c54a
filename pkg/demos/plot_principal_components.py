"""
Principal components of reflectance spectra
===========================================

A handful of principal components carries nearly all the variance of a
surface class. The cumulative contribution rate tells how many are needed.
"""

import tempfile
from pathlib import Path

import numpy as np

from specrecon import fit
from specrecon.data import SAMPLE_CLASSES, load_sample

for name in SAMPLE_CLASSES:
    model = fit(load_sample(name), n_components=6)
    v = model.contribution
    print(f"{name:17s}", " ".join(f"{x:.5f}" for x in v))

# components are orthonormal and sign-normalised: the largest entry of each
# column is positive, so repeated fits give identical vectors
model = fit(load_sample("green_vegetation"))
P = model.components[:, :6]
print("max |PᵀP - I| =", np.abs(P.T @ P - np.eye(6)).max())

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for i in range(3):
        ax.plot(model.grid.wavelengths, P[:, i], label=f"PC{i + 1}")
    ax.legend()
    ax.set_xlabel("wavelength (nm)")
    out = Path(tempfile.mkdtemp()) / "principal_components.png"
    fig.savefig(out, dpi=100)
    print("figure:", out)
