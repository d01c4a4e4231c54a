"""
Building a dataset from raw library files
=========================================

Raw reflectance listings come in different layouts and units. A manifest
lists the files of one surface class; ingestion resamples every listing to
the 400-900 nm, 1 nm grid and stacks them into one dataset.
"""

import tempfile
from pathlib import Path

import numpy as np

from specrecon import load_manifest, parse_two_column, read_manifest, save_dataset
from specrecon.data import manifest_path

# the bare-soil manifest points at listings in micrometres and percent,
# ordered from long to short wavelength, and asks for 5-point smoothing
manifest = read_manifest(manifest_path("bare_soil"))
print(manifest.name, "-", len(manifest.entries), "files")
first = manifest.entries[0]
print(first.path.name, "smooth window:", first.smooth_window)

# a single listing parses to (wavelength nm, reflectance 0-1) pairs
pairs = np.array(parse_two_column((manifest.base_dir / first.path).read_text()))
print("raw points:", len(pairs), "range", pairs[:, 0].min(), "-", pairs[:, 0].max(), "nm")

ds = load_manifest(manifest, workers=4)
print(ds.name, ds.matrix.shape)

# the canonical CSV round-trips exactly
out = Path(tempfile.mkdtemp()) / "bare_soil.csv"
save_dataset(ds, out)
print("wrote", out)

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    ax.plot(ds.grid.wavelengths, ds.matrix[:10].T, lw=0.8)
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("reflectance")
    fig.savefig(out.with_suffix(".png"), dpi=100)
    print("figure:", out.with_suffix(".png"))
else:
    print("mean reflectance at 550 nm:", np.round(ds.matrix[:, 150].mean(), 4))
