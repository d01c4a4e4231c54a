"""
Full spectra from a few bands
=============================

Knowing reflectance at only six or seven wavelengths is enough to estimate
six component weights by least squares, and from them the whole spectrum.
"""

import numpy as np

from specrecon import BandSelection, fit, mean_relative_error, reconstruct_from_bands
from specrecon.data import REFERENCE_BANDS, SAMPLE_CLASSES, load_sample
from specrecon.validate import loocv_bands

ds = load_sample("green_vegetation")
model = fit(ds.without(0), n_components=6)
sel = BandSelection.on_grid(ds.grid, REFERENCE_BANDS["green_vegetation"])
rho = ds[0].values[list(sel.indices)]
estimate = reconstruct_from_bands(model, sel, rho, 6)
print("bands:", sel.wavelengths_nm)
print("held-out spectrum error:", f"{mean_relative_error(ds[0], estimate):.4f}")

# fewer bands than components is under-determined and rejected
try:
    reconstruct_from_bands(model, BandSelection.on_grid(ds.grid, [490, 670]), [0.05, 0.04], 6)
except ValueError as exc:
    print("rejected:", exc)

for name in SAMPLE_CLASSES:
    d = load_sample(name)
    rep = loocv_bands(d, BandSelection.on_grid(d.grid, REFERENCE_BANDS[name]), 6)
    worst = np.argmax(rep.per_sample_relative)
    print(f"{name:17s} {100 * rep.mean_relative_error:.2f}%  R²={rep.r2:.4f}  "
          f"worst {rep.labels[worst]} {100 * rep.per_sample_relative[worst]:.2f}%")
