"""
Predicting one band from four others
====================================

Reflectance at a missing band is often close to a weighted sum of
reflectance at a few reference bands. The weights come from a least-squares
fit over a class dataset.
"""

from specrecon import BandSelection, apply_lincomb, fit_lincomb
from specrecon.data import LINCOMB_SOURCE_NM, SAMPLE_CLASSES, load_sample
from specrecon.validate import loocv_lincomb

for name in SAMPLE_CLASSES:
    ds = load_sample(name)
    src = BandSelection.on_grid(ds.grid, LINCOMB_SOURCE_NM)
    for target in (440, 810):
        lc = fit_lincomb(ds, src, target)
        rep = loocv_lincomb(ds, src, target)
        coeffs = ", ".join(f"{a:+.4f}" for a in lc.coeffs)
        print(f"{name:17s} {target} nm  a=({coeffs})  "
              f"error {100 * rep.mean_relative_error:.2f}%  R²={rep.r2:.4f}")

# applying a fitted model needs only the four source reflectances
ds = load_sample("green_vegetation")
lc = fit_lincomb(ds, BandSelection.on_grid(ds.grid, LINCOMB_SOURCE_NM), 440)
s = ds[3]
print("predicted", round(apply_lincomb(lc, [s.at(w) for w in LINCOMB_SOURCE_NM]), 5), "true", round(s.at(440), 5))
