#!/usr/bin/env python3
"""Regenerate the bundled sample spectral library.

Writes simulated raw reflectance files for four surface classes in the two
ASCII layouts the ingester understands, one TOML manifest per class, and the
canonical 400-900 nm / 1 nm dataset CSVs built from those manifests.

The spectra are *simulated* from simple analytic reflectance shapes (pigment
absorption, red edge, soil brightness curves, linear mixtures for rangeland)
plus instrument noise. They are stand-ins with realistic shape and variability,
not entries of any published library.

Usage::

    python tools/make_sample_library.py            # rewrite src/specrecon/data
    python tools/make_sample_library.py --out DIR
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from specrecon.ingest import load_manifest, read_manifest, save_dataset

SEED = 20190417
SENTINEL = -1.23e34

CLASSES = {
    # name: (count, description)
    "green_vegetation": (50, "green leaves and closed canopies"),
    "bare_soil": (30, "bare soils, smoothed after ingestion"),
    "rangeland": (84, "mixed grassland, shrub, woodland, wetland and desert cover"),
    "concrete": (13, "concrete and cement surfaces"),
}


def gauss(x, c, w):
    return np.exp(-0.5 * ((x - c) / w) ** 2)


def sigmoid(x, c, w):
    return 1.0 / (1.0 + np.exp(-(x - c) / w))


def leaf(x, chl, base, nir_level, edge_nm, width=12.0):
    green = 0.05 / chl
    red = 0.035 / np.sqrt(chl)
    vis = base + green * gauss(x, 552, 28)
    vis -= (base - red) * gauss(x, 672, 18)
    vis -= 0.2 * base * gauss(x, 440, 35)
    nir = nir_level * (1 + 0.0001 * (x - 800))
    edge = sigmoid(x, edge_nm, width)
    return vis * (1 - edge) + nir * edge


LEAF_TYPES = (
    # chlorophyll scale, visible base, NIR plateau, red-edge inflection (nm)
    (1.2, 0.045, 0.50, 716.0),  # broadleaf
    (0.9, 0.055, 0.42, 708.0),  # grass
    (1.4, 0.035, 0.30, 720.0),  # conifer needles
    (0.6, 0.065, 0.45, 702.0),  # young / pale leaves
)


def green_vegetation(x, rng):
    f = rng.dirichlet([3.0, 3.0, 2.0, 1.5])
    jitter = rng.normal(0, 1.0)
    canopy = sum(fi * leaf(x, c, b, n, e + jitter) for fi, (c, b, n, e) in zip(f, LEAF_TYPES))
    f_soil = rng.uniform(0, 0.08)
    return rng.uniform(0.75, 1.25) * ((1 - f_soil) * canopy + f_soil * bare_soil(x, rng))


def soil_curve(x, r0, rise, gamma, fe_blue, fe_nir):
    """Convex brightness rise with ferric absorptions near 490 and 880 nm."""
    u = np.clip((x - 350) / 650, 0, None)
    return r0 + rise * u**gamma - fe_blue * gauss(x, 490, 40) - fe_nir * gauss(x, 880, 55)


SOIL_TYPES = (
    # base, rise, curvature, ferric depth at 490 nm, at 880 nm
    (0.05, 0.16, 0.8, 0.005, 0.01),  # dark organic
    (0.10, 0.32, 0.6, 0.02, 0.03),  # red ferric
    (0.12, 0.26, 0.9, 0.0, 0.005),  # pale calcareous
    (0.08, 0.22, 1.0, 0.01, 0.02),  # loam
    (0.14, 0.34, 0.7, 0.015, 0.01),  # sandy
    (0.20, 0.20, 0.5, 0.0, 0.0),  # saline crust
    (0.04, 0.10, 1.2, 0.01, 0.015),  # wet clay
)


def bare_soil(x, rng):
    f = rng.dirichlet([1.5] * len(SOIL_TYPES))
    # moisture darkening
    return rng.uniform(0.6, 1.2) * sum(fi * soil_curve(x, *p) for fi, p in zip(f, SOIL_TYPES))


RANGE_SOILS = (
    (0.06, 0.18, 0.8, 0.005, 0.01),
    (0.12, 0.30, 0.6, 0.015, 0.025),
    (0.09, 0.22, 1.0, 0.0, 0.005),
)


def dry_grass(x):
    u = np.clip((x - 350) / 650, 0, None)
    return 0.07 + 0.28 * u**0.85 - 0.01 * gauss(x, 680, 25)


def water(x):
    return 0.004 + 0.03 * np.exp(-np.clip(x - 400, 0, None) / 250) + 0.01 * gauss(x, 570, 60)


RANGE_COVERS = {
    # Dirichlet weights over (green canopy, dry grass, soil 1-3, water)
    "grassland": (5.0, 2.0, 1.0, 1.0, 1.0, 0.05),
    "shrub": (4.0, 2.0, 1.5, 1.5, 1.0, 0.05),
    "woodland": (6.0, 1.5, 1.0, 1.0, 1.0, 0.05),
    "wetland": (5.0, 1.5, 1.0, 1.0, 1.0, 0.6),
    "desert": (3.0, 2.5, 1.5, 1.5, 1.5, 0.05),
}


def rangeland(x, rng, cover):
    f = rng.dirichlet(np.array(RANGE_COVERS[cover]) * 20)
    parts = [green_vegetation(x, rng), dry_grass(x), *(soil_curve(x, *p) for p in RANGE_SOILS), water(x)]
    # shadowing and viewing geometry scale the whole mixture
    return rng.uniform(0.4, 1.6) * sum(fi * p for fi, p in zip(f, parts))


def concrete_constituents(x):
    u = np.clip((x - 350) / 650, 0, None)
    paste = 0.30 + 0.10 * u**0.5 - 0.02 * gauss(x, 420, 40)
    limestone = 0.38 + 0.06 * u**0.7
    granite = 0.18 + 0.10 * u**0.8 - 0.015 * gauss(x, 880, 60)
    iron_sand = 0.10 + 0.20 * u**1.2 - 0.03 * gauss(x, 500, 45) - 0.03 * gauss(x, 880, 55)
    soot = 0.05 + 0.02 * u
    return paste, limestone, granite, iron_sand, soot


def concrete(x, rng):
    f = rng.dirichlet([6.0, 2.0, 2.0, 1.0, 1.0])
    return rng.uniform(0.8, 1.2) * sum(fi * e for fi, e in zip(f, concrete_constituents(x)))


def usgs_wavelengths(rng):
    # irregular ~2 nm sampling from 350 to 1000 nm, stored in micrometres
    steps = rng.uniform(1.6, 2.6, size=400)
    wl = 350 + np.concatenate([[0.0], np.cumsum(steps)])
    wl = np.round(wl[wl <= 1000], 1)
    return np.unique(wl)


def aster_wavelengths():
    return np.arange(1000.0, 349.0, -1.0)


def write_usgs(path: Path, title: str, wl_nm, refl, rng):
    refl = refl.copy()
    # deleted channels: always at the UV end, occasionally one inside the range
    refl[:3] = SENTINEL
    if rng.uniform() < 0.3:
        refl[rng.integers(40, wl_nm.size - 40)] = SENTINEL
    lines = [f"splib-sim Record={path.stem}: {title}  AREF"]
    lines += [f"{w / 1000:12.6f} {v:14.6g}" for w, v in zip(wl_nm, refl)]
    path.write_text("\n".join(lines) + "\n")


def write_aster(path: Path, title: str, kind: str, wl_nm, refl):
    lines = [
        f"Name: {title}",
        f"Type: {kind}",
        "Measurement: Directional (0 deg) hemispherical reflectance",
        "First Column: X",
        "Second Column: Y",
        "X Units: Wavelength (micrometers)",
        "Y Units: Reflectance (percent)",
        "",
    ]
    lines += [f"{w / 1000:.4f}\t{100 * v:.4f}" for w, v in zip(wl_nm, refl)]
    path.write_text("\n".join(lines) + "\n")


def generate(out: Path) -> None:
    rng = np.random.default_rng(SEED)
    lib = out / "library"
    man_dir = out / "manifests"
    ds_dir = out / "datasets"
    for d in (man_dir, ds_dir):
        d.mkdir(parents=True, exist_ok=True)

    for name, (count, description) in CLASSES.items():
        cls_dir = lib / name
        cls_dir.mkdir(parents=True, exist_ok=True)
        for old in cls_dir.glob("*.txt"):
            old.unlink()
        records = []
        covers = list(RANGE_COVERS)
        for i in range(count):
            label = f"{name}_{i + 1:03d}"
            noise_sd = 0.0003
            if name == "bare_soil" or (name == "concrete" and i % 2 == 1):
                wl = aster_wavelengths()
                fmt = "aster"
                if name == "bare_soil":
                    noise_sd = 0.0008
            else:
                wl = usgs_wavelengths(rng)
                fmt = "usgs"
            if name == "green_vegetation":
                refl = green_vegetation(wl, rng)
            elif name == "bare_soil":
                refl = bare_soil(wl, rng)
            elif name == "rangeland":
                refl = rangeland(wl, rng, covers[i % len(covers)])
            else:
                refl = concrete(wl, rng)
            refl = np.clip(refl + rng.normal(0, noise_sd, wl.size), 0.001, None)
            path = cls_dir / f"{label}.txt"
            if fmt == "usgs":
                write_usgs(path, f"simulated {name.replace('_', ' ')} #{i + 1}", wl, refl, rng)
            else:
                kind = "Soil" if name == "bare_soil" else "Manmade"
                write_aster(path, f"simulated {name.replace('_', ' ')} #{i + 1}", kind, wl, refl)
            rec = [f'label = "{label}"', f'path = "../library/{name}/{label}.txt"']
            if name == "bare_soil":
                rec.append("smooth_window = 5")
            records.append(rec)

        manifest = [
            f'name = "{name}"',
            f'description = "{description}"',
            'provenance = "simulated by tools/make_sample_library.py (seed '
            f'{SEED}); not entries of a published spectral library"',
            "",
            "[grid]",
            "start_nm = 400.0",
            "end_nm = 900.0",
            "step_nm = 1.0",
        ]
        for rec in records:
            manifest += ["", "[[spectrum]]", *rec]
        man_path = man_dir / f"{name}.toml"
        man_path.write_text("\n".join(manifest) + "\n")
        ds = load_manifest(read_manifest(man_path))
        save_dataset(ds, ds_dir / f"{name}.csv")
        print(f"{name}: n={ds.n} d={ds.d}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "specrecon" / "data"
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args()
    generate(args.out)


if __name__ == "__main__":
    main()
