"""Bundled sample datasets, manifests and experiment protocols.

The sample spectra are simulated (see ``tools/make_sample_library.py``); they
share the class structure and sizes of a typical four-class study but are not
entries of a published spectral library.
"""

from __future__ import annotations

from pathlib import Path

from ..ingest import read_dataset
from ..spectra import SpectralDataset

DATA_DIR = Path(__file__).resolve().parent

SAMPLE_CLASSES = ("green_vegetation", "bare_soil", "rangeland", "concrete")

#: Band sets used for selected-band reconstruction, per surface class.
REFERENCE_BANDS = {
    "green_vegetation": (440, 490, 555, 670, 760, 810, 865),
    "bare_soil": (440, 490, 555, 670, 760, 865),
    "rangeland": (440, 490, 555, 670, 700, 810, 865),
    "concrete": (400, 440, 490, 555, 670, 865),
}

#: Reference bands of the linear-combination model.
LINCOMB_SOURCE_NM = (490, 555, 670, 865)


def dataset_path(name: str) -> Path:
    return DATA_DIR / "datasets" / f"{name}.csv"


def manifest_path(name: str) -> Path:
    return DATA_DIR / "manifests" / f"{name}.toml"


def protocol_path(name: str) -> Path:
    return DATA_DIR / "protocols" / f"{name}.toml"


def protocol_names() -> list[str]:
    return sorted(p.stem for p in (DATA_DIR / "protocols").glob("*.toml"))


def load_sample(name: str) -> SpectralDataset:
    """One of the bundled class datasets on the 400-900 nm, 1 nm grid."""
    if name not in SAMPLE_CLASSES:
        raise KeyError(f"unknown sample dataset {name!r}; choose from {SAMPLE_CLASSES}")
    return read_dataset(dataset_path(name), name)
