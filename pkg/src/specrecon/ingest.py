"""Reading spectral-library files and the canonical dataset CSV.

Raw library spectra (USGS / ASTER style two-column ASCII) are import-only.
Everything downstream works on the canonical wide CSV::

    wavelength_nm,<label1>,<label2>,...
    400.0,0.0412,0.0398,...

A dataset manifest (TOML) names the grid and lists the raw files that make up
one surface class; ``load_manifest`` turns it into a :class:`SpectralDataset`.
"""

from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
import tomli

from .errors import ConfigError, DataError
from .spectra import DEFAULT_GRID, SpectralDataset, Spectrum, WavelengthGrid, resample, smooth

WavelengthUnit = Literal["auto", "nm", "um"]

# max wavelength below this is taken to be micrometres
MICRON_THRESHOLD = 20.0
_PERCENT_HEADER = re.compile(r"units?\b.*percent", re.IGNORECASE)
_SPLIT = re.compile(r"[,\s;]+")


def _decode(text: bytes | str) -> str:
    if isinstance(text, bytes):
        return text.decode("utf-8-sig", errors="replace")
    return text


def parse_two_column(
    text: bytes | str, wavelength_unit: WavelengthUnit = "auto"
) -> list[tuple[float, float]]:
    """Parse a two-column ``wavelength reflectance`` listing.

    Header and comment lines (starting with ``#``, ``!`` or a letter) are
    skipped. A header declaring percent units (``units=percent`` or the ASTER
    ``Y Units: Reflectance (percent)``) rescales values to fractions.
    Micrometre wavelengths are converted to nm. Negative values are
    deleted-channel sentinels and are dropped.

    Rows are returned in file order.
    """
    percent = False
    rows: list[tuple[float, float]] = []
    for lineno, raw in enumerate(_decode(text).splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0] in "#!" or line[0].isalpha():
            if _PERCENT_HEADER.search(line):
                percent = True
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) != 2:
            raise DataError(f"line {lineno}: expected 2 numeric fields, found {len(fields)}")
        try:
            wl, value = float(fields[0]), float(fields[1])
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric field in {line!r}") from None
        rows.append((wl, value))

    rows = [(wl, v) for wl, v in rows if v >= 0]
    if not rows:
        raise DataError("no parseable data rows")

    if wavelength_unit == "auto":
        wavelength_unit = "um" if max(wl for wl, _ in rows) < MICRON_THRESHOLD else "nm"
    elif wavelength_unit not in ("nm", "um"):
        raise ConfigError(f"unknown wavelength unit {wavelength_unit!r}")
    wl_scale = 1000.0 if wavelength_unit == "um" else 1.0
    v_scale = 100.0 if percent else 1.0
    return [(wl * wl_scale, v / v_scale) for wl, v in rows]


def parse_dataset_csv(text: bytes | str, name: str = "") -> SpectralDataset:
    """Parse the canonical wide CSV into a dataset."""
    reader = csv.reader(io.StringIO(_decode(text)))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty dataset CSV") from None
    header = [h.strip() for h in header]
    if not header or header[0] != "wavelength_nm":
        raise DataError("first CSV column must be 'wavelength_nm'")
    labels = header[1:]
    if not labels:
        raise DataError("dataset CSV has no sample columns")
    if len(set(labels)) != len(labels):
        dup = sorted({lab for lab in labels if labels.count(lab) > 1})
        raise DataError(f"duplicate sample labels: {', '.join(dup)}")

    wavelengths: list[float] = []
    columns: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"line {lineno}: {len(row)} fields, header has {len(header)}")
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise DataError(f"line {lineno}: non-numeric field") from None
        wavelengths.append(nums[0])
        columns.append(nums[1:])
    if len(wavelengths) < 2:
        raise DataError("dataset CSV needs at least two wavelength rows")
    grid = WavelengthGrid.from_wavelengths(wavelengths)
    matrix = np.asarray(columns, dtype=float).T
    return SpectralDataset.from_matrix(name, grid, matrix, labels)


def write_dataset_csv(ds: SpectralDataset) -> str:
    """Serialise a dataset to canonical CSV text (shortest round-trip float repr)."""
    out = io.StringIO()
    out.write(",".join(["wavelength_nm", *ds.labels]) + "\n")
    matrix = ds.matrix
    for j, wl in enumerate(ds.grid.wavelengths):
        out.write(",".join([repr(float(wl)), *(repr(float(v)) for v in matrix[:, j])]) + "\n")
    return out.getvalue()


def read_dataset(path: str | Path, name: str | None = None) -> SpectralDataset:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    try:
        return parse_dataset_csv(text, name if name is not None else path.stem)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def save_dataset(ds: SpectralDataset, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(write_dataset_csv(ds), encoding="utf-8", newline="")


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    label: str
    smooth_window: int | None = None
    wavelength_unit: WavelengthUnit = "auto"


@dataclass(frozen=True)
class DatasetManifest:
    """One surface-class dataset: grid definition plus ordered source spectra."""

    name: str
    grid: WavelengthGrid
    entries: tuple[ManifestEntry, ...]
    description: str = ""
    provenance: str = ""
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self) -> None:
        labels = [e.label for e in self.entries]
        if not labels:
            raise ConfigError(f"manifest {self.name!r} lists no spectra")
        if len(set(labels)) != len(labels):
            dup = sorted({lab for lab in labels if labels.count(lab) > 1})
            raise ConfigError(f"manifest {self.name!r}: duplicate labels {', '.join(dup)}")

    def resolve(self, entry: ManifestEntry) -> Path:
        return entry.path if entry.path.is_absolute() else self.base_dir / entry.path


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"{where}: missing field '{key}'")
    return table[key]


def parse_manifest(text: str, base_dir: str | Path = ".") -> DatasetManifest:
    """Build a manifest from TOML text; relative source paths resolve against ``base_dir``."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"manifest is not valid TOML: {exc}") from None
    name = str(_require(doc, "name", "manifest"))
    g = doc.get("grid", {})
    grid = WavelengthGrid(
        g.get("start_nm", DEFAULT_GRID.start_nm),
        g.get("end_nm", DEFAULT_GRID.end_nm),
        g.get("step_nm", DEFAULT_GRID.step_nm),
    )
    defaults = doc.get("defaults", {})
    entries = []
    for i, rec in enumerate(doc.get("spectrum", []), start=1):
        where = f"manifest {name!r} spectrum #{i}"
        window = rec.get("smooth_window", defaults.get("smooth_window"))
        unit = rec.get("wavelength_unit", defaults.get("wavelength_unit", "auto"))
        if unit not in ("auto", "nm", "um"):
            raise ConfigError(f"{where}: wavelength_unit must be auto, nm or um")
        entries.append(
            ManifestEntry(
                path=Path(str(_require(rec, "path", where))),
                label=str(_require(rec, "label", where)),
                smooth_window=None if window is None else int(window),
                wavelength_unit=unit,
            )
        )
    return DatasetManifest(
        name=name,
        grid=grid,
        entries=tuple(entries),
        description=str(doc.get("description", "")),
        provenance=str(doc.get("provenance", "")),
        base_dir=Path(base_dir),
    )


def read_manifest(path: str | Path) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from None
    return parse_manifest(text, path.parent)


def _load_entry(manifest: DatasetManifest, entry: ManifestEntry) -> Spectrum:
    src = manifest.resolve(entry)
    try:
        raw = src.read_bytes()
    except OSError as exc:
        raise DataError(f"{src}: {exc.strerror or exc}") from None
    try:
        pairs = parse_two_column(raw, entry.wavelength_unit)
        # ASTER listings run from long to short wavelengths
        if len(pairs) > 1 and all(a[0] > b[0] for a, b in zip(pairs, pairs[1:])):
            pairs.reverse()
        spec = resample(pairs, manifest.grid, entry.label)
        if entry.smooth_window is not None:
            spec = smooth(spec, entry.smooth_window)
    except DataError as exc:
        raise DataError(f"{src}: {exc}") from None
    return spec


def load_manifest(manifest: DatasetManifest | str | Path, workers: int = 1) -> SpectralDataset:
    """Parse, normalise, resample and optionally smooth every manifest entry.

    Output order always follows manifest order.
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = read_manifest(manifest)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            spectra = list(pool.map(lambda e: _load_entry(manifest, e), manifest.entries))
    else:
        spectra = [_load_entry(manifest, e) for e in manifest.entries]
    return SpectralDataset(manifest.name, manifest.grid, tuple(spectra))
