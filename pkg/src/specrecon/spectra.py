"""Wavelength grid, spectrum and dataset types, plus resampling and smoothing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError

#: Tolerance (nm) when deciding whether a wavelength sits on a grid node.
GRID_TOL_NM = 1e-6
REFLECTANCE_MAX = 2.0


@dataclass(frozen=True)
class WavelengthGrid:
    """Uniform wavelength grid, inclusive at both ends."""

    start_nm: float = 400.0
    end_nm: float = 900.0
    step_nm: float = 1.0

    def __post_init__(self) -> None:
        for name in ("start_nm", "end_nm", "step_nm"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DataError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.start_nm < self.end_nm:
            raise DataError(f"grid start {self.start_nm} must be below end {self.end_nm}")
        if not self.step_nm > 0:
            raise DataError(f"grid step must be positive, got {self.step_nm}")
        span = (self.end_nm - self.start_nm) / self.step_nm
        if abs(span - round(span)) > 1e-9 * max(1.0, span):
            raise DataError(
                f"grid {self.start_nm}-{self.end_nm} nm is not a whole number of {self.step_nm} nm steps"
            )

    @property
    def count(self) -> int:
        return int(round((self.end_nm - self.start_nm) / self.step_nm)) + 1

    @property
    def wavelengths(self) -> NDArray[np.float64]:
        return self.start_nm + self.step_nm * np.arange(self.count, dtype=float)

    def index_of(self, wavelength_nm: float) -> int:
        """Grid index of an on-grid wavelength; raises if it falls between nodes."""
        pos = (float(wavelength_nm) - self.start_nm) / self.step_nm
        idx = int(round(pos))
        if abs(pos - idx) * self.step_nm > GRID_TOL_NM or not 0 <= idx < self.count:
            raise DataError(f"{wavelength_nm} nm is not a node of the {self}")
        return idx

    def nearest_index(self, wavelength_nm: float) -> int:
        pos = (float(wavelength_nm) - self.start_nm) / self.step_nm
        return int(min(max(round(pos), 0), self.count - 1))

    @classmethod
    def from_wavelengths(cls, wavelengths: ArrayLike) -> "WavelengthGrid":
        """Infer a grid from explicit node positions, which must be uniformly spaced."""
        wl = np.asarray(wavelengths, dtype=float)
        if wl.ndim != 1 or wl.size < 2:
            raise DataError("need at least two wavelengths to define a grid")
        steps = np.diff(wl)
        step = (wl[-1] - wl[0]) / (wl.size - 1)
        if step <= 0 or np.any(steps <= 0):
            raise DataError("wavelengths must be strictly increasing")
        if np.max(np.abs(steps - step)) > 1e-6 * step:
            raise DataError("wavelength spacing is not uniform")
        grid = cls(float(wl[0]), float(wl[-1]), float(step))
        if grid.count != wl.size:
            raise DataError("wavelength column does not match a uniform grid")
        return grid

    def __str__(self) -> str:
        return f"grid {self.start_nm:g}-{self.end_nm:g} nm step {self.step_nm:g} nm"


DEFAULT_GRID = WavelengthGrid(400.0, 900.0, 1.0)


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Reflectance on a wavelength grid.

    Measured spectra must lie in ``[0, 2)``. Reconstructions are flagged with
    ``estimate=True`` and are only required to be finite, since a truncated
    PC expansion can dip slightly below zero.
    """

    grid: WavelengthGrid
    values: NDArray[np.float64]
    label: str = ""
    estimate: bool = field(default=False, kw_only=True)

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.count,):
            raise DataError(
                f"spectrum {self.label!r} has {values.size} values, grid expects {self.grid.count}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError(f"spectrum {self.label!r} contains non-finite values")
        if not self.estimate and (values.min() < 0 or values.max() >= REFLECTANCE_MAX):
            raise DataError(
                f"spectrum {self.label!r} has reflectance outside [0, {REFLECTANCE_MAX}): "
                f"min {values.min():.6g}, max {values.max():.6g}"
            )

    @property
    def wavelengths(self) -> NDArray[np.float64]:
        return self.grid.wavelengths

    def at(self, wavelength_nm: float) -> float:
        return float(self.values[self.grid.index_of(wavelength_nm)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.label == other.label
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class SpectralDataset:
    """Named collection of spectra of one surface class on a shared grid."""

    name: str
    grid: WavelengthGrid
    spectra: tuple[Spectrum, ...]

    def __post_init__(self) -> None:
        spectra = tuple(self.spectra)
        object.__setattr__(self, "spectra", spectra)
        if not spectra:
            raise DataError(f"dataset {self.name!r} is empty")
        for s in spectra:
            if s.grid != self.grid:
                raise DataError(f"spectrum {s.label!r} is not on the dataset {self.grid}")
        labels = [s.label for s in spectra]
        if len(set(labels)) != len(labels):
            raise DataError(f"dataset {self.name!r} has duplicate sample labels")
        matrix = np.vstack([s.values for s in spectra])
        matrix.setflags(write=False)
        object.__setattr__(self, "_matrix", matrix)

    @property
    def matrix(self) -> NDArray[np.float64]:
        """Samples as rows, wavelengths as columns (n x d)."""
        return self._matrix  # type: ignore[attr-defined]

    @property
    def n(self) -> int:
        return len(self.spectra)

    @property
    def d(self) -> int:
        return self.grid.count

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.spectra]

    def __len__(self) -> int:
        return len(self.spectra)

    def __iter__(self):
        return iter(self.spectra)

    def __getitem__(self, i: int) -> Spectrum:
        return self.spectra[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpectralDataset):
            return NotImplemented
        return (
            self.name == other.name
            and self.grid == other.grid
            and self.labels == other.labels
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None  # type: ignore[assignment]

    def without(self, index: int) -> "SpectralDataset":
        """Copy of the dataset with one sample removed (for leave-one-out)."""
        kept = self.spectra[:index] + self.spectra[index + 1 :]
        return SpectralDataset(self.name, self.grid, kept)

    @classmethod
    def from_matrix(
        cls,
        name: str,
        grid: WavelengthGrid,
        matrix: ArrayLike,
        labels: Sequence[str] | None = None,
    ) -> "SpectralDataset":
        rows = np.atleast_2d(np.asarray(matrix, dtype=float))
        if labels is None:
            labels = [f"s{i:03d}" for i in range(rows.shape[0])]
        if len(labels) != rows.shape[0]:
            raise DataError("label count does not match number of rows")
        return cls(name, grid, tuple(Spectrum(grid, r, str(lab)) for r, lab in zip(rows, labels)))


def resample(
    raw_pairs: Iterable[tuple[float, float]] | ArrayLike,
    target: WavelengthGrid = DEFAULT_GRID,
    label: str = "",
) -> Spectrum:
    """Linearly interpolate raw ``(wavelength_nm, reflectance)`` pairs onto ``target``.

    Raw wavelengths must be strictly ascending and cover the whole grid;
    no extrapolation is performed.
    """
    if not isinstance(raw_pairs, np.ndarray):
        raw_pairs = list(raw_pairs)
    pairs = np.asarray(raw_pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 2:
        raise DataError(f"{label or 'spectrum'}: need at least two (wavelength, value) pairs")
    wl, refl = pairs[:, 0], pairs[:, 1]
    if np.any(np.diff(wl) <= 0):
        bad = int(np.argmax(np.diff(wl) <= 0))
        raise DataError(
            f"{label or 'spectrum'}: wavelengths not strictly ascending at {wl[bad]:g} -> {wl[bad + 1]:g} nm"
        )
    lo, hi = wl[0], wl[-1]
    if lo > target.start_nm + GRID_TOL_NM:
        raise DataError(
            f"{label or 'spectrum'}: no coverage on [{target.start_nm:g}, {lo:g}) nm"
        )
    if hi < target.end_nm - GRID_TOL_NM:
        raise DataError(
            f"{label or 'spectrum'}: no coverage on ({hi:g}, {target.end_nm:g}] nm"
        )
    values = np.interp(target.wavelengths, wl, refl)
    return Spectrum(target, values, label)


def smooth(s: Spectrum, window: int = 5) -> Spectrum:
    """Centered boxcar moving average, truncated where it meets the grid edges."""
    if isinstance(window, bool) or int(window) != window or window < 1 or window % 2 == 0:
        raise DataError(f"smoothing window must be a positive odd integer, got {window!r}")
    window = int(window)
    d = s.grid.count
    if window > d:
        raise DataError(f"smoothing window {window} exceeds grid size {d}")
    if window == 1:
        return s
    half = window // 2
    v = s.values
    out = np.empty(d)
    for i in range(d):
        seg = v[max(0, i - half) : min(d, i + half + 1)]
        # clip guards the bound property against summation rounding
        out[i] = min(max(math.fsum(seg) / seg.size, seg.min()), seg.max())
    return Spectrum(s.grid, out, s.label, estimate=s.estimate)
