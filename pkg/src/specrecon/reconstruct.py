"""Spectral reconstruction models.

* full-band: project a complete spectrum on the first m PCs and rebuild it;
* selected-band: estimate the m PC weights from reflectance at k chosen
  bands by a least-squares (generalized inverse) solve, then rebuild all d
  wavelengths;
* linear combination: predict reflectance at one band as a fitted weighted
  sum of reflectances at a few reference bands.

In ``centered`` mode the model mean is subtracted before solving and added
back afterwards; ``paper-literal`` mode works on raw reflectance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigError, DataError
from .pca import PcaModel
from .spectra import SpectralDataset, Spectrum, WavelengthGrid

#: Singular values below this fraction of the largest are treated as zero.
PINV_RTOL = 1e-10


def pinv_solve(A: ArrayLike, b: ArrayLike, rtol: float = PINV_RTOL) -> tuple[NDArray[np.float64], int]:
    """Minimum-norm least-squares solution of ``A x ≈ b`` via a thresholded SVD.

    Returns ``(x, effective_rank)``. At full column rank this equals
    ``(AᵀA)⁻¹Aᵀb``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(A.shape[1]), 0
    keep = s > rtol * s[0]
    rank = int(np.count_nonzero(keep))
    coef = (U[:, keep].T @ b) / s[keep]
    return Vt[keep].T @ coef, rank


@dataclass(frozen=True)
class BandSelection:
    """Ordered on-grid wavelengths used for partial-information solves."""

    wavelengths_nm: tuple[float, ...]
    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.wavelengths_nm) != len(self.indices) or not self.indices:
            raise ConfigError("band selection needs at least one band")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ConfigError("band wavelengths must be distinct and strictly increasing")

    @property
    def k(self) -> int:
        return len(self.indices)

    @classmethod
    def on_grid(cls, grid: WavelengthGrid, wavelengths_nm: Sequence[float]) -> "BandSelection":
        """Selection of exact grid nodes; off-grid wavelengths are rejected."""
        idx = tuple(grid.index_of(wl) for wl in wavelengths_nm)
        wl = tuple(float(grid.wavelengths[i]) for i in idx)
        return cls(wl, idx)

    @classmethod
    def snapped(
        cls, grid: WavelengthGrid, wavelengths_nm: Sequence[float]
    ) -> tuple["BandSelection", list[float]]:
        """Snap each wavelength to the nearest node; also returns the snap distances (nm)."""
        idx = [grid.nearest_index(wl) for wl in wavelengths_nm]
        nodes = [float(grid.wavelengths[i]) for i in idx]
        dist = [abs(n - float(w)) for n, w in zip(nodes, wavelengths_nm)]
        return cls(tuple(nodes), tuple(idx)), dist

    @classmethod
    def full(cls, grid: WavelengthGrid) -> "BandSelection":
        return cls(tuple(float(w) for w in grid.wavelengths), tuple(range(grid.count)))

    def covers(self, grid: WavelengthGrid) -> bool:
        return self.k == grid.count


@dataclass(frozen=True, eq=False)
class Weights:
    """PC weighting coefficients.

    ``effective_rank`` below ``m`` marks a rank-deficient selected-band solve
    whose weights are the minimum-norm solution.
    """

    w: NDArray[np.float64]
    effective_rank: int | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.w, dtype=float).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "w", arr)
        if arr.size < 1:
            raise ConfigError("weights must have at least one entry")

    @property
    def m(self) -> int:
        return self.w.size

    @property
    def rank_deficient(self) -> bool:
        return self.effective_rank is not None and self.effective_rank < self.m


def _check_m(model: PcaModel, m: int) -> int:
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= model.n_components:
        raise ConfigError(f"number of PCs must be in 1..{model.n_components}, got {m!r}")
    return int(m)


def _spectrum_values(model: PcaModel, r: Spectrum | ArrayLike) -> NDArray[np.float64]:
    if isinstance(r, Spectrum):
        if r.grid != model.grid:
            raise DataError(f"spectrum {r.label!r} is on {r.grid}, model uses {model.grid}")
        return r.values
    values = np.asarray(r, dtype=float)
    if values.shape != (model.d,):
        raise DataError(f"expected {model.d} values, got shape {values.shape}")
    return values


def project(model: PcaModel, r: Spectrum | ArrayLike, m: int) -> Weights:
    """Weights of ``r`` on the first ``m`` PCs (orthogonal projection)."""
    m = _check_m(model, m)
    x = _spectrum_values(model, r)
    if model.centering == "centered":
        x = x - model.mean
    return Weights(model.components[:, :m].T @ x)


def reconstruct_full(model: PcaModel, w: Weights | ArrayLike, label: str = "") -> Spectrum:
    """Rebuild a spectrum from PC weights."""
    if not isinstance(w, Weights):
        w = Weights(w)
    if w.m > model.n_components:
        raise ConfigError(f"{w.m} weights but the model has {model.n_components} components")
    values = model.components[:, : w.m] @ w.w
    if model.centering == "centered":
        values = model.mean + values
    return Spectrum(model.grid, values, label, estimate=True)


def solve_weights_from_bands(
    model: PcaModel, sel: BandSelection, rho: ArrayLike, m: int
) -> Weights:
    """Least-squares PC weights from reflectance ``rho`` at the selected bands.

    Uses the generalized inverse of the k x m row-submatrix of the PC matrix.
    Requires k >= m.
    """
    m = _check_m(model, m)
    rho = np.asarray(rho, dtype=float).reshape(-1)
    if rho.size != sel.k:
        raise DataError(f"{rho.size} band values for a {sel.k}-band selection")
    if sel.k < m:
        raise ConfigError(f"under-determined solve: {sel.k} bands for {m} PCs")
    if sel.indices[-1] >= model.d:
        raise ConfigError("band selection does not fit the model grid")
    if sel.covers(model.grid):
        # every band known: the generalized inverse of orthonormal columns is
        # their transpose, so take the projection path and stay bit-identical
        w = project(model, rho, m)
        return Weights(w.w, effective_rank=m)
    idx = np.asarray(sel.indices)
    rhs = rho - model.mean[idx] if model.centering == "centered" else rho
    w, rank = pinv_solve(model.components[idx, :m], rhs)
    return Weights(w, effective_rank=rank)


def reconstruct_from_bands(
    model: PcaModel, sel: BandSelection, rho: ArrayLike, m: int, label: str = ""
) -> Spectrum:
    return reconstruct_full(model, solve_weights_from_bands(model, sel, rho, m), label)


@dataclass(frozen=True, eq=False)
class LinCombModel:
    """Reflectance at ``target_nm`` as a weighted sum of the source bands."""

    source_bands: BandSelection
    target_nm: float
    coeffs: NDArray[np.float64]
    effective_rank: int | None = None
    dataset: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        arr = np.array(self.coeffs, dtype=float).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        if arr.size != self.source_bands.k:
            raise ConfigError(f"{arr.size} coefficients for {self.source_bands.k} source bands")
        if float(self.target_nm) in self.source_bands.wavelengths_nm:
            raise ConfigError(f"target band {self.target_nm:g} nm is also a source band")

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "source_nm": list(self.source_bands.wavelengths_nm),
            "source_indices": list(self.source_bands.indices),
            "target_nm": float(self.target_nm),
            "coeffs": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinCombModel":
        sel = BandSelection(
            tuple(float(x) for x in doc["source_nm"]), tuple(int(i) for i in doc["source_indices"])
        )
        return cls(sel, float(doc["target_nm"]), doc["coeffs"], dataset=doc.get("dataset", ""))


def fit_lincomb(ds: SpectralDataset, source: BandSelection, target_nm: float) -> LinCombModel:
    """Least-squares coefficients predicting the target band from the source bands."""
    t = ds.grid.index_of(target_nm)
    if t in source.indices:
        raise ConfigError(f"target band {target_nm:g} nm is also a source band")
    if source.indices[-1] >= ds.d:
        raise ConfigError("source bands do not fit the dataset grid")
    X = ds.matrix
    A = X[:, list(source.indices)]
    if np.any(np.all(A == 0, axis=0)):
        raise DataError("a source band is zero for every sample")
    if ds.n < source.k:
        warnings.warn(
            f"{ds.n} samples for {source.k} coefficients: fit is under-determined",
            RuntimeWarning,
            stacklevel=2,
        )
    a, rank = pinv_solve(A, X[:, t])
    return LinCombModel(source, float(ds.grid.wavelengths[t]), a, rank, dataset=ds.name)


def apply_lincomb(lc: LinCombModel, rho_sources: ArrayLike) -> float:
    rho = np.asarray(rho_sources, dtype=float).reshape(-1)
    if rho.size != lc.coeffs.size:
        raise DataError(f"{rho.size} source values for {lc.coeffs.size} coefficients")
    return float(lc.coeffs @ rho)
