"""Error metrics and leave-one-out cross validation for the reconstruction models."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigError, DataError
from .pca import Centering, PcaModel, fit
from .reconstruct import (
    BandSelection,
    apply_lincomb,
    fit_lincomb,
    project,
    reconstruct_from_bands,
    reconstruct_full,
)
from .spectra import SpectralDataset, Spectrum

#: Truth reflectance below this is left out of relative errors.
RELATIVE_ERROR_FLOOR = 1e-6


def _relative_terms(truth: NDArray, recon: NDArray) -> tuple[NDArray, int]:
    keep = truth >= RELATIVE_ERROR_FLOOR
    return np.abs(recon[keep] - truth[keep]) / truth[keep], int(truth.size - keep.sum())


def relative_error_stats(truth: ArrayLike, recon: ArrayLike) -> tuple[float, int]:
    """Mean of |recon - truth| / truth and the number of excluded points."""
    t = np.asarray(truth, dtype=float).reshape(-1)
    r = np.asarray(recon, dtype=float).reshape(-1)
    if t.shape != r.shape:
        raise DataError(f"length mismatch: {t.size} true vs {r.size} reconstructed values")
    terms, excluded = _relative_terms(t, r)
    if terms.size == 0:
        raise DataError(
            f"every true value is below the {RELATIVE_ERROR_FLOOR:g} floor; relative error undefined"
        )
    return float(np.mean(terms)), excluded


def mean_relative_error(truth: Spectrum | ArrayLike, recon: Spectrum | ArrayLike) -> float:
    """Average over wavelengths of the relative reconstruction error.

    Wavelengths whose true reflectance is below 1e-6 are skipped.
    """
    if isinstance(truth, Spectrum) and isinstance(recon, Spectrum) and truth.grid != recon.grid:
        raise DataError("spectra are on different grids")
    t = truth.values if isinstance(truth, Spectrum) else truth
    r = recon.values if isinstance(recon, Spectrum) else recon
    return relative_error_stats(t, r)[0]


def r_squared(truth_values: ArrayLike, recon_values: ArrayLike) -> float:
    """Squared Pearson correlation between true and reconstructed values."""
    t = np.asarray(truth_values, dtype=float).reshape(-1)
    r = np.asarray(recon_values, dtype=float).reshape(-1)
    if t.size != r.size:
        raise DataError(f"length mismatch: {t.size} vs {r.size}")
    if t.size < 2:
        raise DataError("R² needs at least two values")
    tc = t - t.mean()
    rc = r - r.mean()
    stt = float(tc @ tc)
    srr = float(rc @ rc)
    if stt == 0:
        raise DataError("true values have zero variance; R² undefined")
    if srr == 0:
        return 0.0
    r2 = float(tc @ rc) ** 2 / (stt * srr)
    return min(max(r2, 0.0), 1.0)


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    """Per-sample and pooled scores of one reconstruction protocol.

    ``truth``/``recon`` are (n, L) arrays: L = d for the spectral modes and
    L = 1 for the linear-combination mode. Residuals follow ``truth - recon``.
    """

    protocol: dict[str, Any]
    labels: tuple[str, ...]
    wavelengths: NDArray[np.float64]
    truth: NDArray[np.float64]
    recon: NDArray[np.float64]
    per_sample_relative: NDArray[np.float64]
    per_sample_absolute: NDArray[np.float64]
    per_sample_norm_ratio: NDArray[np.float64]
    per_sample_r2: NDArray[np.float64]
    excluded: NDArray[np.int64]
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def residuals(self) -> NDArray[np.float64]:
        return self.truth - self.recon

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def mean_relative_error(self) -> float:
        """Mean over samples of the per-sample mean relative error."""
        return float(np.nanmean(self.per_sample_relative))

    @property
    def mean_absolute_error(self) -> float:
        return float(np.mean(self.per_sample_absolute))

    @property
    def mean_norm_ratio(self) -> float:
        return float(np.nanmean(self.per_sample_norm_ratio))

    @property
    def r2(self) -> float:
        """Pooled R² over every (true, reconstructed) pair."""
        return r_squared(self.truth, self.recon)

    @property
    def n_excluded(self) -> int:
        return int(self.excluded.sum())

    def summary(self) -> dict[str, Any]:
        return {
            **self.protocol,
            "n_samples": self.n,
            "mean_relative_error": self.mean_relative_error,
            "mean_absolute_error": self.mean_absolute_error,
            "mean_norm_ratio": self.mean_norm_ratio,
            "r2_pooled": self.r2,
            "excluded_points": self.n_excluded,
            **self.extras,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ReconstructionReport):
            return NotImplemented
        arrays = (
            "wavelengths", "truth", "recon", "per_sample_relative", "per_sample_absolute",
            "per_sample_norm_ratio", "per_sample_r2", "excluded",
        )
        return (
            self.protocol == other.protocol
            and self.labels == other.labels
            and all(np.array_equal(getattr(self, a), getattr(other, a), equal_nan=True) for a in arrays)
        )

    __hash__ = None  # type: ignore[assignment]


def build_report(
    protocol: dict[str, Any],
    labels: Sequence[str],
    wavelengths: ArrayLike,
    truth: ArrayLike,
    recon: ArrayLike,
    extras: dict[str, Any] | None = None,
) -> ReconstructionReport:
    truth = np.atleast_2d(np.asarray(truth, dtype=float))
    recon = np.atleast_2d(np.asarray(recon, dtype=float))
    if truth.shape != recon.shape:
        raise DataError(f"shape mismatch {truth.shape} vs {recon.shape}")
    n, L = truth.shape
    rel = np.full(n, np.nan)
    absolute = np.empty(n)
    ratio = np.full(n, np.nan)
    r2 = np.full(n, np.nan)
    excluded = np.zeros(n, dtype=np.int64)
    for i in range(n):
        t, r = truth[i], recon[i]
        terms, excluded[i] = _relative_terms(t, r)
        if terms.size:
            rel[i] = np.mean(terms)
        elif L > 1:
            raise DataError(f"sample {labels[i]!r}: every true value is below the relative-error floor")
        absolute[i] = np.mean(np.abs(r - t))
        norm_t = np.linalg.norm(t)
        if norm_t > 0:
            ratio[i] = np.linalg.norm(t - r) / norm_t
        if L > 1 and np.ptp(t) > 0:
            r2[i] = r_squared(t, r)
    if np.all(np.isnan(rel)):
        raise DataError("every true value is below the relative-error floor")
    return ReconstructionReport(
        protocol=dict(protocol),
        labels=tuple(labels),
        wavelengths=np.asarray(wavelengths, dtype=float).reshape(-1),
        truth=truth,
        recon=recon,
        per_sample_relative=rel,
        per_sample_absolute=absolute,
        per_sample_norm_ratio=ratio,
        per_sample_r2=r2,
        excluded=excluded,
        extras=dict(extras or {}),
    )


def _run_holdouts(n: int, one: Callable[[int], NDArray], workers: int) -> list[NDArray]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(n)))
    return [one(i) for i in range(n)]


def _check_loocv(ds: SpectralDataset, m: int) -> None:
    if ds.n < 3:
        raise DataError(f"leave-one-out needs at least 3 spectra, dataset {ds.name!r} has {ds.n}")
    if isinstance(m, bool) or int(m) != m or not 1 <= m <= ds.d:
        raise ConfigError(f"number of PCs must be in 1..{ds.d}, got {m!r}")


def holdout_model(ds: SpectralDataset, i: int, m: int, centering: Centering) -> PcaModel:
    """PCA fitted without sample ``i``, keeping only the first ``m`` components."""
    return fit(ds.without(i), centering, n_components=m)


def loocv_full(
    ds: SpectralDataset, m: int, centering: Centering = "centered", workers: int = 1
) -> ReconstructionReport:
    """Leave-one-out score of full-band reconstruction with ``m`` PCs."""
    _check_loocv(ds, m)

    def one(i: int) -> NDArray:
        model = holdout_model(ds, i, m, centering)
        return reconstruct_full(model, project(model, ds[i], m)).values

    recon = _run_holdouts(ds.n, one, workers)
    protocol = {"mode": "full", "dataset": ds.name, "m": int(m), "centering": centering}
    return build_report(protocol, ds.labels, ds.grid.wavelengths, ds.matrix, recon)


def loocv_bands(
    ds: SpectralDataset,
    sel: BandSelection,
    m: int,
    centering: Centering = "centered",
    workers: int = 1,
) -> ReconstructionReport:
    """Leave-one-out score of reconstruction from the holdout's selected-band values."""
    _check_loocv(ds, m)
    if sel.k < m:
        raise ConfigError(f"under-determined protocol: {sel.k} bands for {m} PCs")
    idx = list(sel.indices)

    def one(i: int) -> NDArray:
        model = holdout_model(ds, i, m, centering)
        return reconstruct_from_bands(model, sel, ds[i].values[idx], m).values

    recon = _run_holdouts(ds.n, one, workers)
    if sel.covers(ds.grid):
        # same computation as the full-band protocol, so report it identically
        protocol = {"mode": "full", "dataset": ds.name, "m": int(m), "centering": centering}
    else:
        protocol = {
            "mode": "bands",
            "dataset": ds.name,
            "m": int(m),
            "centering": centering,
            "bands_nm": list(sel.wavelengths_nm),
        }
    return build_report(protocol, ds.labels, ds.grid.wavelengths, ds.matrix, recon)


def loocv_lincomb(
    ds: SpectralDataset, source: BandSelection, target_nm: float, workers: int = 1
) -> ReconstructionReport:
    """Leave-one-out score of the linear-combination predictor for one target band.

    ``extras['coeffs_full_fit']`` holds the coefficients fitted on the whole
    dataset, for tabulation next to the cross-validated errors.
    """
    if ds.n < source.k + 1:
        raise DataError(f"leave-one-out needs at least {source.k + 1} spectra, got {ds.n}")
    t = ds.grid.index_of(target_nm)
    src = list(source.indices)

    def one(i: int) -> NDArray:
        lc = fit_lincomb(ds.without(i), source, target_nm)
        return np.array([apply_lincomb(lc, ds[i].values[src])])

    recon = _run_holdouts(ds.n, one, workers)
    full = fit_lincomb(ds, source, target_nm)
    protocol = {
        "mode": "lincomb",
        "dataset": ds.name,
        "source_nm": list(source.wavelengths_nm),
        "target_nm": float(ds.grid.wavelengths[t]),
    }
    truth = ds.matrix[:, [t]]
    return build_report(
        protocol,
        ds.labels,
        [ds.grid.wavelengths[t]],
        truth,
        np.vstack(recon),
        extras={"coeffs_full_fit": full.coeffs.tolist()},
    )


def insample_full(model: PcaModel, ds: SpectralDataset, m: int) -> ReconstructionReport:
    """Score full-band reconstruction of ``ds`` by an already fitted model (no holdout)."""
    recon = [reconstruct_full(model, project(model, s, m)).values for s in ds]
    protocol = {"mode": "full-insample", "dataset": ds.name, "m": int(m), "centering": model.centering}
    return build_report(protocol, ds.labels, ds.grid.wavelengths, ds.matrix, recon)
