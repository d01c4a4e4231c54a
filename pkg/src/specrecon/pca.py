"""Principal component analysis of a spectral dataset.

The pipeline is the textbook one: sample mean, unbiased covariance over the
wavelength dimensions, symmetric eigendecomposition sorted by descending
eigenvalue, and cumulative contribution rates. Two details make the output
reproducible: eigenvector signs are fixed so that the entry of largest
magnitude in each column is positive, and tiny negative eigenvalues caused by
rounding are clamped to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigError, DataError, NumericalError
from .spectra import SpectralDataset, WavelengthGrid

Centering = Literal["centered", "paper-literal"]
CENTERING_MODES: tuple[str, ...] = ("centered", "paper-literal")

MODEL_FORMAT = "specrecon.pca-model"
MODEL_VERSION = 1

SYMMETRY_RTOL = 1e-12
NEGATIVE_EIG_RTOL = 1e-12
ORTHONORMAL_TOL = 1e-10


def compute_mean(ds: SpectralDataset) -> NDArray[np.float64]:
    """Per-wavelength arithmetic mean over the samples."""
    X = ds.matrix
    if X.shape[0] == 0:
        raise DataError("cannot take the mean of an empty dataset")
    return X.sum(axis=0) / X.shape[0]


def compute_covariance(ds: SpectralDataset) -> NDArray[np.float64]:
    """Unbiased (n - 1) covariance between wavelengths, shape (d, d).

    The result is exactly symmetric.
    """
    n = ds.n
    if n < 2:
        raise DataError(f"covariance needs at least 2 spectra, dataset {ds.name!r} has {n}")
    Xc = ds.matrix - compute_mean(ds)
    C = (Xc.T @ Xc) / (n - 1)
    return (C + C.T) / 2


def _apply_sign_convention(P: NDArray[np.float64]) -> NDArray[np.float64]:
    # argmax picks the lowest index among ties
    idx = np.argmax(np.abs(P), axis=0)
    signs = np.where(P[idx, np.arange(P.shape[1])] < 0, -1.0, 1.0)
    return P * signs


def eigendecompose(
    C: ArrayLike, n_components: int | None = None
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Eigenvalues (descending) and eigenvectors (as columns) of a symmetric matrix.

    With ``n_components`` only the leading eigenpairs are computed, which is
    noticeably cheaper for d = 501 inside leave-one-out loops.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DataError(f"expected a square matrix, got shape {C.shape}")
    d = C.shape[0]
    scale = np.max(np.abs(C)) if C.size else 0.0
    if np.max(np.abs(C - C.T), initial=0.0) > SYMMETRY_RTOL * scale:
        raise DataError("matrix is not symmetric")
    try:
        if n_components is None or n_components >= d:
            w, V = np.linalg.eigh(C)
        else:
            if not 1 <= n_components:
                raise ConfigError(f"n_components must be >= 1, got {n_components}")
            w, V = scipy.linalg.eigh(C, subset_by_index=[d - n_components, d - 1])
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from None
    order = np.argsort(-w, kind="stable")
    return w[order], _apply_sign_convention(V[:, order])


def contribution(eigenvalues: ArrayLike, total: float | None = None) -> NDArray[np.float64]:
    """Cumulative contribution rate of the first m components, for m = 1..len.

    ``total`` defaults to the sum of ``eigenvalues``; pass the covariance trace
    when only the leading eigenvalues are available.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    csum = np.cumsum(lam)
    if total is None:
        total = csum[-1] if csum.size else 0.0
    if not total > 0:
        raise DataError("all eigenvalues are zero: degenerate dataset")
    return csum / total


@dataclass(frozen=True, eq=False)
class PcaModel:
    """Fitted PCA of one dataset.

    ``components`` holds the principal components as columns, ordered by
    descending eigenvalue. It is d x d for a full fit and d x k when only the
    leading k components were requested.
    """

    grid: WavelengthGrid
    mean: NDArray[np.float64]
    eigenvalues: NDArray[np.float64]
    components: NDArray[np.float64]
    centering: Centering = "centered"
    total_variance: float = float("nan")
    n_samples: int = 0
    name: str = ""

    def __post_init__(self) -> None:
        if self.centering not in CENTERING_MODES:
            raise ConfigError(f"centering must be one of {CENTERING_MODES}, got {self.centering!r}")
        for attr in ("mean", "eigenvalues", "components"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        d = self.grid.count
        k = self.eigenvalues.size
        if self.mean.shape != (d,) or self.components.shape != (d, k) or not 1 <= k <= d:
            raise DataError(
                f"inconsistent model shapes: mean {self.mean.shape}, "
                f"eigenvalues {self.eigenvalues.shape}, components {self.components.shape}"
            )
        if np.any(np.diff(self.eigenvalues) > 0):
            raise NumericalError("eigenvalues are not in descending order")
        if np.isnan(self.total_variance):
            object.__setattr__(self, "total_variance", float(np.sum(self.eigenvalues)))
        P = self.components
        err = np.max(np.abs(P.T @ P - np.eye(k)))
        if err > ORTHONORMAL_TOL:
            raise NumericalError(f"components are not orthonormal (max |PᵀP - I| = {err:.3g})")

    @property
    def d(self) -> int:
        return self.grid.count

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size

    @property
    def contribution(self) -> NDArray[np.float64]:
        return contribution(self.eigenvalues, self.total_variance)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PcaModel):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.centering == other.centering
            and self.total_variance == other.total_variance
            and self.n_samples == other.n_samples
            and self.name == other.name
            and np.array_equal(self.mean, other.mean)
            and np.array_equal(self.eigenvalues, other.eigenvalues)
            and np.array_equal(self.components, other.components)
        )

    __hash__ = None  # type: ignore[assignment]


def fit(
    ds: SpectralDataset, centering: Centering = "centered", n_components: int | None = None
) -> PcaModel:
    """Fit a :class:`PcaModel` to ``ds``.

    ``n_components=None`` keeps all d components.
    """
    if centering not in CENTERING_MODES:
        raise ConfigError(f"centering must be one of {CENTERING_MODES}, got {centering!r}")
    mean = compute_mean(ds)
    C = compute_covariance(ds)
    lam, P = eigendecompose(C, n_components)
    floor = -NEGATIVE_EIG_RTOL * max(lam[0], 0.0)
    if lam[-1] < floor:
        raise NumericalError(f"covariance is not positive semidefinite (eigenvalue {lam[-1]:.3g})")
    lam = np.where(lam < 0, 0.0, lam)
    return PcaModel(
        grid=ds.grid,
        mean=mean,
        eigenvalues=lam,
        components=P,
        centering=centering,
        total_variance=float(np.trace(C)),
        n_samples=ds.n,
        name=ds.name,
    )


def dumps_model(model: PcaModel) -> str:
    """Versioned JSON text; floats are written in shortest round-trip form."""
    header = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "name": model.name,
        "grid": {
            "start_nm": model.grid.start_nm,
            "end_nm": model.grid.end_nm,
            "step_nm": model.grid.step_nm,
        },
        "centering": model.centering,
        "n_samples": model.n_samples,
        "n_components": model.n_components,
        "total_variance": model.total_variance,
    }
    lines = ["{"]
    for key, value in header.items():
        lines.append(f"  {json.dumps(key)}: {json.dumps(value)},")
    lines.append(f'  "mean": {json.dumps(model.mean.tolist())},')
    lines.append(f'  "eigenvalues": {json.dumps(model.eigenvalues.tolist())},')
    lines.append('  "components_column_major": [')
    cols = [json.dumps(col.tolist()) for col in model.components.T]
    lines.append(",\n".join("    " + c for c in cols))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def loads_model(text: str) -> PcaModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file is not valid JSON: {exc}") from None
    if doc.get("format") != MODEL_FORMAT:
        raise DataError("not a PCA model file")
    if doc.get("version") != MODEL_VERSION:
        raise DataError(f"unsupported model version {doc.get('version')!r}")
    g = doc["grid"]
    components = np.array(doc["components_column_major"], dtype=float).T
    return PcaModel(
        grid=WavelengthGrid(g["start_nm"], g["end_nm"], g["step_nm"]),
        mean=np.array(doc["mean"], dtype=float),
        eigenvalues=np.array(doc["eigenvalues"], dtype=float),
        components=components,
        centering=doc["centering"],
        total_variance=float(doc["total_variance"]),
        n_samples=int(doc["n_samples"]),
        name=doc.get("name", ""),
    )


def save_model(model: PcaModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding="utf-8")


def load_model(path: str | Path) -> PcaModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    return loads_model(text)
