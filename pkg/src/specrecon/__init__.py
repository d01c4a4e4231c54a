"""Surface reflectance reconstruction from principal components, selected bands
and linear band combinations, with leave-one-out validation."""

from .errors import ConfigError, DataError, NumericalError, SpecReconError
from .ingest import (
    DatasetManifest,
    load_manifest,
    parse_dataset_csv,
    parse_two_column,
    read_dataset,
    read_manifest,
    save_dataset,
    write_dataset_csv,
)
from .pca import PcaModel, compute_covariance, compute_mean, contribution, eigendecompose, fit
from .reconstruct import (
    BandSelection,
    LinCombModel,
    Weights,
    apply_lincomb,
    fit_lincomb,
    project,
    reconstruct_from_bands,
    reconstruct_full,
    solve_weights_from_bands,
)
from .spectra import DEFAULT_GRID, SpectralDataset, Spectrum, WavelengthGrid, resample, smooth
from .validate import (
    ReconstructionReport,
    loocv_bands,
    loocv_full,
    loocv_lincomb,
    mean_relative_error,
    r_squared,
)

__version__ = "0.1.0"
