"""Command-line front end.

Subcommands::

    specrecon ingest MANIFEST -o DATASET.csv
    specrecon pca DATASET.csv -o OUTDIR [--centering MODE] [--n-pcs K]
    specrecon loocv PROTOCOL [-o OUTDIR] [--workers N]
    specrecon reconstruct MODEL --mode {full,bands,lincomb} ...

Exit codes: 0 success, 2 usage/configuration error, 3 data error,
4 numerical failure.

Data files are written with full float precision and fixed column order, so
identical inputs give byte-identical outputs. Run metadata (time, argv,
version) goes to a separate ``run.meta.json`` sidecar.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import tomli

from . import __version__
from .data import protocol_path
from .errors import ConfigError, DataError, NumericalError, SpecReconError
from .ingest import load_manifest, read_dataset, save_dataset, write_dataset_csv
from .pca import CENTERING_MODES, PcaModel, fit, load_model, save_model
from .reconstruct import (
    BandSelection,
    LinCombModel,
    apply_lincomb,
    fit_lincomb,
    project,
    reconstruct_from_bands,
    reconstruct_full,
)
from .spectra import SpectralDataset
from .validate import ReconstructionReport, loocv_bands, loocv_full, loocv_lincomb, relative_error_stats

LINCOMB_FORMAT = "specrecon.lincomb-model"


def _num(x: float) -> str:
    return repr(float(x))


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return out.getvalue()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")


def _write_meta(out_dir: Path, argv: Sequence[str], extra: dict | None = None) -> None:
    meta = {
        "specrecon_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "argv": list(argv),
        "utc_time": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        **(extra or {}),
    }
    _write(out_dir / "run.meta.json", json.dumps(meta, indent=2) + "\n")


def _sig4(x: float) -> str:
    return f"{x:.4g}"


# ---------------------------------------------------------------- protocols


@dataclass
class ProtocolFile:
    """One leave-one-out experiment, as read from a TOML protocol file."""

    name: str
    dataset: Path
    mode: str
    centering: str = "centered"
    m: list[int] = field(default_factory=lambda: [6])
    bands_nm: list[float] = field(default_factory=list)
    source_nm: list[float] = field(default_factory=list)
    target_nm: list[float] = field(default_factory=list)
    output_dir: Path | None = None
    workers: int = 1


def _as_list(value: Any, key: str, kind=float) -> list:
    items = value if isinstance(value, list) else [value]
    try:
        return [kind(v) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(f"protocol field '{key}' must be a number or list of numbers") from None


def parse_protocol(text: str, base_dir: Path) -> ProtocolFile:
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"protocol is not valid TOML: {exc}") from None
    for key in ("dataset", "mode"):
        if key not in doc:
            raise ConfigError(f"protocol is missing field '{key}'")
    mode = doc["mode"]
    if mode not in ("full", "bands", "lincomb"):
        raise ConfigError("protocol field 'mode' must be full, bands or lincomb")
    centering = doc.get("centering", "centered")
    if centering not in CENTERING_MODES:
        raise ConfigError(f"protocol field 'centering' must be one of {CENTERING_MODES}")
    ds_path = Path(doc["dataset"])
    if not ds_path.is_absolute():
        ds_path = base_dir / ds_path
    proto = ProtocolFile(
        name=str(doc.get("name", "")),
        dataset=ds_path,
        mode=mode,
        centering=centering,
        m=_as_list(doc.get("m", 6), "m", int),
        bands_nm=_as_list(doc.get("bands_nm", []), "bands_nm"),
        source_nm=_as_list(doc.get("source_nm", []), "source_nm"),
        target_nm=_as_list(doc.get("target_nm", []), "target_nm"),
        output_dir=Path(doc["output_dir"]) if "output_dir" in doc else None,
        workers=int(doc.get("workers", 1)),
    )
    if mode == "bands" and not proto.bands_nm:
        raise ConfigError("protocol field 'bands_nm' is required in bands mode")
    if mode == "lincomb" and not (proto.source_nm and proto.target_nm):
        raise ConfigError("protocol fields 'source_nm' and 'target_nm' are required in lincomb mode")
    if mode != "lincomb" and any(m < 1 for m in proto.m):
        raise ConfigError("protocol field 'm' must be >= 1")
    return proto


def read_protocol(spec: str | Path) -> ProtocolFile:
    """Load a protocol file, or a bundled protocol by name."""
    path = Path(spec)
    if not path.exists():
        bundled = protocol_path(str(spec))
        if not bundled.exists():
            raise ConfigError(f"{spec}: no such protocol file or bundled protocol")
        path = bundled
    return parse_protocol(path.read_text(encoding="utf-8"), path.parent)


def _report_files(rep: ReconstructionReport, suffix: str) -> dict[str, str]:
    per_sample = _csv_text(
        ["label", "mean_relative_error", "mean_absolute_error", "norm_ratio", "r2", "excluded_points"],
        [
            (lab, float(rel), float(ab), float(nr), float(r2), int(ex))
            for lab, rel, ab, nr, r2, ex in zip(
                rep.labels,
                rep.per_sample_relative,
                rep.per_sample_absolute,
                rep.per_sample_norm_ratio,
                rep.per_sample_r2,
                rep.excluded,
            )
        ],
    )
    scatter_rows = []
    for i, lab in enumerate(rep.labels):
        for j, wl in enumerate(rep.wavelengths):
            scatter_rows.append((lab, float(wl), float(rep.truth[i, j]), float(rep.recon[i, j])))
    files = {
        f"per_sample_{suffix}.csv": per_sample,
        f"scatter_{suffix}.csv": _csv_text(["label", "wavelength_nm", "truth", "recon"], scatter_rows),
    }
    if rep.wavelengths.size > 1:
        mt, mr = rep.truth.mean(axis=0), rep.recon.mean(axis=0)
        files[f"mean_spectra_{suffix}.csv"] = _csv_text(
            ["wavelength_nm", "mean_truth", "mean_recon"],
            [(float(w), float(a), float(b)) for w, a, b in zip(rep.wavelengths, mt, mr)],
        )
    return files


def _human_summary(s: dict[str, Any]) -> str:
    head = f"[{s['mode']}] {s['dataset']}"
    if "m" in s:
        head += f"  m={s['m']}"
    if "bands_nm" in s:
        head += "  bands=" + ",".join(f"{b:g}" for b in s["bands_nm"])
    if "target_nm" in s:
        head += f"  target={s['target_nm']:g} nm"
        head += "  a=(" + ", ".join(_sig4(a) for a in s["coeffs_full_fit"]) + ")"
    return (
        f"{head}\n"
        f"  mean relative error {_sig4(s['mean_relative_error'])}"
        f"  mean absolute error {_sig4(s['mean_absolute_error'])}"
        f"  R2 {_sig4(s['r2_pooled'])}"
        f"  excluded {s['excluded_points']}"
    )


def run_protocol(proto: ProtocolFile, ds: SpectralDataset | None = None) -> tuple[list[ReconstructionReport], dict[str, str]]:
    """Execute a protocol; returns the reports and the output files (name -> text)."""
    if ds is None:
        ds = read_dataset(proto.dataset)
    files: dict[str, str] = {}
    reports: list[ReconstructionReport] = []
    if proto.mode == "lincomb":
        source = BandSelection.on_grid(ds.grid, proto.source_nm)
        coeff_rows = []
        for t in proto.target_nm:
            rep = loocv_lincomb(ds, source, t, workers=proto.workers)
            reports.append(rep)
            tag = f"{t:g}nm"
            files.update(_report_files(rep, tag))
            lc = fit_lincomb(ds, source, t)
            files[f"lincomb_{tag}.json"] = json.dumps(
                {"format": LINCOMB_FORMAT, "version": 1, **lc.to_dict()}, indent=2
            ) + "\n"
            coeff_rows.append(
                (float(t), *lc.coeffs.tolist(), rep.mean_absolute_error, rep.mean_relative_error, rep.r2)
            )
        files["coefficients.csv"] = _csv_text(
            ["target_nm", *(f"a_{s:g}nm" for s in source.wavelengths_nm),
             "mean_absolute_error", "mean_relative_error", "r2_pooled"],
            coeff_rows,
        )
    else:
        sel = BandSelection.on_grid(ds.grid, proto.bands_nm) if proto.mode == "bands" else None
        curve = []
        for m in proto.m:
            if sel is None:
                rep = loocv_full(ds, m, proto.centering, workers=proto.workers)
            else:
                rep = loocv_bands(ds, sel, m, proto.centering, workers=proto.workers)
            reports.append(rep)
            files.update(_report_files(rep, f"m{m}"))
            curve.append((m, rep.mean_relative_error, rep.mean_absolute_error, rep.mean_norm_ratio, rep.r2))
        files["error_curve.csv"] = _csv_text(
            ["m", "mean_relative_error", "mean_absolute_error", "mean_norm_ratio", "r2_pooled"], curve
        )
    files["summary.json"] = json.dumps(
        {"protocol": proto.name, "summaries": [r.summary() for r in reports]}, indent=2
    ) + "\n"
    return reports, files


# ---------------------------------------------------------------- commands


def cmd_ingest(args: argparse.Namespace) -> int:
    ds = load_manifest(args.manifest, workers=args.workers)
    save_dataset(ds, args.output)
    print(f"wrote {args.output}: {ds.n} spectra x {ds.d} wavelengths ({ds.grid})")
    return 0


def cmd_pca(args: argparse.Namespace) -> int:
    ds = read_dataset(args.dataset)
    model = fit(ds, args.centering)
    out = Path(args.output)
    save_model(model, out / "model.json")
    v = model.contribution
    _write(
        out / "contribution.csv",
        _csv_text(
            ["m", "eigenvalue", "cumulative_contribution"],
            [(i + 1, float(lam), float(c)) for i, (lam, c) in enumerate(zip(model.eigenvalues, v))],
        ),
    )
    k = min(args.n_pcs, model.n_components)
    _write(
        out / "pc_spectra.csv",
        _csv_text(
            ["wavelength_nm", *(f"PC{i + 1}" for i in range(k))],
            [(float(w), *map(float, row)) for w, row in zip(ds.grid.wavelengths, model.components[:, :k])],
        ),
    )
    _write_meta(out, sys.argv, {"dataset": str(args.dataset)})
    print(f"{ds.name}: n={ds.n} d={ds.d} centering={model.centering}")
    for i in range(min(k, v.size)):
        print(f"  PC{i + 1}: eigenvalue {_sig4(model.eigenvalues[i])}  cumulative {_sig4(v[i])}")
    return 0


def cmd_loocv(args: argparse.Namespace) -> int:
    proto = read_protocol(args.protocol)
    if args.workers is not None:
        proto.workers = args.workers
    out = Path(args.output) if args.output else proto.output_dir
    if out is None:
        raise ConfigError("protocol field 'output_dir' missing and no --output given")
    reports, files = run_protocol(proto)
    for name, text in files.items():
        _write(out / name, text)
    _write_meta(out, sys.argv, {"protocol": str(args.protocol), "dataset": str(proto.dataset)})
    for rep in reports:
        print(_human_summary(rep.summary()))
    return 0


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers") from None


def _load_any_model(path: Path) -> PcaModel | LinCombModel:
    try:
        head = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from None
    if LINCOMB_FORMAT in head[:200]:
        return LinCombModel.from_dict(json.loads(head))
    return load_model(path)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    model = _load_any_model(Path(args.model))
    if args.mode == "lincomb":
        if not isinstance(model, LinCombModel):
            raise ConfigError("lincomb mode needs a linear-combination model file")
        if args.values is None:
            raise ConfigError("--values is required in lincomb mode")
        value = apply_lincomb(model, _parse_floats(args.values, "--values"))
        text = f"{_num(value)}\n"
        if args.output:
            _write(Path(args.output), f"target_nm,value\n{_num(model.target_nm)},{_num(value)}\n")
        sys.stdout.write(text)
        return 0

    if not isinstance(model, PcaModel):
        raise ConfigError(f"{args.mode} mode needs a PCA model file")
    truth = None
    if args.spectrum:
        ds = read_dataset(args.spectrum)
        if ds.grid != model.grid:
            raise DataError(f"{args.spectrum}: {ds.grid} does not match model {model.grid}")
        label = args.sample if args.sample else ds.labels[0]
        if label not in ds.labels:
            raise ConfigError(f"--sample {label!r} not found in {args.spectrum}")
        truth = ds[ds.labels.index(label)]
    m = args.m if args.m is not None else model.n_components

    if args.mode == "full":
        if truth is None:
            raise ConfigError("--spectrum is required in full mode")
        recon = reconstruct_full(model, project(model, truth, m), "reconstructed")
    else:
        if not args.bands:
            raise ConfigError("--bands is required in bands mode")
        wl = _parse_floats(args.bands, "--bands")
        if args.snap:
            sel, dist = BandSelection.snapped(model.grid, wl)
            for w, node, dd in zip(wl, sel.wavelengths_nm, dist):
                if dd:
                    print(f"snapped {w:g} nm -> {node:g} nm (distance {dd:g} nm)", file=sys.stderr)
        else:
            sel = BandSelection.on_grid(model.grid, wl)
        if args.values is not None:
            rho = _parse_floats(args.values, "--values")
        elif truth is not None:
            rho = truth.values[list(sel.indices)]
        else:
            raise ConfigError("bands mode needs --values or --spectrum")
        recon = reconstruct_from_bands(model, sel, rho, m, "reconstructed")

    text = write_dataset_csv(SpectralDataset(model.name or "reconstruction", model.grid, (recon,)))
    if args.output:
        _write(Path(args.output), text)
    else:
        sys.stdout.write(text)
    if truth is not None:
        mre, excluded = relative_error_stats(truth.values, recon.values)
        print(f"mean_relative_error = {_num(mre)}  (excluded points: {excluded})", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrecon",
        description="Surface reflectance reconstruction with PCA, selected bands and band combinations.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a canonical dataset CSV from a manifest")
    p.add_argument("manifest", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pca", help="fit a PCA model; write model, contribution and PC spectra")
    p.add_argument("dataset", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, help="output directory")
    p.add_argument("--centering", choices=CENTERING_MODES, default="centered")
    p.add_argument("--n-pcs", type=int, default=6, help="PC spectra to write (default 6)")
    p.set_defaults(func=cmd_pca)

    p = sub.add_parser("loocv", help="run a leave-one-out protocol file")
    p.add_argument("protocol", help="protocol TOML path or bundled protocol name")
    p.add_argument("-o", "--output", type=Path, help="output directory (overrides output_dir)")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_loocv)

    p = sub.add_parser("reconstruct", help="one-shot reconstruction with a saved model")
    p.add_argument("model", type=Path, help="PCA model JSON or linear-combination model JSON")
    p.add_argument("--mode", choices=("full", "bands", "lincomb"), required=True)
    p.add_argument("--spectrum", type=Path, help="dataset CSV holding the input / true spectrum")
    p.add_argument("--sample", help="sample label within --spectrum (default: first)")
    p.add_argument("--m", type=int, help="number of PCs (default: all in the model)")
    p.add_argument("--bands", help="comma-separated band wavelengths (nm)")
    p.add_argument("--values", help="comma-separated reflectances at --bands or the source bands")
    p.add_argument("--snap", action="store_true", help="snap off-grid bands to the nearest node")
    p.add_argument("-o", "--output", type=Path)
    p.set_defaults(func=cmd_reconstruct)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecReconError as exc:
        print(f"specrecon {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"specrecon {args.command}: numerical failure: {exc}", file=sys.stderr)
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
