"""File formats: event tables, tree files, histogram CSVs, run configs.

Events travel as comma-delimited text with a header row naming the feature
columns; optional ``weight`` and ``label`` columns carry per-event weights
and process tags. Floats are printed with shortest-round-trip precision,
so a write/read cycle preserves every value bit for bit.

Every file this package writes starts with a one-line provenance comment
carrying the tool version, the hash of the effective configuration that
produced it, and the master seed, so identical configurations can be
recognized from their outputs alone.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, EventFileError
from .generators import GeneratorSpec
from .geometry import PointSet
from .mst import Tree
from .stats import Histogram

WEIGHT_COLUMN = "weight"
LABEL_COLUMN = "label"

_RESERVED = (WEIGHT_COLUMN, LABEL_COLUMN)


def config_hash(config: Mapping[str, Any]) -> str:
    """Stable short hash of a configuration mapping."""
    payload = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def file_fingerprint(path: str | Path) -> str:
    """Short content hash of an input file.

    Input files enter the effective configuration by content, not by path,
    so moving a pipeline to another directory changes nothing.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise EventFileError(f"{path}: cannot read input: {exc}") from exc
    return hashlib.sha256(data).hexdigest()[:12]


def provenance_line(cfg_hash: str, seed: int | None = None) -> str:
    seed_part = "-" if seed is None else str(seed)
    return f"# spantree {__version__} config={cfg_hash} seed={seed_part}"


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# event files

def write_events(ps: PointSet, path: str | Path, comment: str | None = None) -> None:
    """Write a point set as a delimited event table.

    The weight column is emitted only when some weight differs from 1, the
    label column only when labels are present.
    """
    names = ps.feature_names or tuple(f"x{i}" for i in range(ps.dimension))
    with_weights = bool(np.any(ps.weights != 1.0))
    with_labels = ps.labels is not None
    header = list(names)
    if with_weights:
        header.append(WEIGHT_COLUMN)
    if with_labels:
        header.append(LABEL_COLUMN)

    lines = []
    if comment:
        lines.append(comment)
    lines.append(",".join(header))
    for i in range(len(ps)):
        row = [_fmt(v) for v in ps.coords[i]]
        if with_weights:
            row.append(_fmt(ps.weights[i]))
        if with_labels:
            row.append(ps.labels[i] or "")
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class ColumnFilter:
    """Keep only rows whose feature lies within [lo, hi] (either open)."""

    feature: int | str
    lo: float | None = None
    hi: float | None = None


def read_events(path: str | Path, filters: Sequence[ColumnFilter] = ()) -> PointSet:
    """Parse an event table into a PointSet.

    Raises :class:`EventFileError` with the offending line number for rows
    with the wrong column count or non-finite numbers.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise EventFileError(f"{path}: cannot read event file: {exc}") from exc

    rows = [
        (lineno, line)
        for lineno, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise EventFileError(f"{path}: no header row found")

    header = next(csv.reader([rows[0][1]]))
    header = [h.strip() for h in header]
    feature_cols = [i for i, h in enumerate(header) if h not in _RESERVED]
    if not feature_cols:
        raise EventFileError(f"{path}: header declares no feature columns")
    weight_col = header.index(WEIGHT_COLUMN) if WEIGHT_COLUMN in header else None
    label_col = header.index(LABEL_COLUMN) if LABEL_COLUMN in header else None
    names = tuple(header[i] for i in feature_cols)

    coords: list[list[float]] = []
    weights: list[float] = []
    labels: list[str | None] = []
    reader = csv.reader(line for _, line in rows[1:])
    linenos = [lineno for lineno, _ in rows[1:]]
    for lineno, cells in zip(linenos, reader):
        if len(cells) != len(header):
            raise EventFileError(
                f"{path}: line {lineno}: expected {len(header)} fields, found {len(cells)}"
            )
        try:
            values = [float(cells[i]) for i in feature_cols]
            w = float(cells[weight_col]) if weight_col is not None else 1.0
        except ValueError as exc:
            raise EventFileError(f"{path}: line {lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in values) or not math.isfinite(w):
            raise EventFileError(f"{path}: line {lineno}: non-finite value")
        coords.append(values)
        weights.append(w)
        labels.append(cells[label_col].strip() or None if label_col is not None else None)

    if not coords:
        raise EventFileError(f"{path}: event file contains no rows")

    ps = PointSet(
        np.asarray(coords),
        np.asarray(weights),
        labels if any(l is not None for l in labels) else None,
        names,
    )
    for f in filters:
        col = ps.coords[:, ps.feature_index(f.feature)]
        keep = np.ones(len(ps), dtype=bool)
        if f.lo is not None:
            keep &= col >= f.lo
        if f.hi is not None:
            keep &= col <= f.hi
        if not keep.any():
            raise EventFileError(f"{path}: filter on {f.feature!r} removed every event")
        if not keep.all():
            ps = PointSet(
                ps.coords[keep],
                ps.weights[keep],
                [ps.labels[i] for i in np.flatnonzero(keep)] if ps.labels else None,
                ps.feature_names,
            )
    return ps


# ---------------------------------------------------------------------------
# tree files

def write_tree_csv(tree: Tree, path: str | Path, comment: str | None = None) -> None:
    """Write tree edges as ``u,v,length,weight`` in canonical order."""
    lines = []
    if comment:
        lines.append(comment)
    lines.append("u,v,length,weight")
    for u, v, l, w in zip(
        tree.edge_u.tolist(), tree.edge_v.tolist(), tree.lengths.tolist(), tree.edge_weights.tolist()
    ):
        lines.append(f"{u},{v},{_fmt(l)},{_fmt(w)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_tree_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Read a tree file back as (u, v, length, weight) arrays."""
    path = Path(path)
    us, vs, lengths, weights = [], [], [], []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise EventFileError(f"{path}: cannot read tree file: {exc}") from exc
    seen_header = False
    for lineno, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if not seen_header:
            seen_header = True
            continue
        cells = line.split(",")
        if len(cells) != 4:
            raise EventFileError(f"{path}: line {lineno}: expected 4 fields")
        try:
            us.append(int(cells[0]))
            vs.append(int(cells[1]))
            lengths.append(float(cells[2]))
            weights.append(float(cells[3]))
        except ValueError as exc:
            raise EventFileError(f"{path}: line {lineno}: {exc}") from exc
    return (
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.asarray(lengths),
        np.asarray(weights),
    )


# ---------------------------------------------------------------------------
# histogram files

def write_histogram_csv(h: Histogram, path: str | Path, comment: str | None = None) -> None:
    """Write ``bin_lo,bin_hi,content`` rows plus overflow/underflow trailers."""
    lines = []
    if comment:
        lines.append(comment)
    lines.append(f"# folds_overflow={'true' if h.folds_overflow else 'false'}")
    lines.append("bin_lo,bin_hi,content")
    edges = h.edges
    for i in range(h.nbins):
        lines.append(f"{_fmt(edges[i])},{_fmt(edges[i + 1])},{_fmt(h.contents[i])}")
    lines.append(f"overflow,,{_fmt(h.overflow)}")
    lines.append(f"underflow,,{_fmt(h.underflow)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_histogram_csv(path: str | Path) -> Histogram:
    path = Path(path)
    folds = True
    rows: list[tuple[float, float, float]] = []
    overflow = underflow = 0.0
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise EventFileError(f"{path}: cannot read histogram file: {exc}") from exc
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if "folds_overflow=" in stripped:
                folds = stripped.split("folds_overflow=")[1].strip() == "true"
            continue
        if stripped.startswith("bin_lo"):
            continue
        cells = stripped.split(",")
        if cells[0] in ("overflow", "underflow"):
            value = float(cells[-1])
            if cells[0] == "overflow":
                overflow = value
            else:
                underflow = value
            continue
        if len(cells) != 3:
            raise EventFileError(f"{path}: line {lineno}: expected 3 fields")
        try:
            rows.append((float(cells[0]), float(cells[1]), float(cells[2])))
        except ValueError as exc:
            raise EventFileError(f"{path}: line {lineno}: {exc}") from exc
    if not rows:
        raise EventFileError(f"{path}: histogram file contains no bins")
    lo = rows[0][0]
    hi = rows[-1][1]
    contents = np.array([r[2] for r in rows])
    return Histogram(lo, hi, len(rows), contents, underflow, overflow, folds)


def write_json(payload: Mapping[str, Any], path: str | Path) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")


# ---------------------------------------------------------------------------
# run configuration

@dataclass(frozen=True)
class InputSpec:
    """One named pipeline input: a file, a generator, or a labeled mixture."""

    name: str
    file: str | None = None
    generator: GeneratorSpec | None = None
    two_component: dict[str, Any] | None = None
    filters: tuple[ColumnFilter, ...] = ()

    def __post_init__(self) -> None:
        provided = sum(x is not None for x in (self.file, self.generator, self.two_component))
        if provided != 1:
            raise ConfigError(
                f"input {self.name!r} must declare exactly one of file/generator/two_component"
            )


@dataclass(frozen=True)
class FitSettings:
    """Fit section of a run configuration."""

    background: str
    signal: str
    observed: str
    binning: dict[str, Any]
    calibration_alphas: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    calibration_trials: int = 4
    calibration_count: int | None = None
    alpha_grid: int = 201
    mode: str = "both"

    def __post_init__(self) -> None:
        if self.mode not in ("baseline", "augmented", "both"):
            raise ConfigError(f"fit mode must be baseline/augmented/both, got {self.mode!r}")


ALL_STATISTICS = ("edge_length", "log_norm_length", "degree", "log_branch_length")


@dataclass(frozen=True)
class RunConfig:
    """Declarative description of a reproducible pipeline run."""

    seed: int
    inputs: dict[str, InputSpec]
    output_dir: str | None = None
    rescale: str = "none"
    region_weights: dict[str, Any] | None = None
    statistics: tuple[str, ...] = ALL_STATISTICS
    fit: FitSettings | None = None
    histogram_specs: dict[str, dict[str, Any]] = field(default_factory=dict)
    comparisons: tuple[dict[str, Any], ...] = ()

    def __post_init__(self) -> None:
        unknown = set(self.statistics) - set(ALL_STATISTICS)
        if unknown:
            raise ConfigError(f"unknown statistics {sorted(unknown)}; known: {ALL_STATISTICS}")
        if self.fit is not None:
            for role in (self.fit.background, self.fit.signal, self.fit.observed):
                if role not in self.inputs:
                    raise ConfigError(f"fit references undeclared input {role!r}")
        for comparison in self.comparisons:
            for role in ("subject", "reference"):
                if comparison.get(role) not in self.inputs:
                    raise ConfigError(
                        f"comparison references undeclared input {comparison.get(role)!r}"
                    )

    def to_dict(self) -> dict[str, Any]:
        inputs = {}
        for name, spec in self.inputs.items():
            entry: dict[str, Any] = {}
            if spec.file is not None:
                entry["file"] = spec.file
            if spec.generator is not None:
                entry["generator"] = spec.generator.to_dict()
            if spec.two_component is not None:
                entry["two_component"] = spec.two_component
            if spec.filters:
                entry["filters"] = [
                    {"feature": f.feature, "lo": f.lo, "hi": f.hi} for f in spec.filters
                ]
            inputs[name] = entry
        out: dict[str, Any] = {
            "seed": self.seed,
            "inputs": inputs,
            "rescale": self.rescale,
        }
        if self.statistics != ALL_STATISTICS:
            out["statistics"] = list(self.statistics)
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        if self.region_weights is not None:
            out["region_weights"] = self.region_weights
        if self.fit is not None:
            out["fit"] = {
                "background": self.fit.background,
                "signal": self.fit.signal,
                "observed": self.fit.observed,
                "binning": self.fit.binning,
                "calibration_alphas": list(self.fit.calibration_alphas),
                "calibration_trials": self.fit.calibration_trials,
                "calibration_count": self.fit.calibration_count,
                "alpha_grid": self.fit.alpha_grid,
                "mode": self.fit.mode,
            }
        if self.histogram_specs:
            out["histogram_specs"] = self.histogram_specs
        if self.comparisons:
            out["comparisons"] = list(self.comparisons)
        return out

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunConfig":
        try:
            raw_inputs = d["inputs"]
            seed = d.get("seed")
            inputs: dict[str, InputSpec] = {}
            uses_generator = False
            for name, entry in raw_inputs.items():
                gen = entry.get("generator")
                two = entry.get("two_component")
                if gen is not None or two is not None:
                    uses_generator = True
                filters = tuple(
                    ColumnFilter(f["feature"], f.get("lo"), f.get("hi"))
                    for f in entry.get("filters", ())
                )
                inputs[name] = InputSpec(
                    name=name,
                    file=entry.get("file"),
                    generator=GeneratorSpec.from_dict(gen) if gen is not None else None,
                    two_component=two,
                    filters=filters,
                )
            if uses_generator and seed is None:
                raise ConfigError("a seed is required whenever any input is generated")
            fit = None
            if "fit" in d:
                f = d["fit"]
                fit = FitSettings(
                    background=f["background"],
                    signal=f["signal"],
                    observed=f["observed"],
                    binning=f["binning"],
                    calibration_alphas=tuple(f.get("calibration_alphas", (0.0, 0.25, 0.5, 0.75, 1.0))),
                    calibration_trials=int(f.get("calibration_trials", 4)),
                    calibration_count=f.get("calibration_count"),
                    alpha_grid=int(f.get("alpha_grid", 201)),
                    mode=f.get("mode", "both"),
                )
            return cls(
                seed=int(seed) if seed is not None else 0,
                inputs=inputs,
                output_dir=d.get("output_dir"),
                rescale=d.get("rescale", "none"),
                region_weights=d.get("region_weights"),
                statistics=tuple(d.get("statistics", ALL_STATISTICS)),
                fit=fit,
                histogram_specs=dict(d.get("histogram_specs", {})),
                comparisons=tuple(d.get("comparisons", ())),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed run configuration: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            payload = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        return cls.from_dict(payload)

    def hash(self) -> str:
        return config_hash(self.to_dict())
