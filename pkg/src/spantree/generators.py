"""Seeded point-cloud generators for the synthetic examples and demos.

All generators are deterministic functions of their seed: the PRNG is
NumPy's PCG64 behind ``numpy.random.Generator``, and independent
sub-streams (for mixture components, calibration trials, ...) are derived
with ``numpy.random.SeedSequence.spawn``. Same seed, same bits.

The one-dimensional samplers draw from three test densities on the
interval [0, 12]: flat, exponential exp(-x) (truncated to the interval,
which discards about 6e-6 of the mass), and sin^2(pi x / 8) whose
normalization constant over the interval is 1/6. Grids, discs, and strips
cover the two- and three-dimensional examples; every vertex position can
be perturbed by independent Gaussian noise so that all pairwise distances
are distinct and the minimal spanning tree is unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from .errors import DimensionMismatch
from .geometry import PointSet

INTERVAL_1D = (0.0, 12.0)
SIN2_NORMALIZATION = 1.0 / 6.0

KINDS_1D = ("uniform1d", "exponential1d", "sin2_1d")
KINDS = KINDS_1D + ("grid", "quadratic_grid", "disc", "strip", "disc3d")

_Z_KINDS = ("uniform", "exponential")

BACKGROUND_LABEL = "background"
SIGNAL_LABEL = "signal"


def rng_from_seed(seed: int) -> np.random.Generator:
    """The package-wide PRNG: PCG64 seeded through a SeedSequence."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """Derive n independent generators from one master seed."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of one synthetic sample.

    ``params`` holds the per-kind region parameters (grid shape and
    extents, disc center and radius, ...). ``sigma`` is the standard
    deviation of the per-coordinate Gaussian perturbation where the kind
    supports one.
    """

    kind: str
    count: int
    seed: int
    sigma: float = 0.0
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "count": self.count,
            "seed": self.seed,
            "sigma": self.sigma,
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GeneratorSpec":
        return cls(
            kind=d["kind"],
            count=int(d["count"]),
            seed=int(d["seed"]),
            sigma=float(d.get("sigma", 0.0)),
            params=dict(d.get("params", {})),
        )


# ---------------------------------------------------------------------------
# one-dimensional samplers

def _sin2_cdf(x: np.ndarray) -> np.ndarray:
    # integral of sin^2(pi t / 8) / 6 from 0 to x
    return (x / 2.0 - (2.0 / math.pi) * np.sin(math.pi * x / 4.0)) / 6.0


_SIN2_TABLE: tuple[np.ndarray, np.ndarray] | None = None


def _sin2_inverse_table() -> tuple[np.ndarray, np.ndarray]:
    global _SIN2_TABLE
    if _SIN2_TABLE is None:
        xs = np.linspace(INTERVAL_1D[0], INTERVAL_1D[1], 8193)
        _SIN2_TABLE = (_sin2_cdf(xs), xs)
    return _SIN2_TABLE


def sample_1d(kind: str, count: int, seed: int) -> PointSet:
    """Draw i.i.d. values from one of the three 1-d test densities on [0, 12].

    The flat and exponential cases use the closed-form inverse CDF (the
    exponential one renormalized over the interval); the sin^2 case inverts
    a densely tabulated CDF, whose interpolation error is far below any
    statistical resolution at realistic sample sizes.
    """
    if kind not in KINDS_1D:
        raise ValueError(f"unknown 1-d kind {kind!r}; expected one of {KINDS_1D}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = rng_from_seed(seed)
    u = rng.random(count)
    lo, hi = INTERVAL_1D
    if kind == "uniform1d":
        x = lo + (hi - lo) * u
    elif kind == "exponential1d":
        x = -np.log1p(-u * (1.0 - math.exp(-(hi - lo)))) + lo
    else:
        cdf, xs = _sin2_inverse_table()
        x = np.interp(u, cdf, xs)
    return PointSet(x.reshape(-1, 1), feature_names=("x",))


# ---------------------------------------------------------------------------
# lattices

def _lattice_axis(n: int, extent: float) -> np.ndarray:
    if n == 1:
        return np.zeros(1)
    return np.linspace(0.0, extent, n)


def gen_grid(
    cols: int,
    rows: int,
    x_extent: float,
    y_extent: float,
    sigma: float,
    seed: int,
) -> PointSet:
    """cols x rows lattice spanning [0, x_extent] x [0, y_extent], perturbed.

    Every coordinate receives independent Gaussian noise of standard
    deviation ``sigma`` (zero noise reproduces the exact lattice).
    """
    if cols < 1 or rows < 1:
        raise ValueError("grid must have at least one column and one row")
    xs = _lattice_axis(cols, x_extent)
    ys = _lattice_axis(rows, y_extent)
    gx, gy = np.meshgrid(xs, ys)
    coords = np.column_stack([gx.ravel(), gy.ravel()])
    rng = rng_from_seed(seed)
    coords = coords + rng.normal(0.0, sigma, size=coords.shape)
    return PointSet(coords, feature_names=("x", "y"))


def gen_quadratic_grid(
    cols: int,
    rows: int,
    x_extent: float,
    y_extent: float,
    sigma: float,
    seed: int,
) -> PointSet:
    """Grid whose column positions grow quadratically across the x extent.

    Column j sits at x_extent * (j / (cols - 1))^2, so vertices crowd at
    low x and thin out toward high x; rows stay uniform.
    """
    if cols < 1 or rows < 1:
        raise ValueError("grid must have at least one column and one row")
    if cols == 1:
        xs = np.zeros(1)
    else:
        j = np.arange(cols, dtype=np.float64)
        xs = x_extent * (j / (cols - 1)) ** 2
    ys = _lattice_axis(rows, y_extent)
    gx, gy = np.meshgrid(xs, ys)
    coords = np.column_stack([gx.ravel(), gy.ravel()])
    rng = rng_from_seed(seed)
    coords = coords + rng.normal(0.0, sigma, size=coords.shape)
    return PointSet(coords, feature_names=("x", "y"))


# ---------------------------------------------------------------------------
# discs and strips

def _disc_xy(count: int, center: tuple[float, float], radius: float, rng) -> np.ndarray:
    u = rng.random((count, 2))
    r = radius * np.sqrt(u[:, 0])
    theta = 2.0 * math.pi * u[:, 1]
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def gen_disc(
    count: int,
    center: tuple[float, float] = (0.0, 0.0),
    radius: float = 20.0,
    sigma: float = 0.0,
    seed: int = 0,
) -> PointSet:
    """Uniform-over-area disc sample (radius proportional to sqrt(u))."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    rng = rng_from_seed(seed)
    coords = _disc_xy(count, center, radius, rng)
    coords = coords + rng.normal(0.0, sigma, size=coords.shape)
    return PointSet(coords, feature_names=("x", "y"))


def gen_strip(
    count: int,
    center: tuple[float, float] = (0.0, 0.0),
    width: float = 100.0,
    height: float = 4.0,
    sigma: float = 0.0,
    seed: int = 0,
) -> PointSet:
    """Uniform sample over a width x height rectangle centered at ``center``."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if width <= 0 or height <= 0:
        raise ValueError("strip width and height must be positive")
    rng = rng_from_seed(seed)
    u = rng.random((count, 2))
    coords = np.column_stack(
        [
            center[0] + (u[:, 0] - 0.5) * width,
            center[1] + (u[:, 1] - 0.5) * height,
        ]
    )
    coords = coords + rng.normal(0.0, sigma, size=coords.shape)
    return PointSet(coords, feature_names=("x", "y"))


def gen_disc3d(
    count: int,
    center: tuple[float, float] = (0.0, 0.0),
    radius: float = 20.0,
    sigma: float = 0.0,
    z_kind: str = "uniform",
    seed: int = 0,
) -> PointSet:
    """Disc sample with a third coordinate drawn from a named distribution.

    The xy plane is a perturbed uniform disc exactly as :func:`gen_disc`;
    z is drawn from the flat or the truncated exponential density on
    [0, 12] and is not perturbed further.
    """
    if z_kind not in _Z_KINDS:
        raise ValueError(f"z_kind must be one of {_Z_KINDS}, got {z_kind!r}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    rng = rng_from_seed(seed)
    xy = _disc_xy(count, center, radius, rng)
    xy = xy + rng.normal(0.0, sigma, size=xy.shape)
    lo, hi = INTERVAL_1D
    u = rng.random(count)
    if z_kind == "uniform":
        z = lo + (hi - lo) * u
    else:
        z = -np.log1p(-u * (1.0 - math.exp(-(hi - lo)))) + lo
    return PointSet(np.column_stack([xy, z]), feature_names=("x", "y", "z"))


# ---------------------------------------------------------------------------
# two-component mixtures

def gen_two_component(
    count: int,
    alpha_true: float,
    background_spec: GeneratorSpec,
    signal_spec: GeneratorSpec,
    seed: int,
) -> PointSet:
    """Labeled mixture of two generator specs with expected signal fraction.

    Each point is signal with probability ``alpha_true`` (binomial split).
    Component streams are derived from the mixture seed, so the seeds
    stored inside the two specs are ignored; the mixture is a deterministic
    function of ``seed`` alone.
    """
    if not 0.0 <= alpha_true <= 1.0:
        raise ValueError(f"alpha_true must lie in [0, 1], got {alpha_true}")
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")

    flag_seq, bg_seq, sig_seq = np.random.SeedSequence(seed).spawn(3)
    flags = np.random.Generator(np.random.PCG64(flag_seq)).random(count) < alpha_true
    n_sig = int(flags.sum())
    n_bg = count - n_sig

    def component(spec: GeneratorSpec, n: int, seq) -> np.ndarray:
        child_seed = int(seq.generate_state(1)[0])
        ps = generate(replace(spec, count=n, seed=child_seed))
        return ps.coords

    bg_coords = component(background_spec, n_bg, bg_seq) if n_bg else None
    sig_coords = component(signal_spec, n_sig, sig_seq) if n_sig else None
    if bg_coords is not None and sig_coords is not None:
        if bg_coords.shape[1] != sig_coords.shape[1]:
            raise DimensionMismatch(
                "background and signal specs produce different dimensions: "
                f"{bg_coords.shape[1]} vs {sig_coords.shape[1]}"
            )
    dim = bg_coords.shape[1] if bg_coords is not None else sig_coords.shape[1]

    coords = np.empty((count, dim))
    if bg_coords is not None:
        coords[~flags] = bg_coords
    if sig_coords is not None:
        coords[flags] = sig_coords
    labels = [SIGNAL_LABEL if f else BACKGROUND_LABEL for f in flags.tolist()]
    names = ("x", "y", "z")[:dim] if dim <= 3 else None
    return PointSet(coords, labels=labels, feature_names=names)


# ---------------------------------------------------------------------------
# dispatch and presets

def generate(spec: GeneratorSpec) -> PointSet:
    """Materialize a GeneratorSpec into a PointSet."""
    p = spec.params
    if spec.kind in KINDS_1D:
        return sample_1d(spec.kind, spec.count, spec.seed)
    if spec.kind in ("grid", "quadratic_grid"):
        cols = int(p.get("cols", 20))
        rows = int(p.get("rows", 40))
        if cols * rows != spec.count:
            raise ValueError(
                f"grid count must equal cols*rows ({cols * rows}), got {spec.count}"
            )
        fn = gen_grid if spec.kind == "grid" else gen_quadratic_grid
        return fn(
            cols,
            rows,
            float(p.get("x_extent", 20.0)),
            float(p.get("y_extent", 40.0)),
            spec.sigma,
            spec.seed,
        )
    if spec.kind == "disc":
        return gen_disc(
            spec.count,
            tuple(p.get("center", (0.0, 0.0))),
            float(p.get("radius", 20.0)),
            spec.sigma,
            spec.seed,
        )
    if spec.kind == "strip":
        return gen_strip(
            spec.count,
            tuple(p.get("center", (0.0, 0.0))),
            float(p.get("width", 100.0)),
            float(p.get("height", 4.0)),
            spec.sigma,
            spec.seed,
        )
    if spec.kind == "disc3d":
        return gen_disc3d(
            spec.count,
            tuple(p.get("center", (0.0, 0.0))),
            float(p.get("radius", 20.0)),
            spec.sigma,
            str(p.get("z_kind", "uniform")),
            spec.seed,
        )
    raise ValueError(f"unknown generator kind {spec.kind!r}")


# Named presets for the CLI and the shipped demos. Grid presets put 800
# vertices on a 20-column x 40-row lattice; the sparse flavour spreads the
# columns over a 20-wide extent while the dense one packs them into a
# 3-wide extent. Disc radius 20 and the 4 x 100 strip are fixed package
# constants for the synthetic geometry examples.
def _preset_table(seed: int, count: int | None) -> dict[str, GeneratorSpec]:
    def c(default: int) -> int:
        return default if count is None else count

    grid_params = {"cols": 20, "rows": 40, "x_extent": 20.0, "y_extent": 40.0}
    dense_params = {"cols": 20, "rows": 40, "x_extent": 3.0, "y_extent": 40.0}
    return {
        "uniform-1d": GeneratorSpec("uniform1d", c(100_000), seed),
        "exp-1d": GeneratorSpec("exponential1d", c(100_000), seed),
        "sin2-1d": GeneratorSpec("sin2_1d", c(100_000), seed),
        "sparse-grid": GeneratorSpec("grid", 800, seed, 0.2, grid_params),
        "dense-grid": GeneratorSpec("grid", 800, seed, 0.2, dense_params),
        "quadratic-grid": GeneratorSpec("quadratic_grid", 800, seed, 0.2, grid_params),
        "disc": GeneratorSpec("disc", c(4000), seed, 0.2, {"center": (0.0, 0.0), "radius": 20.0}),
        "strip": GeneratorSpec(
            "strip", c(4000), seed, 0.2, {"center": (0.0, 0.0), "width": 100.0, "height": 4.0}
        ),
        "disc3d-uniform": GeneratorSpec(
            "disc3d", c(4000), seed, 0.2, {"radius": 20.0, "z_kind": "uniform"}
        ),
        "disc3d-exp": GeneratorSpec(
            "disc3d", c(4000), seed, 0.2, {"radius": 20.0, "z_kind": "exponential"}
        ),
        "demo-background": GeneratorSpec(
            "disc", c(12000), seed, 0.2, {"center": (0.0, 0.0), "radius": 20.0}
        ),
        "demo-signal": GeneratorSpec(
            "disc", c(12000), seed, 0.2, {"center": (10.0, 4.0), "radius": 8.0}
        ),
    }


PRESET_NAMES = tuple(sorted(_preset_table(0, None)))


def preset_spec(name: str, seed: int, count: int | None = None) -> GeneratorSpec:
    """Look up a named preset, optionally overriding its sample count."""
    table = _preset_table(seed, count)
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    return table[name]
