"""Transverse sampling grids, the continuum-normalized 2D Fourier pair, and L2 products.

Conventions
-----------
Positions are stored centered: sample ``j`` sits at ``x_j = (j - n/2) * dx`` so the
origin is a lattice point.  Spectral arrays are stored in DFT order.  The transform
pair approximates

    F(q)   = (1/2pi) \\int d^2s  Xi(s) exp(-i q.s)
    Xi(s)  = \\int d^2q/(2pi) F(q) exp(+i q.s)

with the scalings chosen so that the position-side and spectral-side Riemann sums
of the L2 product agree exactly (discrete Parseval).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "TransverseGrid",
    "SampledEnvelope",
    "SpectralAmplitude",
    "GridMismatchError",
    "forward_transform",
    "inverse_transform",
    "l2_inner_product",
    "l2_norm",
    "spectral_laplacian",
    "check_window",
    "write_envelope_csv",
    "read_envelope_csv",
]

WINDOW_WAISTS = 8.0


class GridMismatchError(ValueError):
    """Two sampled objects live on different grids or are of different kinds."""


@dataclass(frozen=True)
class TransverseGrid:
    """Square ``n x n`` window of side ``extent`` and its conjugate wave-vector lattice."""

    n: int
    extent: float

    def __post_init__(self):
        n = int(self.n)
        if n != self.n or n < 8 or n & (n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n!r}")
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise ValueError(f"grid extent must be positive and finite, got {self.extent!r}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return self.extent / self.n

    @property
    def q_step(self) -> float:
        return 2.0 * np.pi / self.extent

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def q_cell_area(self) -> float:
        return self.q_step**2

    @cached_property
    def x(self) -> np.ndarray:
        """Centered 1D sample positions."""
        x = (np.arange(self.n) - self.n // 2) * self.spacing
        x.setflags(write=False)
        return x

    @cached_property
    def q(self) -> np.ndarray:
        """1D wave-vector lattice in DFT order."""
        q = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        q.setflags(write=False)
        return q

    @property
    def q_sorted(self) -> np.ndarray:
        """Monotone view of the wave-vector lattice, for reporting."""
        return np.fft.fftshift(self.q)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Position meshes ``(X, Y)``; first array index is x."""
        return np.meshgrid(self.x, self.x, indexing="ij")

    def q_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.q, self.q, indexing="ij")

    @cached_property
    def q_norm(self) -> np.ndarray:
        qx, qy = self.q_mesh()
        qn = np.hypot(qx, qy)
        qn.setflags(write=False)
        return qn


def _frozen_values(values, grid: TransverseGrid) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    if arr.shape != (grid.n, grid.n):
        raise ValueError(f"expected samples of shape {(grid.n, grid.n)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledEnvelope:
    """Complex envelope samples Xi(s, z) at a single longitudinal station."""

    grid: TransverseGrid
    values: np.ndarray
    station: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_values(self.values, self.grid))
        if not np.isfinite(self.station):
            raise ValueError("station must be finite")
        object.__setattr__(self, "station", float(self.station))


@dataclass(frozen=True, eq=False)
class SpectralAmplitude:
    """Complex F(q) samples on the DFT-ordered wave-vector lattice."""

    grid: TransverseGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_values(self.values, self.grid))

    def sorted_values(self) -> np.ndarray:
        return np.fft.fftshift(self.values)


def forward_transform(env: SampledEnvelope) -> SpectralAmplitude:
    g = env.grid
    spec = np.fft.fft2(np.fft.ifftshift(env.values)) * (g.cell_area / (2.0 * np.pi))
    return SpectralAmplitude(g, spec)


def inverse_transform(F: SpectralAmplitude, station: float = 0.0) -> SampledEnvelope:
    g = F.grid
    vals = np.fft.fftshift(np.fft.ifft2(F.values)) * (g.n**2 * g.q_cell_area / (2.0 * np.pi))
    return SampledEnvelope(g, vals, station)


def _raw_inverse(values: np.ndarray, grid: TransverseGrid) -> np.ndarray:
    # batched over leading axes, no validation
    scale = grid.n**2 * grid.q_cell_area / (2.0 * np.pi)
    return np.fft.fftshift(np.fft.ifft2(values), axes=(-2, -1)) * scale


def _raw_forward(values: np.ndarray, grid: TransverseGrid) -> np.ndarray:
    scale = grid.cell_area / (2.0 * np.pi)
    return np.fft.fft2(np.fft.ifftshift(values, axes=(-2, -1))) * scale


def l2_inner_product(a, b) -> complex:
    """Riemann-sum L2 product, conjugate-linear in ``a``."""
    if type(a) is not type(b):
        raise GridMismatchError(f"cannot pair {type(a).__name__} with {type(b).__name__}")
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")
    if isinstance(a, SampledEnvelope):
        measure = a.grid.cell_area
    elif isinstance(a, SpectralAmplitude):
        measure = a.grid.q_cell_area
    else:
        raise TypeError(f"unsupported operand {type(a).__name__}")
    return complex(np.vdot(a.values, b.values) * measure)


def l2_norm(a) -> float:
    return float(np.sqrt(l2_inner_product(a, a).real))


def spectral_laplacian(values: np.ndarray, grid: TransverseGrid) -> np.ndarray:
    """Transverse Laplacian of centered position samples, differentiated spectrally.

    Works on any stack of ``n x n`` slices in the trailing axes.
    """
    spec = _raw_forward(values, grid)
    return _raw_inverse(-(grid.q_norm**2) * spec, grid)


def check_window(grid: TransverseGrid, waist: float) -> bool:
    """Warn when the window is narrower than ``8 * waist``; return whether it is wide enough."""
    ok = grid.extent >= WINDOW_WAISTS * waist * (1 - 1e-12)
    if not ok:
        warnings.warn(
            f"window extent {grid.extent:g} is below {WINDOW_WAISTS:g} x waist ({waist:g}); "
            "periodic wrap-around may exceed test tolerances",
            RuntimeWarning,
            stacklevel=3,
        )
    return ok


def write_envelope_csv(env: SampledEnvelope, path) -> Path:
    """Dump envelope samples as ``ix,iy,x,y,re,im`` rows with 17 significant digits."""
    path = Path(path)
    g = env.grid
    ix, iy = np.meshgrid(np.arange(g.n), np.arange(g.n), indexing="ij")
    X, Y = g.coords()
    with path.open("w", newline="\n") as fh:
        fh.write(f"# n={g.n},extent={g.extent!r},station={env.station!r}\n")
        fh.write("ix,iy,x,y,re,im\n")
        for row in zip(ix.ravel(), iy.ravel(), X.ravel(), Y.ravel(),
                       env.values.real.ravel(), env.values.imag.ravel()):
            fh.write("%d,%d,%.17g,%.17g,%.17g,%.17g\n" % row)
    return path


def read_envelope_csv(path) -> SampledEnvelope:
    path = Path(path)
    with path.open() as fh:
        meta_line = fh.readline()
    meta = dict(item.split("=", 1) for item in meta_line.lstrip("# ").strip().split(","))
    grid = TransverseGrid(int(meta["n"]), float(meta["extent"]))
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2)
    vals = np.zeros((grid.n, grid.n), dtype=np.complex128)
    vals[data[:, 0].astype(int), data[:, 1].astype(int)] = data[:, 4] + 1j * data[:, 5]
    return SampledEnvelope(grid, vals, float(meta["station"]))
