"""Hermite-Gauss / Laguerre-Gauss initial data and paraxial evolution in z."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grids import (
    SampledEnvelope,
    SpectralAmplitude,
    TransverseGrid,
    check_window,
    forward_transform,
    inverse_transform,
    l2_inner_product,
    spectral_laplacian,
)

__all__ = [
    "ModeSpec",
    "ParaxialSolution",
    "ModeParseError",
    "parse_mode_spec",
    "hermite",
    "assoc_laguerre",
    "make_initial_data",
    "propagate_paraxial",
    "paraxial_inner_product",
    "paraxial_residual_grid",
    "hg_basis",
    "lg_basis",
    "random_paraxial_solution",
]


class ModeParseError(ValueError):
    pass


@dataclass(frozen=True)
class ModeSpec:
    """A single HG(m, n) or LG(l, p) mode of waist ``waist`` on carrier ``carrier``."""

    family: str
    indices: tuple[int, int]
    waist: float
    carrier: float

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in ("hg", "lg"):
            raise ValueError(f"unknown mode family {self.family!r}")
        a, b = (int(i) for i in self.indices)
        if (a, b) != tuple(self.indices):
            raise ValueError(f"mode indices must be integers, got {self.indices!r}")
        if fam == "hg" and (a < 0 or b < 0):
            raise ValueError("HG indices must be non-negative")
        if fam == "lg" and b < 0:
            raise ValueError("LG radial index p must be non-negative")
        if not (self.waist > 0 and np.isfinite(self.waist)):
            raise ValueError(f"waist must be positive, got {self.waist!r}")
        if not (self.carrier > 0 and np.isfinite(self.carrier)):
            raise ValueError(f"carrier must be positive, got {self.carrier!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "indices", (a, b))
        object.__setattr__(self, "waist", float(self.waist))
        object.__setattr__(self, "carrier", float(self.carrier))

    @classmethod
    def hg(cls, m: int, n: int, waist: float = 1.0, carrier: float = 1.0) -> "ModeSpec":
        return cls("hg", (m, n), waist, carrier)

    @classmethod
    def lg(cls, l: int, p: int, waist: float = 1.0, carrier: float = 1.0) -> "ModeSpec":
        return cls("lg", (l, p), waist, carrier)

    @property
    def order(self) -> int:
        a, b = self.indices
        return a + b if self.family == "hg" else abs(a) + 2 * b

    def __str__(self) -> str:
        a, b = self.indices
        return f"{self.family}:{a},{b}:{self.waist!r}:{self.carrier!r}"


def parse_mode_spec(text: str) -> ModeSpec:
    """Parse ``"hg:m,n:W:k"`` or ``"lg:l,p:W:k"``."""
    parts = text.strip().split(":")
    if len(parts) != 4:
        raise ModeParseError(f"expected 'family:i,j:W:k', got {text!r}")
    fam, idx, w, k = parts
    idx_parts = idx.split(",")
    if len(idx_parts) != 2:
        raise ModeParseError(f"expected two comma-separated indices in {text!r}")
    try:
        a, b = (int(s) for s in idx_parts)
        w, k = float(w), float(k)
        return ModeSpec(fam, (a, b), w, k)
    except ValueError as exc:
        raise ModeParseError(f"bad mode string {text!r}: {exc}") from None


def hermite(n: int, x):
    """Physicists' Hermite polynomial H_n(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if n == 0:
        return h_prev
    for j in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * j * h_prev
    return h


def assoc_laguerre(p: int, a: int, x):
    """Associated Laguerre polynomial L_p^a(x) by upward recurrence."""
    x = np.asarray(x, dtype=float)
    l_prev, l = np.ones_like(x), 1.0 + a - x
    if p == 0:
        return l_prev
    for j in range(1, p):
        l_prev, l = l, ((2 * j + 1 + a - x) * l - (j + a) * l_prev) / (j + 1)
    return l


def make_initial_data(spec: ModeSpec, grid: TransverseGrid) -> SampledEnvelope:
    """Unit-norm mode envelope at z = 0.

    Both families share the base profile ``exp(-s^2/2W^2) / (sqrt(pi) W)``; the
    polynomial prefactor carries the normalization that makes the continuum norm 1.
    """
    check_window(grid, spec.waist)
    W = spec.waist
    X, Y = grid.coords()
    xs, ys = X / W, Y / W
    rho2 = xs**2 + ys**2
    base = np.exp(-0.5 * rho2) / (math.sqrt(math.pi) * W)
    a, b = spec.indices
    if spec.family == "hg":
        norm = 1.0 / math.sqrt(2.0**a * math.factorial(a) * 2.0**b * math.factorial(b))
        poly = hermite(a, xs) * hermite(b, ys)
        vals = norm * poly * base
    else:
        l, p = a, b
        al = abs(l)
        norm = math.sqrt(math.factorial(p) / math.factorial(p + al))
        phi = np.arctan2(Y, X)
        radial = rho2 ** (al / 2.0) * assoc_laguerre(p, al, rho2)
        vals = norm * radial * np.exp(1j * l * phi) * base
    return SampledEnvelope(grid, vals, 0.0)


def propagate_paraxial(F: SpectralAmplitude, z: float, k: float) -> SpectralAmplitude:
    """Advance spectral data by ``z`` under the paraxial equation with carrier ``k``."""
    if not k > 0:
        raise ValueError(f"carrier must be positive, got {k!r}")
    if z == 0:
        return F
    phase = np.exp(-1j * F.grid.q_norm**2 * (z / (2.0 * k)))
    return SpectralAmplitude(F.grid, F.values * phase)


@dataclass(frozen=True, eq=False)
class ParaxialSolution:
    """A paraxial wave, stored as its envelope at one station plus its carrier."""

    envelope: SampledEnvelope
    carrier: float

    def __post_init__(self):
        if not self.carrier > 0:
            raise ValueError(f"carrier must be positive, got {self.carrier!r}")

    @classmethod
    def from_mode(cls, spec: ModeSpec, grid: TransverseGrid) -> "ParaxialSolution":
        return cls(make_initial_data(spec, grid), spec.carrier)

    @classmethod
    def from_spectrum(cls, F: SpectralAmplitude, carrier: float, station: float = 0.0):
        """Wrap data ``F`` given at z = 0 as a solution, evaluated at ``station``."""
        Fz = propagate_paraxial(F, station, carrier)
        return cls(inverse_transform(Fz, station), carrier)

    @property
    def grid(self) -> TransverseGrid:
        return self.envelope.grid

    @property
    def station(self) -> float:
        return self.envelope.station

    def spectrum_at(self, z: float) -> SpectralAmplitude:
        F = forward_transform(self.envelope)
        return propagate_paraxial(F, z - self.station, self.carrier)

    def initial_spectrum(self) -> SpectralAmplitude:
        return self.spectrum_at(0.0)

    def at(self, z: float) -> "ParaxialSolution":
        return ParaxialSolution(inverse_transform(self.spectrum_at(z), z), self.carrier)


def paraxial_inner_product(a: ParaxialSolution, b: ParaxialSolution, station=None) -> complex:
    """Spectral-side paraxial product after moving both solutions to a common station."""
    if not np.isclose(a.carrier, b.carrier, rtol=1e-12, atol=0):
        raise ValueError(f"carrier mismatch: {a.carrier!r} vs {b.carrier!r}")
    z = a.station if station is None else station
    return l2_inner_product(a.spectrum_at(z), b.spectrum_at(z))


def paraxial_residual_grid(envs, k: float) -> float:
    """L2 norm of ``(2ik d/dz + laplacian) Xi`` at the middle of three stations.

    The z derivative is a centered difference; transverse derivatives are spectral.
    """
    lo, mid, hi = envs
    if not (lo.grid == mid.grid == hi.grid):
        raise ValueError("stations must share a grid")
    h1, h2 = mid.station - lo.station, hi.station - mid.station
    if h1 <= 0 or not np.isclose(h1, h2, rtol=1e-9, atol=0):
        raise ValueError(f"stations must be increasing and equally spaced, got steps {h1!r}, {h2!r}")
    h = 0.5 * (hi.station - lo.station)
    dz = (hi.values - lo.values) / (2.0 * h)
    res = 2j * k * dz + spectral_laplacian(mid.values, mid.grid)
    return float(np.sqrt(np.sum(np.abs(res) ** 2) * mid.grid.cell_area))


def hg_basis(max_order: int, waist: float = 1.0, carrier: float = 1.0) -> list[ModeSpec]:
    """HG modes with m + n <= max_order, ordered by total order then m."""
    return [ModeSpec.hg(m, N - m, waist, carrier)
            for N in range(max_order + 1) for m in range(N, -1, -1)]


def lg_basis(max_order: int, waist: float = 1.0, carrier: float = 1.0) -> list[ModeSpec]:
    """LG modes with |l| + 2p <= max_order, ordered by order then l."""
    out = []
    for N in range(max_order + 1):
        for l in range(-N, N + 1):
            if (N - abs(l)) % 2 == 0:
                out.append(ModeSpec.lg(l, (N - abs(l)) // 2, waist, carrier))
    return out


def random_paraxial_solution(rng: np.random.Generator, grid: TransverseGrid, carrier: float,
                             n_terms: int = 3, max_order: int = 3, station: float | None = None,
                             waist: float | None = None) -> ParaxialSolution:
    """Random superposition of HG/LG modes with jittered waists, seen at a random station.

    The first term is always a fundamental Gaussian and the sum is displaced by a
    random transverse offset, so two such states are never orthogonal by symmetry.
    """
    w0 = grid.extent / 16.0 if waist is None else waist
    pool = hg_basis(max_order) + lg_basis(max_order)
    vals = np.zeros((grid.n, grid.n), dtype=np.complex128)
    for i in range(n_terms):
        base = pool[0] if i == 0 else pool[rng.integers(len(pool))]
        spec = ModeSpec(base.family, base.indices, w0 * rng.uniform(0.8, 1.2), carrier)
        coef = rng.normal() + 1j * rng.normal()
        vals += coef * make_initial_data(spec, grid).values
    F = forward_transform(SampledEnvelope(grid, vals, 0.0))
    qx, qy = grid.q_mesh()
    dx, dy = rng.uniform(-0.5, 0.5, size=2) * w0
    F = SpectralAmplitude(grid, F.values * np.exp(-1j * (qx * dx + qy * dy)))
    if station is None:
        station = rng.uniform(-1.0, 1.0) * carrier * w0**2
    return ParaxialSolution.from_spectrum(F, carrier, station)
