"""Null-coordinate decomposition of henochromatic superpositions, and pulse comparison.

With u = z - ct and v = (z + ct)/2 a henochromatic superposition reads

    Psi(s, v, u) = sum_k dk e^{iku} Xi(s, v; k),

where each Xi(., v; k) is a paraxial solution in v.  Synthesis and decomposition
here are exact inverses on a carrier comb when u covers one period 2 pi / dk.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dispersion import DispersionMap
from .grids import SpectralAmplitude, TransverseGrid, _raw_forward, _raw_inverse, forward_transform
from .modes import ModeSpec, make_initial_data
from .quantum_ip import CarrierComb
from .synthesis import SpacetimeSampling, envelope_substitution

__all__ = [
    "NullSampling",
    "NullField",
    "PulseSpec",
    "PulseReport",
    "synthesize_multicarrier",
    "decompose_henochromatic",
    "period_sampling",
    "pulse_comb",
    "pulse_spectra",
    "discrepancy_curve",
    "pulse_compare",
    "PULSE_CARRIERS",
    "SUPPORT_THRESHOLD",
]

PULSE_CARRIERS = 33
PULSE_HALF_SPAN = 4.0
SUPPORT_THRESHOLD = 1e-3


def _finite_1d(values, label):
    arr = np.atleast_1d(np.asarray(values, dtype=float)).copy()
    if arr.ndim != 1 or arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{label} must be a non-empty finite 1D list")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NullSampling:
    grid: TransverseGrid
    u_values: np.ndarray
    v_values: np.ndarray

    def __post_init__(self):
        u = _finite_1d(self.u_values, "u_values")
        if u.size > 1:
            du = np.diff(u)
            if np.any(du <= 0) or not np.allclose(du, du[0], rtol=1e-9, atol=0):
                raise ValueError("u samples must be increasing and uniform")
        object.__setattr__(self, "u_values", u)
        object.__setattr__(self, "v_values", _finite_1d(self.v_values, "v_values"))


@dataclass(frozen=True, eq=False)
class NullField:
    """Henochromatic superposition sampled as ``values[iv, iu, ix, iy]``."""

    sampling: NullSampling
    values: np.ndarray = field(repr=False)
    map_name: str = "hc"

    def __post_init__(self):
        s = self.sampling
        shape = (s.v_values.size, s.u_values.size, s.grid.n, s.grid.n)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match sampling {shape}")
        self.values.setflags(write=False)


def _require_henochromatic(m: DispersionMap):
    if m.name != "hc":
        raise ValueError(f"null-coordinate synthesis holds only for the henochromatic map, got {m.name!r}")


def synthesize_multicarrier(F_of_k, m: DispersionMap, sampling: NullSampling,
                            comb: CarrierComb) -> NullField:
    """sum_k dk e^{iku} Xi(s, v; k) with Xi(., v; k) the paraxial evolution of F(.; k) to v."""
    _require_henochromatic(m)
    if len(F_of_k) != len(comb):
        raise ValueError("need one spectral amplitude per carrier")
    grid = sampling.grid
    q2 = grid.q_norm**2
    v = sampling.v_values
    u = sampling.u_values
    n = grid.n
    out = np.zeros((v.size, u.size, n, n), dtype=np.complex128)
    for F, k in zip(F_of_k, comb.k_values):
        if F.grid != grid:
            raise ValueError("spectral data and sampling must share a grid")
        xi = _raw_inverse(np.exp(-1j * q2 * (v[:, None, None] / (2.0 * k))) * F.values, grid)
        out += comb.dk * np.exp(1j * k * u)[None, :, None, None] * xi[:, None]
    return NullField(sampling, out, m.name)


def period_sampling(grid: TransverseGrid, comb: CarrierComb, v_values, n_u: int | None = None,
                    u0: float = 0.0) -> NullSampling:
    """u samples covering exactly one beat period 2 pi / dk."""
    n_u = len(comb) if n_u is None else n_u
    period = 2.0 * np.pi / comb.dk
    return NullSampling(grid, u0 + period * np.arange(n_u) / n_u, v_values)


def decompose_henochromatic(fld: NullField, comb: CarrierComb, v_index: int = 0) -> list[SpectralAmplitude]:
    """Recover F(q; k) for every comb carrier from samples over one u period at fixed v.

    A discrete transform in u isolates Xi(s, v; k) per carrier; each is then
    evolved back from v to 0 with the paraxial propagator.
    """
    s = fld.sampling
    u = s.u_values
    n_u = u.size
    if n_u < len(comb):
        raise ValueError(f"need at least {len(comb)} u samples, got {n_u}")
    period = 2.0 * np.pi / comb.dk
    du = period / n_u
    if n_u > 1 and not np.isclose(u[1] - u[0], du, rtol=1e-9, atol=0):
        raise ValueError(f"u samples must cover one period 2pi/dk = {period:g} uniformly")
    v = float(s.v_values[v_index])
    grid = s.grid
    kernel = np.exp(-1j * np.outer(comb.k_values, u)) / (n_u * comb.dk)
    samples = fld.values[v_index].reshape(n_u, -1)
    xi = (kernel @ samples).reshape(len(comb), grid.n, grid.n)
    spec = _raw_forward(xi, grid)
    q2 = grid.q_norm**2
    out = []
    for F, k in zip(spec, comb.k_values):
        out.append(SpectralAmplitude(grid, F * np.exp(1j * q2 * (v / (2.0 * k)))))
    return out


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian-in-k pulse of width ``dk_sigma`` around ``k0`` with a fixed transverse mode."""

    k0: float
    dk_sigma: float
    base_mode: ModeSpec

    def __post_init__(self):
        if not self.k0 > 0:
            raise ValueError("k0 must be positive")
        if not 0 < self.dk_sigma < self.k0 / 10:
            raise ValueError(f"dk_sigma must lie in (0, k0/10), got {self.dk_sigma!r}")
        if self.k0 - PULSE_HALF_SPAN * self.dk_sigma <= 0:
            raise ValueError("comb would include non-positive carriers")


def pulse_comb(spec: PulseSpec, count: int = PULSE_CARRIERS) -> CarrierComb:
    return CarrierComb.around(spec.k0, PULSE_HALF_SPAN * spec.dk_sigma, count)


def pulse_spectra(spec: PulseSpec, grid: TransverseGrid, comb: CarrierComb | None = None):
    """Per-carrier amplitudes g(k) F0(q) with g a unit-peak Gaussian in k - k0."""
    comb = pulse_comb(spec) if comb is None else comb
    F0 = forward_transform(make_initial_data(spec.base_mode, grid))
    g = np.exp(-0.5 * ((comb.k_values - spec.k0) / spec.dk_sigma) ** 2)
    return [SpectralAmplitude(grid, gi * F0.values) for gi in g], comb


def discrepancy_curve(F: SpectralAmplitude, k: float, u_values) -> np.ndarray:
    """Normalized L2 gap between Xi(., z - u/2) and Xi(., z) at fixed u = z - ct.

    The gap does not depend on z: it equals ||(e^{i q^2 u / 4k} - 1) F|| / ||F||.
    """
    u = np.asarray(u_values, dtype=float)
    q2 = F.grid.q_norm**2
    w = np.abs(F.values) ** 2
    gap = np.abs(np.exp(1j * q2[None] * (u[:, None, None] / (4.0 * k))) - 1.0) ** 2
    return np.sqrt(np.sum(gap * w, axis=(-2, -1)) / np.sum(w))


@dataclass
class PulseReport:
    spec: PulseSpec
    null_plane_residual: float
    t_values: np.ndarray
    support_discrepancy: np.ndarray
    u_values: np.ndarray
    discrepancy: np.ndarray
    station_discrepancy: np.ndarray = field(repr=False)
    paraxial_regime: bool = True

    def to_dict(self) -> dict:
        return {
            "k0": self.spec.k0,
            "dk_sigma": self.spec.dk_sigma,
            "mode": str(self.spec.base_mode),
            "null_plane_residual": self.null_plane_residual,
            "paraxial_regime": self.paraxial_regime,
            "support_discrepancy": [{"t": float(t), "value": float(d)}
                                    for t, d in zip(self.t_values, self.support_discrepancy)],
            "discrepancy_curve": [{"u": float(u), "value": float(d)}
                                  for u, d in zip(self.u_values, self.discrepancy)],
        }

    def write(self, out_dir, stem: str = "pulse") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jpath = out / f"{stem}.json"
        jpath.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        cpath = out / f"{stem}_discrepancy.csv"
        with cpath.open("w") as fh:
            fh.write("u,value\n")
            for u, d in zip(self.u_values, self.discrepancy):
                fh.write("%.17g,%.17g\n" % (u, d))
        return jpath, cpath


def pulse_compare(spec: PulseSpec, sampling: SpacetimeSampling, c: float = 1.0,
                  u_values=None) -> PulseReport:
    """Compare Xi(s, (z+ct)/2) e^{ik(z-ct)} with Xi(s, z) e^{ik(z-ct)} at k = k0.

    * null-plane residual: max pointwise gap at stations with ct == z (both fields
      are evaluated there too, even if absent from ``sampling``);
    * support discrepancy per t: ||Psi_hc - Psi_pa|| / ||Psi_pa|| over the points where
      the pulse-enveloped paraxial field exceeds 1e-3 of its peak;
    * discrepancy curve against u = z - ct.
    """
    k = spec.k0
    grid = sampling.grid
    F = forward_transform(make_initial_data(spec.base_mode, grid))

    q = grid.q_norm
    power = np.abs(F.values) ** 2
    paraxial = bool(np.sum(power[q >= 0.2 * k]) <= 1e-6 * np.sum(power))
    if not paraxial:
        warnings.warn(f"base mode {spec.base_mode} has spectral weight beyond |q| = 0.2 k0",
                      RuntimeWarning, stacklevel=2)

    z = sampling.z_stations
    null = SpacetimeSampling(grid, z, z / c)
    pa_null = envelope_substitution(F, k, null, "pa", c).values
    hc_null = envelope_substitution(F, k, null, "hc", c).values
    idx = np.arange(z.size)
    null_res = float(np.max(np.abs(hc_null[idx, idx] - pa_null[idx, idx])))

    pa = envelope_substitution(F, k, sampling, "pa", c).values
    hc = envelope_substitution(F, k, sampling, "hc", c).values
    u_grid = z[:, None] - c * sampling.t_stations[None, :]
    envelope = np.exp(-0.5 * (spec.dk_sigma * u_grid) ** 2)[..., None, None]
    mag = np.abs(pa) * envelope
    support = mag >= SUPPORT_THRESHOLD * mag.max()
    diff2 = np.where(support, np.abs((hc - pa) * envelope) ** 2, 0.0)
    ref2 = np.where(support, mag**2, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        per_t = np.sqrt(diff2.sum(axis=(0, 2, 3)) / ref2.sum(axis=(0, 2, 3)))
        per_station = np.sqrt(np.sum(np.abs(hc - pa) ** 2, axis=(-2, -1))
                              / np.sum(np.abs(pa) ** 2, axis=(-2, -1)))

    if u_values is None:
        u_values = np.linspace(-2.0, 2.0, 41) / spec.dk_sigma
    u_values = np.asarray(u_values, dtype=float)
    curve = discrepancy_curve(F, k, u_values)
    return PulseReport(spec, null_res, sampling.t_stations.copy(), per_t, u_values, curve,
                       per_station, paraxial)
