"""Spacetime fields Psi(s, z, t) built from spectral data under a dispersion map."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dispersion import DispersionMap, DomainError, positive_frequency_residual
from .grids import (
    SampledEnvelope,
    SpectralAmplitude,
    TransverseGrid,
    _raw_inverse,
    spectral_laplacian,
    write_envelope_csv,
)

__all__ = [
    "SpacetimeSampling",
    "SpacetimeField",
    "synthesize",
    "synthesize_comb",
    "envelope_substitution",
    "wave_residual_spectral",
    "wave_residual_grid",
    "support_mask",
    "dump_spacetime_field",
    "NEGLIGIBLE",
]

NEGLIGIBLE = 1e-14


def _stations(values, label: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float)).copy()
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{label} stations must be a non-empty 1D list")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{label} stations must be finite")
    if np.any(np.diff(arr) <= 0):
        raise ValueError(f"{label} stations must be strictly increasing")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpacetimeSampling:
    grid: TransverseGrid
    z_stations: np.ndarray
    t_stations: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "z_stations", _stations(self.z_stations, "z"))
        object.__setattr__(self, "t_stations", _stations(self.t_stations, "t"))


@dataclass(frozen=True, eq=False)
class SpacetimeField:
    """Samples indexed ``values[iz, it, ix, iy]``.

    ``time_derivative`` holds d Psi / dt on the same lattice when it was requested
    at synthesis time (computed spectrally, never by differencing).
    """

    sampling: SpacetimeSampling
    values: np.ndarray = field(repr=False)
    carrier: float
    map_name: str
    c: float = 1.0
    exact: bool = True
    time_derivative: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        s = self.sampling
        shape = (s.z_stations.size, s.t_stations.size, s.grid.n, s.grid.n)
        for name in ("values", "time_derivative"):
            arr = getattr(self, name)
            if arr is None:
                continue
            if arr.shape != shape:
                raise ValueError(f"{name} shape {arr.shape} does not match sampling {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
            arr.setflags(write=False)

    @property
    def grid(self) -> TransverseGrid:
        return self.sampling.grid

    def station(self, iz: int, it: int) -> SampledEnvelope:
        return SampledEnvelope(self.grid, self.values[iz, it], self.sampling.z_stations[iz])


def support_mask(F: SpectralAmplitude, m: DispersionMap, k: float) -> np.ndarray:
    """Lattice points where ``m`` is defined; raises if F has weight outside them."""
    qn = F.grid.q_norm
    inside = m.in_domain(qn, k)
    if not np.all(inside):
        mag = np.abs(F.values)
        peak = mag.max()
        offending = (~inside) & (mag > NEGLIGIBLE * peak)
        if np.any(offending):
            shell = qn[offending]
            raise DomainError(
                f"map {m.name!r} is undefined on the occupied shell "
                f"|q| in [{shell.min():.6g}, {shell.max():.6g}] at k = {k:g}"
            )
    return inside


def _phase_stack(F: SpectralAmplitude, k: float, m: DispersionMap, sampling: SpacetimeSampling,
                 time_derivative: bool):
    inside = support_mask(F, m, k)
    qn = F.grid.q_norm[inside]
    kap = m.kappa(qn, k)
    om = m.omega(qn, k)
    z = sampling.z_stations[:, None, None]
    t = sampling.t_stations[None, :, None]
    phase = np.exp(1j * (kap * z - om * t)) * F.values[inside]
    n = F.grid.n
    spec = np.zeros((z.shape[0], t.shape[1], n, n), dtype=np.complex128)
    spec[:, :, inside] = phase
    dspec = None
    if time_derivative:
        dspec = np.zeros_like(spec)
        dspec[:, :, inside] = -1j * om * phase
    return spec, dspec


def synthesize(F: SpectralAmplitude, k: float, m: DispersionMap, sampling: SpacetimeSampling,
               time_derivative: bool = False) -> SpacetimeField:
    """Psi(s,z,t) = inverse transform of F(q) exp(i kappa z - i omega t) at each (z, t)."""
    if F.grid != sampling.grid:
        raise ValueError("spectral data and sampling must share a grid")
    spec, dspec = _phase_stack(F, k, m, sampling, time_derivative)
    vals = _raw_inverse(spec, F.grid)
    dvals = None if dspec is None else _raw_inverse(dspec, F.grid)
    return SpacetimeField(sampling, vals, float(k), m.name, m.c, m.exact, dvals)


def synthesize_comb(F_of_k, k_values, dk: float, m: DispersionMap, sampling: SpacetimeSampling,
                    time_derivative: bool = False) -> SpacetimeField:
    """Superpose carriers with quadrature weight ``dk``: sum_k dk * Psi_k(s, z, t)."""
    k_values = np.asarray(k_values, dtype=float)
    if len(F_of_k) != k_values.size:
        raise ValueError("need one spectral amplitude per carrier")
    grid = sampling.grid
    shape = (sampling.z_stations.size, sampling.t_stations.size, grid.n, grid.n)
    spec = np.zeros(shape, dtype=np.complex128)
    dspec = np.zeros(shape, dtype=np.complex128) if time_derivative else None
    for F, k in zip(F_of_k, k_values):
        if F.grid != grid:
            raise ValueError("spectral data and sampling must share a grid")
        s, d = _phase_stack(F, k, m, sampling, time_derivative)
        spec += dk * s
        if time_derivative:
            dspec += dk * d
    vals = _raw_inverse(spec, grid)
    dvals = None if dspec is None else _raw_inverse(dspec, grid)
    centre = float(k_values[k_values.size // 2])
    return SpacetimeField(sampling, vals, centre, m.name, m.c, m.exact, dvals)


def envelope_substitution(F: SpectralAmplitude, k: float, sampling: SpacetimeSampling,
                          kind: str, c: float = 1.0) -> SpacetimeField:
    """Closed-form modulated plane waves built from the paraxial envelope Xi of F.

    ``kind="pa"``: Xi(s, z) e^{ik(z-ct)};  ``kind="hc"``: Xi(s, (z+ct)/2) e^{ik(z-ct)}.
    """
    if kind not in ("pa", "hc"):
        raise ValueError(f"kind must be 'pa' or 'hc', got {kind!r}")
    z = sampling.z_stations[:, None]
    t = sampling.t_stations[None, :]
    zeff = np.broadcast_to(z if kind == "pa" else 0.5 * (z + c * t), (z.shape[0], t.shape[1]))
    q2 = F.grid.q_norm**2
    prop = np.exp(-1j * q2 * (zeff[..., None, None] / (2.0 * k))) * F.values
    xi = _raw_inverse(prop, F.grid)
    carrier = np.exp(1j * k * (z - c * t))
    return SpacetimeField(sampling, xi * carrier[..., None, None], float(k), kind, c, kind == "hc")


def wave_residual_spectral(m: DispersionMap, q, k):
    """Eigenvalue of the d'Alembertian on one Fourier component, in units of 1/length^2.

    Box e^{i(q.s + kappa z - omega t)} = (omega^2/c^2 - |q|^2 - kappa^2) e^{...}, which is
    the same number as :func:`~henochrome.dispersion.positive_frequency_residual`.
    """
    return positive_frequency_residual(m, q, k)


def _uniform_step(stations: np.ndarray, label: str) -> float:
    if stations.size < 3:
        raise ValueError(f"need at least 3 {label} stations, got {stations.size}")
    steps = np.diff(stations)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0):
        raise ValueError(f"{label} stations must be uniformly spaced")
    return float(steps.mean())


def wave_residual_grid(fld: SpacetimeField) -> float:
    """RMS over interior (z, t) stations of the transverse L2 norm of Box Psi.

    Transverse derivatives are spectral; z and t derivatives are centered
    second differences, so the result is O(h^2) away from the continuum value.
    """
    s = fld.sampling
    hz = _uniform_step(s.z_stations, "z")
    ht = _uniform_step(s.t_stations, "t")
    v = fld.values
    inner = v[1:-1, 1:-1]
    d2z = (v[2:, 1:-1] - 2.0 * inner + v[:-2, 1:-1]) / hz**2
    d2t = (v[1:-1, 2:] - 2.0 * inner + v[1:-1, :-2]) / ht**2
    box = spectral_laplacian(inner, fld.grid) + d2z - d2t / fld.c**2
    per_station = np.sum(np.abs(box) ** 2, axis=(-2, -1)) * fld.grid.cell_area
    return float(np.sqrt(per_station.mean()))


def dump_spacetime_field(fld: SpacetimeField, out_dir) -> Path:
    """One envelope CSV per (z, t) station plus ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    s = fld.sampling
    files = []
    for iz, z in enumerate(s.z_stations):
        for it, t in enumerate(s.t_stations):
            name = f"field_z{iz:03d}_t{it:03d}.csv"
            write_envelope_csv(SampledEnvelope(s.grid, fld.values[iz, it], z), out / name)
            files.append({"iz": iz, "it": it, "z": float(z), "t": float(t), "file": name})
    manifest = {
        "carrier": fld.carrier,
        "map": fld.map_name,
        "c": fld.c,
        "grid": {"n": s.grid.n, "extent": s.grid.extent},
        "z_stations": [float(z) for z in s.z_stations],
        "t_stations": [float(t) for t in s.t_stations],
        "stations": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
