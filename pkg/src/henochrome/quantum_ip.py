"""Relativistic single-particle inner product, in spectral and in field (slice) form.

The continuum carrier integral is replaced by a uniform comb of carriers; the
delta function delta(k1 - k2) becomes a Kronecker delta with delta(0) -> 1/dk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import DispersionMap, reference_weight, unitarity_weight, DomainError
from .grids import SpectralAmplitude
from .synthesis import SpacetimeField, support_mask

__all__ = [
    "CarrierComb",
    "PhysicalConstants",
    "inner_product_spectral",
    "comb_inner_product_spectral",
    "inner_product_slice",
    "plane_wave_norm",
    "rho_invariance_check",
    "unitarity_defect",
    "defect_report",
]


@dataclass(frozen=True, eq=False)
class CarrierComb:
    """Uniform set of positive carrier wavenumbers with spacing ``dk``."""

    k_values: np.ndarray
    dk: float

    def __post_init__(self):
        k = np.atleast_1d(np.asarray(self.k_values, dtype=float)).copy()
        if k.ndim != 1 or k.size == 0:
            raise ValueError("comb needs at least one carrier")
        if np.any(k <= 0) or not np.all(np.isfinite(k)):
            raise ValueError("carriers must be positive and finite")
        if not self.dk > 0:
            raise ValueError(f"dk must be positive, got {self.dk!r}")
        if k.size > 1:
            steps = np.diff(k)
            if np.any(np.abs(steps - self.dk) > 1e-12 * max(self.dk, k.max())):
                raise ValueError("carriers must be uniformly spaced by dk")
        k.setflags(write=False)
        object.__setattr__(self, "k_values", k)
        object.__setattr__(self, "dk", float(self.dk))

    @classmethod
    def from_range(cls, k_min: float, k_max: float, count: int, dk: float | None = None) -> "CarrierComb":
        """``count`` carriers from ``k_min`` to ``k_max`` inclusive.

        A single-carrier comb has no natural spacing, so ``dk`` must then be given.
        """
        if count < 1:
            raise ValueError("count must be >= 1")
        if count == 1:
            if dk is None:
                raise ValueError("a single-carrier comb needs an explicit dk")
            return cls(np.array([k_min]), dk)
        if not k_max > k_min:
            raise ValueError("k_max must exceed k_min")
        ks = np.linspace(k_min, k_max, count)
        return cls(ks, (k_max - k_min) / (count - 1))

    @classmethod
    def around(cls, k0: float, half_width: float, count: int) -> "CarrierComb":
        return cls.from_range(k0 - half_width, k0 + half_width, count)

    def __len__(self) -> int:
        return self.k_values.size

    def index(self, k: float) -> int:
        hit = np.flatnonzero(np.abs(self.k_values - k) <= 1e-12 * abs(k))
        if hit.size != 1:
            raise ValueError(f"carrier {k!r} is not on the comb")
        return int(hit[0])


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 1.0
    hbar: float = 1.0
    rho: str = "unit"

    def __post_init__(self):
        if not (self.c > 0 and self.hbar > 0):
            raise ValueError("c and hbar must be positive")
        if self.rho not in ("unit", "inverse_2k"):
            raise ValueError(f"rho must be 'unit' or 'inverse_2k', got {self.rho!r}")

    def density(self, kmag):
        kmag = np.asarray(kmag, dtype=float)
        return np.ones_like(kmag) if self.rho == "unit" else 1.0 / (2.0 * kmag)


def _check_c(m: DispersionMap, consts: PhysicalConstants):
    if not np.isclose(m.c, consts.c, rtol=1e-15):
        raise ValueError(f"map {m.name!r} uses c = {m.c!r} but constants use c = {consts.c!r}")


def _joint_support(F1: SpectralAmplitude, F2: SpectralAmplitude, m: DispersionMap, k: float):
    return support_mask(F1, m, k) & support_mask(F2, m, k)


def inner_product_spectral(F1: SpectralAmplitude, k1: float, map1: DispersionMap,
                           F2: SpectralAmplitude, k2: float, map2: DispersionMap,
                           comb: CarrierComb, consts: PhysicalConstants = PhysicalConstants()) -> complex:
    """<Psi_1|Psi_2> for single-carrier fields synthesized from F1, F2.

    Zero across distinct carriers; otherwise
    (4 pi / (hbar c^2 dk)) * sum_q conj(F1) F2 omega/|d kappa/dk| * dq^2.
    """
    if map1.name != map2.name:
        raise ValueError(f"cross-map products are not defined ({map1.name!r} vs {map2.name!r})")
    if F1.grid != F2.grid:
        raise ValueError("spectral data must share a grid")
    _check_c(map1, consts)
    i1, i2 = comb.index(k1), comb.index(k2)
    if i1 != i2:
        return 0j
    k = float(comb.k_values[i1])
    inside = _joint_support(F1, F2, map1, k)
    w = unitarity_weight(map1, F1.grid.q_norm[inside], k)
    integral = np.sum(np.conj(F1.values[inside]) * F2.values[inside] * w) * F1.grid.q_cell_area
    return complex(4.0 * np.pi / (consts.hbar * consts.c**2 * comb.dk) * integral)


def comb_inner_product_spectral(F1_of_k, F2_of_k, comb: CarrierComb, m: DispersionMap,
                                consts: PhysicalConstants = PhysicalConstants()) -> complex:
    """Product of two comb superpositions ``sum_k dk Psi_k`` (see ``synthesize_comb``)."""
    if len(F1_of_k) != len(comb) or len(F2_of_k) != len(comb):
        raise ValueError("need one spectral amplitude per carrier")
    total = 0j
    for F1, F2, k in zip(F1_of_k, F2_of_k, comb.k_values):
        total += comb.dk**2 * inner_product_spectral(F1, k, m, F2, k, m, comb, consts)
    return total


def inner_product_slice(psi1: SpacetimeField, psi2: SpacetimeField,
                        consts: PhysicalConstants = PhysicalConstants(), t_index: int = 0) -> complex:
    """(i / hbar c^2) int d^3r (conj(Psi1) dPsi2/dt - conj(dPsi1/dt) Psi2) on one time slice.

    The z stations of the fields are the longitudinal extent of the box; the sum is a
    plain Riemann sum with cell dx^2 dz.
    """
    for p in (psi1, psi2):
        if not p.exact:
            raise ValueError(f"map {p.map_name!r} does not give positive-frequency solutions")
        if p.time_derivative is None:
            raise ValueError("fields must be synthesized with time_derivative=True")
    s1, s2 = psi1.sampling, psi2.sampling
    if (s1.grid != s2.grid or not np.array_equal(s1.z_stations, s2.z_stations)
            or not np.array_equal(s1.t_stations, s2.t_stations)):
        raise ValueError("fields must share their sampling")
    z = s1.z_stations
    if z.size < 2:
        raise ValueError("need at least two z stations")
    dz = np.diff(z)
    if not np.allclose(dz, dz[0], rtol=1e-9, atol=0):
        raise ValueError("z stations must be uniform")
    a, da = psi1.values[:, t_index], psi1.time_derivative[:, t_index]
    b, db = psi2.values[:, t_index], psi2.time_derivative[:, t_index]
    integrand = np.vdot(a, db) - np.vdot(da, b)
    cell = s1.grid.cell_area * float(dz.mean())
    return complex(1j / (consts.hbar * consts.c**2) * integrand * cell)


def plane_wave_norm(F: SpectralAmplitude, k: float, m: DispersionMap, comb: CarrierComb,
                    consts: PhysicalConstants) -> float:
    """(1/hbar c) int d^3K rho(K) |A(K)|^2 for the plane-wave amplitude of a single-carrier field.

    The amplitude lives on the surface K = (q, kappa(q, k)); matching the synthesized
    field to the plane-wave expansion with density rho gives
    A = F / (2 pi |d kappa/dk|) * sqrt(2 (2 pi)^3 |K| / rho(K)), and d^3K = |d kappa/dk| d^2q dk.
    """
    comb.index(k)
    inside = support_mask(F, m, k)
    qn = F.grid.q_norm[inside]
    dkap = np.abs(m.dkappa_dk(qn, k))
    kmag = np.hypot(qn, m.kappa(qn, k))
    rho = consts.density(kmag)
    amp = F.values[inside] / (2.0 * np.pi * dkap) * np.sqrt(2.0 * (2.0 * np.pi) ** 3 * kmag / rho)
    measure = dkap * F.grid.q_cell_area / comb.dk
    return float(np.sum(rho * np.abs(amp) ** 2 * measure) / (consts.hbar * consts.c))


def rho_invariance_check(F: SpectralAmplitude, k: float, m: DispersionMap, comb: CarrierComb,
                         consts: PhysicalConstants = PhysicalConstants()) -> float:
    """Relative difference of the plane-wave norm under rho = 1 and rho = 1/2|K|."""
    if not m.exact:
        raise ValueError(f"map {m.name!r} is not an exact-solution map")
    a = plane_wave_norm(F, k, m, comb, PhysicalConstants(consts.c, consts.hbar, "unit"))
    b = plane_wave_norm(F, k, m, comb, PhysicalConstants(consts.c, consts.hbar, "inverse_2k"))
    return abs(a - b) / abs(a)


def _sweep(k: float, q_max: float, n: int = 200) -> np.ndarray:
    return np.geomspace(1e-4 * k, q_max, n)


def unitarity_defect(m: DispersionMap, k: float, q_max: float, n: int = 200) -> float:
    """sup over a log sweep q in [1e-4 k, q_max] of |weight(q)/weight(0) - 1|."""
    w = unitarity_weight(m, _sweep(k, q_max, n), k)
    return float(np.max(np.abs(w / reference_weight(m, k) - 1.0)))


def defect_report(m: DispersionMap, k: float, q_max: float, n: int = 200) -> dict:
    """Defect sweep as ``{map, k, q_max, defect, weight_samples: [{q, weight}]}``.

    Sweep points outside the map's domain carry ``weight: null`` and an ``error`` tag;
    the defect is taken over the remaining points.
    """
    qs = _sweep(k, q_max, n)
    inside = m.in_domain(qs, k)
    samples = []
    w_ref = reference_weight(m, k)
    defect = 0.0
    for q, ok in zip(qs, inside):
        if not ok:
            samples.append({"q": float(q), "weight": None, "error": "domain"})
            continue
        try:
            w = float(unitarity_weight(m, q, k))
        except (DomainError, ArithmeticError):
            samples.append({"q": float(q), "weight": None, "error": "singular"})
            continue
        samples.append({"q": float(q), "weight": w})
        defect = max(defect, abs(w / w_ref - 1.0))
    return {
        "map": m.name,
        "k": float(k),
        "q_max": float(q_max),
        "defect": float(defect),
        "domain_errors": int(np.sum(~inside)),
        "weight_samples": samples,
    }
