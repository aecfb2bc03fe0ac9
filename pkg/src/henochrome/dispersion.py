"""Candidate maps (kappa(q, k), omega(q, k)) from beam modes to spacetime fields.

All functions take ``q`` as the transverse wave-number magnitude ``|q|``; use
:meth:`DispersionMap.at_vector` for 2-vectors.  ``omega`` is an angular frequency,
i.e. ``c`` times the wavenumber-valued expressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "DispersionMap",
    "DomainError",
    "SingularWeightError",
    "MapParseError",
    "UniquenessReport",
    "builtin_map",
    "family_map",
    "eta_map",
    "parse_map_string",
    "positive_frequency_residual",
    "unitarity_weight",
    "reference_weight",
    "weight_defect",
    "consistency_residual",
    "uniqueness_sweep",
    "HENOCHROMATIC_ALPHA",
    "HENOCHROMATIC_BETA",
]

HENOCHROMATIC_ALPHA = math.log(2.0)
HENOCHROMATIC_BETA = 1.0
FD_STEP = 1e-6


class DomainError(ValueError):
    """Map evaluated outside the (q, k) region where it is defined."""


class SingularWeightError(ArithmeticError):
    """d kappa / d k vanishes, so the unitarity weight is undefined."""


class MapParseError(ValueError):
    pass


def _everywhere(q, k):
    return np.ones(np.broadcast(q, k).shape, dtype=bool)


@dataclass(frozen=True, eq=False)
class DispersionMap:
    """One beam-mode -> spacetime-field mapping.

    ``omega_fn`` returns omega / c; ``dkappa_fn`` may be ``None``, in which case
    d kappa / d k falls back to a centered difference of step ``1e-6 * k``.
    ``exact`` records whether synthesized fields solve the wave equation exactly.
    """

    name: str
    kappa_fn: Callable = field(repr=False)
    omega_fn: Callable = field(repr=False)
    dkappa_fn: Callable | None = field(default=None, repr=False)
    domain_fn: Callable = field(default=_everywhere, repr=False)
    c: float = 1.0
    exact: bool = True

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")

    def in_domain(self, q, k) -> np.ndarray:
        q, k = np.asarray(q, dtype=float), np.asarray(k, dtype=float)
        return np.asarray(self.domain_fn(q, k)) & (k > 0) & (q >= 0)

    def _checked(self, q, k):
        q, k = np.asarray(q, dtype=float), np.asarray(k, dtype=float)
        ok = self.in_domain(q, k)
        if not np.all(ok):
            qb, kb = np.broadcast_arrays(q, k)
            bad = qb[~ok]
            raise DomainError(
                f"map {self.name!r} undefined at |q| = {bad.min():.6g}"
                f"{'' if bad.size == 1 else f'..{bad.max():.6g}'} (k = {kb[~ok].min():.6g})"
            )
        return q, k

    def kappa(self, q, k):
        q, k = self._checked(q, k)
        return self.kappa_fn(q, k)

    def omega(self, q, k):
        q, k = self._checked(q, k)
        return self.c * self.omega_fn(q, k)

    def dkappa_dk(self, q, k):
        q, k = self._checked(q, k)
        if self.dkappa_fn is not None:
            return self.dkappa_fn(q, k)
        h = FD_STEP * k
        return (self.kappa_fn(q, k + h) - self.kappa_fn(q, k - h)) / (2.0 * h)

    def at_vector(self, qvec, k):
        """``(kappa, omega)`` for transverse 2-vectors stacked on the last axis."""
        qvec = np.asarray(qvec, dtype=float)
        qn = np.hypot(qvec[..., 0], qvec[..., 1])
        return self.kappa(qn, k), self.omega(qn, k)

    def with_c(self, c: float) -> "DispersionMap":
        return DispersionMap(self.name, self.kappa_fn, self.omega_fn, self.dkappa_fn,
                             self.domain_fn, c, self.exact)


def builtin_map(which: str, c: float = 1.0) -> DispersionMap:
    """The four literature candidates: ``paraxial``, ``monochromatic``,
    ``initially_paraxial``, ``henochromatic`` (or their short names)."""
    key = _ALIASES.get(which, which)
    if key == "pa":
        return DispersionMap(
            "pa",
            lambda q, k: k - q**2 / (2 * k),
            lambda q, k: k + 0 * q,
            lambda q, k: 1 + q**2 / (2 * k**2),
            c=c,
            exact=False,
        )
    if key == "mc":
        return DispersionMap(
            "mc",
            lambda q, k: np.sqrt(k**2 - q**2),
            lambda q, k: k + 0 * q,
            lambda q, k: k / np.sqrt(k**2 - q**2),
            # evanescent branch deliberately excluded
            lambda q, k: q < k,
            c=c,
        )
    if key == "ip":
        return DispersionMap(
            "ip",
            lambda q, k: k - q**2 / (2 * k),
            lambda q, k: np.sqrt(k**2 + q**4 / (4 * k**2)),
            lambda q, k: 1 + q**2 / (2 * k**2),
            c=c,
        )
    if key == "hc":
        return DispersionMap(
            "hc",
            lambda q, k: k - q**2 / (4 * k),
            lambda q, k: k + q**2 / (4 * k),
            lambda q, k: 1 + q**2 / (4 * k**2),
            c=c,
        )
    raise MapParseError(f"unknown builtin map {which!r}")


_ALIASES = {
    "paraxial": "pa",
    "monochromatic": "mc",
    "initially_paraxial": "ip",
    "henochromatic": "hc",
}


def family_map(alpha: float, beta: float, c: float = 1.0) -> DispersionMap:
    """The unitary two-parameter family obtained from eta(r) = alpha' - beta ln r.

    kappa = e^a k^b q^(1-b) / 2 - e^-a q^(1+b) / (2 k^b), omega/c the same with a plus.
    """
    if beta == 0 or not np.isfinite(beta) or not np.isfinite(alpha):
        raise ValueError(f"family map needs finite alpha and nonzero beta, got ({alpha!r}, {beta!r})")
    ea, eb = math.exp(alpha) / 2.0, math.exp(-alpha) / 2.0

    def lead(q, k):
        return ea * k**beta * q ** (1.0 - beta)

    def tail(q, k):
        return eb * q ** (1.0 + beta) / k**beta

    # both powers of q stay finite at q = 0 only when |beta| <= 1
    if abs(beta) <= 1:
        domain = _everywhere
    else:
        def domain(q, k):
            return q > 0

    return DispersionMap(
        f"family:{alpha!r},{beta!r}",
        lambda q, k: lead(q, k) - tail(q, k),
        lambda q, k: lead(q, k) + tail(q, k),
        lambda q, k: (beta / k) * (lead(q, k) + tail(q, k)),
        domain,
        c=c,
    )


def eta_map(eta: Callable, name: str = "eta", c: float = 1.0) -> DispersionMap:
    """kappa = |q| sinh eta(|q|/k), omega = c |q| cosh eta(|q|/k); defined for q > 0."""
    return DispersionMap(
        name,
        lambda q, k: q * np.sinh(eta(q / k)),
        lambda q, k: q * np.cosh(eta(q / k)),
        None,
        lambda q, k: q > 0,
        c=c,
    )


def parse_map_string(text: str, c: float = 1.0) -> DispersionMap:
    """``pa``, ``mc``, ``ip``, ``hc`` or ``family:alpha,beta``."""
    text = text.strip()
    if text.startswith("family:"):
        try:
            a, b = (float(s) for s in text[len("family:"):].split(","))
        except ValueError:
            raise MapParseError(f"expected 'family:alpha,beta', got {text!r}") from None
        try:
            return family_map(a, b, c)
        except ValueError as exc:
            raise MapParseError(str(exc)) from None
    return builtin_map(text, c)


def positive_frequency_residual(m: DispersionMap, q, k):
    """omega^2/c^2 - |q|^2 - kappa^2; zero iff each component solves the wave equation."""
    w = m.omega(q, k) / m.c
    kap = m.kappa(q, k)
    return w**2 - np.asarray(q, dtype=float) ** 2 - kap**2


def unitarity_weight(m: DispersionMap, q, k):
    """Spectral weight omega / |d kappa / d k| entering the single-particle product."""
    d = np.abs(m.dkappa_dk(q, k))
    if np.any(d == 0) or not np.all(np.isfinite(d)):
        raise SingularWeightError(f"d kappa/dk vanishes or diverges for map {m.name!r}")
    return m.omega(q, k) / d


def reference_weight(m: DispersionMap, k: float, probe: float = 1e-8) -> float:
    """Weight in the limit q -> 0: at q = 0 when defined there, else at ``probe * k``."""
    if m.in_domain(0.0, k):
        try:
            w = float(unitarity_weight(m, 0.0, k))
            if np.isfinite(w):
                return w
        except SingularWeightError:
            pass
    return float(unitarity_weight(m, probe * k, k))


def weight_defect(m: DispersionMap, k: float, q_values) -> float:
    """sup over ``q_values`` of |weight(q, k) / weight(0, k) - 1|."""
    w = unitarity_weight(m, np.asarray(q_values, dtype=float), k)
    return float(np.max(np.abs(w / reference_weight(m, k) - 1.0)))


def consistency_residual(m: DispersionMap, k: float, probe_q: float | None = None):
    """Relative deviation of (kappa, omega) from the carrier (k, ck) at small |q|."""
    if probe_q is None:
        probe_q = 1e-6 * k
    kap = float(m.kappa(probe_q, k))
    om = float(m.omega(probe_q, k))
    return abs(kap - k) / k, abs(om - m.c * k) / (m.c * k)


@dataclass
class UniquenessReport:
    alphas: np.ndarray
    betas: np.ndarray
    k: float
    unitarity_defect: np.ndarray  # shape (len(alphas), len(betas))
    kappa_residual: np.ndarray
    omega_residual: np.ndarray
    consistency_tol: float

    @property
    def combined(self) -> np.ndarray:
        return self.kappa_residual + self.omega_residual

    @property
    def argmin(self) -> tuple[int, int]:
        c = np.where(np.isfinite(self.combined), self.combined, np.inf)
        i, j = np.unravel_index(np.argmin(c), c.shape)
        return int(i), int(j)

    @property
    def argmin_point(self) -> tuple[float, float]:
        i, j = self.argmin
        return float(self.alphas[i]), float(self.betas[j])

    @property
    def target_index(self) -> tuple[int, int]:
        """Lattice point nearest (ln 2, 1)."""
        return (int(np.argmin(np.abs(self.alphas - HENOCHROMATIC_ALPHA))),
                int(np.argmin(np.abs(self.betas - HENOCHROMATIC_BETA))))

    @property
    def minimum_unique(self) -> bool:
        c = np.where(np.isfinite(self.combined), self.combined, np.inf)
        return int(np.sum(c == c.min())) == 1

    @property
    def consistency_attained(self) -> bool:
        i, j = self.argmin
        return bool(self.combined[i, j] < self.consistency_tol)

    @property
    def max_unitarity_defect(self) -> float:
        return float(np.max(self.unitarity_defect))

    @property
    def passed(self) -> bool:
        return self.consistency_attained and self.minimum_unique and self.argmin == self.target_index

    def to_dict(self) -> dict:
        def clean(a):
            return [[float(v) if np.isfinite(v) else None for v in row] for row in a]

        i, j = self.argmin
        return {
            "k": self.k,
            "alphas": [float(a) for a in self.alphas],
            "betas": [float(b) for b in self.betas],
            "unitarity_defect": clean(self.unitarity_defect),
            "kappa_residual": clean(self.kappa_residual),
            "omega_residual": clean(self.omega_residual),
            "max_unitarity_defect": self.max_unitarity_defect,
            "argmin": {"alpha": float(self.alphas[i]), "beta": float(self.betas[j]),
                       "combined_residual": float(self.combined[i, j])},
            "target": {"alpha": float(self.alphas[self.target_index[0]]),
                       "beta": float(self.betas[self.target_index[1]])},
            "minimum_unique": self.minimum_unique,
            "consistency_attained": self.consistency_attained,
            "consistency_tol": self.consistency_tol,
            "passed": self.passed,
        }


def uniqueness_sweep(alphas, betas, k: float = 1.0, q_max: float | None = None,
                     n_q: int = 200, consistency_tol: float = 0.05) -> UniquenessReport:
    """Scan the unitary family over an (alpha, beta) lattice.

    Every lattice point is checked for unitarity (weight spread over a log sweep of
    |q| in [1e-4 k, q_max]) and for consistency with the carrier as q -> 0.
    """
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    if q_max is None:
        q_max = k
    qs = np.geomspace(1e-4 * k, q_max, n_q)
    shape = (alphas.size, betas.size)
    defect = np.empty(shape)
    kres = np.empty(shape)
    wres = np.empty(shape)
    with np.errstate(over="ignore", invalid="ignore"):
        for i, a in enumerate(alphas):
            for j, b in enumerate(betas):
                m = family_map(a, b)
                defect[i, j] = weight_defect(m, k, qs)
                kres[i, j], wres[i, j] = consistency_residual(m, k)
    return UniquenessReport(alphas, betas, k, defect, kres, wres, consistency_tol)
