import math

import numpy as np
import pytest
from numpy.polynomial import hermite as H
from scipy.special import eval_genlaguerre

from henochrome.grids import (
    SampledEnvelope,
    TransverseGrid,
    forward_transform,
    inverse_transform,
    l2_inner_product,
)
from henochrome.modes import (
    ModeParseError,
    ModeSpec,
    ParaxialSolution,
    assoc_laguerre,
    hermite,
    hg_basis,
    lg_basis,
    make_initial_data,
    paraxial_inner_product,
    paraxial_residual_grid,
    parse_mode_spec,
    propagate_paraxial,
    random_paraxial_solution,
)


@pytest.mark.parametrize("n", range(7))
def test_hermite_matches_numpy(n):
    x = np.linspace(-4, 4, 41)
    ref = H.hermval(x, [0] * n + [1])
    assert np.allclose(hermite(n, x), ref, rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("p,a", [(0, 0), (1, 0), (2, 1), (3, 2), (4, 3)])
def test_laguerre_matches_scipy(p, a):
    x = np.linspace(0, 10, 41)
    assert np.allclose(assoc_laguerre(p, a, x), eval_genlaguerre(p, a, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("basis", [hg_basis, lg_basis])
def test_gram_matrix_is_identity(grid256, basis):
    modes = basis(3)
    assert len(modes) == 10
    vals = np.stack([make_initial_data(s, grid256).values.ravel() for s in modes])
    gram = np.conj(vals) @ vals.T * grid256.cell_area
    assert np.abs(gram - np.eye(10)).max() < 1e-8


def test_on_axis_amplitude_at_rayleigh_range(grid256):
    W, k = 1.0, 2.0
    sol = ParaxialSolution.from_mode(ModeSpec.hg(0, 0, W, k), grid256)
    c = grid256.n // 2
    a0 = abs(sol.envelope.values[c, c])
    a1 = abs(sol.at(k * W**2).envelope.values[c, c])
    assert a1 / a0 == pytest.approx(1 / math.sqrt(2), abs=1e-10)


def _rotate90(a):
    # new[ix, iy] = old at the point rotated by -90 degrees about the centre
    n = a.shape[0]
    idx = np.arange(n)
    ix, iy = np.meshgrid(idx, idx, indexing="ij")
    return a[(-iy) % n, ix]


@pytest.mark.parametrize("l,p", [(1, 0), (-2, 1), (3, 0)])
def test_lg_rotation_phase(l, p):
    g = TransverseGrid(64, 16.0)
    vals = make_initial_data(ModeSpec.lg(l, p), g).values
    # Xi(R_theta s) = e^{i l theta} Xi(s), sampled on the lattice
    # the -n/2 row and column have no rotated partner on the lattice
    inner = (slice(1, None), slice(1, None))
    rot = _rotate90(vals)
    assert np.allclose(rot[inner], np.exp(1j * l * math.pi / 2) * vals[inner], rtol=0, atol=1e-13)
    rot2 = _rotate90(rot)
    assert np.allclose(rot2[inner], np.exp(1j * l * math.pi) * vals[inner], rtol=0, atol=1e-13)


def test_propagation_group_law(rng, grid64):
    F = forward_transform(SampledEnvelope(grid64, rng.normal(size=(64, 64)) + 0j))
    k = 1.7
    a = propagate_paraxial(propagate_paraxial(F, 0.6, k), -2.1, k)
    b = propagate_paraxial(F, -1.5, k)
    assert np.allclose(a.values, b.values, rtol=0, atol=1e-12 * np.abs(F.values).max())
    assert propagate_paraxial(F, 0.0, k) is F
    with pytest.raises(ValueError):
        propagate_paraxial(F, 1.0, 0.0)


def test_norm_conserved(grid64):
    sol = ParaxialSolution.from_mode(ModeSpec.lg(2, 1, 1.0, 1.0), grid64)
    n0 = l2_inner_product(sol.envelope, sol.envelope).real
    for z in (-3.0, 0.5, 7.0):
        env = sol.at(z).envelope
        assert l2_inner_product(env, env).real == pytest.approx(n0, rel=1e-12)


def test_paraxial_product_station_independent(rng, grid64):
    a = random_paraxial_solution(rng, grid64, 1.3)
    b = random_paraxial_solution(rng, grid64, 1.3)
    p0 = paraxial_inner_product(a, b)
    p1 = paraxial_inner_product(a, b, station=4.2)
    p2 = paraxial_inner_product(a.at(-1.0), b.at(3.0))
    assert abs(p0 - p1) < 1e-12 * abs(p0)
    assert abs(p0 - p2) < 1e-12 * abs(p0)
    with pytest.raises(ValueError):
        paraxial_inner_product(a, ParaxialSolution(b.envelope, 1.4))


def _stations(sol, z, h):
    return [sol.at(z + d).envelope for d in (-h, 0.0, h)]


def test_paraxial_residual_second_order(grid64):
    sol = ParaxialSolution.from_mode(ModeSpec.hg(1, 2, 1.0, 1.0), grid64)
    r1 = paraxial_residual_grid(_stations(sol, 0.3, 0.02), 1.0)
    r2 = paraxial_residual_grid(_stations(sol, 0.3, 0.01), 1.0)
    assert r1 / r2 == pytest.approx(4.0, rel=0.02)


def test_paraxial_residual_constant_envelope(grid64):
    envs = [SampledEnvelope(grid64, np.full((64, 64), 2.0 + 1j), z) for z in (0.0, 0.1, 0.2)]
    assert paraxial_residual_grid(envs, 1.0) == 0.0


def test_paraxial_residual_plane_envelope(grid64):
    k, h = 1.0, 1e-4
    X, _ = grid64.coords()
    q0 = grid64.q[1]
    envs = [SampledEnvelope(grid64, np.exp(1j * q0 * X - 1j * q0**2 * z / (2 * k)), z)
            for z in (1.0 - h, 1.0, 1.0 + h)]
    assert paraxial_residual_grid(envs, k) < 1e-10


def test_paraxial_residual_rejects_uneven_stations(grid64):
    envs = [SampledEnvelope(grid64, np.ones((64, 64)), z) for z in (0.0, 0.1, 0.3)]
    with pytest.raises(ValueError):
        paraxial_residual_grid(envs, 1.0)


@pytest.mark.parametrize("text,expected", [
    ("hg:0,0:1:1", ModeSpec.hg(0, 0, 1.0, 1.0)),
    ("lg:-2,1:3.5:0.25", ModeSpec.lg(-2, 1, 3.5, 0.25)),
    (" HG:2,1:1e1:2 ", ModeSpec.hg(2, 1, 10.0, 2.0)),
])
def test_parse_mode_spec(text, expected):
    spec = parse_mode_spec(text)
    assert spec == expected
    assert parse_mode_spec(str(spec)) == spec


@pytest.mark.parametrize("text", [
    "hg:0:1:1", "hg:0,0:1", "xx:0,0:1:1", "hg:-1,0:1:1", "lg:0,-1:1:1",
    "hg:0,0:0:1", "hg:0,0:1:-1", "hg:a,b:1:1", "hg:0,0,0:1:1",
])
def test_parse_mode_spec_rejects(text):
    with pytest.raises(ModeParseError):
        parse_mode_spec(text)


def test_mode_order():
    assert ModeSpec.hg(2, 1).order == 3
    assert ModeSpec.lg(-1, 1).order == 3


def test_random_solution_deterministic(grid64):
    a = random_paraxial_solution(np.random.default_rng(5), grid64, 1.0)
    b = random_paraxial_solution(np.random.default_rng(5), grid64, 1.0)
    assert a.station == b.station
    assert np.array_equal(a.envelope.values, b.envelope.values)


def test_from_spectrum_roundtrip(rng, grid64):
    sol = random_paraxial_solution(rng, grid64, 0.8)
    F0 = sol.initial_spectrum()
    again = ParaxialSolution.from_spectrum(F0, 0.8, sol.station)
    assert np.allclose(again.envelope.values, sol.envelope.values, atol=1e-13)
    env = inverse_transform(F0)
    assert env.station == 0.0
