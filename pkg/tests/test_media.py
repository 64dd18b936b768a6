import numpy as np
import pytest

from ampqed.errors import GridMismatch, GridTooCoarse
from ampqed.grids import FrequencyGrid, SpatialGrid
from ampqed.media import (Layer, MediumModel, Oscillator, build_kernel,
                          check_kramers_kronig, check_schwarz, layer_profiles,
                          permittivity)
from ampqed.constants import SI

from conftest import slab


def test_permittivity_at_resonance():
    # f wp^2 / (-i gamma w0) = 4 / (-10 i) = 0.4 i
    m = slab(1.0)
    assert permittivity(m, [1.0], 10.0)[0] == pytest.approx(1 + 0.4j, abs=1e-15)
    g = slab(-1.0)
    assert permittivity(g, [1.0], 10.0)[0] == pytest.approx(1 - 0.4j, abs=1e-15)


def test_permittivity_static_and_outside():
    m = slab(1.0)
    eps = permittivity(m, [0.1, 1.0], 0.0)
    assert eps[0] == 1.0
    assert eps[1] == pytest.approx(1 + 4.0 / 100.0)


def test_oscillator_validation():
    with pytest.raises(ValueError):
        Oscillator(1.0, 10.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Oscillator(1.0, -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        MediumModel((Layer(0, 1), Layer(0.5, 2)))


def test_gain_scaling():
    m = MediumModel((Layer(0, 1, (Oscillator(1, 5, 1, 1), Oscillator(-2, 6, 1, 1))),))
    s = m.with_gain_scaled(3.0)
    assert [o.strength for o in s.layers[0].oscillators] == [1, -6]


def test_local_profile_dual_cells():
    g = SpatialGrid.uniform(0.0, 1.0, 10)
    m = MediumModel((Layer(0.25, 0.75, (Oscillator(1, 1, 1, 1),)),))
    M = layer_profiles(m, g)[0]
    frac = np.diag(M) * g.weights
    # cells [0.2,0.3] and [0.7,0.8] are half covered
    assert frac[2] == pytest.approx(0.5)
    assert frac[7] == pytest.approx(0.5)
    assert frac.sum() * 0.1 == pytest.approx(0.5)


def test_kernel_local_values(grid):
    m = slab(1.0)
    Q = build_kernel(m, grid, 10.0)
    i = 64
    expected = -1j * 10.0 * 0.4j / grid.weights[i]
    assert Q.values[i, i] == pytest.approx(expected)
    assert Q.values[0, 0] == 0
    assert np.count_nonzero(Q.values - np.diag(np.diag(Q.values))) == 0


def test_kernel_real_part_sign(grid):
    # Re Q is the Hermitian part: positive for absorption, negative for gain
    for f, sign in ((1.0, 1), (-1.0, -1)):
        Q = build_kernel(slab(f), grid, 9.0)
        assert sign * Q.values.real[64, 64] > 0


def test_nonlocal_profile_properties(grid):
    m = slab(1.0, ell=0.05)
    M = layer_profiles(m, grid)[0]
    assert np.allclose(M, M.T)
    s = np.sqrt(grid.weights)
    assert np.linalg.eigvalsh(s[:, None] * M * s[None, :]).min() > -1e-12
    rows = (M * grid.weights[None, :]).sum(axis=1)
    np.testing.assert_allclose(rows, grid.fractions(0.5, 1.5), atol=1e-12)
    # no response outside the layer
    assert np.all(M[:30] == 0)


def test_nonlocal_tends_to_local(grid):
    loc = layer_profiles(slab(1.0), grid)[0]
    nl = layer_profiles(slab(1.0, ell=1e-4), grid)[0]
    np.testing.assert_allclose(nl, loc, atol=1e-12)


def test_grid_must_cover_medium():
    g = SpatialGrid.uniform(0.0, 1.0, 16)
    with pytest.raises(GridMismatch):
        build_kernel(slab(1.0, z=(0.5, 1.5)), g, 1.0)


def test_schwarz_exact():
    m = slab(1.0)
    assert check_schwarz(m, np.linspace(0.1, 50, 200)) <= 1e-14
    assert check_schwarz(slab(-3.0), [1.0, 10.0, 77.0]) <= 1e-14


def test_kk_lorentz_and_gain():
    assert check_kramers_kronig(slab(1.0)) <= 1e-3
    assert check_kramers_kronig(slab(-1.0)) <= 1e-3


def test_kk_drude_uses_regular_response():
    m = MediumModel((Layer(0, 1, (Oscillator(1.0, 0.0, 1.0, 3.0),)),))
    assert check_kramers_kronig(m) <= 1e-3


def test_kk_detects_acausal_response(monkeypatch):
    # conjugating a causal response makes it advanced: Im flips, Re does not
    osc = Oscillator(1.0, 10.0, 1.0, 2.0)
    monkeypatch.setattr(Layer, "susceptibility", lambda self, om: np.conj(osc.susceptibility(om)))
    assert check_kramers_kronig(slab(1.0)) > 0.5


def test_kk_grid_too_coarse():
    m = slab(1.0, damping=0.01)
    fg = FrequencyGrid.clustered(400.0, 16)
    with pytest.raises(GridTooCoarse):
        check_kramers_kronig(m, fg)


def test_kernel_in_si_units():
    # same physics at optical scale
    om = 2e15
    m = MediumModel((Layer(0.0, 1e-6, (Oscillator(1.0, 2e15, 1e14, 1e15),)),))
    g = SpatialGrid.uniform(-1e-6, 2e-6, 32)
    Q = build_kernel(m, g, om, SI)
    chi = 1e30 / (4e30 - 4e30 - 1j * 1e14 * om)
    assert Q.values[16, 16] == pytest.approx(-1j * SI.eps0 * om * chi / g.weights[16])
