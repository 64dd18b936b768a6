import pathlib

import numpy as np
import pytest
from scipy.integrate import quad

from ampqed.errors import AnalyticityViolation, GridTooCoarse
from ampqed.green import green_function, vacuum_green
from ampqed.grids import FrequencyGrid, SpatialGrid
from ampqed.media import MediumModel
from ampqed.correlations import (NAIVE_LABEL, amplification_correction, bb_spectral_density,
                                 commutator_integral, cosine_integral_identity,
                                 ee_spectral_density, integrated_correlations, naive_bb_density,
                                 naive_fdt_density, sample, spectral_densities)
from ampqed.parallel import CompensatedSum, ordered_map, thread_count

from conftest import slab

SRC = pathlib.Path(__file__).resolve().parents[1] / "src" / "ampqed"


@pytest.mark.parametrize("strength", [1.0, -1.0])
def test_ee_density_is_hermitian_psd(strength, grid):
    s = sample(slab(strength), grid, 9.5)
    ee = ee_spectral_density(s.G, s.sav)
    assert ee.hermiticity_error() < 1e-13
    assert ee.min_eigenvalue() > -1e-12


def test_fdt_reduction_for_absorber(absorbing, grid):
    for om in (3.0, 9.5, 14.0):
        s = sample(absorbing, grid, om)
        ee = ee_spectral_density(s.G, s.sav)
        naive = naive_fdt_density(s.G)
        assert np.linalg.norm(ee.values - naive.values) <= 1e-9 * np.linalg.norm(naive.values)
        corr = amplification_correction(s.G, s.sigma, s.sav)
        assert np.max(np.abs(corr.values)) == 0


def test_bb_two_routes_for_absorber(absorbing, grid):
    s = sample(absorbing, grid, 9.5)
    bb = bb_spectral_density(s.G, s.sav)
    naive = naive_bb_density(s.G)
    assert np.linalg.norm(bb.values - naive.values) <= 1e-9 * np.linalg.norm(naive.values)
    assert bb.hermiticity_error() < 1e-13


def test_vacuum_bb_against_continuum():
    # (hbar mu0/pi) d/dz d/dz' Im g0 = (hbar mu0/pi) (omega / 2c) cos(omega (z - z') / c)
    errs = []
    for n in (64, 128):
        g = SpatialGrid.uniform(0.0, 2.0, n)
        om = 5.0
        s = sample(MediumModel(()), g, om)
        bb = bb_spectral_density(s.G, s.sav).values
        z = g.nodes
        ref = om / (2 * np.pi) * np.cos(om * np.subtract.outer(z, z))
        inner = slice(2, -2)
        errs.append(np.max(np.abs(bb[inner, inner] - ref[inner, inner])) / np.max(np.abs(ref)))
    assert errs[1] < 1e-2
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_vacuum_ee_against_continuum():
    g = SpatialGrid.uniform(0.0, 1.0, 128)
    om = 0.2
    s = sample(MediumModel(()), g, om)
    ee = ee_spectral_density(s.G, s.sav).values
    ref = om**2 / np.pi * vacuum_green(g.nodes, g.nodes, om).imag
    assert np.max(np.abs(ee - ref)) <= 1e-6 * np.max(np.abs(ref))


def test_naive_density_odd_in_frequency(gain, small_grid):
    # Im G is odd under omega -> -omega and omega^2 is even
    for om in (4.0, 9.5):
        Gp = green_function(gain, small_grid, om)
        Gm = green_function(gain, small_grid, -om)
        a = naive_fdt_density(Gp).values
        b = naive_fdt_density(Gm, -om).values
        assert np.allclose(a, -b, rtol=0, atol=1e-12 * np.max(np.abs(a)))
        assert naive_fdt_density(Gp).label == NAIVE_LABEL


def test_gain_correction_psd_with_creator_rank(gain, grid):
    s = sample(gain, grid, 9.5)
    ee = ee_spectral_density(s.G, s.sav)
    corr = amplification_correction(s.G, s.sigma, s.sav)
    scale = ee.spectral_scale()
    assert corr.min_eigenvalue(scale) > -1e-12
    assert corr.rank(scale) == len(s.partition.minus) == 64
    # the correction is exactly the gap between the physical and naive forms
    naive = naive_fdt_density(s.G)
    gap = ee.values - naive.values - corr.values
    assert np.linalg.norm(gap) <= 1e-9 * np.linalg.norm(ee.values)


def test_regularizer_drops_channels(gain, grid):
    rows = spectral_densities(gain, grid, [9.5], eps_reg=1e-12)
    big = spectral_densities(gain, grid, [9.5], eps_reg=10.0)
    assert rows[0]["minus-channels"] == 64 and big[0]["minus-channels"] == 0


@pytest.mark.parametrize("d", [0.0, 0.3, 1.7])
def test_continuum_cosine_identity(d):
    om_max = 7.0
    direct = quad(lambda w: 2 * w * vacuum_green(0.0, d, w).imag, 0, om_max, epsabs=0,
                  epsrel=1e-12)[0]
    assert float(cosine_integral_identity(d, om_max)) == pytest.approx(direct, rel=1e-11)


def test_commutator_small_absorber():
    g = SpatialGrid.uniform(0.0, 2.0, 32)
    model = slab(1.0)
    fg = FrequencyGrid.lattice(g, 400.0, 160, resonances=model.resonances())
    res = commutator_integral(model, g, fg)
    assert res.scan.clean
    assert res.residual < 0.02
    assert res.error < 0.02


def test_commutator_requires_path_beyond_band():
    g = SpatialGrid.uniform(0.0, 2.0, 32)
    fg = FrequencyGrid.clustered(20.0, 64)
    with pytest.raises(GridTooCoarse):
        commutator_integral(slab(1.0), g, fg)


def test_commutator_refuses_flagged_scan():
    class Flagged:
        poles = (10.0 + 0.1j,)
        clean = False

    g = SpatialGrid.uniform(0.0, 2.0, 32)
    fg = FrequencyGrid.lattice(g, 400.0, 64)
    with pytest.raises(AnalyticityViolation):
        commutator_integral(slab(-1.0), g, fg, scan=Flagged())


def test_integrated_convergence(gain, small_grid):
    fg = FrequencyGrid.lattice(small_grid, 400.0, 160, resonances=gain.resonances())
    a = integrated_correlations(gain, small_grid, fg)
    b = integrated_correlations(gain, small_grid, fg.refined(), estimate_error=False)
    for kind in ("EE", "BB", "EE-correction"):
        change = np.linalg.norm(b[kind].values - a[kind].values) / np.linalg.norm(b[kind].values)
        assert change <= a[kind].error
        assert a[kind].integrated and a[kind].omega is None


def test_compensated_sum():
    acc = CompensatedSum((), float)
    for x in (1.0, 1e100, 1.0, -1e100):
        acc.add(x)
    assert acc.value == 2.0


def test_ordered_map_is_deterministic(monkeypatch, gain, small_grid):
    omegas = np.linspace(2.0, 15.0, 12)
    serial = spectral_densities(gain, small_grid, omegas, workers=1)
    monkeypatch.setenv("AMPQED_THREADS", "4")
    assert thread_count() == 4
    threaded = spectral_densities(gain, small_grid, omegas)
    for r1, r2 in zip(serial, threaded):
        assert np.array_equal(r1["EE"].values, r2["EE"].values)
    assert ordered_map(lambda x: x * x, range(10), 3) == [x * x for x in range(10)]
    monkeypatch.setenv("AMPQED_THREADS", "zero")
    with pytest.raises(ValueError):
        thread_count()


def test_no_longitudinal_channel():
    for path in SRC.rglob("*.py"):
        assert "longitudinal" not in path.read_text().lower(), path
