import numpy as np
import pytest

from ampqed.constants import SI
from ampqed.errors import AnalyticityViolation, SingularOperator
from ampqed.green import (MaxwellOperator, assemble_operator, exterior_kernel,
                          green_function, lattice_lambda, lattice_phase, lattice_vacuum_green,
                          pole_scan, solve_green, vacuum_green, verify_integral_relation)
from ampqed.grids import SpatialGrid
from ampqed.media import Layer, MediumModel, Oscillator, build_kernel
from ampqed.operator_core import Kernel, hermitian_split, rel_diff

from conftest import slab

VACUUM = MediumModel()


def test_lattice_phase_branches():
    h = 0.1
    th = lattice_phase(3.0, h)
    assert np.sin(th.real / 2) == pytest.approx(3.0 * h / 2)
    above = lattice_lambda(30.0, h)
    assert above.imag == 0 and -1 < above.real < 0
    up = lattice_phase(3.0 + 0.5j, h)
    assert up.imag > 0
    assert lattice_phase(-3.0, h) == pytest.approx(-np.conj(lattice_phase(3.0, h)))
    # continuity from the upper half plane across the band edge
    assert lattice_phase(30.0 + 1e-9j, h) == pytest.approx(lattice_phase(30.0, h), abs=1e-6)


def test_vacuum_matches_lattice_closed_form(grid):
    for om in (0.3, 7.0, 60.0, 200.0):
        G = green_function(VACUUM, grid, om)
        ref = lattice_vacuum_green(grid, om)
        assert np.abs(G.values - ref).max() <= 1e-10 * np.abs(ref).max()


def test_vacuum_converges_to_free_space_at_second_order():
    om = 3.0
    errs = []
    for n in (64, 128, 256):
        g = SpatialGrid.uniform(0.0, 1.0, n)
        G = green_function(VACUUM, g, om)
        ref = vacuum_green(g.nodes, g.nodes, om)
        errs.append(np.abs(G.values - ref).max() / np.abs(ref).max())
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)


def test_exterior_loss_nonnegative(grid):
    h = grid.spacing
    for om in (1.0, 50.0, 120.0):
        s = exterior_kernel(grid, om).hermitian_part()
        assert s.values[0, 0].real > 0 and s.values[-1, -1].real > 0
    s = exterior_kernel(grid, 3.0 / h).hermitian_part()
    assert s.max_abs() == 0.0


@pytest.mark.parametrize("strength, ell", [(1.0, 0.0), (-1.0, 0.0), (1.0, 0.05), (-0.5, 0.05)])
def test_integral_relation(grid, strength, ell):
    m = slab(strength, ell=ell)
    for om in (6.0, 10.0, 13.0):
        Q = build_kernel(m, grid, om)
        sigma, _ = hermitian_split(Q)
        G = solve_green(assemble_operator(Q))
        assert verify_integral_relation(G, sigma) <= 1e-9


def test_integral_relation_needs_exterior_channel(grid, absorbing):
    Q = build_kernel(absorbing, grid, 10.0)
    sigma, _ = hermitian_split(Q)
    G = solve_green(assemble_operator(Q))
    lhs = G @ sigma @ G.H * 10.0
    assert rel_diff(lhs, Kernel(G.values.imag, grid)) > 1e-2


def test_integral_relation_si_units():
    g = SpatialGrid.uniform(0.0, 3e-6, 64)
    m = MediumModel((Layer(1e-6, 2e-6, (Oscillator(1.0, 2e15, 1e14, 1e15),)),))
    Q = build_kernel(m, g, 1.9e15, SI)
    sigma, _ = hermitian_split(Q)
    G = solve_green(assemble_operator(Q, constants=SI))
    assert verify_integral_relation(G, sigma, constants=SI) <= 1e-9


def test_reciprocity_and_schwarz(grid, gain):
    G = green_function(gain, grid, 9.5)
    Gm = green_function(gain, grid, -9.5)
    assert rel_diff(G.T, G) < 1e-12
    assert rel_diff(Kernel(Gm.values.conj(), grid), G) < 1e-12


def test_high_frequency_limit(grid):
    om = 20 * 2 / grid.spacing
    G = green_function(slab(1.0), grid, om)
    ident = Kernel.identity(grid)
    assert rel_diff(-(om**2) * G, ident) <= 0.05


def test_singular_operator_detected(grid):
    z = Kernel.zeros(grid, 1.0)
    A = MaxwellOperator(np.zeros((grid.n, grid.n)), grid, 1.0 + 0j, z, z)
    with pytest.raises(SingularOperator):
        solve_green(A)


def test_complex_frequency_requires_scan(grid, absorbing):
    Q = build_kernel(absorbing, grid, 10 + 1j)
    with pytest.raises(AnalyticityViolation):
        solve_green(assemble_operator(Q))
    with pytest.raises(ValueError):
        assemble_operator(build_kernel(absorbing, grid, 10 - 1j))


def test_scan_certifies_complex_solve(small_grid, absorbing):
    scan = pole_scan(absorbing, small_grid, (5, 15, 0, 2), (12, 4))
    assert scan.clean and scan.round_trip is None
    Q = build_kernel(absorbing, small_grid, 10 + 1j)
    G = solve_green(assemble_operator(Q), scan)
    assert np.isfinite(G.values).all()
    with pytest.raises(AnalyticityViolation):
        solve_green(assemble_operator(build_kernel(absorbing, small_grid, 20 + 1j)), scan)


def test_pole_scan_rejects_lower_half_plane(small_grid, absorbing):
    with pytest.raises(ValueError):
        pole_scan(absorbing, small_grid, (5, 15, -1, 1))
