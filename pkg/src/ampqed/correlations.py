"""Vacuum field correlations in amplifying media and the commutator integral.

At zero temperature the electric-field spectral density is

    S_EE(omega) = (hbar mu0^2 / pi) omega^3  G o |sigma| o G^+,

with ``|sigma|`` the operator absolute value of the conductance. For
absorbing media ``|sigma| = sigma`` and the generalized integral relation
``mu0 omega G o sigma o G^+ = Im G`` gives back the familiar
fluctuation-dissipation form ``(hbar mu0 / pi) omega^2 Im G``. With gain the
two differ by the positive correction ``G o (|sigma| - sigma) o G^+``.

Throughout, the radiative loss of the exterior closure acts as an extra
absorbing channel: it is added to ``|sigma|`` as well as to ``sigma``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .constants import NATURAL
from .errors import AnalyticityViolation, GridTooCoarse
from .green import lattice_phase, pole_scan, solve_green, assemble_operator
from .grids import FrequencyGrid
from .media import build_kernel, layer_profiles
from .operator_core import (Kernel, hermitian_split, sigma_av,
                            spectral_decompose)
from .parallel import CompensatedSum, ordered_map
from .quantization import noise_covariances, partition_channels

NAIVE_LABEL = "naive fluctuation-dissipation form (non-physical for amplifying media)"


@dataclass(frozen=True, eq=False)
class CorrelationTensor:
    """Correlation array on the node pairs of ``grid``.

    ``kind`` is ``"EE"`` or ``"BB"`` (or ``"EE-naive"``, ``"EE-correction"``);
    ``omega`` is ``None`` for frequency-integrated tensors, which carry a
    quadrature error estimate in ``error``.
    """

    values: np.ndarray
    grid: object
    kind: str
    omega: float = None
    integrated: bool = False
    error: float = None
    label: str = ""

    def kernel(self):
        return Kernel(self.values, self.grid, self.omega)

    def hermiticity_error(self):
        v = self.values
        return float(np.linalg.norm(v - v.conj().T) / max(np.linalg.norm(v), 1e-300))

    def eigenvalues(self):
        """Eigenvalues of the Hermitian part of the integral operator."""
        h = self.kernel().symmetric()
        return np.linalg.eigvalsh(0.5 * (h + h.conj().T))

    def spectral_scale(self):
        return float(np.max(np.abs(self.eigenvalues())))

    def min_eigenvalue(self, scale=None):
        """Smallest eigenvalue relative to ``scale`` (default: the largest)."""
        ev = self.eigenvalues()
        top = np.max(np.abs(ev)) if scale is None else scale
        return float(ev[0] / top) if top > 0 else 0.0

    def rank(self, scale=None, rtol=1e-12):
        """Number of eigenvalues above ``rtol * scale`` (default scale: the largest)."""
        ev = self.eigenvalues()
        top = np.max(np.abs(ev)) if scale is None else scale
        return int(np.sum(np.abs(ev) > rtol * top)) if top > 0 else 0


def derivative_matrix(grid):
    """Second-order finite-difference ``d/dz`` acting on nodal values."""
    n = grid.n
    return np.gradient(np.eye(n), grid.nodes, axis=0, edge_order=2)


def _omega(G, omega):
    return float(np.real(G.omega if omega is None else omega))


def _with_exterior(G, kernel, include_exterior):
    return kernel + G.exterior_sigma() if include_exterior else kernel


def ee_spectral_density(G, sav, omega=None, constants=NATURAL, include_exterior=True):
    """Electric spectral density ``(hbar mu0^2/pi) omega^3 G o |sigma| o G^+``."""
    omega = _omega(G, omega)
    s = _with_exterior(G, sav, include_exterior)
    pref = constants.hbar * constants.mu0**2 * omega**3 / np.pi
    return CorrelationTensor((pref * (G @ s @ G.H)).values, G.grid, "EE", omega)


def bb_spectral_density(G, sav, omega=None, constants=NATURAL, include_exterior=True):
    """Magnetic spectral density ``(hbar mu0^2/pi) omega D (G o |sigma| o G^+) D^T``."""
    omega = _omega(G, omega)
    s = _with_exterior(G, sav, include_exterior)
    pref = constants.hbar * constants.mu0**2 * omega / np.pi
    D = derivative_matrix(G.grid)
    core = (G @ s @ G.H).values
    return CorrelationTensor(pref * D @ core @ D.T, G.grid, "BB", omega)


def amplification_correction(G, sigma, sav, omega=None, constants=NATURAL):
    """Excess over the naive form, ``(hbar mu0^2/pi) omega^3 G o (|sigma| - sigma) o G^+``."""
    omega = _omega(G, omega)
    pref = constants.hbar * constants.mu0**2 * omega**3 / np.pi
    return CorrelationTensor((pref * (G @ (sav - sigma) @ G.H)).values, G.grid,
                             "EE-correction", omega)


def naive_fdt_density(G, omega=None, constants=NATURAL):
    """``(hbar mu0/pi) omega^2 Im G``, whatever the sign of ``sigma``.

    Correct only for absorbing media; reproduced for comparison.
    """
    omega = _omega(G, omega)
    pref = constants.hbar * constants.mu0 * omega**2 / np.pi
    return CorrelationTensor(pref * G.values.imag, G.grid, "EE-naive", omega, label=NAIVE_LABEL)


def naive_bb_density(G, omega=None, constants=NATURAL):
    """``(hbar mu0/pi) D Im G D^T``: the magnetic counterpart of the naive form."""
    omega = _omega(G, omega)
    D = derivative_matrix(G.grid)
    return CorrelationTensor(constants.hbar * constants.mu0 / np.pi * D @ G.values.imag @ D.T,
                             G.grid, "BB-naive", omega, label=NAIVE_LABEL)


# ------------------------------------------------------------ per frequency

@dataclass(frozen=True, eq=False)
class FrequencySample:
    """Everything computed at one real frequency."""

    omega: float
    G: object
    sigma: Kernel
    sav: Kernel
    partition: object

    def sav_from_channels(self, constants=NATURAL):
        c_anti, c_norm = noise_covariances(self.partition, constants)
        return (c_anti + c_norm) * (np.pi / (constants.hbar * self.omega))


def sample(model, grid, omega, constants=NATURAL, eps_reg=None, profiles=None):
    """Green kernel, conductance and channel partition at real ``omega``."""
    Q = build_kernel(model, grid, omega, constants, profiles)
    sigma, _ = hermitian_split(Q)
    spec = spectral_decompose(sigma)
    reg = None if eps_reg is None else eps_reg * spec.scale
    part = partition_channels(spec, reg)
    G = solve_green(assemble_operator(Q, omega, constants))
    return FrequencySample(float(omega), G, sigma, sigma_av(spec), part)


def spectral_densities(model, grid, omegas, constants=NATURAL, eps_reg=None, workers=None):
    """EE, BB, naive and correction densities at each frequency.

    ``|sigma|`` is assembled from the retained channels of the partition,
    so channels at or below the relative regularizer ``eps_reg`` drop out.
    """
    profiles = layer_profiles(model, grid)

    def one(om):
        s = sample(model, grid, om, constants, eps_reg, profiles)
        sav = s.sav_from_channels(constants)
        return {
            "EE": ee_spectral_density(s.G, sav, om, constants),
            "BB": bb_spectral_density(s.G, sav, om, constants),
            "EE-naive": naive_fdt_density(s.G, om, constants),
            "EE-correction": amplification_correction(s.G, s.sigma, sav, om, constants),
            "minus-channels": len(s.partition.minus),
        }

    return ordered_map(one, list(omegas), workers)


def integrated_correlations(model, grid, omega_grid, constants=NATURAL, eps_reg=None,
                            workers=None, estimate_error=True):
    """Band-limited frequency integrals of the spectral densities.

    Only the real nodes of ``omega_grid`` are used (up to its band split):
    the densities are not analytic, so no contour deformation applies. The
    error estimate is the change against the grid with half the nodes.
    """
    def integrate(fgrid):
        rows = spectral_densities(model, grid, fgrid.nodes, constants, eps_reg, workers)
        out = {}
        for kind in ("EE", "BB", "EE-naive", "EE-correction"):
            acc = CompensatedSum((grid.n, grid.n))
            for wt, row in zip(fgrid.weights, rows):
                acc.add(wt * row[kind].values)
            out[kind] = acc.value
        return out

    fine = integrate(omega_grid)
    rough = integrate(omega_grid.coarsened()) if estimate_error else None
    result = {}
    for kind, val in fine.items():
        err = None
        if rough is not None:
            err = float(np.linalg.norm(val - rough[kind]) / max(np.linalg.norm(val), 1e-300))
        result[kind] = CorrelationTensor(val, grid, kind, None, True, err,
                                         NAIVE_LABEL if kind == "EE-naive" else "")
    return result


# ------------------------------------------------------- commutator integral

@dataclass(frozen=True, eq=False)
class CommutatorIntegral:
    """``2 int_0^inf omega Im G d omega`` against its target ``pi c^2 delta``."""

    values: Kernel
    target: Kernel
    residual: float
    error: float
    tail: Kernel
    real_part: Kernel
    scan: object = field(default=None, repr=False)


def commutator_target(grid, constants=NATURAL):
    return np.pi * constants.c**2 * Kernel.identity(grid)


def lattice_cosine_identity(grid, omega_max, constants=NATURAL):
    """Closed form of ``2 int_0^omega_max omega Im G_vac d omega`` on the lattice.

    With ``omega = omega_c sin(theta/2)`` the vacuum lattice integrand is
    ``(c^2/2h) cos(theta |n - m|)`` per unit ``theta``; integrating gives
    ``(c^2/h) sin(theta_max d)/d``. Valid for ``omega_max <= omega_c``.
    """
    h = grid.require_uniform()
    theta = lattice_phase(omega_max, h, constants.c).real
    n = np.arange(grid.n)
    d = np.abs(n[:, None] - n[None, :]).astype(float)
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.where(d == 0, theta, np.sin(theta * d) / np.where(d == 0, 1, d))
    return Kernel(constants.c**2 / h * val, grid)


def cosine_integral_identity(distance, omega_max, constants=NATURAL):
    """Continuum ``2 int_0^omega_max omega Im g0 d omega = c sin(omega_max d / c) / d``."""
    d = np.asarray(distance, dtype=float)
    c = constants.c
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(d == 0, omega_max, c * np.sin(omega_max * d / c) / np.where(d == 0, 1, d))


def _tail(model, grid, omega_max, constants, profiles):
    # omega Im G -> c^2 sum_l Im eps_l(omega) M_l / omega beyond the band
    T = np.zeros((grid.n, grid.n))
    for layer, M in zip(model.layers, profiles):
        val = quad(lambda w: float(np.imag(layer.permittivity(w))) / w, omega_max, np.inf,
                   limit=200, epsabs=0, epsrel=1e-12)[0]
        T += 2 * constants.c**2 * val * M
    return Kernel(T, grid)


def default_commutator_grid(model, grid, omega_max=None, n=320, constants=NATURAL):
    if omega_max is None:
        top = model.top_resonance()
        if top == 0:
            raise ValueError("omega_max required for a medium without resonances")
        omega_max = 40.0 * top
    return FrequencyGrid.lattice(grid, omega_max, n, resonances=model.resonances(),
                                 constants=constants)


def analyticity_scan(model, grid, omega_grid, constants=NATURAL, stride=4, n_im=6):
    """Pole scan over the box swept by the frequency rule's complex path."""
    height = max(np.max(omega_grid.path_nodes.imag, initial=0.0), 1e-3 * omega_grid.omega_max)
    re = np.concatenate([omega_grid.nodes[::stride], omega_grid.path_nodes.real[::stride],
                         [omega_grid.omega_max]])
    re = np.unique(re[(re > 0) & (re <= omega_grid.omega_max)])
    im = np.linspace(0.0, height, n_im)
    return pole_scan(model, grid, (re[0], re[-1], 0.0, height), constants=constants,
                     re_mesh=re, im_mesh=im)


def commutator_integral(model, grid, omega_grid=None, constants=NATURAL, scan=None,
                        workers=None):
    """Equal-time commutator integral ``2 int_0^inf omega Im G d omega``.

    The real nodes of ``omega_grid`` cover the propagating band of the
    lattice; beyond ``band_split`` the integral is carried along the complex
    path of the grid, where ``G`` is analytic (certified by a pole scan),
    and beyond ``omega_max`` by the leading asymptotic
    ``omega Im G ~ c^2 sum_l Im eps_l(omega) M_l / omega``.

    Returns
    -------
    CommutatorIntegral
        The integral, the target ``pi c^2 W^-1``, the relative residual and
        a quadrature error estimate (change against half the nodes).

    Raises
    ------
    AnalyticityViolation
        If the pole scan finds upper-half-plane poles.
    GridTooCoarse
        If ``omega_max`` does not reach beyond the lattice band edge.
    """
    if omega_grid is None:
        omega_grid = default_commutator_grid(model, grid, constants=constants)
    h = grid.require_uniform()
    if omega_grid.omega_max <= 2 * constants.c / h:
        raise GridTooCoarse("omega_max must exceed the lattice band edge 2c/h")
    if omega_grid.band_split >= omega_grid.omega_max or not omega_grid.has_path:
        raise GridTooCoarse("frequency rule has no path beyond the band split")
    if scan is None:
        scan = analyticity_scan(model, grid, omega_grid, constants)
    if scan.poles:
        raise AnalyticityViolation("Green function has upper-half-plane poles", scan.poles)
    profiles = layer_profiles(model, grid)

    def green(om):
        Q = build_kernel(model, grid, om, constants, profiles)
        return solve_green(assemble_operator(Q, om, constants), scan)

    def integrate(fgrid):
        acc = CompensatedSum((grid.n, grid.n), float)
        for wt, om, G in zip(fgrid.weights, fgrid.nodes,
                             ordered_map(green, fgrid.nodes, workers)):
            acc.add(2 * wt * om * G.values.imag)
        real_part = acc.value
        cacc = CompensatedSum((grid.n, grid.n))
        for wt, om, G in zip(fgrid.path_weights, fgrid.path_nodes,
                             ordered_map(green, fgrid.path_nodes, workers)):
            cacc.add(wt * om * G.values)
        return real_part, real_part + 2 * cacc.value.imag

    real_part, total = integrate(omega_grid)
    _, rough = integrate(omega_grid.coarsened())
    tail = _tail(model, grid, omega_grid.omega_max, constants, profiles)
    values = Kernel(total, grid) + tail
    target = commutator_target(grid, constants)
    scale = target.norm()
    return CommutatorIntegral(
        values, target, (values - target).norm() / scale,
        Kernel(total - rough, grid).norm() / scale, tail, Kernel(real_part, grid), scan)
