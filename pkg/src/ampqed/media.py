"""Drude-Lorentz media and their conductivity kernels.

The relative permittivity of a layer is

    eps(omega) = 1 + sum_j f_j wp_j^2 / (w_j^2 - omega^2 - i g_j omega),

with signed strengths ``f_j``; ``f_j < 0`` describes an inverted (gain)
transition. The associated conductivity kernel is

    Q(z, z', omega) = -i eps0 omega sum_l (eps_l(omega) - 1) M_l(z, z'),

where ``M_l`` is the spatial profile of layer ``l``: a delta function for
local layers, a smoothing kernel of length ``nonlocal_length`` otherwise.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import quad

from .constants import NATURAL
from .errors import GridMismatch, GridTooCoarse
from .grids import FrequencyGrid
from .operator_core import Kernel


@dataclass(frozen=True)
class Oscillator:
    """One Drude-Lorentz term ``f wp^2 / (w0^2 - omega^2 - i gamma omega)``."""

    strength: float
    resonance: float
    damping: float
    plasma: float

    def __post_init__(self):
        if not np.isfinite(self.strength):
            raise ValueError("oscillator strength must be finite")
        if not self.resonance >= 0:
            raise ValueError("resonance frequency must be non-negative")
        if not self.damping > 0:
            raise ValueError("damping must be positive")
        if not self.plasma > 0:
            raise ValueError("plasma frequency must be positive")

    @property
    def is_gain(self):
        return self.strength < 0

    def susceptibility(self, omega):
        omega = np.asarray(omega, dtype=complex)
        return self.strength * self.plasma**2 / (
            self.resonance**2 - omega**2 - 1j * self.damping * omega)


@dataclass(frozen=True)
class Layer:
    """Homogeneous slab ``z_min <= z <= z_max`` of Drude-Lorentz material."""

    z_min: float
    z_max: float
    oscillators: tuple = ()
    nonlocal_length: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "oscillators", tuple(self.oscillators))
        if not self.z_max > self.z_min:
            raise ValueError("layer must have z_max > z_min")
        if not self.nonlocal_length >= 0:
            raise ValueError("nonlocal length must be non-negative")

    @property
    def is_local(self):
        return self.nonlocal_length == 0

    @property
    def has_gain(self):
        return any(o.is_gain for o in self.oscillators)

    @property
    def has_drude(self):
        return any(o.resonance == 0 for o in self.oscillators)

    def susceptibility(self, omega):
        omega = np.asarray(omega, dtype=complex)
        chi = np.zeros_like(omega)
        for osc in self.oscillators:
            chi = chi + osc.susceptibility(omega)
        return chi

    def permittivity(self, omega):
        return 1.0 + self.susceptibility(omega)

    def contains(self, z):
        return (z >= self.z_min) & (z <= self.z_max)


@dataclass(frozen=True)
class MediumModel:
    """Ordered, non-overlapping layers embedded in vacuum."""

    layers: tuple = field(default_factory=tuple)

    def __post_init__(self):
        layers = tuple(sorted(self.layers, key=lambda l: l.z_min))
        for a, b in zip(layers[:-1], layers[1:]):
            if b.z_min < a.z_max:
                raise ValueError("layers overlap")
        object.__setattr__(self, "layers", layers)

    @property
    def has_gain(self):
        return any(l.has_gain for l in self.layers)

    @property
    def is_local(self):
        return all(l.is_local for l in self.layers)

    @property
    def extent(self):
        if not self.layers:
            return None
        return self.layers[0].z_min, self.layers[-1].z_max

    def resonances(self):
        """``(center, width)`` of every oscillator, without duplicates."""
        out = []
        for l in self.layers:
            for o in l.oscillators:
                r = (float(o.resonance), float(o.damping))
                if r not in out:
                    out.append(r)
        return sorted(out)

    def top_resonance(self):
        res = self.resonances()
        return max((max(c, g) for c, g in res), default=0.0)

    def with_gain_scaled(self, factor):
        """Copy with every gain strength multiplied by ``factor``."""
        layers = []
        for l in self.layers:
            osc = tuple(replace(o, strength=o.strength * factor) if o.is_gain else o
                        for o in l.oscillators)
            layers.append(replace(l, oscillators=osc))
        return MediumModel(tuple(layers))


def permittivity(model, z, omega):
    """Relative permittivity at positions ``z`` (vacuum outside the layers)."""
    z = np.asarray(z, dtype=float)
    eps = np.ones(z.shape, dtype=complex)
    for layer in reversed(model.layers):
        eps = np.where(layer.contains(z), layer.permittivity(omega), eps)
    return eps


def _wendland(r):
    # compactly supported, positive definite in up to three dimensions
    t = np.clip(1.0 - r, 0.0, None)
    return t**4 * (4.0 * r + 1.0)


def _nonlocal_profile(grid, m, length, iters=500):
    """Symmetric smoothing kernel supported where ``m > 0``.

    A Gaussian of width ``length`` times a Wendland taper (support
    ``6 length``) is positive definite. It is rescaled symmetrically,
    ``M = D g D`` with positive diagonal ``D``, so that every row integrates
    to the cell fraction ``m_i``; as ``length -> 0`` this reduces to the
    local profile ``diag(m / w)``.
    """
    w = grid.weights
    idx = np.flatnonzero(m > 0)
    z = grid.nodes[idx]
    d = np.abs(z[:, None] - z[None, :])
    g = np.exp(-0.5 * (d / length) ** 2) * _wendland(d / (6.0 * length))
    gw = g * w[idx][None, :]
    target = m[idx]
    dvec = np.sqrt(target / (gw @ np.ones_like(target)))
    for _ in range(iters):
        new = np.sqrt(dvec * target / (gw @ dvec))
        done = np.max(np.abs(new - dvec) / new) < 1e-15
        dvec = new
        if done:
            break
    M = np.zeros((grid.n, grid.n))
    M[np.ix_(idx, idx)] = dvec[:, None] * g * dvec[None, :]
    return 0.5 * (M + M.T)


def layer_profiles(model, grid):
    """Spatial profile kernels ``M_l`` of every layer on ``grid``."""
    e = grid.edges
    out = []
    for layer in model.layers:
        if layer.z_min < e[0] - 1e-12 * grid.length or layer.z_max > e[-1] + 1e-12 * grid.length:
            raise GridMismatch("grid does not cover every layer")
        m = grid.fractions(layer.z_min, layer.z_max)
        if layer.is_local:
            M = np.diag(m / grid.weights)
        else:
            M = _nonlocal_profile(grid, m, layer.nonlocal_length)
        out.append(M)
    return out


def build_kernel(model, grid, omega, constants=NATURAL, profiles=None):
    """Conductivity kernel ``Q(z, z', omega)`` on ``grid``.

    Parameters
    ----------
    model : MediumModel
    grid : SpatialGrid
        Must cover all layers.
    omega : complex
        Frequency with ``Im omega >= 0``.
    constants : Constants, optional
    profiles : list of ndarray, optional
        Precomputed :func:`layer_profiles`.

    Returns
    -------
    Kernel
        Symmetric (reciprocal) kernel.
    """
    omega = complex(omega)
    if profiles is None:
        profiles = layer_profiles(model, grid)
    Q = np.zeros((grid.n, grid.n), dtype=complex)
    for layer, M in zip(model.layers, profiles):
        Q += (-1j * constants.eps0 * omega * complex(layer.susceptibility(omega))) * M
    return Kernel(Q, grid, omega)


def check_schwarz(model, omega):
    """Largest relative deviation from ``eps(-omega) = eps(omega)^*``."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    worst = 0.0
    for layer in model.layers:
        a = layer.permittivity(omega)
        b = np.conj(layer.permittivity(-omega))
        worst = max(worst, float(np.max(np.abs(a - b) / np.abs(a))))
    return worst


def _response(layer):
    # chi itself, or -i omega chi if a Drude term makes chi singular at 0
    if layer.has_drude:
        return lambda om: -1j * om * layer.susceptibility(om)
    return layer.susceptibility


def _hilbert(fun, nodes, weights, omega_max, targets):
    """(1/pi) P int_0^inf Im r(u) 2u / (u^2 - w^2) du at each target ``w``.

    Singularity subtraction on the quadrature rule plus the exact log term
    on ``[0, omega_max]``; the remainder beyond ``omega_max`` by adaptive
    quadrature of the closed-form model.
    """
    imr = fun(nodes).imag
    out = np.empty(targets.size)
    for k, t in enumerate(targets):
        h = 2.0 * nodes * imr / (nodes + t)
        ht = fun(t).imag
        d = nodes - t
        near = np.abs(d) < 1e-9 * omega_max
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(near, 0.0, (h - ht) / d)
        if near.any():
            dt = 1e-6 * max(t, 1e-6 * omega_max)
            hp = (2 * (t + dt) * fun(t + dt).imag / (2 * t + dt)
                  - 2 * (t - dt) * fun(t - dt).imag / (2 * t - dt)) / (2 * dt)
            f[near] = hp
        main = np.sum(weights * f) + ht * np.log((omega_max - t) / t)
        tail = quad(lambda u: fun(u).imag * 2 * u / (u * u - t * t), omega_max, np.inf,
                    limit=200, epsabs=0, epsrel=1e-12)[0]
        out[k] = (main + tail) / np.pi
    return out


def check_kramers_kronig(model, omega_grid=None, tol=1e-3, n=1024):
    """Kramers-Kronig consistency of every layer's response.

    The real part of the susceptibility (or of ``-i omega chi`` for layers
    with a Drude term) is reconstructed from the imaginary part with the
    one-sided principal-value transform and compared at test frequencies
    in ``(0, omega_max / 2)``.

    Returns
    -------
    float
        Largest residual relative to ``max |response|``.

    Raises
    ------
    GridTooCoarse
        If halving the grid changes the reconstruction by more than ``tol``.
    """
    if not model.layers:
        return 0.0
    if omega_grid is None:
        omega_max = 40.0 * max(model.top_resonance(), 1e-300)
        omega_grid = FrequencyGrid.clustered(omega_max, n, model.resonances())
    coarse = omega_grid.coarsened()
    nodes = omega_grid.nodes
    targets = nodes[(nodes < 0.5 * omega_grid.omega_max)][1::4]
    worst = 0.0
    for layer in model.layers:
        fun = _response(layer)
        r = fun(targets)
        scale = np.max(np.abs(r))
        fine = _hilbert(fun, nodes, omega_grid.weights, omega_grid.omega_max, targets)
        rough = _hilbert(fun, coarse.nodes, coarse.weights, coarse.omega_max, targets)
        estimate = np.max(np.abs(fine - rough)) / scale
        if estimate > tol:
            raise GridTooCoarse(f"KK quadrature error estimate {estimate:.2e} exceeds {tol:.1e}",
                                estimate)
        worst = max(worst, float(np.max(np.abs(r.real - fine)) / scale))
    return worst
