"""Spatial and frequency quadrature grids."""

from dataclasses import dataclass, field
from functools import partial

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .constants import NATURAL
from .errors import GridMismatch


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Quadrature nodes ``z_i`` and positive weights ``w_i`` on a line.

    Every node owns the dual cell of length ``w_i``; the cells tile the
    interval ``[edges[0], edges[-1]]`` so that ``sum(w)`` is its length.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        z = _frozen(self.nodes)
        w = _frozen(self.weights)
        if z.ndim != 1 or z.shape != w.shape or z.size < 2:
            raise ValueError("nodes and weights must be 1-d arrays of equal length >= 2")
        if not np.all(np.isfinite(z)) or not np.all(np.diff(z) > 0):
            raise ValueError("nodes must be finite and strictly increasing")
        if not np.all(w > 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "nodes", z)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, z_min, z_max, n):
        """Cell-centred uniform grid with ``n`` cells on ``[z_min, z_max]``."""
        if not z_max > z_min or n < 2:
            raise ValueError("need z_max > z_min and n >= 2")
        h = (z_max - z_min) / n
        return cls(z_min + (np.arange(n) + 0.5) * h, np.full(n, h))

    def __len__(self):
        return self.nodes.size

    @property
    def n(self):
        return self.nodes.size

    @property
    def edges(self):
        e0 = self.nodes[0] - 0.5 * self.weights[0]
        return np.concatenate([[e0], e0 + np.cumsum(self.weights)])

    @property
    def length(self):
        return float(np.sum(self.weights))

    @property
    def spacing(self):
        """Common node spacing of a uniform grid, else ``None``."""
        h = self.weights[0]
        if np.allclose(self.weights, h, rtol=1e-12, atol=0) and np.allclose(
            np.diff(self.nodes), h, rtol=1e-10, atol=0
        ):
            return float(h)
        return None

    def require_uniform(self):
        h = self.spacing
        if h is None:
            raise GridMismatch("operation requires a uniform cell-centred grid")
        return h

    def fractions(self, a, b):
        """Fraction of each dual cell lying inside ``[a, b]``."""
        e = self.edges
        lo = np.maximum(e[:-1], a)
        hi = np.minimum(e[1:], b)
        return np.clip(hi - lo, 0.0, None) / self.weights

    def same_as(self, other):
        return self is other or (
            self.n == other.n
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


def gauss_legendre(a, b, n):
    x, w = leggauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def clustered_unit_nodes(n, centers=(), widths=(), fraction=0.5):
    """Midpoint nodes on (0, 1) clustered around Lorentzian peaks.

    The node density is a mixture of a uniform part and normalized
    Lorentzians of the given centers and widths. Returns nodes ``u`` and
    weights ``du`` such that ``sum(f(u) * du)`` approximates the integral
    of ``f`` over the unit interval.
    """
    x = (np.arange(n) + 0.5) / n
    peaks = [(c, g) for c, g in zip(centers, widths) if g > 0]
    if not peaks or fraction <= 0:
        return x, np.full(n, 1.0 / n)
    share = fraction / len(peaks)
    norms = [np.arctan((1 - c) / g) - np.arctan(-c / g) for c, g in peaks]

    def cdf(u):
        out = (1 - fraction) * u
        for (c, g), s in zip(peaks, norms):
            out += share * (np.arctan((u - c) / g) - np.arctan(-c / g)) / s
        return out

    def pdf(u):
        out = (1 - fraction) + 0 * u
        for (c, g), s in zip(peaks, norms):
            out += share * g / ((u - c) ** 2 + g**2) / s
        return out

    u = np.array([brentq(lambda v, t=t: cdf(v) - t, 0.0, 1.0, xtol=1e-15) for t in x])
    return u, 1.0 / (n * pdf(u))


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Quadrature rule for frequency integrals over ``[0, omega_max]``.

    ``nodes``/``weights`` are real nodes on the positive axis. An optional
    complex path (``path_nodes``/``path_weights``) replaces the real axis on
    ``[band_split, omega_max]``; integrals of analytic integrands then use
    the path, everything else uses the real nodes alone.
    """

    nodes: np.ndarray
    weights: np.ndarray
    omega_max: float
    path_nodes: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    path_weights: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    band_split: float = None
    builder: object = field(default=None, repr=False)
    size: tuple = (0, 0)

    def __post_init__(self):
        om = _frozen(self.nodes)
        wt = _frozen(self.weights)
        if om.ndim != 1 or om.shape != wt.shape:
            raise ValueError("nodes and weights must be 1-d arrays of equal length")
        if not np.all(om > 0) or not np.all(np.diff(om) > 0):
            raise ValueError("frequency nodes must be positive and increasing")
        object.__setattr__(self, "nodes", om)
        object.__setattr__(self, "weights", wt)
        object.__setattr__(self, "path_nodes", _frozen(self.path_nodes, complex))
        object.__setattr__(self, "path_weights", _frozen(self.path_weights, complex))
        if self.band_split is None:
            object.__setattr__(self, "band_split", float(self.omega_max))

    @property
    def has_path(self):
        return self.path_nodes.size > 0

    def rebuild(self, factor):
        """Same construction with the node counts scaled by ``factor``."""
        if self.builder is None:
            raise ValueError("grid was not built by a named constructor")
        n, n_path = self.size
        return self.builder(max(int(round(n * factor)), 2), max(int(round(n_path * factor)), 0))

    def coarsened(self):
        return self.rebuild(0.5)

    def refined(self):
        return self.rebuild(2.0)

    @classmethod
    def clustered(cls, omega_max, n, resonances=(), fraction=0.5):
        """Real midpoint rule on ``[0, omega_max]`` clustered at resonances.

        ``resonances`` is a sequence of ``(center, width)`` pairs.
        """
        return _clustered(omega_max, tuple(resonances), fraction, n, 0)

    @classmethod
    def lattice(cls, grid, omega_max, n=320, n_path=None, resonances=(),
                constants=NATURAL, split=0.75, lift=0.2, fraction=0.5):
        """Frequency rule adapted to a uniform lattice of spacing ``h``.

        Real nodes cover ``[0, split * omega_c]`` with ``omega_c = 2c/h`` the
        lattice band edge, equidistant in the Bloch phase and clustered at
        resonances. The remainder up to ``omega_max`` is a rectangular path
        lifted by ``lift * omega_c`` into the upper half plane.
        """
        h = grid.require_uniform()
        omega_c = 2.0 * constants.c / h
        if n_path is None:
            n_path = 3 * n // 5
        return _lattice(omega_c, float(omega_max), tuple(resonances), split, lift,
                        fraction, n, n_path)


def _clustered(omega_max, resonances, fraction, n, n_path):
    centers = [c / omega_max for c, g in resonances]
    widths = [g / omega_max for c, g in resonances]
    u, du = clustered_unit_nodes(n, centers, widths, fraction)
    return FrequencyGrid(
        omega_max * u, omega_max * du, float(omega_max),
        builder=partial(_clustered, omega_max, resonances, fraction),
        size=(n, 0),
    )


def _lattice(omega_c, omega_max, resonances, split, lift, fraction, n, n_path):
    builder = partial(_lattice, omega_c, omega_max, resonances, split, lift, fraction)
    omega_a = min(split * omega_c, omega_max)
    theta_a = 2.0 * np.arcsin(omega_a / omega_c)
    centers, widths = [], []
    for c, g in resonances:
        if 0 <= c < omega_a:
            centers.append(2.0 * np.arcsin(c / omega_c) / theta_a)
            widths.append(g / (omega_c * np.cos(np.arcsin(c / omega_c))) / theta_a)
    u, du = clustered_unit_nodes(n, centers, widths, fraction)
    theta = theta_a * u
    nodes = omega_c * np.sin(0.5 * theta)
    weights = 0.5 * omega_c * np.cos(0.5 * theta) * theta_a * du

    pn, pw = [], []
    if omega_max > omega_a and n_path >= 8:
        height = lift * omega_c
        n_leg = max(n_path // 4, 2)
        n_top = n_path - 2 * n_leg
        n_pan = max(int(np.ceil(n_top / 16)), 1)
        n_per = max(n_top // n_pan, 2)
        y, wy = gauss_legendre(0.0, height, n_leg)
        pn.append(omega_a + 1j * y)
        pw.append(1j * wy)
        for a, b in zip(*[np.linspace(omega_a, omega_max, n_pan + 1)[s] for s in
                          (slice(None, -1), slice(1, None))]):
            x, wx = gauss_legendre(a, b, n_per)
            pn.append(x + 1j * height)
            pw.append(wx + 0j)
        pn.append(omega_max + 1j * y)
        pw.append(-1j * wy)
    elif omega_max > omega_a:
        raise GridMismatch("path requires at least 8 nodes")
    return FrequencyGrid(
        nodes, weights, omega_max,
        np.concatenate(pn) if pn else np.zeros(0, complex),
        np.concatenate(pw) if pw else np.zeros(0, complex),
        band_split=omega_a, builder=builder, size=(n, n_path),
    )
