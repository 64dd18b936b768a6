"""Discretized Helmholtz operator and its Green function.

On a uniform cell-centred grid of spacing ``h`` the operator

    (-d^2/dz^2 - omega^2/c^2) E - i mu0 omega Q o E

is discretized by the three-point Laplacian. The grid is closed by the
exact outgoing condition of a semi-infinite vacuum lattice with the same
spacing: outside the domain the field behaves as ``lambda^n`` with

    lambda = exp(i theta),  sin(theta / 2) = omega h / (2 c),

the root with ``|lambda| <= 1`` for ``Im omega >= 0``. In kernel form the
closure is an extra conductance ``Q_ext`` on the two boundary nodes; its
Hermitian part is the (non-negative) radiative loss into the exterior.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import NATURAL
from .errors import AnalyticityViolation, GridMismatch, SingularOperator
from .media import build_kernel, layer_profiles
from .operator_core import Kernel

COND_MAX = 1e13


def lattice_phase(omega, h, c=1.0):
    """Bloch phase ``theta`` of the outgoing vacuum lattice wave.

    Real frequencies beyond the band edge ``2c/h`` give an evanescent
    wave with ``Re theta = +-pi``; complex ``omega`` in the upper half
    plane give ``Im theta > 0``.
    """
    omega = complex(omega)
    x = omega * h / c
    if omega.imag == 0:
        x = x.real
        if abs(x) <= 2:
            return complex(2 * np.arcsin(x / 2))
        return complex(np.sign(x) * np.pi, 2 * np.arccosh(abs(x) / 2))
    return complex(2 * np.arcsin(x / 2))


def lattice_lambda(omega, h, c=1.0):
    """Outgoing lattice factor ``exp(i theta)``, exactly real beyond the band edge."""
    omega = complex(omega)
    x = omega.real * h / c
    if omega.imag == 0 and abs(x) > 2:
        return complex(-np.exp(-2 * np.arccosh(abs(x) / 2)))
    return complex(np.exp(1j * lattice_phase(omega, h, c)))


def stiffness_kernel(grid):
    """Kernel of ``-d^2/dz^2`` with zero-flux ends, ``W^-1 S W^-1``."""
    z = grid.nodes
    g = 1.0 / np.diff(z)
    S = np.diag(np.concatenate([g, [0]]) + np.concatenate([[0], g]))
    S -= np.diag(g, 1) + np.diag(g, -1)
    winv = 1.0 / grid.weights
    return Kernel(winv[:, None] * S * winv[None, :], grid)


def exterior_kernel(grid, omega, constants=NATURAL):
    """Conductance kernel equivalent to the outgoing lattice closure."""
    h = grid.require_uniform()
    omega = complex(omega)
    if omega == 0:
        raise SingularOperator("exterior closure undefined at omega = 0", np.inf)
    lam = lattice_lambda(omega, h, constants.c)
    w = grid.weights
    q = np.zeros((grid.n, grid.n), dtype=complex)
    for k in (0, -1):
        q[k, k] = 1j * (1 - lam) / (constants.mu0 * omega * h * w[k] ** 2)
    return Kernel(q, grid, omega)


@dataclass(frozen=True, eq=False)
class MaxwellOperator:
    """Kernel ``A`` of the discretized wave operator at frequency ``omega``."""

    values: np.ndarray
    grid: object
    omega: complex
    medium: Kernel
    exterior: Kernel
    constants: object = NATURAL
    boundary: str = "outgoing-lattice"

    def kernel(self):
        return Kernel(self.values, self.grid, self.omega)

    def symmetric(self):
        s = np.sqrt(self.grid.weights)
        return s[:, None] * self.values * s[None, :]


@dataclass(frozen=True, eq=False)
class GreenFunction(Kernel):
    """Green kernel ``G`` with ``A o G = id``.

    ``exterior`` is the closure conductance at this frequency, ``condition``
    the 2-norm condition number of the symmetric operator.
    """

    exterior: Kernel = None
    condition: float = np.nan
    boundary: str = "outgoing-lattice"

    def exterior_sigma(self):
        """Radiative loss conductance (Hermitian part of the closure)."""
        return self.exterior.hermitian_part()


def assemble_operator(Q, omega=None, constants=NATURAL, continued=False):
    """Assemble the wave operator for conductivity kernel ``Q``.

    Parameters
    ----------
    Q : Kernel
        Medium conductivity kernel at ``omega``.
    omega : complex, optional
        Defaults to ``Q.omega``. Must satisfy ``Im omega >= 0``.
    continued : bool, optional
        Allow ``Im omega < 0`` (analytic continuation through the band,
        used when locating resonances).
    """
    omega = complex(Q.omega if omega is None else omega)
    if omega.imag < 0 and not continued:
        raise ValueError("operator is only defined for Im omega >= 0")
    grid = Q.grid
    grid.require_uniform()
    ext = exterior_kernel(grid, omega, constants)
    L = stiffness_kernel(grid)
    A = (L.values - (omega / constants.c) ** 2 * np.diag(1.0 / grid.weights)
         - 1j * constants.mu0 * omega * (Q.values + ext.values))
    return MaxwellOperator(A, grid, omega, Q, ext, constants)


def solve_green(A, scan=None):
    """Green kernel of operator ``A``.

    Parameters
    ----------
    A : MaxwellOperator
    scan : PoleScan, optional
        Required when ``Im omega > 0``: a clean scan whose region contains
        ``omega``.

    Raises
    ------
    SingularOperator
        If the condition number exceeds ``1e13``.
    AnalyticityViolation
        For complex ``omega`` without a clean covering pole scan.
    """
    if A.omega.imag > 0:
        if scan is None or not scan.covers(A.omega):
            raise AnalyticityViolation("complex frequency not covered by a pole scan")
        if scan.poles:
            raise AnalyticityViolation("pole scan found upper-half-plane poles", scan.poles)
    grid = A.grid
    sym = A.symmetric()
    sv = np.linalg.svd(sym, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if not np.isfinite(cond) or cond > COND_MAX:
        raise SingularOperator(f"wave operator singular (condition {cond:.2e})", cond)
    s = 1.0 / np.sqrt(grid.weights)
    G = s[:, None] * np.linalg.solve(sym, np.diag(s))
    return GreenFunction(G, grid, A.omega, exterior=A.exterior, condition=float(cond),
                         boundary=A.boundary)


def green_function(model, grid, omega, constants=NATURAL, profiles=None, scan=None):
    """Convenience wrapper: medium kernel, operator and Green kernel."""
    Q = build_kernel(model, grid, omega, constants, profiles)
    return solve_green(assemble_operator(Q, omega, constants), scan)


def verify_integral_relation(G, sigma, omega=None, constants=NATURAL):
    """Residual of ``mu0 omega G o sigma_tot o G^+ = Im G`` at real ``omega``.

    ``sigma_tot`` is the medium conductance ``sigma`` plus the radiative
    loss of the exterior closure. Returns the relative Hilbert-Schmidt
    residual.
    """
    omega = float(np.real(G.omega if omega is None else omega))
    total = sigma + G.exterior_sigma()
    lhs = (constants.mu0 * omega) * (G @ total @ G.H)
    rhs = Kernel(G.values.imag, G.grid)
    return (lhs - rhs).norm() / rhs.norm()


def vacuum_green(z, zp, omega, constants=NATURAL):
    """Continuum free-space kernel ``i c / (2 omega) exp(i omega |z - z'| / c)``."""
    d = np.abs(np.subtract.outer(np.asarray(z), np.asarray(zp)))
    return 1j * constants.c / (2 * omega) * np.exp(1j * omega * d / constants.c)


def lattice_vacuum_green(grid, omega, constants=NATURAL):
    """Closed form of the discrete vacuum Green kernel on a uniform grid."""
    h = grid.require_uniform()
    lam = lattice_lambda(omega, h, constants.c)
    n = np.arange(grid.n)
    d = np.abs(n[:, None] - n[None, :])
    return 1j * h / (2 * np.sin(lattice_phase(omega, h, constants.c))) * lam**d


# ---------------------------------------------------------------- pole scan

@dataclass(frozen=True, eq=False)
class PoleScan:
    """Result of a search for poles of ``G`` in a complex frequency box."""

    poles: tuple
    re_mesh: np.ndarray
    im_mesh: np.ndarray
    smin: np.ndarray
    median: float
    threshold: float
    round_trip: float = None
    candidates: tuple = field(default=(), repr=False)

    @property
    def clean(self):
        return not self.poles

    def covers(self, omega):
        omega = complex(omega)
        return (self.re_mesh[0] <= omega.real <= self.re_mesh[-1]
                and self.im_mesh[0] <= omega.imag <= self.im_mesh[-1] * (1 + 1e-12))


class _Sampler:
    def __init__(self, model, grid, constants):
        self.model, self.grid, self.constants = model, grid, constants
        self.profiles = layer_profiles(model, grid)

    def matrix(self, omega):
        Q = build_kernel(self.model, self.grid, omega, self.constants, self.profiles)
        return assemble_operator(Q, omega, self.constants, continued=True).symmetric()

    def smin(self, omega):
        return np.linalg.svd(self.matrix(omega), compute_uv=False)[-1]

    def small_eig(self, omega):
        ev = np.linalg.eigvals(self.matrix(omega))
        return ev[np.argmin(np.abs(ev))]


def _refine(sampler, w0, step, maxiter=60):
    """Secant iteration on the smallest-modulus eigenvalue."""
    x0, x1 = complex(w0), complex(w0) + 0.25 * step
    f0, f1 = sampler.small_eig(x0), sampler.small_eig(x1)
    for _ in range(maxiter):
        if f1 == f0:
            break
        x2 = x1 - f1 * (x1 - x0) / (f1 - f0)
        if not np.isfinite(x2) or abs(x2 - w0) > 20 * abs(step):
            return None
        x0, f0 = x1, f1
        x1 = x2
        f1 = sampler.small_eig(x1)
        if abs(x1 - x0) < 1e-13 * abs(x1):
            break
    return x1


def pole_scan(model, grid, region, resolution=(48, 12), constants=NATURAL,
              threshold=1e-6, re_mesh=None, im_mesh=None):
    """Scan ``sigma_min`` of the wave operator over a complex frequency box.

    Parameters
    ----------
    model : MediumModel
    grid : SpatialGrid
    region : (re_min, re_max, im_min, im_max)
        Box in the closed upper half plane.
    resolution : (int, int)
        Mesh points along the real and imaginary directions.
    threshold : float
        A refined candidate is a pole if its ``sigma_min`` is below
        ``threshold`` times the mesh median.
    re_mesh, im_mesh : array_like, optional
        Explicit mesh lines overriding ``region``/``resolution``.

    Returns
    -------
    PoleScan
        ``poles`` lists refined poles with ``Im omega > 0`` inside the box.
        For a gain layer between mirrors the largest phase-matched
        round-trip gain is attached as ``round_trip``.
    """
    re_min, re_max, im_min, im_max = map(float, region)
    if im_min < 0:
        raise ValueError("pole scan region must lie in the closed upper half plane")
    re = np.linspace(re_min, re_max, resolution[0]) if re_mesh is None else np.asarray(re_mesh, float)
    im = np.linspace(im_min, im_max, resolution[1]) if im_mesh is None else np.asarray(im_mesh, float)
    re = np.where(re == 0, 1e-9 * max(abs(re[-1]), 1.0), re)
    sampler = _Sampler(model, grid, constants)
    smin = np.array([[sampler.smin(complex(x, y)) for x in re] for y in im])
    median = float(np.median(smin))
    pad = np.pad(smin, 1, constant_values=np.inf)
    local = np.ones_like(smin, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                local &= smin <= pad[1 + di:1 + di + smin.shape[0], 1 + dj:1 + dj + smin.shape[1]]
    dre = np.max(np.diff(re)) if re.size > 1 else 1.0
    dim = np.max(np.diff(im)) if im.size > 1 else dre
    step = complex(dre, dim)
    scale = max(abs(re_max), abs(re_min), 1e-300)
    poles, cands = [], []
    for i, j in zip(*np.nonzero(local)):
        w0 = complex(re[j], im[i])
        w = _refine(sampler, w0, step)
        cands.append(w)
        if w is None or not (re[0] <= w.real <= re[-1]) or w.imag > im[-1]:
            continue
        if w.imag <= 1e-9 * scale:
            continue
        if sampler.smin(w) < threshold * median:
            if all(abs(w - p) > 1e-6 * scale for p in poles):
                poles.append(w)
    rt = None
    from .transfer import cavity_round_trip
    try:
        rt = cavity_round_trip(model, re, constants)
    except ValueError:
        rt = None
    return PoleScan(tuple(sorted(poles, key=lambda p: p.real)), re, im, smin, median,
                    threshold, rt, tuple(cands))
