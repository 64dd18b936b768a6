"""Integral kernels on a spatial grid and their spectral calculus.

A kernel ``K(z, z')`` is stored by its values at the grid nodes. Kernels
compose with the quadrature weights in between,

    (A o B)(z_i, z_j) = sum_k A(z_i, z_k) w_k B(z_k, z_j),

so the identity kernel is ``diag(1 / w)`` and the matrix acting on nodal
values is ``K W``. Hermitian kernels are diagonalized through the
symmetric form ``W^(1/2) K W^(1/2)`` whose eigenvectors ``u`` give
eigenfunctions ``F = W^(-1/2) u`` normalized by ``sum w |F|^2 = 1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (GridMismatch, NonPositiveSpectrum, NotHermitian,
                     NotReciprocal, ZeroEigenvalue)
from .grids import SpatialGrid

REL_REG = 1e-12


@dataclass(frozen=True, eq=False)
class Kernel:
    """Complex kernel sampled at the nodes of ``grid``.

    Parameters
    ----------
    values : (n, n) array_like
        Kernel values ``K(z_i, z_j)``.
    grid : SpatialGrid
    omega : complex, optional
        Frequency the kernel belongs to, if any.
    info : dict, optional
        Free-form diagnostics attached by the producer.
    """

    values: np.ndarray
    grid: SpatialGrid
    omega: complex = None
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        n = self.grid.n
        if v.shape != (n, n):
            raise GridMismatch(f"kernel shape {v.shape} does not match grid of {n} nodes")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def identity(cls, grid, omega=None):
        return cls(np.diag(1.0 / grid.weights), grid, omega)

    @classmethod
    def zeros(cls, grid, omega=None):
        return cls(np.zeros((grid.n, grid.n)), grid, omega)

    @classmethod
    def from_operator(cls, matrix, grid, omega=None):
        """Kernel whose action on nodal values is ``matrix``."""
        return cls(np.asarray(matrix) / grid.weights[None, :], grid, omega)

    @classmethod
    def from_symmetric(cls, matrix, grid, omega=None):
        """Inverse of :meth:`symmetric`."""
        s = 1.0 / np.sqrt(grid.weights)
        return cls(s[:, None] * np.asarray(matrix) * s[None, :], grid, omega)

    def _wrap(self, values, other=None):
        omega = self.omega
        if omega is None and other is not None:
            omega = other.omega
        return Kernel(values, self.grid, omega)

    def _check(self, other):
        if not isinstance(other, Kernel):
            return NotImplemented
        if not self.grid.same_as(other.grid):
            raise GridMismatch("kernels live on different grids")
        return other

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap((self.values * self.grid.weights[None, :]) @ other.values, other)

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.values + other.values, other)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self._wrap(self.values - other.values, other)

    def __neg__(self):
        return self._wrap(-self.values)

    def __mul__(self, scalar):
        if isinstance(scalar, Kernel):
            return NotImplemented
        return self._wrap(scalar * self.values)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.values / scalar)

    @property
    def H(self):
        """Adjoint kernel ``K^+(z, z') = K(z', z)^*``."""
        return self._wrap(self.values.conj().T)

    @property
    def T(self):
        return self._wrap(self.values.T)

    @property
    def real(self):
        return self._wrap(self.values.real)

    @property
    def imag(self):
        return self._wrap(self.values.imag)

    def hermitian_part(self):
        return self._wrap(0.5 * (self.values + self.values.conj().T))

    def operator(self):
        """Matrix acting on nodal values."""
        return self.values * self.grid.weights[None, :]

    def symmetric(self):
        """``W^(1/2) K W^(1/2)``, unitarily similar to the operator."""
        s = np.sqrt(self.grid.weights)
        return s[:, None] * self.values * s[None, :]

    def norm(self):
        """Hilbert-Schmidt norm of the integral operator."""
        return float(np.linalg.norm(self.symmetric()))

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def is_hermitian(self, tol=1e-10):
        scale = self.norm()
        return (self - self.H).norm() <= tol * scale if scale > 0 else True

    def eigvalsh(self):
        """Eigenvalues of the Hermitian part, ascending."""
        h = self.symmetric()
        return np.linalg.eigvalsh(0.5 * (h + h.conj().T))


def rel_diff(a, b):
    """Relative difference ``||a - b|| / ||b||`` in the Hilbert-Schmidt norm."""
    den = b.norm()
    num = (a - b).norm()
    return num / den if den > 0 else num


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigen-decomposition ``sigma = sum_a s_a F_a F_a^*`` of a Hermitian kernel.

    Eigenvalues are sorted in descending order. ``vectors[:, a]`` holds the
    eigenfunction ``F_a`` at the nodes, orthonormal in the weighted inner
    product.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    grid: SpatialGrid
    omega: complex = None

    def __post_init__(self):
        lam = np.array(self.eigenvalues, dtype=float)
        vec = np.array(self.vectors, dtype=complex)
        lam.flags.writeable = False
        vec.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "vectors", vec)

    def __len__(self):
        return self.eigenvalues.size

    @property
    def scale(self):
        return float(np.max(np.abs(self.eigenvalues))) if len(self) else 0.0

    def default_regularizer(self):
        s = self.scale
        return REL_REG * s if s > 0 else REL_REG

    def function(self, values):
        """Kernel ``sum_a values[a] F_a F_a^*``."""
        F = self.vectors
        return Kernel((F * np.asarray(values)[None, :]) @ F.conj().T, self.grid, self.omega)

    def reconstruct(self):
        return self.function(self.eigenvalues)


def hermitian_split(Q, tol=1e-10):
    """Split a reciprocal kernel into Hermitian and anti-Hermitian parts.

    Returns ``(sigma, tau)`` with ``Q = sigma + i tau`` and both parts
    Hermitian. For a symmetric ``Q`` these are ``Re Q`` and ``Im Q``.

    Raises
    ------
    NotReciprocal
        If ``||Q - Q^T|| > tol ||Q||``.
    """
    scale = Q.norm()
    if (Q - Q.T).norm() > tol * scale:
        raise NotReciprocal("conductivity kernel is not symmetric")
    sigma = 0.5 * (Q + Q.H)
    tau = (Q - Q.H) * (-0.5j)
    return sigma, tau


def spectral_decompose(sigma, tol=1e-10):
    """Spectral decomposition of a Hermitian kernel.

    Exactly diagonal kernels (local media) are decomposed without an
    eigensolver so that each eigenfunction is localized on one node.
    Otherwise the phase of every eigenfunction is fixed by making its
    largest-magnitude component real and positive.

    Raises
    ------
    NotHermitian
        If ``||sigma - sigma^+|| > tol ||sigma||``.
    """
    scale = sigma.norm()
    if scale > 0 and (sigma - sigma.H).norm() > tol * scale:
        raise NotHermitian("kernel is not Hermitian")
    w = sigma.grid.weights
    h = sigma.symmetric()
    h = 0.5 * (h + h.conj().T)
    if not np.any(h - np.diag(np.diag(h))):
        lam = np.diag(h).real.copy()
        u = np.eye(len(w), dtype=complex)
    else:
        lam, u = np.linalg.eigh(h)
        k = np.argmax(np.abs(u), axis=0)
        ph = u[k, np.arange(u.shape[1])]
        u = u * (ph.conj() / np.abs(ph))[None, :]
    order = np.argsort(-lam, kind="stable")
    lam, u = lam[order], u[:, order]
    F = u / np.sqrt(w)[:, None]
    return SpectralDecomposition(lam, F, sigma.grid, sigma.omega)


def is_dissipative(spec, tol=None):
    """True iff no eigenvalue lies below ``-tol``.

    The default tolerance is the regularizer ``1e-12 max|sigma|``, so
    vanishing (vacuum) channels count as non-negative.
    """
    if tol is None:
        tol = spec.default_regularizer()
    return bool(len(spec) == 0 or spec.eigenvalues.min() >= -tol)


def inverse_kernel(spec, eps_reg=None):
    """Regularized inverse kernel ``rho`` with ``rho o sigma = id``.

    Eigenvalues with ``|s| <= eps_reg`` are replaced by ``sign(s) eps_reg``
    (zero counts as positive); their indices are listed in
    ``info["clamped"]``.
    """
    if eps_reg is None:
        eps_reg = spec.default_regularizer()
    lam = spec.eigenvalues
    small = np.abs(lam) <= eps_reg
    safe = np.where(small, np.where(lam < 0, -eps_reg, eps_reg), lam)
    rho = spec.function(1.0 / safe)
    rho.info["clamped"] = np.flatnonzero(small).tolist()
    rho.info["eps_reg"] = eps_reg
    return rho


def factor_K(spec, tol=None):
    """Hermitian square root ``K`` with ``K o K^+ = sigma``.

    Raises
    ------
    NonPositiveSpectrum
        If ``spec`` is not dissipative at tolerance ``tol``.
    """
    if not is_dissipative(spec, tol):
        raise NonPositiveSpectrum(
            f"smallest eigenvalue {spec.eigenvalues.min():.3e} is negative")
    return spec.function(np.sqrt(np.clip(spec.eigenvalues, 0.0, None)))


def sigma_av(spec):
    """Absolute value kernel ``|sigma| = sum_a |s_a| F_a F_a^*``."""
    return spec.function(np.abs(spec.eigenvalues))


def parity_kernel(spec, eps_reg=None):
    """Sign kernel ``sum_a sgn(s_a) F_a F_a^*``.

    Raises
    ------
    ZeroEigenvalue
        If some ``|s_a| < eps_reg`` so that its sign is undefined.
    """
    if eps_reg is None:
        eps_reg = spec.default_regularizer()
    lam = spec.eigenvalues
    bad = np.flatnonzero(np.abs(lam) < eps_reg)
    if bad.size:
        raise ZeroEigenvalue(f"{bad.size} eigenvalue(s) below regularizer {eps_reg:.3e}")
    return spec.function(np.sign(lam))
