"""Sign-partitioned channel structure of the noise current.

Each eigenchannel ``F_a`` of the Hermitian conductivity ``sigma`` with
``sigma_a > 0`` carries a bosonic annihilation operator in the noise
current, a channel with ``sigma_a < 0`` a creation operator. Only the
c-number second moments and commutators of those operators are
represented here.
"""

from dataclasses import dataclass, field

import numpy as np

from .constants import NATURAL
from .operator_core import Kernel, parity_kernel


@dataclass(frozen=True, eq=False)
class Channel:
    """Spectral channel ``a`` with eigenvalue ``sigma`` and amplitude ``|sigma|^(1/2)``."""

    index: int
    sigma: float
    vector: np.ndarray = field(repr=False)

    @property
    def amplitude(self):
        return float(np.sqrt(abs(self.sigma)))

    def noise_amplitude(self, omega, constants=NATURAL):
        """Amplitude of the noise current, ``(hbar omega / pi)^(1/2) |sigma|^(1/2)``."""
        return float(np.sqrt(constants.hbar * omega / np.pi) * self.amplitude)


@dataclass(frozen=True, eq=False)
class ChannelPartition:
    """Channels split into annihilator (``plus``) and creator (``minus``) sectors."""

    omega: float
    plus: tuple
    minus: tuple
    dropped: tuple
    grid: object
    eps_reg: float

    @property
    def size(self):
        return len(self.plus) + len(self.minus) + len(self.dropped)

    def frequency_labels(self):
        """Frequency attached to each retained channel (always ``+omega``)."""
        return [self.omega] * (len(self.plus) + len(self.minus))

    def _kernel(self, channels):
        n = self.grid.n
        if not channels:
            return Kernel(np.zeros((n, n)), self.grid, self.omega)
        F = np.stack([c.vector for c in channels], axis=1)
        s = np.array([abs(c.sigma) for c in channels])
        return Kernel((F * s[None, :]) @ F.conj().T, self.grid, self.omega)


@dataclass(frozen=True)
class HamiltonianSpectrum:
    """Energy signs ``sgn sigma_a``: each quantum in channel ``a`` carries ``hbar omega sgn``."""

    omega: float
    signs: tuple

    @property
    def no_ground_state(self):
        return any(s < 0 for s in self.signs)

    def energies(self, constants=NATURAL):
        return [constants.hbar * self.omega * s for s in self.signs]


def partition_channels(spec, eps_reg=None):
    """Split the spectral channels of ``spec`` by the sign of ``sigma_a``.

    Channels with ``|sigma_a| <= eps_reg`` are dropped and listed in
    ``dropped``; the default regularizer is ``1e-12 max|sigma|``.
    """
    if eps_reg is None:
        eps_reg = spec.default_regularizer()
    plus, minus, dropped = [], [], []
    for a, s in enumerate(spec.eigenvalues):
        ch = Channel(a, float(s), spec.vectors[:, a])
        if abs(s) <= eps_reg:
            dropped.append(ch)
        elif s > 0:
            plus.append(ch)
        else:
            minus.append(ch)
    omega = None if spec.omega is None else float(np.real(spec.omega))
    return ChannelPartition(omega, tuple(plus), tuple(minus), tuple(dropped), spec.grid, eps_reg)


def noise_covariances(part, constants=NATURAL, omega=None):
    """Vacuum second moments of the noise current.

    Returns
    -------
    C_anti, C_norm : Kernel
        ``C_anti = (hbar omega/pi) sum_(+) sigma_a F_a F_a^*`` from the
        annihilator channels and ``C_norm = (hbar omega/pi) sum_(-)
        |sigma_a| F_a F_a^*`` from the creator channels.
    """
    omega = part.omega if omega is None else omega
    pref = constants.hbar * omega / np.pi
    return pref * part._kernel(part.plus), pref * part._kernel(part.minus)


def commutator_kernel(part, constants=NATURAL, omega=None):
    """Equal-frequency commutator of the noise current, ``C_anti - C_norm``.

    Equals ``(hbar omega/pi) sigma`` whatever the sign structure.
    """
    c_anti, c_norm = noise_covariances(part, constants, omega)
    return c_anti - c_norm


def parity_commutator_tilde_f(spec, eps_reg=None):
    """Commutator kernel of the rescaled field variables: the parity kernel.

    For local media this is diagonal with entries ``sgn sigma(z_i) / w_i``.
    """
    return parity_kernel(spec, eps_reg)


def hamiltonian_spectrum(spec, eps_reg=None):
    """Signs of the channel energies (dropped channels are omitted)."""
    part = partition_channels(spec, eps_reg)
    signs = sorted([(c.index, 1) for c in part.plus] + [(c.index, -1) for c in part.minus])
    return HamiltonianSpectrum(part.omega, tuple(s for _, s in signs))
