"""Physical constants block.

All numerics run in whatever unit system the :class:`Constants` instance
describes. The default is natural units with ``c = eps0 = mu0 = hbar = 1``.
"""

from dataclasses import dataclass

import scipy.constants as sc


@dataclass(frozen=True)
class Constants:
    """Speed of light, vacuum permittivity and permeability, reduced Planck
    constant. ``eps0 * mu0 * c**2`` must equal one."""

    c: float = 1.0
    eps0: float = 1.0
    mu0: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("c", "eps0", "mu0", "hbar"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be positive")
        if abs(self.eps0 * self.mu0 * self.c**2 - 1.0) > 1e-9:
            raise ValueError("inconsistent constants: eps0*mu0*c**2 != 1")


NATURAL = Constants()
SI = Constants(c=sc.c, eps0=sc.epsilon_0, mu0=sc.mu_0, hbar=sc.hbar)


def get_units(name):
    """Return the constants block called ``name`` ("natural" or "si")."""
    table = {"natural": NATURAL, "si": SI}
    try:
        return table[name.lower()]
    except KeyError:
        raise ValueError(f"unknown unit system {name!r}") from None
