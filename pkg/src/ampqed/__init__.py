"""Numerical quantization checks for the electromagnetic field in linear
absorbing and amplifying media on a one-dimensional grid."""

__version__ = "0.1.0"

from .constants import NATURAL, SI, Constants
from .errors import (AmpQEDError, AnalyticityViolation, ConfigError, GridMismatch,
                     GridTooCoarse, NonPositiveSpectrum, NotHermitian, NotReciprocal,
                     SingularOperator, ZeroEigenvalue)
from .grids import FrequencyGrid, SpatialGrid
from .media import (Layer, MediumModel, Oscillator, build_kernel, check_kramers_kronig,
                    check_schwarz, permittivity)
from .operator_core import (Kernel, SpectralDecomposition, factor_K, hermitian_split,
                            inverse_kernel, is_dissipative, parity_kernel, sigma_av,
                            spectral_decompose)
from .green import (GreenFunction, MaxwellOperator, PoleScan, assemble_operator,
                    pole_scan, solve_green, verify_integral_relation)
from .quantization import (ChannelPartition, HamiltonianSpectrum, commutator_kernel,
                           hamiltonian_spectrum, noise_covariances,
                           parity_commutator_tilde_f, partition_channels)
from .correlations import (CorrelationTensor, amplification_correction,
                           bb_spectral_density, commutator_integral,
                           ee_spectral_density, naive_fdt_density)
