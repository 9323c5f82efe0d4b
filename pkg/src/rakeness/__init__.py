"""Rakeness-based design of random projections for compressed acquisition."""
from .eigen import RakenessDesign, design_correlation, design_eigenvalues, find_J, lambda_of_J
from .estimators import EigenRakenessDesign, RMPIEncoder, SpectralRakenessDesign
from .exceptions import DomainError, InfeasibleError, InvalidInputError, NumericError, RakenessError, SizeError
from .recovery import arsnr, ista_l1, omp, rsnr_db
from .rmpi import NoiseConfig, acquire, measure, projection_matrix, rip_constant, rip_constant_mc
from .spectral import SpectralDensity, SpectralDesignInput, design_spectrum, r_min
from .waveforms import antipodal_from_correlation, antipodal_stationary, gaussian_correlated, iid_antipodal

__version__ = "0.1.0"
