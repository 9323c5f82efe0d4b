"""Random Modulation Pre-Integration (RMPI) acquisition model.

A signal ``x = D a`` sampled at the chip rate is multiplied by each row of a
chip matrix ``Phi`` and integrated, giving ``m = Phi x + nu = P a + nu`` with
``P = Phi D``.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import as_finite_array
from .exceptions import DomainError, InvalidInputError, SizeError
from .linalg import singular_values
from .waveforms import make_rng

NOISE_LOCATIONS = ("on_signal", "on_measurement", "both")


@dataclass(frozen=True)
class NoiseConfig:
    """Where acquisition noise enters and at which intrinsic SNR.

    ``on_signal`` adds white noise to the Nyquist-rate signal before
    projection. ``on_measurement`` adds white noise to the measurements with
    a variance that does not depend on the projection waveforms: it is set
    so that projections with i.i.d. antipodal chips would see the requested
    SNR on average, i.e. ``sigma^2 = |x|^2 * mean_row_energy / N / 10^(snr/10)``.
    ``snr_db = inf`` disables noise.
    """

    where: str = "on_measurement"
    intrinsic_snr_db: float = 17.0

    def __post_init__(self):
        if self.where not in NOISE_LOCATIONS:
            raise InvalidInputError(f"noise location must be one of {NOISE_LOCATIONS}")
        if math.isnan(self.intrinsic_snr_db) or self.intrinsic_snr_db == -math.inf:
            raise InvalidInputError("intrinsic SNR must be a number (inf disables noise)")


@dataclass
class MeasurementSet:
    Phi: np.ndarray
    P: np.ndarray
    m: np.ndarray
    noise_sigma: float
    seed: object = None

    @property
    def shape(self):
        return self.P.shape


def projection_matrix(Phi, D):
    """``P[j, k] = <u_k, b_j>`` computed as ``Phi @ D`` at chip resolution."""
    Phi = as_finite_array(Phi, name="Phi", ndim=2)
    D = as_finite_array(D, name="D", ndim=2)
    if Phi.shape[1] != D.shape[0]:
        raise InvalidInputError(f"Phi has {Phi.shape[1]} columns but D has {D.shape[0]} rows")
    return Phi @ D


def noise_sigma_for_snr(x, snr_db):
    """Per-sample noise std giving ``|x|^2 / |n|^2 = 10^(snr/10)`` on average."""
    x = np.asarray(x, dtype=float)
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    energy = float(x @ x) if x.ndim == 1 else float(np.sum(x * x))
    if energy <= 0:
        raise DomainError("cannot set an SNR relative to a zero signal")
    return math.sqrt(energy / (x.size * 10.0 ** (snr_db / 10.0)))


def add_noise_for_snr(x, snr_db, seed=None, stream=0):
    """``x`` plus white Gaussian noise at the requested SNR (``inf`` returns ``x``)."""
    x = as_finite_array(x, name="x")
    sigma = noise_sigma_for_snr(x, snr_db)
    if sigma == 0.0:
        return x.copy()
    rng = make_rng(seed, stream)
    return x + sigma * rng.standard_normal(x.shape)


def measure(x, Phi, noise=None, seed=None, stream=0):
    """Measurements ``Phi (x + n_sig) + n_meas`` of a Nyquist-rate signal ``x``.

    Returns ``(m, sigma_meas)``; noise placement and level follow ``noise``
    (see :class:`NoiseConfig`).
    """
    x = as_finite_array(x, name="x", ndim=1)
    Phi = as_finite_array(Phi, name="Phi", ndim=2)
    if Phi.shape[1] != x.size:
        raise InvalidInputError(f"Phi has {Phi.shape[1]} columns but x has {x.size} samples")
    return _noisy(Phi @ x, x, Phi, noise, seed, stream)


def _noisy(m, x, Phi, noise, seed, stream):
    if noise is None or (math.isinf(noise.intrinsic_snr_db) and noise.intrinsic_snr_db > 0):
        return m, 0.0
    energy = float(x @ x)
    if energy <= 0:
        raise DomainError("cannot set an SNR relative to a zero signal")
    rng = make_rng(seed, stream)
    gain = 10.0 ** (noise.intrinsic_snr_db / 10.0)
    sigma_m = 0.0
    if noise.where in ("on_signal", "both"):
        sig = math.sqrt(energy / (x.size * gain))
        m = m + Phi @ (sig * rng.standard_normal(x.size))
    if noise.where in ("on_measurement", "both"):
        row_energy = float(np.mean(np.sum(Phi * Phi, axis=1)))
        sigma_m = math.sqrt(energy * row_energy / (x.size * gain))
        m = m + sigma_m * rng.standard_normal(m.size)
    return m, sigma_m


def acquire(a_coeffs, P, noise=None, seed=None, Phi=None, D=None, stream=0):
    """Measurements ``m = P a + nu``.

    Parameters
    ----------
    a_coeffs : array_like, shape (N_d,)
    P : array_like, shape (M, N_d)
    noise : NoiseConfig, optional
        ``None`` means noiseless.
    Phi, D : array_like, optional
        Chip matrix and dictionary. Needed for ``on_signal`` noise and to
        reference measurement noise to the Nyquist-rate signal energy. When
        they are missing, measurement noise is referenced to ``P a``.

    Returns
    -------
    MeasurementSet
    """
    a = as_finite_array(a_coeffs, name="a_coeffs", ndim=1)
    P = as_finite_array(P, name="P", ndim=2)
    if P.shape[1] != a.size:
        raise InvalidInputError(f"P has {P.shape[1]} columns but a has {a.size} entries")
    clean = P @ a
    if Phi is not None and D is not None:
        Phi = as_finite_array(Phi, name="Phi", ndim=2)
        x = as_finite_array(D, name="D", ndim=2) @ a
        m, sigma = _noisy(clean, x, Phi, noise, seed, stream)
    elif noise is not None and noise.where in ("on_signal", "both"):
        raise InvalidInputError("on_signal noise needs the chip matrix and dictionary")
    else:
        # without the chips, reference the noise to the measurements themselves
        sigma = 0.0 if noise is None else noise_sigma_for_snr(clean, noise.intrinsic_snr_db)
        m = clean if sigma == 0.0 else clean + sigma * make_rng(seed, stream).standard_normal(clean.size)
    return MeasurementSet(Phi=Phi, P=P, m=m, noise_sigma=sigma, seed=seed)


def _subset_delta(P, cols, K):
    s = singular_values(P[:, list(cols)])
    smax = s[0] if s.size else 0.0
    smin = s[-1] if s.size == K else 0.0
    return max(1.0 - smin, smax - 1.0)


def rip_constant(P, K, max_columns=16, max_K=4):
    """Exact restricted isometry constant of ``P`` for sparsity ``K``.

    Enumerates every ``K``-column submatrix and returns the largest
    ``max(1 - s_min, s_max - 1)`` over their singular values. No column
    normalization is applied.
    """
    P = as_finite_array(P, name="P", ndim=2)
    n = P.shape[1]
    if not 1 <= K <= n:
        raise InvalidInputError(f"K = {K} outside 1..{n}")
    if n > max_columns or K > max_K:
        raise SizeError(
            f"exhaustive RIP needs N_d <= {max_columns} and K <= {max_K}; use rip_constant_mc"
        )
    return max(_subset_delta(P, cols, K) for cols in itertools.combinations(range(n), K))


def rip_constant_mc(P, K, n_samples, seed=None):
    """Lower bound on the RIP constant from ``n_samples`` random ``K``-subsets.

    Subsets are drawn in a fixed order from the seed, so a larger
    ``n_samples`` evaluates a superset of the subsets of a smaller one.
    """
    P = as_finite_array(P, name="P", ndim=2)
    n = P.shape[1]
    if n_samples < 1:
        raise InvalidInputError("n_samples must be >= 1")
    if not 1 <= K <= n:
        raise InvalidInputError(f"K = {K} outside 1..{n}")
    rng = make_rng(seed)
    best = 0.0
    for _ in range(n_samples):
        cols = np.sort(rng.choice(n, size=K, replace=False))
        best = max(best, _subset_delta(P, cols, K))
    return best
