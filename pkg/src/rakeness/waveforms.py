"""Random projection waveforms with prescribed second-order statistics.

Antipodal (+1/-1) sequences are obtained as the sign of a correlated
Gaussian vector. Since ``E[sign(x) sign(y)] = (2/pi) arcsin(rho)`` for unit
Gaussians with correlation ``rho``, the Gaussian correlation is
pre-distorted as ``sin(pi/2 * C)`` so that the signs reproduce ``C``.

Random numbers come from numpy's PCG64 generator. A ``(seed, stream)`` pair
maps to ``SeedSequence(seed, spawn_key=(stream,))`` (a tuple ``stream`` is
used as the spawn key directly), so parallel trials that use distinct stream
indices are reproducible and independent.
"""
import numpy as np

from .exceptions import InvalidInputError
from .linalg import project_psd, sym_eig

# above this length the Toeplitz fallback is replaced by clipping the
# circulant spectrum
_TOEPLITZ_MAX = 4096


def make_rng(seed=None, stream=0):
    """PCG64 generator for the ``(seed, stream)`` pair; passes Generators through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if seed is None:
        return np.random.default_rng()
    key = tuple(int(k) for k in stream) if isinstance(stream, tuple) else (int(stream),)
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def _signs(x):
    return np.where(x >= 0, 1.0, -1.0)


def iid_antipodal(S, seed=None, size=None, stream=0):
    """Independent equiprobable +1/-1 chips.

    Returns shape ``(S,)``, or ``(size, S)`` when ``size`` is given.
    """
    if S < 1:
        raise InvalidInputError("sequence length must be >= 1")
    rng = make_rng(seed, stream)
    shape = (S,) if size is None else (size, S)
    return _signs(rng.integers(0, 2, size=shape) - 0.5)


def van_vleck_predistort(C):
    """Gaussian correlation whose sign process has correlation ``C``."""
    return np.sin(0.5 * np.pi * np.asarray(C, dtype=float))


class StationaryAntipodalSource:
    """Sampler of antipodal sequences whose spectrum follows ``target``.

    Parameters
    ----------
    target : SpectralDensity
        Unit-power spectrum on ``[-B, B]``.
    S : int
        Chips per sequence.
    chip_rate : float
        Chips per second, at least ``2B``.
    """

    def __init__(self, target, S, chip_rate):
        if chip_rate < 2.0 * target.bandwidth * (1 - 1e-12):
            raise InvalidInputError("chip rate must be at least twice the spectrum bandwidth")
        if S < 1:
            raise InvalidInputError("sequence length must be >= 1")
        self.S = int(S)
        corr = target.autocorrelation(np.arange(self.S) / chip_rate)
        corr = corr / corr[0]
        if np.abs(corr).max() > 1 + 1e-9:
            raise InvalidInputError("target correlation exceeds 1 in magnitude")
        self.target_correlation = np.clip(corr, -1.0, 1.0)
        self.gaussian_correlation = van_vleck_predistort(self.target_correlation)
        self._setup()

    def _setup(self):
        g = self.gaussian_correlation
        S = self.S
        self._factor = None
        self._circ = None
        if S == 1:
            self._factor = np.ones((1, 1))
            return
        ext = np.concatenate([g, g[-2:0:-1]])
        spec = np.fft.fft(ext).real
        if spec.min() >= -1e-9 * spec.max() or S > _TOEPLITZ_MAX:
            self._circ = np.sqrt(np.maximum(spec, 0.0) / ext.size)
            return
        idx = np.arange(S)
        toeplitz = g[np.abs(idx[:, None] - idx[None, :])]
        model = sym_eig(project_psd(toeplitz), name="pre-distorted Toeplitz covariance")
        self._factor = model.Q * np.sqrt(np.maximum(model.mu, 0.0))

    def sample_gaussian(self, n, rng):
        if self._factor is not None:
            return rng.standard_normal((n, self.S)) @ self._factor.T
        m = self._circ.size
        z = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        y = np.fft.fft(self._circ[None, :] * z, axis=1)
        return y.real[:, : self.S]

    def sample(self, n=1, seed=None, stream=0):
        """``(n, S)`` array of +1/-1 chips."""
        rng = make_rng(seed, stream)
        return _signs(self.sample_gaussian(n, rng))


def antipodal_stationary(target, S, chip_rate, seed=None, stream=0):
    """One antipodal sequence of ``S`` chips with spectrum ``target``."""
    return StationaryAntipodalSource(target, S, chip_rate).sample(1, seed, stream)[0]


def _psd_factor(B, name):
    model = sym_eig(B, name=name)
    scale = max(float(np.abs(B).max()), 1e-300)
    if model.mu.min() < -1e-9 * scale:
        raise InvalidInputError(f"{name} is not positive semidefinite")
    # rounding-level eigenvalues would leak noise outside the range of B
    mu = np.where(model.mu > 1e-12 * max(model.mu.max(), 1e-300), model.mu, 0.0)
    return model.Q * np.sqrt(mu)


def gaussian_correlated(B, seed=None, size=None, stream=0):
    """Zero-mean Gaussian vectors with covariance ``B``.

    Returns shape ``(n,)`` or ``(size, n)``.
    """
    B = np.asarray(B, dtype=float)
    L = _psd_factor(B, "covariance")
    rng = make_rng(seed, stream)
    z = rng.standard_normal((1 if size is None else size, B.shape[0]))
    out = z @ L.T
    return out[0] if size is None else out


class CorrelatedAntipodalSource:
    """Sampler of antipodal vectors approximating a correlation matrix ``B``.

    ``B`` is rescaled to unit diagonal, pre-distorted elementwise and projected
    onto the PSD cone before Gaussian synthesis. Coordinates with zero
    variance in ``B`` receive independent signs.
    """

    def __init__(self, B):
        B = np.asarray(B, dtype=float)
        d = np.diag(B).copy()
        self.n = B.shape[0]
        self.active = np.flatnonzero(d > 1e-9)
        s = np.sqrt(d[self.active])
        C = B[np.ix_(self.active, self.active)] / np.outer(s, s)
        np.fill_diagonal(C, 1.0)
        self.target_correlation = np.clip(C, -1.0, 1.0)
        G = project_psd(van_vleck_predistort(self.target_correlation))
        self._factor = _psd_factor(G, "pre-distorted correlation") if self.active.size else None

    def sample(self, n=1, seed=None, stream=0):
        """``(n, dim)`` array of +1/-1 entries."""
        rng = make_rng(seed, stream)
        out = _signs(rng.integers(0, 2, size=(n, self.n)) - 0.5)
        if self._factor is not None:
            z = rng.standard_normal((n, self.active.size))
            out[:, self.active] = _signs(z @ self._factor.T)
        return out


def antipodal_from_correlation(B, seed=None, size=None, stream=0):
    """Antipodal vector(s) whose sign correlation approximates ``B``."""
    out = CorrelatedAntipodalSource(B).sample(1 if size is None else size, seed, stream)
    return out[0] if size is None else out
