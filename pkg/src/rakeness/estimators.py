"""scikit-learn style wrappers around the design and acquisition primitives.

``SpectralRakenessDesign`` and ``EigenRakenessDesign`` learn a projection
statistic from training signals; ``RMPIEncoder`` turns signals into
compressed measurements (``transform``) and back (``inverse_transform``).
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .eigen import design_correlation
from .exceptions import InvalidInputError
from .recovery import ista_continuation, omp
from .rmpi import NoiseConfig, measure
from .signals.psd import average_psd
from .spectral import SpectralDesignInput, default_n_half, design_spectrum, r_min
from .waveforms import CorrelatedAntipodalSource, StationaryAntipodalSource, iid_antipodal, make_rng


class SpectralRakenessDesign(BaseEstimator):
    """Antipodal waveform spectrum maximizing rakeness for stationary signals.

    Parameters
    ----------
    r : float
        Bound on the normalized self-rakeness, ``r_min(B T) < r <= 1``.
    fs : float
        Sampling (and chip) rate of the training signals.
    bandwidth : float, optional
        Band edge ``B``; defaults to ``fs / 2``.
    n_half : int, optional
        Spectral grid half-size; defaults to ``df <= 1 / (4 T)``.

    Attributes
    ----------
    a_hat_ : SpectralDensity
        Average spectrum of the training signals.
    spectrum_ : SpectralDensity
        Designed spectrum of the projection waveforms.
    r_min_ : float
        Smallest feasible ``r`` for the band and window.
    """

    def __init__(self, r=0.038, fs=256.0, bandwidth=None, n_half=None):
        self.r = r
        self.fs = fs
        self.bandwidth = bandwidth
        self.n_half = n_half

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        B = self.fs / 2 if self.bandwidth is None else self.bandwidth
        T = X.shape[1] / self.fs
        n_half = default_n_half(B, T) if self.n_half is None else self.n_half
        self.n_features_in_ = X.shape[1]
        self.window_ = T
        self.a_hat_ = average_psd(X, B, n_half, fs=self.fs)
        self.r_min_ = r_min(B * T)
        self.spectrum_ = design_spectrum(SpectralDesignInput(self.a_hat_, T, self.r))
        self._source = StationaryAntipodalSource(self.spectrum_, X.shape[1], self.fs)
        return self

    def sample(self, n_waveforms, random_state=None):
        """``(n_waveforms, n_features)`` antipodal chips following ``spectrum_``."""
        check_is_fitted(self, "spectrum_")
        return self._source.sample(n_waveforms, seed=make_rng(random_state))


class EigenRakenessDesign(BaseEstimator):
    """Correlation of antipodal projection vectors maximizing rakeness.

    Attributes
    ----------
    correlation_ : ndarray
        Trace-normalized empirical correlation ``E[x x^T]`` of the training data.
    mu_, lambda_ : ndarray
        Signal and designed eigenvalues, non-increasing.
    components_ : ndarray
        Shared eigenvectors, one per column.
    J_ : int
        Number of non-zero designed eigenvalues.
    B_ : ndarray
        Designed correlation matrix.
    """

    def __init__(self, r=0.047):
        self.r = r

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        self.n_features_in_ = X.shape[1]
        A = X.T @ X / X.shape[0]
        tr = np.trace(A)
        if tr <= 0:
            raise InvalidInputError("training data is identically zero")
        self.correlation_ = A / tr
        d = design_correlation(self.correlation_, self.r)
        self.mu_, self.lambda_, self.components_, self.J_, self.B_ = d.mu, d.lambda_, d.Q, d.J, d.B
        self._source = CorrelatedAntipodalSource(self.B_)
        return self

    def sample(self, n_waveforms, random_state=None):
        check_is_fitted(self, "B_")
        return self._source.sample(n_waveforms, seed=make_rng(random_state))


class RMPIEncoder(TransformerMixin, BaseEstimator):
    """Compressed acquisition with random antipodal projections.

    Parameters
    ----------
    n_measurements : int
    design : estimator, optional
        Fitted or unfitted ``SpectralRakenessDesign`` / ``EigenRakenessDesign``;
        ``None`` uses i.i.d. chips.
    dictionary : ndarray, shape (n_features, n_atoms), optional
        Sparsity basis for reconstruction; identity when omitted.
    snr_db : float
        Intrinsic SNR; ``inf`` disables noise.
    noise_where : {"on_measurement", "on_signal", "both"}
    solver : {"ista", "omp"}
    solver_params : dict, optional
        Keyword arguments forwarded to the solver.
    random_state : int, optional
        Seeds the chip matrix and the noise.
    """

    def __init__(
        self,
        n_measurements=32,
        design=None,
        dictionary=None,
        snr_db=np.inf,
        noise_where="on_measurement",
        solver="ista",
        solver_params=None,
        random_state=None,
    ):
        self.n_measurements = n_measurements
        self.design = design
        self.dictionary = dictionary
        self.snr_db = snr_db
        self.noise_where = noise_where
        self.solver = solver
        self.solver_params = solver_params
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=1)
        n = X.shape[1]
        if not 1 <= self.n_measurements <= n:
            raise InvalidInputError(f"n_measurements must lie in 1..{n}")
        if self.solver not in ("ista", "omp"):
            raise InvalidInputError("solver must be 'ista' or 'omp'")
        self.n_features_in_ = n
        seed = 0 if self.random_state is None else self.random_state
        if self.design is None:
            self.Phi_ = iid_antipodal(n, seed, size=self.n_measurements, stream=(3, 0))
        else:
            if not hasattr(self.design, "_source"):
                self.design.fit(X)
            self.Phi_ = self.design.sample(self.n_measurements, random_state=make_rng(seed, (3, 0)))
        D = np.eye(n) if self.dictionary is None else check_array(self.dictionary)
        if D.shape[0] != n:
            raise InvalidInputError("dictionary rows must match the signal length")
        self.dictionary_ = D
        self.P_ = self.Phi_ @ D
        self.noise_ = NoiseConfig(self.noise_where, self.snr_db)
        return self

    def transform(self, X):
        check_is_fitted(self, "Phi_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise InvalidInputError("signal length differs from the fitted one")
        seed = 0 if self.random_state is None else self.random_state
        return np.array([measure(x, self.Phi_, self.noise_, seed=seed, stream=(4, i))[0] for i, x in enumerate(X)])

    def inverse_transform(self, Y):
        """Reconstruct signals from measurements."""
        check_is_fitted(self, "Phi_")
        Y = check_array(Y)
        kw = dict(self.solver_params or {})
        out = []
        for m in Y:
            if self.solver == "omp":
                res = omp(self.P_, m, kw.get("K", min(14, self.n_measurements)), D=self.dictionary_)
            else:
                res = ista_continuation(self.P_, m, D=self.dictionary_, **kw)
            out.append(res.x_hat)
        return np.array(out)
