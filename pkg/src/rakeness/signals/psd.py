"""Average power spectral density of a signal corpus."""
import math

import numpy as np

from ..exceptions import InvalidInputError
from ..spectral import SpectralDensity


def average_psd(signals, bandwidth, n_half, fs=None):
    """Mean Hann-windowed periodogram cell-averaged onto a spectral grid.

    Parameters
    ----------
    signals : array_like, shape (n_signals, N)
        Records sampled at ``fs``.
    bandwidth : float
        Band edge ``B``; cells tile ``[-B, B]``.
    n_half : int
        The grid has ``2 n_half + 1`` cells.
    fs : float, optional
        Sampling rate, default ``2 B``. Must be at least ``2 B``.

    Returns
    -------
    SpectralDensity
        Even and normalized to unit power.
    """
    X = np.atleast_2d(np.asarray(signals, dtype=float))
    if X.size == 0 or X.shape[0] == 0:
        raise InvalidInputError("need at least one signal")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("signals must be finite")
    fs = 2.0 * bandwidth if fs is None else float(fs)
    if fs < 2.0 * bandwidth * (1 - 1e-12):
        raise InvalidInputError("sampling rate below 2B")
    N = X.shape[1]
    cells = 2 * n_half + 1
    # fine enough that every cell spans several FFT bins
    nfft = 1 << max(int(math.ceil(math.log2(max(4 * N, 8 * cells * fs / (2 * bandwidth))))), 1)
    win = np.hanning(N + 2)[1:-1] if N > 1 else np.ones(1)
    spec = np.abs(np.fft.fft(X * win, n=nfft, axis=1)) ** 2
    pxx = spec.mean(axis=0) / (fs * float(win @ win))
    # one full period [-fs/2, fs/2] with the wrap-around endpoint
    pxx = np.fft.fftshift(pxx)
    freqs = (np.arange(nfft) - nfft // 2) * fs / nfft
    freqs = np.append(freqs, fs / 2)
    pxx = np.append(pxx, pxx[0])
    # cumulative power of the piecewise-linear periodogram
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (pxx[1:] + pxx[:-1]) * np.diff(freqs))])
    df = 2.0 * bandwidth / cells
    edges = (np.arange(cells + 1) - n_half - 0.5) * df
    power = np.diff(np.interp(edges, freqs, cum))
    if power.sum() <= 0:
        raise InvalidInputError("signals carry no power in the band")
    return SpectralDensity.from_values(np.maximum(power, 0.0) / df, bandwidth)
