"""Rakeness design for stationary processes described by their power spectrum.

Spectra are piecewise constant on ``2n+1`` equal cells tiling ``[-B, B]``;
cell ``j`` (``j = -n..n``) is centred on ``j * df`` with ``df = 2B/(2n+1)``.
"""
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .exceptions import DomainError, InfeasibleError, InvalidInputError, NumericError
from .linalg import ConvexLPQCProblem, maximize_linear_quadratic, sin_cos_integrals


@dataclass(frozen=True)
class SpectralDensity:
    """Piecewise-constant, even, unit-power power spectral density.

    Attributes
    ----------
    bandwidth : float
        One-sided band edge ``B`` in Hz.
    values : ndarray, shape (2n+1,)
        Power density of cells ``j = -n..n`` in ascending frequency order.
    """

    bandwidth: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size % 2 != 1:
            raise InvalidInputError("a spectral density needs an odd number of cells")
        if not (np.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise InvalidInputError("bandwidth must be positive")
        if not np.all(np.isfinite(values)) or values.min() < 0:
            raise InvalidInputError("spectral density values must be finite and non-negative")
        if abs(self.df * values.sum() - 1.0) > 1e-9:
            raise InvalidInputError("spectral density must have unit power (df * sum == 1)")
        if np.abs(values - values[::-1]).max() > 1e-9 * max(values.max(), 1.0):
            raise InvalidInputError("spectral density of a real process must be even")

    @classmethod
    def from_values(cls, values, bandwidth):
        """Symmetrize and normalize arbitrary non-negative cell values."""
        v = np.asarray(values, dtype=float)
        if v.ndim != 1 or v.size % 2 != 1:
            raise InvalidInputError("a spectral density needs an odd number of cells")
        if not np.all(np.isfinite(v)) or v.min() < 0 or v.sum() <= 0:
            raise InvalidInputError("cell values must be finite, non-negative and not all zero")
        v = 0.5 * (v + v[::-1])
        df = 2.0 * bandwidth / v.size
        return cls(bandwidth=float(bandwidth), values=v / (df * v.sum()))

    @classmethod
    def flat(cls, bandwidth, n_half):
        size = 2 * n_half + 1
        return cls(bandwidth=float(bandwidth), values=np.full(size, 1.0 / (2.0 * bandwidth)))

    @property
    def n_half(self):
        return (self.values.size - 1) // 2

    @property
    def df(self):
        return 2.0 * self.bandwidth / self.values.size

    @property
    def frequencies(self):
        """Cell centres in Hz."""
        return np.arange(-self.n_half, self.n_half + 1) * self.df

    @property
    def edges(self):
        return (np.arange(self.values.size + 1) - self.n_half - 0.5) * self.df

    def resample(self, n_half):
        """Cell-average onto a grid with ``2*n_half+1`` cells over the same band."""
        if n_half == self.n_half:
            return self
        new_edges = (np.arange(2 * n_half + 2) - n_half - 0.5) * (2.0 * self.bandwidth / (2 * n_half + 1))
        # cumulative power is piecewise linear: exact cell averages by interpolation
        cum = np.concatenate([[0.0], np.cumsum(self.values * self.df)])
        at_edges = np.interp(new_edges, self.edges, cum)
        new_df = new_edges[1] - new_edges[0]
        return SpectralDensity.from_values(np.diff(at_edges) / new_df, self.bandwidth)

    def autocorrelation(self, lags):
        """Correlation ``C(tau) = int b(f) cos(2 pi f tau) df`` at the given lags (s)."""
        tau = np.atleast_1d(np.asarray(lags, dtype=float))
        e = self.edges
        out = np.empty(tau.shape)
        zero = tau == 0
        out[zero] = self.df * self.values.sum()
        t = tau[~zero][:, None]
        prim = np.sin(2 * np.pi * e[None, :] * t) / (2 * np.pi * t)
        out[~zero] = (self.values[None, :] * np.diff(prim, axis=1)).sum(axis=1)
        return out


@dataclass(frozen=True)
class SpectralDesignInput:
    """Average spectrum of the signal to acquire and the design parameters."""

    a_hat: SpectralDensity
    T: float
    r: float

    @property
    def c(self):
        return self.a_hat.bandwidth * self.T


def fejer_kernel(f, T):
    """Fejer kernel ``sin^2(pi T f) / (pi^2 T f^2)``, equal to ``T`` at ``f = 0``."""
    if not T > 0:
        raise DomainError("observation window T must be positive")
    f = np.asarray(f, dtype=float)
    return T * np.sinc(T * f) ** 2


_GL_NODES, _GL_WEIGHTS = leggauss(16)


def _triangle_panel_integral(d, df, T, panels):
    """int_0^df (df - u) [h(d+u) + h(d-u)] du with ``panels`` GL-16 panels."""
    width = df / panels
    starts = np.arange(panels) * width
    u = (starts[:, None] + (_GL_NODES[None, :] + 1.0) * 0.5 * width).ravel()
    wu = np.tile(_GL_WEIGHTS * 0.5 * width, panels)
    weight = (df - u) * wu
    dd = d[:, None]
    return (weight[None, :] * (fejer_kernel(dd + u[None, :], T) + fejer_kernel(dd - u[None, :], T))).sum(axis=1)


def cell_pair_integrals(n_half, bandwidth, T, rtol=1e-9, max_level=10):
    """Double cell integrals of the Fejer kernel indexed by cell offset.

    ``out[m + 2n]`` equals ``int_{F_j} int_{F_k} h_T(f - g) df dg`` for any
    ``j - k = m``; the double integral over two cells only depends on the
    offset between them and reduces to a triangle-weighted single integral.
    Panels are doubled until successive estimates agree to ``rtol``
    (relative to the diagonal value).
    """
    if not T > 0:
        raise DomainError("observation window T must be positive")
    size = 2 * n_half + 1
    df = 2.0 * bandwidth / size
    d = np.arange(-(size - 1), size) * df
    panels = max(1, int(math.ceil(df * T)))
    prev = _triangle_panel_integral(d, df, T, panels)
    for _ in range(max_level):
        panels *= 2
        cur = _triangle_panel_integral(d, df, T, panels)
        scale = max(abs(cur[size - 1]), 1e-300)
        if np.abs(cur - prev).max() <= rtol * scale:
            return cur
        prev = cur
    raise NumericError("cell integrals of the Fejer kernel did not converge")


def kernel_matrix(n_half, bandwidth, T):
    """Symmetric Toeplitz matrix ``W[j, k] = int_{F_j} int_{F_k} h_T(f-g) df dg``."""
    gen = cell_pair_integrals(n_half, bandwidth, T)
    idx = np.arange(2 * n_half + 1)
    return gen[idx[:, None] - idx[None, :] + 2 * n_half]


def discretize(a_hat, T):
    """Linear objective ``w`` and quadratic form ``W`` of the cell-wise problem.

    ``w[j] = sum_k a_k W[j, k]``, so ``b @ w`` is the rakeness between the
    piecewise-constant spectra ``a_hat`` and ``b``.
    """
    W = kernel_matrix(a_hat.n_half, a_hat.bandwidth, T)
    return W @ a_hat.values, W


def _check_same_grid(alpha, beta):
    if alpha.values.size != beta.values.size or not math.isclose(alpha.bandwidth, beta.bandwidth, rel_tol=1e-12):
        raise InvalidInputError("spectra are defined on different grids")


def rakeness_between(alpha, beta, T):
    """Rakeness ``int int alpha(f) beta(g) h_T(f - g) df dg`` of two spectra.

    Divide by ``T`` to obtain the value normalized so that a constant
    waveform has self-rakeness 1.
    """
    _check_same_grid(alpha, beta)
    W = kernel_matrix(alpha.n_half, alpha.bandwidth, T)
    return float(alpha.values @ W @ beta.values)


def r_min(c):
    """Normalized self-rakeness of a process white on ``[-B, B]``, ``c = B T``."""
    if not c > 0:
        raise DomainError("c = B*T must be positive")
    x = 4.0 * math.pi * c
    si, ci = sin_cos_integrals(x)
    return (ci + x * si - math.log(x) + math.cos(x) - np.euler_gamma - 1.0) / (4.0 * math.pi**2 * c**2)


def r_max():
    """Normalized self-rakeness of a constant waveform."""
    return 1.0


def default_n_half(bandwidth, T):
    """Smallest grid with ``df <= 1/(4T)``."""
    return max(0, int(math.ceil((8.0 * bandwidth * T - 1.0) / 2.0)))


def design_spectrum(design_input, n_half=None):
    """Spectrum of the projection process maximizing rakeness at level ``r``.

    Parameters
    ----------
    design_input : SpectralDesignInput
    n_half : int, optional
        Grid half-size. Defaults to the grid of ``design_input.a_hat``;
        otherwise ``a_hat`` is cell-averaged onto the requested grid.

    Returns
    -------
    SpectralDensity
        Non-negative, even, unit-power spectrum whose self-rakeness does not
        exceed ``r * T``.

    Raises
    ------
    InfeasibleError
        If ``r <= r_min(B T)``; ``exc.bound`` holds ``r_min``.
    """
    a_hat, T, r = design_input.a_hat, design_input.T, design_input.r
    if not T > 0:
        raise DomainError("observation window T must be positive")
    lo = r_min(design_input.c)
    if not r > lo:
        raise InfeasibleError(f"r = {r:.6g} is not above r_min(c) = {lo:.6g}", bound=lo)
    if r > r_max():
        raise DomainError(f"r = {r:.6g} exceeds r_max = 1")
    if n_half is not None:
        a_hat = a_hat.resample(n_half)
    w, W = discretize(a_hat, T)
    n = a_hat.n_half
    pairs = [(n + j, n - j) for j in range(1, n + 1)]
    problem = ConvexLPQCProblem(w=w, W=W, quad_bound=r * T, simplex_scale=a_hat.df, symmetry_pairs=pairs)
    x = maximize_linear_quadratic(problem)
    x = np.maximum(x, 0.0)
    x = 0.5 * (x + x[::-1])
    return SpectralDensity(bandwidth=a_hat.bandwidth, values=x / (a_hat.df * x.sum()))
