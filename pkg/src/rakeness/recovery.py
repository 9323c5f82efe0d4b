"""Sparse recovery from compressed measurements and reconstruction metrics."""
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._config import RSNR_CAP_DB
from ._validation import as_finite_array
from .exceptions import DomainError, InvalidInputError


@dataclass
class ReconResult:
    """Recovered coefficients and bookkeeping.

    ``x_hat`` is ``D @ coeffs`` when a dictionary was supplied, otherwise
    the coefficients themselves.
    """

    coeffs: np.ndarray
    x_hat: np.ndarray
    iterations: int
    residual_norm: float
    converged: bool = True
    rank_deficient: bool = False
    reg_weight: float = float("nan")


def _check_system(P, m):
    P = as_finite_array(P, name="P", ndim=2)
    m = as_finite_array(m, name="m", ndim=1)
    if P.shape[0] != m.size:
        raise InvalidInputError(f"P has {P.shape[0]} rows but m has {m.size} entries")
    return P, m


def _finish(P, m, coeffs, D, iterations, **kw):
    x_hat = coeffs if D is None else np.asarray(D, dtype=float) @ coeffs
    res = float(np.linalg.norm(P @ coeffs - m))
    return ReconResult(coeffs=coeffs, x_hat=x_hat, iterations=iterations, residual_norm=res, **kw)


def omp(P, m, K, D=None, return_path=False):
    """Orthogonal matching pursuit with at most ``K`` atoms.

    Atoms are chosen by the largest normalized correlation
    ``|P_k^T r| / |P_k|``; ties go to the lowest index. Coefficients on the
    selected support are refit by least squares at every step.

    Parameters
    ----------
    P : ndarray, shape (M, N_d)
    m : ndarray, shape (M,)
    K : int
        Sparsity budget, ``K <= M``.
    D : ndarray, shape (N, N_d), optional
        Dictionary used to synthesize ``x_hat``.
    return_path : bool
        Also return the residual norm after each iteration.
    """
    P, m = _check_system(P, m)
    M, n = P.shape
    if not 0 <= K <= M:
        raise InvalidInputError(f"sparsity budget K = {K} must be within 0..{M}")
    norms = np.linalg.norm(P, axis=0)
    usable = norms > 0
    inv = np.where(usable, 1.0 / np.where(usable, norms, 1.0), 0.0)
    coeffs = np.zeros(n)
    support = []
    resid = m.copy()
    path = [float(np.linalg.norm(resid))]
    stop = 1e-12 * max(path[0], 1e-300)
    rank_deficient = False
    sol = np.zeros(0)
    while len(support) < K and path[-1] > stop:
        score = np.abs(P.T @ resid) * inv
        score[support] = -1.0
        k = int(np.argmax(score))
        if score[k] <= 0:
            break
        support.append(k)
        sub = P[:, support]
        sol, _, rank, _ = np.linalg.lstsq(sub, m, rcond=None)
        if rank < len(support):
            rank_deficient = True
        resid = m - sub @ sol
        path.append(float(np.linalg.norm(resid)))
    if rank_deficient:
        warnings.warn("OMP selected a rank-deficient set of columns", RuntimeWarning, stacklevel=2)
    if support:
        coeffs[support] = sol
    out = _finish(P, m, coeffs, D, len(support), rank_deficient=rank_deficient)
    return (out, path) if return_path else out


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def l1_objective(P, m, c, reg_weight):
    r = P @ c - m
    return 0.5 * float(r @ r) + reg_weight * float(np.abs(c).sum())


def _check_bounds(bounds):
    if bounds is None:
        return -np.inf, np.inf
    lo, hi = (float(b) for b in bounds)
    if not lo <= 0.0 <= hi:
        raise InvalidInputError("bounds must contain zero")
    return lo, hi


def l1_optimality_residual(P, m, c, reg_weight, bounds=None):
    """Largest violation of the subgradient optimality conditions, relative to ``|P^T m|_inf``.

    With ``bounds``, a coefficient at a bound only violates optimality if
    the gradient pushes it back inside.
    """
    lo, hi = _check_bounds(bounds)
    g = P.T @ (P @ c - m)
    nz = c != 0
    viol = np.where(nz, np.abs(g + reg_weight * np.sign(c)), np.maximum(np.abs(g) - reg_weight, 0.0))
    # at an active bound the normal cone absorbs gradients pointing outwards
    at_hi = (c >= hi) & (c > 0)
    at_lo = (c <= lo) & (c < 0)
    viol = np.where(at_hi, np.maximum(g + reg_weight, 0.0), viol)
    viol = np.where(at_lo, np.maximum(-(g - reg_weight), 0.0), viol)
    if lo == 0.0:
        viol = np.where(c == 0, np.maximum(-g - reg_weight, 0.0), viol)
    if hi == 0.0:
        viol = np.where(c == 0, np.maximum(g - reg_weight, 0.0), viol)
    scale = max(float(np.abs(P.T @ m).max()), 1e-300)
    return float(viol.max()) / scale


def ista_l1(P, m, reg_weight, max_iters=5000, tol=1e-8, D=None, x0=None, return_path=False, bounds=None):
    """l1-regularized least squares by monotone accelerated proximal gradient.

    Minimizes ``0.5 |P c - m|^2 + reg_weight |c|_1`` with backtracking on the
    Lipschitz estimate. The monotone variant keeps the better of the
    proximal point and the previous iterate, so the objective never
    increases. Stops once the relative objective change falls below ``tol``
    and the relative subgradient residual is below ``10 * tol``.

    ``bounds = (lo, hi)`` with ``lo <= 0 <= hi`` additionally confines every
    coefficient to ``[lo, hi]``; the proximal step is then the clipped soft
    threshold.
    """
    P, m = _check_system(P, m)
    if not reg_weight > 0:
        raise InvalidInputError("reg_weight must be positive")
    lo, hi = _check_bounds(bounds)
    n = P.shape[1]
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    Ptm = P.T @ m
    if reg_weight >= np.abs(Ptm).max() and x0 is None:
        out = _finish(P, m, np.zeros(n), D, 0, converged=True, reg_weight=reg_weight)
        return (out, [l1_objective(P, m, out.coeffs, reg_weight)]) if return_path else out
    L = max(float(np.linalg.norm(P, 2)) ** 2 * 0.5, 1e-300)
    f_x = l1_objective(P, m, x, reg_weight)
    y = x.copy()
    t = 1.0
    path = [f_x]
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        r_y = P @ y - m
        grad = P.T @ r_y
        smooth_y = 0.5 * float(r_y @ r_y)
        while True:
            z = np.clip(soft_threshold(y - grad / L, reg_weight / L), lo, hi)
            dz = z - y
            r_z = P @ z - m
            if 0.5 * float(r_z @ r_z) <= smooth_y + float(grad @ dz) + 0.5 * L * float(dz @ dz) * (1 + 1e-12):
                break
            L *= 2.0
        f_z = 0.5 * float(r_z @ r_z) + reg_weight * float(np.abs(z).sum())
        x_prev = x
        if f_z <= f_x:
            x, f_new = z, f_z
        else:
            f_new = f_x
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + (t / t_next) * (z - x) + ((t - 1.0) / t_next) * (x - x_prev)
        t = t_next
        change = abs(f_x - f_new) / max(abs(f_new), 1e-300)
        f_x = f_new
        path.append(f_x)
        if f_z <= path[-2] and change < tol:
            if l1_optimality_residual(P, m, x, reg_weight, bounds) < 10 * tol:
                converged = True
                break
    out = _finish(P, m, x, D, it, converged=converged, reg_weight=reg_weight)
    return (out, path) if return_path else out


def debias(P, m, coeffs):
    """Least-squares refit of ``coeffs`` on their support."""
    support = np.flatnonzero(coeffs)
    out = np.zeros_like(coeffs)
    if support.size:
        out[support] = np.linalg.lstsq(P[:, support], m, rcond=None)[0]
    return out


def ista_continuation(
    P, m, D=None, min_support=10, start=0.1, max_halvings=6, max_iters=2000, tol=1e-6, bounds=None, refit=True
):
    """ISTA with a halving regularization schedule followed by debiasing.

    The weight starts at ``start * |P^T m|_inf`` and is halved, warm-starting
    each solve, until at least ``min_support`` coefficients are non-zero or
    ``max_halvings`` halvings have been made. With ``refit`` the final
    coefficients are refit by least squares on their support (skipped when
    ``bounds`` are given, since the refit would ignore them).
    """
    P, m = _check_system(P, m)
    reg = start * float(np.abs(P.T @ m).max())
    if reg <= 0:
        return _finish(P, m, np.zeros(P.shape[1]), D, 0, reg_weight=0.0)
    res = ista_l1(P, m, reg, max_iters=max_iters, tol=tol, bounds=bounds)
    total = res.iterations
    for _ in range(max_halvings):
        if np.count_nonzero(res.coeffs) >= min_support:
            break
        reg *= 0.5
        res = ista_l1(P, m, reg, max_iters=max_iters, tol=tol, x0=res.coeffs, bounds=bounds)
        total += res.iterations
    coeffs = debias(P, m, res.coeffs) if refit and bounds is None else res.coeffs
    return _finish(P, m, coeffs, D, total, converged=res.converged, reg_weight=reg)


def rsnr_db(x_true, x_hat):
    """Reconstruction SNR ``10 log10(|x|^2 / |x - x_hat|^2)`` capped at 300 dB."""
    x = as_finite_array(x_true, name="x_true")
    xh = as_finite_array(x_hat, name="x_hat")
    sig = float(np.sum(x * x))
    if sig <= 0:
        raise DomainError("reconstruction SNR is undefined for a zero signal")
    err = float(np.sum((x - xh) ** 2))
    if err <= 0:
        return RSNR_CAP_DB
    return min(10.0 * math.log10(sig / err), RSNR_CAP_DB)


class ARSNR(NamedTuple):
    mean_db: float
    std_db: float


def arsnr(rsnr_samples):
    """Mean and sample standard deviation of reconstruction SNRs in dB.

    Samples at the 300 dB cap enter the mean but not the standard deviation;
    use :func:`count_capped` to report them.
    """
    s = np.asarray(rsnr_samples, dtype=float)
    if s.size == 0:
        raise InvalidInputError("no samples")
    finite = s[s < RSNR_CAP_DB]
    std = float(np.std(finite, ddof=1)) if finite.size > 1 else 0.0
    return ARSNR(float(s.mean()), std)


def count_capped(rsnr_samples):
    return int(np.sum(np.asarray(rsnr_samples, dtype=float) >= RSNR_CAP_DB))
