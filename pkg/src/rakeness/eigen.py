"""Rakeness design in the eigenbasis of a correlation matrix.

Given the eigenvalues ``mu`` of the signal correlation, the projection
process keeps the same eigenvectors and receives eigenvalues ``lambda``
maximizing ``sum(lambda * mu)`` subject to ``lambda >= 0``,
``sum(lambda) = 1`` and ``sum(lambda**2) <= r``.
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_descending
from .exceptions import DomainError, InfeasibleError, InvalidInputError, NumericError
from .linalg import project_psd, sym_eig


@dataclass(frozen=True)
class RakenessDesign:
    """Designed projection correlation ``B = Q diag(lambda) Q^T``."""

    r: float
    J: int
    mu: np.ndarray
    lambda_: np.ndarray
    Q: np.ndarray
    B: np.ndarray

    @property
    def objective(self):
        return float(self.lambda_ @ self.mu)


@dataclass(frozen=True)
class OracleSolution:
    """Numerical optimum of the eigenvalue problem with recovered multipliers."""

    lambda_: np.ndarray
    lagrange_ell_prime: float
    lagrange_ell_double_prime: float
    objective: float
    kkt_residual: float


def partial_sums(mu, J):
    """``(sum(mu[:J]), sum(mu[:J]**2))``."""
    mu = np.asarray(mu, dtype=float)
    if not 1 <= J <= mu.size:
        raise InvalidInputError(f"J = {J} outside 1..{mu.size}")
    head = mu[:J]
    return float(head.sum()), float(head @ head)


def radicand_check(mu, J):
    """``J * Sigma2(J) - Sigma1(J)**2``, non-negative for descending ``mu``."""
    s1, s2 = partial_sums(mu, J)
    value = J * s2 - s1 * s1
    scale = max(s1 * s1, 1e-300)
    assert value >= -1e-12 * max(scale, 1.0), f"negative radicand {value}"
    return max(value, 0.0)


def lambda_of_J(mu, J, r):
    """Closed-form optimal eigenvalues when exactly ``J`` of them are non-zero.

    Returns a vector of length ``J``. The branch ``r == 1/J``, a zero
    radicand (``mu`` constant over the first ``J`` entries) and ``J == 1``
    all return the uniform vector ``1/J``.
    """
    mu = np.asarray(mu, dtype=float)
    if not 1 <= J <= mu.size:
        raise InvalidInputError(f"J = {J} outside 1..{mu.size}")
    if r < 1.0 / J * (1 - 1e-12):
        raise DomainError(f"r = {r:.6g} < 1/J = {1.0 / J:.6g}: no {J}-term solution")
    s1, s2 = partial_sums(mu, J)
    spread = s2 - s1 * s1 / J
    slack = r - 1.0 / J
    if J == 1 or slack <= 1e-15 or spread <= 1e-15 * max(s2, 1e-300):
        return np.full(J, 1.0 / J)
    scale = math.sqrt(spread / slack)
    return (1.0 + (J * mu[:J] - s1) / scale) / J


def find_J(mu, r):
    """Number of non-zero designed eigenvalues.

    Scans ``j = ceil(1/r) .. len(mu)`` and returns the largest ``j`` whose
    last closed-form eigenvalue ``lambda_{j-1}(j)`` is strictly positive.
    """
    mu = check_descending(mu, name="mu")
    if not 0 < r <= 1 + 1e-12:
        raise DomainError("r must lie in (0, 1]")
    n = mu.size
    start = max(1, int(math.ceil(1.0 / r - 1e-9)))
    if start > n:
        raise InfeasibleError(f"r = {r:.6g} < 1/n = {1.0 / n:.6g}", bound=1.0 / n)
    best = None
    for j in range(start, n + 1):
        lam = lambda_of_J(mu, j, r)
        if lam[-1] > 1e-14:
            best = j
    if best is None:
        raise NumericError("no J yields a strictly positive eigenvalue profile")
    return best


def design_eigenvalues(mu, r):
    """Full-length optimal eigenvalue vector (zeros beyond ``J``) and ``J``."""
    mu = np.asarray(mu, dtype=float)
    J = find_J(mu, r)
    lam = np.zeros(mu.size)
    lam[:J] = lambda_of_J(mu, J, r)
    return lam, J


def design_correlation(A, r):
    """Correlation matrix of the rakeness-optimal projection process.

    ``A`` is projected onto the PSD cone and rescaled to unit trace, then
    eigendecomposed; the design keeps its eigenvectors and replaces the
    eigenvalues by the optimal profile.
    """
    A = project_psd(A)
    tr = np.trace(A)
    if tr <= 0:
        raise InvalidInputError("correlation matrix has zero trace")
    A = A / tr
    n = A.shape[0]
    if r < 1.0 / n * (1 - 1e-12):
        raise InfeasibleError(f"r = {r:.6g} < 1/n = {1.0 / n:.6g}", bound=1.0 / n)
    model = sym_eig(A, name="A")
    mu = np.maximum(model.mu, 0.0)
    mu = mu / mu.sum()
    lam, J = design_eigenvalues(mu, min(r, 1.0))
    Q = model.Q
    B = (Q * lam) @ Q.T
    B = 0.5 * (B + B.T)
    return RakenessDesign(r=float(r), J=J, mu=mu, lambda_=lam, Q=Q, B=B)


def _project_simplex_ball(Y, r):
    """Euclidean projection of each row of ``Y`` onto {x >= 0, sum x = 1, |x|^2 <= r}.

    Rows whose simplex projection already satisfies the ball constraint keep
    it. Otherwise the projection is ``(y - tau)_+ / t`` where, for the ``k``
    largest entries being active, ``t = sum_k (y - tau)`` and
    ``|(y - tau)_+|^2 = r t^2``; every ``k`` is tried and the one consistent
    with the ordering of ``y`` is kept.
    """
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    m, n = Y.shape
    U = -np.sort(-Y, axis=1)
    css = np.cumsum(U, axis=1)
    ind = np.arange(1, n + 1)
    cond = U - (css - 1.0) / ind > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau_s = (css[np.arange(m), rho] - 1.0) / (rho + 1)
    X = np.maximum(Y - tau_s[:, None], 0.0)
    over = (X * X).sum(axis=1) > r * (1 + 1e-12)
    if not over.any():
        return X
    Uo = U[over]
    s1 = css[over]
    s2 = np.cumsum(Uo * Uo, axis=1)
    mean = s1 / ind
    var = np.maximum(s2 - s1 * mean, 0.0)
    slack = r - 1.0 / ind
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.sqrt(var / slack)
        tau = mean - t / ind
    nxt = np.concatenate([Uo[:, 1:], np.full((Uo.shape[0], 1), -np.inf)], axis=1)
    valid = (slack > 0) & (var > 0) & (Uo > tau) & (nxt <= tau)
    if not valid.any(axis=1).all():
        raise NumericError("simplex/ball projection found no consistent support")
    k = np.argmax(valid, axis=1)
    rows = np.arange(Uo.shape[0])
    tau_k = tau[rows, k]
    t_k = t[rows, k]
    X[over] = np.maximum(Y[over] - tau_k[:, None], 0.0) / t_k[:, None]
    return X


def oracle_solve(mu, r, n_restarts=1000, seed=0, n_steps=60):
    """Brute-force optimum of the eigenvalue problem, independent of the closed form.

    Runs projected gradient ascent ``x <- P(x + t mu)`` from ``n_restarts``
    random simplex points with geometrically growing step ``t``, where ``P``
    is the exact projection onto the simplex/ball intersection, keeps the
    best feasible iterate, and recovers the multipliers of
    ``mu_j + l' + l'' lambda_j = 0`` on the support by least squares.
    """
    mu = check_descending(mu, name="mu")
    n = mu.size
    if r < 1.0 / n * (1 - 1e-12):
        raise InfeasibleError(f"r = {r:.6g} < 1/n", bound=1.0 / n)
    rng = np.random.default_rng(seed)
    X = rng.dirichlet(np.ones(n), size=n_restarts)
    X = _project_simplex_ball(X, r)
    # constant shifts do not move the projection; centring keeps large steps exact
    step = mu - mu.mean()
    for k in range(n_steps):
        X = _project_simplex_ball(X + (1.5**k) * step[None, :], r)
    values = X @ mu
    best = X[int(np.argmax(values))]
    obj = float(best @ mu)

    support = best > 1e-9
    lam_s = best[support]
    if np.ptp(lam_s) <= 1e-12:
        # uniform on the support: l'' undetermined, report the r = 1/J limit
        ell2 = -np.inf if support.sum() > 1 and np.ptp(mu[support]) > 1e-12 else 0.0
        ell1 = -float(mu[support].mean())
        resid = 0.0 if ell2 == 0.0 else float(np.ptp(mu[support]))
    else:
        # mu_j = -l' - l'' lambda_j on the support
        design = np.column_stack([-np.ones(lam_s.size), -lam_s])
        (ell1, ell2), *_ = np.linalg.lstsq(design, mu[support], rcond=None)
        resid = float(np.abs(design @ np.array([ell1, ell2]) - mu[support]).max())
        ell1, ell2 = float(ell1), float(ell2)
        # inactive coordinates need a non-negative multiplier: mu_j + l' <= 0
        if (~support).any():
            resid = max(resid, float(np.maximum(mu[~support] + ell1, 0.0).max()))
    if not np.isfinite(obj):
        raise NumericError("oracle produced a non-finite objective")
    return OracleSolution(
        lambda_=best,
        lagrange_ell_prime=ell1,
        lagrange_ell_double_prime=ell2,
        objective=obj,
        kkt_residual=resid,
    )


def assignment_bruteforce(lambda_, mu):
    """Exhaustively maximize ``sum(lambda[j] * mu[perm[j]])`` over permutations.

    Returns ``(best_perm, best_value, identity_value)``; for non-increasing
    inputs the identity permutation is always among the maximizers.
    """
    lam = check_descending(lambda_, name="lambda")
    mu = check_descending(mu, name="mu")
    n = lam.size
    if mu.size != n:
        raise InvalidInputError("lambda and mu must have the same length")
    if n > 8:
        raise InvalidInputError("exhaustive assignment limited to n <= 8")
    perms = np.array(list(itertools.permutations(range(n))))
    values = mu[perms] @ lam
    k = int(np.argmax(values))
    identity = float(lam @ mu)
    best = float(values[k])
    assert identity >= best - 1e-12 * max(1.0, abs(best)), "identity permutation is not optimal"
    return tuple(int(i) for i in perms[k]), best, identity
