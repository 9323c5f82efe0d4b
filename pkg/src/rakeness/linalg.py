"""Dense numerical kernels: symmetric eigendecomposition, PSD projection,
sine/cosine integrals and a linear-objective / quadratic-constraint solver.

Every function here is a pure function of its arguments.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from ._config import TOL
from ._validation import as_finite_array, check_symmetric, check_vector
from .exceptions import DomainError, InfeasibleError, InvalidInputError, NumericError


@dataclass(frozen=True)
class EigenModel:
    """Eigenvalues ``mu`` (non-increasing) and orthonormal eigenvectors ``Q``.

    Column ``Q[:, j]`` is the eigenvector paired with ``mu[j]``.
    """

    mu: np.ndarray
    Q: np.ndarray

    def reconstruct(self):
        return (self.Q * self.mu) @ self.Q.T


def _jacobi_eigh(a, max_sweeps):
    """Cyclic Jacobi rotations; returns unsorted (eigenvalues, eigenvectors)."""
    a = a.copy()
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0))
        if off <= 1e-15 * scale:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    raise NumericError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def sym_eig(m, method="lapack", name="matrix"):
    """Eigendecomposition of a real symmetric matrix.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric matrix.
    method : {"lapack", "jacobi"}
        ``"lapack"`` calls the LAPACK divide-and-conquer driver through numpy;
        ``"jacobi"`` runs cyclic Jacobi rotations (slow, for small n only).
    name : str
        Used in error messages.

    Returns
    -------
    EigenModel
        Eigenvalues in non-increasing order. Negative eigenvalues whose
        magnitude is below ``1e-9 * ||m||_F`` are clamped to zero; larger
        negative eigenvalues are returned as they are. Ties keep the order in
        which the driver returned them (stable sort).
    """
    a = check_symmetric(m, name=name)
    try:
        if method == "lapack":
            w, q = np.linalg.eigh(a)
        elif method == "jacobi":
            w, q = _jacobi_eigh(a, TOL.jacobi_sweeps)
        else:
            raise InvalidInputError(f"unknown eigensolver {method!r}")
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition of {name} failed: {exc}") from exc
    order = np.argsort(-w, kind="stable")
    w = w[order]
    q = q[:, order]
    thresh = TOL.psd_clamp * np.linalg.norm(a)
    w = np.where((w < 0) & (w > -thresh), 0.0, w)
    return EigenModel(mu=w, Q=q)


def singular_values(m):
    """Singular values of a rectangular matrix, non-increasing."""
    a = as_finite_array(m, name="matrix", ndim=2)
    if a.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a, compute_uv=False)


def project_psd(m):
    """Nearest positive semidefinite matrix in Frobenius norm (eigenvalue clamp)."""
    model = sym_eig(m)
    mu = np.maximum(model.mu, 0.0)
    out = (model.Q * mu) @ model.Q.T
    return 0.5 * (out + out.T)


def sin_cos_integrals(x):
    """Sine and cosine integrals ``(Si(x), Ci(x))`` for ``x > 0``.

    ``Si(x) = int_0^x sin(t)/t dt`` and
    ``Ci(x) = gamma + ln x + int_0^x (cos t - 1)/t dt``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError("sine/cosine integrals require x > 0")
    si, ci = special.sici(x)
    if si.ndim == 0:
        return float(si), float(ci)
    return si, ci


@dataclass
class ConvexLPQCProblem:
    """maximize ``w @ x`` subject to

    ``x >= 0``, ``simplex_scale * sum(x) == 1``, ``x @ W @ x <= quad_bound``
    and ``x[i] == x[j]`` for every ``(i, j)`` in ``symmetry_pairs``.
    """

    w: np.ndarray
    W: np.ndarray
    quad_bound: float
    simplex_scale: float = 1.0
    symmetry_pairs: list = field(default_factory=list)

    def __post_init__(self):
        self.w = check_vector(self.w, name="w")
        self.W = check_symmetric(self.W, name="W", tol=1e-10)
        n = self.w.size
        if self.W.shape != (n, n):
            raise InvalidInputError(f"W has shape {self.W.shape}, expected {(n, n)}")
        if not np.isfinite(self.quad_bound) or self.quad_bound <= 0:
            raise InvalidInputError("quad_bound must be a positive finite number")
        if not np.isfinite(self.simplex_scale) or self.simplex_scale <= 0:
            raise InvalidInputError("simplex_scale must be positive")
        for i, j in self.symmetry_pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInputError(f"symmetry pair {(i, j)} out of range")
        lo = np.linalg.eigvalsh(self.W)[0]
        if lo < -TOL.psd_check * max(1.0, float(np.abs(self.W).max())):
            raise InvalidInputError(f"W is not positive semidefinite (min eigenvalue {lo:.3e})")


def _symmetry_groups(n, pairs):
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        ri, rj = find(int(i)), find(int(j))
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = [find(i) for i in range(n)]
    uniq = sorted(set(roots))
    index = {r: k for k, r in enumerate(uniq)}
    return np.array([index[r] for r in roots])


def _reduce(problem):
    """Map the problem onto the unit simplex in one variable per symmetry group.

    Returns ``(g, H, lift)`` where ``lift`` is the (n, n_groups) matrix taking
    a unit-simplex point ``z`` back to ``x``.
    """
    n = problem.w.size
    groups = _symmetry_groups(n, problem.symmetry_pairs)
    n_groups = groups.max() + 1
    E = np.zeros((n, n_groups))
    E[np.arange(n), groups] = 1.0
    sizes = E.sum(axis=0)
    lift = E / (problem.simplex_scale * sizes)
    g = lift.T @ problem.w
    H = lift.T @ problem.W @ lift
    return g, 0.5 * (H + H.T), lift


def _simplex_qp(Q, c, z0=None, max_iter=None):
    """Primal active-set method for min 0.5 z'Qz - c'z on the unit simplex.

    ``Q`` must be positive definite. ``z0`` (feasible) warm-starts the
    working set.
    """
    n = c.size
    max_iter = TOL.max_iter if max_iter is None else max_iter
    if z0 is None:
        z = np.zeros(n)
        z[int(np.argmax(c - 0.5 * np.diag(Q)))] = 1.0
    else:
        z = np.maximum(z0, 0.0)
        z /= z.sum()
    free = z > 0
    scale = max(float(np.abs(c).max()), float(np.abs(Q).max()), 1e-300)
    dual_tol = 1e-13 * scale
    for _ in range(max_iter):
        F = np.flatnonzero(free)
        k = F.size
        K = np.empty((k + 1, k + 1))
        K[:k, :k] = Q[np.ix_(F, F)]
        K[:k, k] = 1.0
        K[k, :k] = 1.0
        K[k, k] = 0.0
        rhs = np.empty(k + 1)
        rhs[:k] = c[F]
        rhs[k] = 1.0
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        zF, nu = sol[:k], sol[k]
        p = zF - z[F]
        neg = p < 0
        ratios = np.full(k, np.inf)
        ratios[neg] = z[F][neg] / -p[neg]
        alpha = ratios.min() if k else np.inf
        if alpha >= 1.0:
            z[F] = zF
            z[F] = np.maximum(z[F], 0.0)
            mult = Q @ z - c + nu
            mult[F] = np.inf
            j = int(np.argmin(mult))
            if mult[j] >= -dual_tol:
                return z / z.sum()
            free[j] = True
        else:
            blocking = F[int(np.argmin(ratios))]
            z[F] += alpha * p
            z[blocking] = 0.0
            z[F] = np.maximum(z[F], 0.0)
            free[blocking] = False
            if not free.any():
                raise NumericError("active-set QP emptied its working set")
    raise NumericError(f"active-set QP did not converge in {max_iter} iterations")


class _Lagrangian:
    """z(eta) = argmax g'z - eta z'Hz - ridge |z|^2 over the unit simplex."""

    def __init__(self, g, H):
        self.g = g
        self.H = H
        gscale = float(np.abs(g).max())
        self.ridge = 1e-10 * (gscale if gscale > 0 else 1.0)
        self._warm = None

    def solve(self, eta):
        n = self.g.size
        Q = 2.0 * eta * self.H + 2.0 * self.ridge * np.eye(n)
        z = _simplex_qp(Q, self.g, z0=self._warm)
        self._warm = z
        return z

    def quad(self, z):
        return float(z @ self.H @ z)


def _min_quadratic(H):
    n = H.shape[0]
    lam = max(float(np.abs(H).max()), 1e-300)
    Q = 2.0 * H + 2e-12 * lam * np.eye(n)
    z = _simplex_qp(Q, np.zeros(n), z0=np.full(n, 1.0 / n))
    return z, float(z @ H @ z)


def maximize_linear_quadratic(problem):
    """Maximize a linear objective over simplex, symmetry and ellipsoid constraints.

    The quadratic constraint is dualized: for a multiplier ``eta`` the
    concave problem ``max g'z - eta z'Hz`` on the simplex is solved exactly
    by an active-set method, and ``eta`` is bisected until the quadratic
    constraint is tight. A vanishing ridge term (relative weight 1e-10)
    selects a unique solution when ``W`` is singular.

    Parameters
    ----------
    problem : ConvexLPQCProblem

    Returns
    -------
    x : ndarray
        Optimal point in the original (unreduced) coordinates.

    Raises
    ------
    InfeasibleError
        If ``quad_bound`` is below the minimum of ``x @ W @ x`` over the
        simplex; ``exc.bound`` holds that minimum.
    """
    g, H, lift = _reduce(problem)
    q = float(problem.quad_bound)
    lag = _Lagrangian(g, H)
    n = g.size

    # constraint inactive: best vertex (ties resolved by least quadratic value)
    best = g.max()
    ties = np.flatnonzero(g >= best - 1e-12 * max(abs(best), 1e-300))
    if ties.size == 1:
        z = np.zeros(n)
        z[ties[0]] = 1.0
    else:
        zt, _ = _min_quadratic(H[np.ix_(ties, ties)])
        z = np.zeros(n)
        z[ties] = zt
    if lag.quad(z) <= q:
        return lift @ z

    hmax = max(float(np.linalg.eigvalsh(H)[-1]), 1e-300)
    gspan = max(float(g.max() - g.min()), 1e-300)
    eta_lo, eta_hi = 0.0, gspan / hmax
    z_hi = lag.solve(eta_hi)
    grow = 0
    while lag.quad(z_hi) > q:
        eta_lo = eta_hi
        eta_hi *= 10.0
        grow += 1
        if grow > 40:
            z_min, q_min = _min_quadratic(H)
            if q < q_min * (1 - 1e-9):
                raise InfeasibleError(
                    f"quadratic bound {q:.6g} is below the minimum achievable value {q_min:.6g}",
                    bound=q_min,
                )
            return lift @ z_min
        z_hi = lag.solve(eta_hi)
    if eta_lo == 0.0:
        eta_lo = eta_hi * 1e-6
        z_lo = lag.solve(eta_lo)
        while lag.quad(z_lo) <= q and eta_lo > 1e-30:
            eta_hi, z_hi = eta_lo, z_lo
            eta_lo *= 1e-3
            z_lo = lag.solve(eta_lo)

    for _ in range(200):
        if eta_hi - eta_lo <= 1e-13 * eta_hi:
            break
        mid = np.sqrt(eta_lo * eta_hi) if eta_hi > 4 * eta_lo else 0.5 * (eta_lo + eta_hi)
        z_mid = lag.solve(mid)
        if lag.quad(z_mid) > q:
            eta_lo = mid
        else:
            eta_hi, z_hi = mid, z_mid
        if q - lag.quad(z_hi) <= 1e-12 * q:
            break
    z = z_hi
    if lag.quad(z) > q * (1 + TOL.feasibility):
        raise NumericError("bisection ended on an infeasible point")
    return lift @ z
