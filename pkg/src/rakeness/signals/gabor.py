"""Dictionary of sampled Gabor atoms.

``g(t) = exp(-pi ((t - u) / s)^2) cos(v t + w) / sqrt(s)`` on the grid
``t_k = (k - N/2) / N`` seconds, each column renormalized to unit norm.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidInputError, NumericError

N_ATOMS = 507
SCALES = (0.02, 0.5)
N_SCALES = 13
MODULATIONS = (2 * math.pi * 5, 2 * math.pi * 15)
PHASES = (0.0, math.pi / 2)
MODULATED_POSITIONS = 3
DUPLICATE_COHERENCE = 0.999


@dataclass(frozen=True)
class GaborDictionary:
    atoms: np.ndarray
    params: tuple

    @property
    def shape(self):
        return self.atoms.shape

    def synthesize(self, coeffs):
        return self.atoms @ np.asarray(coeffs, dtype=float)


def sample_grid(N):
    return (np.arange(N) - N // 2) / N


def gabor_atom(t, s, u, v, w):
    return np.exp(-np.pi * ((t - u) / s) ** 2) * np.cos(v * t + w) / math.sqrt(s)


def _centres(k):
    # k evenly spaced cell centres over one second
    return np.linspace(-0.5, 0.5, k, endpoint=False) + 0.5 / k


def _split(weights, total, minimum=2):
    n = np.maximum(minimum, np.round(weights / weights.sum() * total)).astype(int)
    while n.sum() > total:
        n[np.argmax(n)] -= 1
    while n.sum() < total:
        n[np.argmax(weights / n)] += 1
    return n


def gabor_parameters(n_atoms=N_ATOMS):
    """The ``(s, u, v, w)`` grid.

    Modulated atoms (5 and 15 Hz, both phases) exist only at scales holding
    at least half a period, at three positions each. The remaining budget
    goes to unmodulated bumps whose number of translations per scale is
    proportional to ``1/s``, so the spacing is a fixed fraction of the width.
    """
    scales = np.geomspace(SCALES[0], SCALES[1], N_SCALES)
    modulated = [
        (float(s), float(u), float(v), float(w))
        for s in scales
        for v in MODULATIONS
        if v * s >= math.pi
        for w in PHASES
        for u in _centres(MODULATED_POSITIONS)
    ]
    budget = n_atoms - len(modulated)
    if budget < 2 * N_SCALES:
        raise InvalidInputError(f"{n_atoms} atoms is too few for this grid")
    bumps = [
        (float(s), float(u), 0.0, 0.0)
        for s, k in zip(scales, _split(1.0 / scales, budget))
        for u in _centres(k)
    ]
    return bumps + modulated


def build_gabor_dictionary(N=256, n_atoms=N_ATOMS):
    """Deterministic Gabor dictionary with exactly ``n_atoms`` unit-norm columns.

    Raises
    ------
    NumericError
        If two atoms are near duplicates (coherence above 0.999).
    """
    if N < 2:
        raise InvalidInputError("need at least two samples")
    params = gabor_parameters(n_atoms)
    t = sample_grid(N)
    atoms = np.column_stack([gabor_atom(t, *p) for p in params])
    atoms /= np.linalg.norm(atoms, axis=0)
    gram = np.abs(atoms.T @ atoms)
    np.fill_diagonal(gram, 0.0)
    if gram.max() > DUPLICATE_COHERENCE:
        raise NumericError("Gabor grid contains near-duplicate atoms")
    return GaborDictionary(atoms=atoms, params=tuple(params))
