"""Named numerical constants (tolerances and iteration caps)."""
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # feasibility of returned optimizer points
    feasibility: float = 1e-8
    # relative optimality target of the LP/QC solver
    optimality: float = 1e-6
    max_iter: int = 10_000
    # eigenvalues above -psd_clamp * ||A|| are treated as round-off and zeroed
    psd_clamp: float = 1e-9
    # admissible negative curvature of a matrix declared PSD
    psd_check: float = 1e-9
    symmetry: float = 1e-12
    jacobi_sweeps: int = 100


TOL = Tolerances()

# reconstruction SNR reported for an exact reconstruction
RSNR_CAP_DB = 300.0
