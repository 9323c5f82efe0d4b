"""Synthetic ECG generator driven by a three-state dynamical model.

The ``(x1, x2)`` state circulates on a unit limit cycle at the heart-rate
pulsation; ``z`` is pushed up or down by Gaussian-shaped attractors located
at the P, Q, R, S and T phases and relaxes towards a zero baseline.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..exceptions import InvalidInputError, NumericError
from ..waveforms import make_rng

EVENTS = ("P", "Q", "R", "S", "T")

# (low, high) per event; angles in degrees
THETA_BOUNDS = {"P": (-75.0, -65.0), "Q": (-20.0, -5.0), "R": (-5.0, 5.0), "S": (10.0, 20.0), "T": (95.0, 105.0)}
GAMMA_BOUNDS = {"P": (1.0, 1.4), "Q": (-5.2, -4.8), "R": (27.0, 33.0), "S": (-7.7, -7.3), "T": (0.5, 1.0)}
WIDTH_BOUNDS = {"P": (0.05, 0.45), "Q": (-0.1, 0.3), "R": (-0.1, 0.3), "S": (-0.1, 0.3), "T": (0.2, 0.6)}
RATE_BOUNDS = (50.0, 100.0)  # beats per minute
MIN_WIDTH = 0.02
BLOWUP = 1e3


@dataclass(frozen=True)
class EcgParams:
    """Event angles (degrees), amplitudes, widths and heart-rate pulsations."""

    theta: tuple
    gamma: tuple
    v: tuple
    omega1: float
    omega2: float
    x3_bar: float = 0.0

    def __post_init__(self):
        for name in ("theta", "gamma", "v"):
            value = tuple(float(t) for t in getattr(self, name))
            if len(value) != 5:
                raise InvalidInputError(f"{name} needs one value per event {EVENTS}")
            object.__setattr__(self, name, value)
        if min(abs(t) for t in self.v) <= 0:
            raise InvalidInputError("event widths must be non-zero")
        if not (self.omega1 > 0 and self.omega2 > 0):
            raise InvalidInputError("heart-rate pulsations must be positive")

    @property
    def heart_rate_bpm(self):
        return 60.0 * self.omega2 / (2.0 * math.pi)

    def scaled(self, s):
        """Copy with every amplitude multiplied by ``s``."""
        d = asdict(self)
        d["gamma"] = tuple(s * g for g in self.gamma)
        return EcgParams(**d)


def sample_ecg_params(seed=None, stream=0):
    """Uniform draw of every parameter within its bounds.

    Widths whose bounds straddle zero are drawn as ``|v|`` and redrawn
    while ``|v| < 0.02``; the heart rate is uniform in 50..100 beats/min.
    """
    rng = make_rng(seed, stream)
    theta = tuple(rng.uniform(*THETA_BOUNDS[e]) for e in EVENTS)
    gamma = tuple(rng.uniform(*GAMMA_BOUNDS[e]) for e in EVENTS)
    widths = []
    for e in EVENTS:
        v = abs(rng.uniform(*WIDTH_BOUNDS[e]))
        while v < MIN_WIDTH:
            v = abs(rng.uniform(*WIDTH_BOUNDS[e]))
        widths.append(v)
    rate = rng.uniform(*RATE_BOUNDS)
    omega = 2.0 * math.pi * rate / 60.0
    return EcgParams(theta=theta, gamma=gamma, v=tuple(widths), omega1=omega, omega2=omega)


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def _rhs(x1, x2, z, theta_i, gamma, v2, omega, x3_bar):
    alpha = 1.0 - np.sqrt(x1 * x1 + x2 * x2)
    # phase distance to each event, wrapped to (-pi, pi]
    d = _wrap(np.arctan2(x2, x1)[:, None] - theta_i)
    dz = -np.sum(gamma * d * np.exp(-d * d / v2), axis=1) - (z - x3_bar)
    return alpha * x1 - omega * x2, omega * x1 + alpha * x2, dz


def integrate_ecg(params_list, n_steps, dt, phase0):
    """RK4 trajectories of ``z`` for a batch of records, sampled every ``dt``.

    Returns an array of shape ``(len(params_list), n_steps + 1)``.
    """
    theta_i = np.deg2rad(np.array([p.theta for p in params_list]))
    gamma = np.array([p.gamma for p in params_list])
    v2 = 2.0 * np.array([p.v for p in params_list]) ** 2
    omega = np.array([p.omega2 for p in params_list])
    x3_bar = np.array([p.x3_bar for p in params_list])
    x1, x2 = np.cos(phase0), np.sin(phase0)
    z = np.zeros(len(params_list))
    out = np.empty((len(params_list), n_steps + 1))
    out[:, 0] = z
    h2 = 0.5 * dt
    args = (theta_i, gamma, v2, omega, x3_bar)
    for k in range(n_steps):
        a1, b1, c1 = _rhs(x1, x2, z, *args)
        a2, b2, c2 = _rhs(x1 + h2 * a1, x2 + h2 * b1, z + h2 * c1, *args)
        a3, b3, c3 = _rhs(x1 + h2 * a2, x2 + h2 * b2, z + h2 * c2, *args)
        a4, b4, c4 = _rhs(x1 + dt * a3, x2 + dt * b3, z + dt * c3, *args)
        x1 = x1 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        x2 = x2 + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        z = z + (dt / 6.0) * (c1 + 2.0 * c2 + 2.0 * c3 + c4)
        if not (np.all(np.abs(z) < BLOWUP) and np.all(np.abs(x1) < BLOWUP) and np.all(np.abs(x2) < BLOWUP)):
            bad = int(np.argmax(~((np.abs(z) < BLOWUP) & (np.abs(x1) < BLOWUP) & (np.abs(x2) < BLOWUP))))
            raise NumericError(f"ECG integration diverged for {params_list[bad]}")
        out[:, k + 1] = z
    return out


def _transient_samples(params, fs):
    # two beats, rounded up to whole output samples
    return int(math.ceil(2.0 * (2.0 * math.pi / params.omega2) * fs))


def _start_phase(seed, stream):
    return make_rng(seed, stream).uniform(-math.pi, math.pi)


def ecg_generate_batch(params_list, seeds, fs=256, T=1.0, oversample=8, streams=None):
    """Vectorized :func:`ecg_generate` over several records; returns ``(n, round(fs*T))``."""
    if oversample < 1:
        raise InvalidInputError("oversample must be >= 1")
    params_list = list(params_list)
    seeds = list(seeds)
    if len(seeds) != len(params_list):
        raise InvalidInputError("need one seed per parameter set")
    if not params_list:
        return np.zeros((0, int(round(fs * T))))
    streams = [0] * len(seeds) if streams is None else list(streams)
    n = int(round(fs * T))
    phase0 = np.array([_start_phase(s, st) for s, st in zip(seeds, streams)])
    skips = [_transient_samples(p, fs) for p in params_list]
    dt = 1.0 / (fs * oversample)
    traj = integrate_ecg(params_list, (max(skips) + n) * oversample, dt, phase0)
    out = np.empty((len(params_list), n))
    for i, skip in enumerate(skips):
        z = traj[i, skip * oversample : (skip + n) * oversample : oversample]
        out[i] = z - z.mean()
    return out


def ecg_generate(params, fs=256, T=1.0, seed=None, oversample=8, stream=0):
    """One mean-removed ECG record of ``round(fs*T)`` samples.

    RK4 runs at ``oversample`` steps per output sample. The seed only sets
    the starting phase on the limit cycle; the first two beats are
    discarded so the baseline relaxation settles.
    """
    if seed is None:
        seed = int(make_rng().integers(2**63))
    return ecg_generate_batch([params], [seed], fs=fs, T=T, oversample=oversample, streams=[stream])[0]


def r_event_times(params, seed, fs=256, T=1.0, stream=0):
    """Times (s, within the record) at which the phase crosses the R angle."""
    phase0 = _start_phase(seed, stream)
    beat = 2.0 * math.pi / params.omega2
    t0 = _transient_samples(params, fs) / fs
    theta_r = math.radians(params.theta[EVENTS.index("R")])
    # phase(t) = phase0 + omega t on the limit cycle
    first = ((theta_r - phase0 - params.omega2 * t0) % (2.0 * math.pi)) / params.omega2
    return np.arange(first - beat, T + beat, beat)
