"""Monte-Carlo comparison of rakeness-designed and i.i.d. projections.

Two experiments are provided. ``ecg`` acquires synthetic ECG records,
reconstructing them over a Gabor dictionary with spectrally shaped
antipodal waveforms. ``image`` acquires glyph images, reconstructing them in
the pixel basis with antipodal grids whose four central 6 x 6 subgrids
follow an eigen-designed correlation.

Every random draw is keyed by ``(master_seed, stream)``:

* ``(1, i)`` training item ``i``; ``(2, i)`` test item ``i``
* ``(3, row)`` projection waveforms of result row ``row``
* ``(4, M, trial)`` noise, shared by all methods at the same ``(M, trial)``
  when noise is paired, ``(4, row)`` otherwise
"""
import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .eigen import design_correlation
from .exceptions import InfeasibleError, InvalidInputError
from .io import fmt, parse_keyvalue
from .recovery import arsnr, count_capped, ista_continuation, omp, rsnr_db
from .rmpi import NoiseConfig, measure
from .signals.ecg import ecg_generate_batch, sample_ecg_params
from .signals.gabor import build_gabor_dictionary
from .signals.glyphs import CENTRAL_SUBGRIDS, SIZE, random_glyph, subgrid_correlation, subgrid_indices
from .signals.psd import average_psd
from .spectral import SpectralDesignInput, default_n_half, design_spectrum, r_min
from .waveforms import CorrelatedAntipodalSource, StationaryAntipodalSource, iid_antipodal

EXPERIMENTS = ("ecg", "image")
SOLVERS = ("ista", "omp")

ECG_FS = 256.0
ECG_T = 1.0
ECG_N = 256
ECG_BAND = ECG_FS / 2
IMAGE_N = SIZE * SIZE

RESULT_HEADER = ("experiment", "method", "r", "M", "trial", "rsnr_db", "seed")
SUMMARY_HEADER = ("experiment", "method", "r", "M", "N_over_M", "n", "arsnr_db", "std_db", "n_capped")


class ConfigError(InvalidInputError):
    """Malformed or out-of-range experiment configuration."""


_DEFAULTS = {
    "ecg": dict(
        n_train=200, n_test=200, n_trials=200, M_list=(32, 48, 64, 96), r_list=(0.038,),
        noise_where="both", min_support=20, reg_start=0.1, max_halvings=6, bounds=None, refit=True,
    ),
    "image": dict(
        n_train=520, n_test=200, n_trials=200, M_list=(96, 115, 144), r_list=(0.047,),
        noise_where="on_measurement", min_support=10, reg_start=0.01, max_halvings=0, bounds=(0.0, 1.0),
        refit=False,
    ),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment; see :func:`default_config` for defaults.

    The reconstruction settings (``min_support``, ``reg_start``,
    ``max_halvings``, ``bounds``, ``refit``) configure
    :func:`rakeness.recovery.ista_continuation`; ``omp_K`` is the sparsity
    budget when ``solver = omp``.
    """

    experiment: str
    n_train: int
    n_test: int
    n_trials: int
    M_list: tuple
    r_list: tuple
    intrinsic_snr_db: float = 17.0
    solver: str = "ista"
    master_seed: int = 0
    noise_where: str = "both"
    paired_noise: bool = True
    min_support: int = 20
    reg_start: float = 0.1
    max_halvings: int = 6
    bounds: tuple = None
    refit: bool = True
    omp_K: int = 14
    sweep_trials: int = 40
    sweep_M: int = 0
    ista_max_iters: int = 2000
    ista_tol: float = 1e-6

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        for name in ("n_train", "n_test", "n_trials", "omp_K", "sweep_trials", "ista_max_iters", "min_support"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.max_halvings < 0:
            raise ConfigError("max_halvings must be >= 0")
        if not self.M_list or min(self.M_list) < 1:
            raise ConfigError("M_list needs positive measurement counts")
        if max(self.M_list) > self.N:
            raise ConfigError(f"measurement counts cannot exceed N = {self.N}")
        if not self.r_list:
            raise ConfigError("r_list is empty")
        # feasibility against r_min or 1/n is checked per r at design time
        if any(not (0 < r <= 1) for r in self.r_list):
            raise ConfigError("every r must lie in (0, 1]")
        if not math.isfinite(self.intrinsic_snr_db) and self.intrinsic_snr_db < 0:
            raise ConfigError("intrinsic_snr_db must be finite or +inf")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        try:
            NoiseConfig(self.noise_where, self.intrinsic_snr_db)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from None
        if self.bounds is not None and not (len(self.bounds) == 2 and self.bounds[0] <= 0 <= self.bounds[1]):
            raise ConfigError("bounds must be 'lo, hi' with lo <= 0 <= hi")

    @property
    def N(self):
        return ECG_N if self.experiment == "ecg" else IMAGE_N

    @property
    def noise(self):
        return NoiseConfig(self.noise_where, self.intrinsic_snr_db)

    def to_items(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(fmt(x) for x in v)
            elif v is None:
                v = "none"
            out[f.name] = v
        return out

    def digest(self):
        text = "".join(f"{k}={fmt(v)}\n" for k, v in sorted(self.to_items().items()))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def default_config(experiment, **overrides):
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}")
    kw = dict(_DEFAULTS[experiment])
    kw.update(overrides)
    return ExperimentConfig(experiment=experiment, **kw)


def _parse_bool(v):
    s = v.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _parse_list(v, cast):
    return tuple(cast(x) for x in v.replace(";", ",").split(",") if x.strip())


def config_from_text(text, source="<config>"):
    """Parse a ``key = value`` configuration, filling unspecified keys with the experiment defaults."""
    try:
        items = parse_keyvalue(text, source)
    except InvalidInputError as exc:
        raise ConfigError(str(exc)) from None
    if "experiment" not in items:
        raise ConfigError(f"{source}: 'experiment' is required")
    experiment = items.pop("experiment").strip()
    known = {f.name: f for f in fields(ExperimentConfig)}
    kw = {}
    for key, value in items.items():
        if key not in known:
            raise ConfigError(f"{source}: unknown key {key!r}")
        try:
            if key in ("M_list",):
                kw[key] = _parse_list(value, int)
            elif key == "r_list":
                kw[key] = _parse_list(value, float)
            elif key == "bounds":
                kw[key] = None if value.strip().lower() == "none" else _parse_list(value, float)
            elif key in ("paired_noise", "refit"):
                kw[key] = _parse_bool(value)
            elif key in ("intrinsic_snr_db", "reg_start", "ista_tol"):
                kw[key] = float(value)
            elif key in ("solver", "noise_where"):
                kw[key] = value.strip()
            else:
                kw[key] = int(value)
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key}: {exc}") from None
    return default_config(experiment, **kw)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return config_from_text(text, source=os.fspath(path))


# ---------------------------------------------------------------- corpora


def ecg_corpus(master_seed, n, part):
    """``n`` ECG records; ``part`` 1 is the training set, 2 the test set."""
    params = [sample_ecg_params(master_seed, stream=(part, i, 0)) for i in range(n)]
    return ecg_generate_batch(params, [master_seed] * n, fs=ECG_FS, T=ECG_T, streams=[(part, i, 1) for i in range(n)])


def image_corpus(master_seed, n, part):
    glyphs = [random_glyph(master_seed, stream=(part, i)) for i in range(n)]
    return np.array([g.vector for g in glyphs]), [g.label for g in glyphs]


def training_corpus(cfg):
    if cfg.experiment == "ecg":
        return ecg_corpus(cfg.master_seed, cfg.n_train, 1)
    return image_corpus(cfg.master_seed, cfg.n_train, 1)[0]


def test_corpus(cfg):
    if cfg.experiment == "ecg":
        return ecg_corpus(cfg.master_seed, cfg.n_test, 2)
    return image_corpus(cfg.master_seed, cfg.n_test, 2)[0]


# ---------------------------------------------------------------- designs


@dataclass
class DesignSet:
    """Designs per r. ``designs`` maps r to a spectrum (ecg) or to a dict
    ``{subgrid: RakenessDesign}`` (image); ``errors`` maps infeasible r to
    the reason."""

    experiment: str
    designs: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    a_hat: object = None
    correlations: dict = field(default_factory=dict)

    @property
    def feasible(self):
        return sorted(self.designs)


def ecg_signal_psd(train):
    return average_psd(train, ECG_BAND, default_n_half(ECG_BAND, ECG_T), fs=ECG_FS)


def build_designs(cfg, train=None, r_list=None):
    """Solve the design problem for every r, recording infeasible values instead of failing."""
    train = training_corpus(cfg) if train is None else train
    r_list = cfg.r_list if r_list is None else r_list
    out = DesignSet(cfg.experiment)
    if cfg.experiment == "ecg":
        out.a_hat = ecg_signal_psd(train)
        for r in r_list:
            try:
                out.designs[r] = design_spectrum(SpectralDesignInput(out.a_hat, ECG_T, r))
            except InfeasibleError as exc:
                out.errors[r] = str(exc)
    else:
        out.correlations = {k: subgrid_correlation(train, k) for k in CENTRAL_SUBGRIDS}
        for r in r_list:
            try:
                out.designs[r] = {k: design_correlation(A, r) for k, A in out.correlations.items()}
            except InfeasibleError as exc:
                out.errors[r] = str(exc)
    return out


def ecg_r_range():
    """``(r_min, 1)`` for the ECG band and window."""
    return r_min(ECG_BAND * ECG_T), 1.0


# ---------------------------------------------------------------- trials


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    method: str
    r: float
    M: int
    trial: int
    rsnr_db: float
    seed: int

    def as_tuple(self):
        return (self.experiment, self.method, _key_r(self.r), self.M, self.trial, self.rsnr_db, self.seed)


@dataclass(frozen=True)
class TrialSpec:
    row: int
    method: str
    r: float
    M: int
    trial: int


def plan_rows(cfg, r_list=None, M_list=None, n_trials=None):
    """Rows in output order: for each M, the i.i.d. baseline then each r, each over all trials."""
    r_list = cfg.r_list if r_list is None else r_list
    M_list = cfg.M_list if M_list is None else M_list
    n_trials = cfg.n_trials if n_trials is None else n_trials
    specs = []
    for M in M_list:
        for method, r in [("iid", float("nan"))] + [("rakeness", r) for r in r_list]:
            for t in range(n_trials):
                specs.append(TrialSpec(len(specs), method, r, M, t))
    return specs


class _Runner:
    """Everything a worker needs to evaluate trials; built once per process."""

    def __init__(self, cfg, designs, test):
        self.cfg = cfg
        self.test = test
        self.sources = {}
        if cfg.experiment == "ecg":
            self.D = build_gabor_dictionary(ECG_N).atoms
            for r, spec in designs.designs.items():
                self.sources[r] = StationaryAntipodalSource(spec, ECG_N, ECG_FS)
        else:
            self.D = None
            self.cols = {k: subgrid_indices(k) for k in CENTRAL_SUBGRIDS}
            for r, subs in designs.designs.items():
                self.sources[r] = {k: CorrelatedAntipodalSource(getattr(d, "B", d)) for k, d in subs.items()}

    def chips(self, spec):
        cfg = self.cfg
        seed, stream = cfg.master_seed, (3, spec.row)
        if spec.method == "iid":
            return iid_antipodal(cfg.N, seed, size=spec.M, stream=stream)
        src = self.sources[spec.r]
        if cfg.experiment == "ecg":
            return src.sample(spec.M, seed, stream)
        # outer subgrids stay i.i.d.
        Phi = iid_antipodal(cfg.N, seed, size=spec.M, stream=stream)
        for k, s in src.items():
            Phi[:, self.cols[k]] = s.sample(spec.M, seed, stream=(3, spec.row, k))
        return Phi

    def reconstruct(self, P, m):
        cfg = self.cfg
        if cfg.solver == "omp":
            return omp(P, m, min(cfg.omp_K, P.shape[0]), D=self.D)
        return ista_continuation(
            P, m, D=self.D, min_support=cfg.min_support, start=cfg.reg_start, max_halvings=cfg.max_halvings,
            max_iters=cfg.ista_max_iters, tol=cfg.ista_tol, bounds=cfg.bounds, refit=cfg.refit,
        )

    def __call__(self, spec):
        cfg = self.cfg
        x = self.test[spec.trial % len(self.test)]
        Phi = self.chips(spec)
        noise_stream = (4, spec.M, spec.trial) if cfg.paired_noise else (4, spec.row)
        m, _ = measure(x, Phi, cfg.noise, seed=cfg.master_seed, stream=noise_stream)
        P = Phi if self.D is None else Phi @ self.D
        res = self.reconstruct(P, m)
        return ResultRow(cfg.experiment, spec.method, spec.r, spec.M, spec.trial, rsnr_db(x, res.x_hat), spec.row)


_WORKER = None


def _init_worker(cfg, designs, test):
    global _WORKER
    _WORKER = _Runner(cfg, designs, test)


def _run_chunk(specs):
    return [_WORKER(s) for s in specs]


def run_trials(cfg, designs, specs, test=None, workers=1):
    """Evaluate trial rows, in parallel when ``workers > 1``; output sorted by row."""
    missing = sorted({s.r for s in specs if s.method == "rakeness"} - set(designs.designs))
    if missing:
        raise InfeasibleError(f"no design for r = {', '.join(fmt(r) for r in missing)}")
    test = test_corpus(cfg) if test is None else test
    if workers <= 1 or len(specs) < 2:
        runner = _Runner(cfg, designs, test)
        rows = [runner(s) for s in specs]
    else:
        chunks = [specs[i::workers * 4] for i in range(workers * 4)]
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg, designs, test)) as pool:
            rows = [row for part in pool.map(_run_chunk, chunks) for row in part]
    return sorted(rows, key=lambda row: row.seed)


def run_experiment(cfg, designs=None, workers=1):
    designs = build_designs(cfg) if designs is None else designs
    r_ok = tuple(r for r in cfg.r_list if r in designs.designs)
    return run_trials(cfg, designs, plan_rows(cfg, r_list=r_ok), workers=workers)


# ---------------------------------------------------------------- analysis


def _key_r(r):
    return "" if r is None or (isinstance(r, float) and math.isnan(r)) else r


def summarize_rows(rows):
    """Summary tuples per (experiment, method, r, M), ordered by experiment, M, method, r."""
    groups = {}
    for row in rows:
        groups.setdefault((row.experiment, row.method, _key_r(row.r), row.M), []).append(row.rsnr_db)
    if not groups:
        raise InvalidInputError("no result rows to summarize")
    out = []
    for (exp, method, r, M), vals in groups.items():
        N = ECG_N if exp == "ecg" else IMAGE_N
        mean, std = arsnr(vals)
        out.append((exp, method, r, M, N / M, len(vals), mean, std, count_capped(vals)))
    order = {"iid": 0, "rakeness": 1}
    out.sort(key=lambda s: (s[0], s[3], order.get(s[1], 2), s[1], -1.0 if s[2] == "" else s[2]))
    return out


@dataclass(frozen=True)
class PairedDelta:
    mean: float
    std: float
    n: int
    ci_low: float
    ci_high: float

    @property
    def excludes_zero(self):
        return self.ci_low > 0 or self.ci_high < 0


def paired_delta(rows, r, M):
    """Per-trial ``rakeness - iid`` RSNR difference with a 95% t-interval."""
    from scipy import stats

    base = {row.trial: row.rsnr_db for row in rows if row.method == "iid" and row.M == M}
    rak = {row.trial: row.rsnr_db for row in rows if row.method == "rakeness" and row.M == M and row.r == r}
    common = sorted(set(base) & set(rak))
    if len(common) < 2:
        raise InvalidInputError("need at least two paired trials")
    d = np.array([rak[t] - base[t] for t in common])
    mean, std = float(d.mean()), float(d.std(ddof=1))
    half = float(stats.t.ppf(0.975, d.size - 1)) * std / math.sqrt(d.size)
    return PairedDelta(mean, std, d.size, mean - half, mean + half)


@dataclass
class SweepReport:
    table: list  # (r, arsnr_db, std_db, n, status)
    best_r: float
    iid_arsnr_db: float
    M: int


def sweep_r(cfg, workers=1, train=None, test=None):
    """Reduced-trial pass per r at ``sweep_M`` (default: first of ``M_list``)."""
    if len(cfg.r_list) < 2:
        raise ConfigError("sweep needs at least two r values")
    M = cfg.sweep_M or cfg.M_list[0]
    designs = build_designs(cfg, train=train)
    if not designs.designs:
        raise InfeasibleError("every r in r_list is infeasible")
    small = replace(cfg, n_trials=cfg.sweep_trials)
    specs = plan_rows(small, r_list=tuple(designs.feasible), M_list=(M,))
    rows = run_trials(small, designs, specs, test=test, workers=workers)
    base = [row.rsnr_db for row in rows if row.method == "iid"]
    table = []
    for r in sorted(cfg.r_list):
        if r in designs.errors:
            table.append((r, float("nan"), float("nan"), 0, "infeasible"))
            continue
        vals = [row.rsnr_db for row in rows if row.method == "rakeness" and row.r == r]
        mean, std = arsnr(vals)
        table.append((r, mean, std, len(vals), "ok"))
    ok = [t for t in table if t[4] == "ok"]
    best = max(ok, key=lambda t: t[1])[0]
    return SweepReport(table=table, best_r=best, iid_arsnr_db=arsnr(base).mean_db, M=M)


def metadata(cfg, **extra):
    items = {"config_hash": cfg.digest(), "master_seed": cfg.master_seed}
    items.update({f"config.{k}": v for k, v in cfg.to_items().items()})
    items.update(extra)
    return items

