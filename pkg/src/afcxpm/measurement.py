"""Interferometric phase readout, noise averaging and time-bin error rates.

The recalled probe interferes with a local oscillator biased at pi/2, so a
small probe phase maps linearly onto the normalized intensity. Every noise
term is Gaussian. Run ``r`` of an experiment draws from
``numpy.random.default_rng([seed, r])``, so any run can be replayed alone.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FitError, InversionError
from .material import MaterialParams
from .xpm import TimeBin, TimeBinState, phase_per_photon

CALIBRATED_VISIBILITY = 0.897


@dataclass(frozen=True)
class NoiseModel:
    """Phase noise budget (rad).

    The reference measurement is correlated with the signal-run noise so
    that subtracting ``reference_correlation_weight`` times it leaves
    exactly ``reference_residual_sigma``. The implied correlation is
    ``correlation``. Detector noise enters in intensity, scaled so it equals
    ``detector_sigma`` in phase near the bias point.
    """

    shot_to_shot_sigma: float = 0.150
    reference_residual_sigma: float = 0.100
    detector_sigma: float = 0.050
    reference_correlation_weight: float = 0.75
    seed: int = 0

    def __post_init__(self):
        for name in ("shot_to_shot_sigma", "reference_residual_sigma", "detector_sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be a finite number >= 0, got {v!r}")
        if not self.reference_correlation_weight >= 0:
            raise ConfigError(
                f"reference_correlation_weight must be >= 0, got {self.reference_correlation_weight!r}"
            )
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        self.correlation  # validates the residual/weight combination

    @classmethod
    def noiseless(cls, seed: int = 0) -> "NoiseModel":
        return cls(0.0, 0.0, 0.0, 0.0, seed)

    @property
    def correlation(self) -> float:
        s, r, w = self.shot_to_shot_sigma, self.reference_residual_sigma, self.reference_correlation_weight
        if s == 0:
            if r > 0:
                raise ConfigError("reference_residual_sigma > 0 needs shot_to_shot_sigma > 0")
            return 0.0
        if w == 0:
            if not math.isclose(r, s):
                raise ConfigError(
                    "with reference_correlation_weight = 0 the residual equals the shot-to-shot noise"
                )
            return 0.0
        rho = (1.0 + w * w - (r / s) ** 2) / (2.0 * w)
        if not -1.0 <= rho <= 1.0:
            raise ConfigError(
                f"reference_residual_sigma={r!r} is unreachable with shot_to_shot_sigma={s!r} "
                f"and reference_correlation_weight={w!r} (correlation {rho:.3g} outside [-1, 1])"
            )
        return rho

    @property
    def phase_sigma(self) -> float:
        """Total phase noise per repetition in the small-angle limit."""
        return math.hypot(self.reference_residual_sigma, self.detector_sigma)

    def with_seed(self, seed: int) -> "NoiseModel":
        return NoiseModel(
            self.shot_to_shot_sigma,
            self.reference_residual_sigma,
            self.detector_sigma,
            self.reference_correlation_weight,
            seed,
        )


@dataclass(frozen=True)
class ReadoutModel:
    """Interferometer calibration.

    ``lo_match`` is the LO-to-probe intensity ratio r; the fringe contrast is
    2 sqrt(r) / (1 + r) times the visibility.
    """

    visibility: float = CALIBRATED_VISIBILITY
    bias_phase: float = math.pi / 2.0
    lo_match: float = 1.0
    noise: NoiseModel = field(default_factory=NoiseModel)

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ConfigError(f"visibility must lie in [0, 1], got {self.visibility!r}")
        if not 0.0 < self.bias_phase < math.pi:
            raise ConfigError(f"bias_phase must lie in (0, pi), got {self.bias_phase!r}")
        if not self.lo_match > 0:
            raise ConfigError(f"lo_match must be > 0, got {self.lo_match!r}")

    @property
    def contrast(self) -> float:
        r = self.lo_match
        return 2.0 * math.sqrt(r) / (1.0 + r) * self.visibility


def intensity_from_phase(model: ReadoutModel, phi):
    """Normalized intensity 1 + C cos(phi + bias); equals 1 - V sin(phi) at the default bias."""
    return 1.0 + model.contrast * np.cos(np.asarray(phi, dtype=float) + model.bias_phase)


def phase_from_intensity(model: ReadoutModel, intensity, clip: bool = False):
    """Invert ``intensity_from_phase`` on the branch phi + bias in [0, pi].

    Intensities outside the fringe raise InversionError unless ``clip``.
    """
    c = model.contrast
    if c == 0:
        raise InversionError("zero fringe contrast: the phase cannot be recovered")
    x = (np.asarray(intensity, dtype=float) - 1.0) / c
    if clip:
        x = np.clip(x, -1.0, 1.0)
    elif np.any(np.abs(x) > 1.0):
        raise InversionError("intensity outside the interference fringe")
    return np.arccos(x) - model.bias_phase


@dataclass(frozen=True)
class MeasurementRecord:
    true_phase: float
    intensity: float
    inferred_phase: float
    index: int
    run: int
    seed: int


@dataclass
class ExperimentResult:
    mean_phase: float
    std_of_mean: float
    n_reps: int
    seed: int
    run: int
    true_phase: float
    records: list | None = None


def _draw(model: ReadoutModel, true_phase: float, n_reps: int, seed: int, runs: np.ndarray):
    """Intensities and inferred phases, one row per run. Row i depends only on (seed, runs[i])."""
    nm = model.noise
    s, w, rho = nm.shot_to_shot_sigma, nm.reference_correlation_weight, nm.correlation
    out_i = np.empty((runs.size, n_reps))
    for row, run in enumerate(runs):
        rng = np.random.default_rng([seed, int(run)])
        z = rng.standard_normal((3, n_reps))
        raw = s * z[0]
        ref = s * (rho * z[0] + math.sqrt(max(0.0, 1.0 - rho * rho)) * z[1])
        phase = true_phase + raw - w * ref
        det = model.contrast * nm.detector_sigma * z[2]
        out_i[row] = intensity_from_phase(model, phase) + det
    return out_i, phase_from_intensity(model, out_i, clip=True)


def run_experiment(
    true_phase: float,
    n_reps: int,
    model: ReadoutModel | None = None,
    seed: int | None = None,
    run: int = 0,
    keep_records: bool = False,
) -> ExperimentResult:
    """Average ``n_reps`` noisy repetitions of one phase measurement."""
    model = model or ReadoutModel()
    if int(n_reps) != n_reps or n_reps < 1:
        raise ConfigError(f"n_reps must be an integer >= 1, got {n_reps!r}")
    seed = model.noise.seed if seed is None else seed
    inten, phases = _draw(model, true_phase, int(n_reps), seed, np.array([run]))
    inten, phases = inten[0], phases[0]
    sem = float(phases.std(ddof=1) / math.sqrt(n_reps)) if n_reps > 1 else 0.0
    records = None
    if keep_records:
        records = [
            MeasurementRecord(true_phase, float(inten[i]), float(phases[i]), i, run, seed)
            for i in range(n_reps)
        ]
    return ExperimentResult(float(phases.mean()), sem, int(n_reps), seed, run, true_phase, records)


def replay_record(model: ReadoutModel, true_phase: float, n_reps: int, seed: int, run: int, index: int):
    """Recompute a single record from its (seed, run, index) coordinates."""
    inten, phases = _draw(model, true_phase, n_reps, seed, np.array([run]))
    return MeasurementRecord(true_phase, float(inten[0, index]), float(phases[0, index]), index, run, seed)


def trial_means(
    true_phase: float, n_reps: int, n_trials: int, model: ReadoutModel | None = None, seed: int | None = None
) -> np.ndarray:
    """Means of ``n_trials`` independent experiments (runs 0..n_trials-1)."""
    model = model or ReadoutModel()
    seed = model.noise.seed if seed is None else seed
    _, phases = _draw(model, true_phase, int(n_reps), seed, np.arange(n_trials))
    return phases.mean(axis=1)


def std_of_mean_scaling(
    reps, n_trials: int = 1000, model: ReadoutModel | None = None, seed: int | None = None
) -> tuple[np.ndarray, float]:
    """Monte-Carlo std of the mean for each j in ``reps`` and the log-log slope."""
    reps = np.asarray(reps, dtype=int)
    stds = np.array([trial_means(0.0, int(j), n_trials, model, seed).std(ddof=1) for j in reps])
    slope = float(np.polyfit(np.log(reps), np.log(stds), 1)[0])
    return stds, slope


@dataclass(frozen=True)
class LinearFit:
    slope: float
    slope_err: float
    intercept: float
    intercept_err: float


def linear_fit(x, y, sigma=None) -> LinearFit:
    """Weighted least-squares line. Errors from the residuals when ``sigma`` is absent."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ConfigError(f"a slope fit needs >= 3 points, got {x.size}")
    weighted = sigma is not None and np.all(np.asarray(sigma) > 0)
    w = 1.0 / np.asarray(sigma, dtype=float) if weighted else np.ones_like(x)
    a = np.column_stack([x, np.ones_like(x)]) * w[:, None]
    b = y * w
    if np.linalg.matrix_rank(a) < 2:
        raise FitError("degenerate design matrix: photon levels must not all coincide")
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    cov = np.linalg.inv(a.T @ a)
    if not weighted:
        resid = b - a @ coef
        cov = cov * float(resid @ resid) / (x.size - 2)
    err = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return LinearFit(float(coef[0]), float(err[0]), float(coef[1]), float(err[1]))


@dataclass(frozen=True)
class SweepRow:
    detuning: float
    slope: float
    slope_err: float
    intercept: float
    analytic: float
    means: tuple
    sems: tuple


DEFAULT_SWEEP_MHZ = (-100.0, -80.0, -65.0, -50.0, 50.0, 55.0, 65.0, 80.0, 100.0)
DEFAULT_PHOTON_LEVELS = (0.0, 2.5e7, 5.0e7, 7.5e7, 1.0e8)


def detuning_sweep(
    detunings,
    photon_levels,
    n_reps: int,
    model: ReadoutModel | None = None,
    params: MaterialParams | None = None,
    transfer: bool = False,
    passes: int = 1,
    seed: int | None = None,
) -> list[SweepRow]:
    """Fit probe phase against photon number at each detuning (rad/s).

    Each (detuning, level) pair is an independent run with its own index.
    """
    from .material import preset

    model = model or ReadoutModel()
    params = params or preset("tm_linbo3")
    levels = np.asarray(photon_levels, dtype=float)
    if levels.size < 3:
        raise ConfigError(f"need >= 3 photon levels per detuning, got {levels.size}")
    seed = model.noise.seed if seed is None else seed
    rows = []
    run = 0
    for det in detunings:
        phi1 = passes * phase_per_photon(params, float(det), transfer)
        means, sems = [], []
        for n in levels:
            res = run_experiment(n * phi1, n_reps, model, seed=seed, run=run)
            means.append(res.mean_phase)
            sems.append(res.std_of_mean)
            run += 1
        fit = linear_fit(levels, means, sems)
        rows.append(SweepRow(float(det), fit.slope, fit.slope_err, fit.intercept, phi1, tuple(means), tuple(sems)))
    return rows


class Analyzer(enum.Enum):
    TIME_OF_ARRIVAL = "time_of_arrival"
    INTERFEROMETER = "interferometer"

    @classmethod
    def parse(cls, value) -> "Analyzer":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"unknown analyzer {value!r}") from None

    @classmethod
    def for_state(cls, state: TimeBinState) -> "Analyzer":
        if state.label in (TimeBin.EARLY, TimeBin.LATE):
            return cls.TIME_OF_ARRIVAL
        return cls.INTERFEROMETER


@dataclass(frozen=True)
class QubitAnalysis:
    """Error-rate model for the four time-bin states.

    ``late_background`` adds counts to the late bin when the interaction is
    on, as a fraction of the transmitted pulse; it models re-emission from
    atoms left excited and is off by default.
    """

    visibility: float = CALIBRATED_VISIBILITY
    late_background: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ConfigError(f"visibility must lie in [0, 1], got {self.visibility!r}")
        if self.late_background < 0:
            raise ConfigError(f"late_background must be >= 0, got {self.late_background!r}")


def qubit_error_rates(
    state: TimeBinState,
    interaction: bool,
    zeta_l: float = 0.0,
    analyzer: Analyzer | str | None = None,
    analysis: QubitAnalysis | None = None,
) -> float:
    """Normalized wrong-bin (or wrong-port) fraction for ``state``.

    The interaction attenuates both bins by exp(-zeta_l) and adds a common
    phase. Both drop out of the normalized rate, so the factor is divided
    out before any arithmetic and only the optional background (scaled to
    the transmitted light) can change the result.
    """
    if not isinstance(state, TimeBinState):
        state = TimeBinState(state)
    analysis = analysis or QubitAnalysis()
    analyzer = Analyzer.for_state(state) if analyzer is None else Analyzer.parse(analyzer)
    if analyzer is not Analyzer.for_state(state):
        raise ConfigError(f"analyzer '{analyzer.value}' does not match the basis of state '{state.label.value}'")
    if zeta_l < 0:
        raise ConfigError(f"zeta_l must be >= 0, got {zeta_l!r}")
    a_e, a_l = state.amplitudes()
    bg = analysis.late_background if interaction else 0.0

    if analyzer is Analyzer.TIME_OF_ARRIVAL:
        early = abs(a_e) ** 2
        late = abs(a_l) ** 2
        late += bg * (early + late)
        wrong = late if state.label is TimeBin.EARLY else early
        return wrong / (early + late)

    # unbalanced interferometer: the two bins overlap at the output ports
    v = analysis.visibility
    rel = np.angle(a_l) - np.angle(a_e) if abs(a_l) > 0 and abs(a_e) > 0 else 0.0
    amp = 2.0 * abs(a_e) * abs(a_l) * v
    plus_port = (abs(a_e) ** 2 + abs(a_l) ** 2 + amp * math.cos(rel)) / 2.0
    minus_port = (abs(a_e) ** 2 + abs(a_l) ** 2 - amp * math.cos(rel)) / 2.0
    wrong = minus_port if state.label is TimeBin.PLUS else plus_port
    return wrong / (plus_port + minus_port)


@dataclass(frozen=True)
class TimeBinRow:
    state: str
    phase_true: float
    phase_mean: float
    phase_sem: float
    error_before: float
    error_after: float


def time_bin_phase_experiment(
    n_photons: float,
    detuning: float,
    n_reps: int,
    model: ReadoutModel | None = None,
    params: MaterialParams | None = None,
    zeta_l: float = 0.0,
    analysis: QubitAnalysis | None = None,
    seed: int | None = None,
    states=("early", "late", "plus", "minus"),
) -> list[TimeBinRow]:
    """Probe phase and qubit error rates for each signal state plus a no-signal row.

    All rows share run 0 (common random numbers), so differences between
    rows come only from the model, not from sampling.
    """
    from .material import preset
    from .xpm import SignalField, probe_phase_shift

    model = model or ReadoutModel()
    params = params or preset("tm_linbo3")
    seed = model.noise.seed if seed is None else seed
    rows = []
    res0 = run_experiment(0.0, n_reps, model, seed=seed, run=0)
    rows.append(TimeBinRow("none", 0.0, res0.mean_phase, res0.std_of_mean, math.nan, math.nan))
    for label in states:
        st = TimeBinState(label)
        sig = SignalField.from_time_bin(st, n_photons, detuning)
        phi = probe_phase_shift(sig, params)
        res = run_experiment(phi, n_reps, model, seed=seed, run=0)
        before = qubit_error_rates(st, False, zeta_l, analysis=analysis)
        after = qubit_error_rates(st, True, zeta_l, analysis=analysis)
        rows.append(TimeBinRow(st.label.value, phi, res.mean_phase, res.std_of_mean, before, after))
    return rows
