"""Semi-classical Maxwell-Bloch solver for AFC storage of a weak probe.

The field is written in retarded time (t - n z / c), so at every instant the
probe envelope along z follows from a quadrature of the atomic polarization:

    d Omega / dz = i sum_delta w(delta) sigma_ge(z, t; delta)

with w = alpha(delta) d_delta / (2 pi). That normalization makes a flat
profile transmit exp(-alpha L) in intensity (Beer-Lambert). Atoms obey

    d sigma_eg / dt = i delta sigma_eg + i Omega* (sigma_ee - sigma_gg)
    d sigma_ee / dt = i Omega sigma_eg - i Omega* sigma_ge

and are stepped with fixed-step RK4 in the frame rotating at each delta, so
free precession is reproduced exactly. Spontaneous decay is off by default
(gamma * t_m ~ 1e-5 for the Tm transition).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, SolverInstabilityError, WindowError
from .material import C_LIGHT, TWO_PI, MaterialParams
from .pulses import FOUR_LN2, ProbePulse
from .spectrum import SpectralFeature
from .xpm import SignalField, probe_phase_shift

log = logging.getLogger(__name__)

WEAK_AREA = math.pi / 10.0
INSTABILITY_TOL = 1e-6


@dataclass(frozen=True)
class SolverConfig:
    z_slices: int = 64
    points_per_period: int = 32
    margin_periods: int = 2
    dt: float | None = None
    decay: bool = False
    strong: bool = False
    check_invariants: bool = True
    backend: str = "numba"

    def __post_init__(self):
        if self.z_slices < 1:
            raise ConfigError(f"z_slices must be >= 1, got {self.z_slices!r}")
        if self.points_per_period < 32:
            raise ConfigError(f"points_per_period must be >= 32, got {self.points_per_period!r}")
        if self.margin_periods < 0:
            raise ConfigError(f"margin_periods must be >= 0, got {self.margin_periods!r}")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt!r}")
        if self.backend not in ("numba", "numpy"):
            raise ConfigError(f"backend must be 'numba' or 'numpy', got {self.backend!r}")

    def time_step(self, feature: SpectralFeature) -> float:
        if self.dt is not None:
            return self.dt
        comb = feature.comb
        return min(feature.storage_time / 4096.0, 1.0 / (50.0 * comb.comb_width_hz))


@dataclass
class EnsembleState:
    """Collective populations and coherences over (z slice, detuning class)."""

    sigma_gg: np.ndarray
    sigma_ee: np.ndarray
    sigma_eg: np.ndarray
    delta: np.ndarray
    weights: np.ndarray
    t: float = 0.0

    @classmethod
    def ground(cls, delta: np.ndarray, weights: np.ndarray, z_slices: int, t: float = 0.0):
        shape = (z_slices, delta.size)
        return cls(
            sigma_gg=np.ones(shape),
            sigma_ee=np.zeros(shape),
            sigma_eg=np.zeros(shape, dtype=complex),
            delta=delta,
            weights=weights,
            t=t,
        )

    def copy(self) -> "EnsembleState":
        return replace(
            self,
            sigma_gg=self.sigma_gg.copy(),
            sigma_ee=self.sigma_ee.copy(),
            sigma_eg=self.sigma_eg.copy(),
        )

    def closure_error(self) -> float:
        return float(np.max(np.abs(self.sigma_gg + self.sigma_ee - 1.0)))

    def bloch_violation(self) -> float:
        """max(|sigma_eg|^2 - sigma_gg sigma_ee); <= 0 for a physical state."""
        return float(np.max(np.abs(self.sigma_eg) ** 2 - self.sigma_gg * self.sigma_ee))


@dataclass
class FieldGrid:
    """Probe envelope (Rabi units) at the slice centres, plus the grid."""

    z_slices: int
    length: float
    dt: float
    refractive_index: float
    omega: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.omega is None:
            self.omega = np.zeros(self.z_slices, dtype=complex)
        if self.dz > C_LIGHT * self.dt / self.refractive_index:
            raise ConfigError(
                f"dz = {self.dz:.3g} m exceeds c dt / n = {C_LIGHT * self.dt / self.refractive_index:.3g} m"
            )

    @property
    def dz(self) -> float:
        return self.length / self.z_slices

    @property
    def z(self) -> np.ndarray:
        return (np.arange(self.z_slices) + 0.5) * self.dz


@dataclass
class EchoTrace:
    """Input and output (z = L) envelopes versus retarded time."""

    t: np.ndarray
    field_in: np.ndarray
    field_out: np.ndarray
    probe: ProbePulse
    storage_time: float
    max_closure_error: float = 0.0
    max_bloch_violation: float = -np.inf

    def extend(self, other: "EchoTrace") -> "EchoTrace":
        skip = 1 if self.t.size and other.t.size and other.t[0] == self.t[-1] else 0
        return EchoTrace(
            t=np.concatenate([self.t, other.t[skip:]]),
            field_in=np.concatenate([self.field_in, other.field_in[skip:]]),
            field_out=np.concatenate([self.field_out, other.field_out[skip:]]),
            probe=self.probe,
            storage_time=self.storage_time,
            max_closure_error=max(self.max_closure_error, other.max_closure_error),
            max_bloch_violation=max(self.max_bloch_violation, other.max_bloch_violation),
        )


def detuning_grid(feature: SpectralFeature, config: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """One comb period at ``points_per_period`` samples, tiled over the comb
    plus ``margin_periods`` on each side. Returns (delta, coupling weights)."""
    comb = feature.comb
    period = comb.delta_m
    n_periods = comb.n_teeth + 2 * config.margin_periods
    d_delta = period / config.points_per_period
    k = np.arange(n_periods * config.points_per_period)
    delta = (k + 0.5) * d_delta - n_periods * period / 2.0
    weights = feature.alpha_at(delta) * d_delta / TWO_PI
    return delta, weights


def initial_state(feature: SpectralFeature, config: SolverConfig | None = None, t: float = 0.0):
    config = config or SolverConfig()
    delta, weights = detuning_grid(feature, config)
    return EnsembleState.ground(delta, weights, config.z_slices, t)


class _Stepper:
    def __init__(self, state: EnsembleState, grid: FieldGrid, input_fn, decay_rate: float):
        self.delta = state.delta
        self.w = state.weights
        self.dz = grid.dz
        self.input_fn = input_fn
        self.decay = decay_rate

    def field(self, sigma_eg: np.ndarray, t: float):
        source = np.conj(sigma_eg) @ self.w
        acc = np.cumsum(source)
        omega_in = self.input_fn(t)
        inside = omega_in + 1j * self.dz * (acc - 0.5 * source)
        out = omega_in + 1j * self.dz * acc[-1]
        return inside, out

    def rhs(self, s, ee, gg, t):
        ph = np.exp(1j * self.delta * t)
        sigma_eg = s * ph
        omega, _ = self.field(sigma_eg, t)
        ds = 1j * np.conj(omega)[:, None] * (ee - gg) * np.conj(ph)
        dee = -2.0 * np.imag(omega[:, None] * sigma_eg)
        dgg = -dee
        if self.decay:
            ds = ds - 0.5 * self.decay * s
            dee = dee - self.decay * ee
            dgg = dgg + self.decay * ee
        return ds, dee, dgg


def evolve_probe(
    state: EnsembleState,
    grid: FieldGrid,
    feature: SpectralFeature,
    params: MaterialParams,
    t_span: tuple[float, float],
    probe: ProbePulse | None = None,
    config: SolverConfig | None = None,
):
    """Advance atoms and field over ``t_span``.

    Returns the new state, the field grid at the final time and the output
    trace. ``probe=None`` means no input field over the span.
    """
    config = config or SolverConfig()
    t0, t1 = t_span
    if t1 < t0:
        raise ConfigError("t_span must be increasing")
    if probe is not None and abs(probe.area) >= WEAK_AREA and not config.strong:
        raise ConfigError(
            f"probe area {probe.area:.3g} rad is not weak (< pi/10); set strong=True to allow"
        )
    if abs(state.t - t0) > 1e-15 + 1e-9 * abs(t0):
        raise ConfigError(f"state time {state.t} does not match t_span start {t0}")
    n_steps = max(1, int(math.ceil((t1 - t0) / grid.dt - 1e-9)))
    dt = (t1 - t0) / n_steps
    reference = probe or ProbePulse(area=0.0)
    if probe is not None:
        input_fn = lambda t: complex(probe.envelope(t))  # noqa: E731
    else:
        input_fn = lambda t: 0j  # noqa: E731
    decay = params.gamma if config.decay else 0.0
    stepper = _Stepper(state, grid, input_fn, decay)

    delta = state.delta
    s = np.ascontiguousarray(state.sigma_eg * np.exp(-1j * delta * t0))
    ee = np.array(state.sigma_ee, dtype=float, order="C")
    gg = np.array(state.sigma_gg, dtype=float, order="C")

    times = t0 + dt * np.arange(n_steps + 1)
    f_in = np.empty(n_steps + 1, dtype=complex)
    f_out = np.empty(n_steps + 1, dtype=complex)
    max_closure = 0.0
    max_bloch = -np.inf

    def check(i, closure, bloch):
        if not (math.isfinite(closure) and math.isfinite(bloch)) or bloch > INSTABILITY_TOL:
            raise SolverInstabilityError(
                f"step {i + 1} (t = {times[i + 1] * 1e9:.4g} ns): closure error {closure:.3g}, "
                f"Bloch-bound excess {bloch:.3g}; reduce dt (now {dt:.3g} s)"
            )

    f_in[0] = input_fn(t0)
    if config.backend == "numba":
        from . import _kernels

        w = np.ascontiguousarray(state.weights, dtype=float)
        work_c = np.zeros((4,) + s.shape, dtype=complex)
        work_r = np.zeros((8,) + s.shape)
        f_out[0] = _kernels.output_field(s, np.exp(1j * delta * t0), w, grid.dz, f_in[0])
        for i in range(n_steps):
            t = times[i]
            om_half = input_fn(t + 0.5 * dt)
            f_in[i + 1] = input_fn(times[i + 1])
            closure, bloch = _kernels.rk4_step(
                s, ee, gg, delta, w, grid.dz, t, dt, f_in[i], om_half, f_in[i + 1],
                decay, work_c, work_r,
            )
            f_out[i + 1] = _kernels.output_field(
                s, np.exp(1j * delta * times[i + 1]), w, grid.dz, f_in[i + 1]
            )
            if config.check_invariants:
                check(i, closure, bloch)
                max_closure = max(max_closure, closure)
                max_bloch = max(max_bloch, bloch)
            elif not math.isfinite(bloch):
                raise SolverInstabilityError(f"non-finite coherence at step {i + 1}; reduce dt")
    else:
        _, f_out[0] = stepper.field(s * np.exp(1j * delta * t0), t0)
        for i in range(n_steps):
            t = times[i]
            h = 0.5 * dt
            k1 = stepper.rhs(s, ee, gg, t)
            k2 = stepper.rhs(s + h * k1[0], ee + h * k1[1], gg + h * k1[2], t + h)
            k3 = stepper.rhs(s + h * k2[0], ee + h * k2[1], gg + h * k2[2], t + h)
            k4 = stepper.rhs(s + dt * k3[0], ee + dt * k3[1], gg + dt * k3[2], t + dt)
            s = s + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            ee = ee + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            gg = gg + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            f_in[i + 1] = input_fn(times[i + 1])
            _, f_out[i + 1] = stepper.field(s * np.exp(1j * delta * times[i + 1]), times[i + 1])
            closure = float(np.max(np.abs(gg + ee - 1.0)))
            bloch = float(np.max(np.abs(s) ** 2 - gg * ee))
            if config.check_invariants:
                check(i, closure, bloch)
                max_closure = max(max_closure, closure)
                max_bloch = max(max_bloch, bloch)
            elif not math.isfinite(bloch):
                raise SolverInstabilityError(f"non-finite coherence at step {i + 1}; reduce dt")

    new_state = replace(state, sigma_gg=gg, sigma_ee=ee, sigma_eg=s * np.exp(1j * delta * t1), t=t1)
    inside, _ = stepper.field(new_state.sigma_eg, t1)
    new_grid = replace(grid, omega=inside)
    trace = EchoTrace(
        t=times,
        field_in=f_in,
        field_out=f_out,
        probe=reference,
        storage_time=feature.storage_time,
        max_closure_error=max_closure,
        max_bloch_violation=max_bloch,
    )
    return new_state, new_grid, trace


def storage_window(probe: ProbePulse, t_m: float) -> tuple[float, float]:
    """Interval between probe absorption and echo emission."""
    half = probe_half_width(probe)
    return probe.center + half, probe.center + t_m - half


def probe_half_width(probe: ProbePulse, level: float = 1e-6) -> float:
    """Half-width at which the input intensity has dropped to ``level``."""
    return probe.duration * math.sqrt(math.log(1.0 / level) / FOUR_LN2)


def apply_signal_kick(
    state: EnsembleState,
    signal: SignalField,
    params: MaterialParams,
    transfer: bool = False,
    window: tuple[float, float] | None = None,
) -> EnsembleState:
    """Imprint the Stark phase of ``signal`` on every coherence."""
    if window is not None:
        t1, t2 = window
        if not t1 <= state.t <= t2:
            raise WindowError(
                f"kick at {state.t * 1e9:.4g} ns outside storage window "
                f"[{t1 * 1e9:.4g}, {t2 * 1e9:.4g}] ns"
            )
        for m in signal.modes:
            if abs(m.amplitude) > 0 and (m.start < t1 or m.stop > t2):
                raise WindowError(
                    f"signal mode [{m.start * 1e9:.4g}, {m.stop * 1e9:.4g}] ns outside storage "
                    f"window [{t1 * 1e9:.4g}, {t2 * 1e9:.4g}] ns"
                )
    phi = probe_phase_shift(signal, params, transfer)
    if phi == 0.0:
        return state
    out = state.copy()
    out.sigma_eg *= np.exp(1j * phi)
    return out


def _windows(trace: EchoTrace):
    t_m = trace.storage_time
    c = trace.probe.center
    if probe_half_width(trace.probe) >= t_m / 2.0:
        raise WindowError(
            f"probe ({trace.probe.duration * 1e9:.3g} ns) too long to separate input and echo "
            f"windows at t_m = {t_m * 1e9:.4g} ns"
        )
    return (c - 0.5 * t_m, c + 0.5 * t_m), (c + 0.5 * t_m, c + 1.5 * t_m)


def echo_pulse_window(trace: EchoTrace) -> tuple[float, float]:
    """Support of the recalled pulse; it opens where the storage window closes.

    Phases are read here rather than over the wide efficiency window, since a
    low-finesse comb keeps radiating weakly during storage and that light
    is not part of the echo.
    """
    _windows(trace)
    half = probe_half_width(trace.probe)
    t_echo = trace.probe.center + trace.storage_time
    return t_echo - half, t_echo + half


def _in(t, win):
    return (t >= win[0]) & (t < win[1])


def input_energy(trace: EchoTrace) -> float:
    return float(np.sum(np.abs(trace.field_in) ** 2))


def echo_efficiency_numeric(trace: EchoTrace) -> float:
    """Energy in the first-echo window over input energy."""
    _, echo = _windows(trace)
    if trace.t[-1] < echo[1]:
        raise WindowError("trace ends before the echo window closes")
    e_in = input_energy(trace)
    if e_in == 0:
        raise WindowError("trace has no input energy")
    return float(np.sum(np.abs(trace.field_out[_in(trace.t, echo)]) ** 2) / e_in)


def transmitted_fraction(trace: EchoTrace) -> float:
    """Output energy in the input window over input energy."""
    inp, _ = _windows(trace)
    mask = _in(trace.t, inp)
    return float(np.sum(np.abs(trace.field_out[mask]) ** 2) / input_energy(trace))


def echo_delay(trace: EchoTrace) -> float:
    """Time from input peak to echo peak (parabolic sub-sample refinement)."""
    _, echo = _windows(trace)
    mask = np.flatnonzero(_in(trace.t, echo))
    power = np.abs(trace.field_out) ** 2
    i = mask[np.argmax(power[mask])]
    t_peak = trace.t[i]
    if 0 < i < trace.t.size - 1:
        y0, y1, y2 = power[i - 1], power[i], power[i + 1]
        den = y0 - 2 * y1 + y2
        if den != 0:
            t_peak += 0.5 * (y0 - y2) / den * (trace.t[i + 1] - trace.t[i])
    return float(t_peak - trace.probe.center)


def echo_overlap(trace: EchoTrace, reference: np.ndarray | None = None) -> complex:
    """<reference | output> over the echo pulse; default reference is the
    input pulse delayed by t_m."""
    mask = _in(trace.t, echo_pulse_window(trace))
    if reference is None:
        reference = trace.probe.envelope(trace.t - trace.storage_time)
    return complex(np.sum(np.conj(reference[mask]) * trace.field_out[mask]))


def echo_phase(trace: EchoTrace) -> float:
    """Echo phase in the atomic-coherence convention (sigma_eg ~ e^{+i w t}).

    The emitted envelope follows sigma_ge, so a kick e^{i phi} on sigma_eg
    multiplies it by e^{-i phi}; the sign flip here reports it as +phi.
    """
    return -float(np.angle(echo_overlap(trace)))


def relative_echo_phase(trace: EchoTrace, reference: EchoTrace) -> float:
    """Phase of ``trace``'s echo relative to ``reference``'s, same convention."""
    return -float(np.angle(echo_overlap(trace, reference.field_out)))


@dataclass
class EchoRun:
    trace: EchoTrace
    state: EnsembleState
    applied_phase: float
    kick_time: float | None
    window: tuple[float, float]

    @property
    def efficiency(self) -> float:
        return echo_efficiency_numeric(self.trace)

    @property
    def delay(self) -> float:
        return echo_delay(self.trace)

    @property
    def phase(self) -> float:
        return echo_phase(self.trace)


def run_echo(
    feature: SpectralFeature,
    params: MaterialParams,
    probe: ProbePulse | None = None,
    signal: SignalField | None = None,
    transfer: bool = False,
    kick_time: float | None = None,
    config: SolverConfig | None = None,
    t_end: float | None = None,
) -> EchoRun:
    """Store a probe, optionally kick it with a signal, and record the echo."""
    config = config or SolverConfig()
    probe = probe or ProbePulse(center=35e-9)
    t_m = feature.storage_time
    if t_end is None:
        t_end = probe.center + 1.5 * t_m
    dt = config.time_step(feature)
    t_end = math.ceil(t_end / dt - 1e-9) * dt
    grid = FieldGrid(config.z_slices, feature.length, dt, params.n)
    state = initial_state(feature, config, t=0.0)
    window = storage_window(probe, t_m)

    applied = 0.0
    if signal is None:
        state, grid, trace = evolve_probe(state, grid, feature, params, (0.0, t_end), probe, config)
        return EchoRun(trace, state, applied, None, window)

    if kick_time is None:
        weights = np.array([abs(m.amplitude) ** 2 for m in signal.modes])
        centers = np.array([m.center for m in signal.modes])
        kick_time = float(np.sum(weights * centers) / np.sum(weights))
    if not window[0] <= kick_time <= window[1]:
        raise WindowError(
            f"kick time {kick_time * 1e9:.4g} ns outside storage window "
            f"[{window[0] * 1e9:.4g}, {window[1] * 1e9:.4g}] ns"
        )
    # land the kick exactly on a step boundary
    n_before = max(1, int(round(kick_time / dt)))
    t_kick = n_before * dt
    state, grid, first = evolve_probe(state, grid, feature, params, (0.0, t_kick), probe, config)
    state = apply_signal_kick(state, signal, params, transfer, window)
    applied = probe_phase_shift(signal, params, transfer)
    state, grid, second = evolve_probe(state, grid, feature, params, (t_kick, t_end), probe, config)
    log.debug("kick of %.4g rad at %.4g ns", applied, t_kick * 1e9)
    return EchoRun(first.extend(second), state, applied, t_kick, window)
