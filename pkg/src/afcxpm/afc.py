"""Closed-form AFC memory figures of merit and a frequency-domain echo model."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .pulses import ProbePulse
from .spectrum import SpectralFeature

DEPHASING_CONST = math.pi**2 / (2.0 * math.log(2.0))


def dephasing_factor(finesse: float) -> float:
    return math.exp(-DEPHASING_CONST / finesse**2)


def recall_efficiency(d: float, finesse: float, background_od: float = 0.0) -> float:
    """Retrieval efficiency (1 - e^{-d/F})^2 exp(-pi^2 / (2 ln2 F^2)).

    A non-zero ``background_od`` attenuates the echo by e^{-background_od}.
    """
    if d < 0:
        raise ConfigError(f"optical depth must be >= 0, got {d!r}")
    if not finesse > 0:
        raise ConfigError(f"finesse must be > 0, got {finesse!r}")
    absorbed = -math.expm1(-d / finesse)
    return absorbed**2 * dephasing_factor(finesse) * math.exp(-background_od)


def recall_efficiency_ddd(d: float, finesse: float) -> float:
    """Analytic derivative of ``recall_efficiency`` with respect to d."""
    x = math.exp(-d / finesse)
    return 2.0 * (1.0 - x) * x / finesse * dephasing_factor(finesse)


def forward_efficiency(mean_od: float, harmonic: float, background_od: float = 0.0) -> float:
    """Forward-echo efficiency for an ideal infinite comb.

    ``mean_od`` is the comb OD averaged over a period and ``harmonic`` the
    ratio of the first Fourier coefficient of the profile to its mean.
    """
    return mean_od**2 * harmonic**2 * math.exp(-mean_od - background_od)


@dataclass(frozen=True)
class EchoPrediction:
    amplitude: complex
    efficiency: float
    delay: float
    geometry: str
    bandwidth_exceeded: bool
    t: np.ndarray | None = None
    field_out: np.ndarray | None = None


def complex_od(od: np.ndarray) -> np.ndarray:
    """Causal completion of a real OD profile sampled on an FFT frequency grid.

    Returns D(w) whose real part is ``od``; the amplitude transfer function
    is exp(-D / 2). The imaginary part is fixed by requiring the medium's
    impulse response to vanish before t = 0.
    """
    kernel = np.fft.fft(od)  # time-domain response, index = time sample
    n = od.size
    step = np.zeros(n)
    step[0] = 1.0
    step[1 : (n + 1) // 2] = 2.0
    if n % 2 == 0:
        step[n // 2] = 1.0
    return np.fft.ifft(kernel * step)


def _comb_harmonic(feature: SpectralFeature) -> tuple[float, float]:
    """Mean comb OD and |first harmonic / mean| over the central periods."""
    comb = feature.comb
    period = comb.delta_m
    n_per = 256
    k = max(1, comb.n_teeth // 2)
    delta = (np.arange(n_per * k) + 0.5) / n_per * period - k * period / 2.0
    od = feature.alpha_at(delta) * feature.length - comb.background_od
    mean = float(od.mean())
    if mean <= 0:
        return 0.0, 0.0
    c1 = np.mean(od * np.exp(-1j * 2.0 * np.pi * delta / period))
    return mean, float(abs(c1) / mean)


def probe_echo_amplitude(
    feature: SpectralFeature,
    probe: ProbePulse | None = None,
    geometry: str = "forward",
    dt: float = 0.05e-9,
    n_samples: int = 2**15,
) -> EchoPrediction:
    """Predict the first AFC echo without time stepping the atoms.

    ``forward``: the probe spectrum is filtered by exp(-D(w)/2), with D the
    causally completed OD profile, and the echo energy is read off in the
    window centred one storage time after the input.

    ``backward``: phase-matched recall, modelled as absorption of the comb's
    mean OD followed by re-emission, times the rephasing factor taken from the
    first Fourier coefficient of the sampled profile.
    """
    probe = probe or ProbePulse()
    t_m = feature.storage_time
    comb = feature.comb
    exceeded = probe.bandwidth_hz > comb.comb_width_hz
    if exceeded:
        warnings.warn(
            f"probe bandwidth {probe.bandwidth_hz / 1e6:.3g} MHz exceeds comb width "
            f"{comb.comb_width_hz / 1e6:.3g} MHz",
            stacklevel=2,
        )

    if geometry == "backward":
        mean, harmonic = _comb_harmonic(feature)
        amp = -math.expm1(-mean) * harmonic * math.exp(-comb.background_od / 2.0)
        return EchoPrediction(complex(amp), amp**2, t_m, geometry, exceeded)
    if geometry != "forward":
        raise ConfigError(f"geometry must be 'forward' or 'backward', got {geometry!r}")

    t = np.arange(n_samples) * dt
    if t[-1] < probe.center + 2.5 * t_m:
        raise ConfigError("time window too short for the first echo; raise n_samples or dt")
    e_in = probe.envelope(t)
    # field ~ e^{-i w t}: numpy's ifft carries e^{+i w t}, so w = -2 pi f
    omega = -2.0 * np.pi * np.fft.fftfreq(n_samples, dt)
    od = feature.alpha_at(omega) * feature.length
    transfer = np.exp(-0.5 * complex_od(od))
    e_out = np.fft.fft(np.fft.ifft(e_in) * transfer)

    lo, hi = probe.center + 0.5 * t_m, probe.center + 1.5 * t_m
    win = (t >= lo) & (t < hi)
    e_in_energy = np.sum(np.abs(e_in) ** 2)
    eff = float(np.sum(np.abs(e_out[win]) ** 2) / e_in_energy)
    shifted = probe.envelope(t - t_m)
    amp = complex(np.sum(np.conj(shifted[win]) * e_out[win]) / e_in_energy)
    return EchoPrediction(amp, eff, t_m, geometry, exceeded, t=t, field_out=e_out)
