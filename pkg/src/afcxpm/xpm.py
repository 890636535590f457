"""Stark-shift cross-phase modulation of the stored probe."""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, WindowError
from .material import TWO_PI, MaterialParams

# detuning must exceed this many signal bandwidths (1 / mode duration)
VALIDITY_MARGIN = 5.0
BIN_SEPARATION = 18.3e-9


class ModelValidityWarning(UserWarning):
    pass


class TimeBin(enum.Enum):
    EARLY = "early"
    LATE = "late"
    PLUS = "plus"
    MINUS = "minus"

    @classmethod
    def parse(cls, value) -> "TimeBin":
        if isinstance(value, cls):
            return value
        aliases = {"e": "early", "l": "late", "+": "plus", "-": "minus"}
        key = str(value).lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            raise ConfigError(f"unknown time-bin state {value!r}") from None


@dataclass(frozen=True)
class TimeBinState:
    label: TimeBin
    bin_separation: float = BIN_SEPARATION

    def __post_init__(self):
        object.__setattr__(self, "label", TimeBin.parse(self.label))

    @property
    def relative_phase(self) -> float:
        return math.pi if self.label is TimeBin.MINUS else 0.0

    def amplitudes(self) -> tuple[complex, complex]:
        """Normalized (early, late) mode amplitudes."""
        if self.label is TimeBin.EARLY:
            return 1.0 + 0j, 0j
        if self.label is TimeBin.LATE:
            return 0j, 1.0 + 0j
        s = 1.0 / math.sqrt(2.0)
        return complex(s), s * complex(math.cos(self.relative_phase), math.sin(self.relative_phase))


@dataclass(frozen=True)
class TemporalMode:
    center: float
    duration: float
    amplitude: complex

    @property
    def start(self) -> float:
        return self.center - self.duration / 2.0

    @property
    def stop(self) -> float:
        return self.center + self.duration / 2.0


@dataclass(frozen=True)
class SignalField:
    """Signal pulse train seen by the stored probe.

    ``detuning`` is angular (rad/s), probe minus signal frequency. Mode
    amplitudes are renormalized so that sum |a|^2 = 1; ``n_photons`` carries
    the total energy. ``window`` is the storage interval (T1, T2); ``None``
    skips the window check.
    """

    modes: tuple[TemporalMode, ...]
    n_photons: float
    detuning: float
    passes: int = 1
    window: tuple[float, float] | None = None

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ConfigError("signal needs at least one temporal mode")
        if self.n_photons < 0:
            raise ConfigError(f"n_photons must be >= 0, got {self.n_photons!r}")
        if int(self.passes) != self.passes or self.passes < 1:
            raise ConfigError(f"passes must be an integer >= 1, got {self.passes!r}")
        norm = sum(abs(m.amplitude) ** 2 for m in modes)
        if norm <= 0:
            raise ConfigError("signal modes carry no energy")
        scale = 1.0 / math.sqrt(norm)
        modes = tuple(TemporalMode(m.center, m.duration, m.amplitude * scale) for m in modes)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "passes", int(self.passes))
        if self.window is not None:
            t1, t2 = self.window
            for m in modes:
                if abs(m.amplitude) > 0 and (m.start < t1 or m.stop > t2):
                    raise WindowError(
                        f"signal mode [{m.start * 1e9:.4g}, {m.stop * 1e9:.4g}] ns lies outside "
                        f"the storage window [{t1 * 1e9:.4g}, {t2 * 1e9:.4g}] ns"
                    )

    @classmethod
    def single(
        cls,
        n_photons: float,
        detuning: float,
        center: float = 0.0,
        duration: float = 130e-9,
        passes: int = 1,
        window=None,
    ) -> "SignalField":
        return cls((TemporalMode(center, duration, 1.0),), n_photons, detuning, passes, window)

    @classmethod
    def from_time_bin(
        cls,
        state: TimeBinState,
        n_photons: float,
        detuning: float,
        early_center: float = 0.0,
        duration: float = 10e-9,
        passes: int = 1,
        window=None,
    ) -> "SignalField":
        a_e, a_l = state.amplitudes()
        modes = (
            TemporalMode(early_center, duration, a_e),
            TemporalMode(early_center + state.bin_separation, duration, a_l),
        )
        return cls(modes, n_photons, detuning, passes, window)

    def shifted(self, dt: float) -> "SignalField":
        modes = tuple(TemporalMode(m.center + dt, m.duration, m.amplitude) for m in self.modes)
        return SignalField(modes, self.n_photons, self.detuning, self.passes, self.window)

    @property
    def shortest_duration(self) -> float:
        return min(m.duration for m in self.modes if abs(m.amplitude) > 0)


def phase_per_photon(params: MaterialParams, detuning: float, transfer: bool = False) -> float:
    """Probe phase (rad) per signal photon: (1/4pi) (lambda0^2 / n^2 A) (gamma / Delta).

    Halved when the excited population is parked in an auxiliary ground
    level (``transfer``), since that level sees no Stark shift.
    """
    if detuning == 0 or not math.isfinite(detuning):
        raise DomainError("detuning must be finite and non-zero (resonant regime is out of model)")
    phi = params.lambda0**2 / (params.n**2 * params.area) * params.gamma / detuning / (4.0 * math.pi)
    return phi / 2.0 if transfer else phi


def probe_phase_shift(signal: SignalField, params: MaterialParams, transfer: bool = False) -> float:
    """Total probe phase; depends only on photon number, not on mode structure."""
    if signal.n_photons == 0:
        return 0.0
    return signal.passes * signal.n_photons * phase_per_photon(params, signal.detuning, transfer)


def sensitivity_threshold(n_probe: float, eta: float) -> float:
    """Smallest resolvable phase 1 / sqrt(eta N_p)."""
    if not n_probe > 0:
        raise ConfigError(f"n_probe must be > 0, got {n_probe!r}")
    if not 0 < eta <= 1:
        raise ConfigError(f"eta must lie in (0, 1], got {eta!r}")
    return 1.0 / math.sqrt(eta * n_probe)


def validity_warnings(signal: SignalField, margin: float = VALIDITY_MARGIN) -> list[str]:
    """Messages for signals too close to resonance for the effective Hamiltonian."""
    out = []
    limit = TWO_PI * margin / signal.shortest_duration
    if abs(signal.detuning) < limit:
        out.append(
            f"|detuning|/2pi = {abs(signal.detuning) / TWO_PI / 1e6:.4g} MHz is below "
            f"{margin:g}/tau_s = {limit / TWO_PI / 1e6:.4g} MHz; large-detuning approximation is marginal"
        )
    return out


def check_validity(signal: SignalField, margin: float = VALIDITY_MARGIN) -> list[str]:
    msgs = validity_warnings(signal, margin)
    for m in msgs:
        warnings.warn(m, ModelValidityWarning, stacklevel=2)
    return msgs


def phase_curve(params: MaterialParams, detunings, transfer: bool = False) -> np.ndarray:
    return np.array([phase_per_photon(params, float(d), transfer) for d in np.atleast_1d(detunings)])
