"""Probe pulse envelopes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

FOUR_LN2 = 4.0 * math.log(2.0)


@dataclass(frozen=True)
class ProbePulse:
    """Gaussian envelope with intensity FWHM ``duration``.

    ``area`` is the pulse area of the Rabi envelope (rad); a weak probe keeps
    it well below pi/10.
    """

    center: float = 30e-9
    duration: float = 10e-9
    area: float = 1e-3

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError(f"probe duration must be > 0, got {self.duration!r}")

    @property
    def peak(self) -> float:
        # integral of exp(-2 ln2 t^2 / tau^2) dt = tau * sqrt(pi / (2 ln2))
        return self.area / (self.duration * math.sqrt(2.0 * math.pi / FOUR_LN2))

    @property
    def bandwidth_hz(self) -> float:
        """Intensity-spectrum FWHM in Hz."""
        return 2.0 * math.log(2.0) / (math.pi * self.duration)

    @property
    def support(self) -> float:
        """Half-width beyond which the intensity is below 1e-12 of peak."""
        return self.duration * math.sqrt(math.log(1e12) / FOUR_LN2)

    def envelope(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        x = (t - self.center) / self.duration
        return self.peak * np.exp(-0.5 * FOUR_LN2 * x * x).astype(complex)

    def energy(self) -> float:
        return self.peak**2 * self.duration * math.sqrt(math.pi / FOUR_LN2)
