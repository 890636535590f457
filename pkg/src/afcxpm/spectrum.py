"""Tailored absorption profile: an atomic frequency comb between two pits."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ResolutionError
from .material import DEFAULT_LENGTH, TWO_PI, absorbance_to_od, db_to_od

GAUSS_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))
# area of a unit-height Gaussian relative to a box with the same FWHM
GAUSS_AREA_FACTOR = math.sqrt(math.pi / (4.0 * math.log(2.0)))


class ToothShape(enum.Enum):
    SQUARE = "square"
    GAUSSIAN = "gaussian"
    LORENTZIAN = "lorentzian"

    @classmethod
    def parse(cls, value) -> "ToothShape":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(
                f"tooth_shape must be one of {[s.value for s in cls]}, got {value!r}"
            ) from None


@dataclass(frozen=True)
class CombParams:
    """Comb and pit geometry.

    ``delta_m`` is the angular tooth spacing; pit sizes are linear (Hz).
    ``peak_od`` is the optical depth at a tooth maximum above the background.
    """

    delta_m: float
    n_teeth: int
    finesse: float
    peak_od: float
    background_od: float = 0.0
    pit_width: float = 100e6
    pit_gap: float = 100e6
    pit_od: float = 0.0
    outer_od: float | None = None
    tooth_shape: ToothShape = ToothShape.GAUSSIAN

    def __post_init__(self):
        object.__setattr__(self, "tooth_shape", ToothShape.parse(self.tooth_shape))
        if not self.delta_m > 0:
            raise ConfigError(f"delta_m must be > 0, got {self.delta_m!r}")
        if int(self.n_teeth) != self.n_teeth or self.n_teeth < 2:
            raise ConfigError(f"n_teeth must be an integer >= 2, got {self.n_teeth!r}")
        object.__setattr__(self, "n_teeth", int(self.n_teeth))
        if not self.finesse > 1:
            raise ConfigError(f"finesse must be > 1, got {self.finesse!r}")
        for name in ("peak_od", "background_od", "pit_od", "pit_width", "pit_gap"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)!r}")
        if self.outer_od is not None and self.outer_od < 0:
            raise ConfigError(f"outer_od must be >= 0, got {self.outer_od!r}")
        if self.pit_od > self.background_od and self.pit_width > 0:
            raise ConfigError(
                f"pit_od ({self.pit_od}) must not exceed background_od ({self.background_od})"
            )
        if self.comb_width_hz > self.pit_gap * (1 + 1e-9):
            raise ConfigError(
                f"comb width n_teeth*delta_m = {self.comb_width_hz / 1e6:.4g} MHz does not fit "
                f"in the {self.pit_gap / 1e6:.4g} MHz gap between the pits"
            )

    @classmethod
    def from_effective_od(cls, d: float, finesse: float, **kwargs) -> "CombParams":
        """Comb whose mean tooth OD over one period equals d / finesse.

        This is the convention behind the closed-form recall efficiency.
        For square teeth it coincides with ``peak_od = d``.
        """
        shape = ToothShape.parse(kwargs.pop("tooth_shape", ToothShape.GAUSSIAN))
        if shape is ToothShape.GAUSSIAN:
            peak = d / GAUSS_AREA_FACTOR
        elif shape is ToothShape.LORENTZIAN:
            peak = d / (math.pi / 2.0)
        else:
            peak = d
        return cls(finesse=finesse, peak_od=peak, tooth_shape=shape, **kwargs)

    @property
    def tooth_fwhm(self) -> float:
        return self.delta_m / self.finesse

    @property
    def comb_width(self) -> float:
        return self.n_teeth * self.delta_m

    @property
    def comb_width_hz(self) -> float:
        return self.comb_width / TWO_PI

    @property
    def outer(self) -> float:
        return self.background_od if self.outer_od is None else self.outer_od

    @property
    def tooth_centers(self) -> np.ndarray:
        j = np.arange(self.n_teeth) - (self.n_teeth - 1) / 2.0
        return j * self.delta_m

    @property
    def mean_tooth_od(self) -> float:
        """Tooth OD averaged over one period (excludes background)."""
        w = self.tooth_fwhm
        if self.tooth_shape is ToothShape.GAUSSIAN:
            area = self.peak_od * w * GAUSS_AREA_FACTOR
        elif self.tooth_shape is ToothShape.LORENTZIAN:
            area = self.peak_od * w * math.pi / 2.0
        else:
            area = self.peak_od * w
        return area / self.delta_m

    @property
    def effective_od(self) -> float:
        return self.mean_tooth_od * self.finesse


def storage_time(comb: CombParams) -> float:
    return TWO_PI / comb.delta_m


def teeth_in_band(band_hz: float, spacing_hz: float) -> int:
    return int(math.floor(band_hz / spacing_hz + 1e-9))


def experimental_comb(**overrides) -> CombParams:
    """The comb of the proof-of-principle experiment.

    100 MHz comb with 5.5 MHz spacing, 100 MHz pits on either side. Tooth and
    background depths (0.1 and 0.15) are read as decadic absorbance; the pit
    background of 0.07 dB is converted from dB. The tooth width is taken as
    2 MHz (1 MHz laser linewidth plus power broadening), so F = 2.75.
    """
    spacing_hz = 5.5e6
    values = dict(
        delta_m=TWO_PI * spacing_hz,
        n_teeth=teeth_in_band(100e6, spacing_hz),
        finesse=spacing_hz / 2.0e6,
        peak_od=absorbance_to_od(0.1),
        background_od=absorbance_to_od(0.15),
        pit_width=100e6,
        pit_gap=100e6,
        pit_od=db_to_od(0.07),
        tooth_shape=ToothShape.GAUSSIAN,
    )
    values.update(overrides)
    return CombParams(**values)


@dataclass(frozen=True)
class GridSpec:
    """Uniform detuning grid, specified in linear units."""

    n_points: int = 2**14
    span_hz: float = 600e6

    def __post_init__(self):
        if self.n_points < 2:
            raise ConfigError(f"n_points must be >= 2, got {self.n_points!r}")
        if not self.span_hz > 0:
            raise ConfigError(f"span_hz must be > 0, got {self.span_hz!r}")

    @property
    def spacing(self) -> float:
        return TWO_PI * self.span_hz / (self.n_points - 1)

    def points(self) -> np.ndarray:
        half = TWO_PI * self.span_hz / 2.0
        return np.linspace(-half, half, self.n_points)


def _tooth_profile(delta: np.ndarray, comb: CombParams) -> np.ndarray:
    w = comb.tooth_fwhm
    out = np.zeros_like(delta, dtype=float)
    if comb.peak_od == 0:
        return out
    for c in comb.tooth_centers:
        x = delta - c
        if comb.tooth_shape is ToothShape.GAUSSIAN:
            s = w * GAUSS_FWHM_TO_SIGMA
            out += np.exp(-0.5 * (x / s) ** 2)
        elif comb.tooth_shape is ToothShape.LORENTZIAN:
            out += 1.0 / (1.0 + (2.0 * x / w) ** 2)
        else:
            out += (np.abs(x) <= w / 2.0).astype(float)
    return comb.peak_od * out


def od_profile(delta: np.ndarray, comb: CombParams, span: float | None = None) -> np.ndarray:
    """Optical depth at angular detunings ``delta`` (zero beyond ``span``/2)."""
    delta = np.asarray(delta, dtype=float)
    a = np.abs(delta)
    half_gap = TWO_PI * comb.pit_gap / 2.0
    pit_edge = half_gap + TWO_PI * comb.pit_width
    base = np.where(a <= half_gap, comb.background_od, np.where(a <= pit_edge, comb.pit_od, comb.outer))
    od = base + _tooth_profile(delta, comb)
    if span is not None:
        od = np.where(a <= span / 2.0 * (1 + 1e-12), od, 0.0)
    return od


@dataclass(frozen=True)
class SpectralFeature:
    """Absorption coefficient (1/m) sampled on a uniform detuning grid (rad/s)."""

    grid: np.ndarray
    alpha: np.ndarray
    comb: CombParams
    length: float = DEFAULT_LENGTH
    span: float = field(default=0.0)

    def __post_init__(self):
        for arr in (self.grid, self.alpha):
            arr.flags.writeable = False

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def optical_depth(self) -> np.ndarray:
        return self.alpha * self.length

    def alpha_at(self, delta) -> np.ndarray:
        """Absorption coefficient evaluated from the analytic profile."""
        return od_profile(delta, self.comb, self.span) / self.length

    @property
    def storage_time(self) -> float:
        return storage_time(self.comb)

    def comb_band(self) -> tuple[float, float]:
        half = self.comb.comb_width / 2.0
        return -half, half


def build_feature(
    comb: CombParams, grid: GridSpec | None = None, length: float = DEFAULT_LENGTH
) -> SpectralFeature:
    grid = grid or GridSpec()
    if length <= 0:
        raise ConfigError(f"length must be > 0, got {length!r}")
    required = comb.tooth_fwhm / 8.0
    if grid.spacing > required * (1 + 1e-12):
        n_needed = int(math.ceil(TWO_PI * grid.span_hz / required)) + 1
        raise ResolutionError(
            f"grid spacing {grid.spacing / TWO_PI / 1e3:.4g} kHz exceeds tooth FWHM/8 = "
            f"{required / TWO_PI / 1e3:.4g} kHz; use at least {n_needed} points over "
            f"{grid.span_hz / 1e6:.4g} MHz"
        )
    total = max(comb.comb_width_hz, comb.pit_gap) + 2.0 * comb.pit_width
    if total > grid.span_hz * (1 + 1e-12):
        raise ConfigError(
            f"comb plus pits span {total / 1e6:.4g} MHz, wider than the grid span "
            f"{grid.span_hz / 1e6:.4g} MHz"
        )
    delta = grid.points()
    span = TWO_PI * grid.span_hz
    alpha = od_profile(delta, comb, span) / length
    return SpectralFeature(grid=delta, alpha=alpha, comb=comb, length=length, span=span)
