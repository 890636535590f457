"""TOML scenario files.

Each top-level table maps onto one dataclass below. Unknown keys, wrong
types and out-of-range values raise ConfigError naming the offending key.
An empty file yields the all-defaults scenario (Tm:LiNbO3, experimental comb).
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import spectrum
from .errors import ConfigError
from .feasibility import DesignPoint, SearchRanges
from .material import PRESETS, TWO_PI, MaterialParams
from .measurement import DEFAULT_PHOTON_LEVELS, DEFAULT_SWEEP_MHZ, NoiseModel, QubitAnalysis, ReadoutModel
from .pulses import ProbePulse
from .xpm import BIN_SEPARATION, SignalField, TimeBinState


def _positive(section: str, name: str, value, strict: bool = True):
    ok = value > 0 if strict else value >= 0
    if not (math.isfinite(value) and ok):
        rel = "> 0" if strict else ">= 0"
        raise ConfigError(f"{section}.{name} must be {rel} (positivity), got {value!r}")


@dataclass(frozen=True)
class MaterialSection:
    lambda0_nm: float = 795.0
    refractive_index: float = 2.3
    gamma_hz: float = 9.1e3
    mode_radius_um: float | None = 6.25
    area_um2: float | None = None
    length_mm: float = 10.0

    def __post_init__(self):
        for k in ("lambda0_nm", "refractive_index", "gamma_hz", "length_mm"):
            _positive("material", k, getattr(self, k))
        for k in ("mode_radius_um", "area_um2"):
            if getattr(self, k) is not None:
                _positive("material", k, getattr(self, k))
        if self.mode_radius_um is None and self.area_um2 is None:
            raise ConfigError("material needs mode_radius_um or area_um2")

    def build(self) -> MaterialParams:
        area = (
            self.area_um2 * 1e-12 if self.area_um2 is not None
            else math.pi * (self.mode_radius_um * 1e-6) ** 2
        )
        try:
            return MaterialParams(self.lambda0_nm * 1e-9, self.refractive_index, self.gamma_hz, area, self.length_mm * 1e-3)
        except ConfigError as exc:
            raise ConfigError(f"material: {exc}") from None


@dataclass(frozen=True)
class CombSection:
    """Comb geometry; the defaults are the proof-of-principle comb.

    ``effective_od`` (if set) replaces ``peak_od`` with the value whose mean
    tooth OD is effective_od / finesse.
    """

    spacing_mhz: float = 5.5
    n_teeth: int = 18
    finesse: float = 2.75
    peak_od: float = spectrum.absorbance_to_od(0.1)
    effective_od: float | None = None
    background_od: float = spectrum.absorbance_to_od(0.15)
    pit_width_mhz: float = 100.0
    pit_gap_mhz: float = 100.0
    pit_od: float = spectrum.db_to_od(0.07)
    tooth_shape: str = "gaussian"

    def __post_init__(self):
        _positive("comb", "spacing_mhz", self.spacing_mhz)
        for k in ("peak_od", "background_od", "pit_width_mhz", "pit_gap_mhz", "pit_od"):
            _positive("comb", k, getattr(self, k), strict=False)

    def build(self) -> spectrum.CombParams:
        kw = dict(
            delta_m=TWO_PI * self.spacing_mhz * 1e6,
            n_teeth=self.n_teeth,
            background_od=self.background_od,
            pit_width=self.pit_width_mhz * 1e6,
            pit_gap=self.pit_gap_mhz * 1e6,
            pit_od=self.pit_od,
            tooth_shape=self.tooth_shape,
        )
        try:
            if self.effective_od is not None:
                return spectrum.CombParams.from_effective_od(self.effective_od, self.finesse, **kw)
            return spectrum.CombParams(finesse=self.finesse, peak_od=self.peak_od, **kw)
        except ConfigError as exc:
            raise ConfigError(f"comb: {exc}") from None


@dataclass(frozen=True)
class GridSection:
    n_points: int = 2**14
    span_mhz: float = 600.0

    def build(self) -> spectrum.GridSpec:
        try:
            return spectrum.GridSpec(self.n_points, self.span_mhz * 1e6)
        except ConfigError as exc:
            raise ConfigError(f"grid: {exc}") from None


@dataclass(frozen=True)
class ProbeSection:
    center_ns: float = 35.0
    duration_ns: float = 10.0
    area: float = 1e-3

    def __post_init__(self):
        _positive("probe", "duration_ns", self.duration_ns)
        _positive("probe", "area", self.area, strict=False)

    def build(self) -> ProbePulse:
        return ProbePulse(self.center_ns * 1e-9, self.duration_ns * 1e-9, self.area)


@dataclass(frozen=True)
class SignalSection:
    """Signal seen by the stored probe.

    ``state`` selects a time-bin encoding; "single" is one mode. Unset
    ``duration_ns`` means 130 ns for a single mode and 10 ns per time bin;
    unset ``center_ns`` centres the signal in the storage window.
    """

    n_photons: float = 6.9e7
    detuning_mhz: float = 100.0
    passes: int = 1
    transfer: bool = False
    state: str = "single"
    center_ns: float | None = None
    duration_ns: float | None = None
    bin_separation_ns: float = BIN_SEPARATION * 1e9

    def __post_init__(self):
        _positive("signal", "n_photons", self.n_photons, strict=False)
        if self.duration_ns is not None:
            _positive("signal", "duration_ns", self.duration_ns)
        if self.detuning_mhz == 0:
            raise ConfigError("signal.detuning_mhz must be non-zero")
        if self.passes < 1:
            raise ConfigError(f"signal.passes must be >= 1, got {self.passes!r}")
        if self.state != "single":
            TimeBinState(self.state)

    @property
    def detuning(self) -> float:
        return TWO_PI * self.detuning_mhz * 1e6

    @property
    def mode_duration(self) -> float:
        if self.duration_ns is not None:
            return self.duration_ns * 1e-9
        return 130e-9 if self.state == "single" else 10e-9

    def build(self, window=None) -> SignalField:
        if self.center_ns is not None:
            center = self.center_ns * 1e-9
        else:
            center = 0.0 if window is None else 0.5 * (window[0] + window[1])
        if self.state == "single":
            return SignalField.single(self.n_photons, self.detuning, center, self.mode_duration, self.passes, window)
        st = TimeBinState(self.state, self.bin_separation_ns * 1e-9)
        early = center - st.bin_separation / 2.0
        return SignalField.from_time_bin(st, self.n_photons, self.detuning, early, self.mode_duration, self.passes, window)


@dataclass(frozen=True)
class MeasurementSection:
    visibility: float = 0.897
    bias_phase: float = math.pi / 2.0
    lo_match: float = 1.0
    shot_to_shot_sigma: float = 0.150
    reference_residual_sigma: float = 0.100
    detector_sigma: float = 0.050
    reference_correlation_weight: float = 0.75
    repetitions: int = 200
    detunings_mhz: tuple = DEFAULT_SWEEP_MHZ
    photon_levels: tuple = DEFAULT_PHOTON_LEVELS
    late_background: float = 0.0
    zeta_l: float = 0.0

    def __post_init__(self):
        if self.repetitions < 1:
            raise ConfigError(f"measurement.repetitions must be >= 1, got {self.repetitions!r}")
        if not 0 <= self.visibility <= 1:
            raise ConfigError(f"measurement.visibility must lie in [0, 1], got {self.visibility!r}")
        if any(d == 0 for d in self.detunings_mhz):
            raise ConfigError("measurement.detunings_mhz must not contain 0")
        if len(self.photon_levels) < 3:
            raise ConfigError("measurement.photon_levels needs at least 3 entries")

    def build(self, seed: int) -> ReadoutModel:
        try:
            noise = NoiseModel(
                self.shot_to_shot_sigma,
                self.reference_residual_sigma,
                self.detector_sigma,
                self.reference_correlation_weight,
                seed,
            )
            return ReadoutModel(self.visibility, self.bias_phase, self.lo_match, noise)
        except ConfigError as exc:
            raise ConfigError(f"measurement: {exc}") from None

    def analysis(self) -> QubitAnalysis:
        return QubitAnalysis(self.visibility, self.late_background)


@dataclass(frozen=True)
class SolverSection:
    z_slices: int = 64
    points_per_period: int = 32
    margin_periods: int = 2
    dt_ns: float | None = None
    decay: bool = False
    strong: bool = False
    backend: str = "numba"

    def build(self):
        from .dynamics import SolverConfig

        try:
            return SolverConfig(
                z_slices=self.z_slices,
                points_per_period=self.points_per_period,
                margin_periods=self.margin_periods,
                dt=None if self.dt_ns is None else self.dt_ns * 1e-9,
                decay=self.decay,
                strong=self.strong,
                backend=self.backend,
            )
        except ConfigError as exc:
            raise ConfigError(f"solver: {exc}") from None


@dataclass(frozen=True)
class FeasibilitySection:
    """Defaults are the worked single-photon design point."""

    d: float = 30.0
    finesse: float = 3.2
    n_teeth: int = 110
    f: float = 3.0
    m: int = 930
    bandwidth_khz: float = 500.0
    gamma_hz: float = 9e3
    small_waveguide: bool = True
    loss_budget: float = 0.1

    def build(self, params: MaterialParams | None = None) -> DesignPoint:
        try:
            return DesignPoint(
                self.d, self.finesse, self.n_teeth, self.f, self.m, self.bandwidth_khz * 1e3,
                self.gamma_hz, params, self.small_waveguide, self.loss_budget,
            )
        except ConfigError as exc:
            raise ConfigError(f"feasibility: {exc}") from None


def _expand(name: str, spec) -> tuple:
    """A list of values, or a table {start, stop, step} (stop inclusive)."""
    if isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "step"}
        if unknown or not {"start", "stop", "step"} <= set(spec):
            raise ConfigError(f"search.{name} range needs exactly start, stop, step")
        start, stop, step = spec["start"], spec["stop"], spec["step"]
        if not step > 0 or stop < start:
            raise ConfigError(f"search.{name} needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        vals = [start + i * step for i in range(n)]
        if all(isinstance(v, int) for v in (start, stop, step)):
            vals = [int(v) for v in vals]
        return tuple(vals)
    if isinstance(spec, (list, tuple)):
        return tuple(spec)
    return (spec,)


@dataclass(frozen=True)
class SearchSection:
    d: tuple = tuple(range(5, 41, 5))
    finesse: tuple = (2.5, 3.0, 3.2, 3.5, 4.0)
    n_teeth: tuple = tuple(range(50, 201, 10))
    f: tuple = (2.0, 2.5, 3.0)
    bandwidth_khz: float = 500.0
    loss_budget: float = 0.1
    gamma_hz: float = 9e3
    small_waveguide: bool = True

    def ranges(self) -> SearchRanges:
        return SearchRanges(self.d, self.finesse, self.n_teeth, self.f)


@dataclass(frozen=True)
class RunSection:
    seed: int = 0
    threads: int | None = None
    out: str = "out"

    def __post_init__(self):
        if int(self.seed) != self.seed or self.seed < 0 or self.seed >= 2**64:
            raise ConfigError(f"run.seed must be an integer in [0, 2^64), got {self.seed!r}")
        if self.threads is not None and self.threads < 1:
            raise ConfigError(f"run.threads must be >= 1, got {self.threads!r}")


SECTIONS = {
    "material": MaterialSection,
    "comb": CombSection,
    "grid": GridSection,
    "probe": ProbeSection,
    "signal": SignalSection,
    "measurement": MeasurementSection,
    "solver": SolverSection,
    "feasibility": FeasibilitySection,
    "search": SearchSection,
    "run": RunSection,
}

_PRESET_MATERIAL = {
    "tm_linbo3": {},
    "example_si_v": {"gamma_hz": 9e3, "mode_radius_um": None, "area_um2": (795e-3 / 2.3) ** 2},
}
assert set(_PRESET_MATERIAL) == set(PRESETS)


@dataclass(frozen=True)
class Scenario:
    preset: str = "tm_linbo3"
    material: MaterialSection = field(default_factory=MaterialSection)
    comb: CombSection = field(default_factory=CombSection)
    grid: GridSection = field(default_factory=GridSection)
    probe: ProbeSection = field(default_factory=ProbeSection)
    signal: SignalSection = field(default_factory=SignalSection)
    measurement: MeasurementSection = field(default_factory=MeasurementSection)
    solver: SolverSection = field(default_factory=SolverSection)
    feasibility: FeasibilitySection = field(default_factory=FeasibilitySection)
    search: SearchSection = field(default_factory=SearchSection)
    run: RunSection = field(default_factory=RunSection)

    def params(self) -> MaterialParams:
        return self.material.build()

    def feature(self) -> spectrum.SpectralFeature:
        params = self.params()
        return spectrum.build_feature(self.comb.build(), self.grid.build(), params.length)

    def to_dict(self) -> dict:
        return _jsonable(dataclasses.asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def _coerce(section: str, name: str, value, annotation: str):
    """Check a TOML value against the field's annotation string."""
    key = f"{section}.{name}"
    ann = annotation.replace(" ", "")
    optional = ann.endswith("|None")
    base = ann[: -len("|None")] if optional else ann
    if base == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)
    if base == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value
    if base == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false, got {value!r}")
        return value
    if base == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        return value
    if base == "tuple":
        if section == "search":
            vals = _expand(name, value)
        elif isinstance(value, list):
            vals = tuple(value)
        else:
            raise ConfigError(f"{key} must be a list, got {value!r}")
        for v in vals:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{key} entries must be numbers, got {v!r}")
        if not vals:
            raise ConfigError(f"{key} must not be empty")
        return vals
    raise AssertionError(f"unhandled annotation {annotation}")


def _build_section(name: str, raw, base: dict | None = None):
    cls = SECTIONS[name]
    if not isinstance(raw, dict):
        raise ConfigError(f"[{name}] must be a table")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}; allowed: {', '.join(fields)}")
    values = dict(base or {})
    for k, v in raw.items():
        values[k] = _coerce(name, k, v, str(fields[k].type))
    if name == "material" and "mode_radius_um" in raw and "area_um2" not in raw:
        values["area_um2"] = None
    if name == "material" and "area_um2" in raw and "mode_radius_um" not in raw:
        values["mode_radius_um"] = None
    return cls(**values)


def scenario_from_dict(data: dict, preset: str | None = None) -> Scenario:
    data = dict(data)
    unknown = sorted(set(data) - set(SECTIONS) - {"preset"})
    if unknown:
        raise ConfigError(f"unknown key(s) at top level: {', '.join(unknown)}")
    name = preset or data.pop("preset", "tm_linbo3")
    data.pop("preset", None)
    if name not in _PRESET_MATERIAL:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(sorted(PRESETS))}")
    sections = {}
    for sec in SECTIONS:
        base = _PRESET_MATERIAL[name] if sec == "material" else None
        sections[sec] = _build_section(sec, data.get(sec, {}), base)
    scen = Scenario(preset=name, **sections)
    scen.params()  # surface material errors at parse time
    return scen


def parse_scenario(path: str | Path | None, preset: str | None = None) -> Scenario:
    """Read and validate a TOML scenario; ``None`` gives the defaults."""
    if path is None:
        return scenario_from_dict({}, preset)
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"scenario file not found: {path}")
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: malformed TOML: {exc}") from None
    return scenario_from_dict(data, preset)
