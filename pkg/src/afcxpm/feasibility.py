"""Design conditions for single-photon-sensitive cross-phase detection.

All closed-form bounds assume the small-waveguide limit A = lambda0^2 / n^2
and a detuning Delta = f n_t F gamma, so that gamma / Delta = 1 / (f n_t F).
N_g = N / 2 = n_t d / 2 atoms remain in the ground state. Loss and
sensitivity are re-evaluated through the xpm and loss modules with the
point's actual material parameters.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field, replace

from . import afc
from .errors import ConfigError, InfeasibleError
from .loss import atoms_from_optical_depth, signal_loss
from .material import TWO_PI, MaterialParams, preset
from .xpm import phase_per_photon

ABSOLUTE_PASS_FLOOR = 80.0 * math.pi

CONDITION_KEYS = (
    "cond1",
    "cond_d",
    "cond2",
    "cond_bw",
    "detuning_covers_bandwidth",
    "loss_ok",
    "sensitivity_ok",
)


@dataclass(frozen=True)
class DesignPoint:
    """One candidate operating point.

    ``f`` is the detuning safety factor, ``m`` the number of signal passes and
    ``bandwidth_hz`` the signal bandwidth B. ``gamma_hz`` overrides the
    material linewidth. ``loss_budget`` caps the total loss exponent m zeta L.
    """

    d: float
    finesse: float
    n_teeth: int
    f: float
    m: int
    bandwidth_hz: float
    gamma_hz: float = 9e3
    params: MaterialParams | None = None
    small_waveguide: bool = True
    loss_budget: float = 0.1

    def __post_init__(self):
        if not self.d > 0:
            raise ConfigError(f"d must be > 0, got {self.d!r}")
        if not self.finesse > 0:
            raise ConfigError(f"finesse must be > 0, got {self.finesse!r}")
        if int(self.n_teeth) != self.n_teeth or self.n_teeth < 1:
            raise ConfigError(f"n_teeth must be an integer >= 1, got {self.n_teeth!r}")
        if not self.f > 1:
            raise ConfigError(f"f must be > 1 (signal far detuned), got {self.f!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"m must be an integer >= 1, got {self.m!r}")
        if not self.bandwidth_hz > 0:
            raise ConfigError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz!r}")
        if not self.gamma_hz > 0:
            raise ConfigError(f"gamma_hz must be > 0, got {self.gamma_hz!r}")
        if self.loss_budget < 0:
            raise ConfigError(f"loss_budget must be >= 0, got {self.loss_budget!r}")
        object.__setattr__(self, "n_teeth", int(self.n_teeth))
        object.__setattr__(self, "m", int(self.m))

    @property
    def eta(self) -> float:
        return afc.recall_efficiency(self.d, self.finesse)

    @property
    def detuning(self) -> float:
        """Delta = f n_t F gamma, on the gamma_hz / Delta_rad scale of the phase formula."""
        return self.f * self.n_teeth * self.finesse * self.gamma_hz

    @property
    def material(self) -> MaterialParams:
        base = self.params or preset("example_si_v")
        base = replace(base, gamma=self.gamma_hz)
        return base.with_small_waveguide() if self.small_waveguide else base

    @property
    def n_atoms(self) -> float:
        return atoms_from_optical_depth(self.d, self.n_teeth, self.material)

    @property
    def n_ground(self) -> float:
        return self.n_atoms / 2.0

    def with_passes(self, m: int) -> "DesignPoint":
        return replace(self, m=int(m))


@dataclass(frozen=True)
class Condition:
    bound: float
    satisfied: bool
    kind: str  # "m>", "d>", "<=", ">" describes what ``bound`` limits

    def to_dict(self) -> dict:
        return {"bound": self.bound, "satisfied": self.satisfied, "kind": self.kind}


@dataclass
class ConditionReport:
    point: DesignPoint
    conditions: dict = field(default_factory=dict)
    eta: float = 0.0
    zeta_l: float = 0.0
    sensitivity: float = 0.0
    absolute_floor: float = ABSOLUTE_PASS_FLOOR

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.conditions.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, c in self.conditions.items() if not c.satisfied]

    def to_dict(self) -> dict:
        p = self.point
        return {
            "point": {
                "d": p.d,
                "finesse": p.finesse,
                "n_teeth": p.n_teeth,
                "f": p.f,
                "m": p.m,
                "bandwidth_hz": p.bandwidth_hz,
                "gamma_hz": p.gamma_hz,
                "small_waveguide": p.small_waveguide,
                "loss_budget": p.loss_budget,
                "detuning_rad_s": p.detuning,
            },
            "eta": self.eta,
            "zeta_l_total": self.zeta_l,
            "sensitivity": self.sensitivity,
            "absolute_pass_floor": self.absolute_floor,
            "absolute_pass_floor_satisfied": p.m > self.absolute_floor,
            "conditions": {k: c.to_dict() for k, c in self.conditions.items()},
            "all_satisfied": self.all_satisfied,
        }


def cond1_bound(eta: float) -> float:
    """Passes needed so the sensitivity target and loss budget can coexist: m > 80 pi / eta."""
    return ABSOLUTE_PASS_FLOOR / eta


def cond2_bound(d: float, finesse: float, n_teeth: int, f: float, eta: float) -> float:
    """m > 8 sqrt(2) pi f F sqrt(n_t / (d eta))."""
    return 8.0 * math.sqrt(2.0) * math.pi * f * finesse * math.sqrt(n_teeth / (d * eta))


def cond_d_bound(finesse: float, n_teeth: int, f: float, m: int, eta: float) -> float:
    """Lower bound on the optical depth: d > 128 pi^2 f^2 n_t F^2 / (m^2 eta)."""
    return 128.0 * math.pi**2 * f**2 * n_teeth * finesse**2 / (m**2 * eta)


def bandwidth_bound(
    d: float, n_teeth: int, f: float, bandwidth_hz: float, gamma_hz: float, eta: float
) -> float:
    """m > 16 sqrt(2) pi^2 f B / (sqrt(n_t eta d) gamma)."""
    return 16.0 * math.sqrt(2.0) * math.pi**2 * f * bandwidth_hz / (math.sqrt(n_teeth * eta * d) * gamma_hz)


def check_conditions(p: DesignPoint) -> ConditionReport:
    """Evaluate every design inequality at ``p``. Infeasible points are reported, not raised."""
    eta = p.eta
    rep = ConditionReport(point=p, eta=eta)
    c = rep.conditions

    b1 = cond1_bound(eta)
    c["cond1"] = Condition(b1, p.m > b1, "m>")
    bd = cond_d_bound(p.finesse, p.n_teeth, p.f, p.m, eta)
    c["cond_d"] = Condition(bd, p.d > bd, "d>")
    b2 = cond2_bound(p.d, p.finesse, p.n_teeth, p.f, eta)
    c["cond2"] = Condition(b2, p.m > b2, "m>")
    bb = bandwidth_bound(p.d, p.n_teeth, p.f, p.bandwidth_hz, p.gamma_hz, eta)
    c["cond_bw"] = Condition(bb, p.m > bb, "m>")
    # detuning must clear the signal spectrum by the same factor f
    bdet = p.f * TWO_PI * p.bandwidth_hz
    c["detuning_covers_bandwidth"] = Condition(bdet, p.detuning >= bdet, "Delta>=")

    params = p.material
    zeta = signal_loss(params, p.n_ground, p.detuning, passes=p.m)
    rep.zeta_l = zeta
    c["loss_ok"] = Condition(p.loss_budget, zeta <= p.loss_budget, "zetaL<=")

    phi = p.m * phase_per_photon(params, p.detuning, transfer=True)
    sens = math.sqrt(eta * p.n_ground) * phi
    rep.sensitivity = sens
    c["sensitivity_ok"] = Condition(1.0, sens > 1.0, ">")
    return rep


def sensitivity_pass_bound(p: DesignPoint) -> float:
    """Smallest real m with sqrt(eta N_g) m phi_1 / 2 = 1 at this point."""
    phi = phase_per_photon(p.material, p.detuning, transfer=True)
    return 1.0 / (math.sqrt(p.eta * p.n_ground) * phi)


def minimal_passes_for(p: DesignPoint) -> int:
    """Smallest integer m strictly above every lower bound on m."""
    eta = p.eta
    bounds = (
        cond1_bound(eta),
        cond2_bound(p.d, p.finesse, p.n_teeth, p.f, eta),
        bandwidth_bound(p.d, p.n_teeth, p.f, p.bandwidth_hz, p.gamma_hz, eta),
        sensitivity_pass_bound(p),
    )
    return max(1, math.floor(max(bounds)) + 1)


@dataclass(frozen=True)
class SearchRanges:
    d: tuple
    finesse: tuple
    n_teeth: tuple
    f: tuple

    def __post_init__(self):
        for name in ("d", "finesse", "n_teeth", "f"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ConfigError(f"search range '{name}' is empty")
            object.__setattr__(self, name, vals)

    @property
    def size(self) -> int:
        return len(self.d) * len(self.finesse) * len(self.n_teeth) * len(self.f)


@dataclass
class SearchResult:
    best: DesignPoint
    report: ConditionReport
    feasible: list  # list[ConditionReport], sorted by (m, d, n_t)
    evaluated: int

    def pareto(self) -> list:
        """Feasible points not dominated in (m, atom number)."""
        front = []
        best_atoms = math.inf
        for r in sorted(self.feasible, key=lambda r: (r.point.m, r.point.n_atoms)):
            if r.point.n_atoms < best_atoms:
                front.append(r)
                best_atoms = r.point.n_atoms
        return front

    def pareto_csv(self) -> str:
        cols = ["m", "d", "finesse", "n_teeth", "f", "eta", "n_atoms", "zeta_l_total", "sensitivity"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.pareto():
            p = r.point
            w.writerow(
                [p.m, f"{p.d:.6g}", f"{p.finesse:.6g}", p.n_teeth, f"{p.f:.6g}", f"{r.eta:.9g}",
                 f"{p.n_atoms:.9g}", f"{r.zeta_l:.9g}", f"{r.sensitivity:.9g}"]
            )
        return buf.getvalue()


def minimal_passes(
    ranges: SearchRanges,
    bandwidth_hz: float,
    loss_budget: float = 0.1,
    gamma_hz: float = 9e3,
    params: MaterialParams | None = None,
    small_waveguide: bool = True,
) -> SearchResult:
    """Grid search for the feasible point with the fewest passes.

    Ties are broken by smaller d, then smaller n_t. Raises InfeasibleError
    naming the constraint that fails most often when nothing is feasible.
    """
    feasible = []
    failures: dict[str, int] = {k: 0 for k in CONDITION_KEYS}
    evaluated = 0
    for d, fin, nt, f in itertools.product(ranges.d, ranges.finesse, ranges.n_teeth, ranges.f):
        evaluated += 1
        p = DesignPoint(d, fin, nt, f, 1, bandwidth_hz, gamma_hz, params, small_waveguide, loss_budget)
        p = p.with_passes(minimal_passes_for(p))
        rep = check_conditions(p)
        if rep.all_satisfied:
            feasible.append(rep)
        else:
            for k in rep.failures:
                failures[k] += 1
    if not feasible:
        binding = max(failures, key=lambda k: failures[k])
        raise InfeasibleError(
            f"no feasible design point among {evaluated} candidates; binding constraint "
            f"'{binding}' fails at {failures[binding]} of them",
            binding=binding,
            failures=failures,
        )
    feasible.sort(key=lambda r: (r.point.m, r.point.d, r.point.n_teeth, r.point.finesse, r.point.f))
    return SearchResult(best=feasible[0].point, report=feasible[0], feasible=feasible, evaluated=evaluated)
