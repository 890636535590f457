"""Off-resonant absorption of the signal by the comb atoms."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .material import C_LIGHT, TWO_PI, MaterialParams
from .spectrum import SpectralFeature


@dataclass(frozen=True)
class Susceptibility:
    omega: np.ndarray
    chi: np.ndarray
    k_s: float

    def transmission(self, length: float) -> np.ndarray:
        """Intensity transmission |exp(i k_s chi L)|^2 at each omega."""
        return np.exp(-2.0 * self.k_s * self.chi.imag * length)


def atoms_from_optical_depth(d: float, n_teeth: int, params: MaterialParams | None = None) -> float:
    """Total atom number N = n_t d, scaled by A / (lambda0^2 / n^2) for wider guides."""
    ratio = 1.0 if params is None else params.area_ratio
    return n_teeth * d * ratio


def imag_chi_far_detuned(params: MaterialParams, n_ground: float, detuning: float) -> float:
    """Large-detuning limit of Imag chi(0)."""
    k_s = params.n * params.omega0 / C_LIGHT
    v = params.mode_volume
    return (
        n_ground * params.lambda0**2 * params.gamma**2
        / (16.0 * math.pi * k_s * params.n**2 * v * detuning**2)
    )


def susceptibility(
    feature: SpectralFeature,
    params: MaterialParams,
    n_ground: float,
    detuning: float,
    omega: np.ndarray | None = None,
    check_band: bool = True,
) -> Susceptibility:
    """Full response chi(omega): a Lorentzian per detuning class of the feature.

    Atoms are distributed over the feature grid in proportion to alpha. The
    Lorentzian half-width is ``params.gamma`` used as the numerical rate,
    consistent with the gamma_hz / Delta_rad ratio of the phase formula, and
    the prefactor is fixed so the far-detuned limit equals
    ``imag_chi_far_detuned``. Sign is chosen so Imag chi >= 0 (passive).
    ``omega`` is the signal envelope frequency offset (rad/s).
    """
    if n_ground < 0:
        raise ConfigError(f"n_ground must be >= 0, got {n_ground!r}")
    lo, hi = feature.comb_band()
    if check_band and -hi <= detuning <= -lo:
        raise DomainError(
            f"signal detuning {detuning / TWO_PI / 1e6:.4g} MHz lies inside the comb band; "
            "resonant absorption is outside the model"
        )
    if omega is None:
        omega = np.zeros(1)
    omega = np.asarray(omega, dtype=float)
    k_s = params.n * params.omega0 / C_LIGHT
    weights = feature.alpha / feature.alpha.sum() if feature.alpha.sum() > 0 else feature.alpha * 0
    pref = params.lambda0**2 * params.gamma / (16.0 * math.pi * params.n**2 * params.mode_volume)
    x = omega[:, None] - (detuning + feature.grid[None, :])
    resp = (1j / (params.gamma + 1j * x)) @ weights
    chi = (-params.n * omega / C_LIGHT + pref * n_ground * resp) / k_s
    return Susceptibility(omega=omega, chi=chi, k_s=k_s)


def signal_loss(params: MaterialParams, n_ground: float, detuning: float, passes: int = 1) -> float:
    """Intensity-loss exponent zeta L = m (1/8pi) (N_g lambda0^2 / n^2 A) (gamma / Delta)^2."""
    if detuning == 0:
        raise DomainError("detuning must be non-zero")
    if n_ground < 0:
        raise ConfigError(f"n_ground must be >= 0, got {n_ground!r}")
    if passes < 1:
        raise ConfigError(f"passes must be >= 1, got {passes!r}")
    single = (
        n_ground * params.lambda0**2 / (params.n**2 * params.area)
        * (params.gamma / detuning) ** 2 / (8.0 * math.pi)
    )
    return passes * single


def transmission(zeta_l: float) -> float:
    return math.exp(-zeta_l)
