import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afcxpm import loss
from afcxpm.errors import ConfigError, DomainError
from afcxpm.feasibility import DesignPoint
from afcxpm.material import TWO_PI, preset
from afcxpm.spectrum import CombParams, SpectralFeature, build_feature, experimental_comb

import oracles


def single_line():
    """All atoms at delta = 0; the comb only sets a tiny resonant band."""
    comb = CombParams(delta_m=TWO_PI * 1e3, n_teeth=2, finesse=2.0, peak_od=1.0, pit_width=0.0)
    return SpectralFeature(grid=np.array([0.0]), alpha=np.array([1.0]), comb=comb)


def test_far_detuned_limit(tm):
    det = 1000 * tm.gamma
    chi = loss.susceptibility(single_line(), tm, 1e4, det).chi[0]
    assert chi.imag == pytest.approx(loss.imag_chi_far_detuned(tm, 1e4, det), rel=0.01)


def test_convergence_at_twenty_linewidths(tm):
    det = 20 * tm.gamma
    chi = loss.susceptibility(single_line(), tm, 1e4, det).chi[0]
    assert chi.imag == pytest.approx(loss.imag_chi_far_detuned(tm, 1e4, det), rel=0.02)


def test_imag_chi_ties_to_loss_exponent(tm):
    det = TWO_PI * 100e6
    sus = loss.susceptibility(single_line(), tm, 1e6, det)
    zeta = 2 * sus.k_s * sus.chi.imag[0] * tm.length
    assert zeta == pytest.approx(loss.signal_loss(tm, 1e6, det), rel=1e-6)
    assert sus.transmission(tm.length)[0] == pytest.approx(math.exp(-zeta))


def test_no_atoms_no_response(tm):
    f = build_feature(experimental_comb())
    sus = loss.susceptibility(f, tm, 0.0, TWO_PI * 100e6)
    assert sus.chi.imag[0] == 0.0


def test_doubling_detuning_quarters_loss(tm):
    # no background: every absorber sits within +-50 MHz, far from the signal
    f = build_feature(experimental_comb(background_od=0.0, pit_od=0.0))
    a = loss.susceptibility(f, tm, 1e6, TWO_PI * 500e6).chi.imag[0]
    b = loss.susceptibility(f, tm, 1e6, TWO_PI * 1000e6).chi.imag[0]
    assert b == pytest.approx(a / 4, rel=0.02)


def test_passive_everywhere(tm):
    f = build_feature(experimental_comb())
    omega = TWO_PI * np.linspace(-400e6, 400e6, 301)
    sus = loss.susceptibility(f, tm, 1e6, TWO_PI * 100e6, omega)
    assert np.all(sus.chi.imag >= 0)


@pytest.mark.parametrize("mhz", [-40.0, 0.0, 30.0])
def test_detuning_in_band_rejected(tm, mhz):
    f = build_feature(experimental_comb())
    with pytest.raises(DomainError):
        loss.susceptibility(f, tm, 1e6, TWO_PI * mhz * 1e6)


def test_design_point_loss():
    p = DesignPoint(30, 3.2, 110, 3, 930, 500e3)
    z = loss.signal_loss(p.material, p.n_ground, p.detuning, p.m)
    assert z == pytest.approx(oracles.design_loss(30, 3.2, 110, 3, 930), rel=1e-12)
    assert z <= 0.1


def test_zero_atoms_and_transmission(tm):
    assert loss.signal_loss(tm, 0.0, 1e9) == 0.0
    assert loss.transmission(0.1) == pytest.approx(0.905, abs=5e-4)


def test_atom_number_bridge(tm):
    assert loss.atoms_from_optical_depth(30, 110) == 3300
    assert loss.atoms_from_optical_depth(30, 110, tm) == pytest.approx(3300 * tm.area_ratio)


def test_invalid(tm):
    with pytest.raises(DomainError):
        loss.signal_loss(tm, 1.0, 0.0)
    with pytest.raises(ConfigError):
        loss.signal_loss(tm, -1.0, 1e9)
    with pytest.raises(ConfigError):
        loss.signal_loss(tm, 1.0, 1e9, passes=0)


@given(st.floats(1, 1e9), st.floats(1e6, 1e11), st.integers(1, 5000), st.floats(0.1, 10))
def test_scaling_laws(n_g, det, m, k):
    p = preset("tm_linbo3")
    base = loss.signal_loss(p, n_g, det)
    assert loss.signal_loss(p, n_g, det, m) == pytest.approx(m * base, rel=1e-12)
    assert loss.signal_loss(p, k * n_g, det) == pytest.approx(k * base, rel=1e-12)
    assert loss.signal_loss(p, n_g, k * det) == pytest.approx(base / k**2, rel=1e-12)
