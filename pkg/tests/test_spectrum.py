import math

import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import trapezoid
from hypothesis import strategies as st

from afcxpm.errors import ConfigError, ResolutionError
from afcxpm.material import TWO_PI
from afcxpm.spectrum import (
    CombParams,
    GridSpec,
    ToothShape,
    build_feature,
    experimental_comb,
    storage_time,
    teeth_in_band,
)


def comb(**kw):
    base = dict(delta_m=TWO_PI * 5.5e6, n_teeth=18, finesse=3.0, peak_od=1.0)
    base.update(kw)
    return CombParams(**base)


def test_lab_band_holds_18_teeth():
    assert teeth_in_band(100e6, 5.5e6) == 18
    assert experimental_comb().n_teeth == 18


def test_storage_time_examples():
    assert storage_time(comb()) == pytest.approx(181.818e-9, rel=1e-5)
    assert storage_time(comb(delta_m=TWO_PI * 10e6, n_teeth=9)) == pytest.approx(100e-9)
    assert storage_time(comb(delta_m=TWO_PI * 11e6, n_teeth=9)) == pytest.approx(storage_time(comb()) / 2)


def test_zero_peak_gives_flat_background():
    f = build_feature(comb(peak_od=0.0, background_od=0.3, pit_od=0.1))
    band = np.abs(f.grid) <= TWO_PI * 50e6
    assert np.allclose(f.optical_depth[band], 0.3)


def test_pits_and_outer_region():
    c = experimental_comb()
    f = build_feature(c)
    hz = f.grid / TWO_PI
    pit = (np.abs(hz) > 55e6) & (np.abs(hz) < 149e6)
    assert np.allclose(f.optical_depth[pit], c.pit_od)
    assert np.all(f.alpha[pit] <= c.background_od / f.length)
    outer = np.abs(hz) > 151e6
    assert np.allclose(f.optical_depth[outer], c.background_od)


def test_feature_invariants():
    f = build_feature(experimental_comb())
    assert np.all(f.alpha >= 0)
    d = np.diff(f.grid)
    assert np.all(d > 0)
    assert np.allclose(d, d[0], rtol=1e-9)


def test_tooth_peaks_sit_on_background():
    c = experimental_comb()
    f = build_feature(c)
    peaks = f.alpha_at(c.tooth_centers) * f.length
    assert np.allclose(peaks, c.background_od + c.peak_od, rtol=1e-3)


def test_coarse_grid_names_required_spacing():
    with pytest.raises(ResolutionError, match="at least"):
        build_feature(comb(), GridSpec(n_points=1024))


def test_span_must_hold_comb_and_pits():
    with pytest.raises(ConfigError):
        build_feature(comb(), GridSpec(n_points=2**14, span_hz=250e6))


@pytest.mark.parametrize(
    "kw",
    [dict(finesse=1.0), dict(n_teeth=1), dict(delta_m=0.0), dict(peak_od=-1.0), dict(n_teeth=30)],
)
def test_invalid_comb(kw):
    with pytest.raises(ConfigError):
        comb(**kw)


def test_integrated_od_square_vs_gaussian():
    g = build_feature(comb(pit_width=0.0))
    sq = build_feature(comb(pit_width=0.0, tooth_shape=ToothShape.SQUARE))
    assert trapezoid(sq.alpha, sq.grid) == pytest.approx(trapezoid(g.alpha, g.grid), rel=0.10)


def test_lorentzian_area_ratio():
    # same peak and FWHM: Lorentzian area is pi/2 against sqrt(pi / 4 ln2) for a Gaussian
    g = comb(tooth_shape=ToothShape.GAUSSIAN)
    lo = comb(tooth_shape=ToothShape.LORENTZIAN)
    assert lo.mean_tooth_od / g.mean_tooth_od == pytest.approx((math.pi / 2) / math.sqrt(math.pi / (4 * math.log(2))))


def test_build_is_deterministic():
    a = build_feature(experimental_comb())
    b = build_feature(experimental_comb())
    assert a.alpha.tobytes() == b.alpha.tobytes()


@given(st.floats(0.1, 40.0), st.floats(1.5, 10.0), st.sampled_from(list(ToothShape)))
def test_effective_od_round_trip(d, finesse, shape):
    c = CombParams.from_effective_od(d, finesse, delta_m=TWO_PI * 5.5e6, n_teeth=10, tooth_shape=shape)
    assert c.effective_od == pytest.approx(d, rel=1e-12)


def test_mean_od_matches_quadrature():
    c = comb(pit_width=0.0)
    f = build_feature(c)
    n = 4096
    delta = (np.arange(n) + 0.5) / n * c.delta_m - c.delta_m / 2
    assert np.mean(f.alpha_at(delta) * f.length) == pytest.approx(c.mean_tooth_od, rel=1e-6)
