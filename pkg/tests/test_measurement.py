import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from afcxpm import measurement as ms
from afcxpm.errors import ConfigError, FitError, InversionError
from afcxpm.material import TWO_PI
from afcxpm.xpm import TimeBin, TimeBinState

import oracles

NOISELESS = ms.ReadoutModel(noise=ms.NoiseModel.noiseless())
D100 = TWO_PI * 100e6


def test_intensity_examples():
    m = ms.ReadoutModel(visibility=0.897)
    assert ms.intensity_from_phase(m, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert ms.intensity_from_phase(m, 0.077) == pytest.approx(0.931, abs=5e-4)
    assert ms.intensity_from_phase(m, 0.077) == pytest.approx(oracles.readout_intensity(0.077, 0.897), rel=1e-14)


def test_zero_visibility_cannot_invert():
    m = ms.ReadoutModel(visibility=0.0)
    assert ms.intensity_from_phase(m, 0.3) == ms.intensity_from_phase(m, -0.3)
    with pytest.raises(InversionError):
        ms.phase_from_intensity(m, 1.0)


def test_out_of_fringe_intensity():
    with pytest.raises(InversionError):
        ms.phase_from_intensity(NOISELESS, 3.0)


@given(st.floats(-1.5, 1.5), st.floats(0.05, 1.0))
def test_noiseless_inversion(phi, v):
    m = ms.ReadoutModel(visibility=v, noise=ms.NoiseModel.noiseless())
    assert float(ms.phase_from_intensity(m, ms.intensity_from_phase(m, phi))) == pytest.approx(phi, abs=1e-9)


def test_noiseless_experiment_exact():
    res = ms.run_experiment(0.05, 20, NOISELESS)
    assert res.mean_phase == pytest.approx(0.05, abs=1e-14)
    assert res.std_of_mean == 0.0


def test_correlation_from_weight():
    nm = ms.NoiseModel()
    assert nm.correlation == pytest.approx(oracles.reference_correlation(0.15, 0.1, 0.75), rel=1e-14)


def test_unreachable_residual():
    with pytest.raises(ConfigError, match="reference_residual_sigma"):
        ms.NoiseModel(reference_residual_sigma=0.5, reference_correlation_weight=0.1)


@pytest.mark.parametrize("kw", [dict(shot_to_shot_sigma=-0.1), dict(detector_sigma=math.nan), dict(seed=-1)])
def test_invalid_noise(kw):
    with pytest.raises(ConfigError):
        ms.NoiseModel(**kw)


def test_residual_sigma_realized():
    m = ms.ReadoutModel(noise=ms.NoiseModel(detector_sigma=0.0, seed=5))
    per_rep = ms.trial_means(0.0, 1, 20000, m)
    assert per_rep.std() == pytest.approx(0.100, rel=0.03)


def test_quoted_resolution_at_200_reps():
    m = ms.ReadoutModel(noise=ms.NoiseModel(detector_sigma=0.0, seed=11))
    sem = ms.trial_means(0.0, 200, 1000, m).std(ddof=1)
    assert sem == pytest.approx(0.00707, rel=0.15)


def test_j1_vs_j100_ratio():
    m = ms.ReadoutModel(noise=ms.NoiseModel(seed=2))
    a = ms.trial_means(0.0, 1, 1000, m).std(ddof=1)
    b = ms.trial_means(0.0, 100, 1000, m).std(ddof=1)
    assert a / b == pytest.approx(10, rel=0.2)


def test_scaling_exponent():
    m = ms.ReadoutModel(noise=ms.NoiseModel(seed=4))
    _, slope = ms.std_of_mean_scaling([1, 10, 100, 1000], 1000, m)
    assert slope == pytest.approx(-0.5, abs=0.05)


def test_seed_determinism_and_replay():
    m = ms.ReadoutModel(noise=ms.NoiseModel(seed=9))
    a = ms.run_experiment(0.07, 50, m, run=3, keep_records=True)
    b = ms.run_experiment(0.07, 50, m, run=3, keep_records=True)
    assert a.records == b.records
    rec = ms.replay_record(m, 0.07, 50, 9, 3, 17)
    assert rec == a.records[17]
    c = ms.run_experiment(0.07, 50, m, run=4)
    assert c.mean_phase != a.mean_phase


def test_rows_independent_of_batch():
    m = ms.ReadoutModel(noise=ms.NoiseModel(seed=1))
    batch = ms.trial_means(0.0, 30, 8, m)
    alone = ms.run_experiment(0.0, 30, m, run=5)
    assert batch[5] == alone.mean_phase


def test_sweep_noiseless_exact(tm):
    rows = ms.detuning_sweep([D100, -D100], ms.DEFAULT_PHOTON_LEVELS, 5, NOISELESS, tm)
    assert rows[0].slope == pytest.approx(1.1220709992063549e-09, rel=1e-12)
    assert rows[0].slope + rows[1].slope == pytest.approx(0.0, abs=1e-12 * rows[0].slope)


def test_sweep_needs_three_levels(tm):
    with pytest.raises(ConfigError):
        ms.detuning_sweep([D100], [0, 1e7], 5, NOISELESS, tm)


def test_degenerate_fit():
    with pytest.raises(FitError):
        ms.linear_fit([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])


def test_fit_recovers_line():
    x = np.arange(5.0)
    fit = ms.linear_fit(x, 2 * x + 1)
    assert fit.slope == pytest.approx(2)
    assert fit.intercept == pytest.approx(1)


@pytest.mark.parametrize(
    "state,expected",
    [("early", 0.0), ("late", 0.0), ("plus", (1 - 0.897) / 2), ("minus", (1 - 0.897) / 2)],
)
def test_error_rates(state, expected):
    st_ = TimeBinState(state)
    assert ms.qubit_error_rates(st_, False) == pytest.approx(expected, abs=1e-15)
    assert ms.qubit_error_rates(st_, True, zeta_l=0.3) - ms.qubit_error_rates(st_, False) == 0.0


def test_mismatched_analyzer():
    with pytest.raises(ConfigError):
        ms.qubit_error_rates(TimeBinState("plus"), False, analyzer="time_of_arrival")
    with pytest.raises(ConfigError):
        ms.qubit_error_rates(TimeBinState("early"), False, analyzer=ms.Analyzer.INTERFEROMETER)


def test_late_background_raises_early_error():
    an = ms.QubitAnalysis(late_background=0.02)
    on = ms.qubit_error_rates(TimeBinState("early"), True, analysis=an)
    assert on == pytest.approx(0.02 / 1.02)
    assert ms.qubit_error_rates(TimeBinState("early"), False, analysis=an) == 0.0


@given(st.sampled_from(list(TimeBin)), st.floats(0, 20), st.floats(0, 1))
def test_loss_cancels(label, zeta, v):
    an = ms.QubitAnalysis(visibility=v)
    st_ = TimeBinState(label)
    assert ms.qubit_error_rates(st_, True, zeta, analysis=an) == pytest.approx(
        ms.qubit_error_rates(st_, False, analysis=an), abs=1e-15
    )


def test_time_bin_rows(tm):
    m = ms.ReadoutModel(noise=ms.NoiseModel(seed=0))
    rows = ms.time_bin_phase_experiment(6.9e7, D100, 200, m, tm)
    signal = [r for r in rows if r.state != "none"]
    assert len({r.phase_true for r in signal}) == 1
    assert len({r.phase_mean for r in signal}) == 1
    assert signal[0].phase_true == pytest.approx(0.077, rel=0.01)
