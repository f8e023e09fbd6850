"""Tests for branch demultiplexing with ideal and MZM-based sampling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nyquist_otdm import ChannelPlan, Signal, TimeGrid, delay_signal
from nyquist_otdm.core import constant
from nyquist_otdm.demux import (
    MzmSampler,
    branch_phase,
    demultiplex,
    recover_symbols,
    sample_with_sequence,
    shift_plan_for_branch,
)
from nyquist_otdm.mzm import (
    MzmParams,
    calibrate_flat_comb,
    modulate,
    push_pull_plan,
)
from nyquist_otdm.nyquist import SymbolStream, otdm_multiplex

from helpers import grid_for, random_streams

PARAMS = MzmParams(v_pi=0.42, eo_3db_bandwidth=16e9)


def test_branch_phase_values():
    base = ChannelPlan(3, 24e9)
    assert branch_phase(base) == 0.0
    assert branch_phase(base.for_branch(2)) == pytest.approx(2 * math.pi / 3)
    assert branch_phase(base.for_branch(3)) == pytest.approx(4 * math.pi / 3)


def test_shift_plan_is_a_pure_time_shift():
    """Phase-shifting every harmonic by k*phi delays the whole transfer
    waveform by phi/(2*pi*spacing), bias terms included."""
    spacing = 8e9
    drive = push_pull_plan([spacing, 2 * spacing], [0.21, 0.04],
                           bias_difference=1.2)
    grid = TimeGrid(32 * spacing, 32 * 12)
    cw = constant(grid)
    for phi in (2 * math.pi / 3, 4 * math.pi / 3):
        shifted = modulate(cw, shift_plan_for_branch(drive, spacing, phi),
                           PARAMS)
        expected = delay_signal(modulate(cw, drive, PARAMS),
                                phi / (2 * math.pi * spacing))
        assert_allclose(shifted.samples, expected.samples, atol=1e-12)


def test_shift_plan_rejects_off_harmonic_tone():
    drive = push_pull_plan([7e9], [0.2], bias_difference=1.0)
    with pytest.raises(ValueError):
        shift_plan_for_branch(drive, 8e9, 1.0)


def test_ideal_round_trip_multiple_seeds():
    plan = ChannelPlan(3, 24e9)
    n_symbols = 17  # odd count per branch: exact recovery
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed)
        grid = grid_for(plan, n_symbols)
        streams = random_streams(plan, n_symbols, rng)
        agg = otdm_multiplex(streams, plan, grid)
        for l, stream in enumerate(streams, start=1):
            bp = plan.for_branch(l)
            branch = demultiplex(agg, bp)
            got = recover_symbols(branch, bp, n_symbols=n_symbols)
            assert_allclose(got.symbols, stream.symbols, atol=1e-9)


def _crosstalk_db(plan, sampler, n_symbols=15, seed=5):
    """Drive only branch 2; return worst leakage into branches 1 and 3."""
    rng = np.random.default_rng(seed)
    grid = grid_for(plan, n_symbols)
    streams = random_streams(plan, n_symbols, rng)
    quiet = SymbolStream(np.zeros(n_symbols, dtype=complex), plan.symbol_rate)
    driven = [quiet, streams[1], quiet]
    agg = otdm_multiplex(driven, plan, grid)
    ref_power = np.mean(np.abs(streams[1].symbols) ** 2)
    worst = -math.inf
    for l in (1, 3):
        bp = plan.for_branch(l)
        got = recover_symbols(demultiplex(agg, bp, sampler=sampler), bp,
                              n_symbols=n_symbols)
        leak = np.mean(np.abs(got.symbols) ** 2)
        if leak > 0:
            worst = max(worst, 10 * math.log10(leak / ref_power))
    return worst


def test_ideal_crosstalk_is_negligible():
    plan = ChannelPlan(3, 24e9)
    for seed in (5, 6, 7):
        assert _crosstalk_db(plan, "ideal", seed=seed) < -60.0


def test_mzm_sampler_crosstalk_better_than_40_db():
    plan = ChannelPlan(3, 24e9)
    cal = calibrate_flat_comb(3, plan.symbol_rate, PARAMS)
    sampler = MzmSampler.from_calibration(cal)
    assert sampler.calibrated
    for seed in (5, 6):
        assert _crosstalk_db(plan, sampler, seed=seed) < -40.0


def test_mzm_sampler_recovers_symbols_to_percent_level():
    plan = ChannelPlan(3, 24e9)
    cal = calibrate_flat_comb(3, plan.symbol_rate, PARAMS)
    sampler = MzmSampler.from_calibration(cal)
    rng = np.random.default_rng(9)
    n_symbols = 15
    grid = grid_for(plan, n_symbols)
    streams = random_streams(plan, n_symbols, rng)
    agg = otdm_multiplex(streams, plan, grid)
    for l, stream in enumerate(streams, start=1):
        bp = plan.for_branch(l)
        got = recover_symbols(demultiplex(agg, bp, sampler=sampler), bp,
                              n_symbols=n_symbols)
        err = np.sqrt(np.mean(np.abs(got.symbols - stream.symbols) ** 2)
                      / np.mean(np.abs(stream.symbols) ** 2))
        assert err < 0.05


def test_uncalibrated_mzm_sampler_rejected():
    plan = ChannelPlan(3, 24e9)
    drive = push_pull_plan([8e9], [0.2], bias_difference=1.0)
    sampler = MzmSampler(drive_plan=drive, params=PARAMS)
    grid = grid_for(plan, 9)
    sig = constant(grid)
    with pytest.raises(ValueError):
        sample_with_sequence(sig, plan, sampler)


def test_bad_sampler_types_rejected():
    plan = ChannelPlan(3, 24e9)
    sig = constant(grid_for(plan, 9))
    with pytest.raises(ValueError):
        sample_with_sequence(sig, plan, "brickwall")
    with pytest.raises(TypeError):
        sample_with_sequence(sig, plan, 42)


def test_known_timing_delay_is_removed():
    plan = ChannelPlan(3, 24e9)
    rng = np.random.default_rng(13)
    n_symbols = 11
    grid = grid_for(plan, n_symbols)
    streams = random_streams(plan, n_symbols, rng)
    agg = otdm_multiplex(streams, plan, grid)
    tau = 1.5 * grid.dt
    late = delay_signal(agg, tau)
    for l, stream in enumerate(streams, start=1):
        bp = plan.for_branch(l)
        branch = demultiplex(late, bp, timing_delay=tau)
        got = recover_symbols(branch, bp, n_symbols=n_symbols)
        assert_allclose(got.symbols, stream.symbols, atol=1e-9)
