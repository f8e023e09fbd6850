"""Tests for fiber propagation, noise loading, and coherent detection."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nyquist_otdm import ChannelPlan, TimeGrid
from nyquist_otdm.core import constant, tone
from nyquist_otdm.demux import demultiplex, recover_symbols
from nyquist_otdm.link import (
    FiberSpec,
    NoiseSpec,
    add_noise,
    coherent_detect,
    compensate_dispersion,
    dispersion_phase,
    phase_noise,
    propagate,
)
from nyquist_otdm.nyquist import otdm_multiplex

from helpers import grid_for, random_streams

# pi * (1550 nm)^2 / c * 17 ps/(nm km) * 30 km * (10 GHz)^2, checked against
# an independent hand evaluation of the closed form
DISPERSION_30KM_10GHZ = 1.2839932546359234


def test_dispersion_phase_reference_value():
    fiber = FiberSpec(length_km=30.0)
    assert float(dispersion_phase(fiber, 10e9)) == pytest.approx(
        DISPERSION_30KM_10GHZ, rel=1e-12)


def test_dispersion_phase_shape():
    fiber = FiberSpec(length_km=10.0)
    f = np.array([-5e9, 0.0, 5e9])
    ph = dispersion_phase(fiber, f)
    assert ph[0] == ph[2]  # even in frequency
    assert ph[1] == 0.0
    # quadratic: quadruples when frequency doubles
    assert float(dispersion_phase(fiber, 10e9)) == pytest.approx(
        4 * float(dispersion_phase(fiber, 5e9)), rel=1e-12)
    # linear in length
    assert float(dispersion_phase(FiberSpec(20.0), 5e9)) == pytest.approx(
        2 * float(dispersion_phase(FiberSpec(10.0), 5e9)), rel=1e-12)


def test_propagate_tone_gets_analytic_phase_and_loss():
    grid = TimeGrid(64e9, 256)
    fiber = FiberSpec(length_km=30.0, attenuation_db_km=0.2)
    sig = tone(grid, 8e9)
    out = propagate(sig, fiber)
    expect = (10 ** (-0.2 * 30 / 20)
              * np.exp(1j * float(dispersion_phase(fiber, 8e9)))
              * sig.samples)
    assert_allclose(out.samples, expect, atol=1e-12)


def test_compensate_inverts_dispersion_exactly():
    plan = ChannelPlan(3, 24e9)
    rng = np.random.default_rng(21)
    grid = grid_for(plan, 11)
    agg = otdm_multiplex(random_streams(plan, 11, rng), plan, grid)
    lossless = FiberSpec(length_km=30.0, attenuation_db_km=0.0)
    back = compensate_dispersion(propagate(agg, lossless), lossless)
    assert_allclose(back.samples, agg.samples, atol=1e-10)


def test_attenuation_is_scalar_power_loss():
    grid = TimeGrid(64e9, 128)
    fiber = FiberSpec(length_km=10.0, dispersion_ps_nm_km=0.0,
                      attenuation_db_km=0.2)
    out = propagate(constant(grid), fiber)
    assert out.power == pytest.approx(10 ** (-2.0 / 10), rel=1e-12)


def test_fiber_spec_validation():
    with pytest.raises(ValueError):
        FiberSpec(length_km=-1.0)
    with pytest.raises(ValueError):
        FiberSpec(length_km=1.0, attenuation_db_km=-0.1)
    with pytest.raises(ValueError):
        FiberSpec(length_km=1.0, reference_wavelength_nm=0.0)


class TestNoise:
    def test_variance_matches_osnr_target(self):
        grid = TimeGrid(100e9, 1 << 16)
        sig = constant(grid)
        osnr_db = 20.0
        out = add_noise(sig, NoiseSpec(osnr_db, seed=3))
        noise_power = np.mean(np.abs(out.samples - sig.samples) ** 2)
        expect = 1.0 * grid.sample_rate / (12.5e9 * 10 ** (osnr_db / 10))
        assert noise_power == pytest.approx(expect, rel=0.02)

    def test_seed_reproducibility(self):
        grid = TimeGrid(50e9, 1024)
        sig = constant(grid)
        a = add_noise(sig, NoiseSpec(25.0, seed=7))
        b = add_noise(sig, NoiseSpec(25.0, seed=7))
        c = add_noise(sig, NoiseSpec(25.0, seed=8))
        assert np.array_equal(a.samples, b.samples)
        assert not np.array_equal(a.samples, c.samples)

    def test_infinite_osnr_is_a_passthrough(self):
        grid = TimeGrid(50e9, 64)
        sig = constant(grid)
        out = add_noise(sig, NoiseSpec(math.inf))
        assert np.array_equal(out.samples, sig.samples)

    def test_zero_signal_rejected(self):
        grid = TimeGrid(50e9, 64)
        with pytest.raises(ValueError):
            add_noise(constant(grid, 0.0), NoiseSpec(20.0))


class TestCoherentDetect:
    def test_scaling_and_phase(self):
        grid = TimeGrid(50e9, 64)
        sig = constant(grid, 1.0 + 1.0j)
        out = coherent_detect(sig, lo_power=4.0, lo_phase=math.pi / 2)
        assert_allclose(out.samples,
                        2.0 * np.exp(-1j * math.pi / 2) * sig.samples,
                        atol=1e-15)

    def test_rejects_nonpositive_lo(self):
        grid = TimeGrid(50e9, 64)
        with pytest.raises(ValueError):
            coherent_detect(constant(grid), lo_power=0.0)


class TestPhaseNoise:
    def test_zero_linewidth_passthrough(self):
        grid = TimeGrid(50e9, 64)
        sig = constant(grid)
        out = phase_noise(sig, 0.0)
        assert np.array_equal(out.samples, sig.samples)

    def test_wiener_variance_growth(self):
        """Phase variance after time T approaches 2*pi*linewidth*T."""
        grid = TimeGrid(10e9, 2000)
        lw = 1e6
        finals = []
        for seed in range(400):
            out = phase_noise(constant(grid), lw, seed=seed)
            finals.append(np.angle(out.samples[-1]))
        t_final = (grid.n_samples - 1) * grid.dt
        assert np.var(finals) == pytest.approx(2 * math.pi * lw * t_final,
                                               rel=0.15)

    def test_magnitude_preserved(self):
        grid = TimeGrid(10e9, 256)
        out = phase_noise(constant(grid, 2.0), 1e6, seed=1)
        assert_allclose(np.abs(out.samples), 2.0, atol=1e-12)

    def test_negative_linewidth_rejected(self):
        grid = TimeGrid(10e9, 16)
        with pytest.raises(ValueError):
            phase_noise(constant(grid), -1.0)


def _mean_branch_error(agg, plan, streams, n_symbols):
    errs = []
    for l, stream in enumerate(streams, start=1):
        bp = plan.for_branch(l)
        got = recover_symbols(demultiplex(agg, bp), bp, n_symbols=n_symbols)
        # data-aided one-tap equalizer, as a coherent receiver would apply
        g = np.vdot(got.symbols, stream.symbols) / np.vdot(got.symbols,
                                                           got.symbols)
        errs.append(np.sqrt(np.mean(np.abs(g * got.symbols - stream.symbols) ** 2)))
    return float(np.mean(errs))


def test_dispersion_hurts_and_compensation_restores():
    plan = ChannelPlan(3, 24e9)
    rng = np.random.default_rng(33)
    n_symbols = 33
    grid = grid_for(plan, n_symbols)
    streams = random_streams(plan, n_symbols, rng)
    agg = otdm_multiplex(streams, plan, grid)
    fiber = FiberSpec(length_km=30.0, attenuation_db_km=0.0)

    one_span = propagate(agg, fiber)
    two_spans = propagate(one_span, fiber)
    fixed = compensate_dispersion(one_span, fiber)

    e_fixed = _mean_branch_error(fixed, plan, streams, n_symbols)
    e_one = _mean_branch_error(one_span, plan, streams, n_symbols)
    e_two = _mean_branch_error(two_spans, plan, streams, n_symbols)
    assert e_fixed < 1e-9
    assert e_fixed < e_one < e_two
