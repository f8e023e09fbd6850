"""Branch demultiplexing by sinc-sequence sampling and baseband filtering.

A branch is recovered by multiplying the aggregate signal with the branch's
sampling pulse train (either an ideal sinc sequence or a calibrated MZM
driven at the branch RF phase), low-pass filtering to half the branch rate,
and restoring the 1/N sampling gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import ChannelPlan, Signal, brickwall_lowpass, delay_signal
from .mzm import DrivePlan, FlatCombCalibration, MzmParams, modulate
from .nyquist import SincSequenceSpec, SymbolStream, sample_symbols, sinc_sequence

__all__ = [
    "ChannelPlan",
    "MzmSampler",
    "branch_phase",
    "shift_plan_for_branch",
    "sample_with_sequence",
    "demultiplex",
    "recover_symbols",
]


def branch_phase(plan: ChannelPlan) -> float:
    """Relative RF phase selecting the plan's branch: 2*pi*(branch-1)/N."""
    return 2.0 * math.pi * (plan.branch - 1) / plan.n_branches


@dataclass(frozen=True)
class MzmSampler:
    """Sampling-pulse source backed by a calibrated MZM drive.

    ``gain`` references the modulator output back to the unit-peak ideal
    sequence; build instances via :meth:`from_calibration` so the flag and
    gain come from an actual calibration run.
    """

    drive_plan: DrivePlan
    params: MzmParams
    gain: complex = 1.0 + 0.0j
    calibrated: bool = False

    @classmethod
    def from_calibration(cls, cal: FlatCombCalibration) -> "MzmSampler":
        return cls(drive_plan=cal.plan, params=cal.params, gain=cal.gain,
                   calibrated=cal.converged)


def shift_plan_for_branch(drive_plan: DrivePlan, spacing: float,
                          rf_phase: float) -> DrivePlan:
    """Shift every drive tone by its harmonic order times ``rf_phase``.

    Subtracting k times the branch phase from the harmonic-k tone delays the
    sampling pulse train by rf_phase/(2*pi*spacing), i.e. by (branch-1)/B for
    the branch phases of :func:`branch_phase`.
    """
    if rf_phase == 0.0:
        return drive_plan
    tones = []
    for t in drive_plan.tones:
        k = round(t.frequency / spacing)
        if abs(t.frequency - k * spacing) > 1e-6 * spacing:
            raise ValueError(
                f"tone at {t.frequency:g} Hz is not a harmonic of the "
                f"spacing {spacing:g} Hz"
            )
        tones.append(replace(t, phase_arm1=t.phase_arm1 - k * rf_phase,
                             phase_arm2=t.phase_arm2 - k * rf_phase))
    return DrivePlan(tuple(tones), drive_plan.bias_arm1, drive_plan.bias_arm2)


def sample_with_sequence(sig: Signal, plan: ChannelPlan,
                         sampler: str | MzmSampler = "ideal") -> Signal:
    """Multiply the signal by the branch's sampling pulse train.

    ``sampler="ideal"`` uses the exact sinc sequence; an :class:`MzmSampler`
    drives the modulator model at the branch RF phase and divides out the
    calibration gain, agreeing with the ideal mode to within the calibrated
    comb's waveform error.
    """
    if isinstance(sampler, str):
        if sampler != "ideal":
            raise ValueError(f"unknown sampler {sampler!r}")
        seq = sinc_sequence(
            SincSequenceSpec(plan.n_branches, plan.aggregate_bandwidth,
                             time_shift=plan.time_offset),
            sig.grid,
        )
        return Signal(sig.grid, sig.samples * seq.samples)
    if not isinstance(sampler, MzmSampler):
        raise TypeError("sampler must be 'ideal' or an MzmSampler")
    if not sampler.calibrated:
        raise ValueError("MZM sampling requires a calibrated drive plan")
    drive = shift_plan_for_branch(sampler.drive_plan, plan.symbol_rate,
                                  branch_phase(plan))
    out = modulate(sig, drive, sampler.params)
    return Signal(sig.grid, out.samples * sampler.gain)


def demultiplex(sig: Signal, plan: ChannelPlan,
                sampler: str | MzmSampler = "ideal",
                timing_delay: float = 0.0) -> Signal:
    """Recover one branch's baseband signal from the aggregate.

    Sampling, brickwall low-pass at B/(2N), and the factor N restoring the
    1/N gain of sequence sampling.  ``timing_delay`` models a known receiver
    clock offset and is removed before the sampling multiplication, where it
    still matters — the sequence zeros must land between the wanted symbols.

    Note on periodic windows: a branch carrying an even number of symbols
    per window has a discrete line exactly on the filter edge at B/(2N),
    and the edge fold makes its recovery inexact (a small error that
    alternates sign symbol to symbol).  Use an odd symbol count per branch
    when bit-exact recovery matters; with continuous spectra (noise, roll-off
    shaping) the effect is irrelevant.
    """
    if timing_delay:
        sig = delay_signal(sig, -timing_delay)
    sampled = sample_with_sequence(sig, plan, sampler)
    filtered = brickwall_lowpass(sampled, plan.detection_half_width)
    return Signal(sig.grid, plan.n_branches * filtered.samples)


def recover_symbols(sig: Signal, plan: ChannelPlan,
                    n_symbols: int | None = None) -> SymbolStream:
    """Sample a demultiplexed branch at its symbol instants (k*N + l - 1)/B."""
    return sample_symbols(sig, plan.symbol_rate, t_offset=plan.time_offset,
                          n_symbols=n_symbols)
