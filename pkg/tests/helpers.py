"""Shared oracles for the test suite.

Everything here is deliberately independent of the package internals:
closed-form kernels evaluated point by point, direct O(n*m) sums instead of
FFTs, and scipy special functions.  Tests compare the fast implementations
against these.
"""

from __future__ import annotations

import math

import numpy as np

from nyquist_otdm import ChannelPlan, Signal, TimeGrid
from nyquist_otdm.nyquist import SymbolStream


def periodic_sinc_kernel(x, m: int):
    """Interpolation kernel of ``m`` equispaced samples, evaluated at ``x``
    sample periods from the peak.

    Closed forms: sin(pi x)/(m sin(pi x/m)) for odd m, with the tangent
    variant for even m (the symmetric handling of the half-rate term).
    """
    x = np.asarray(x, dtype=float)
    rem = np.remainder(x, m)
    at_peak = np.isclose(rem, 0.0) | np.isclose(rem, float(m))
    xs = np.where(at_peak, 0.25, x)  # dodge 0/0; value replaced below
    if m % 2:
        vals = np.sin(np.pi * xs) / (m * np.sin(np.pi * xs / m))
    else:
        vals = np.sin(np.pi * xs) / (m * np.tan(np.pi * xs / m))
    out = np.where(at_peak, 1.0, vals)
    return out if out.ndim else float(out)


def interpolate_directly(stream: SymbolStream, grid: TimeGrid,
                         t_offset: float = 0.0) -> np.ndarray:
    """Direct sum of kernel translates; O(n_samples * n_symbols)."""
    m = len(stream)
    rate = stream.symbol_rate
    x = (grid.t - t_offset) * rate  # in symbol periods
    out = np.zeros(grid.n_samples, dtype=complex)
    for k, sym in enumerate(stream.symbols):
        out += sym * periodic_sinc_kernel(x - k, m)
    return out


def sequence_directly(n_lines: int, bandwidth: float, t,
                      time_shift: float = 0.0):
    """Sinc-sequence by the cosine sum, one term at a time."""
    t = np.asarray(t, dtype=float)
    acc = np.ones_like(t)
    for order in range(1, (n_lines - 1) // 2 + 1):
        acc = acc + 2.0 * np.cos(2 * np.pi * order * bandwidth *
                                 (t - time_shift) / n_lines)
    return acc / n_lines


def random_streams(plan: ChannelPlan, n_symbols: int, rng,
                   constellation=None) -> list[SymbolStream]:
    """One random stream per branch; Gaussian symbols unless a
    constellation's points are given."""
    streams = []
    for _ in range(plan.n_branches):
        if constellation is None:
            syms = rng.standard_normal(n_symbols) + 1j * rng.standard_normal(
                n_symbols)
        else:
            syms = rng.choice(constellation, size=n_symbols)
        streams.append(SymbolStream(syms, plan.symbol_rate))
    return streams


def grid_for(plan: ChannelPlan, n_symbols: int,
             oversampling: int = 8) -> TimeGrid:
    """Smallest grid holding ``n_symbols`` per branch at the usual rate."""
    sample_rate = oversampling * plan.aggregate_bandwidth
    n = sample_rate * n_symbols / plan.symbol_rate
    return TimeGrid(sample_rate, int(round(n)))


def symbol_instant_energy(sig: Signal, plan: ChannelPlan, branch: int,
                          n_symbols: int) -> float:
    """Mean squared magnitude at one branch's symbol instants."""
    bp = plan.for_branch(branch)
    ks = np.arange(n_symbols)
    instants = bp.time_offset + ks / plan.symbol_rate
    idx = np.round((instants - sig.grid.t0) * sig.grid.sample_rate).astype(int)
    return float(np.mean(np.abs(sig.samples[idx]) ** 2))
