"""Gray-coded QAM mapping and the receiver-side quality metrics.

Conventions: constellations are normalized to unit mean power; QPSK maps
bits 00 to (1+1j)/sqrt(2); EVM is a percentage against the RMS of the
reference; the Q factor is the worst adjacent-level pair per quadrature,
reported in 20*log10 dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx

from .nyquist import SymbolStream

__all__ = [
    "Q_CAP_DB",
    "HD_FEC_BER_LIMIT",
    "Constellation",
    "EvmResult",
    "QFactorResult",
    "BerCount",
    "MetricsReport",
    "qam_map",
    "qam_demap",
    "decide_indices",
    "evm",
    "q_factor",
    "ber_estimate",
    "ber_estimate_log10",
    "log10_mean",
    "ber_count",
    "below_hdfec_limit",
    "format_metrics_table",
]

Q_CAP_DB = 60.0
HD_FEC_BER_LIMIT = 4.5e-3

# per-axis Gray code for ascending amplitude levels (MSB-half of the symbol
# bits is the in-phase code); bit value 0 maps to the most positive level
_AXIS_CODES = {2: (1, 0), 4: (2, 3, 1, 0)}
_AXIS_LEVELS = {2: (-1.0, 1.0), 4: (-3.0, -1.0, 1.0, 3.0)}


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square Gray-coded QAM constellation of order 4 or 16."""

    order: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.complex128).copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, order: int) -> "Constellation":
        if order not in (4, 16):
            raise ValueError(f"unsupported constellation order {order}")
        side = int(round(math.sqrt(order)))
        levels = _AXIS_LEVELS[side]
        codes = _AXIS_CODES[side]
        level_by_code = {c: lv for c, lv in zip(codes, levels)}
        norm = math.sqrt(2.0 * np.mean(np.square(levels)))
        bits_axis = side.bit_length() - 1
        pts = np.empty(order, dtype=np.complex128)
        for v in range(order):
            ci = v >> bits_axis
            cq = v & (side - 1)
            pts[v] = (level_by_code[ci] + 1j * level_by_code[cq]) / norm
        return cls(order, pts)

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    @property
    def _side(self) -> int:
        return int(round(math.sqrt(self.order)))

    @property
    def _axis_levels(self) -> np.ndarray:
        side = self._side
        norm = math.sqrt(2.0 * np.mean(np.square(_AXIS_LEVELS[side])))
        return np.asarray(_AXIS_LEVELS[side]) / norm


def qpsk() -> Constellation:
    return Constellation.of(4)


def qam16() -> Constellation:
    return Constellation.of(16)


def _as_symbols(x) -> np.ndarray:
    if isinstance(x, SymbolStream):
        return x.symbols
    return np.asarray(x, dtype=np.complex128)


def qam_map(bits, constellation: Constellation,
            symbol_rate: float = 1.0) -> SymbolStream:
    """Map a 0/1 bit array onto constellation symbols (MSB first)."""
    bits = np.asarray(bits)
    bps = constellation.bits_per_symbol
    if bits.ndim != 1 or bits.size == 0 or bits.size % bps:
        raise ValueError(f"bit count must be a positive multiple of {bps}")
    if not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    weights = 1 << np.arange(bps - 1, -1, -1)
    values = bits.reshape(-1, bps) @ weights
    return SymbolStream(constellation.points[values], symbol_rate)


def decide_indices(symbols, constellation: Constellation) -> np.ndarray:
    """Nearest-point decision, returned as symbol values (bit patterns)."""
    syms = _as_symbols(symbols)
    levels = constellation._axis_levels
    side = constellation._side
    codes = np.asarray(_AXIS_CODES[side])
    thresholds = 0.5 * (levels[1:] + levels[:-1])
    ci = codes[np.searchsorted(thresholds, syms.real)]
    cq = codes[np.searchsorted(thresholds, syms.imag)]
    bits_axis = side.bit_length() - 1
    return (ci << bits_axis) | cq


def qam_demap(symbols, constellation: Constellation) -> np.ndarray:
    """Minimum-distance demapping back to bits (inverse of :func:`qam_map`)."""
    values = decide_indices(symbols, constellation)
    bps = constellation.bits_per_symbol
    shifts = np.arange(bps - 1, -1, -1)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


@dataclass(frozen=True)
class EvmResult:
    """EVM in percent with the spread over contiguous blocks."""

    percent: float
    std_percent: float
    block_percents: tuple[float, ...]


def evm(rx, ref, n_blocks: int = 10) -> EvmResult:
    """Error vector magnitude, 100 * rms(rx - ref) / rms(ref).

    The +/- spread is the sample standard deviation over ``n_blocks``
    contiguous blocks.
    """
    rx = _as_symbols(rx)
    ref = _as_symbols(ref)
    if rx.shape != ref.shape:
        raise ValueError("rx and ref must have the same length")
    ref_rms = np.sqrt(np.mean(np.abs(ref) ** 2))
    if ref_rms == 0.0:
        raise ValueError("reference symbols are all zero")

    def one(rx_b, ref_b):
        return 100.0 * np.sqrt(np.mean(np.abs(rx_b - ref_b) ** 2)) / ref_rms

    total = one(rx, ref)
    n_blocks = max(1, min(n_blocks, rx.size))
    blocks = [
        one(r, f)
        for r, f in zip(np.array_split(rx, n_blocks), np.array_split(ref, n_blocks))
    ]
    std = float(np.std(blocks, ddof=1)) if len(blocks) > 1 else 0.0
    return EvmResult(float(total), std, tuple(float(b) for b in blocks))


@dataclass(frozen=True)
class QFactorResult:
    """Worst adjacent-pair Q per quadrature, in dB, with block spread.

    ``capped_*`` marks quadratures whose Q exceeded the reporting cap
    (effectively noiseless data).
    """

    q_i_db: float
    q_q_db: float
    q_i_linear: float
    q_q_linear: float
    q_i_std_db: float
    q_q_std_db: float
    capped_i: bool
    capped_q: bool


def _axis_q_linear(rx_axis: np.ndarray, ref_axis: np.ndarray) -> float:
    levels = np.unique(ref_axis)
    if levels.size < 2:
        raise ValueError("need at least 2 occupied levels per quadrature")
    mu, sigma = [], []
    for lv in levels:
        cluster = rx_axis[ref_axis == lv]
        mu.append(float(np.mean(cluster)))
        sigma.append(float(np.std(cluster)))
    worst = math.inf
    for i in range(len(levels) - 1):
        denom = sigma[i] + sigma[i + 1]
        q = math.inf if denom == 0.0 else (mu[i + 1] - mu[i]) / denom
        worst = min(worst, q)
    return worst


def _to_db(q_linear: float) -> tuple[float, float, bool]:
    cap_linear = 10.0 ** (Q_CAP_DB / 20.0)
    if not math.isfinite(q_linear) or q_linear >= cap_linear:
        return Q_CAP_DB, cap_linear, True
    if q_linear <= 0.0:
        raise ValueError("measured Q is not positive; clusters overlap entirely")
    return 20.0 * math.log10(q_linear), q_linear, False


def q_factor(rx, ref, n_blocks: int = 10) -> QFactorResult:
    """Decision-threshold Q factor per quadrature.

    Clusters are formed from the reference (data-aided), the Q of every
    adjacent level pair is (mu1 - mu0)/(sigma1 + sigma0), and the minimum
    pair is reported.  Values above ``Q_CAP_DB`` are capped and flagged.
    """
    rx = _as_symbols(rx)
    ref = _as_symbols(ref)
    if rx.shape != ref.shape:
        raise ValueError("rx and ref must have the same length")

    out = {}
    for name, rx_ax, ref_ax in (("i", rx.real, ref.real), ("q", rx.imag, ref.imag)):
        db, lin, capped = _to_db(_axis_q_linear(rx_ax, ref_ax))
        blocks = []
        n_b = max(1, min(n_blocks, rx_ax.size))
        for r_b, f_b in zip(np.array_split(rx_ax, n_b), np.array_split(ref_ax, n_b)):
            try:
                b_db, _, _ = _to_db(_axis_q_linear(r_b, f_b))
            except ValueError:
                continue
            blocks.append(b_db)
        std = float(np.std(blocks, ddof=1)) if len(blocks) > 1 else 0.0
        out[name] = (db, lin, std, capped)

    return QFactorResult(
        q_i_db=out["i"][0], q_q_db=out["q"][0],
        q_i_linear=out["i"][1], q_q_linear=out["q"][1],
        q_i_std_db=out["i"][2], q_q_std_db=out["q"][2],
        capped_i=out["i"][3], capped_q=out["q"][3],
    )


def ber_estimate(q_linear: float) -> float:
    """BER predicted from a linear Q factor, 0.5 * erfc(q / sqrt(2))."""
    if not q_linear > 0:
        raise ValueError("q_linear must be positive")
    return 0.5 * math.erfc(q_linear / math.sqrt(2.0))


def ber_estimate_log10(q_linear: float) -> float:
    """log10 of :func:`ber_estimate`, stable far below float underflow."""
    if not q_linear > 0:
        raise ValueError("q_linear must be positive")
    x = q_linear / math.sqrt(2.0)
    return math.log10(0.5) + math.log10(float(erfcx(x))) - x * x * math.log10(math.e)


def log10_mean(*log10_values: float) -> float:
    """log10 of the arithmetic mean of values given as log10."""
    m = max(log10_values)
    if math.isinf(m):
        return m
    acc = sum(10.0 ** (v - m) for v in log10_values)
    return m + math.log10(acc / len(log10_values))


@dataclass(frozen=True)
class BerCount:
    """Counted bit errors; keeps n so 'zero errors in n bits' stays meaningful."""

    errors: int
    n_bits: int

    def __post_init__(self):
        if self.n_bits <= 0:
            raise ValueError("n_bits must be positive")
        if not 0 <= self.errors <= self.n_bits:
            raise ValueError("errors must lie in [0, n_bits]")

    @property
    def rate(self) -> float:
        return self.errors / self.n_bits

    def __str__(self) -> str:
        if self.errors == 0:
            return f"0 errors in {self.n_bits} bits"
        return f"{self.errors} errors in {self.n_bits} bits (BER {self.rate:.3e})"


def ber_count(tx_bits, rx_bits) -> BerCount:
    """Count bit errors between transmitted and received bit arrays."""
    tx = np.asarray(tx_bits)
    rx = np.asarray(rx_bits)
    if tx.shape != rx.shape or tx.ndim != 1:
        raise ValueError("bit arrays must be 1-D and the same length")
    return BerCount(int(np.count_nonzero(tx != rx)), int(tx.size))


def below_hdfec_limit(ber: float) -> bool:
    """True when a BER is at or below the hard-decision FEC limit 4.5e-3."""
    return ber <= HD_FEC_BER_LIMIT


@dataclass(frozen=True)
class MetricsReport:
    """One branch's quality summary, serializable and table-printable."""

    label: str
    modulation: str
    distance_km: float
    osnr_db: float
    n_symbols: int
    n_bits: int
    evm_percent: float
    evm_std_percent: float
    q_i_db: float
    q_q_db: float
    q_i_std_db: float
    q_q_std_db: float
    q_capped: bool
    ber_estimated: float
    ber_estimated_log10: float
    ber_count_errors: int
    ber_counted: float
    below_hdfec: bool
    seed: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def format_metrics_table(reports: list[MetricsReport]) -> str:
    """Fixed-width per-branch summary table."""
    head = (f"{'branch':<16} {'format':<7} {'km':>6} {'Q_I_dB':>16} "
            f"{'Q_Q_dB':>16} {'EVM_%':>16} {'BER_est':>10} {'BER_cnt':>10}")
    rows = [head, "-" * len(head)]
    for r in reports:
        qi = f"{r.q_i_db:.2f}+/-{r.q_i_std_db:.2f}"
        qq = f"{r.q_q_db:.2f}+/-{r.q_q_std_db:.2f}"
        if r.q_capped:
            qi = f">{qi}"
            qq = f">{qq}"
        ev = f"{r.evm_percent:.2f}+/-{r.evm_std_percent:.2f}"
        rows.append(
            f"{r.label:<16} {r.modulation:<7} {r.distance_km:>6.1f} {qi:>16} "
            f"{qq:>16} {ev:>16} {r.ber_estimated:>10.2e} {r.ber_counted:>10.2e}"
        )
    return "\n".join(rows)
