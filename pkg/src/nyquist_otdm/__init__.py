"""Electrically sampled Nyquist-pulse optical time-division multiplexing.

Builds aggregate signals from periodic sinc-pulse sequences, generates the
matching flat three-line frequency combs with a dual-drive Mach-Zehnder
modulator, and demultiplexes single branches back out by modulation plus
narrow lowpass detection.  Includes a fiber/noise link model, QPSK and 16QAM
mapping with EVM/Q/BER metrics, and a JSON-driven scenario runner.
"""

from .core import (
    ChannelPlan,
    Signal,
    Spectrum,
    TimeGrid,
    brickwall_lowpass,
    delay_signal,
    inverse_spectrum,
    normalize,
    power_dbm,
    read_signal_csv,
    rmse_percent,
    spectrum,
    tone,
    write_signal_csv,
)
from .demux import MzmSampler, branch_phase, demultiplex, recover_symbols, \
    sample_with_sequence, shift_plan_for_branch
from .link import (
    SPEED_OF_LIGHT,
    FiberSpec,
    NoiseSpec,
    add_noise,
    coherent_detect,
    compensate_dispersion,
    dispersion_phase,
    phase_noise,
    propagate,
)
from .modem import (
    HD_FEC_BER_LIMIT,
    BerCount,
    Constellation,
    EvmResult,
    MetricsReport,
    QFactorResult,
    ber_count,
    ber_estimate,
    ber_estimate_log10,
    below_hdfec_limit,
    evm,
    format_metrics_table,
    q_factor,
    qam16,
    qam_demap,
    qam_map,
    qpsk,
)
from .mzm import (
    CombReport,
    DrivePlan,
    DriveTone,
    FlatCombCalibration,
    MzmParams,
    arm_amplitude,
    calibrate_flat_comb,
    comb_report,
    eo_response,
    format_comb_table,
    modulate,
    push_pull_plan,
)
from .nyquist import (
    SincSequenceSpec,
    SymbolStream,
    multiplex_branch_signals,
    nyquist_interpolate,
    otdm_multiplex,
    raised_cosine_shape,
    sample_symbols,
    sinc_sequence,
)
from .scenario import (
    ConfigError,
    ReportBundle,
    Scenario,
    parse_scenario,
    run_scenario,
    scenario_from_file,
    sweep,
    write_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "TimeGrid", "Signal", "Spectrum", "ChannelPlan", "spectrum",
    "inverse_spectrum", "brickwall_lowpass", "delay_signal", "tone",
    "normalize", "power_dbm", "rmse_percent", "write_signal_csv",
    "read_signal_csv",
    # nyquist
    "SincSequenceSpec", "SymbolStream", "sinc_sequence",
    "nyquist_interpolate", "raised_cosine_shape", "sample_symbols",
    "multiplex_branch_signals", "otdm_multiplex",
    # mzm
    "MzmParams", "DriveTone", "DrivePlan", "CombReport",
    "FlatCombCalibration", "arm_amplitude", "eo_response", "modulate",
    "push_pull_plan", "comb_report", "calibrate_flat_comb",
    "format_comb_table",
    # demux
    "MzmSampler", "branch_phase", "shift_plan_for_branch",
    "sample_with_sequence", "demultiplex", "recover_symbols",
    # link
    "SPEED_OF_LIGHT", "FiberSpec", "NoiseSpec", "propagate",
    "compensate_dispersion", "dispersion_phase", "add_noise",
    "coherent_detect", "phase_noise",
    # modem
    "Constellation", "qpsk", "qam16", "qam_map", "qam_demap", "evm",
    "EvmResult", "q_factor", "QFactorResult", "ber_estimate",
    "ber_estimate_log10", "ber_count", "BerCount", "below_hdfec_limit",
    "HD_FEC_BER_LIMIT", "MetricsReport", "format_metrics_table",
    # scenario
    "Scenario", "ConfigError", "parse_scenario", "scenario_from_file",
    "run_scenario", "sweep", "ReportBundle", "write_bundle",
]
