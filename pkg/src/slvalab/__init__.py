"""Convolutional-code + CRC laboratory under serial list Viterbi decoding."""

from .channel import ChannelConfig, add_noise, db_to_linear, linear_to_db, modulate, pairwise_error_prob, qfunc
from .convcode import ConvCode, FrameLayout, TrellisCode, build_trellis, conv_encode, conv_encode_batch
from .gf2 import BinaryPolynomial, CrcCode, crc_check, crc_encode, poly_divmod
from .slva import DecodeOutcome, ForwardPass, decode_frames, iter_best_paths, max_list_size, slva_decode, viterbi_forward
from .spectrum import DistanceSpectrum, SpectrumBudgetError, enumerate_spectrum, low_snr_limits, nna_nack, nna_ue, union_bound_nack, union_bound_ue
from .crcsearch import CrcCandidateReport, search_crc
from .capacity import CodedChannelModel, capacity_llb, capacity_nnlb, capacity_nnub, capacity_true, capacity_vs_list_size, estimate_true_row
from .benchmarks import ComplexityParams, ComplexityReport, DesignPoint, chebyshev_list_bound, complexity_report, design_sweep, finite_blocklength_benchmark, markov_list_bound, min_list_for_targets
from .harness import PointStats, SimConfig, SimRunner, run_point, tradeoff_curves, write_sweep_csv

__version__ = "0.1.0"

__all__ = [
    "BinaryPolynomial", "CrcCode", "crc_encode", "crc_check", "poly_divmod",
    "ConvCode", "TrellisCode", "FrameLayout", "build_trellis", "conv_encode", "conv_encode_batch",
    "ChannelConfig", "modulate", "add_noise", "qfunc", "pairwise_error_prob", "db_to_linear", "linear_to_db",
    "ForwardPass", "DecodeOutcome", "viterbi_forward", "slva_decode", "decode_frames", "iter_best_paths", "max_list_size",
    "DistanceSpectrum", "SpectrumBudgetError", "enumerate_spectrum", "union_bound_ue", "union_bound_nack", "nna_ue", "nna_nack", "low_snr_limits",
    "CrcCandidateReport", "search_crc",
    "CodedChannelModel", "estimate_true_row", "capacity_true", "capacity_llb", "capacity_nnlb", "capacity_nnub", "capacity_vs_list_size",
    "ComplexityParams", "ComplexityReport", "DesignPoint", "complexity_report", "markov_list_bound", "chebyshev_list_bound", "min_list_for_targets", "finite_blocklength_benchmark", "design_sweep",
    "SimConfig", "SimRunner", "PointStats", "run_point", "tradeoff_curves", "write_sweep_csv",
]
