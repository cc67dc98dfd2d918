"""Parking occupancy sensing, threshold selection and cruise-time display."""

from ._core import (
    InfoService,
    SmartParkError,
    classify,
    cross_validate,
    decode,
    decode_stream,
    display_minutes,
    encode,
    error_rates,
    evaluate_scheme,
    fit_cruise,
    fit_quantile_line,
    initial_thresholds,
    optimize,
    predict_cruise,
    restrict_to,
    simulate_pairs,
)

__all__ = [
    "InfoService",
    "SmartParkError",
    "classify",
    "cross_validate",
    "decode",
    "decode_stream",
    "display_minutes",
    "encode",
    "error_rates",
    "evaluate_scheme",
    "fit_cruise",
    "fit_quantile_line",
    "initial_thresholds",
    "optimize",
    "predict_cruise",
    "restrict_to",
    "simulate_pairs",
]
