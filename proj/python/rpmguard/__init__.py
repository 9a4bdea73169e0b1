"""HMM-based anomaly detection for remote patient monitoring event streams."""

from ._rpmguard import (
    ALPHABET_VERSION,
    HmmModel,
    RpmguardError,
    default_config_text,
    deserialize_model,
    discretize,
    evaluate_files,
    expand_window,
    fit_profile,
    forward_log_likelihood,
    inject_files,
    run_benchmark,
    scenario_catalog_text,
    score_files,
    serialize_model,
    simulate,
    symbol_code,
    symbol_names,
    train_baum_welch,
    train_files,
)

__all__ = [
    "ALPHABET_VERSION",
    "HmmModel",
    "RpmguardError",
    "default_config_text",
    "deserialize_model",
    "discretize",
    "evaluate_files",
    "expand_window",
    "fit_profile",
    "forward_log_likelihood",
    "inject_files",
    "run_benchmark",
    "scenario_catalog_text",
    "score_files",
    "serialize_model",
    "simulate",
    "symbol_code",
    "symbol_names",
    "train_baum_welch",
    "train_files",
]
