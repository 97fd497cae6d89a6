# Copyright 2026 The LambdaNet Kernels Authors
# SPDX-License-Identifier: Apache-2.0

"""Lambda layer kernels with reference oracles, gradient checks and cost models."""

from ._lambdanet import (
    DEFAULT_SEED,
    ConfigError,
    LambdaConfig,
    LambdaParams,
    NumericError,
    ShapeError,
    SpecError,
    backward,
    causal_mask,
    contract,
    forward,
    gradient_check,
    init_params,
    memory_report,
    reference_forward,
    relative_index_table,
    run_suite,
    suite_names,
    time_cost,
    train_toy,
)

__all__ = [
    "DEFAULT_SEED",
    "ConfigError",
    "LambdaConfig",
    "LambdaParams",
    "NumericError",
    "ShapeError",
    "SpecError",
    "backward",
    "causal_mask",
    "contract",
    "forward",
    "gradient_check",
    "init_params",
    "memory_report",
    "reference_forward",
    "relative_index_table",
    "run_suite",
    "suite_names",
    "time_cost",
    "train_toy",
]
