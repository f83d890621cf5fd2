# SPDX-License-Identifier: Apache-2.0
"""Zero-shot low-light enhancement: DDIM inversion, AdaIN renormalization, attention replay."""

from ._relight import (
    ConfigError,
    ContractError,
    DatasetError,
    DegenerateInputError,
    alpha_bar,
    angular_mae,
    delta_e76,
    enhance,
    evaluate,
    psnr,
    scan_paired,
    srgb_to_lab,
    ssim,
    variant_names,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DatasetError",
    "DegenerateInputError",
    "alpha_bar",
    "angular_mae",
    "delta_e76",
    "enhance",
    "evaluate",
    "psnr",
    "scan_paired",
    "srgb_to_lab",
    "ssim",
    "variant_names",
]
