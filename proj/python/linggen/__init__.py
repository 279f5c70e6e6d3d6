"""Linguistic attribute extraction, P-MASKING utilities and conditioned generation."""

from ._linggen import (
    Discriminator,
    LanguageModel,
    LinggenError,
    attribute_ids,
    calibrate_shape,
    extract,
    masked_count,
    pmask_cdf,
    pmask_quantile,
    sample_rates,
)

__all__ = [
    "Discriminator",
    "LanguageModel",
    "LinggenError",
    "attribute_ids",
    "calibrate_shape",
    "extract",
    "masked_count",
    "pmask_cdf",
    "pmask_quantile",
    "sample_rates",
]
