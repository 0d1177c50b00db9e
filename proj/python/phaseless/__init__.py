"""Python bindings for the phaseless inverse scattering library."""

from ._phaseless import (
    Dataset,
    FarField,
    PhaselessError,
    bessel_j,
    bessel_y,
    builtin_scene_names,
    config_hash,
    dataset_gap,
    far_field,
    hankel1,
    indicator,
    probe_ratio,
    recover,
    synthesize_dataset,
    translate,
    validate,
)

__all__ = [
    "Dataset",
    "FarField",
    "PhaselessError",
    "bessel_j",
    "bessel_y",
    "builtin_scene_names",
    "config_hash",
    "dataset_gap",
    "far_field",
    "hankel1",
    "indicator",
    "probe_ratio",
    "recover",
    "synthesize_dataset",
    "translate",
    "validate",
]
