# Copyright 2026 The uselab Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)
"""Speech degradation, analysis and curation toolkit."""

from uselab._core import (
    add_noise,
    apply_recipe,
    band_partition,
    bandlimit,
    clip,
    codec_crush,
    dp_curve,
    dp_identity,
    evaluate,
    istft,
    make_target,
    mmse_distortion,
    oracle_regression,
    packet_loss,
    posterior_sampling_mse,
    proxy_quality_score,
    read_wav,
    render_reverberant,
    resample,
    residual_correlation,
    rir_decompose,
    spectral_norm,
    stft,
    supported_rates,
    transport_correct,
    wind_noise,
    write_wav,
)

__all__ = [
    "add_noise",
    "apply_recipe",
    "band_partition",
    "bandlimit",
    "clip",
    "codec_crush",
    "dp_curve",
    "dp_identity",
    "evaluate",
    "istft",
    "make_target",
    "mmse_distortion",
    "oracle_regression",
    "packet_loss",
    "posterior_sampling_mse",
    "proxy_quality_score",
    "read_wav",
    "render_reverberant",
    "resample",
    "residual_correlation",
    "rir_decompose",
    "spectral_norm",
    "stft",
    "supported_rates",
    "transport_correct",
    "wind_noise",
    "write_wav",
]

__version__ = "0.1.0"
