"""Joint time-vertex fractional Fourier transforms and learned spectral filters."""

from ._core import (
    DmpjError,
    TransformBases,
    build_gso,
    degrade_noise,
    dft_matrix,
    dmpjfrft,
    dmpjfrft_matrix,
    gd_filter,
    gen_synthetic,
    jfrft,
    knn_graph,
    mse,
    psnr_db,
    run_experiment,
    snr_db,
    ssim,
)

__all__ = [
    "DmpjError",
    "TransformBases",
    "build_gso",
    "degrade_noise",
    "dft_matrix",
    "dmpjfrft",
    "dmpjfrft_matrix",
    "gd_filter",
    "gen_synthetic",
    "jfrft",
    "knn_graph",
    "mse",
    "psnr_db",
    "run_experiment",
    "snr_db",
    "ssim",
]
