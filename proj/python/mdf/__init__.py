"""Multi-resolution data fusion: plug-and-play reconstruction of a
high-resolution image from low-resolution or sparsely sampled measurements
plus a small library of high-resolution patches."""

from ._mdf import (  # noqa: F401
    PatchLibrary,
    acquisition_stats,
    bicubic_interpolate,
    block_downsample,
    build_library,
    estimate_sigma_lambda,
    gen_lattice_scene,
    internal_nlm_denoise,
    lbnlm_denoise,
    load_image,
    load_library,
    pnp_reconstruct_sparse,
    pnp_reconstruct_sr,
    replicate_upsample,
    rmse_percent,
    sample_sparse,
    save_image,
    save_library,
    shepard_interpolate,
    sparse_inversion,
    sr_inversion,
)

__all__ = [
    "PatchLibrary",
    "acquisition_stats",
    "bicubic_interpolate",
    "block_downsample",
    "build_library",
    "estimate_sigma_lambda",
    "gen_lattice_scene",
    "internal_nlm_denoise",
    "lbnlm_denoise",
    "load_image",
    "load_library",
    "pnp_reconstruct_sparse",
    "pnp_reconstruct_sr",
    "replicate_upsample",
    "rmse_percent",
    "sample_sparse",
    "save_image",
    "save_library",
    "shepard_interpolate",
    "sparse_inversion",
    "sr_inversion",
]
