"""CGP-SBM 真值实例生成"""

from .sbm_sim import (
    CgpInstance,
    SbmParams,
    build_sbm_params,
    cluster_labels,
    expected_density,
    generate_instance,
    sample_adjacency,
    sample_poly_coeffs,
    sbm_params_from_density,
    spectral_radius,
)

__all__ = [
    "CgpInstance",
    "SbmParams",
    "build_sbm_params",
    "cluster_labels",
    "expected_density",
    "generate_instance",
    "sample_adjacency",
    "sample_poly_coeffs",
    "sbm_params_from_density",
    "spectral_radius",
]
