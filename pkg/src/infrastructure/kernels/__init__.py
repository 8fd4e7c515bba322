from .radial import (
    ImqKernel,
    RadialKernel,
    RadialProfile,
    RbfKernel,
    median_heuristic,
    pairwise_differences,
    pairwise_sq_dists,
)

__all__ = [
    "ImqKernel",
    "RadialKernel",
    "RadialProfile",
    "RbfKernel",
    "median_heuristic",
    "pairwise_differences",
    "pairwise_sq_dists",
]
