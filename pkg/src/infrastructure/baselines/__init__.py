from .particles import (
    FALLBACK_BANDWIDTH_SQ,
    SGLD_DEFAULT_BASE,
    SGLD_DEFAULT_DECAY,
    SVGD_DEFAULT_STEP,
    sgld_step,
    sgld_step_size,
    svgd_direction,
    svgd_step,
)

__all__ = [
    "FALLBACK_BANDWIDTH_SQ",
    "SGLD_DEFAULT_BASE",
    "SGLD_DEFAULT_DECAY",
    "SVGD_DEFAULT_STEP",
    "sgld_step",
    "sgld_step_size",
    "svgd_direction",
    "svgd_step",
]
