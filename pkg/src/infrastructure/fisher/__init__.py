from .objective import (
    DEFAULT_DISCRIMINATOR_STEPS,
    DEFAULT_LAMBDA,
    FisherConfig,
    FisherGradients,
    discriminator_ascent_step,
    discriminator_norm,
    fisher_gradients,
    fisher_loss,
    optimal_discriminator_residual,
    stein_operator_mean,
)

__all__ = [
    "DEFAULT_DISCRIMINATOR_STEPS",
    "DEFAULT_LAMBDA",
    "FisherConfig",
    "FisherGradients",
    "discriminator_ascent_step",
    "discriminator_norm",
    "fisher_gradients",
    "fisher_loss",
    "optimal_discriminator_residual",
    "stein_operator_mean",
]
