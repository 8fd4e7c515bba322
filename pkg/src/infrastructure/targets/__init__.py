from .gaussian import Gaussian, IsotropicGaussian
from .logistic import LogisticPosterior, logistic_posterior_score
from .mixture import GaussianMixture, crossed_mixture_new, ring8_new

__all__ = [
    "Gaussian",
    "IsotropicGaussian",
    "GaussianMixture",
    "LogisticPosterior",
    "crossed_mixture_new",
    "logistic_posterior_score",
    "ring8_new",
]
