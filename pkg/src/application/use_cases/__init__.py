from .evaluate import EvaluateSamples
from .generate_samples import GenerateSamples
from .run_baselines import BaselineConfig, RunParticleBaseline, run_sgld, run_svgd
from .run_experiment import ExperimentComponents, RunExperiment
from .train_fisher import TrainFisherSampler, fit_discriminator, train_fisher_ns
from .train_ksd import KsdConfig, TrainKsdSampler, train_ksd_ns
from .training import LoopSettings, TrainingResult

__all__ = [
    "BaselineConfig",
    "EvaluateSamples",
    "ExperimentComponents",
    "GenerateSamples",
    "KsdConfig",
    "LoopSettings",
    "RunExperiment",
    "RunParticleBaseline",
    "TrainFisherSampler",
    "TrainKsdSampler",
    "TrainingResult",
    "fit_discriminator",
    "run_sgld",
    "run_svgd",
    "train_fisher_ns",
    "train_ksd_ns",
]
