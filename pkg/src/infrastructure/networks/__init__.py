from .mlp import (
    ACTIVATIONS,
    Activation,
    Mlp,
    MlpGraph,
    build_graph,
    clip_weights,
    input_jacobian_trace,
    jacobian_trace,
    lipschitz_bound,
    mlp_backward,
    mlp_forward,
    mlp_new,
)
from .noise import NOISE_KINDS, NoiseKind, NoiseLaw
from .optim import RmsPropState, rmsprop_step

__all__ = [
    "ACTIVATIONS",
    "Activation",
    "Mlp",
    "MlpGraph",
    "NOISE_KINDS",
    "NoiseKind",
    "NoiseLaw",
    "RmsPropState",
    "build_graph",
    "clip_weights",
    "input_jacobian_trace",
    "jacobian_trace",
    "lipschitz_bound",
    "mlp_backward",
    "mlp_forward",
    "mlp_new",
    "rmsprop_step",
]
