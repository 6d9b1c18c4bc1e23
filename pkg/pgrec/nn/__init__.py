from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, grad_check
from .mlp import mlp_backward, mlp_forward
from .optim import rmsprop_step
from .params import MlpSpec, ParamStore, init_params

__all__ = [
    "GradCheckReport",
    "MlpSpec",
    "ParamStore",
    "grad_check",
    "init_params",
    "load_checkpoint",
    "mlp_backward",
    "mlp_forward",
    "rmsprop_step",
    "save_checkpoint",
]
