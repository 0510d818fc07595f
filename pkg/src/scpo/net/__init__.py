from scpo.net.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from scpo.net.policy import MSE, PolicyNet, forward, init_zero_residual, loss_and_grad
from scpo.net.spec import Activation, NetSpec

__all__ = [
    "Activation",
    "NetSpec",
    "PolicyNet",
    "MSE",
    "init_zero_residual",
    "forward",
    "loss_and_grad",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
]
