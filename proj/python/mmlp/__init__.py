from ._mmlp import (
    SpdRegressor,
    gen_spd_dataset,
    gradcheck,
    kernel_activation,
    qre_loss,
    quad_loss,
    stein_loss,
)

__all__ = [
    "SpdRegressor",
    "gen_spd_dataset",
    "gradcheck",
    "kernel_activation",
    "qre_loss",
    "quad_loss",
    "stein_loss",
]
