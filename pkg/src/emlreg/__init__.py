"""Deep nonparametric regression with a kernel-density likelihood loss.

A ReLU feedforward network is fit by full-batch Adam under one of six
objectives: least squares, four classical robust losses (LAD, Huber,
Cauchy, Tukey's biweight), or the estimated-maximum-likelihood (EML)
loss, the negative mean log of a kernel density estimate of the current
training residuals. Includes a simulation benchmark harness and a
real-data pipeline.
"""

__version__ = "0.1.0"

from .kde import Fixed, KnnProportion, gaussian_kernel, kde_at, kernel_moment, knn_bandwidths
from .losses import (
    EML,
    LAD,
    LS,
    Cauchy,
    Huber,
    LossEval,
    Tukey,
    batch_loss_and_grad,
    eml_loss_and_grad,
    pointwise_grad,
    pointwise_loss,
)
from .neuralnet import MlpConfig, MlpParams, backward, forward, he_uniform_init
from .numerics import RngState, matmul
from .simbench import (
    Dataset,
    ErrorKind,
    MetricsReport,
    ScenarioConfig,
    compute_bias_sd_rmse,
    generate_scenario,
    make_beta,
    prediction_error,
    residual_qq_data,
    sample_error,
    target_g,
)
from .trainer import (
    AdamState,
    TrainConfig,
    TrainReport,
    adam_step,
    fine_tune,
    load_checkpoint,
    recenter_intercept,
    save_checkpoint,
    train,
)

__all__ = [
    "__version__",
    "Fixed",
    "KnnProportion",
    "gaussian_kernel",
    "kernel_moment",
    "knn_bandwidths",
    "kde_at",
    "LS",
    "LAD",
    "Huber",
    "Cauchy",
    "Tukey",
    "EML",
    "LossEval",
    "pointwise_loss",
    "pointwise_grad",
    "eml_loss_and_grad",
    "batch_loss_and_grad",
    "MlpConfig",
    "MlpParams",
    "he_uniform_init",
    "forward",
    "backward",
    "RngState",
    "matmul",
    "AdamState",
    "TrainConfig",
    "TrainReport",
    "adam_step",
    "train",
    "fine_tune",
    "recenter_intercept",
    "save_checkpoint",
    "load_checkpoint",
    "Dataset",
    "ErrorKind",
    "ScenarioConfig",
    "MetricsReport",
    "make_beta",
    "target_g",
    "sample_error",
    "generate_scenario",
    "compute_bias_sd_rmse",
    "prediction_error",
    "residual_qq_data",
]
