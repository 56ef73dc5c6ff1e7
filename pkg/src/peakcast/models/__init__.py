from .base import KINDS, SCHEMA_VERSION, FittedModel, predict
from .linear import design_matrix, fit_mlr, fit_qr, pinball_loss, predict_linear, qr_design
from .svr import fit_svr, kernel_matrix, predict_svr
from .ann import fit_ann, predict_ann
from .ensemble import fit_ensemble, predict_ensemble

__all__ = [
    "KINDS",
    "SCHEMA_VERSION",
    "FittedModel",
    "predict",
    "design_matrix",
    "fit_mlr",
    "fit_qr",
    "pinball_loss",
    "predict_linear",
    "qr_design",
    "fit_svr",
    "kernel_matrix",
    "predict_svr",
    "fit_ann",
    "predict_ann",
    "fit_ensemble",
    "predict_ensemble",
]
