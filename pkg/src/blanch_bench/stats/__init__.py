"""PLS regression with VIP scores, simple OLS with F-test, and special functions."""

from .dataset import (
    RegressionDataset,
    build_design_matrix,
    model_report,
    read_dataset_csv,
    write_dataset_csv,
    write_model_report,
)
from .ols import OlsResult, ols_fit
from .pls import PlsModel, pls_fit, pls_predict, r_squared, vip_scores
from .special import f_survival, regularized_incomplete_beta

__all__ = [
    "OlsResult",
    "PlsModel",
    "RegressionDataset",
    "build_design_matrix",
    "f_survival",
    "model_report",
    "ols_fit",
    "pls_fit",
    "pls_predict",
    "r_squared",
    "read_dataset_csv",
    "regularized_incomplete_beta",
    "vip_scores",
    "write_dataset_csv",
    "write_model_report",
]
