"""Kernel-field uncertainty decomposition.

A Gaussian field over data samples is recast in Schrodinger form; Hermite
projections of its square root split the field into ordered uncertainty
modes that concentrate at the tails of the sample distribution.  The same
machinery, pointed at a trained network's hidden activations, scores
predictive uncertainty in a single deterministic pass; a stochastic dropout
baseline and an evaluation harness round out the toolkit.
"""

from .datasets import (LabeledSeries, apply_znorm, gen_blobs, gen_lorenz,
                       gen_sine, gen_twosine, gen_xsinx, split_k, undo_znorm,
                       znormalize)
from .hermite import (MAX_ORDER, hermite_derivs, hermite_eval, hermite_norm,
                      normalized_hermite_derivs)
from .kernelfield import (FieldEvaluation, cip, gaussian_kernel,
                          information_potential, ipf, ipf_derivatives,
                          ipf_field, silverman_bandwidth,
                          wavefunction_derivatives)
from .metrics import RocCurve, calibration_rmse, dominance_entropy, roc_auc
from .mlp import (ActivationTrace, Layer, MlpModel, ModelFormatError,
                  TrainConfig, TrainingError, dropout_forward,
                  forward_capture, init_mlp, load_model, loss_gradients,
                  predict_batch, save_model, train)
from .modes import (ModeConfig, ModeMatrix, dominance_histogram, mode_ratios,
                    mode_std, qipf_modes, timeseries_qipf)
from .uq import (CrossQipfEvaluator, SurrogateConfig, UncertaintyRecord,
                 UncertaintyReport, cross_qipf_report, cross_qipf_uncertainty,
                 mc_dropout_report, mc_dropout_uncertainty, weight_centers)

__version__ = "0.1.0"

__all__ = [
    "ActivationTrace", "CrossQipfEvaluator", "FieldEvaluation",
    "LabeledSeries", "Layer", "MAX_ORDER", "MlpModel", "ModeConfig",
    "ModeMatrix", "ModelFormatError", "RocCurve", "SurrogateConfig",
    "TrainConfig", "TrainingError", "UncertaintyRecord", "UncertaintyReport",
    "apply_znorm", "calibration_rmse", "cip", "cross_qipf_report",
    "cross_qipf_uncertainty", "dominance_entropy", "dominance_histogram",
    "dropout_forward", "forward_capture", "gaussian_kernel", "gen_blobs",
    "gen_lorenz", "gen_sine", "gen_twosine", "gen_xsinx", "hermite_derivs",
    "hermite_eval", "hermite_norm", "information_potential", "init_mlp",
    "ipf", "ipf_derivatives", "ipf_field", "load_model", "loss_gradients",
    "mc_dropout_report", "mc_dropout_uncertainty", "mode_ratios", "mode_std",
    "normalized_hermite_derivs", "predict_batch", "qipf_modes", "roc_auc",
    "save_model", "silverman_bandwidth", "split_k", "timeseries_qipf",
    "train", "undo_znorm", "wavefunction_derivatives", "weight_centers",
    "znormalize",
]
