"""Data-driven Viterbi symbol detection with model-based baselines,
Reed-Solomon coded block fading, and online decision-directed retraining."""

from .channels import (
    GAUSSIAN,
    POISSON,
    AlphaStable,
    ChannelProfile,
    Constellation,
    FadingSchedule,
    alpha_stable_pdf_table,
    block_fading_profile,
    bpsk,
    exp_decay_profile,
    ook,
    perturb_csi,
    transmit,
)
from .detector import (
    LikelihoodModel,
    detect_block,
    detect_block_model_based,
    fit_model,
    learned_costs,
    load_model,
    model_based_costs,
    save_model,
)
from .gmm import MixtureParams, density, em_fit, warm_refit
from .mlp import ClassifierParams, gradient_check, init, posterior, train
from .online import OnlineConfig, OnlineState, process_block, run_stream
from .trellis import TrellisSpec, brute_force_ml, run_trellis, viterbi_detect

__all__ = [
    "GAUSSIAN",
    "POISSON",
    "AlphaStable",
    "ChannelProfile",
    "ClassifierParams",
    "Constellation",
    "FadingSchedule",
    "LikelihoodModel",
    "MixtureParams",
    "OnlineConfig",
    "OnlineState",
    "TrellisSpec",
    "alpha_stable_pdf_table",
    "block_fading_profile",
    "bpsk",
    "brute_force_ml",
    "density",
    "detect_block",
    "detect_block_model_based",
    "em_fit",
    "exp_decay_profile",
    "fit_model",
    "gradient_check",
    "init",
    "learned_costs",
    "load_model",
    "model_based_costs",
    "ook",
    "perturb_csi",
    "posterior",
    "process_block",
    "run_stream",
    "run_trellis",
    "save_model",
    "train",
    "transmit",
    "viterbi_detect",
    "warm_refit",
]

__version__ = "0.1.0"
