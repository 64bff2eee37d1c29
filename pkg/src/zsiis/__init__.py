"""Invertible-network image hiding, revealing, and reveal-based steganalysis.

A secret image is concealed inside a cover by an invertible coupling
network between a Haar analysis/synthesis pair; running the same network
backward reveals the hidden content. Steganalysis needs no classifier: an
image whose backward reveal differs strongly from the image itself (low
PSNR) is flagged as stego.
"""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint, snapshot
from .config import TrainConfig
from .data import (center_crop, load_image, load_images, quantize8,
                   random_crop, save_image, synthetic_images)
from .errors import (CheckpointError, ConfigError, DataError, DimensionError,
                     DivergenceError, ZsiisError)
from .evaluation import (AblationReport, EvalReport, PsnrStats,
                         balanced_accuracy, evaluate_detection,
                         generate_eval_stegos, lsb_embed, psnr_histogram,
                         report_from_scores, run_ablation, sweep_table,
                         threshold_sweep)
from .inn import (CouplingBlock, DenseBlock, InnModel, ModelConfig,
                  clamped_sigmoid, init_model, toy_config)
from .losses import (loss_crev, loss_freq, loss_hiding, loss_srev, loss_total)
from .pipeline import (DetectionResult, conceal, detect, psnr,
                       residual_augment, reveal)
from .training import (LossBreakdown, TrainBatch, make_optimizer, train,
                       train_step)
from .wavelet import dwt, extract_ll, iwt

__version__ = "0.1.0"

__all__ = [
    "AblationReport", "Checkpoint", "CheckpointError", "ConfigError",
    "CouplingBlock", "DataError", "DenseBlock", "DetectionResult",
    "DimensionError", "DivergenceError", "EvalReport", "InnModel",
    "LossBreakdown", "ModelConfig", "PsnrStats", "TrainBatch", "TrainConfig",
    "ZsiisError", "balanced_accuracy", "center_crop", "clamped_sigmoid",
    "conceal", "detect", "dwt", "evaluate_detection", "extract_ll",
    "generate_eval_stegos", "init_model", "iwt", "load_checkpoint",
    "load_image", "load_images", "loss_crev", "loss_freq", "loss_hiding",
    "loss_srev", "loss_total", "lsb_embed", "make_optimizer", "psnr",
    "psnr_histogram", "quantize8", "random_crop", "report_from_scores",
    "residual_augment", "reveal", "run_ablation", "save_checkpoint",
    "save_image", "snapshot", "sweep_table", "synthetic_images",
    "threshold_sweep", "toy_config", "train", "train_step",
]
