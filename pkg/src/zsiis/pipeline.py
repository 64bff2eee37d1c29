"""End-to-end user-facing operations.

`conceal` embeds a secret image into a cover by running the network forward
between a wavelet analysis/synthesis pair. `reveal` runs the network
backward from an image plus fresh Gaussian noise and returns whatever
content the network extracts: the hidden secret for a stego input, or a
reconstruction of the image itself for a clean cover. `detect` turns that
asymmetry into a verdict by thresholding the PSNR between the input and its
revealed content: low similarity means something was hidden.

All operations are read-only on the model; pass independent torch.Generator
streams for concurrent use. `conceal` returns raw (unclamped) values so it
can sit inside a training graph; `reveal` clamps to [0,1] because its output
feeds image files and PSNR scoring.
"""

import math
from dataclasses import dataclass
from typing import Literal

import torch

from .errors import ConfigError, DimensionError
from .inn import InnModel
from .wavelet import dwt, iwt

Verdict = Literal["cover", "stego"]


@dataclass
class DetectionResult:
    """Score, verdict, and the revealed image that justifies the verdict."""

    psnr_db: float
    verdict: Verdict
    recovered: torch.Tensor
    threshold_db: float


def _paired(a: torch.Tensor, b: torch.Tensor, names: str):
    if a.shape != b.shape:
        raise DimensionError(f"{names} shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")


def conceal(model: InnModel, secret: torch.Tensor, cover: torch.Tensor) -> torch.Tensor:
    """Embed `secret` into `cover`; returns the raw initial stego image.

    Output is NOT clamped to [0,1]: training differentiates through it.
    Clamp and quantize before writing to disk.
    """
    _paired(secret, cover, "secret/cover")
    _, stego_sub = model(dwt(secret), dwt(cover))
    return iwt(stego_sub)


def residual_augment(cover: torch.Tensor, init_stego: torch.Tensor, lam) -> torch.Tensor:
    """Blend the cover-stego residual back in: (cover - stego) * lam + stego.

    lam may be a scalar or a per-image tensor broadcastable over the batch;
    every value must lie in [0,1]. lam=0 returns the stego unchanged, lam=1
    returns the cover.
    """
    _paired(cover, init_stego, "cover/init_stego")
    lam_t = torch.as_tensor(lam, dtype=cover.dtype)
    if torch.any(lam_t < 0) or torch.any(lam_t > 1):
        raise ConfigError(f"lam must lie in [0,1], got {lam}")
    return (cover - init_stego) * lam_t + init_stego


def reveal(model: InnModel, image: torch.Tensor,
           generator: torch.Generator) -> torch.Tensor:
    """Run the network backward on `image` with fresh standard-normal noise.

    Returns the revealed content clamped to [0,1], same shape as the input.
    """
    sub = dwt(image)
    z = torch.randn(sub.shape, generator=generator, dtype=sub.dtype)
    recovered_sub, _ = model.inverse(z, sub)
    return iwt(recovered_sub).clamp(0.0, 1.0)


def psnr(a: torch.Tensor, b: torch.Tensor) -> float:
    """Peak signal-to-noise ratio in dB with peak value 1.0.

    Identical inputs return float('inf').
    """
    _paired(a, b, "psnr input")
    mse = torch.mean((a.detach().double() - b.detach().double()) ** 2).item()
    if mse == 0.0:
        return float("inf")
    return -10.0 * math.log10(mse)


def detect(model: InnModel, image: torch.Tensor, threshold_db: float,
           generator: torch.Generator) -> DetectionResult:
    """Classify `image` as cover or stego by scoring it against its reveal.

    Verdict is "stego" iff PSNR(image, revealed) <= threshold_db; the
    revealed image is returned so the decision can be inspected.
    """
    if not math.isfinite(float(threshold_db)):
        raise ConfigError(f"threshold_db must be finite, got {threshold_db!r}")
    recovered = reveal(model, image, generator)
    score = psnr(image, recovered)
    verdict: Verdict = "stego" if score <= threshold_db else "cover"
    return DetectionResult(psnr_db=score, verdict=verdict,
                           recovered=recovered, threshold_db=float(threshold_db))
