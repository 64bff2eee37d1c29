"""Training objective: four MSE terms and their weighted sum.

hiding   — stego vs cover in pixel space
freq     — stego vs cover restricted to the low-frequency wavelet band
srev     — revealed secret vs true secret
crev     — revealed cover vs true cover

All terms return 0-dim tensors so they compose into an autograd graph.
"""

import torch

from .errors import DimensionError
from .wavelet import dwt, extract_ll


def _mse(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    if a.shape != b.shape:
        raise DimensionError(f"shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    return torch.mean((a - b) ** 2)


def loss_hiding(stego: torch.Tensor, cover: torch.Tensor) -> torch.Tensor:
    return _mse(stego, cover)


def loss_freq(stego: torch.Tensor, cover: torch.Tensor) -> torch.Tensor:
    return _mse(extract_ll(dwt(stego)), extract_ll(dwt(cover)))


def loss_srev(rec_secret: torch.Tensor, secret: torch.Tensor) -> torch.Tensor:
    return _mse(rec_secret, secret)


def loss_crev(rec_cover: torch.Tensor, cover: torch.Tensor) -> torch.Tensor:
    return _mse(rec_cover, cover)


def loss_total(terms, weights) -> torch.Tensor:
    """Weighted sum of the four terms: w1*hid + w2*freq + w3*srev + w4*crev."""
    if len(terms) != 4 or len(weights) != 4:
        raise ValueError("expected 4 terms and 4 weights")
    total = None
    for term, weight in zip(terms, weights):
        part = torch.as_tensor(term) * weight
        total = part if total is None else total + part
    return total
