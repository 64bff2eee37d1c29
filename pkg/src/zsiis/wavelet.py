"""Single-level orthonormal 2-D Haar transform.

Images are C×H×W tensors (an optional leading batch dimension is accepted
everywhere). The analysis of each 2×2 block with values

    a b
    c d

produces   LL = (a+b+c+d)/2    HL = (-a+b-c+d)/2
           LH = (-a-b+c+d)/2   HH = (a-b-c+d)/2

The four filters are orthonormal, so `iwt` is the exact transpose of `dwt`,
round trips are lossless up to float rounding, and energy is preserved.

Subband layout is band-major: output channels [0,C) hold LL, [C,2C) HL,
[2C,3C) LH, [3C,4C) HH, each ordered by source channel.
"""

import torch

from .errors import DimensionError


def dwt(img: torch.Tensor) -> torch.Tensor:
    """Decompose a C×H×W (or N×C×H×W) image into 4C×H/2×W/2 Haar subbands."""
    if img.dim() not in (3, 4):
        raise DimensionError(f"expected 3-D or 4-D tensor, got {img.dim()}-D")
    h, w = img.shape[-2], img.shape[-1]
    if h % 2 or w % 2:
        raise DimensionError(f"dwt needs even spatial dims, got {h}x{w}")
    a = img[..., 0::2, 0::2]
    b = img[..., 0::2, 1::2]
    c = img[..., 1::2, 0::2]
    d = img[..., 1::2, 1::2]
    ll = (a + b + c + d) / 2
    hl = (-a + b - c + d) / 2
    lh = (-a - b + c + d) / 2
    hh = (a - b - c + d) / 2
    return torch.cat([ll, hl, lh, hh], dim=-3)


def iwt(sub: torch.Tensor) -> torch.Tensor:
    """Reconstruct the image from `dwt` subbands (exact inverse, no clamping)."""
    if sub.dim() not in (3, 4):
        raise DimensionError(f"expected 3-D or 4-D tensor, got {sub.dim()}-D")
    channels = sub.shape[-3]
    if channels % 4:
        raise DimensionError(f"subband channel count {channels} not divisible by 4")
    c0 = channels // 4
    ll, hl, lh, hh = sub.split(c0, dim=-3)
    a = (ll - hl - lh + hh) / 2
    b = (ll + hl - lh - hh) / 2
    c = (ll - hl + lh - hh) / 2
    d = (ll + hl + lh + hh) / 2
    # Interleave columns within even/odd rows, then interleave the rows.
    top = torch.stack([a, b], dim=-1).reshape(*a.shape[:-1], 2 * a.shape[-1])
    bottom = torch.stack([c, d], dim=-1).reshape(*c.shape[:-1], 2 * c.shape[-1])
    out = torch.stack([top, bottom], dim=-2)
    return out.reshape(*top.shape[:-2], 2 * top.shape[-2], top.shape[-1])


def extract_ll(sub: torch.Tensor) -> torch.Tensor:
    """Return the low-frequency (LL) channels of a subband tensor."""
    if sub.dim() not in (3, 4):
        raise DimensionError(f"expected 3-D or 4-D tensor, got {sub.dim()}-D")
    channels = sub.shape[-3]
    if channels % 4:
        raise DimensionError(f"subband channel count {channels} not divisible by 4")
    return sub.narrow(-3, 0, channels // 4)
