"""Image IO, cropping, quantization, and synthetic test imagery.

Images travel through the library as float32 C×H×W tensors in [0,1].
On disk the interchange format is 8-bit RGB PNG; grayscale files are
promoted to three channels on load.
"""

import logging
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .errors import DataError, DimensionError

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


def load_image(path) -> torch.Tensor:
    """Decode one image file to a (3,H,W) float tensor in [0,1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float32) / 255.0
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise DataError(f"cannot decode image {path}: {exc}") from exc
    return torch.from_numpy(arr).permute(2, 0, 1).contiguous()


def save_image(img: torch.Tensor, path):
    """Write a (C,H,W) tensor as an 8-bit PNG, clamping to [0,1] first."""
    if img.dim() != 3:
        raise DimensionError(f"expected 3-D image tensor, got {img.dim()}-D")
    arr = (img.detach().clamp(0, 1) * 255).round().to(torch.uint8)
    arr = arr.permute(1, 2, 0).numpy()
    if arr.shape[2] == 1:
        arr = arr[:, :, 0]
    Image.fromarray(arr).save(Path(path))


def load_images(directory) -> list:
    """Load every decodable image in a directory, sorted by filename.

    Undecodable files are skipped with a warning; an empty result is an
    error.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"not a directory: {directory}")
    paths = sorted(p for p in directory.iterdir()
                   if p.suffix.lower() in IMAGE_EXTENSIONS)
    if not paths:
        raise DataError(f"no image files in {directory}")
    images = []
    for p in paths:
        try:
            images.append(load_image(p))
        except DataError as exc:
            logger.warning("skipping %s: %s", p, exc)
    if not images:
        raise DataError(f"no decodable images in {directory}")
    return images


def random_crop(img: torch.Tensor, size: int, generator: torch.Generator) -> torch.Tensor:
    """Crop a size×size patch at an offset uniform over all valid positions."""
    h, w = img.shape[-2], img.shape[-1]
    if h < size or w < size:
        raise DataError(f"image {h}x{w} smaller than crop size {size}")
    top = int(torch.randint(0, h - size + 1, (1,), generator=generator))
    left = int(torch.randint(0, w - size + 1, (1,), generator=generator))
    return img[..., top:top + size, left:left + size]


def center_crop(img: torch.Tensor, size: int) -> torch.Tensor:
    """Crop the centered size×size patch (floor division for odd margins)."""
    h, w = img.shape[-2], img.shape[-1]
    if h < size or w < size:
        raise DataError(f"image {h}x{w} smaller than crop size {size}")
    top = (h - size) // 2
    left = (w - size) // 2
    return img[..., top:top + size, left:left + size]


def quantize8(img: torch.Tensor) -> torch.Tensor:
    """Clamp to [0,1] and snap to the 8-bit grid (what a PNG round trip does)."""
    return torch.round(img.clamp(0.0, 1.0) * 255.0) / 255.0


def synthetic_images(count: int, size: int = 48, channels: int = 3,
                     seed: int = 0) -> list:
    """Generate smooth structured images for desk-scale runs and demos.

    Each image mixes a random linear shade, a few Gaussian blobs, and mild
    pixel noise, then clips to [0,1]. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    images = []
    for _ in range(count):
        img = np.empty((channels, size, size))
        base = rng.uniform(0.2, 0.8, size=channels)
        gx, gy = rng.uniform(-0.4, 0.4, size=2)
        shade = gx * (xs - 0.5) + gy * (ys - 0.5)
        for c in range(channels):
            img[c] = base[c] + shade
        for _ in range(rng.integers(2, 5)):
            cx, cy = rng.uniform(0, 1, size=2)
            sigma = rng.uniform(0.08, 0.3)
            bump = np.exp(-((xs - cx) ** 2 + (ys - cy) ** 2) / (2 * sigma ** 2))
            amp = rng.uniform(-0.5, 0.5, size=channels)
            for c in range(channels):
                img[c] += amp[c] * bump
        img += rng.normal(0.0, 0.015, size=img.shape)
        images.append(torch.from_numpy(np.clip(img, 0.0, 1.0).astype(np.float32)))
    return images
