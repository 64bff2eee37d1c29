"""Training loop: batch assembly, the four-loss step, and checkpointing.

Each step pairs half of the batch as covers with the other half as secrets,
conceals, blends the cover-stego residual back in with a per-pair factor
drawn uniformly from [0,1], then runs both backward passes (secret from the
augmented stego, cover from itself) with independent Gaussian noise. The
weighted loss drives one Adam update.

Everything that consumes randomness draws from one torch.Generator in a
fixed order, so a (seed, dataset) pair reproduces the loss trajectory
exactly on a single-threaded run.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import torch

from .checkpoint import Checkpoint, save_checkpoint, snapshot
from .config import TrainConfig
from .data import load_images, random_crop
from .errors import DataError, DivergenceError
from .inn import InnModel, init_model
from .losses import loss_crev, loss_freq, loss_hiding, loss_srev, loss_total
from .pipeline import conceal, residual_augment
from .wavelet import dwt, iwt

logger = logging.getLogger(__name__)

LOSS_CSV_HEADER = ("step", "epoch", "l_hid", "l_freq", "l_srev", "l_crev", "l_total")


@dataclass
class TrainBatch:
    """Paired covers/secrets plus one residual factor per pair."""

    covers: torch.Tensor
    secrets: torch.Tensor
    lams: torch.Tensor

    def __post_init__(self):
        if self.covers.shape != self.secrets.shape:
            raise DataError(
                f"covers {tuple(self.covers.shape)} and secrets "
                f"{tuple(self.secrets.shape)} must match")
        if self.covers.dim() != 4:
            raise DataError("batch tensors must be 4-D (pairs, C, H, W)")
        if self.lams.numel() != self.covers.shape[0]:
            raise DataError("need exactly one lam per pair")


@dataclass
class LossBreakdown:
    hiding: float
    freq: float
    srev: float
    crev: float
    total: float


def make_optimizer(model: InnModel, cfg: TrainConfig) -> torch.optim.Adam:
    return torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                            betas=cfg.betas, weight_decay=cfg.weight_decay)


def train_step(model: InnModel, optimizer: torch.optim.Adam, batch: TrainBatch,
               cfg: TrainConfig, generator: torch.Generator) -> LossBreakdown:
    """One optimization step over a batch of cover/secret pairs."""
    lam = batch.lams.to(batch.covers.dtype).view(-1, 1, 1, 1)
    init_stego = conceal(model, batch.secrets, batch.covers)
    stego = residual_augment(batch.covers, init_stego, lam)

    stego_sub = dwt(stego)
    z = torch.randn(stego_sub.shape, generator=generator, dtype=stego_sub.dtype)
    rec_secret_sub, _ = model.inverse(z, stego_sub)
    rec_secret = iwt(rec_secret_sub)

    cover_sub = dwt(batch.covers)
    z_tilde = torch.randn(cover_sub.shape, generator=generator, dtype=cover_sub.dtype)
    rec_cover_sub, _ = model.inverse(z_tilde, cover_sub)
    rec_cover = iwt(rec_cover_sub)

    l_hid = loss_hiding(stego, batch.covers)
    l_freq = loss_freq(stego, batch.covers)
    l_srev = loss_srev(rec_secret, batch.secrets)
    l_crev = loss_crev(rec_cover, batch.covers)
    total = loss_total((l_hid, l_freq, l_srev, l_crev), cfg.loss_weights)

    breakdown = LossBreakdown(hiding=l_hid.detach().item(), freq=l_freq.detach().item(),
                              srev=l_srev.detach().item(), crev=l_crev.detach().item(),
                              total=total.detach().item())
    if not torch.isfinite(total):
        raise DivergenceError(f"non-finite loss: {breakdown}")

    optimizer.zero_grad()
    total.backward()
    optimizer.step()
    return breakdown


def _write_loss_csv(path: Path, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOSS_CSV_HEADER)
        writer.writerows(rows)


def train(dataset_dir, cfg: TrainConfig, out_dir=None) -> Checkpoint:
    """Run the full training loop and return the final checkpoint.

    When out_dir is given, writes loss_log.csv, one checkpoint per epoch,
    and a rolling latest.ckpt there.
    """
    images = load_images(dataset_dir)
    usable = [img for img in images
              if img.shape[-2] >= cfg.crop_size and img.shape[-1] >= cfg.crop_size]
    if len(usable) < len(images):
        logger.warning("ignoring %d images smaller than crop size %d",
                       len(images) - len(usable), cfg.crop_size)
    if len(usable) < cfg.batch_size:
        raise DataError(
            f"need at least {cfg.batch_size} images of size >= {cfg.crop_size}, "
            f"found {len(usable)}")
    steps_per_epoch = len(usable) // cfg.batch_size

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    generator = torch.Generator()
    generator.manual_seed(cfg.seed)
    model = init_model(cfg.model, generator)
    optimizer = make_optimizer(model, cfg)

    pairs = cfg.batch_size // 2
    rows = []
    step = 0
    epoch = 0
    done = False
    for epoch in range(1, cfg.epochs + 1):
        order = torch.randperm(len(usable), generator=generator)
        for i in range(steps_per_epoch):
            idx = order[i * cfg.batch_size:(i + 1) * cfg.batch_size]
            covers = torch.stack([random_crop(usable[j], cfg.crop_size, generator)
                                  for j in idx[:pairs].tolist()])
            secrets = torch.stack([random_crop(usable[j], cfg.crop_size, generator)
                                   for j in idx[pairs:].tolist()])
            lams = torch.rand(pairs, generator=generator)
            if not cfg.ra_enabled:
                # Ablation mode: identical rng stream, residual factor pinned to 0.
                lams = torch.zeros_like(lams)
            breakdown = train_step(model, optimizer,
                                   TrainBatch(covers, secrets, lams), cfg, generator)
            step += 1
            rows.append((step, epoch, repr(breakdown.hiding), repr(breakdown.freq),
                         repr(breakdown.srev), repr(breakdown.crev),
                         repr(breakdown.total)))
            if cfg.max_steps is not None and step >= cfg.max_steps:
                done = True
                break
        ckpt = snapshot(model, optimizer, cfg, epoch, step, generator)
        if out_dir is not None:
            save_checkpoint(ckpt, out_dir / f"checkpoint_epoch{epoch:04d}.ckpt")
            save_checkpoint(ckpt, out_dir / "latest.ckpt")
            _write_loss_csv(out_dir / "loss_log.csv", rows)
        logger.info("epoch %d done: %d steps, last total loss %s",
                    epoch, step, rows[-1][-1] if rows else "n/a")
        if done:
            break
    return snapshot(model, optimizer, cfg, epoch, step, generator)
