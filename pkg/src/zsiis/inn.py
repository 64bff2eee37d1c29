"""Invertible coupling network operating on Haar subband pairs.

Each coupling block updates a (cover, secret) branch pair through three
densely connected convolutional subnets:

    cover'  = cover + psi(secret)
    secret' = secret * exp(clamp_k * sigmoid(rho(cover'))) + eta(cover')

and the inverse retraces the same arithmetic exactly:

    z    = (z' - eta(main')) * exp(-clamp_k * sigmoid(rho(main')))
    main = main' - psi(z)

Every subnet ends in a zero-initialized linear layer, so a freshly
initialized network is the identity on the cover branch: concealing into a
cover returns the cover bit-for-bit (up to wavelet round-trip error).
"""

import math
from dataclasses import dataclass

import torch
import torch.nn as nn

from .errors import ConfigError, DimensionError

LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class ModelConfig:
    """Architecture hyperparameters of the invertible network."""

    num_blocks: int = 16
    channels_per_branch: int = 12
    growth: int = 32
    num_subnet_layers: int = 5
    clamp_k: float = 2.0
    kernel: int = 3

    def __post_init__(self):
        for name in ("num_blocks", "channels_per_branch", "growth",
                     "num_subnet_layers", "kernel"):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.clamp_k <= 0:
            raise ConfigError(f"clamp_k must be positive, got {self.clamp_k!r}")
        if self.kernel % 2 == 0:
            raise ConfigError(f"kernel must be odd, got {self.kernel}")


def toy_config(num_blocks: int = 4, growth: int = 16) -> ModelConfig:
    """Small profile for desk-scale runs (minutes on a laptop CPU)."""
    return ModelConfig(num_blocks=num_blocks, growth=growth)


def clamped_sigmoid(x: torch.Tensor, clamp_k: float) -> torch.Tensor:
    """Elementwise clamp_k * sigmoid(x); the exponent scale of each block."""
    return clamp_k * torch.sigmoid(x)


class DenseBlock(nn.Module):
    """Densely connected conv stack: layer j sees the input plus all earlier
    outputs; hidden layers are leaky-rectified, the final layer is linear and
    zero-initialized so a fresh subnet outputs zero."""

    def __init__(self, channels: int, growth: int = 32, num_layers: int = 5,
                 kernel: int = 3):
        super().__init__()
        pad = kernel // 2
        convs = []
        for j in range(num_layers - 1):
            convs.append(nn.Conv2d(channels + j * growth, growth, kernel, padding=pad))
        convs.append(nn.Conv2d(channels + (num_layers - 1) * growth, channels,
                               kernel, padding=pad))
        self.convs = nn.ModuleList(convs)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)
        with torch.no_grad():
            self.convs[-1].weight.zero_()
            self.convs[-1].bias.zero_()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = x
        for conv in self.convs[:-1]:
            feats = torch.cat([feats, self.act(conv(feats))], dim=1)
        return self.convs[-1](feats)


class CouplingBlock(nn.Module):
    """One invertible affine coupling step on a (cover, secret) branch pair."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.clamp_k = config.clamp_k
        args = (config.channels_per_branch, config.growth,
                config.num_subnet_layers, config.kernel)
        self.psi = DenseBlock(*args)
        self.rho = DenseBlock(*args)
        self.eta = DenseBlock(*args)

    def forward(self, cover_b: torch.Tensor, secret_b: torch.Tensor):
        if cover_b.shape != secret_b.shape:
            raise DimensionError(
                f"branch shapes differ: {tuple(cover_b.shape)} vs {tuple(secret_b.shape)}")
        cover_out = cover_b + self.psi(secret_b)
        scale = clamped_sigmoid(self.rho(cover_out), self.clamp_k)
        secret_out = secret_b * torch.exp(scale) + self.eta(cover_out)
        return cover_out, secret_out

    def inverse(self, main_next: torch.Tensor, z_next: torch.Tensor):
        if main_next.shape != z_next.shape:
            raise DimensionError(
                f"branch shapes differ: {tuple(main_next.shape)} vs {tuple(z_next.shape)}")
        scale = clamped_sigmoid(self.rho(main_next), self.clamp_k)
        z = (z_next - self.eta(main_next)) * torch.exp(-scale)
        main = main_next - self.psi(z)
        return main, z


class InnModel(nn.Module):
    """Stack of coupling blocks with exact forward and inverse passes.

    forward(secret_sub, cover_sub) -> (unused_latent, stego_sub)
    inverse(z_sub, main_sub)       -> (recovered_sub, unused)

    Inputs are subband tensors with config.channels_per_branch channels and
    an optional leading batch dimension.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.blocks = nn.ModuleList(CouplingBlock(config)
                                    for _ in range(config.num_blocks))

    def _check(self, x: torch.Tensor, name: str):
        squeezed = x.dim() == 3
        if squeezed:
            x = x.unsqueeze(0)
        if x.dim() != 4 or x.shape[1] != self.config.channels_per_branch:
            raise DimensionError(
                f"{name} must have {self.config.channels_per_branch} channels, "
                f"got shape {tuple(x.shape)}")
        return x, squeezed

    def forward(self, secret_sub: torch.Tensor, cover_sub: torch.Tensor):
        secret, s_sq = self._check(secret_sub, "secret_sub")
        cover, c_sq = self._check(cover_sub, "cover_sub")
        if secret.shape != cover.shape:
            raise DimensionError(
                f"branch shapes differ: {tuple(secret.shape)} vs {tuple(cover.shape)}")
        for block in self.blocks:
            cover, secret = block(cover, secret)
        if s_sq and c_sq:
            return secret.squeeze(0), cover.squeeze(0)
        return secret, cover

    def inverse(self, z_sub: torch.Tensor, main_sub: torch.Tensor):
        z, z_sq = self._check(z_sub, "z_sub")
        main, m_sq = self._check(main_sub, "main_sub")
        if z.shape != main.shape:
            raise DimensionError(
                f"branch shapes differ: {tuple(z.shape)} vs {tuple(main.shape)}")
        for block in reversed(self.blocks):
            main, z = block.inverse(main, z)
        if z_sq and m_sq:
            return z.squeeze(0), main.squeeze(0)
        return z, main


def _as_generator(seed) -> torch.Generator:
    if isinstance(seed, torch.Generator):
        return seed
    gen = torch.Generator()
    gen.manual_seed(int(seed))
    return gen


def init_model(config: ModelConfig, seed=0) -> InnModel:
    """Build an InnModel with seeded fan-in-scaled hidden weights.

    Hidden conv layers get Kaiming-normal weights (leaky-rectifier gain,
    fan_in mode) drawn from the given seed or torch.Generator; biases and
    every final subnet layer are zero. The same seed reproduces the exact
    same parameters.
    """
    gen = _as_generator(seed)
    model = InnModel(config)
    with torch.no_grad():
        for block in model.blocks:
            for subnet in (block.psi, block.rho, block.eta):
                for conv in subnet.convs[:-1]:
                    fan_in = conv.in_channels * conv.kernel_size[0] * conv.kernel_size[1]
                    std = math.sqrt(2.0 / ((1.0 + LEAKY_SLOPE ** 2) * fan_in))
                    conv.weight.normal_(0.0, std, generator=gen)
                    conv.bias.zero_()
                subnet.convs[-1].weight.zero_()
                subnet.convs[-1].bias.zero_()
    return model
