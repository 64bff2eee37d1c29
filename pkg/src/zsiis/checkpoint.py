"""Checkpoint persistence with a bit-exact binary layout.

File layout:

    magic bytes "ZSIIS1\\n"
    uint64 little-endian manifest byte length
    UTF-8 JSON manifest: {"config": ..., "epoch": ..., "step": ...,
        "rng_state": hex, "entries": [{name, dtype, shape, offset, nbytes}]}
    concatenated raw little-endian numeric blobs; each entry's offset is
    relative to the start of this data section

Entries cover model parameters ("model.<name>") and the optimizer's first
and second moment buffers ("adam.m.<name>", "adam.v.<name>"). dtype is
"f32" or "f64". The manifest is serialized with sorted keys and entries are
laid out in sorted-name order, so save -> load -> save is byte-identical.
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .config import TrainConfig
from .errors import CheckpointError, ConfigError
from .inn import InnModel, ModelConfig

MAGIC = b"ZSIIS1\n"

_NP_DTYPES = {"f32": np.dtype("<f4"), "f64": np.dtype("<f8")}
_TORCH_NAMES = {torch.float32: "f32", torch.float64: "f64"}


@dataclass
class Checkpoint:
    """Model parameters, optimizer moments, config echo, and rng state."""

    config: TrainConfig
    epoch: int
    step: int
    params: dict
    opt_m: dict
    opt_v: dict
    rng_state: bytes

    def to_model(self) -> InnModel:
        """Rebuild the model; rejects parameter sets that do not fit the config."""
        model = InnModel(self.config.model)
        try:
            model.load_state_dict(self.params, strict=True)
        except RuntimeError as exc:
            raise CheckpointError(f"parameters do not match model config: {exc}") from exc
        return model

    def to_optimizer(self, model: InnModel) -> torch.optim.Adam:
        """Rebuild the Adam optimizer with its stored moment buffers."""
        cfg = self.config
        opt = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate,
                               betas=cfg.betas, weight_decay=cfg.weight_decay)
        state = {}
        for i, (name, param) in enumerate(model.named_parameters()):
            m = self.opt_m.get(name)
            v = self.opt_v.get(name)
            if m is None or v is None:
                raise CheckpointError(f"missing optimizer state for {name}")
            if m.shape != param.shape or v.shape != param.shape:
                raise CheckpointError(f"optimizer state shape mismatch for {name}")
            state[i] = {"step": torch.tensor(float(self.step)),
                        "exp_avg": m.clone(), "exp_avg_sq": v.clone()}
        opt.load_state_dict({"state": state,
                             "param_groups": opt.state_dict()["param_groups"]})
        return opt

    def restore_generator(self) -> torch.Generator:
        gen = torch.Generator()
        gen.set_state(torch.from_numpy(
            np.frombuffer(self.rng_state, dtype=np.uint8).copy()))
        return gen


def snapshot(model: InnModel, optimizer: torch.optim.Adam, cfg: TrainConfig,
             epoch: int, step: int, generator: torch.Generator) -> Checkpoint:
    """Capture the current training state as a Checkpoint."""
    params, opt_m, opt_v = {}, {}, {}
    for name, param in model.named_parameters():
        params[name] = param.detach().clone()
        st = optimizer.state.get(param)
        if st and "exp_avg" in st:
            opt_m[name] = st["exp_avg"].detach().clone()
            opt_v[name] = st["exp_avg_sq"].detach().clone()
        else:
            opt_m[name] = torch.zeros_like(param)
            opt_v[name] = torch.zeros_like(param)
    return Checkpoint(config=cfg, epoch=epoch, step=step, params=params,
                      opt_m=opt_m, opt_v=opt_v,
                      rng_state=generator.get_state().numpy().tobytes())


def _flat_tensors(ckpt: Checkpoint) -> dict:
    tensors = {}
    for name, t in ckpt.params.items():
        tensors["model." + name] = t
    for name, t in ckpt.opt_m.items():
        tensors["adam.m." + name] = t
    for name, t in ckpt.opt_v.items():
        tensors["adam.v." + name] = t
    return tensors


def save_checkpoint(ckpt: Checkpoint, path):
    tensors = _flat_tensors(ckpt)
    entries = []
    blobs = []
    offset = 0
    for name in sorted(tensors):
        t = tensors[name].detach().cpu().contiguous()
        dtype_name = _TORCH_NAMES.get(t.dtype)
        if dtype_name is None:
            raise CheckpointError(f"unsupported dtype {t.dtype} for entry {name}")
        raw = t.numpy().astype(_NP_DTYPES[dtype_name], copy=False).tobytes()
        entries.append({"name": name, "dtype": dtype_name, "shape": list(t.shape),
                        "offset": offset, "nbytes": len(raw)})
        blobs.append(raw)
        offset += len(raw)
    manifest = {"config": ckpt.config.to_dict(), "epoch": ckpt.epoch,
                "step": ckpt.step, "rng_state": ckpt.rng_state.hex(),
                "entries": entries}
    payload = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(payload)))
        f.write(payload)
        for raw in blobs:
            f.write(raw)


def load_checkpoint(path, expected_model_config: ModelConfig | None = None) -> Checkpoint:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if len(data) < len(MAGIC) + 8:
        raise CheckpointError(f"{path}: file too short for header")
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: bad magic bytes")
    (manifest_len,) = struct.unpack("<Q", data[len(MAGIC):len(MAGIC) + 8])
    header_end = len(MAGIC) + 8
    if len(data) < header_end + manifest_len:
        raise CheckpointError(f"{path}: truncated manifest")
    try:
        manifest = json.loads(data[header_end:header_end + manifest_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: invalid manifest: {exc}") from exc
    for key in ("config", "epoch", "step", "rng_state", "entries"):
        if key not in manifest:
            raise CheckpointError(f"{path}: manifest missing field {key!r}")
    try:
        config = TrainConfig.from_dict(manifest["config"])
    except ConfigError as exc:
        raise CheckpointError(f"{path}: bad config echo: {exc}") from exc
    if expected_model_config is not None and config.model != expected_model_config:
        raise CheckpointError(
            f"{path}: checkpoint model config {config.model} does not match "
            f"requested {expected_model_config}")

    blob = data[header_end + manifest_len:]
    params, opt_m, opt_v = {}, {}, {}
    for entry in manifest["entries"]:
        name = entry.get("name")
        dtype = _NP_DTYPES.get(entry.get("dtype"))
        if not name or dtype is None:
            raise CheckpointError(f"{path}: malformed entry {entry!r}")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        expected_bytes = count * dtype.itemsize
        if entry["nbytes"] != expected_bytes:
            raise CheckpointError(
                f"{path}: entry {name} declares {entry['nbytes']} bytes "
                f"but shape {shape} needs {expected_bytes}")
        start, end = entry["offset"], entry["offset"] + entry["nbytes"]
        if end > len(blob):
            raise CheckpointError(f"{path}: truncated blob for entry {name}")
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=start)
        tensor = torch.from_numpy(arr.reshape(shape).copy())
        if name.startswith("model."):
            params[name[len("model."):]] = tensor
        elif name.startswith("adam.m."):
            opt_m[name[len("adam.m."):]] = tensor
        elif name.startswith("adam.v."):
            opt_v[name[len("adam.v."):]] = tensor
        else:
            raise CheckpointError(f"{path}: unknown entry namespace {name!r}")
    try:
        rng_state = bytes.fromhex(manifest["rng_state"])
    except ValueError as exc:
        raise CheckpointError(f"{path}: bad rng_state: {exc}") from exc
    return Checkpoint(config=config, epoch=int(manifest["epoch"]),
                      step=int(manifest["step"]), params=params,
                      opt_m=opt_m, opt_v=opt_v, rng_state=rng_state)
