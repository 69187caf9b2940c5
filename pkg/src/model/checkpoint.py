"""Binary MENET checkpoint: magic, version byte, JSON header, raw float64 blocks."""

import json
import struct
from pathlib import Path

import numpy as np

from ..models import MenetConfig
from ..utils.logger import logger
from ..validators import ValidationError
from .menet import MenetModel
from .optim import make_optimizer

MAGIC = b"MENETCK"
VERSION = 1
_HEADER_LENGTH = struct.Struct(">I")
_DTYPE = np.dtype("<f8")


def save_checkpoint(model: MenetModel, path: Path) -> None:
    """
    Write parameters and optimizer moments.

    The header echoes the config, the view dimensions, m, the epoch and the
    name and shape of every block that follows, in order.
    """
    blocks = [(name, model.params[name]) for name in model.param_names()]
    optimizer = {"name": model.config.optimizer, "t": 0, "lr": model.config.learning_rate}
    if model.optimizer is not None:
        state = model.optimizer.state()
        blocks += sorted(state.items())
        optimizer = {"name": model.optimizer.name, "t": model.optimizer.t, "lr": model.optimizer.lr}

    header = json.dumps({
        "config": model.config.model_dump(mode="json"),
        "views": model.views,
        "dims": model.dims,
        "m": model.m,
        "epoch": model.epoch,
        "optimizer": optimizer,
        "blocks": [[name, list(value.shape)] for name, value in blocks],
    }, sort_keys=True).encode("utf-8")

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(bytes([VERSION]))
        f.write(_HEADER_LENGTH.pack(len(header)))
        f.write(header)
        for _, value in blocks:
            f.write(np.ascontiguousarray(value, dtype=_DTYPE).tobytes())

    logger.info("checkpoint", "checkpoint_saved", path=path, epoch=model.epoch, blocks=len(blocks))


def load_checkpoint(path: Path) -> MenetModel:
    """
    Rebuild a model, with its optimizer state, from a checkpoint.

    Raises:
        ValidationError: If the file is missing, malformed, not a checkpoint or of another version
    """
    if not path.is_file():
        raise ValidationError(f"Checkpoint not found: {path}")

    raw = path.read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise ValidationError(f"Not a MENET checkpoint: {path}")
    if len(raw) == len(MAGIC):
        raise ValidationError(f"Truncated checkpoint: {path}")
    version = raw[len(MAGIC)]
    if version != VERSION:
        raise ValidationError(f"Unsupported checkpoint version {version} in {path}")
    try:
        model = _parse(raw, path)
    except (struct.error, ValueError, KeyError, TypeError) as e:
        raise ValidationError(f"Malformed checkpoint {path}: {e!r}") from e

    logger.info("checkpoint", "checkpoint_loaded", path=path, epoch=model.epoch)
    return model


def _parse(raw: bytes, path: Path) -> MenetModel:
    offset = len(MAGIC) + 1
    (header_length,) = _HEADER_LENGTH.unpack_from(raw, offset)
    offset += _HEADER_LENGTH.size
    header = json.loads(raw[offset:offset + header_length].decode("utf-8"))
    offset += header_length

    cfg = MenetConfig.model_validate(header["config"])
    model = MenetModel(cfg, header["dims"], header["m"], init=False)
    model.epoch = header["epoch"]

    arrays = {}
    for name, shape in header["blocks"]:
        count = int(np.prod(shape)) if shape else 1
        if offset + count * _DTYPE.itemsize > len(raw):
            raise ValidationError(f"Truncated checkpoint: {path}")
        arrays[name] = np.frombuffer(raw, dtype=_DTYPE, count=count, offset=offset).reshape(shape).copy()
        offset += count * _DTYPE.itemsize

    model.restore(arrays)
    opt = header["optimizer"]
    model.optimizer = make_optimizer(opt["name"], model.params, opt["lr"])
    if opt["t"]:
        model.optimizer.load_state(arrays, opt["t"])
    return model
