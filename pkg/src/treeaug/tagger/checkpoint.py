"""Tagger checkpoints.

A checkpoint is an uncompressed ``.npz`` archive with these members:

``__magic__``
    uint8 bytes of ``b"TREEAUG-TAGGER"``.
``__meta__``
    UTF-8 JSON: ``{"format_version", "config", "char_vocab", "tag_vocab",
    "shapes", "dtype"}``.  ``shapes`` maps every parameter name to its shape.
``param/<name>``
    one array per parameter.
"""

from __future__ import annotations

import json

import numpy as np

from .model import TaggerConfig, TaggerModel, param_shapes

MAGIC = b"TREEAUG-TAGGER"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, model: TaggerModel) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "char_vocab": model.char_vocab,
        "tag_vocab": model.tag_vocab,
        "shapes": {k: list(v.shape) for k, v in model.params.items()},
        "dtype": model.config.dtype,
    }
    arrays = {f"param/{k}": v for k, v in model.params.items()}
    arrays["__magic__"] = np.frombuffer(MAGIC, dtype=np.uint8)
    arrays["__meta__"] = np.frombuffer(json.dumps(meta, ensure_ascii=False).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_checkpoint(path) -> TaggerModel:
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"{path}: not a checkpoint ({exc})") from None
    with data:
        if "__magic__" not in data.files or data["__magic__"].tobytes() != MAGIC:
            raise CheckpointError(f"{path}: bad magic header")
        meta = json.loads(data["__meta__"].tobytes().decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {meta.get('format_version')}")
        config = TaggerConfig.from_dict(meta["config"])
        expected = param_shapes(config, len(meta["char_vocab"]), len(meta["tag_vocab"]))
        params = {}
        for name, shape in expected.items():
            key = f"param/{name}"
            if key not in data.files:
                raise CheckpointError(f"{path}: missing parameter {name}")
            arr = data[key]
            if tuple(arr.shape) != tuple(shape) or list(shape) != meta["shapes"].get(name):
                raise CheckpointError(f"{path}: parameter {name} has shape {arr.shape}, expected {shape}")
            params[name] = arr
    return TaggerModel(config, meta["char_vocab"], meta["tag_vocab"], params=params)
