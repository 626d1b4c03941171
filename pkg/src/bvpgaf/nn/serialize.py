"""Save and restore model weights in the shared tensor container."""

from __future__ import annotations

from pathlib import Path

from .. import container
from ..errors import ContainerError
from .model import Model, ModelConfig, build_model


def save_weights(model: Model, path: str | Path) -> None:
    container.save(path, model.named_params(), {"kind": "model", "model_config": model.config.to_dict()})


def load_weights(path: str | Path) -> Model:
    tensors, meta = container.load(path)
    if meta.get("kind") != "model":
        raise ContainerError(f"{path} does not hold model weights")
    model = build_model(ModelConfig.from_dict(meta["model_config"]), init=False)
    model.set_params([t for _, t in tensors])
    return model
