"""Dataset splitting, mini-batch training and evaluation."""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from ..errors import DivergenceError, ParameterError, SplitError
from ..gaf import GafImageSet
from ..windowing import WindowSet
from .layers import softmax_cross_entropy
from .model import NUM_CLASSES, AdamState, Model, ModelConfig, Variant, adam_step, build_model

log = logging.getLogger(__name__)


class SplitMode(str, Enum):
    BY_WINDOW = "window"
    BY_PARTICIPANT = "participant"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    epochs: int = 30
    split: tuple[float, float, float] = (0.70, 0.15, 0.15)
    split_mode: SplitMode = SplitMode.BY_WINDOW
    seed: int = 0
    standardize: bool = True
    patience: int | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "split_mode", SplitMode(self.split_mode))
        object.__setattr__(self, "split", tuple(float(s) for s in self.split))
        if not self.learning_rate > 0:
            raise ParameterError("learning rate must be positive")
        if len(self.split) != 3 or any(s <= 0 for s in self.split) or abs(sum(self.split) - 1) > 1e-9:
            raise ParameterError(f"split fractions must be three positive numbers summing to 1, got {self.split}")
        if self.batch_size < 1 or self.epochs < 1:
            raise ParameterError("batch size and epochs must be positive")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["split_mode"] = self.split_mode.value
        d["split"] = list(self.split)
        return d


@dataclass(frozen=True, eq=False)
class Dataset:
    """Inputs ``x`` (windows or images), class indices ``y`` and groups."""

    x: np.ndarray
    y: np.ndarray
    groups: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ParameterError("inputs and labels differ in length")
        if not self.groups:
            object.__setattr__(self, "groups", tuple("0" for _ in range(len(self.y))))

    def __len__(self):
        return len(self.y)

    @classmethod
    def from_windows(cls, ws: WindowSet) -> "Dataset":
        return cls(ws.windows, ws.label_indices, ws.groups)

    @classmethod
    def from_images(cls, images: GafImageSet) -> "Dataset":
        return cls(images.images, images.windows.label_indices, images.windows.groups)

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.x[idx], self.y[idx], tuple(self.groups[i] for i in idx))


def as_dataset(data) -> Dataset:
    if isinstance(data, Dataset):
        return data
    if isinstance(data, WindowSet):
        return Dataset.from_windows(data)
    if isinstance(data, GafImageSet):
        return Dataset.from_images(data)
    x, y = data
    return Dataset(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64))


def standardize_rows(x: np.ndarray) -> np.ndarray:
    """Zero-mean, unit-variance per sample; constant samples become zero."""
    flat = x.reshape(len(x), -1)
    mu = flat.mean(axis=1, keepdims=True)
    sd = flat.std(axis=1, keepdims=True)
    sd[sd == 0] = 1.0
    return ((flat - mu) / sd).reshape(x.shape)


def _allocate(n: int, fractions) -> tuple[int, int]:
    n_train = int(round(fractions[0] * n))
    n_val = int(round(fractions[1] * n))
    if n >= 3:
        n_train = max(1, min(n_train, n - 2))
        n_val = max(1, min(n_val, n - n_train - 1))
    return n_train, n_val


def split_indices(data: Dataset, cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded train/validation/test index split.

    By window: stratified per class. By participant: whole groups go to
    one split, so no participant's windows leak across splits.
    """
    rng = np.random.default_rng([cfg.seed, 1])
    parts = ([], [], [])
    if cfg.split_mode is SplitMode.BY_WINDOW:
        for c in range(NUM_CLASSES):
            idx = np.flatnonzero(data.y == c)
            idx = idx[rng.permutation(idx.size)]
            a, b = _allocate(idx.size, cfg.split)
            parts[0].append(idx[:a])
            parts[1].append(idx[a : a + b])
            parts[2].append(idx[a + b :])
    else:
        groups = np.array(data.groups)
        names = sorted(set(data.groups))
        if len(names) < 3:
            raise SplitError(f"participant split needs at least 3 participants, found {len(names)}")
        order = [names[i] for i in rng.permutation(len(names))]
        a, b = _allocate(len(names), cfg.split)
        for k, chunk in enumerate((order[:a], order[a : a + b], order[a + b :])):
            parts[k].append(np.flatnonzero(np.isin(groups, chunk)))
    train, val, test = (np.sort(np.concatenate(p)) if p else np.zeros(0, dtype=np.int64) for p in parts)
    missing = sorted(set(range(NUM_CLASSES)) - set(data.y[train].tolist()))
    if missing:
        raise SplitError(f"classes {missing} absent from the training split")
    return train, val, test


def evaluate(model: Model, data, batch_size: int = 256) -> tuple[float, np.ndarray]:
    """Accuracy and 4x4 confusion matrix (rows = true class)."""
    data = as_dataset(data)
    if len(data) == 0:
        raise ParameterError("cannot evaluate on an empty dataset")
    pred = model.predict(data.x, batch_size)
    confusion = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    np.add.at(confusion, (data.y, pred), 1)
    return float(np.trace(confusion) / confusion.sum()), confusion


@dataclass
class TrainReport:
    train_accuracy: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    test_accuracy: float | None = None
    test_confusion: list[list[int]] | None = None
    model_config: dict = field(default_factory=dict)
    train_config: dict = field(default_factory=dict)
    split_sizes: tuple[int, int, int] = (0, 0, 0)
    wall_seconds: float = 0.0
    stopped_reason: str = "completed"

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = asdict(self)
        d["split_sizes"] = list(self.split_sizes)
        if not include_timing:
            d.pop("wall_seconds")
        return d


def train(model_cfg: ModelConfig, train_cfg: TrainConfig, dataset) -> tuple[Model, TrainReport]:
    """Train a fresh model and report per-epoch accuracy curves.

    Train accuracy and loss are running averages over each epoch's
    mini-batches; validation accuracy is measured after each epoch.
    Deterministic for a fixed seed on a single thread.
    """
    data = as_dataset(dataset)
    if len(data) == 0:
        raise ParameterError("dataset is empty")
    if train_cfg.standardize and model_cfg.variant is Variant.RAW_1D:
        data = Dataset(standardize_rows(data.x), data.y, data.groups)
    tr, va, te = split_indices(data, train_cfg)
    model = build_model(model_cfg)
    report = TrainReport(model_config=model_cfg.to_dict(), train_config=train_cfg.to_dict(),
                         split_sizes=(len(tr), len(va), len(te)))
    state = AdamState(train_cfg.learning_rate, train_cfg.beta1, train_cfg.beta2, train_cfg.eps)
    rng = np.random.default_rng([train_cfg.seed, 2])
    xtr, ytr = data.x[tr], data.y[tr]
    best_val, stale = -1.0, 0
    started = time.perf_counter()
    batch_no = 0
    for epoch in range(train_cfg.epochs):
        order = rng.permutation(len(tr))
        loss_sum, correct = 0.0, 0
        for start in range(0, len(order), train_cfg.batch_size):
            idx = order[start : start + train_cfg.batch_size]
            logits = model.forward(xtr[idx])
            loss, dlogits = softmax_cross_entropy(logits, ytr[idx])
            if not np.isfinite(loss):
                report.wall_seconds = time.perf_counter() - started
                report.stopped_reason = f"diverged at batch {batch_no}"
                raise DivergenceError(f"non-finite loss in batch {batch_no} (epoch {epoch})",
                                      batch_index=batch_no, partial_report=report)
            model.backward(dlogits)
            params = [p for _, p in model.named_params()]
            grads = [g for _, g in model.named_grads()]
            adam_step(params, grads, state)
            loss_sum += loss * len(idx)
            correct += int((logits.argmax(axis=1) == ytr[idx]).sum())
            batch_no += 1
        report.train_loss.append(loss_sum / len(tr))
        report.train_accuracy.append(correct / len(tr))
        val_acc = evaluate(model, data.subset(va))[0] if len(va) else float("nan")
        report.val_accuracy.append(val_acc)
        log.debug("epoch %d loss %.4f train %.3f val %.3f", epoch + 1, report.train_loss[-1],
                  report.train_accuracy[-1], val_acc)
        if train_cfg.patience is not None and len(va):
            if val_acc > best_val:
                best_val, stale = val_acc, 0
            else:
                stale += 1
                if stale >= train_cfg.patience:
                    report.stopped_reason = f"early stop after {epoch + 1} epochs (patience {train_cfg.patience})"
                    break
    if len(te):
        acc, conf = evaluate(model, data.subset(te))
        report.test_accuracy = acc
        report.test_confusion = conf.tolist()
    report.wall_seconds = time.perf_counter() - started
    return model, report
