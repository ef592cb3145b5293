"""Mini-batch training with the reference hyperparameters, and argmax
evaluation into a confusion matrix.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .autodiff import GradTape, Tensor
from .metrics import ConfusionMatrix
from .model import ThreeStreamModel
from .optim import SgdState, sgd_step
from .skeleton_io import SkeletonClip


@dataclass
class Hyperparams:
    """Training settings; defaults follow the reference configuration
    (SGD, lr 0.01, momentum 0.9, batch size 32, 100 epochs)."""

    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 32
    epochs: int = 100
    seed: int = 0


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_accuracy: float


class TrainingDiverged(RuntimeError):
    def __init__(self, epoch: int, batch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}, batch {batch}")
        self.epoch = epoch
        self.batch = batch


def _stack(clips: list[SkeletonClip]) -> tuple[np.ndarray, np.ndarray]:
    data = np.stack([c.data for c in clips])
    labels = np.array([c.label for c in clips], dtype=np.int64)
    return data, labels


def train(model: ThreeStreamModel, train_clips: list[SkeletonClip],
          val_clips: list[SkeletonClip], hp: Hyperparams) -> list[EpochRecord]:
    """SGD over seeded shuffled mini-batches; the model is updated in
    place and the last epoch's weights are kept (no early stopping).

    Returns one record per epoch with the mean train loss and the
    validation accuracy. Bit-reproducible for fixed seeds and config.
    """
    if not train_clips or not val_clips:
        raise ValueError("train: both splits must be non-empty")
    if hp.batch_size > len(train_clips):
        raise ValueError(
            f"train: batch_size {hp.batch_size} exceeds train size {len(train_clips)}"
        )
    data, labels = _stack(train_clips)
    n = len(train_clips)
    shuffle_rng = np.random.default_rng([hp.seed, 0])
    mask_rng = np.random.default_rng([hp.seed, 1])
    params = model.param_tensors()
    state = SgdState(learning_rate=hp.learning_rate, momentum=hp.momentum)
    history = []
    for epoch in range(hp.epochs):
        perm = shuffle_rng.permutation(n)
        loss_sum = 0.0
        for batch_idx, start in enumerate(range(0, n, hp.batch_size)):
            take = perm[start:start + hp.batch_size]
            with GradTape() as tape:
                probs = model.forward(Tensor(data[take]), training=True, rng=mask_rng)
                loss = ad.cross_entropy(probs, labels[take])
            if not np.isfinite(loss.item()):
                raise TrainingDiverged(epoch, batch_idx)
            grads = tape.gradients(loss, params)
            sgd_step(params, grads, state)
            loss_sum += loss.item() * len(take)
        cm = evaluate(model, val_clips)
        val_acc = 100.0 * float(np.trace(cm.counts)) / cm.total
        history.append(EpochRecord(epoch=epoch, train_loss=loss_sum / n, val_accuracy=val_acc))
    return history


def evaluate(model: ThreeStreamModel, clips: list[SkeletonClip],
             class_names: list[str] | None = None,
             batch_size: int = 256) -> ConfusionMatrix:
    """Argmax predictions with dropout and masking disabled; the model
    is not modified."""
    if not clips:
        raise ValueError("evaluate: empty clip set")
    data, labels = _stack(clips)
    k = model.config.num_classes
    counts = np.zeros((k, k), dtype=np.int64)
    for start in range(0, len(clips), batch_size):
        batch = data[start:start + batch_size]
        probs = model.forward(Tensor(batch), training=False)
        preds = probs.data.argmax(axis=1)
        for y, p in zip(labels[start:start + batch_size], preds):
            counts[y, p] += 1
    return ConfusionMatrix(counts=counts, class_names=class_names or [])


def write_history(path: str | Path, history: list[EpochRecord]) -> None:
    """Per-epoch records as delimited text; floats keep full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_accuracy"])
        for rec in history:
            writer.writerow([rec.epoch, repr(rec.train_loss), repr(rec.val_accuracy)])


def read_history(path: str | Path) -> list[EpochRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            EpochRecord(
                epoch=int(row["epoch"]),
                train_loss=float(row["train_loss"]),
                val_accuracy=float(row["val_accuracy"]),
            )
            for row in reader
        ]
