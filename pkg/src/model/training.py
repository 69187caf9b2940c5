"""Mini-batch training loop with learning-rate annealing and early stopping."""

import csv
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from ..models import EpochRecord, MenetConfig, TrainingHistory
from ..utils.logger import logger
from ..validators import NumericalError, ValidationError, validate_finite
from .menet import MenetModel, Views, select_rows, view_rows
from .optim import make_optimizer


def accuracy(model: MenetModel, views: Views, labels: np.ndarray) -> float:
    """Fraction of users whose predicted class equals the label."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return 0.0
    return float(np.mean(model.predict(views) == labels))


class EarlyStopping:
    """Stop when validation accuracy has not strictly improved for ``patience`` epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_accuracy = -np.inf
        self.best_epoch = 0
        self.counter = 0

    def update(self, epoch: int, val_accuracy: float) -> bool:
        """Record an epoch; True if it is the new best."""
        if val_accuracy > self.best_accuracy:
            self.best_accuracy = val_accuracy
            self.best_epoch = epoch
            self.counter = 0
            return True
        self.counter += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.counter >= self.patience


def annealed_lr(cfg: MenetConfig, epoch: int) -> float:
    """Learning rate for a 1-based epoch: α · factor^((epoch-1) // every)."""
    return cfg.learning_rate * cfg.anneal_factor ** ((epoch - 1) // cfg.anneal_every)


def train(
    model: MenetModel,
    train_views: Views,
    train_labels: np.ndarray,
    val_views: Views,
    val_labels: np.ndarray,
    cfg: Optional[MenetConfig] = None
) -> Tuple[MenetModel, TrainingHistory]:
    """
    Train MENET with mini-batches and restore the best-validation weights.

    Each epoch shuffles the training rows with a generator seeded by
    (seed, epoch), steps the optimizer once per batch, then scores the
    validation split. The learning rate shrinks by ``anneal_factor`` every
    ``anneal_every`` epochs.

    Args:
        model: Initialized model
        train_views: Training features per view
        train_labels: Training class ids
        val_views: Validation features per view
        val_labels: Validation class ids
        cfg: Training settings; the model's config when None

    Returns:
        (model holding the best weights, per-epoch history)

    Raises:
        ValidationError: If the validation split is empty
        NumericalError: If the loss or a parameter stops being finite
    """
    cfg = cfg or model.config
    train_labels = np.asarray(train_labels, dtype=np.int64)
    val_labels = np.asarray(val_labels, dtype=np.int64)
    n = view_rows(train_views)
    if n != train_labels.size:
        raise ValidationError(f"{n} training rows but {train_labels.size} labels")
    if val_labels.size == 0:
        raise ValidationError("Validation split is empty")

    optimizer = make_optimizer(cfg.optimizer, model.params, cfg.learning_rate)
    model.optimizer = optimizer
    stopper = EarlyStopping(cfg.patience)
    best_params = model.snapshot()
    best_state = optimizer.state()
    best_t = 0
    history = TrainingHistory()

    logger.info(
        "training",
        "training_started",
        train_rows=n,
        validation_rows=int(val_labels.size),
        views=model.views,
        optimizer=cfg.optimizer,
        learning_rate=cfg.learning_rate,
        batch_size=cfg.batch_size
    )

    for epoch in range(1, cfg.max_epochs + 1):
        lr = annealed_lr(cfg, epoch)
        optimizer.lr = lr
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)

        data_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            batch_loss, grads = model.backward(select_rows(train_views, rows), train_labels[rows])
            if not np.isfinite(batch_loss):
                logger.error("training", "loss_not_finite", epoch=epoch, batch_start=start)
                raise NumericalError(f"Loss became non-finite at epoch {epoch} (batch starting at row {start})")
            optimizer.step(model.params, grads)
            validate_finite(model.params, f"epoch {epoch}")
            data_loss += batch_loss

        train_loss = data_loss + model.decay_term()
        val_accuracy = accuracy(model, val_views, val_labels)
        model.epoch = epoch
        history.records.append(
            EpochRecord(epoch=epoch, train_loss=train_loss, val_accuracy=val_accuracy, lr=lr)
        )
        logger.debug(
            "training",
            "epoch_completed",
            epoch=epoch,
            train_loss=train_loss,
            val_accuracy=val_accuracy,
            lr=lr
        )

        if stopper.update(epoch, val_accuracy):
            best_params = model.snapshot()
            best_state = optimizer.state()
            best_t = optimizer.t
        elif stopper.should_stop:
            history.stopped_early = True
            break

    model.restore(best_params)
    optimizer.load_state(best_state, best_t)
    model.epoch = stopper.best_epoch
    history.best_epoch = stopper.best_epoch
    history.best_val_accuracy = float(stopper.best_accuracy)

    logger.info(
        "training",
        "training_completed",
        epochs_run=len(history.records),
        best_epoch=history.best_epoch,
        best_val_accuracy=history.best_val_accuracy,
        stopped_early=history.stopped_early
    )
    return model, history


def write_history_csv(history: TrainingHistory, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_accuracy", "lr"])
        for r in history.records:
            writer.writerow([r.epoch, repr(r.train_loss), repr(r.val_accuracy), repr(r.lr)])
