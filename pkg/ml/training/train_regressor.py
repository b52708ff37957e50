"""
Model Training Module
=====================

Steering regressor used as the controller under test: a one-hidden-layer
tanh network trained with mini-batch gradient descent on mean squared error,
with hand-written backpropagation.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel
from sklearn.metrics import mean_absolute_error
from sklearn.model_selection import train_test_split

from lanebench.core.exceptions import ConfigError, MissingInputError, TrainingDivergenceError
from lanebench.schemas.campaign import TrainSpec
from ml.preprocessing.frame_features import PREPROCESSING_NAME, FrameFeatureExtractor

MODEL_FORMAT = "lanebench-mlp"
PARAM_NAMES = ("W1", "b1", "W2", "b2")
SATURATION_LEVEL = 0.99


@dataclass
class MlpParams:
    """Weights of an input-hidden-1 tanh/tanh network."""
    W1: np.ndarray  # (hidden, input)
    b1: np.ndarray  # (hidden,)
    W2: np.ndarray  # (1, hidden)
    b2: np.ndarray  # (1,)
    seed: int = 0

    @property
    def layer_sizes(self) -> List[int]:
        return [int(self.W1.shape[1]), int(self.W1.shape[0]), 1]

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "MlpParams":
        return MlpParams(*(getattr(self, n).copy() for n in PARAM_NAMES), seed=self.seed)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for a in self.arrays().values())


class EpochStats(BaseModel):
    epoch: int
    loss: float
    train_mae: float
    val_mae: Optional[float] = None


class TrainingReport(BaseModel):
    """Per-epoch training history of a learned controller."""
    layer_sizes: List[int]
    seed: int
    n_train: int
    n_val: int
    epochs: List[EpochStats] = []
    final_train_mae: float
    final_val_mae: Optional[float] = None


def init_params(input_size: int, hidden: int, seed: int = 0) -> MlpParams:
    """Xavier-uniform weights and zero biases, drawn from a seeded generator."""
    rng = np.random.default_rng(seed)
    limit1 = np.sqrt(6.0 / (input_size + hidden))
    limit2 = np.sqrt(6.0 / (hidden + 1))
    return MlpParams(
        W1=rng.uniform(-limit1, limit1, size=(hidden, input_size)),
        b1=np.zeros(hidden),
        W2=rng.uniform(-limit2, limit2, size=(1, hidden)),
        b2=np.zeros(1),
        seed=seed,
    )


def forward(params: MlpParams, X: np.ndarray) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
    """
    Forward pass.

    Args:
        params: Network weights
        X: (batch, input) features

    Returns:
        Predictions of shape (batch,) in [-1, 1] and the memory backward needs
    """
    z1 = X @ params.W1.T + params.b1
    a1 = np.tanh(z1)
    z2 = a1 @ params.W2.T + params.b2
    y = np.tanh(z2)[:, 0]
    return y, (X, a1, y)


def backward(params: MlpParams, memory: Tuple[np.ndarray, ...], dy: np.ndarray) -> Dict[str, np.ndarray]:
    """Gradients of a scalar loss given dLoss/dy for every sample."""
    X, a1, y = memory
    dz2 = (dy * (1.0 - y * y))[:, None]          # (B, 1)
    dW2 = dz2.T @ a1                             # (1, H)
    db2 = dz2.sum(axis=0)                        # (1,)
    da1 = dz2 @ params.W2                        # (B, H)
    dz1 = da1 * (1.0 - a1 * a1)
    dW1 = dz1.T @ X                              # (H, D)
    db1 = dz1.sum(axis=0)
    return {"W1": dW1, "b1": db1, "W2": dW2, "b2": db2}


def mse_loss_and_grads(params: MlpParams, X: np.ndarray, targets: np.ndarray) -> Tuple[float, Dict[str, np.ndarray]]:
    y, memory = forward(params, X)
    diff = y - targets
    loss = float(np.mean(diff * diff))
    dy = 2.0 * diff / X.shape[0]
    return loss, backward(params, memory, dy)


def predict(params: MlpParams, X: np.ndarray) -> np.ndarray:
    return forward(params, np.atleast_2d(X))[0]


def gradient_check(
    params: MlpParams,
    X: np.ndarray,
    targets: np.ndarray,
    n_probes: int = 10,
    seed: int = 0,
    step: float = 1e-6,
) -> List[Dict[str, float]]:
    """
    Compare analytic gradients with central finite differences.

    Probes ``n_probes`` random entries of every parameter array.

    Returns:
        One record per probe with the analytic and numeric derivative and
        their relative error
    """
    rng = np.random.default_rng(seed)
    _, grads = mse_loss_and_grads(params, X, targets)
    probes = []
    for name in PARAM_NAMES:
        array = getattr(params, name)
        for flat_index in rng.integers(0, array.size, size=n_probes):
            index = np.unravel_index(int(flat_index), array.shape)
            original = array[index]
            array[index] = original + step
            loss_plus, _ = mse_loss_and_grads(params, X, targets)
            array[index] = original - step
            loss_minus, _ = mse_loss_and_grads(params, X, targets)
            array[index] = original

            numeric = (loss_plus - loss_minus) / (2.0 * step)
            analytic = float(grads[name][index])
            scale = max(abs(analytic), abs(numeric))
            rel_error = 0.0 if scale == 0.0 else abs(analytic - numeric) / scale
            probes.append({
                "param": name,
                "index": int(flat_index),
                "analytic": analytic,
                "numeric": numeric,
                "abs_error": abs(analytic - numeric),
                "rel_error": rel_error,
            })
    return probes


def is_saturated(predictions: np.ndarray, targets: np.ndarray) -> bool:
    """True when all predictions sit at the same tanh rail and the targets do not."""
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.size == 0:
        return False
    pinned = np.all(np.abs(predictions) >= SATURATION_LEVEL) and np.ptp(predictions) <= 2.0 * (1.0 - SATURATION_LEVEL)
    return bool(pinned and not np.all(np.abs(targets) >= SATURATION_LEVEL))


def train_regressor(
    X: np.ndarray,
    y: np.ndarray,
    spec: Optional[TrainSpec] = None,
) -> Tuple[MlpParams, TrainingReport]:
    """
    Fit the steering regressor with momentum SGD.

    Args:
        X: (n, input) features
        y: (n,) steering labels in [-1, 1]
        spec: Hyperparameters

    Returns:
        Trained parameters and the training report

    Raises:
        ConfigError: on an empty training set
        TrainingDivergenceError: when the loss becomes non-finite, or when
            training ends with every prediction pinned at one end of the
            tanh range although the labels are not
    """
    spec = spec or TrainSpec()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ConfigError("training set is empty")

    if spec.validation_fraction > 0 and X.shape[0] >= 10:
        X_train, X_val, y_train, y_val = train_test_split(
            X, y, test_size=spec.validation_fraction, random_state=spec.seed, shuffle=True
        )
    else:
        X_train, X_val, y_train, y_val = X, X[:0], y, y[:0]

    params = init_params(X.shape[1], spec.hidden, spec.seed)
    velocity = {name: np.zeros_like(a) for name, a in params.arrays().items()}
    rng = np.random.default_rng(spec.seed)
    history: List[EpochStats] = []

    logger.info(
        f"Training {params.layer_sizes} regressor on {len(y_train)} frames "
        f"({len(y_val)} held out) for {spec.epochs} epochs"
    )

    n = X_train.shape[0]
    for epoch in range(1, spec.epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, spec.batch_size):
            batch = order[start:start + spec.batch_size]
            loss, grads = mse_loss_and_grads(params, X_train[batch], y_train[batch])
            if not np.isfinite(loss):
                raise TrainingDivergenceError(epoch, loss)
            epoch_loss += loss * len(batch)
            for name in PARAM_NAMES:
                velocity[name] = spec.momentum * velocity[name] - spec.learning_rate * grads[name]
                setattr(params, name, getattr(params, name) + velocity[name])

        epoch_loss /= n
        if not np.isfinite(epoch_loss) or not params.is_finite():
            raise TrainingDivergenceError(epoch, epoch_loss)

        train_mae = float(mean_absolute_error(y_train, predict(params, X_train)))
        val_mae = float(mean_absolute_error(y_val, predict(params, X_val))) if len(y_val) else None
        history.append(EpochStats(epoch=epoch, loss=epoch_loss, train_mae=train_mae, val_mae=val_mae))
        logger.debug(f"epoch {epoch}: loss={epoch_loss:.6f} train_mae={train_mae:.4f} val_mae={val_mae}")

    final_pred = predict(params, X_train)
    if history and is_saturated(final_pred, y_train):
        raise TrainingDivergenceError(
            len(history), history[-1].loss, reason="output saturated at a constant command"
        )

    final_train = float(mean_absolute_error(y_train, final_pred))
    final_val = float(mean_absolute_error(y_val, predict(params, X_val))) if len(y_val) else None
    report = TrainingReport(
        layer_sizes=params.layer_sizes,
        seed=spec.seed,
        n_train=int(len(y_train)),
        n_val=int(len(y_val)),
        epochs=history,
        final_train_mae=final_train,
        final_val_mae=final_val,
    )
    logger.info(f"Training finished: train MAE {final_train:.4f}, validation MAE {final_val}")
    return params, report


class RegressorTrainer:
    """
    Builds training sets from labeled datasets and fits the regressor.
    """

    def __init__(self, spec: Optional[TrainSpec] = None, extractor: Optional[FrameFeatureExtractor] = None):
        self.spec = spec or TrainSpec()
        self.extractor = extractor or FrameFeatureExtractor()

    def prepare_data(self, datasets: Sequence, stride: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Subsample frames of every dataset and extract features.

        Args:
            datasets: LabeledDataset instances
            stride: Keep every stride-th frame (defaults to spec.stride)

        Returns:
            Feature matrix X and label vector y
        """
        stride = stride or self.spec.stride
        features, labels = [], []
        for ds in datasets:
            features.append(self.extractor.transform_batch(ds.images[::stride]))
            labels.append(np.asarray(ds.labels[::stride], dtype=float))
        if not features:
            raise ConfigError("no training datasets")
        return np.concatenate(features), np.concatenate(labels)

    def train(self, datasets: Sequence) -> Tuple[MlpParams, TrainingReport]:
        X, y = self.prepare_data(datasets)
        return train_regressor(X, y, self.spec)


def save_model(params: MlpParams, path: Union[str, Path]) -> Path:
    """Write a JSON header line followed by little-endian float64 weights."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": MODEL_FORMAT,
        "version": 1,
        "layer_sizes": params.layer_sizes,
        "activations": ["tanh", "tanh"],
        "preprocessing": PREPROCESSING_NAME,
        "seed": params.seed,
        "dtype": "<f8",
        "order": list(PARAM_NAMES),
    }
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in params.arrays().values())
    with open(path, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        f.write(payload)
    logger.info(f"Model saved to {path}")
    return path


def load_model(path: Union[str, Path]) -> MlpParams:
    """Read a model file written by save_model."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(f"model file not found: {path}", path=str(path))
    raw = path.read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ConfigError(f"{path} has no model header")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise ConfigError(f"unreadable model header in {path}: {e}") from e
    if not isinstance(header, dict) or header.get("format") != MODEL_FORMAT:
        raise ConfigError(f"{path} is not a {MODEL_FORMAT} model file")

    try:
        n_in, n_hidden, _ = (int(n) for n in header["layer_sizes"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"{path} has malformed layer sizes: {e}") from e
    shapes = {"W1": (n_hidden, n_in), "b1": (n_hidden,), "W2": (1, n_hidden), "b2": (1,)}
    payload = raw[newline + 1:]
    if len(payload) % 8:
        raise ConfigError(f"model payload of {path} is not a whole number of float64 values")
    flat = np.frombuffer(payload, dtype="<f8")
    expected = sum(int(np.prod(s)) for s in shapes.values())
    if flat.size != expected:
        raise ConfigError(f"model payload has {flat.size} values, expected {expected}")

    arrays, offset = {}, 0
    for name in PARAM_NAMES:
        size = int(np.prod(shapes[name]))
        arrays[name] = flat[offset:offset + size].reshape(shapes[name]).astype(float)
        offset += size
    return MlpParams(**arrays, seed=int(header.get("seed", 0)))
