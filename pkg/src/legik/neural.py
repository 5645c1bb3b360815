"""A 2-10-3 multilayer perceptron mapping toe position to joint angles.

Everything is plain numpy: dataset generation through forward kinematics,
min/max normalisation to [-1, 1], mini-batch gradient descent with momentum
and early stopping, inference and a portable text serialisation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .kinematics import KinematicModel, JointVector, fk_points, joints_from_unit
from .solvers.base import SolveRequest, SolveResult, Stopwatch
from .validation import check_joint_limits, check_targets

N_INPUTS, N_HIDDEN, N_OUTPUTS = 2, 10, 3
DEFAULT_SAMPLES = 127_282
DATASET_FILTERS = ("none", "knee_positive")
SPLIT_FRACTIONS = (0.70, 0.15, 0.15)

# Joint ranges of the default training set.  With the ankle held fixed the
# leg is a two-link chain and, on this knee-flexed patch, the position-to-
# joint map is single valued, which a 10-unit network can learn to
# millimetre accuracy.  The patch covers the default gait trajectory.
SINGLE_BRANCH_LIMITS_DEG = ((0.0, 70.0), (25.0, 100.0), (60.0, 60.0))

_FORMAT_TAG = "mlp-v1"


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch}: loss={loss!r}; lower the learning rate")


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _span(lo, hi):
    # a constant column (e.g. a pinned joint) normalises to -1 instead of dividing by zero
    s = np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float)
    return np.where(s > 0, s, 1.0)


@dataclass
class Mlp:
    """Parameters of the network plus the input/output scaling it was trained with."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    x_min: np.ndarray
    x_max: np.ndarray
    y_min: np.ndarray
    y_max: np.ndarray

    def __post_init__(self):
        for name in ("W1", "b1", "W2", "b2", "x_min", "x_max", "y_min", "y_max"):
            arr = np.array(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite values in {name}")
            setattr(self, name, arr)
        h = self.W1.shape[0]
        shapes = {"W1": (h, N_INPUTS), "b1": (h,), "W2": (N_OUTPUTS, h), "b2": (N_OUTPUTS,),
                  "x_min": (N_INPUTS,), "x_max": (N_INPUTS,), "y_min": (N_OUTPUTS,), "y_max": (N_OUTPUTS,)}
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")

    @classmethod
    def initialize(cls, x_min, x_max, y_min, y_max, rng, hidden: int = N_HIDDEN) -> "Mlp":
        """Weights and biases uniform in +-1/sqrt(fan_in)."""
        r1, r2 = 1.0 / math.sqrt(N_INPUTS), 1.0 / math.sqrt(hidden)
        return cls(
            W1=rng.uniform(-r1, r1, (hidden, N_INPUTS)), b1=rng.uniform(-r1, r1, hidden),
            W2=rng.uniform(-r2, r2, (N_OUTPUTS, hidden)), b2=rng.uniform(-r2, r2, N_OUTPUTS),
            x_min=x_min, x_max=x_max, y_min=y_min, y_max=y_max,
        )

    @property
    def params(self) -> list:
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "Mlp":
        return Mlp(*(np.array(a) for a in (self.W1, self.b1, self.W2, self.b2,
                                              self.x_min, self.x_max, self.y_min, self.y_max)))

    def normalize_inputs(self, X):
        return 2.0 * (np.asarray(X, dtype=float) - self.x_min) / _span(self.x_min, self.x_max) - 1.0

    def normalize_outputs(self, Y):
        return 2.0 * (np.asarray(Y, dtype=float) - self.y_min) / _span(self.y_min, self.y_max) - 1.0

    def denormalize_outputs(self, Yn):
        return (np.asarray(Yn, dtype=float) + 1.0) * 0.5 * _span(self.y_min, self.y_max) + self.y_min

    def forward_normalized(self, Xn):
        return sigmoid(Xn @ self.W1.T + self.b1) @ self.W2.T + self.b2

    def __call__(self, X) -> np.ndarray:
        """Joint angles (n, 3) for toe positions (n, 2), without clamping."""
        return self.denormalize_outputs(self.forward_normalized(self.normalize_inputs(X)))


class Dataset(NamedTuple):
    inputs: np.ndarray    # (n, 2) toe positions, metres
    outputs: np.ndarray   # (n, 3) joint angles, radians
    train: np.ndarray     # index arrays, disjoint and exhaustive
    validation: np.ndarray
    test: np.ndarray

    def __len__(self) -> int:
        return len(self.inputs)

    def part(self, name: str):
        idx = getattr(self, name)
        return self.inputs[idx], self.outputs[idx]


def split_indices(n: int, rng) -> tuple:
    """Random 70/15/15 split; validation and test get floor(0.15 n) each."""
    n_val = int(math.floor(SPLIT_FRACTIONS[1] * n))
    n_test = int(math.floor(SPLIT_FRACTIONS[2] * n))
    perm = rng.permutation(n)
    n_train = n - n_val - n_test
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def dataset_from_arrays(inputs, outputs, seed: int = 0) -> Dataset:
    X = check_array(inputs, dtype=float)
    Y = check_array(outputs, dtype=float)
    if X.shape[1] != N_INPUTS or Y.shape[1] != N_OUTPUTS or len(X) != len(Y):
        raise ValueError("expected (n, 2) inputs and (n, 3) outputs of equal length")
    return Dataset(X, Y, *split_indices(len(X), np.random.default_rng(seed)))


def generate_dataset(model: KinematicModel, n: int = DEFAULT_SAMPLES, seed: int = 0, limits=None,
                     dataset_filter: str = "knee_positive") -> Dataset:
    """Monte-Carlo joint samples pushed through forward kinematics.

    ``knee_positive`` keeps only samples with a flexed knee (``sin theta2 >= 0``);
    rejected draws are replaced so exactly ``n`` records are returned.
    ``limits`` may pin a joint by giving equal bounds.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if dataset_filter not in DATASET_FILTERS:
        raise ValueError(f"dataset_filter must be one of {DATASET_FILTERS}")
    lim = model.limits if limits is None else check_joint_limits(limits)
    rng = np.random.default_rng(seed)
    kept, total = [], 0
    for _ in range(1000):
        Q = joints_from_unit(model, rng.random((n, 3)), lim)
        if dataset_filter == "knee_positive":
            Q = Q[np.sin(Q[:, 1]) >= 0.0]
        kept.append(Q)
        total += len(Q)
        if total >= n:
            break
    else:
        raise ValueError("dataset filter rejects (almost) every sample in the given limits")
    Q = np.vstack(kept)[:n]
    return Dataset(fk_points(model, Q), Q, *split_indices(n, rng))


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 500
    learning_rate: float = 0.1
    momentum: float = 0.9
    batch_size: int = 32
    patience: int = 50
    seed: int = 0
    # learning rate follows a half cosine from learning_rate down to lr_floor
    schedule: str = "cosine"
    lr_floor: float = 1e-4

    def __post_init__(self):
        if self.epochs < 0 or self.learning_rate <= 0:
            raise ValueError("epochs must be >= 0 and learning_rate > 0")
        if self.batch_size < 1 or self.patience < 1:
            raise ValueError("batch_size and patience must be >= 1")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.schedule not in ("cosine", "constant"):
            raise ValueError("schedule must be 'cosine' or 'constant'")

    def rate(self, epoch: int) -> float:
        if self.schedule == "constant":
            return self.learning_rate
        return self.lr_floor + (self.learning_rate - self.lr_floor) * 0.5 * (1 + math.cos(math.pi * epoch / self.epochs))


@dataclass
class TrainHistory:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)
    best_val_mse: list = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False


def loss(mlp: Mlp, Xn, Yn) -> float:
    """Mean squared error over samples and outputs, in normalised units."""
    return float(np.mean((mlp.forward_normalized(Xn) - Yn) ** 2))


def gradients(mlp: Mlp, Xn, Yn) -> list:
    """Backpropagated gradients of :func:`loss` w.r.t. ``[W1, b1, W2, b2]``."""
    h = sigmoid(Xn @ mlp.W1.T + mlp.b1)
    d = 2.0 * (h @ mlp.W2.T + mlp.b2 - Yn) / Yn.size
    dh = (d @ mlp.W2) * h * (1.0 - h)
    return [dh.T @ Xn, dh.sum(0), d.T @ h, d.sum(0)]


def numerical_gradients(mlp: Mlp, Xn, Yn, eps: float = 1e-6) -> list:
    out = []
    for p in mlp.params:
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            old = p[idx]
            p[idx] = old + eps
            up = loss(mlp, Xn, Yn)
            p[idx] = old - eps
            down = loss(mlp, Xn, Yn)
            p[idx] = old
            g[idx] = (up - down) / (2 * eps)
        out.append(g)
    return out


def gradient_check(mlp: Mlp, Xn, Yn, eps: float = 1e-6) -> float:
    """Largest relative error ``|a - n| / (|a| + |n|)`` over the four parameter blocks."""
    worst = 0.0
    for a, num in zip(gradients(mlp, Xn, Yn), numerical_gradients(mlp, Xn, Yn, eps)):
        denom = np.linalg.norm(a) + np.linalg.norm(num)
        if denom > 0:
            worst = max(worst, float(np.linalg.norm(a - num) / denom))
    return worst


def init_mlp(data: Dataset, seed: int = 0, hidden: int = N_HIDDEN) -> Mlp:
    """Fresh network whose scaling is fitted on the training split only."""
    X, Y = data.part("train")
    if len(X) == 0:
        raise ValueError("training split is empty")
    return Mlp.initialize(X.min(0), X.max(0), Y.min(0), Y.max(0), np.random.default_rng(seed), hidden)


def train(mlp: Mlp, data: Dataset, cfg: TrainConfig = TrainConfig()) -> tuple:
    """Mini-batch gradient descent with momentum and early stopping.

    Returns ``(best_mlp, history)`` where ``best_mlp`` holds the parameters
    with the lowest validation MSE seen (the initial network included).

    Raises
    ------
    TrainingDivergedError
        If the training loss becomes NaN or infinite.
    """
    Xtr, Ytr = data.part("train")
    Xva, Yva = data.part("validation")
    if len(Xtr) == 0:
        raise ValueError("training split is empty")
    if len(Xva) == 0:
        Xva, Yva = Xtr, Ytr
    net = mlp.copy()
    Xn, Yn = net.normalize_inputs(Xtr), net.normalize_outputs(Ytr)
    Xvn, Yvn = net.normalize_inputs(Xva), net.normalize_outputs(Yva)
    rng = np.random.default_rng(cfg.seed)
    velocity = [np.zeros_like(p) for p in net.params]

    hist = TrainHistory()
    best, best_val = net.copy(), loss(net, Xvn, Yvn)
    hist.best_val_mse.append(best_val)
    since_best = 0
    n = len(Xn)
    for epoch in range(cfg.epochs):
        lr = cfg.rate(epoch)
        perm = rng.permutation(n)
        # divergence is detected below, so overflow warnings are redundant
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(0, n, cfg.batch_size):
                i = perm[s:s + cfg.batch_size]
                for p, v, g in zip(net.params, velocity, gradients(net, Xn[i], Yn[i])):
                    v *= cfg.momentum
                    v -= lr * g
                    p += v
            tr, va = loss(net, Xn, Yn), loss(net, Xvn, Yvn)
        if not (math.isfinite(tr) and math.isfinite(va)):
            raise TrainingDivergedError(epoch, tr)
        hist.train_mse.append(tr)
        hist.val_mse.append(va)
        if va < best_val:
            best, best_val, since_best = net.copy(), va, 0
            hist.best_epoch = epoch + 1
        else:
            since_best += 1
        hist.best_val_mse.append(best_val)
        if since_best >= cfg.patience:
            hist.stopped_early = True
            break
    return best, hist


def extrapolation_mask(mlp: Mlp, X) -> np.ndarray:
    """True for inputs outside the box spanned by the training inputs."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.any((X < mlp.x_min) | (X > mlp.x_max), axis=1)


def infer_many(mlp: Mlp, X, limits=None) -> np.ndarray:
    Q = mlp(np.atleast_2d(np.asarray(X, dtype=float)))
    if limits is not None:
        lim = np.asarray(limits, dtype=float)
        Q = np.clip(Q, lim[:, 0], lim[:, 1])
    return Q


def infer(mlp: Mlp, target, limits=None) -> JointVector:
    """Joint vector for one target; clamped into ``limits`` when given.

    Targets outside the training box are still evaluated; use
    :func:`extrapolation_mask` to detect them.
    """
    return JointVector(*infer_many(mlp, [tuple(target)[:2]], limits)[0])


def nn_solve(request: SolveRequest, mlp: Mlp, clamp: bool = True) -> SolveResult:
    limits = request.limits if clamp else None
    with Stopwatch() as sw:
        Q = infer_many(mlp, request.targets, limits)
    result = SolveResult.from_joints(
        "nn", request.model, request.targets, Q, np.zeros(len(request), dtype=int),
        np.zeros(len(request), dtype=bool), sw.elapsed,
        extrapolated=int(extrapolation_mask(mlp, request.targets).sum()),
    )
    result.converged = result.position_errors < request.options.position_tolerance
    return result


def dumps(mlp: Mlp) -> str:
    """Text form: a header with the layer sizes, then one row-major array per line."""
    h = mlp.W1.shape[0]
    lines = [f"{_FORMAT_TAG} {N_INPUTS} {h} {N_OUTPUTS}"]
    for name in ("W1", "b1", "W2", "b2", "x_min", "x_max", "y_min", "y_max"):
        lines.append(name + " " + " ".join(repr(float(v)) for v in getattr(mlp, name).ravel()))
    return "\n".join(lines) + "\n"


def loads(text: str) -> Mlp:
    rows = [ln.split() for ln in text.strip().splitlines()]
    if not rows or rows[0][0] != _FORMAT_TAG or len(rows[0]) != 4:
        raise ValueError("not a saved network (bad header)")
    n_in, h, n_out = (int(v) for v in rows[0][1:])
    if (n_in, n_out) != (N_INPUTS, N_OUTPUTS):
        raise ValueError(f"expected a {N_INPUTS}-h-{N_OUTPUTS} network, got {n_in}-{h}-{n_out}")
    shapes = {"W1": (h, n_in), "b1": (h,), "W2": (n_out, h), "b2": (n_out,),
              "x_min": (n_in,), "x_max": (n_in,), "y_min": (n_out,), "y_max": (n_out,)}
    arrays = {}
    for row in rows[1:]:
        name = row[0]
        if name not in shapes:
            raise ValueError(f"unknown array {name!r} in saved network")
        arrays[name] = np.array([float(v) for v in row[1:]]).reshape(shapes[name])
    missing = set(shapes) - set(arrays)
    if missing:
        raise ValueError(f"saved network lacks {sorted(missing)}")
    return Mlp(**arrays)


def save(mlp: Mlp, path) -> None:
    Path(path).write_text(dumps(mlp))


def load(path) -> Mlp:
    return loads(Path(path).read_text())


class MLPInverseKinematics(RegressorMixin, BaseEstimator):
    """Regressor from toe positions (n, 2) to joint angles (n, 3).

    ``fit`` splits the data 70/15/15, uses the validation part for early
    stopping and keeps the best network in ``mlp_``.  ``predict`` clamps to
    ``joint_limits`` when they are given.
    """

    def __init__(self, hidden=N_HIDDEN, epochs=500, learning_rate=0.1, momentum=0.9, batch_size=32,
                 patience=50, schedule="cosine", joint_limits=None, seed=0):
        self.hidden = hidden
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.batch_size = batch_size
        self.patience = patience
        self.schedule = schedule
        self.joint_limits = joint_limits
        self.seed = seed

    def fit(self, X, y):
        data = dataset_from_arrays(X, y, self.seed)
        cfg = TrainConfig(epochs=self.epochs, learning_rate=self.learning_rate, momentum=self.momentum,
                          batch_size=self.batch_size, patience=self.patience, seed=self.seed,
                          schedule=self.schedule)
        self.mlp_, self.history_ = train(init_mlp(data, self.seed, self.hidden), data, cfg)
        self.dataset_ = data
        return self

    def predict(self, X):
        check_is_fitted(self, "mlp_")
        X = check_targets(X)
        lim = None if self.joint_limits is None else check_joint_limits(self.joint_limits)
        return infer_many(self.mlp_, X, lim)
