"""Desk-scale two-domain experiment: supervised source plus unlabeled target.

A softmax-linear classifier is trained by mini-batch gradient descent on

    mean cross-entropy(source batch) + lam * target_loss(target batch),

where the target loss is any of the four batch losses applied to the
softmax outputs of an unlabeled, distribution-shifted target batch.  The
linear model keeps runs under a second and isolates the effect of the
target term: with lam = 0 every loss kind trains bit-identically.

Data are isotropic Gaussian blobs.  Class centers sit at the vertices of a
regular simplex (pairwise equidistant, so no class is geometrically
privileged), scaled by ``center_spread``; target points use the same
centers plus a constant shift vector.  Target labels are generated but used
for evaluation only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import IO, Optional

import numpy as np

from .losses import LossConfig, discriminability, equity_metric, gradient, loss_value

DIVERGENCE_CE = 1e3


class TrainingDivergedError(RuntimeError):
    """Source cross-entropy blew past the divergence guard (step size too large)."""


@dataclass(frozen=True)
class ToyUdaConfig:
    """Synthetic two-domain experiment definition.

    ``target_counts`` may be imbalanced; ``shift=None`` resolves to a vector
    of magnitude 1.5 * noise_scale along the all-ones diagonal.  The class
    centers need ``features >= classes - 1``.
    """

    classes: int = 3
    features: int = 2
    source_per_class: int = 100
    target_counts: tuple[int, ...] = (60, 30, 10)
    shift: Optional[tuple[float, ...]] = None
    center_spread: float = 2.0
    noise_scale: float = 0.6
    batch_size: int = 30
    epochs: int = 200
    learning_rate: float = 0.1
    momentum: float = 0.0
    loss: LossConfig = field(default_factory=lambda: LossConfig("ms", lam=1.0))
    seed: int = 0xE0517

    def __post_init__(self):
        object.__setattr__(self, "target_counts", tuple(int(n) for n in self.target_counts))
        if self.shift is not None:
            object.__setattr__(self, "shift", tuple(float(s) for s in self.shift))
        if self.classes < 2:
            raise ValueError(f"classes must be >= 2, got {self.classes}")
        if self.features < 2:
            raise ValueError(f"features must be >= 2, got {self.features}")
        if self.features < self.classes - 1:
            raise ValueError(
                f"need features >= classes - 1 for equidistant centers, got {self.features} < {self.classes - 1}"
            )
        if len(self.target_counts) != self.classes:
            raise ValueError("target_counts must have one entry per class")
        if self.source_per_class < 1 or any(n < 1 for n in self.target_counts):
            raise ValueError("per-class counts must be >= 1")
        if self.shift is not None and len(self.shift) != self.features:
            raise ValueError("shift must have one entry per feature")
        if self.noise_scale <= 0.0:
            raise ValueError("noise_scale must be > 0")
        if not 1 <= self.batch_size <= sum(self.target_counts):
            raise ValueError("batch_size must be in [1, total target count]")
        if self.epochs < 1 or self.learning_rate <= 0.0:
            raise ValueError("epochs and learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")

    def resolved_shift(self) -> np.ndarray:
        if self.shift is not None:
            return np.asarray(self.shift, dtype=float)
        direction = np.ones(self.features) / np.sqrt(self.features)
        return 1.5 * self.noise_scale * direction


@dataclass
class ToyUdaResult:
    """Per-epoch trajectory plus the final classifier parameters.

    Arrays all have length ``epochs``: source cross-entropy, target loss
    value, target accuracy, and the balance/confidence metrics of the full
    target prediction matrix at the end of each epoch.
    """

    ce: np.ndarray
    lt: np.ndarray
    accuracy: np.ndarray
    equity: np.ndarray
    disc: np.ndarray
    weights: np.ndarray
    bias: np.ndarray

    def to_dict(self) -> dict:
        return {
            "trajectory": {
                "ce": self.ce.tolist(),
                "lt": self.lt.tolist(),
                "accuracy": self.accuracy.tolist(),
                "equity": self.equity.tolist(),
                "discriminability": self.disc.tolist(),
            },
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }

    def save(self, prefix: str) -> tuple[str, str]:
        """Write ``<prefix>.json`` and a ``<prefix>.csv`` trajectory file."""
        json_path = f"{prefix}.json"
        csv_path = f"{prefix}.csv"
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(self.to_dict(), sort_keys=True, indent=2))
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            write_trajectory_csv(self, fh)
        return json_path, csv_path


def write_trajectory_csv(result: ToyUdaResult, target: IO[str]) -> None:
    target.write("# epoch,ce,lt,acc,equity,disc\n")
    for e in range(result.ce.size):
        row = (result.ce[e], result.lt[e], result.accuracy[e], result.equity[e], result.disc[e])
        target.write(f"{e}," + ",".join(repr(float(v)) for v in row) + "\n")


def read_trajectory_csv(source: str | IO[str]) -> np.ndarray:
    """Read a trajectory CSV back as an (epochs, 6) array of epoch,ce,lt,acc,equity,disc."""
    from .probmat import read_array_csv

    rows = read_array_csv(source)
    if rows.shape[1] != 6:
        raise ValueError(f"expected 6 trajectory columns, got {rows.shape[1]}")
    return rows


def class_centers(classes: int, features: int, spread: float) -> np.ndarray:
    """Pairwise-equidistant class centers: regular-simplex vertices times ``spread``.

    Vertices have unit circumradius before scaling and live in the first
    classes - 1 feature coordinates.
    """
    base = np.eye(classes) - 1.0 / classes
    basis: list[np.ndarray] = []
    for j in range(classes - 1):
        v = base[:, j].copy()
        for _ in range(2):
            for q in basis:
                v -= (q @ v) * q
        v /= np.linalg.norm(v)
        basis.append(v)
    coords = base @ np.column_stack(basis)
    coords /= np.linalg.norm(coords[0])
    centers = np.zeros((classes, features))
    centers[:, : classes - 1] = coords
    return spread * centers


def _rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    data_seq, train_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(data_seq), np.random.default_rng(train_seq)


def _generate(rng: np.random.Generator, config: ToyUdaConfig):
    centers = class_centers(config.classes, config.features, config.center_spread)
    shift = config.resolved_shift()
    xs, ys, xt, yt = [], [], [], []
    for c in range(config.classes):
        pts = centers[c] + config.noise_scale * rng.standard_normal(
            (config.source_per_class, config.features)
        )
        xs.append(pts)
        ys.append(np.full(config.source_per_class, c, dtype=int))
    for c in range(config.classes):
        count = config.target_counts[c]
        pts = centers[c] + shift + config.noise_scale * rng.standard_normal(
            (count, config.features)
        )
        xt.append(pts)
        yt.append(np.full(count, c, dtype=int))
    return np.vstack(xs), np.concatenate(ys), np.vstack(xt), np.concatenate(yt)


def generate(config: ToyUdaConfig):
    """Synthesize (source features, source labels, target features, target labels).

    Deterministic from ``config.seed`` and identical to the data used by
    :func:`train` for the same config.
    """
    data_rng, _ = _rngs(config.seed)
    return _generate(data_rng, config)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def objective_and_gradients(
    weights: np.ndarray,
    bias: np.ndarray,
    x_src: np.ndarray,
    y_src: np.ndarray,
    x_tgt: np.ndarray,
    loss_cfg: LossConfig,
):
    """Value and (d x C, C) parameter gradients of CE + lam * target loss.

    The target-loss gradient is propagated through the softmax in closed
    form; with lam = 0 the target term contributes nothing.
    """
    probs_src = softmax(x_src @ weights + bias)
    n_src = x_src.shape[0]
    ce = float(-np.log(np.maximum(probs_src[np.arange(n_src), y_src], 1e-300)).mean())
    delta = probs_src.copy()
    delta[np.arange(n_src), y_src] -= 1.0
    delta /= n_src
    grad_w = x_src.T @ delta
    grad_b = delta.sum(axis=0)
    lt = 0.0
    if loss_cfg.lam > 0.0:
        probs_tgt = softmax(x_tgt @ weights + bias)
        out = gradient(probs_tgt, loss_cfg)
        lt = out.value
        inner = (out.grad * probs_tgt).sum(axis=1, keepdims=True)
        delta_t = probs_tgt * (out.grad - inner) * loss_cfg.lam
        grad_w += x_tgt.T @ delta_t
        grad_b += delta_t.sum(axis=0)
    return ce + loss_cfg.lam * lt, ce, lt, grad_w, grad_b


def train(config: ToyUdaConfig) -> ToyUdaResult:
    """Mini-batch gradient descent on the combined objective.

    Batches are drawn without replacement within an epoch and reshuffled
    each epoch from the seed; the trailing partial target batch is used.
    Raises :class:`TrainingDivergedError` if the full-source cross-entropy
    exceeds 1e3 at an epoch boundary.
    """
    data_rng, train_rng = _rngs(config.seed)
    xs, ys, xt, yt = _generate(data_rng, config)
    n_src, n_tgt = xs.shape[0], xt.shape[0]
    weights = np.zeros((config.features, config.classes))
    bias = np.zeros(config.classes)
    vel_w = np.zeros_like(weights)
    vel_b = np.zeros_like(bias)
    steps = -(-n_tgt // config.batch_size)
    ce_hist = np.empty(config.epochs)
    lt_hist = np.empty(config.epochs)
    acc_hist = np.empty(config.epochs)
    eq_hist = np.empty(config.epochs)
    disc_hist = np.empty(config.epochs)
    src_cursor = n_src  # force a shuffle on first use
    perm_src = np.arange(n_src)
    for epoch in range(config.epochs):
        perm_tgt = train_rng.permutation(n_tgt)
        for k in range(steps):
            tgt_idx = perm_tgt[k * config.batch_size : (k + 1) * config.batch_size]
            if src_cursor + config.batch_size > n_src:
                perm_src = train_rng.permutation(n_src)
                src_cursor = 0
            src_idx = perm_src[src_cursor : src_cursor + config.batch_size]
            src_cursor += config.batch_size
            _, _, _, grad_w, grad_b = objective_and_gradients(
                weights, bias, xs[src_idx], ys[src_idx], xt[tgt_idx], config.loss
            )
            if config.momentum > 0.0:
                vel_w = config.momentum * vel_w - config.learning_rate * grad_w
                vel_b = config.momentum * vel_b - config.learning_rate * grad_b
                weights = weights + vel_w
                bias = bias + vel_b
            else:
                weights = weights - config.learning_rate * grad_w
                bias = bias - config.learning_rate * grad_b
        probs_src = softmax(xs @ weights + bias)
        with np.errstate(divide="ignore"):
            ce = float(-np.log(probs_src[np.arange(n_src), ys]).mean())
        if not np.isfinite(ce) or ce > DIVERGENCE_CE:
            raise TrainingDivergedError(
                f"epoch {epoch}: source cross-entropy {ce!r} exceeds {DIVERGENCE_CE}"
            )
        probs_tgt = softmax(xt @ weights + bias)
        ce_hist[epoch] = ce
        lt_hist[epoch] = loss_value(probs_tgt, config.loss)
        acc_hist[epoch] = float((probs_tgt.argmax(axis=1) == yt).mean())
        eq_hist[epoch] = equity_metric(probs_tgt)
        disc_hist[epoch] = discriminability(probs_tgt)
    return ToyUdaResult(
        ce=ce_hist,
        lt=lt_hist,
        accuracy=acc_hist,
        equity=eq_hist,
        disc=disc_hist,
        weights=weights,
        bias=bias,
    )


def paired_runs(base: ToyUdaConfig, losses: dict[str, LossConfig]) -> dict[str, ToyUdaResult]:
    """Train once per loss under an otherwise identical config and seed."""
    return {name: train(replace(base, loss=cfg)) for name, cfg in losses.items()}
