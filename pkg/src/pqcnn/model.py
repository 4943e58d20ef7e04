"""Autoencoder cipher with a noise-perturbed, uniformity-constrained ciphertext layer.

The network mirrors the McEliece factor chain: three encrypt layers shaped like
S (c x c), G (c x n) and P (n x n) produce the ciphertext ``Y``; uniform noise
gives ``Y' = Y + alpha * r``; three decrypt layers shaped like L (n x n),
M (n x c) and N (c x c) reconstruct the plaintext. The encrypt layers form the
public key and the decrypt layers the private key.

Training minimizes, per sample and averaged over a batch,

    loss = theta(Y') + mean((O - X)**2)

where theta is the chi-squared CDF value of the binned, min-max normalized
ciphertext (soft histogram while training, hard histogram when evaluating).
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import unistat
from .dataio import Dataset
from .gf2matrix import BitMatrix
from .hamming import HammingCode
from .mceliece import PrivateKey
from .neuralnet import (
    DenseLayer,
    Network,
    backward,
    forward,
    get_activation,
    make_optimizer,
    noise_inject,
)

log = logging.getLogger(__name__)

LAYER_NAMES = ("S", "G", "P", "L", "M", "N")
DEFAULT_ACTIVATIONS = ("tanh", "tanh", "sigmoid", "tanh", "tanh", "linear")


class KeyKindError(ValueError):
    """A key of the wrong kind was supplied (e.g. an encrypt key to decrypt)."""


@dataclass(frozen=True)
class PqcnnConfig:
    c: int = 361
    n: int = 64
    m: int = 16
    alpha: float = 0.4
    activations: tuple[str, ...] = DEFAULT_ACTIVATIONS
    epochs: int = 500
    batch_size: int = 32
    lr: float = 1e-3
    optimizer: str = "adam"
    bandwidth: float = 0.01
    theta_weight: float = 1.0
    val_fraction: float = 0.1
    patience: Optional[int] = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "activations", tuple(self.activations))
        self.validate()

    def validate(self) -> None:
        if self.c < 2 or self.n < 2:
            raise ValueError(f"c and n must be >= 2, got c={self.c}, n={self.n}")
        if not 2 <= self.m < self.n:
            raise ValueError(f"bin count m must satisfy 2 <= m < n, got m={self.m}, n={self.n}")
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if len(self.activations) != 6:
            raise ValueError("exactly six activations are needed (S, G, P, L, M, N)")
        for name in self.activations:
            get_activation(name)
        if self.epochs < 0 or self.batch_size < 1 or self.bandwidth <= 0:
            raise ValueError("epochs >= 0, batch_size >= 1 and bandwidth > 0 are required")
        if not 0 < self.val_fraction < 1:
            raise ValueError("val_fraction must be in (0, 1)")

    def with_(self, **changes) -> "PqcnnConfig":
        return replace(self, **changes)

    def layer_shapes(self) -> list[tuple[int, int]]:
        c, n = self.c, self.n
        return [(c, c), (c, n), (n, n), (n, n), (n, c), (c, c)]


@dataclass
class EncryptKey:
    """Public half: the S, G, P layers and the noise weight."""

    layers: list[DenseLayer]
    alpha: float
    m: int

    def __post_init__(self) -> None:
        net = Network(self.layers)
        c = net.in_dim
        n = net.out_dim
        if len(self.layers) != 3 or net.shapes != [(c, c), (c, n), (n, n)]:
            raise ValueError(f"encrypt stack must chain c->c->n->n, got {net.shapes}")

    @property
    def network(self) -> Network:
        return Network(self.layers)

    @property
    def c(self) -> int:
        return self.layers[0].in_dim

    @property
    def n(self) -> int:
        return self.layers[-1].out_dim


@dataclass
class DecryptKey:
    """Private half: the L, M, N layers. ``alpha`` and ``m`` are informational."""

    layers: list[DenseLayer]
    alpha: float = math.nan
    m: int = 0

    def __post_init__(self) -> None:
        net = Network(self.layers)
        n = net.in_dim
        c = net.out_dim
        if len(self.layers) != 3 or net.shapes != [(n, n), (n, c), (c, c)]:
            raise ValueError(f"decrypt stack must chain n->n->c->c, got {net.shapes}")

    @property
    def network(self) -> Network:
        return Network(self.layers)

    @property
    def c(self) -> int:
        return self.layers[-1].out_dim

    @property
    def n(self) -> int:
        return self.layers[0].in_dim


@dataclass
class PqcnnModel:
    config: PqcnnConfig
    network: Network
    validation_mse: float = math.nan

    @property
    def encrypt_net(self) -> Network:
        return Network(self.network.layers[:3])

    @property
    def decrypt_net(self) -> Network:
        return Network(self.network.layers[3:])

    def encrypt_key(self) -> EncryptKey:
        return EncryptKey(
            [DenseLayer(l.weights.copy(), l.activation) for l in self.network.layers[:3]],
            alpha=self.config.alpha,
            m=self.config.m,
        )

    def decrypt_key(self) -> DecryptKey:
        return DecryptKey(
            [DenseLayer(l.weights.copy(), l.activation) for l in self.network.layers[3:]],
            alpha=self.config.alpha,
            m=self.config.m,
        )


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    mse: float
    theta_noise: float
    theta_ciphertext: float


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    mse: float
    theta: float
    val_loss: float
    val_mse: float
    val_theta_hard: float
    best_val_loss: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.records]

    def as_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.records]


def derive_rng(seed: int, *stream: int) -> np.random.Generator:
    """Independent generator for a named sub-stream of a run seed."""
    return np.random.default_rng([seed, *stream])


def build(config: PqcnnConfig, rng: np.random.Generator) -> Network:
    """Six no-bias layers with Glorot-uniform weights."""
    config.validate()
    layers = []
    for (fan_in, fan_out), act in zip(config.layer_shapes(), config.activations):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        layers.append(DenseLayer(rng.uniform(-limit, limit, size=(fan_in, fan_out)), act))
    return Network(layers)


def _as_batch(x, dim: int, what: str) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.ndim != 2 or a.shape[1] != dim:
        raise ValueError(f"{what} must have {dim} components, got shape {np.shape(x)}")
    return a, single


def loss(output, x, y_prime, config: PqcnnConfig, mode: str = "train") -> float:
    """Composite objective averaged over the batch.

    ``mode="train"`` bins with the soft histogram, ``mode="eval"`` with the hard one.
    """
    o, _ = _as_batch(output, config.c, "output")
    xb, _ = _as_batch(x, config.c, "input")
    yp, _ = _as_batch(y_prime, config.n, "ciphertext")
    mse = np.mean((o - xb) ** 2, axis=1)
    if mode == "train":
        theta, _ = unistat.theta_soft_batch(yp, config.m, config.bandwidth, need_grad=False)
    elif mode == "eval":
        theta = unistat.theta_hard_batch(yp, config.m)
    else:
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    return float(np.mean(config.theta_weight * theta + mse))


@dataclass
class LossParts:
    loss: float
    mse: float
    theta: float


def loss_and_grads(
    net: Network, x: np.ndarray, noise: np.ndarray, config: PqcnnConfig
) -> tuple[LossParts, list[np.ndarray]]:
    """Training objective on a batch with fixed noise, plus weight gradients."""
    enc = Network(net.layers[:3])
    dec = Network(net.layers[3:])
    batch = x.shape[0]
    y, enc_cache = forward(enc, x)
    y_prime = y + config.alpha * noise
    out, dec_cache = forward(dec, y_prime)
    diff = out - x
    mse = np.mean(diff**2, axis=1)
    theta, dtheta = unistat.theta_soft_batch(y_prime, config.m, config.bandwidth)
    total = float(np.mean(config.theta_weight * theta + mse))

    g_out = 2.0 * diff / (config.c * batch)
    dec_grads, g_yp = backward(dec, dec_cache, g_out)
    g_y = g_yp + config.theta_weight * dtheta / batch
    enc_grads, _ = backward(enc, enc_cache, g_y)
    parts = LossParts(total, float(mse.mean()), float(theta.mean()))
    return parts, enc_grads + dec_grads


def objective(net: Network, x: np.ndarray, noise: np.ndarray, config: PqcnnConfig) -> float:
    """Scalar training objective only; used by finite-difference checks."""
    y, _ = forward(Network(net.layers[:3]), x)
    y_prime = y + config.alpha * noise
    out, _ = forward(Network(net.layers[3:]), y_prime)
    return loss(out, x, y_prime, config, mode="train")


def _check_dataset(dataset: Dataset, config: PqcnnConfig) -> None:
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    if dataset.c != config.c:
        raise ValueError(f"dataset has {dataset.c} features but config.c = {config.c}")


def train(
    config: PqcnnConfig, dataset: Dataset, network: Optional[Network] = None
) -> tuple[PqcnnModel, TrainingHistory]:
    """Fit all six layers; returns the snapshot with the lowest validation loss.

    The last ``val_fraction`` of a seeded shuffle is held out for validation,
    evaluated each epoch under one fixed noise draw so epochs are comparable.
    """
    _check_dataset(dataset, config)
    if len(dataset) < 2:
        raise ValueError("need at least 2 rows to hold out a validation set")
    train_set, val_set = dataset.split(config.val_fraction, derive_rng(config.seed, 0))
    net = network.copy() if network is not None else build(config, derive_rng(config.seed, 1))
    opt = make_optimizer(config.optimizer, config.lr)
    rng = derive_rng(config.seed, 2)
    val_x = val_set.rows
    val_noise = derive_rng(config.seed, 3).random((len(val_set), config.n))

    def validate(current: Network) -> tuple[float, float, float]:
        y, _ = forward(Network(current.layers[:3]), val_x)
        yp = y + config.alpha * val_noise
        out, _ = forward(Network(current.layers[3:]), yp)
        v_loss = loss(out, val_x, yp, config, mode="train")
        v_mse = float(np.mean((out - val_x) ** 2))
        return v_loss, v_mse, float(unistat.theta_hard_batch(yp, config.m).mean())

    history = TrainingHistory()
    best_loss, best_mse, _ = validate(net)
    best_net = net.copy()
    stale = 0
    x_all = train_set.rows
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_set))
        sums = np.zeros(3)
        for start in range(0, len(order), config.batch_size):
            xb = x_all[order[start : start + config.batch_size]]
            noise = rng.random((xb.shape[0], config.n))
            parts, grads = loss_and_grads(net, xb, noise, config)
            opt.step(net, grads)
            sums += np.array([parts.loss, parts.mse, parts.theta]) * xb.shape[0]
        sums /= len(order)
        v_loss, v_mse, v_theta = validate(net)
        if v_loss < best_loss:
            best_loss, best_mse = v_loss, v_mse
            best_net = net.copy()
            history.best_epoch = epoch
            stale = 0
        else:
            stale += 1
        history.records.append(
            EpochRecord(epoch, *sums.tolist(), v_loss, v_mse, v_theta, best_loss)
        )
        if epoch == 1 or epoch % 25 == 0:
            log.info(
                "epoch %d loss=%.6g mse=%.6g theta=%.4g val_loss=%.6g",
                epoch, sums[0], sums[1], sums[2], v_loss,
            )
        if config.patience is not None and stale >= config.patience:
            break
    return PqcnnModel(config, best_net, validation_mse=best_mse), history


def encrypt(
    key: EncryptKey, x, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Forward through the encrypt stack, then perturb. Returns ``(y_prime, r)``."""
    xb, single = _as_batch(x, key.c, "plaintext")
    y, _ = forward(key.network, xb)
    y_prime, r = noise_inject(y, key.alpha, rng)
    return (y_prime[0], r[0]) if single else (y_prime, r)


def decrypt(key: DecryptKey, y_prime) -> np.ndarray:
    if isinstance(key, EncryptKey):
        raise KeyKindError("decryption needs a decrypt (private) key, got an encrypt key")
    yb, single = _as_batch(y_prime, key.n, "ciphertext")
    out, _ = forward(key.network, yb)
    return out[0] if single else out


def evaluate(model: PqcnnModel, dataset: Dataset, rng: np.random.Generator) -> SweepRow:
    """Encrypt every row with fresh noise, decrypt, and average the statistics.

    ``theta_noise`` is computed on the perturbation actually added, ``alpha * r``;
    at ``alpha = 0`` that is the zero vector, which normalizes to a constant
    and so reports as maximally non-uniform.
    """
    cfg = model.config
    _check_dataset(dataset, cfg)
    x = dataset.rows
    y_prime, r = encrypt(model.encrypt_key(), x, rng)
    out = decrypt(model.decrypt_key(), y_prime)
    return SweepRow(
        alpha=cfg.alpha,
        mse=float(np.mean((out - x) ** 2)),
        theta_noise=float(unistat.theta_hard_batch(cfg.alpha * r, cfg.m).mean()),
        theta_ciphertext=float(unistat.theta_hard_batch(y_prime, cfg.m).mean()),
    )


def parse_alpha_range(spec: str) -> list[float]:
    """``"0.1:1.0:0.1"`` -> [0.1, 0.2, ..., 1.0], end inclusive within 1e-9.

    A comma-separated list is accepted too.
    """
    if ":" not in spec:
        return [float(v) for v in spec.split(",") if v.strip()]
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"alpha range must be start:end:step, got {spec!r}")
    start, end, step = (float(p) for p in parts)
    if step <= 0:
        raise ValueError("alpha step must be positive")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(max(count, 0))]


def alpha_sweep(
    config: PqcnnConfig,
    dataset: Dataset,
    alphas: Sequence[float],
    holdout_fraction: float = 0.2,
) -> tuple[list[SweepRow], list[PqcnnModel]]:
    """Train one model per alpha and evaluate each on a shared held-out split.

    Model ``i`` trains with seed ``config.seed + i``. Evaluation noise comes
    from the same generator state for every alpha, so ``theta_noise`` is the
    same for every row, as when a sweep reuses one random seed.
    """
    if not alphas:
        raise ValueError("alpha list is empty")
    train_set, held_out = dataset.split(holdout_fraction, derive_rng(config.seed, 10))
    rows, models = [], []
    for i, alpha in enumerate(alphas):
        cfg = config.with_(alpha=float(alpha), seed=config.seed + i)
        model, _ = train(cfg, train_set)
        rows.append(evaluate(model, held_out, derive_rng(config.seed, 11)))
        models.append(model)
        log.info("alpha=%g -> %s", alpha, rows[-1])
    return rows, models


# Fixed-weight networks: the Hamming code and McEliece as linear autoencoders.
# They are exact only when each layer is reduced mod 2 (``forward(..., gf2=True)``).

def _linear(m: BitMatrix) -> DenseLayer:
    return DenseLayer(m.array.astype(float), "linear")


def hamming_network(code: HammingCode) -> Network:
    """Input k -> codeword n (weights G) -> message k (weights R)."""
    return Network([_linear(code.G), _linear(code.R)])


def mceliece_network(sk: PrivateKey) -> tuple[Network, Network]:
    """Encrypt stack (S, G, P) and decrypt stack (P^-1, R, S^-1).

    The decrypt stack has no error-correction step, so it only inverts
    ciphertexts carrying no perturbation.
    """
    enc = Network([_linear(sk.s), _linear(sk.code.G), _linear(sk.p)])
    dec = Network([_linear(sk.p_inv), _linear(sk.code.R), _linear(sk.s_inv)])
    return enc, dec
