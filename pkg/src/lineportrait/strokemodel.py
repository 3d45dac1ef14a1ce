"""One-shot stroke representation learning.

A small variational graph autoencoder learns the strokes of a single
template sketch. The encoder runs two blocks of graph convolution
(Kipf-normalized adjacency, addition aggregation) and pairwise max-pooling
along the ordered vertices, then a fully connected layer produces the means
and log-variances of the latent Gaussian. The decoder is three fully
connected layers reshaped back to the n x 2 delta matrix.

The net is tiny and trains on tens of strokes, so forward, reverse-mode
gradients, and the Adam loop are written directly in numpy; every gradient
is checked against central finite differences in the test suite.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .exceptions import TrainingError
from .strokegraph import StrokeGraph, path_from_deltas, resample_stroke, stroke_graph_propagation

MODEL_FILE_VERSION = 1

# (name, shape builder) in a fixed order: Adam state, serialization, and the
# finite-difference suite all iterate parameters in this order.
_PARAM_SHAPES = (
    ("conv1_w", lambda d: (2, d["h1"])),
    ("conv1_b", lambda d: (d["h1"],)),
    ("conv2_w", lambda d: (d["h1"], d["h2"])),
    ("conv2_b", lambda d: (d["h2"],)),
    ("enc_w", lambda d: (d["n"] // 4 * d["h2"], 2 * d["latent"])),
    ("enc_b", lambda d: (2 * d["latent"],)),
    ("dec1_w", lambda d: (d["latent"], d["d1"])),
    ("dec1_b", lambda d: (d["d1"],)),
    ("dec2_w", lambda d: (d["d1"], d["d2"])),
    ("dec2_b", lambda d: (d["d2"],)),
    ("dec3_w", lambda d: (d["d2"], 2 * d["n"])),
    ("dec3_b", lambda d: (2 * d["n"],)),
)


@dataclass
class ModelDims:
    n: int = 32
    h1: int = 16
    h2: int = 32
    latent: int = 8
    d1: int = 64
    d2: int = 128

    def __post_init__(self):
        if self.n < 8 or self.n % 4 != 0:
            raise ValueError(f"n must be >= 8 and divisible by 4, got {self.n}")
        for name in ("h1", "h2", "latent", "d1", "d2"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class ModelParams:
    """All weights and biases, keyed by the fixed parameter order."""

    dims: ModelDims
    weights: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        d = self.dims.as_dict()
        for name, shape_of in _PARAM_SHAPES:
            if name not in self.weights:
                raise ValueError(f"missing parameter {name}")
            expected = shape_of(d)
            if self.weights[name].shape != expected:
                raise ValueError(
                    f"parameter {name} has shape {self.weights[name].shape}, expected {expected}"
                )

    def copy(self) -> "ModelParams":
        return ModelParams(self.dims, {k: v.copy() for k, v in self.weights.items()})

    def items(self):
        for name, _ in _PARAM_SHAPES:
            yield name, self.weights[name]


_LOGVAR_BIAS_INIT = -6.0


def init_params(dims: ModelDims, rng: np.random.Generator) -> ModelParams:
    """Glorot-uniform weights (bound sqrt(6 / (fan_in + fan_out))), zero biases.

    Exception: the log-variance half of the encoder bias starts at -6.
    Starting it at zero injects unit-variance noise into z from the first
    epoch, which swamps the spread of the stroke means; the decoder then
    flattens to the mean stroke before it ever learns stroke identity, and
    once flat no gradient reaches the encoder again. Starting the noise
    near zero keeps early training effectively deterministic.
    """
    d = dims.as_dict()
    weights = {}
    for name, shape_of in _PARAM_SHAPES:
        shape = shape_of(d)
        if name.endswith("_b"):
            weights[name] = np.zeros(shape)
        else:
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            weights[name] = rng.uniform(-bound, bound, size=shape)
    weights["enc_b"][dims.latent :] = _LOGVAR_BIAS_INIT
    return ModelParams(dims, weights)


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def gcn_layer(H: np.ndarray, A: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """One graph convolution: ReLU(D^-1/2 (A+I) D^-1/2 H W + b)."""
    from .strokegraph import normalized_adjacency

    H = np.asarray(H, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if H.ndim != 2 or W.ndim != 2 or H.shape[1] != W.shape[0]:
        raise ValueError(f"incompatible shapes H {H.shape} and W {W.shape}")
    if A.shape != (len(H), len(H)):
        raise ValueError(f"adjacency {A.shape} does not match {len(H)} vertices")
    return relu(normalized_adjacency(A) @ H @ W + b)


def pool_pairwise(H: np.ndarray) -> np.ndarray:
    """Element-wise max over consecutive vertex pairs; halves the vertex axis."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] % 2 != 0:
        raise ValueError(f"need an even vertex count, got shape {H.shape}")
    return H.reshape(H.shape[0] // 2, 2, H.shape[1]).max(axis=1)


def _pool_with_argmax(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pairs = H.reshape(H.shape[0] // 2, 2, H.shape[1])
    idx = pairs.argmax(axis=1)
    return np.take_along_axis(pairs, idx[:, None, :], axis=1)[:, 0, :], idx


def _unpool(grad: np.ndarray, idx: np.ndarray) -> np.ndarray:
    half, f = grad.shape
    out = np.zeros((half, 2, f))
    np.put_along_axis(out, idx[:, None, :], grad[:, None, :], axis=1)
    return out.reshape(half * 2, f)


def _forward(params: ModelParams, X: np.ndarray, eps: np.ndarray) -> dict:
    """Full encode/reparameterize/decode pass; caches every intermediate."""
    dims = params.dims
    w = params.weights
    A1 = stroke_graph_propagation(dims.n)
    A2 = stroke_graph_propagation(dims.n // 2)

    AX = A1 @ X
    Z1 = AX @ w["conv1_w"] + w["conv1_b"]
    H1 = relu(Z1)
    P1, idx1 = _pool_with_argmax(H1)

    AP = A2 @ P1
    Z2 = AP @ w["conv2_w"] + w["conv2_b"]
    H2 = relu(Z2)
    P2, idx2 = _pool_with_argmax(H2)

    flat = P2.reshape(-1)
    enc = flat @ w["enc_w"] + w["enc_b"]
    mu, logvar = enc[: dims.latent], enc[dims.latent :]
    z = mu + np.exp(0.5 * logvar) * eps

    zd1 = z @ w["dec1_w"] + w["dec1_b"]
    hd1 = relu(zd1)
    zd2 = hd1 @ w["dec2_w"] + w["dec2_b"]
    hd2 = relu(zd2)
    out = hd2 @ w["dec3_w"] + w["dec3_b"]
    recon = out.reshape(dims.n, 2)
    return {
        "X": X, "A1": A1, "A2": A2, "AX": AX, "Z1": Z1, "P1": P1, "idx1": idx1,
        "AP": AP, "Z2": Z2, "idx2": idx2, "flat": flat, "mu": mu, "logvar": logvar,
        "eps": eps, "z": z, "zd1": zd1, "hd1": hd1, "zd2": zd2, "hd2": hd2,
        "recon": recon,
    }


def kl_divergence(mu: np.ndarray, logvar: np.ndarray) -> float:
    """KL(N(mu, exp(logvar)) || N(0, I)), summed over latent dimensions."""
    return float(-0.5 * np.sum(1.0 + logvar - mu**2 - np.exp(logvar)))


def vae_loss(recon: np.ndarray, target: np.ndarray, mu: np.ndarray, logvar: np.ndarray, beta: float) -> float:
    """Mean squared reconstruction error plus beta-weighted KL divergence."""
    recon = np.asarray(recon, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if recon.shape != target.shape:
        raise ValueError(f"shape mismatch: {recon.shape} vs {target.shape}")
    return float(np.mean((recon - target) ** 2)) + beta * kl_divergence(mu, logvar)


def _backward(params: ModelParams, cache: dict, beta: float) -> dict[str, np.ndarray]:
    """Reverse-mode gradients of the per-stroke loss for every parameter."""
    w = params.weights
    X, recon = cache["X"], cache["recon"]
    mu, logvar, eps = cache["mu"], cache["logvar"], cache["eps"]

    d_out = ((recon - X) * (2.0 / recon.size)).reshape(-1)
    g = {}
    g["dec3_w"] = np.outer(cache["hd2"], d_out)
    g["dec3_b"] = d_out
    d_hd2 = w["dec3_w"] @ d_out
    d_zd2 = d_hd2 * (cache["zd2"] > 0)
    g["dec2_w"] = np.outer(cache["hd1"], d_zd2)
    g["dec2_b"] = d_zd2
    d_hd1 = w["dec2_w"] @ d_zd2
    d_zd1 = d_hd1 * (cache["zd1"] > 0)
    g["dec1_w"] = np.outer(cache["z"], d_zd1)
    g["dec1_b"] = d_zd1
    d_z = w["dec1_w"] @ d_zd1

    d_mu = d_z + beta * mu
    d_logvar = d_z * eps * 0.5 * np.exp(0.5 * logvar) + beta * 0.5 * (np.exp(logvar) - 1.0)
    d_enc = np.concatenate((d_mu, d_logvar))
    g["enc_w"] = np.outer(cache["flat"], d_enc)
    g["enc_b"] = d_enc
    d_flat = w["enc_w"] @ d_enc

    d_P2 = d_flat.reshape(-1, params.dims.h2)
    d_H2 = _unpool(d_P2, cache["idx2"])
    d_Z2 = d_H2 * (cache["Z2"] > 0)
    g["conv2_w"] = cache["AP"].T @ d_Z2
    g["conv2_b"] = d_Z2.sum(axis=0)
    d_P1 = cache["A2"].T @ (d_Z2 @ w["conv2_w"].T)
    d_H1 = _unpool(d_P1, cache["idx1"])
    d_Z1 = d_H1 * (cache["Z1"] > 0)
    g["conv1_w"] = cache["AX"].T @ d_Z1
    g["conv1_b"] = d_Z1.sum(axis=0)
    return g


def loss_and_grads(
    params: ModelParams,
    batch: list[np.ndarray],
    eps_batch: list[np.ndarray],
    beta: float,
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean loss over the batch and matching per-parameter gradients.

    eps_batch fixes the reparametrization draws, which keeps the loss a
    deterministic function of the parameters; the finite-difference oracle
    relies on that.
    """
    if len(batch) != len(eps_batch):
        raise ValueError("batch and eps_batch lengths differ")
    total = 0.0
    grads = {name: np.zeros_like(arr) for name, arr in params.items()}
    for X, eps in zip(batch, eps_batch):
        cache = _forward(params, np.asarray(X, dtype=np.float64), eps)
        total += vae_loss(cache["recon"], cache["X"], cache["mu"], cache["logvar"], beta)
        for name, grad in _backward(params, cache, beta).items():
            grads[name] += grad
    scale = 1.0 / len(batch)
    for name in grads:
        grads[name] *= scale
    return total * scale, grads


def encode(graph: StrokeGraph, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Latent Gaussian (mu, logvar) of a stroke under the trained encoder."""
    if graph.n != params.dims.n:
        raise ValueError(f"stroke has {graph.n} vertices, model expects {params.dims.n}")
    cache = _forward(params, graph.deltas, np.zeros(params.dims.latent))
    return cache["mu"], cache["logvar"]


def reparameterize(mu: np.ndarray, logvar: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw z = mu + exp(logvar / 2) * eps with eps ~ N(0, I)."""
    mu = np.asarray(mu, dtype=np.float64)
    logvar = np.asarray(logvar, dtype=np.float64)
    if mu.shape != logvar.shape:
        raise ValueError(f"shape mismatch: {mu.shape} vs {logvar.shape}")
    return mu + np.exp(0.5 * logvar) * rng.standard_normal(mu.shape)


def decode(z: np.ndarray, params: ModelParams) -> np.ndarray:
    """Decode a latent vector to an (n, 2) delta matrix."""
    z = np.asarray(z, dtype=np.float64)
    w = params.weights
    if z.shape != (params.dims.latent,):
        raise ValueError(f"latent vector must have length {params.dims.latent}, got {z.shape}")
    hd1 = relu(z @ w["dec1_w"] + w["dec1_b"])
    hd2 = relu(hd1 @ w["dec2_w"] + w["dec2_b"])
    return (hd2 @ w["dec3_w"] + w["dec3_b"]).reshape(params.dims.n, 2)


@dataclass
class TrainConfig:
    # Strokes are delta-encoded on a unit-diagonal normalization, so the
    # reconstruction MSE lives at the 1e-4 scale while an informative
    # latent costs KL of order 10. Any beta much above 1e-6 makes ignoring
    # z (decoding the mean stroke) the optimum and training collapses to
    # one output shape; the tiny default keeps memorization the winner.
    epochs: int = 4000
    learning_rate: float = 1e-3
    beta: float = 1e-6
    noise_scale: float = 0.15
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.beta < 0 or self.noise_scale < 0:
            raise ValueError("beta and noise_scale must be >= 0")

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def train(
    strokes: list[StrokeGraph],
    config: TrainConfig,
    dims: ModelDims | None = None,
) -> tuple[ModelParams, list[float]]:
    """Full-batch Adam over the template strokes; returns params and the loss log.

    A template sketch has a handful of strokes, so minibatching would only
    add noise. Raises TrainingError with the epoch number on divergence.
    """
    if not strokes:
        raise ValueError("need at least one training stroke")
    dims = dims or ModelDims()
    for g in strokes:
        if g.n != dims.n:
            raise ValueError(f"stroke has {g.n} vertices, model expects {dims.n}")
    rng = np.random.default_rng(config.rng_seed)
    params = init_params(dims, rng)
    batch = [g.deltas for g in strokes]

    beta1, beta2, adam_eps = 0.9, 0.999, 1e-8
    m = {name: np.zeros_like(arr) for name, arr in params.items()}
    v = {name: np.zeros_like(arr) for name, arr in params.items()}
    losses: list[float] = []
    for epoch in range(config.epochs):
        eps_batch = [rng.standard_normal(dims.latent) for _ in batch]
        loss, grads = loss_and_grads(params, batch, eps_batch, config.beta)
        if not np.isfinite(loss):
            raise TrainingError(f"training diverged at epoch {epoch}: loss={loss}", epoch=epoch)
        t = epoch + 1
        for name, arr in params.items():
            grad = grads[name]
            m[name] = beta1 * m[name] + (1.0 - beta1) * grad
            v[name] = beta2 * v[name] + (1.0 - beta2) * grad**2
            m_hat = m[name] / (1.0 - beta1**t)
            v_hat = v[name] / (1.0 - beta2**t)
            arr -= config.learning_rate * m_hat / (np.sqrt(v_hat) + adam_eps)
        losses.append(loss)
    return params, losses


def reconstruct(graph: StrokeGraph, params: ModelParams) -> np.ndarray:
    """The model's deterministic reconstruction (decode of the latent mean)."""
    mu, _ = encode(graph, params)
    return path_from_deltas(decode(mu, params), graph.scale)


def sample_variation(
    graph: StrokeGraph,
    params: ModelParams,
    noise_scale: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """A variation of the stroke: decode the latent mean plus Gaussian noise.

    noise_scale 0 returns the reconstruction; the path is restored to the
    stroke's original scale with its first point at the origin.
    """
    mu, _ = encode(graph, params)
    z = mu + noise_scale * rng.standard_normal(mu.shape)
    return path_from_deltas(decode(z, params), graph.scale)


def reconstruction_error(graph: StrokeGraph, params: ModelParams) -> float:
    """Mean per-point distance between a stroke and its reconstruction, in
    normalized units."""
    target = graph.points()
    recon = path_from_deltas(decode(encode(graph, params)[0], params), 1.0)
    return float(np.linalg.norm(recon - target, axis=1).mean())


def params_to_dict(params: ModelParams, train_config: TrainConfig, templates: list[StrokeGraph]) -> dict:
    dims = params.dims
    return {
        "version": MODEL_FILE_VERSION,
        "dims": {"n": dims.n, "h1": dims.h1, "h2": dims.h2, "L": dims.latent, "d1": dims.d1, "d2": dims.d2},
        "weights": {name: arr.tolist() for name, arr in params.items()},
        "train_config": train_config.as_dict(),
        "templates": [
            {"deltas": g.deltas.tolist(), "scale": g.scale} for g in templates
        ],
    }


def params_from_dict(payload: dict) -> tuple[ModelParams, TrainConfig, list[StrokeGraph]]:
    version = payload.get("version")
    if version != MODEL_FILE_VERSION:
        raise ValueError(f"unsupported model file version: {version}")
    d = payload["dims"]
    dims = ModelDims(n=d["n"], h1=d["h1"], h2=d["h2"], latent=d["L"], d1=d["d1"], d2=d["d2"])
    weights = {name: np.array(arr, dtype=np.float64) for name, arr in payload["weights"].items()}
    params = ModelParams(dims, weights)
    train_config = TrainConfig(**payload["train_config"])
    templates = [
        StrokeGraph(deltas=np.array(t["deltas"], dtype=np.float64), scale=float(t["scale"]))
        for t in payload.get("templates", [])
    ]
    return params, train_config, templates


class StrokeVariationModel(BaseEstimator):
    """Estimator wrapper: fit on template strokes, then sample variations.

    fit accepts polylines (arrays of points) or prebuilt StrokeGraphs. After
    fitting, `params_`, `templates_`, and `losses_` are available and the
    sampling helpers draw original, noised, or fully random strokes.
    """

    def __init__(
        self,
        n_points: int = 32,
        hidden1: int = 16,
        hidden2: int = 32,
        latent_dim: int = 8,
        decoder1: int = 64,
        decoder2: int = 128,
        learning_rate: float = 1e-3,
        kl_weight: float = 1e-6,
        epochs: int = 4000,
        noise_scale: float = 0.15,
        random_state: int = 0,
    ):
        self.n_points = n_points
        self.hidden1 = hidden1
        self.hidden2 = hidden2
        self.latent_dim = latent_dim
        self.decoder1 = decoder1
        self.decoder2 = decoder2
        self.learning_rate = learning_rate
        self.kl_weight = kl_weight
        self.epochs = epochs
        self.noise_scale = noise_scale
        self.random_state = random_state

    def _dims(self) -> ModelDims:
        return ModelDims(
            n=self.n_points, h1=self.hidden1, h2=self.hidden2,
            latent=self.latent_dim, d1=self.decoder1, d2=self.decoder2,
        )

    def _train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs, learning_rate=self.learning_rate,
            beta=self.kl_weight, noise_scale=self.noise_scale, rng_seed=self.random_state,
        )

    def fit(self, X, y=None):
        graphs = [
            g if isinstance(g, StrokeGraph) else resample_stroke(np.asarray(g), self.n_points)
            for g in X
        ]
        self.templates_ = graphs
        self.params_, self.losses_ = train(graphs, self._train_config(), self._dims())
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("StrokeVariationModel is not fitted yet")

    def encode(self, graph: StrokeGraph) -> tuple[np.ndarray, np.ndarray]:
        self._check_fitted()
        return encode(graph, self.params_)

    def reconstruct(self, graph: StrokeGraph) -> np.ndarray:
        self._check_fitted()
        return reconstruct(graph, self.params_)

    def sample_variation(
        self,
        graph: StrokeGraph | None = None,
        noise_scale: float | None = None,
        rng: np.random.Generator | None = None,
    ) -> np.ndarray:
        self._check_fitted()
        rng = np.random.default_rng() if rng is None else rng
        if graph is None:
            graph = self.templates_[int(rng.integers(len(self.templates_)))]
        scale = self.noise_scale if noise_scale is None else noise_scale
        return sample_variation(graph, self.params_, scale, rng)

    def sample_random(self, rng: np.random.Generator | None = None, scale: float | None = None) -> np.ndarray:
        """Decode a latent draw from N(0, I); scale defaults to the template mean."""
        self._check_fitted()
        rng = np.random.default_rng() if rng is None else rng
        z = rng.standard_normal(self.params_.dims.latent)
        if scale is None:
            scale = float(np.mean([g.scale for g in self.templates_]))
        return path_from_deltas(decode(z, self.params_), scale)

    def save(self, path: str | Path) -> None:
        self._check_fitted()
        payload = params_to_dict(self.params_, self._train_config(), self.templates_)
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "StrokeVariationModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        params, train_config, templates = params_from_dict(payload)
        dims = params.dims
        model = cls(
            n_points=dims.n, hidden1=dims.h1, hidden2=dims.h2, latent_dim=dims.latent,
            decoder1=dims.d1, decoder2=dims.d2, learning_rate=train_config.learning_rate,
            kl_weight=train_config.beta, epochs=train_config.epochs,
            noise_scale=train_config.noise_scale, random_state=train_config.rng_seed,
        )
        model.params_ = params
        model.templates_ = templates
        model.losses_ = []
        return model
