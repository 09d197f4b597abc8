"""Cross-view autoencoder meta-embedding.

Each view j gets a trainable encoder (d_j -> d) and decoder (d -> d_j);
training reconstructs every view from every encoded view, giving J^2 loss
terms per sample, all summed. Networks are small feed-forward stacks (0-2
hidden layers of width d, ReLU inside, linear output) trained with Adam on
mini-batches. The fused embedding of a new row is the sum of the encoder
outputs.

The whole pipeline (init, shuffling, updates) is driven by one seeded
generator, so a fit is reproducible bit-for-bit. Gradients are computed
analytically by backpropagation; see ``objective_and_gradients`` for the
exact objective the optimizer descends.

Loss menu (per target/reconstruction vector pair):
  mse    mean squared error
  mae    mean absolute error
  kld    KL(softmax(target) || softmax(recon)) -- the raw embeddings are
         not distributions, so both sides are pushed through softmax first
  cossq  squared cosine distance (1 - cos)^2, with cos defined as 0 when
         either vector is zero
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EmbeddingView, EnsembleBatch, InvalidInput, NumericalError, ZERO_NORM_EPS

LOSS_KINDS = ("mse", "mae", "kld", "cossq")
HIDDEN_COUNTS = (0, 1, 2)

_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class AeConfig:
    """Training configuration; defaults follow the dev-set-tuned values."""

    d: int = 1024
    loss_kind: str = "kld"
    hidden_count: int = 1
    epochs: int = 500
    batch_size: int = 10000  # clamped to the sample count when larger
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    seed: int = 0


@dataclass(frozen=True, eq=False)
class FeedForwardNet:
    """Dense stack: ReLU after each hidden layer, linear final layer.

    weights[k] has shape (fan_out, fan_in); zero hidden layers means a
    single linear map.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    hidden_count: int
    activation: str = "relu"

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        h = np.asarray(x, dtype=np.float64)
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if k < last:
                h = np.maximum(h, 0.0)
        return h


@dataclass(frozen=True, eq=False)
class AeModel:
    """Fitted cross-view autoencoder: J encoders into the shared space, J decoders back."""

    encoders: tuple[FeedForwardNet, ...]
    decoders: tuple[FeedForwardNet, ...]
    loss_kind: str
    d: int
    train_log: np.ndarray
    config: AeConfig
    encoder_ids: tuple[str, ...]
    view_dims: tuple[int, ...]

    def transform(self, batch: EnsembleBatch) -> EmbeddingView:
        return apply_ae(self, batch)


def _softmax_rows(x):
    z = x - x.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _loss_and_grad(kind, target, recon):
    """Per-row losses and d(loss)/d(recon) for a (B, dim) batch."""
    if kind == "mse":
        diff = recon - target
        return np.mean(diff**2, axis=1), 2.0 * diff / target.shape[1]
    if kind == "mae":
        diff = recon - target
        return np.mean(np.abs(diff), axis=1), np.sign(diff) / target.shape[1]
    if kind == "kld":
        p = _softmax_rows(target)
        q = _softmax_rows(recon)
        losses = np.sum(p * (np.log(p) - np.log(q)), axis=1)
        return losses, q - p
    if kind == "cossq":
        nt = np.linalg.norm(target, axis=1)
        nr = np.linalg.norm(recon, axis=1)
        ok = (nt >= ZERO_NORM_EPS) & (nr >= ZERO_NORM_EPS)
        cos = np.zeros(target.shape[0])
        denom = np.where(ok, nt * nr, 1.0)
        cos[ok] = (np.sum(target * recon, axis=1) / denom)[ok]
        losses = (1.0 - cos) ** 2
        grad = np.zeros_like(recon)
        if ok.any():
            t, r = target[ok], recon[ok]
            c = cos[ok, None]
            dcos = t / denom[ok, None] - c * r / (nr[ok, None] ** 2)
            grad[ok] = -2.0 * (1.0 - c) * dcos
        return losses, grad
    raise InvalidInput(f"unknown loss kind {kind!r}, expected one of {LOSS_KINDS}")


def reconstruction_loss(kind: str, target, recon) -> float:
    """Single-pair reconstruction loss between two equal-length vectors."""
    t = np.asarray(target, dtype=np.float64).reshape(1, -1)
    r = np.asarray(recon, dtype=np.float64).reshape(1, -1)
    if t.shape != r.shape:
        raise InvalidInput(f"length mismatch: target {t.shape[1]} vs recon {r.shape[1]}")
    if not (np.isfinite(t).all() and np.isfinite(r).all()):
        raise NumericalError("non-finite values in loss inputs")
    losses, _ = _loss_and_grad(kind, t, r)
    return float(losses[0])


def _init_net(rng, layer_dims, hidden_count):
    ws, bs = [], []
    for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        ws.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        bs.append(np.zeros(fan_out))
    return ws, bs, hidden_count


def _forward_cached(ws, bs, x):
    caches = []
    h = x
    last = len(ws) - 1
    for k, (w, b) in enumerate(zip(ws, bs)):
        pre = h @ w.T + b
        caches.append((h, pre))
        h = np.maximum(pre, 0.0) if k < last else pre
    return h, caches


def _backward(ws, caches, d_out, grad_w, grad_b):
    """Accumulate parameter gradients in-place; return gradient w.r.t. the input."""
    delta = d_out
    last = len(ws) - 1
    for k in range(last, -1, -1):
        inp, pre = caches[k]
        if k < last:
            delta = delta * (pre > 0)
        grad_w[k] += delta.T @ inp
        grad_b[k] += delta.sum(axis=0)
        delta = delta @ ws[k]
    return delta


def _validate_rows(model_dims, rows):
    if len(rows) != len(model_dims):
        raise InvalidInput(f"expected {len(model_dims)} row vectors, got {len(rows)}")
    out = []
    for dim, row in zip(model_dims, rows):
        arr = np.asarray(row, dtype=np.float64).reshape(-1)
        if arr.shape[0] != dim:
            raise InvalidInput(f"row of length {arr.shape[0]} does not match view dim {dim}")
        out.append(arr)
    return out


def pairwise_losses(model: AeModel, rows) -> np.ndarray:
    """J x J grid of loss terms: entry (j, j2) reconstructs view j2 from view j."""
    xs = _validate_rows(model.view_dims, rows)
    j = len(xs)
    grid = np.zeros((j, j))
    for a in range(j):
        z = model.encoders[a].forward(xs[a].reshape(1, -1))
        for b in range(j):
            recon = model.decoders[b].forward(z)
            grid[a, b] = reconstruction_loss(model.loss_kind, xs[b], recon[0])
    return grid


def total_loss(model: AeModel, rows) -> float:
    """Sum of all J^2 ordered reconstruction terms, self-reconstruction included."""
    return float(pairwise_losses(model, rows).sum())


def _batch_objective_and_grads(enc_w, enc_b, dec_w, dec_b, kind, xs):
    """Mean-over-batch of the J^2-term loss, plus gradients for every parameter.

    Gradient lists mirror the weight lists; the encoder gradient for view j
    accumulates contributions from all J decoder paths before backprop.
    """
    n_views = len(xs)
    rows = xs[0].shape[0]
    g_enc_w = [[np.zeros_like(w) for w in ws] for ws in enc_w]
    g_enc_b = [[np.zeros_like(b) for b in bs] for bs in enc_b]
    g_dec_w = [[np.zeros_like(w) for w in ws] for ws in dec_w]
    g_dec_b = [[np.zeros_like(b) for b in bs] for bs in dec_b]

    objective = 0.0
    for a in range(n_views):
        z, enc_caches = _forward_cached(enc_w[a], enc_b[a], xs[a])
        dz = np.zeros_like(z)
        for b in range(n_views):
            recon, dec_caches = _forward_cached(dec_w[b], dec_b[b], z)
            losses, d_recon = _loss_and_grad(kind, xs[b], recon)
            objective += losses.sum() / rows
            dz += _backward(dec_w[b], dec_caches, d_recon / rows, g_dec_w[b], g_dec_b[b])
        _backward(enc_w[a], enc_caches, dz, g_enc_w[a], g_enc_b[a])
    return objective, (g_enc_w, g_enc_b, g_dec_w, g_dec_b)


def parameters(model: AeModel) -> list[np.ndarray]:
    """All parameter arrays in canonical order: encoders then decoders, W then b per layer."""
    out = []
    for net in model.encoders + model.decoders:
        for w, b in zip(net.weights, net.biases):
            out.extend((w, b))
    return out


def objective_and_gradients(model: AeModel, view_matrices) -> tuple[float, list[np.ndarray]]:
    """Training objective on a batch (one matrix per view) and its full gradient.

    The objective is the per-sample total_loss averaged over the batch;
    gradients come back flat, aligned with ``parameters(model)``.
    """
    xs = [np.atleast_2d(np.asarray(m, dtype=np.float64)) for m in view_matrices]
    if len(xs) != len(model.view_dims):
        raise InvalidInput(f"expected {len(model.view_dims)} view matrices, got {len(xs)}")
    for x, dim in zip(xs, model.view_dims):
        if x.shape[1] != dim:
            raise InvalidInput(f"matrix with {x.shape[1]} columns does not match view dim {dim}")
    enc_w = [list(net.weights) for net in model.encoders]
    enc_b = [list(net.biases) for net in model.encoders]
    dec_w = [list(net.weights) for net in model.decoders]
    dec_b = [list(net.biases) for net in model.decoders]
    obj, (gew, geb, gdw, gdb) = _batch_objective_and_grads(
        enc_w, enc_b, dec_w, dec_b, model.loss_kind, xs
    )
    flat = []
    for gws, gbs in zip(gew + gdw, geb + gdb):
        for gw, gb in zip(gws, gbs):
            flat.extend((gw, gb))
    return obj, flat


def _freeze_net(ws, bs, hidden_count):
    for arr in ws + bs:
        arr.setflags(write=False)
    return FeedForwardNet(tuple(ws), tuple(bs), hidden_count)


def fit_ae(batch: EnsembleBatch, config: AeConfig) -> AeModel:
    """Train the cross-view autoencoder with Adam on seeded mini-batches.

    Every epoch reshuffles the sample order with the run's generator; the
    last partial mini-batch is kept. The train log records the epoch-mean
    per-sample loss. Raises NumericalError (with the 1-based epoch) if the
    loss stops being finite.
    """
    if config.epochs < 1:
        raise InvalidInput(f"epochs must be >= 1, got {config.epochs}")
    if config.d < 1:
        raise InvalidInput(f"d must be >= 1, got {config.d}")
    if config.hidden_count not in HIDDEN_COUNTS:
        raise InvalidInput(f"hidden_count must be one of {HIDDEN_COUNTS}, got {config.hidden_count}")
    if config.loss_kind not in LOSS_KINDS:
        raise InvalidInput(f"unknown loss kind {config.loss_kind!r}, expected one of {LOSS_KINDS}")
    if config.batch_size < 1:
        raise InvalidInput(f"batch_size must be >= 1, got {config.batch_size}")

    rng = np.random.default_rng(config.seed)
    d = config.d
    hidden = [d] * config.hidden_count

    enc_w, enc_b, dec_w, dec_b = [], [], [], []
    for view in batch.views:
        ws, bs, _ = _init_net(rng, [view.dim] + hidden + [d], config.hidden_count)
        enc_w.append(ws)
        enc_b.append(bs)
    for view in batch.views:
        ws, bs, _ = _init_net(rng, [d] + hidden + [view.dim], config.hidden_count)
        dec_w.append(ws)
        dec_b.append(bs)

    params = [arr for group in (enc_w, enc_b, dec_w, dec_b) for net in group for arr in net]
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    step = 0

    data = [v.matrix for v in batch.views]
    n = batch.n_sentences
    bs_eff = min(config.batch_size, n)
    train_log = []

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, bs_eff):
            idx = perm[start : start + bs_eff]
            xs = [mat[idx] for mat in data]
            obj, (gew, geb, gdw, gdb) = _batch_objective_and_grads(
                enc_w, enc_b, dec_w, dec_b, config.loss_kind, xs
            )
            if not np.isfinite(obj):
                raise NumericalError(
                    f"training loss became non-finite at epoch {epoch}", epoch=epoch
                )
            loss_sum += obj * len(idx)
            grads = [arr for group in (gew, geb, gdw, gdb) for net in group for arr in net]
            step += 1
            bc1 = 1.0 - config.beta1**step
            bc2 = 1.0 - config.beta2**step
            for p, g, m, v in zip(params, grads, m_state, v_state):
                m *= config.beta1
                m += (1.0 - config.beta1) * g
                v *= config.beta2
                v += (1.0 - config.beta2) * g * g
                p -= config.lr * (m / bc1) / (np.sqrt(v / bc2) + _ADAM_EPS)
        train_log.append(loss_sum / n)

    log = np.asarray(train_log)
    log.setflags(write=False)
    return AeModel(
        encoders=tuple(
            _freeze_net(ws, bs, config.hidden_count) for ws, bs in zip(enc_w, enc_b)
        ),
        decoders=tuple(
            _freeze_net(ws, bs, config.hidden_count) for ws, bs in zip(dec_w, dec_b)
        ),
        loss_kind=config.loss_kind,
        d=d,
        train_log=log,
        config=config,
        encoder_ids=tuple(v.encoder_id for v in batch.views),
        view_dims=batch.dims,
    )


def apply_ae(model: AeModel, batch: EnsembleBatch) -> EmbeddingView:
    """Fuse new rows as the sum of per-view encoder outputs."""
    if batch.dims != model.view_dims:
        raise InvalidInput(
            f"view dims {batch.dims} do not match the fitted dims {model.view_dims}"
        )
    out = np.zeros((batch.n_sentences, model.d))
    for view, enc in zip(batch.views, model.encoders):
        out += enc.forward(view.matrix)
    return EmbeddingView("meta:ae", out)
