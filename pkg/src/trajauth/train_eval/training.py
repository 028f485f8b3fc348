"""Joint training of the forecaster and authenticator, plus per-user evaluation."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from ..auth_model import AuthModel
from ..config import AuthConfig, expand_variant, TrajConfig, Variant, get_preset, make_configs, parse_variant
from ..errors import ConfigError, DataError, NumericalError
from ..nn import Adam, backward, functional as F, no_grad
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.tensor import Tensor
from ..traj_model import TrajModel, li_auth_input
from ..windows import WindowSet
from .metrics import EERResult, compute_eer, forecast_mse

log = logging.getLogger(__name__)


@dataclass
class ExperimentSpec:
    variant: str = "3Dfrom2D_WESHKA"
    w: int = 90
    w_in: int = 60
    stride: int | None = None  # None -> preset default, like the three below
    seed: int = 0
    epochs: int | None = None
    batch_size: int | None = None
    lr: float | None = None
    lam: float = 0.5
    preset: str = "desk"

    def __post_init__(self):
        self.variant = expand_variant(self.variant)
        get_preset(self.preset)
        if self.w_in >= self.w:
            raise ConfigError(f"w_in ({self.w_in}) must be smaller than w ({self.w})")
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if self.stride is not None and self.stride < 1:
            raise ConfigError("stride must be >= 1")

    @property
    def parsed_variant(self) -> Variant:
        return parse_variant(self.variant)

    def resolved(self) -> "ExperimentSpec":
        p = get_preset(self.preset)
        return ExperimentSpec(
            self.variant, self.w, self.w_in,
            self.stride if self.stride is not None else p.stride,
            self.seed,
            self.epochs if self.epochs is not None else p.epochs,
            self.batch_size if self.batch_size is not None else p.batch_size,
            self.lr if self.lr is not None else p.lr,
            self.lam, self.preset,
        )

    def configs(self) -> tuple[TrajConfig, AuthConfig]:
        return make_configs(self.parsed_variant, self.w, self.w_in, get_preset(self.preset))

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# data plumbing


@dataclass
class Arrays:
    """Model-ready tensors for one window set and variant."""

    inputs: np.ndarray  # (N, w_in, n_in, 2) or (N, w_in, 3)
    starts: np.ndarray  # (N,)
    targets: np.ndarray  # (N, out_len, C)
    labels: np.ndarray  # (N,)
    prefix: np.ndarray | None  # observed samples prepended for the baseline's authenticator
    sessions: np.ndarray  # (N,)

    def __len__(self):
        return len(self.labels)

    def take(self, idx) -> "Arrays":
        return Arrays(
            self.inputs[idx], self.starts[idx], self.targets[idx], self.labels[idx],
            None if self.prefix is None else self.prefix[idx], self.sessions[idx],
        )


def variant_arrays(ws: WindowSet, variant: Variant | str) -> Arrays:
    if isinstance(variant, str):
        variant = parse_variant(variant)
    pairs = ws.pairs()
    if not pairs:
        raise DataError("empty window set")
    starts = np.array([p.start for p in pairs], dtype=np.int64)
    labels = np.array([p.label for p in pairs], dtype=np.float64)
    sessions = np.array([p.source[1] for p in pairs], dtype=np.int64)
    t3 = np.stack([p.target3d for p in pairs])
    prefix = None
    if variant.is_li:
        keep = ws.w_in - ws.w_in // 2
        inputs = t3[:, : ws.w_in, :]
        targets = t3[:, keep:, :]
        prefix = t3[:, :keep, :]
    else:
        if ws.experiment != variant.code:
            raise ConfigError(
                f"window set carries joints {ws.experiment!r} but variant {variant.name} needs {variant.code!r}"
            )
        inputs = np.stack([p.input2d for p in pairs])
        targets = t3 if variant.target_kind == "3d" else np.stack([p.target2d for p in pairs])
    return Arrays(inputs, starts, targets, labels, prefix, sessions)


def windows_code(variant: Variant | str) -> str:
    """Joint code a window set must be built with for ``variant``."""
    if isinstance(variant, str):
        variant = parse_variant(variant)
    return variant.code


# ---------------------------------------------------------------------------
# forward / loss


def loss_total(pred3d: Tensor, gt3d, p_genuine: Tensor, labels, lam: float):
    """``MSE(pred, gt) + lam * BCE(p_genuine, label)``; returns (total, traj term, auth term)."""
    l_traj = F.mse_loss(pred3d, gt3d)
    l_auth = F.bce_loss(p_genuine, labels)
    return l_traj + l_auth * lam, l_traj, l_auth


def forward_pair(traj: TrajModel, auth: AuthModel, batch: Arrays):
    pred = traj(batch.inputs, batch.starts)
    auth_in = pred if batch.prefix is None else li_auth_input(batch.prefix, pred, traj.cfg.w_in)
    probs = auth(auth_in)
    return pred, probs[:, 1]


def build_models(spec: ExperimentSpec, dtype=np.float32) -> tuple[TrajModel, AuthModel]:
    tcfg, acfg = spec.configs()
    ss = np.random.SeedSequence(spec.seed)
    s_traj, s_auth = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    return TrajModel(tcfg, s_traj, dtype), AuthModel(acfg, s_auth, dtype)


@dataclass
class TrainResult:
    traj: TrajModel
    auth: AuthModel
    log: list[dict] = field(default_factory=list)
    steps: int = 0


def train_user(
    spec: ExperimentSpec,
    train: WindowSet,
    dtype=np.float32,
    on_batch: Callable[[int, int, TrajModel, AuthModel], None] | None = None,
    models: tuple[TrajModel, AuthModel] | None = None,
) -> TrainResult:
    """Mini-batch Adam on the joint loss over genuine and impostor windows alike."""
    spec = spec.resolved()
    if len(train.genuine) != len(train.impostor):
        raise DataError("training set is not balanced")
    data = variant_arrays(train, spec.parsed_variant)
    traj, auth = models or build_models(spec, dtype)
    traj.train()
    auth.train()
    named = [(f"traj.{n}", p) for n, p in traj.named_parameters()]
    named += [(f"auth.{n}", p) for n, p in auth.named_parameters()]
    opt = Adam(named, lr=spec.lr)
    rng = np.random.default_rng([spec.seed, 0x7A])
    history = []
    steps = 0
    for epoch in range(spec.epochs):
        order = rng.permutation(len(data))
        sums = np.zeros(3)
        n_batches = 0
        for b, lo in enumerate(range(0, len(order), spec.batch_size)):
            batch = data.take(order[lo : lo + spec.batch_size])
            opt.zero_grad()
            pred, p_gen = forward_pair(traj, auth, batch)
            total, l_traj, l_auth = loss_total(pred, batch.targets, p_gen, batch.labels, spec.lam)
            if not np.isfinite(total.item()):
                raise NumericalError(f"loss diverged at epoch {epoch} batch {b}")
            backward(total)
            if on_batch is not None:
                on_batch(epoch, b, traj, auth)
            try:
                opt.step()
            except NumericalError as exc:
                raise NumericalError(f"epoch {epoch} batch {b}: {exc}") from None
            steps += 1
            sums += (total.item(), l_traj.item(), l_auth.item())
            n_batches += 1
        loss, lt, la = sums / max(n_batches, 1)
        history.append({"epoch": epoch, "loss": loss, "loss_traj": lt, "loss_auth": la})
        log.debug("epoch %d loss %.5f (traj %.5f, auth %.5f)", epoch, loss, lt, la)
    return TrainResult(traj, auth, history, steps)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvalRow:
    user: str
    w: int
    w_in: int
    variant: str
    forecast_mse: float
    eer: float
    threshold: float
    far_frr_curve: list
    genuine_scores: np.ndarray
    impostor_scores: np.ndarray
    notes: list[str] = field(default_factory=list)


def predict(traj: TrajModel, auth: AuthModel, data: Arrays, batch_size: int = 128):
    """Eval-mode forecasts and genuine scores for every window."""
    traj.eval()
    auth.eval()
    preds, scores = [], []
    with no_grad():
        for lo in range(0, len(data), batch_size):
            batch = data.take(slice(lo, lo + batch_size))
            pred, p_gen = forward_pair(traj, auth, batch)
            preds.append(pred.data)
            scores.append(p_gen.data)
    return np.concatenate(preds), np.concatenate(scores).astype(np.float64)


def eval_user(traj: TrajModel, auth: AuthModel, test: WindowSet, variant: str) -> EvalRow:
    """Forecast MSE over genuine test windows and EER over genuine + impostor scores."""
    for p in test.genuine:
        if p.source[1] == 1:
            raise DataError(f"session hygiene: test window from training session {p.source}")
    data = variant_arrays(test, variant)
    preds, scores = predict(traj, auth, data)
    genuine = data.labels == 1
    mse = forecast_mse(preds[genuine], data.targets[genuine])
    res: EERResult = compute_eer(scores[genuine], scores[~genuine])
    notes = []
    if parse_variant(variant).is_li and test.w_in % 2:
        notes.append(f"odd w_in={test.w_in}: overlap rounded down to {test.w_in // 2}")
    return EvalRow(
        test.user, test.w, test.w_in, variant, mse, res.eer, res.threshold, res.curve,
        scores[genuine], scores[~genuine], notes,
    )


# ---------------------------------------------------------------------------
# checkpoints


def save_bundle(path, result: TrainResult, spec: ExperimentSpec, extra: dict | None = None) -> None:
    tensors = {f"traj.{k}": v for k, v in result.traj.state_dict().items()}
    tensors.update({f"auth.{k}": v for k, v in result.auth.state_dict().items()})
    meta = {
        "format": "trajauth-bundle",
        "spec": spec.resolved().to_dict(),
        "traj_config": result.traj.cfg.to_dict(),
        "auth_config": result.auth.cfg.to_dict(),
        "step": result.steps,
    }
    if extra:
        meta.update(extra)
    save_checkpoint(path, tensors, meta)


def load_bundle(path) -> tuple[TrajModel, AuthModel, dict]:
    tensors, meta = load_checkpoint(path)
    if meta.get("format") != "trajauth-bundle":
        raise DataError(f"{path}: not a model bundle")
    tcfg = TrajConfig(**meta["traj_config"])
    ac = meta["auth_config"]
    acfg = AuthConfig(tuple(ac["filters"]), tuple(ac["kernels"]), ac["in_channels"], ac["n_classes"])
    traj, auth = TrajModel(tcfg), AuthModel(acfg)
    traj.load_state_dict({k[5:]: v for k, v in tensors.items() if k.startswith("traj.")})
    auth.load_state_dict({k[5:]: v for k, v in tensors.items() if k.startswith("auth.")})
    return traj, auth, meta


def write_training_log(path, history: list[dict]) -> None:
    with open(path, "w") as fh:
        for rec in history:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
