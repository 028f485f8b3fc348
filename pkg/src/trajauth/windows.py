"""Per-user sliding-window datasets with balanced genuine/impostor pairs."""
from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import JOINTS, T_DEVICE, code_joints
from .errors import ConfigError, DataError
from .ingest import Corpus, MotionTrial


@dataclass(frozen=True)
class WindowPair:
    input2d: np.ndarray  # (w_in, n_in, 2), joints of the experiment code
    target3d: np.ndarray  # (w, 3) controller over [start, start + w)
    target2d: np.ndarray  # (w, 2) wrist track over [start, start + w)
    label: int  # 1 genuine, 0 impostor
    start: int
    source: tuple[str, int, int]  # (user_id, session, trial)


@dataclass
class WindowSet:
    genuine: list[WindowPair]
    impostor: list[WindowPair]
    w: int
    w_in: int
    stride: int
    experiment: str
    user: str = ""
    session: int = 1
    seed: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.w_in >= self.w:
            raise ConfigError(f"w_in ({self.w_in}) must be smaller than w ({self.w})")

    def pairs(self) -> list[WindowPair]:
        """Genuine then impostor, in generation order."""
        return self.genuine + self.impostor

    def __len__(self) -> int:
        return len(self.genuine) + len(self.impostor)


def enumerate_windows(T: int, w: int, stride: int = 1) -> list[int]:
    if stride < 1:
        raise ConfigError(f"stride must be >= 1, got {stride}")
    if w < 1 or w > T:
        raise DataError(f"window {w} does not fit in a trial of length {T}")
    return list(range(0, T - w + 1, stride))


def _cut(trial: MotionTrial, start: int, w: int, w_in: int, idx: list[int], label: int) -> WindowPair:
    return WindowPair(
        input2d=trial.joints2d[start : start + w_in, idx, :],
        target3d=trial.controller3d[start : start + w],
        target2d=trial.joints2d[start : start + w, 0, :],
        label=label,
        start=start,
        source=trial.key,
    )


def user_seed(global_seed: int, user: str) -> int:
    """Stable per-user seed (independent of Python's salted ``hash``)."""
    digest = hashlib.sha256(f"{global_seed}:{user}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def build_window_set(
    corpus: Corpus,
    user: str,
    session: int,
    w: int,
    w_in: int,
    stride: int = 1,
    rng_seed: int = 0,
    code: str = "WESHKA",
) -> WindowSet:
    """Genuine windows over all starts of the user's trials, each paired with an impostor.

    For every genuine window an impostor user is drawn uniformly from the
    other users, then one of that user's sessions and one of its trials, and
    the segment at the same start index is cut.
    """
    if w_in >= w:
        raise ConfigError(f"w_in ({w_in}) must be smaller than w ({w})")
    others = [u for u in corpus.users if u != user]
    if not others:
        raise DataError("corpus has a single user; cannot build impostor windows")
    own = corpus.user_trials(user, session)
    if not own:
        raise DataError(f"user {user!r} has no trials in session {session}")
    idx = [JOINTS.index(j) for j in code_joints(code)]
    T = len(own[0].controller3d)
    starts = enumerate_windows(T, w, stride)

    rng = np.random.default_rng(user_seed(rng_seed, f"{user}/s{session}/{w}/{w_in}/{stride}"))
    pools = {u: {s: corpus.user_trials(u, s) for s in corpus.sessions(u)} for u in others}

    genuine, impostor = [], []
    for trial in own:
        for s in starts:
            genuine.append(_cut(trial, s, w, w_in, idx, 1))
            imp_user = others[rng.integers(len(others))]
            sess = sorted(pools[imp_user])
            imp_session = sess[rng.integers(len(sess))]
            cands = pools[imp_user][imp_session]
            imp_trial = cands[rng.integers(len(cands))]
            impostor.append(_cut(imp_trial, s, w, w_in, idx, 0))
    return WindowSet(genuine, impostor, w, w_in, stride, code, user, session, rng_seed)


def session_split(
    corpus: Corpus, user: str, w: int, w_in: int, stride: int = 1, rng_seed: int = 0, code: str = "WESHKA"
) -> tuple[WindowSet, WindowSet]:
    """(train from session 1, test from session 2)."""
    have = corpus.sessions(user)
    for s in (1, 2):
        if s not in have:
            raise DataError(f"user {user!r} is missing session {s}")
    train = build_window_set(corpus, user, 1, w, w_in, stride, rng_seed, code)
    test = build_window_set(corpus, user, 2, w, w_in, stride, rng_seed, code)
    return train, test


# ---------------------------------------------------------------------------
# serialisation

MAGIC = b"TAWS"
VERSION = 1


def _pair_meta(p: WindowPair) -> list:
    return [p.label, p.start, p.source[0], p.source[1], p.source[2]]


def save_window_set(ws: WindowSet, path) -> None:
    """JSON header + float32 row-major payload (inputs, 3D targets, 2D targets)."""
    pairs = ws.pairs()
    n_in = len(code_joints(ws.experiment))
    inputs = np.stack([p.input2d for p in pairs]).astype("<f4") if pairs else np.zeros((0, ws.w_in, n_in, 2), "<f4")
    t3 = np.stack([p.target3d for p in pairs]).astype("<f4") if pairs else np.zeros((0, ws.w, 3), "<f4")
    t2 = np.stack([p.target2d for p in pairs]).astype("<f4") if pairs else np.zeros((0, ws.w, 2), "<f4")
    header = {
        "w": ws.w, "w_in": ws.w_in, "stride": ws.stride, "experiment": ws.experiment,
        "user": ws.user, "session": ws.session, "seed": ws.seed,
        "n_genuine": len(ws.genuine), "n_impostor": len(ws.impostor),
        "shapes": {"input2d": list(inputs.shape), "target3d": list(t3.shape), "target2d": list(t2.shape)},
        "pairs": [_pair_meta(p) for p in pairs],
        "meta": ws.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", VERSION, len(blob)))
        fh.write(blob)
        for arr in (inputs, t3, t2):
            fh.write(np.ascontiguousarray(arr).tobytes())


def load_window_set(path) -> WindowSet:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise DataError(f"{path}: not a window-set file")
    version, hlen = struct.unpack_from("<IQ", raw, 4)
    if version != VERSION:
        raise DataError(f"{path}: unsupported window-set version {version}")
    off = 4 + struct.calcsize("<IQ")
    h = json.loads(raw[off : off + hlen])
    off += hlen
    arrays = []
    for key in ("input2d", "target3d", "target2d"):
        shape = h["shapes"][key]
        n = int(np.prod(shape))
        arrays.append(np.frombuffer(raw, "<f4", count=n, offset=off).reshape(shape).astype(np.float64))
        off += 4 * n
    pairs = [
        WindowPair(arrays[0][i], arrays[1][i], arrays[2][i], int(lab), int(st), (u, int(s), int(t)))
        for i, (lab, st, u, s, t) in enumerate(h["pairs"])
    ]
    ng = h["n_genuine"]
    return WindowSet(
        pairs[:ng], pairs[ng:], h["w"], h["w_in"], h["stride"], h["experiment"],
        h["user"], h["session"], h["seed"], h.get("meta", {}),
    )


def dump_csv(ws: WindowSet, path) -> None:
    """One row per window: metadata plus flattened input/target values."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "start", "user", "session", "trial", "input2d", "target3d"])
        for p in ws.pairs():
            writer.writerow(
                _pair_meta(p)
                + [" ".join(f"{v:.6g}" for v in p.input2d.ravel()),
                   " ".join(f"{v:.6g}" for v in p.target3d.ravel())]
            )


def check_invariants(ws: WindowSet, T: int = T_DEVICE) -> None:
    """Raise AssertionError if balance, containment or alignment fails."""
    assert len(ws.genuine) == len(ws.impostor), "unbalanced window set"
    for g, i in zip(ws.genuine, ws.impostor):
        assert g.start == i.start, "impostor start differs from its genuine window"
        assert i.source[0] != g.source[0], "impostor drawn from the genuine user"
        for p in (g, i):
            assert 0 <= p.start and p.start + ws.w <= T, "window exceeds the trial"
