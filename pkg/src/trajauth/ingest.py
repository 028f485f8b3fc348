"""Keypoint/controller parsing and assembly of synchronised motion trials.

Keypoint input accepts three shapes of the same per-frame record
(``{"people": [{"pose_keypoints_2d": [x0, y0, c0, x1, ...]}]}``):

* a JSON-lines file, one record per line;
* a JSON document holding a list of records, or ``{"frames": [...]}``;
* a directory of per-frame ``*.json`` files (sorted by name).

A record with no person, or a joint reported as ``(0, 0, 0)``, is a missing
detection: its coordinates are carried forward from the previous frame
(zeros on the first frame) and its confidence is 0.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .config import F_VIDEO, JOINTS, LAYOUT_SIZE, T_DEVICE, check_layout, code_joints
from .errors import ConfigError, DataError, ParseError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class KeypointFrame:
    frame_index: int
    joints: np.ndarray  # (n_layout, 3): x, y, confidence
    layout: str


@dataclass(frozen=True)
class ControllerFrame:
    time_index: int
    position: tuple[float, float, float]


@dataclass
class MotionTrial:
    user_id: str
    session: int
    trial: int
    joints2d: np.ndarray  # (T, n_in, 2)
    controller3d: np.ndarray  # (T, 3)
    joint_names: tuple[str, ...] = JOINTS

    def __post_init__(self):
        if len(self.joints2d) != len(self.controller3d):
            raise DataError(
                f"{self.key}: joints2d has {len(self.joints2d)} samples, "
                f"controller3d has {len(self.controller3d)}"
            )

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.user_id, self.session, self.trial)


@dataclass
class NormStats:
    image_width: float
    image_height: float
    mean3d: np.ndarray
    std3d: np.ndarray
    std_substituted: tuple[bool, bool, bool] = (False, False, False)

    def to_dict(self) -> dict:
        return {
            "image_width": float(self.image_width),
            "image_height": float(self.image_height),
            "mean3d": [float(v) for v in self.mean3d],
            "std3d": [float(v) for v in self.std3d],
            "std_substituted": list(self.std_substituted),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(
            d["image_width"], d["image_height"], np.asarray(d["mean3d"]),
            np.asarray(d["std3d"]), tuple(d.get("std_substituted", (False,) * 3)),
        )


# ---------------------------------------------------------------------------
# keypoint parsing


def _frame_from_record(rec, index: int, layout: str, prev: np.ndarray | None) -> KeypointFrame:
    n = LAYOUT_SIZE[layout]
    if not isinstance(rec, dict):
        raise ParseError(f"frame {index}: expected an object, got {type(rec).__name__}")
    people = rec.get("people")
    if people is None:
        raise ParseError(f"frame {index}: missing 'people' field")
    joints = np.zeros((n, 3))
    if people:
        flat = people[0].get("pose_keypoints_2d")
        if flat is None:
            raise ParseError(f"frame {index}: person has no 'pose_keypoints_2d'")
        try:
            arr = np.asarray(flat, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"frame {index}: non-numeric keypoints ({exc})") from None
        if arr.size != 3 * n:
            raise ParseError(f"frame {index}: expected {3 * n} values for {layout}, got {arr.size}")
        joints = arr.reshape(n, 3).copy()
        if not np.all(np.isfinite(joints)):
            raise ParseError(f"frame {index}: non-finite keypoint values")
        joints[:, 2] = np.clip(joints[:, 2], 0.0, 1.0)
        missing = (joints[:, 2] == 0) & (joints[:, 0] == 0) & (joints[:, 1] == 0)
    else:
        missing = np.ones(n, dtype=bool)
    joints[missing, :2] = prev[missing, :2] if prev is not None else 0.0
    joints[missing, 2] = 0.0
    return KeypointFrame(rec.get("frame_index", index), joints, layout)


def _load_records(path: Path) -> list:
    if path.is_dir():
        records = []
        for i, f in enumerate(sorted(path.glob("*.json"))):
            try:
                records.append(json.loads(f.read_text()))
            except json.JSONDecodeError as exc:
                raise ParseError(f"frame {i} ({f.name}): malformed JSON: {exc}") from None
        return records
    text = path.read_text()
    if path.suffix == ".jsonl":
        records = []
        for i, line in enumerate(l for l in text.splitlines() if l.strip()):
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: frame {i}: malformed JSON record: {exc}") from None
        return records
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON document: {exc}") from None
    if isinstance(doc, dict) and "frames" in doc:
        return doc["frames"]
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict) and "people" in doc:
        return [doc]
    raise ParseError(f"{path}: expected a list of frames or an object with 'frames'")


def parse_keypoint_file(path, layout: str = "body25") -> list[KeypointFrame]:
    check_layout(layout)
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    frames: list[KeypointFrame] = []
    prev = None
    for i, rec in enumerate(_load_records(path)):
        try:
            fr = _frame_from_record(rec, i, layout, prev)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from None
        frames.append(fr)
        prev = fr.joints
    return frames


def select_joints(frames, code: str, layout: str | None = None) -> np.ndarray:
    """Stack the code's joints, canonical order, into ``(F, n_in, 2)``."""
    names = code_joints(code)
    if not frames:
        return np.zeros((0, len(names), 2))
    layout = layout or frames[0].layout
    table = check_layout(layout)
    missing = [j for j in names if j not in table]
    if missing:
        raise ConfigError(f"layout {layout!r} has no joint(s) {missing}")
    idx = [table[j] for j in names]
    return np.stack([f.joints[idx, :2] for f in frames])


def downsample_uniform(frames: np.ndarray, t_dst: int) -> np.ndarray:
    """Endpoint-preserving uniform resampling by index selection."""
    return frames[downsample_indices(len(frames), t_dst)]


def downsample_indices(f_src: int, t_dst: int) -> np.ndarray:
    if t_dst < 1:
        raise ConfigError("target length must be >= 1")
    if f_src < t_dst:
        raise DataError(f"cannot downsample {f_src} frames to {t_dst} (no upsampling)")
    if t_dst == 1:
        return np.zeros(1, dtype=np.int64)
    i = np.arange(t_dst, dtype=np.int64)
    # exact integer round-half-up of i * (F-1) / (T-1)
    num = 2 * i * (f_src - 1) + (t_dst - 1)
    return num // (2 * (t_dst - 1))


# ---------------------------------------------------------------------------
# controller tracks


def parse_controller_csv(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "x", "y", "z"]:
            raise ParseError(f"{path}: header must be 't,x,y,z', got {header}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"{path}: line {lineno}: expected 4 columns")
            try:
                rows.append([float(v) for v in row[1:4]])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric value in {row}") from None
    arr = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
    if not np.all(np.isfinite(arr)):
        raise ParseError(f"{path}: non-finite controller coordinates")
    return arr


def write_controller_csv(path, track: np.ndarray) -> None:
    with Path(path).open("w", newline="") as fh:
        fh.write("t,x,y,z\n")
        for t, row in enumerate(np.asarray(track, dtype=np.float64).tolist()):
            fh.write(f"{t},{row[0]!r},{row[1]!r},{row[2]!r}\n")


def write_keypoint_jsonl(path, joints: np.ndarray, layout: str = "body25", conf: float = 1.0) -> None:
    """Write ``(F, 6, 2)`` canonical-order joint tracks as OpenPose-style JSON lines."""
    table = check_layout(layout)
    n = LAYOUT_SIZE[layout]
    with Path(path).open("w") as fh:
        for i, frame in enumerate(joints):
            kp = np.zeros((n, 3))
            for j, name in enumerate(JOINTS):
                kp[table[name], :2] = frame[j]
                kp[table[name], 2] = conf
            rec = {"frame_index": i, "people": [{"pose_keypoints_2d": [float(v) for v in kp.ravel()]}]}
            fh.write(json.dumps(rec) + "\n")


# ---------------------------------------------------------------------------
# normalisation


def fit_norm_stats(trials, image_width: float, image_height: float) -> NormStats:
    """Per-axis controller mean/std over session-1 trials only."""
    train = [t.controller3d for t in trials if t.session == 1]
    if not train:
        raise DataError("no session-1 trials to fit normalisation statistics")
    stacked = np.concatenate(train)
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    # a constant column can still show rounding-level spread around its mean
    zero = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    std = np.where(zero, 1.0, std)
    mean = np.where(zero, stacked[0], mean)  # centre a constant axis exactly on its value
    if zero.any():
        log.warning("zero std on controller axes %s; substituting 1", np.flatnonzero(zero).tolist())
    return NormStats(image_width, image_height, mean, std, tuple(bool(z) for z in zero))


def normalize_trial(trial: MotionTrial, stats: NormStats) -> MotionTrial:
    scale = np.array([stats.image_width, stats.image_height])
    return replace(
        trial,
        joints2d=trial.joints2d / scale,
        controller3d=(trial.controller3d - stats.mean3d) / stats.std3d,
    )


def denormalize_trial(trial: MotionTrial, stats: NormStats) -> MotionTrial:
    scale = np.array([stats.image_width, stats.image_height])
    return replace(
        trial,
        joints2d=trial.joints2d * scale,
        controller3d=trial.controller3d * stats.std3d + stats.mean3d,
    )


# ---------------------------------------------------------------------------
# corpus


@dataclass
class Corpus:
    trials: list[MotionTrial]
    stats: NormStats | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._index = {t.key: t for t in self.trials}

    @property
    def users(self) -> list[str]:
        return sorted({t.user_id for t in self.trials})

    def get(self, user: str, session: int, trial: int) -> MotionTrial:
        return self._index[(user, session, trial)]

    def user_trials(self, user: str, session: int | None = None) -> list[MotionTrial]:
        return sorted(
            (t for t in self.trials if t.user_id == user and (session is None or t.session == session)),
            key=lambda t: t.key,
        )

    def sessions(self, user: str) -> list[int]:
        return sorted({t.session for t in self.trials if t.user_id == user})

    def digest(self) -> str:
        h = hashlib.sha256()
        for t in sorted(self.trials, key=lambda t: t.key):
            h.update(repr(t.key).encode())
            h.update(np.ascontiguousarray(t.joints2d, dtype="<f8").tobytes())
            h.update(np.ascontiguousarray(t.controller3d, dtype="<f8").tobytes())
        return h.hexdigest()

    def save(self, path) -> None:
        arrays = {}
        keys = []
        for i, t in enumerate(sorted(self.trials, key=lambda t: t.key)):
            arrays[f"j{i}"] = t.joints2d
            arrays[f"c{i}"] = t.controller3d
            keys.append(list(t.key))
        header = {"keys": keys, "stats": self.stats.to_dict() if self.stats else None, "meta": self.meta}
        np.savez(path, header=np.frombuffer(json.dumps(header, sort_keys=True).encode(), dtype=np.uint8), **arrays)

    @classmethod
    def load(cls, path) -> "Corpus":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(path)
        with np.load(path) as z:
            header = json.loads(z["header"].tobytes())
            trials = [
                MotionTrial(u, s, tr, z[f"j{i}"], z[f"c{i}"])
                for i, (u, s, tr) in enumerate(header["keys"])
            ]
        stats = NormStats.from_dict(header["stats"]) if header["stats"] else None
        return cls(trials, stats, header.get("meta", {}))


def assemble_trial(
    user_id: str,
    session: int,
    trial: int,
    keypoint_path,
    controller_path,
    layout: str,
    t_dst: int = T_DEVICE,
) -> MotionTrial:
    frames = parse_keypoint_file(keypoint_path, layout)
    joints = downsample_uniform(select_joints(frames, "WESHKA", layout), t_dst)
    ctrl = parse_controller_csv(controller_path)
    if len(ctrl) != t_dst:
        if len(ctrl) < t_dst:
            raise DataError(f"{controller_path}: {len(ctrl)} rows, expected {t_dst}")
        ctrl = downsample_uniform(ctrl, t_dst)
    return MotionTrial(user_id, session, trial, joints, ctrl)


def load_manifest(path) -> dict:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.yaml"
    if not path.exists():
        raise FileNotFoundError(path)
    doc = yaml.safe_load(path.read_text()) or {}
    for key in ("image_width", "image_height", "layout", "users"):
        if key not in doc:
            raise ConfigError(f"manifest.{key}: required field missing ({path})")
    check_layout(doc["layout"])
    for ui, user in enumerate(doc["users"]):
        if "id" not in user or "trials" not in user:
            raise ConfigError(f"manifest.users[{ui}]: needs 'id' and 'trials'")
        for ti, tr in enumerate(user["trials"]):
            for key in ("session", "trial", "keypoints", "controller"):
                if key not in tr:
                    raise ConfigError(f"manifest.users[{ui}].trials[{ti}].{key}: required field missing")
            if tr["session"] not in (1, 2):
                raise ConfigError(f"manifest.users[{ui}].trials[{ti}].session: must be 1 or 2")
    doc["_root"] = str(path.parent)
    return doc


def ingest_manifest(path, normalize: bool = True) -> Corpus:
    """Parse every trial listed in a manifest and (optionally) normalise it."""
    doc = load_manifest(path)
    root = Path(doc["_root"])
    trials = []
    for user in doc["users"]:
        for tr in user["trials"]:
            trials.append(
                assemble_trial(
                    str(user["id"]), int(tr["session"]), int(tr["trial"]),
                    root / tr["keypoints"], root / tr["controller"], doc["layout"],
                )
            )
    stats = fit_norm_stats(trials, doc["image_width"], doc["image_height"])
    if normalize:
        trials = [normalize_trial(t, stats) for t in trials]
    meta = {"layout": doc["layout"], "video_frames": doc.get("video_frames", F_VIDEO)}
    return Corpus(trials, stats, meta)
