"""Seeded synthetic throwing corpus and brute-force oracles.

Each user is a planar side-view kinematic chain (hip -> shoulder -> elbow ->
wrist, hip -> knee -> ankle) whose joint angles follow a per-user
sinusoid-plus-ramp profile. The controller track is the wrist lifted to 3D
with a user-specific depth modulation. Trial-to-trial variability is
injected in angle space, so limb lengths stay exact.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import yaml

from .config import F_VIDEO, T_DEVICE
from .errors import ConfigError
from .ingest import (
    Corpus,
    MotionTrial,
    downsample_uniform,
    fit_norm_stats,
    normalize_trial,
    write_controller_csv,
    write_keypoint_jsonl,
)

IMAGE_W, IMAGE_H = 1920, 1080
PX_PER_M = 400.0
ORIGIN_PX = (760.0, 1020.0)
VIDEO_FPS, DEVICE_FPS = 60.0, 45.0

# (low, high) sampling range per signature parameter
_RANGES = {
    "upper_arm": (0.27, 0.35),
    "forearm": (0.23, 0.30),
    "trunk": (0.45, 0.58),
    "thigh": (0.40, 0.50),
    "shin": (0.38, 0.47),
    "shoulder_base": (0.2, 0.8),
    "shoulder_amp": (0.3, 0.9),
    "shoulder_freq": (0.4, 1.2),
    "shoulder_phase": (0.0, 2 * np.pi),
    "shoulder_ramp": (1.0, 2.4),
    "elbow_base": (0.3, 1.2),
    "elbow_amp": (0.2, 0.8),
    "elbow_freq": (0.5, 1.5),
    "elbow_phase": (0.0, 2 * np.pi),
    "elbow_ramp": (-1.2, 0.2),
    "lean_base": (-0.15, 0.15),
    "lean_amp": (0.05, 0.3),
    "leg_freq": (0.3, 1.0),
    "leg_phase": (0.0, 2 * np.pi),
    "hip_amp": (0.05, 0.35),
    "knee_amp": (0.05, 0.45),
    "release_time": (1.3, 2.2),
    "depth_amp": (0.1, 0.4),
    "depth_phase": (0.0, 2 * np.pi),
}
_KEYS = tuple(_RANGES)


@dataclass(frozen=True)
class UserSignature:
    upper_arm: float
    forearm: float
    trunk: float
    thigh: float
    shin: float
    shoulder_base: float
    shoulder_amp: float
    shoulder_freq: float
    shoulder_phase: float
    shoulder_ramp: float
    elbow_base: float
    elbow_amp: float
    elbow_freq: float
    elbow_phase: float
    elbow_ramp: float
    lean_base: float
    lean_amp: float
    leg_freq: float
    leg_phase: float
    hip_amp: float
    knee_amp: float
    release_time: float
    depth_amp: float
    depth_phase: float
    noise_scale: float = 0.03

    def normalized(self) -> np.ndarray:
        d = asdict(self)
        return np.array([(d[k] - lo) / (hi - lo) for k, (lo, hi) in _RANGES.items()])


def separation(a: UserSignature, b: UserSignature) -> float:
    """Largest range-normalised parameter difference between two users."""
    return float(np.max(np.abs(a.normalized() - b.normalized())))


def draw_signatures(n_users: int, seed: int, noise_scale: float = 0.03, margin: float = 0.25):
    """Draw ``n_users`` signatures, each differing from every other by >= ``margin``."""
    rng = np.random.default_rng([seed, 0x51])
    sigs: list[UserSignature] = []
    for _ in range(n_users):
        for _attempt in range(1000):
            vals = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in _RANGES.items()}
            cand = UserSignature(**vals, noise_scale=noise_scale)
            if all(separation(cand, s) >= margin for s in sigs):
                sigs.append(cand)
                break
        else:  # pragma: no cover
            raise ConfigError(f"could not draw {n_users} users with separation margin {margin}")
    return sigs


def _smooth_noise(rng: np.random.Generator, t: np.ndarray, scale: float, n_terms: int = 3) -> np.ndarray:
    out = np.zeros_like(t)
    if scale == 0:
        return out
    for _ in range(n_terms):
        f = rng.uniform(0.2, 1.5)
        out += rng.normal(0.0, scale) * np.sin(2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return out


def _ramp(t, t0, width=0.18):
    return 1.0 / (1.0 + np.exp(-(t - t0) / width))


@dataclass(frozen=True)
class _TrialDraw:
    """Per-trial perturbations (zero when the noise scale is zero)."""

    rel_shift: float
    drift: float
    seed: int


def _angles(sig: UserSignature, t: np.ndarray, draw: _TrialDraw):
    rng = np.random.default_rng(draw.seed)
    ns = sig.noise_scale
    rel = sig.release_time + draw.rel_shift
    sh = (sig.shoulder_base + draw.drift
          + sig.shoulder_amp * np.sin(2 * np.pi * sig.shoulder_freq * t + sig.shoulder_phase)
          + sig.shoulder_ramp * _ramp(t, rel) + _smooth_noise(rng, t, ns))
    el = (sig.elbow_base
          + sig.elbow_amp * np.sin(2 * np.pi * sig.elbow_freq * t + sig.elbow_phase)
          + sig.elbow_ramp * _ramp(t, rel + 0.05) + _smooth_noise(rng, t, ns))
    leg = 2 * np.pi * sig.leg_freq * t + sig.leg_phase
    lean = sig.lean_base + draw.drift * 0.5 + sig.lean_amp * np.sin(leg) + _smooth_noise(rng, t, ns * 0.5)
    hip = sig.hip_amp * np.sin(leg + 0.7) + _smooth_noise(rng, t, ns * 0.5)
    knee = sig.knee_amp * (0.5 + 0.5 * np.sin(leg + 1.9)) + _smooth_noise(rng, t, ns * 0.5)
    return sh, el, lean, hip, knee


def _unit(theta):
    # angle measured from the downward vertical, positive towards +x
    return np.stack([np.sin(theta), -np.cos(theta)], axis=-1)


def forward_kinematics(sig: UserSignature, t: np.ndarray, draw: _TrialDraw):
    """Joint positions in metres, ``(len(t), 6, 2)`` canonical order, plus the 3D controller."""
    sh, el, lean, hip_a, knee_a = _angles(sig, t, draw)
    hip = np.zeros((len(t), 2))
    hip[:, 1] = sig.thigh + sig.shin
    shoulder = hip + sig.trunk * np.stack([np.sin(lean), np.cos(lean)], axis=-1)
    elbow = shoulder + sig.upper_arm * _unit(sh)
    wrist = elbow + sig.forearm * _unit(sh + el)
    knee = hip + sig.thigh * _unit(hip_a)
    ankle = knee + sig.shin * _unit(hip_a - knee_a)
    joints = np.stack([wrist, elbow, shoulder, hip, knee, ankle], axis=1)
    depth = sig.depth_amp * np.sin(sh + sig.depth_phase) + 0.3
    controller = np.column_stack([wrist[:, 0] + 0.04, wrist[:, 1], depth])
    return joints, controller


def to_pixels(joints_m: np.ndarray) -> np.ndarray:
    out = np.empty_like(joints_m)
    out[..., 0] = ORIGIN_PX[0] + PX_PER_M * joints_m[..., 0]
    out[..., 1] = ORIGIN_PX[1] - PX_PER_M * joints_m[..., 1]
    return out


@dataclass
class RawTrial:
    """Unsynchronised trial as recorded: video-rate pixels and device-rate metres."""

    user_id: str
    session: int
    trial: int
    joints_video: np.ndarray  # (180, 6, 2) pixels
    controller: np.ndarray  # (135, 3) metres


def user_id(i: int) -> str:
    return f"u{i:02d}"


def generate_raw(
    n_users: int,
    seed: int,
    sessions: int = 2,
    trials: int = 10,
    noise_scale: float = 0.03,
    session_drift: float = 0.04,
) -> list[RawTrial]:
    if n_users < 2:
        raise ConfigError("synthetic corpus needs at least 2 users")
    sigs = draw_signatures(n_users, seed, noise_scale)
    t_video = np.arange(F_VIDEO) / VIDEO_FPS
    t_dev = np.arange(T_DEVICE) / DEVICE_FPS
    out = []
    for ui, sig in enumerate(sigs):
        for s in range(1, sessions + 1):
            srng = np.random.default_rng([seed, ui, s, 0xD1])
            drift = 0.0 if s == 1 else float(srng.choice([-1.0, 1.0]) * session_drift)
            for tr in range(1, trials + 1):
                trng = np.random.default_rng([seed, ui, s, tr])
                draw = _TrialDraw(
                    rel_shift=float(trng.normal(0.0, 2.0 * noise_scale)),
                    drift=drift,
                    seed=int(trng.integers(2**31)),
                )
                j_vid, _ = forward_kinematics(sig, t_video, draw)
                _, ctrl = forward_kinematics(sig, t_dev, draw)
                if noise_scale:
                    ctrl = ctrl + trng.normal(0.0, 0.05 * noise_scale, ctrl.shape)
                out.append(RawTrial(user_id(ui), s, tr, to_pixels(j_vid), ctrl))
    return out


def raw_to_corpus(raw: list[RawTrial], normalize: bool = True) -> Corpus:
    trials = [
        MotionTrial(r.user_id, r.session, r.trial, downsample_uniform(r.joints_video, T_DEVICE), r.controller)
        for r in raw
    ]
    stats = fit_norm_stats(trials, IMAGE_W, IMAGE_H)
    if normalize:
        trials = [normalize_trial(t, stats) for t in trials]
    return Corpus(trials, stats, {"layout": "body25", "video_frames": F_VIDEO, "synthetic": True})


def generate_corpus(
    n_users: int,
    seed: int,
    sessions: int = 2,
    trials: int = 10,
    T: int = T_DEVICE,
    noise_scale: float = 0.03,
    normalize: bool = True,
) -> Corpus:
    """Seeded corpus of ``n_users x sessions x trials`` synchronised trials."""
    if T != T_DEVICE:
        raise ConfigError(f"synthetic trials are generated at {T_DEVICE} device samples")
    return raw_to_corpus(generate_raw(n_users, seed, sessions, trials, noise_scale), normalize)


def write_dataset(raw: list[RawTrial], out_dir, layout: str = "body25") -> Path:
    """Write keypoint JSONL + controller CSV per trial and a ``manifest.yaml``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    users: dict[str, list] = {}
    for r in raw:
        rel = Path(r.user_id) / f"s{r.session}"
        (out / rel).mkdir(parents=True, exist_ok=True)
        kp = rel / f"t{r.trial:02d}_keypoints.jsonl"
        ct = rel / f"t{r.trial:02d}_controller.csv"
        write_keypoint_jsonl(out / kp, r.joints_video, layout)
        write_controller_csv(out / ct, r.controller)
        users.setdefault(r.user_id, []).append(
            {"session": r.session, "trial": r.trial, "keypoints": kp.as_posix(), "controller": ct.as_posix()}
        )
    manifest = {
        "image_width": IMAGE_W,
        "image_height": IMAGE_H,
        "layout": layout,
        "video_frames": F_VIDEO,
        "users": [{"id": u, "trials": trs} for u, trs in sorted(users.items())],
    }
    path = out / "manifest.yaml"
    path.write_text(yaml.safe_dump(manifest, sort_keys=False))
    return path


# ---------------------------------------------------------------------------
# oracles


def oracle_eer(genuine, impostor) -> float:
    """EER by exhaustive scan: every score is tried as a threshold, O(n^2)."""
    genuine = [float(g) for g in genuine]
    impostor = [float(i) for i in impostor]
    if not genuine or not impostor:
        raise ValueError("oracle_eer needs non-empty score lists")
    best = None
    for theta in sorted(set(genuine) | set(impostor)):
        far = sum(1 for s in impostor if s >= theta) / len(impostor)
        frr = sum(1 for s in genuine if s < theta) / len(genuine)
        gap = abs(far - frr)
        # strict '<' keeps the lowest threshold on ties
        if best is None or gap < best[0]:
            best = (gap, (far + frr) / 2)
    return best[1]


def oracle_windows(T: int, w: int, stride: int) -> list[int]:
    starts = []
    s = 0
    while True:
        if s + w > T:
            break
        starts.append(s)
        s += stride
    return starts

