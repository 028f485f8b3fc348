"""Static tables: skeleton layouts, joint codes, experiment variants, model presets."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ConfigError

# Canonical right-side joint order used for every tensor in the pipeline.
JOINTS = ("wrist", "elbow", "shoulder", "hip", "knee", "ankle")
JOINT_LETTER = {"W": "wrist", "E": "elbow", "S": "shoulder", "H": "hip", "K": "knee", "A": "ankle"}

# Joint name -> keypoint index, per supported skeleton layout.
LAYOUTS: dict[str, dict[str, int]] = {
    "body25": {"shoulder": 2, "elbow": 3, "wrist": 4, "hip": 9, "knee": 10, "ankle": 11},
    "coco18": {"shoulder": 2, "elbow": 3, "wrist": 4, "hip": 8, "knee": 9, "ankle": 10},
}
LAYOUT_SIZE = {"body25": 25, "coco18": 18}

JOINT_CODES = ("W", "WES", "WESH", "WESK", "WESA", "WESHK", "WESHA", "WESKA", "WESHKA")

T_DEVICE = 135  # controller samples per 3 s trial (45 Hz)
F_VIDEO = 180  # video frames per trial (60 Hz)

LI_BASELINE = "Li2024-3Dfrom3D"
VARIANTS = (
    LI_BASELINE,
    "2Dfrom2D_W",
    "2Dfrom2D_WES",
    *(f"3Dfrom2D_{c}" for c in JOINT_CODES),
)

# Window grid of the published tables, as (w, w_in).
FULL_GRID = (
    (40, 30), (50, 30), (50, 40), (60, 40), (60, 50), (70, 40), (70, 50), (70, 60),
    (80, 50), (80, 60), (80, 70), (90, 50), (90, 60), (90, 70), (100, 60), (100, 70),
    (110, 60), (110, 70), (120, 70), (130, 70),
)
SMALL_GRID = ((40, 30), (50, 30))
GRIDS = {"full": FULL_GRID, "small": SMALL_GRID}


def check_layout(layout: str) -> dict[str, int]:
    try:
        return LAYOUTS[layout]
    except KeyError:
        raise ConfigError(f"unknown skeleton layout {layout!r}; expected one of {sorted(LAYOUTS)}") from None


def code_joints(code: str) -> tuple[str, ...]:
    """Joint names for an experiment code, in canonical order."""
    if code not in JOINT_CODES:
        raise ConfigError(f"unknown experiment code {code!r}; expected one of {JOINT_CODES}")
    wanted = {JOINT_LETTER[c] for c in code}
    return tuple(j for j in JOINTS if j in wanted)


@dataclass(frozen=True)
class Variant:
    """What an experiment feeds in and predicts.

    ``input_kind`` is ``"2d"`` (joint tracks) or ``"3d"`` (controller track);
    ``target_kind`` is ``"3d"`` (controller) or ``"2d"`` (wrist track).
    """

    name: str
    code: str
    input_kind: str
    target_kind: str

    @property
    def is_li(self) -> bool:
        return self.name == LI_BASELINE

    @property
    def n_in(self) -> int:
        return len(code_joints(self.code))

    @property
    def in_features(self) -> int:
        return 3 if self.input_kind == "3d" else 2 * self.n_in

    @property
    def out_channels(self) -> int:
        return 3 if self.target_kind == "3d" else 2


def parse_variant(name: str) -> Variant:
    if name == LI_BASELINE:
        return Variant(name, "W", "3d", "3d")
    if name not in VARIANTS:
        raise ConfigError(f"unknown variant {name!r}; expected one of {VARIANTS}")
    kind, code = name.split("_", 1)
    target = "3d" if kind == "3Dfrom2D" else "2d"
    return Variant(name, code, "2d", target)


def expand_variant(name: str) -> str:
    """Accept a bare joint code (``WESHKA``) or ``li`` as shorthand for a variant name."""
    if name in VARIANTS:
        return name
    if name.lower() in ("li", "li2024"):
        return LI_BASELINE
    if f"3Dfrom2D_{name}" in VARIANTS:
        return f"3Dfrom2D_{name}"
    raise ConfigError(f"unknown variant {name!r}; expected one of {VARIANTS}")


@dataclass(frozen=True)
class TrajConfig:
    d_model: int = 512
    n_head: int = 8
    d_k: int = 64
    n_enc_layers: int = 3
    n_dec_layers: int = 1
    d_ffn: int = 2048
    w: int = 90
    w_in: int = 60
    n_in: int = 6
    in_features: int = 12
    out_channels: int = 3
    t_total: int = T_DEVICE
    decoder: str = "full"  # "full" (cross-modal) or "informer" (overlap + zero slots)

    def __post_init__(self):
        if self.w_in >= self.w:
            raise ConfigError(f"w_in ({self.w_in}) must be smaller than w ({self.w})")
        if self.d_model != self.n_head * self.d_k:
            raise ConfigError(
                f"d_model ({self.d_model}) must equal n_head*d_k ({self.n_head}*{self.d_k})"
            )
        if self.decoder not in ("full", "informer"):
            raise ConfigError(f"unknown decoder mode {self.decoder!r}")
        if self.w > self.t_total:
            raise ConfigError(f"w ({self.w}) exceeds trial length {self.t_total}")

    @property
    def overlap(self) -> int:
        """Informer-mode decoder overlap (floor of w_in / 2)."""
        return self.w_in // 2

    @property
    def out_len(self) -> int:
        return self.w if self.decoder == "full" else self.w - (self.w_in - self.overlap)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AuthConfig:
    filters: tuple[int, ...] = (128, 256, 128)
    kernels: tuple[int, ...] = (8, 5, 3)
    in_channels: int = 3
    n_classes: int = 2

    def __post_init__(self):
        if len(self.filters) != 3 or len(self.kernels) != 3:
            raise ConfigError("authenticator needs exactly three conv blocks")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["filters"], d["kernels"] = list(self.filters), list(self.kernels)
        return d


@dataclass(frozen=True)
class Preset:
    name: str
    d_model: int
    n_head: int
    d_k: int
    d_ffn: int
    auth_filters: tuple[int, ...]
    epochs: int
    batch_size: int = 32
    lr: float = 1e-4
    stride: int = 1  # window stride used when a run does not set one


PRESETS = {
    "paper": Preset("paper", 512, 8, 64, 2048, (128, 256, 128), epochs=50),
    "desk": Preset("desk", 64, 4, 16, 128, (32, 64, 32), epochs=30, stride=4),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}") from None


def make_configs(variant: Variant, w: int, w_in: int, preset: Preset) -> tuple[TrajConfig, AuthConfig]:
    traj = TrajConfig(
        d_model=preset.d_model,
        n_head=preset.n_head,
        d_k=preset.d_k,
        d_ffn=preset.d_ffn,
        w=w,
        w_in=w_in,
        n_in=variant.n_in if variant.input_kind == "2d" else 1,
        in_features=variant.in_features,
        out_channels=variant.out_channels,
        decoder="informer" if variant.is_li else "full",
    )
    auth = AuthConfig(filters=preset.auth_filters, in_channels=variant.out_channels)
    return traj, auth
