"""
Configuration module for articulated object reconstruction.
관절 물체 복원 설정 모듈

핵심 흐름:
1) 과분할된 이동 제안(proposal) 생성 + 관절 초기화
2) 가우시안 필드 최적화 중 충돌 기반 모션 가지치기
3) 깊이 렌더 점수로 제안 병합 → 후처리 정제
"""
from dataclasses import dataclass, field, fields, is_dataclass, asdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union
import logging
import os

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from errors import ConfigError


logger = logging.getLogger(__name__)


def _get_log_level() -> str:
    """
    Default log level.
    우선순위: 환경 변수 PARTMOTION_LOG_LEVEL > INFO
    """
    return os.environ.get('PARTMOTION_LOG_LEVEL', 'INFO').upper()


class JointType(Enum):
    """Joint type state of a movable part."""
    UNKNOWN = "unknown"
    REVOLUTE = "revolute"
    PRISMATIC = "prismatic"


class PruneAction(Enum):
    """Calibration applied to a colliding part."""
    NONE = "none"
    PRISMATIC_PROJECTED = "prismatic_projected"
    REVOLUTE_RESET = "revolute_reset"


# ============================================================================
# CONFIG SECTIONS
# ============================================================================

@dataclass
class SceneConfig:
    """Defaults for synthetic scene generation."""
    samples_per_part: int = 400
    views: int = 20
    noise_sigma: float = 0.0
    camera_distance_factor: float = 2.5  # × object diagonal
    seed: int = 0


@dataclass
class RenderConfig:
    """Soft depth splat renderer settings."""
    resolution: int = 128         # optimization / scoring
    report_resolution: int = 256  # final reports
    fov_degrees: float = 30.0
    cutoff_sigmas: float = 3.0
    min_sigma_px: float = 0.5
    background_weight: float = 1e-4  # pixels with less total weight are background
    max_weight: float = 1.0       # per-splat weight saturation
    taper: bool = False           # (1 − q/c²)² falloff so the kernel reaches 0 at the cutoff
    depth_ramp: bool = False      # fade depth in between background_weight and twice that
    parallel: bool = True


@dataclass
class FieldConfig:
    """Gaussian field and part-assignment settings."""
    epsilon: float = 0.01          # membership threshold of G_m
    initial_alpha: float = 0.9
    initial_static_logit: float = -9.0  # sigmoid(-9) ≈ 1.2e-4
    min_gmm_scale: float = 1e-3
    cull_weight: float = 0.01      # copies with part probability ≤ this are not rendered


@dataclass
class InitConfig:
    """Mobility proposal initialization."""
    tau: Optional[float] = None    # None → tau_factor × median spacing of P⁰
    tau_factor: float = 2.0
    seed_count: int = 16
    feature_knn: int = 16
    beta_factor: float = 0.5       # β = beta_factor × cloud diagonal
    overlap_threshold: float = 0.8
    shared_cost_margin: float = 0.05
    phi_min_deg: float = -80.0
    phi_max_deg: float = 80.0
    phi_step_deg: float = 4.0
    d_min: float = -0.5
    d_max: float = 0.5
    d_step: float = 0.025
    refine_rounds: int = 3
    face_samples: int = 64
    polish_iters: int = 2000       # Powell evaluations over the full rigid motion; 0 disables
    seed: int = 0


@dataclass
class LossWeights:
    """Loss weights of the stage-1 and refinement objectives."""
    cd: float = 0.5
    pc: float = 0.1
    ls: float = 0.02
    reg: float = 1.0
    col: float = 0.02
    mu: float = 0.5
    s: float = 0.1
    ls_k: int = 20
    col_k: int = 32

    def __post_init__(self):
        for name in ('cd', 'pc', 'ls', 'reg', 'col', 'mu', 's'):
            if getattr(self, name) < 0:
                raise ConfigError(f"Loss weight '{name}' must be nonnegative")


@dataclass
class ScheduleConfig:
    """Iteration schedule of the optimization cycle."""
    prune_every: int = 100
    merge_every: int = 5000
    type_freeze_at: int = 4000
    cycle_iters: int = 6000
    max_cycles: int = 4
    refine_iters: int = 2000
    log_every: int = 100


@dataclass
class StepSizes:
    """Adam step sizes per parameter group."""
    rotation: float = 1e-3
    translation: float = 1e-3
    pivot: float = 1e-3
    centers: float = 1e-4
    gmm: float = 1e-3
    static_logits: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class PruneConfig:
    """Collision-aware motion pruning."""
    tau_v: float = 1e-4
    overlap_samples: int = 8192
    near_identity_deg: float = 5.0
    revolute_min_deg: float = 5.0          # joint-type decision at the freeze
    prismatic_min_translation: float = 0.01
    min_half_extent: float = 0.01
    min_members: int = 4


@dataclass
class MergeConfig:
    """Proposal integration."""
    tau_merge: float = 1e-3
    adjacency_k: int = 8


@dataclass
class AblationConfig:
    """Switches for the ablation study."""
    overseg: bool = True
    motion_init: bool = True
    merge: bool = True
    prune: bool = True
    baseline_parts: Optional[int] = None


@dataclass
class PipelineConfig:
    """Root configuration of a reconstruction run."""
    seed: int = 0
    scene: SceneConfig = field(default_factory=SceneConfig)
    render: RenderConfig = field(default_factory=RenderConfig)
    gaussian: FieldConfig = field(default_factory=FieldConfig)
    init: InitConfig = field(default_factory=InitConfig)
    weights: LossWeights = field(default_factory=LossWeights)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    steps: StepSizes = field(default_factory=StepSizes)
    prune: PruneConfig = field(default_factory=PruneConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)
    ablation: AblationConfig = field(default_factory=AblationConfig)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a plain nested dictionary."""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PipelineConfig':
        """
        Build a config from a nested dictionary.

        Args:
            data: Mapping of section name -> mapping of key -> value

        Returns:
            PipelineConfig with unspecified keys at their defaults

        Raises:
            ConfigError: Unknown section or key, or value of the wrong type
        """
        return _build_dataclass(cls, data, path='')


def _build_dataclass(cls, data: Dict[str, Any], path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{path or 'root'}' must be a table")

    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"Unknown config key '{path}{key}'")
        default = getattr(cls(), key)
        if is_dataclass(default):
            kwargs[key] = _build_dataclass(type(default), value, path=f"{path}{key}.")
        else:
            kwargs[key] = _coerce(value, default, f"{path}{key}")
    try:
        return cls(**kwargs)
    except TypeError as error:
        raise ConfigError(f"Invalid section '{path or 'root'}': {error}") from error


def _coerce(value: Any, default: Any, name: str) -> Any:
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"'{name}' must be true or false")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{name}' must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{name}' must be a number")
        return float(value)
    return value


def load_config(path: Optional[Union[str, Path]] = None) -> PipelineConfig:
    """
    Load a pipeline configuration file.
    설정 파일 로드 (TOML: key = value / [section] 테이블)

    Args:
        path: Config file path (default config when None)

    Returns:
        PipelineConfig

    Raises:
        ConfigError: Missing file or invalid content
    """
    if path is None:
        return PipelineConfig()

    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"Config file not found: {config_path}")

    try:
        with open(config_path, 'rb') as handle:
            data = tomllib.load(handle)
    except tomllib.TOMLDecodeError as error:
        raise ConfigError(f"Cannot parse {config_path}: {error}") from error

    logger.debug("Loaded config from %s", config_path)
    return PipelineConfig.from_dict(data)


def dump_config(config: PipelineConfig) -> str:
    """Render a config in the same key = value / [section] format."""
    lines = []
    data = config.to_dict()
    scalars = {k: v for k, v in data.items() if not isinstance(v, dict)}
    for key, value in scalars.items():
        lines.append(f"{key} = {_format_value(value)}")
    for section, values in data.items():
        if not isinstance(values, dict):
            continue
        lines.append("")
        lines.append(f"[{section}]")
        for key, value in values.items():
            if value is None:
                lines.append(f"# {key} = (unset)")
            else:
                lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    return str(value)


# ============================================================================
# VIEWER CONFIGURATION
# ============================================================================

PAGE_CONFIG = {
    'page_title': 'Articulation Run Viewer',
    'page_icon': '🗄️',
    'layout': 'wide',
    'initial_sidebar_state': 'expanded',
}

JOINT_COLORS = {
    JointType.UNKNOWN: '#94a3b8',
    JointType.REVOLUTE: '#60a5fa',
    JointType.PRISMATIC: '#f59e0b',
}

LOG_LEVEL = _get_log_level()
