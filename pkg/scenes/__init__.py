# Scenes package: synthetic articulated objects with ground truth
from .shapes import BoxShape
from .generator import (
    PartSpec,
    JointSpec,
    SceneSpec,
    JointTruth,
    SceneTruth,
    normalize_spec,
    scene_cameras,
    render_reference_views,
    generate,
)
from .presets import (
    PRESETS,
    list_presets,
    preset,
)
from .scene_io import (
    write_scene,
    read_scene,
    read_scene_meta,
)

__all__ = [
    'BoxShape',
    # Generator
    'PartSpec',
    'JointSpec',
    'SceneSpec',
    'JointTruth',
    'SceneTruth',
    'normalize_spec',
    'scene_cameras',
    'render_reference_views',
    'generate',
    # Presets
    'PRESETS',
    'list_presets',
    'preset',
    # I/O
    'write_scene',
    'read_scene',
    'read_scene_meta',
]
