# Rendering package: cameras, soft depth splats, depth losses, raster I/O
from .camera import (
    Camera,
    DepthView,
    focal_from_fov,
    look_at,
    fibonacci_directions,
    fibonacci_cameras,
)
from .renderer import (
    SplatSet,
    DepthLossResult,
    as_splats,
    render_depth,
    render_views,
    depth_l1,
    depth_loss_grad,
    mean_foreground_error,
)
from .raster_io import (
    write_depth_raster,
    read_depth_raster,
    export_depth_pgm,
)

__all__ = [
    # Cameras
    'Camera',
    'DepthView',
    'focal_from_fov',
    'look_at',
    'fibonacci_directions',
    'fibonacci_cameras',
    # Renderer
    'SplatSet',
    'DepthLossResult',
    'as_splats',
    'render_depth',
    'render_views',
    'depth_l1',
    'depth_loss_grad',
    'mean_foreground_error',
    # Raster I/O
    'write_depth_raster',
    'read_depth_raster',
    'export_depth_pgm',
]
