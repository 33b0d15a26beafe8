"""
Flat binary depth raster format.
깊이 래스터 이진 포맷

Layout (all little-endian):
    uint32 width, uint32 height
    32 × float64: 4×4 world-to-camera pose then 4×4 padded intrinsics, row-major
    height × width float32 depths, row-major, 0 = background
"""
from pathlib import Path
from typing import Union

import numpy as np

from rendering.camera import Camera, DepthView


HEADER_DTYPE = np.dtype([('width', '<u4'), ('height', '<u4'), ('camera', '<f8', (32,))])


def write_depth_raster(path: Union[str, Path], view: DepthView) -> Path:
    """Write a DepthView; depths are stored as float32."""
    cam = view.camera
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header['width'] = cam.width
    header['height'] = cam.height
    header['camera'][0] = np.concatenate([cam.pose.ravel(), cam.intrinsic_matrix().ravel()])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as handle:
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(view.depth, dtype='<f4').tobytes())
    return path


def read_depth_raster(path: Union[str, Path]) -> DepthView:
    """
    Read a depth raster.

    Raises:
        ValueError: Truncated or inconsistent file
    """
    raw = Path(path).read_bytes()
    if len(raw) < HEADER_DTYPE.itemsize:
        raise ValueError(f"Depth raster {path} is truncated")
    header = np.frombuffer(raw, dtype=HEADER_DTYPE, count=1)[0]
    width, height = int(header['width']), int(header['height'])
    expected = HEADER_DTYPE.itemsize + 4 * width * height
    if len(raw) != expected:
        raise ValueError(f"Depth raster {path} has {len(raw)} bytes, expected {expected}")
    matrices = np.asarray(header['camera'], dtype=np.float64)
    camera = Camera.from_matrices(matrices[:16].reshape(4, 4), matrices[16:].reshape(4, 4),
                                  width, height)
    depth = np.frombuffer(raw, dtype='<f4', offset=HEADER_DTYPE.itemsize).reshape(height, width)
    return DepthView(camera, depth.astype(np.float64))


def export_depth_pgm(path: Union[str, Path], view: DepthView, max_depth: float = None) -> Path:
    """
    16-bit grayscale PGM for inspection (0 = background, 65535 = ``max_depth``).
    """
    depth = view.depth
    if max_depth is None:
        max_depth = float(depth.max()) if depth.size and depth.max() > 0 else 1.0
    scaled = np.clip(np.round(depth / max_depth * 65535.0), 0, 65535).astype('>u2')
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as handle:
        handle.write(f"P5\n{view.camera.width} {view.camera.height}\n65535\n".encode('ascii'))
        handle.write(scaled.tobytes())
    return path
