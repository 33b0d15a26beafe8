"""
PLY reader/writer for labeled point sets.
PLY 점군 입출력 (ASCII / binary little-endian)

Supports a single ``vertex`` element with x/y/z, optional nx/ny/nz,
an integer ``label`` property and arbitrary extra scalar properties
(e.g. ``P_s`` of a Gaussian field).
"""
from pathlib import Path
from typing import Dict, Optional, Tuple, Union
import logging

import numpy as np

from geometry.pointcloud import PointCloud


logger = logging.getLogger(__name__)


PLY_TYPES = {
    'char': 'i1', 'int8': 'i1',
    'uchar': 'u1', 'uint8': 'u1',
    'short': 'i2', 'int16': 'i2',
    'ushort': 'u2', 'uint16': 'u2',
    'int': 'i4', 'int32': 'i4',
    'uint': 'u4', 'uint32': 'u4',
    'float': 'f4', 'float32': 'f4',
    'double': 'f8', 'float64': 'f8',
}

NUMPY_TO_PLY = {
    'i1': 'char', 'u1': 'uchar', 'i2': 'short', 'u2': 'ushort',
    'i4': 'int', 'u4': 'uint', 'f4': 'float', 'f8': 'double',
}


def write_ply(
    path: Union[str, Path],
    points: np.ndarray,
    normals: Optional[np.ndarray] = None,
    labels: Optional[np.ndarray] = None,
    extra: Optional[Dict[str, np.ndarray]] = None,
    binary: bool = True,
) -> Path:
    """
    Write a vertex-only PLY file.

    Args:
        path: Output file
        points: (N, 3) coordinates, stored as double
        normals: optional (N, 3) normals
        labels: optional (N,) integer labels, stored as ``int label``
        extra: further per-vertex scalar properties (name -> (N,) array)
        binary: binary little-endian when True, ASCII otherwise

    Returns:
        The written path
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(points)

    columns = [('x', points[:, 0], 'f8'), ('y', points[:, 1], 'f8'), ('z', points[:, 2], 'f8')]
    if normals is not None:
        normals = np.asarray(normals, dtype=np.float64).reshape(-1, 3)
        columns += [('nx', normals[:, 0], 'f8'), ('ny', normals[:, 1], 'f8'), ('nz', normals[:, 2], 'f8')]
    if labels is not None:
        columns.append(('label', np.asarray(labels).reshape(-1), 'i4'))
    for name, values in (extra or {}).items():
        values = np.asarray(values).reshape(-1)
        code = 'i4' if np.issubdtype(values.dtype, np.integer) else 'f8'
        columns.append((name, values, code))

    for name, values, _ in columns:
        if len(values) != n:
            raise ValueError(f"PLY property '{name}' has {len(values)} values, expected {n}")

    dtype = np.dtype([(name, '<' + code) for name, _, code in columns])
    table = np.empty(n, dtype=dtype)
    for name, values, _ in columns:
        table[name] = values

    header = ['ply', f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              f'element vertex {n}']
    header += [f'property {NUMPY_TO_PLY[code]} {name}' for name, _, code in columns]
    header.append('end_header')

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as handle:
        handle.write(('\n'.join(header) + '\n').encode('ascii'))
        if binary:
            handle.write(table.tobytes())
        else:
            lines = []
            for row in table:
                lines.append(' '.join(
                    repr(float(row[name])) if code.startswith('f') else str(int(row[name]))
                    for name, _, code in columns
                ))
            handle.write(('\n'.join(lines) + ('\n' if lines else '')).encode('ascii'))
    logger.debug("Wrote %d vertices to %s", n, path)
    return path


def _parse_header(handle) -> Tuple[str, int, np.dtype]:
    first = handle.readline().strip()
    if first != b'ply':
        raise ValueError("Not a PLY file")

    fmt = None
    count = None
    props = []
    in_vertex = False
    while True:
        line = handle.readline()
        if not line:
            raise ValueError("PLY header has no end_header")
        tokens = line.decode('ascii').split()
        if not tokens or tokens[0] in ('comment', 'obj_info'):
            continue
        if tokens[0] == 'end_header':
            break
        if tokens[0] == 'format':
            fmt = tokens[1]
        elif tokens[0] == 'element':
            if count is None and tokens[1] != 'vertex':
                raise ValueError(f"PLY element '{tokens[1]}' before vertex is not supported")
            in_vertex = tokens[1] == 'vertex'
            if in_vertex:
                count = int(tokens[2])
        elif tokens[0] == 'property' and in_vertex:
            if tokens[1] == 'list':
                raise ValueError("PLY list properties on vertices are not supported")
            if tokens[1] not in PLY_TYPES:
                raise ValueError(f"Unknown PLY property type '{tokens[1]}'")
            props.append((tokens[2], PLY_TYPES[tokens[1]]))

    if fmt not in ('ascii', 'binary_little_endian'):
        raise ValueError(f"Unsupported PLY format '{fmt}'")
    if count is None:
        raise ValueError("PLY file has no vertex element")
    return fmt, count, np.dtype([(name, '<' + code) for name, code in props])


def read_ply(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """
    Read every vertex property of a PLY file.

    Returns:
        Mapping property name -> (N,) array

    Raises:
        ValueError: Malformed or unsupported file
    """
    with open(path, 'rb') as handle:
        fmt, count, dtype = _parse_header(handle)
        if fmt == 'binary_little_endian':
            raw = handle.read(dtype.itemsize * count)
            if len(raw) < dtype.itemsize * count:
                raise ValueError(f"PLY file {path} is truncated")
            table = np.frombuffer(raw, dtype=dtype, count=count)
        else:
            table = np.empty(count, dtype=dtype)
            for i in range(count):
                tokens = handle.readline().split()
                if len(tokens) < len(dtype.names):
                    raise ValueError(f"PLY file {path} is truncated")
                for name, token in zip(dtype.names, tokens):
                    table[name][i] = float(token) if dtype[name].kind == 'f' else int(token)
    return {name: np.array(table[name]) for name in dtype.names}


def write_pointcloud(path: Union[str, Path], pc: PointCloud, binary: bool = True) -> Path:
    """Write a PointCloud with its normals and labels."""
    return write_ply(path, pc.points, pc.normals, pc.labels, binary=binary)


def read_pointcloud(path: Union[str, Path]) -> PointCloud:
    """Read a PointCloud (normals and ``label`` when present)."""
    props = read_ply(path)
    for axis in ('x', 'y', 'z'):
        if axis not in props:
            raise ValueError(f"PLY file {path} lacks property '{axis}'")
    points = np.stack([props['x'], props['y'], props['z']], axis=1).astype(np.float64)
    normals = None
    if all(k in props for k in ('nx', 'ny', 'nz')):
        normals = np.stack([props['nx'], props['ny'], props['nz']], axis=1).astype(np.float64)
    labels = props.get('label')
    return PointCloud(points, normals, labels)
