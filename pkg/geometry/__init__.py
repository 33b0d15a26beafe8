# Geometry package: point sets, rotations, rigid motions, OBBs, PLY I/O
from .pointcloud import (
    PointCloud,
    KNNIndex,
    as_points,
    knn,
    farthest_point_sample,
    nearest_squared,
    chamfer_one_sided,
    chamfer_symmetric,
    median_spacing,
)
from .rotation import (
    IDENTITY_6D,
    RigidMotion,
    rotation6d_to_matrix,
    matrix_to_rotation6d,
    rotation6d_backward,
    axis_angle_matrix,
    matrix_axis_angle,
    rotation_angle,
    quaternion_to_matrix,
    matrix_to_quaternion,
    quaternion_multiply,
    apply_motion,
    rotate_quaternion,
    interpolate_motion,
)
from .obb import (
    OBB,
    obb_from_points,
)
from .ply_io import (
    write_ply,
    read_ply,
    write_pointcloud,
    read_pointcloud,
)

__all__ = [
    # Point sets
    'PointCloud',
    'KNNIndex',
    'as_points',
    'knn',
    'farthest_point_sample',
    'nearest_squared',
    'chamfer_one_sided',
    'chamfer_symmetric',
    'median_spacing',
    # Rotations and motions
    'IDENTITY_6D',
    'RigidMotion',
    'rotation6d_to_matrix',
    'matrix_to_rotation6d',
    'rotation6d_backward',
    'axis_angle_matrix',
    'matrix_axis_angle',
    'rotation_angle',
    'quaternion_to_matrix',
    'matrix_to_quaternion',
    'quaternion_multiply',
    'apply_motion',
    'rotate_quaternion',
    'interpolate_motion',
    # OBB
    'OBB',
    'obb_from_points',
    # PLY
    'write_ply',
    'read_ply',
    'write_pointcloud',
    'read_pointcloud',
]
