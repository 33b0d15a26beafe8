# Components package for the run viewer
from .charts import (
    part_color,
    loss_terms,
    event_iterations,
    create_loss_chart,
    create_part_count_chart,
    create_pointcloud_chart,
    build_joint_table,
    create_joint_error_chart,
)

__all__ = [
    # Charts
    'part_color',
    'loss_terms',
    'event_iterations',
    'create_loss_chart',
    'create_part_count_chart',
    'create_pointcloud_chart',
    'build_joint_table',
    'create_joint_error_chart',
]
