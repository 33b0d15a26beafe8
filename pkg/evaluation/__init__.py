# Evaluation package: joint / Chamfer metrics and report tables
from .metrics import (
    ChamferReport,
    PartMetrics,
    MetricsReport,
    predicted_joint_type,
    predicted_axis,
    line_distance,
    axis_errors,
    part_motion_error,
    sample_points,
    match_parts,
    chamfer_metrics,
    evaluate,
)
from .reports import (
    CD_SCALE,
    format_metric,
    chamfer_cells,
    part_rows,
    ablation_cells,
    metrics_table,
    report_table,
    format_table,
    metrics_text,
)

__all__ = [
    # Metrics
    'ChamferReport',
    'PartMetrics',
    'MetricsReport',
    'predicted_joint_type',
    'predicted_axis',
    'line_distance',
    'axis_errors',
    'part_motion_error',
    'sample_points',
    'match_parts',
    'chamfer_metrics',
    'evaluate',
    # Reports
    'CD_SCALE',
    'format_metric',
    'chamfer_cells',
    'part_rows',
    'ablation_cells',
    'metrics_table',
    'report_table',
    'format_table',
    'metrics_text',
]
