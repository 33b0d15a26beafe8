"""
Text report tables of evaluated runs.
평가 결과 리포트 표 생성

Tables are built from ``MetricsReport.to_dict()`` documents so stored
``metrics.json`` files and fresh evaluations go through the same code.
Chamfer columns are scaled by 10³; joint-type and part-count mismatches
are marked with F.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import AblationConfig


CD_SCALE = 1e3
FLAG = 'F'
MISSING = '-'

PART_COLUMNS = ['Object', 'Part', 'Type', 'Axis Ang', 'Axis Pos', 'Part Motion']
CD_COLUMNS = ['CD-s', 'CD-m', 'CD-w']
ABLATION_COLUMNS = ['OverSeg', 'MoI', 'Merge', 'Prune']


def format_metric(value: Optional[float], digits: int = 2, flagged: bool = False) -> str:
    """
    Format one table cell.

    Missing values are '-', flagged missing values 'F', flagged values
    carry an 'F' suffix.
    """
    if value is None:
        return FLAG if flagged else MISSING
    text = f"{value:.{digits}f}"
    return f"{text} {FLAG}" if flagged else text


def _cd(value: Optional[float]) -> Optional[float]:
    return None if value is None else value * CD_SCALE


def chamfer_cells(metrics: Dict[str, Any]) -> Dict[str, str]:
    """CD-s / CD-m / CD-w cells (×10³); CD-m flagged on a part-count mismatch."""
    chamfer = metrics['chamfer']
    return {
        'CD-s': format_metric(_cd(chamfer['cd_s']), 3),
        'CD-m': format_metric(_cd(chamfer['cd_m']), 3, chamfer.get('count_mismatch', False)),
        'CD-w': format_metric(_cd(chamfer['cd_w']), 3),
    }


def part_rows(name: str, metrics: Dict[str, Any]) -> List[Dict[str, str]]:
    """
    One row per predicted movable part.
    부분별 관절 지표 행

    Joint metrics of a part whose type disagrees with the truth are F;
    Axis Pos is '-' for prismatic joints.
    """
    rows = []
    for part in metrics['parts']:
        mismatch = part['truth_type'] is not None and not part['type_match']
        rows.append({
            'Object': name,
            'Part': str(part['label']),
            'Type': part['type'],
            'Axis Ang': FLAG if mismatch else format_metric(part['axis_ang']),
            'Axis Pos': FLAG if mismatch else format_metric(part['axis_pos'], 3),
            'Part Motion': FLAG if mismatch else format_metric(part['part_motion'], 3),
        })
    if not rows:
        rows.append({'Object': name, 'Part': MISSING, 'Type': 'static',
                     'Axis Ang': MISSING, 'Axis Pos': MISSING, 'Part Motion': MISSING})
    return rows


def _mark(on: bool) -> str:
    return '✓' if on else '✗'


def ablation_cells(ablation: AblationConfig) -> Dict[str, str]:
    """Check marks of the ablation switches a run used."""
    return {
        'OverSeg': _mark(ablation.overseg),
        'MoI': _mark(ablation.motion_init),
        'Merge': _mark(ablation.merge),
        'Prune': _mark(ablation.prune),
    }


def metrics_table(name: str, metrics: Dict[str, Any]) -> pd.DataFrame:
    """Per-part table of one run with its Chamfer cells."""
    cd = chamfer_cells(metrics)
    rows = [{**row, **cd} for row in part_rows(name, metrics)]
    return pd.DataFrame(rows, columns=PART_COLUMNS + CD_COLUMNS)


def report_table(
    runs: Sequence[Tuple[str, Dict[str, Any], Optional[AblationConfig]]],
    ablation: bool = False,
) -> pd.DataFrame:
    """
    Aggregate table over runs, one row per predicted part.
    실행 결과 집계 표

    Args:
        runs: (name, metrics document, ablation switches of the run)
        ablation: Add the OverSeg / MoI / Merge / Prune columns

    Returns:
        DataFrame of formatted cells
    """
    columns = PART_COLUMNS + CD_COLUMNS + (ABLATION_COLUMNS if ablation else [])
    rows = []
    for name, metrics, switches in runs:
        cd = chamfer_cells(metrics)
        extra = ablation_cells(switches or AblationConfig()) if ablation else {}
        rows.extend({**row, **cd, **extra} for row in part_rows(name, metrics))
    return pd.DataFrame(rows, columns=columns)


def format_table(df: pd.DataFrame) -> str:
    """Column-aligned UTF-8 text of a report table."""
    if df.empty:
        return "(no runs)"
    return df.to_string(index=False)


def metrics_text(name: str, metrics: Dict[str, Any]) -> str:
    """Text block printed by ``eval``: the part table, then the flags."""
    lines = [format_table(metrics_table(name, metrics))]
    chamfer = metrics['chamfer']
    if chamfer.get('cd_m_merged') is not None:
        lines.append(f"merged movable CD (×10³): {chamfer['cd_m_merged'] * CD_SCALE:.3f}")
    if metrics['flags']:
        lines.append(f"flags: {', '.join(metrics['flags'])}")
    return "\n".join(lines)
