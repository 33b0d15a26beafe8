"""
Chart components for the run viewer.
실행 결과 시각화 차트 컴포넌트

핵심 시각화:
- 손실 항목별 학습 곡선 (병합/가지치기 이벤트 표시)
- 부분 수 변화
- 부분 라벨 3D 점군 + 관절 축
- 관절 오차 막대 차트
"""
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import plotly.graph_objects as go

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import JOINT_COLORS, JointType

# Color palette for consistency - aligned with the app shell
COLORS = {
    'primary': '#60a5fa',      # Blue
    'secondary': '#38bdf8',    # Sky
    'success': '#34d399',      # Green
    'warning': '#f59e0b',      # Amber
    'danger': '#f87171',       # Red
    'neutral': '#94a3b8',      # Slate
    'grid': 'rgba(255,255,255,0.05)', # Ultra soft grid lines
}

SERIES_COLORS = [
    '#60a5fa',
    '#38bdf8',
    '#34d399',
    '#f59e0b',
    '#f87171',
    '#a3e635',
]

HEIGHT_PRESETS = {
    'compact': 320,
    'default': 400,
    'tall': 560,
}

EVENT_STYLES = {
    'merge': {'color': COLORS['success'], 'dash': 'dash'},
    'freeze': {'color': COLORS['warning'], 'dash': 'dot'},
    'refine_start': {'color': COLORS['neutral'], 'dash': 'solid'},
}

LOSS_META_COLUMNS = ('iteration', 'stage', 'parts')
STATIC_LABEL = 0


def _resolve_height(height: int, height_preset: Optional[str]) -> int:
    if height_preset and height_preset in HEIGHT_PRESETS:
        return HEIGHT_PRESETS[height_preset]
    return height


def _apply_common_layout(fig: go.Figure, title: str, height: int) -> None:
    fig.update_layout(
        title=dict(text=title, font=dict(size=16)),
        height=height,
        margin=dict(l=40, r=40, t=56, b=40),
        template='plotly_dark',
        paper_bgcolor='rgba(0,0,0,0)',
        plot_bgcolor='rgba(0,0,0,0)',
        legend=dict(orientation='h', yanchor='bottom', y=1.02, xanchor='right', x=1),
    )


def part_color(label: int) -> str:
    """Static parts are slate, movable labels cycle through the series colors."""
    if label == STATIC_LABEL:
        return COLORS['neutral']
    return SERIES_COLORS[(label - 1) % len(SERIES_COLORS)]


def loss_terms(loss: pd.DataFrame) -> List[str]:
    """Loss columns of a loss.csv frame (everything but the bookkeeping columns)."""
    return [c for c in loss.columns if c not in LOSS_META_COLUMNS]


def event_iterations(events: Sequence[Dict[str, Any]], kinds: Sequence[str] = tuple(EVENT_STYLES)) -> Dict[str, List[int]]:
    """Distinct iterations per event kind, in order."""
    found: Dict[str, List[int]] = {kind: [] for kind in kinds}
    for event in events:
        kind = event.get('kind')
        if kind in found and event['iteration'] not in found[kind]:
            found[kind].append(event['iteration'])
    return found


def _apply_event_lines(fig: go.Figure, events: Optional[Sequence[Dict[str, Any]]]) -> None:
    for kind, iterations in event_iterations(events or []).items():
        style = EVENT_STYLES[kind]
        for iteration in iterations:
            fig.add_vline(
                x=iteration,
                line_dash=style['dash'],
                line_color=style['color'],
                opacity=0.55,
            )


# ============================================================================
# TRAINING CURVES
# ============================================================================

def create_loss_chart(
    loss: pd.DataFrame,
    terms: Optional[Sequence[str]] = None,
    title: str = 'Loss',
    log_y: bool = True,
    events: Optional[Sequence[Dict[str, Any]]] = None,
    height: int = 400,
    height_preset: Optional[str] = None,
) -> go.Figure:
    """
    Loss curves per term over iterations.
    손실 항목별 학습 곡선

    Args:
        loss: loss.csv frame
        terms: Columns to draw (default: every loss column)
        log_y: Logarithmic y axis
        events: Run events; merges, freezes and the refinement start are
            drawn as vertical lines

    Returns:
        Plotly Figure (empty when there is nothing to draw)
    """
    if loss is None or loss.empty:
        return go.Figure()

    fig = go.Figure()
    for i, term in enumerate(terms or loss_terms(loss)):
        if term not in loss.columns:
            continue
        values = loss[['iteration', term]].dropna()
        fig.add_trace(go.Scatter(
            x=values['iteration'],
            y=values[term],
            name=term,
            mode='lines',
            line=dict(color=SERIES_COLORS[i % len(SERIES_COLORS)], width=2.0),
        ))

    _apply_event_lines(fig, events)
    _apply_common_layout(fig, title, _resolve_height(height, height_preset))
    fig.update_layout(hovermode='x unified')
    fig.update_xaxes(title_text='iteration', showgrid=True, gridcolor=COLORS['grid'])
    fig.update_yaxes(type='log' if log_y else 'linear', showgrid=True, gridcolor=COLORS['grid'])
    return fig


def create_part_count_chart(
    loss: pd.DataFrame,
    events: Optional[Sequence[Dict[str, Any]]] = None,
    height: int = 320,
) -> go.Figure:
    """Number of alive proposals over iterations."""
    if loss is None or loss.empty or 'parts' not in loss.columns:
        return go.Figure()

    fig = go.Figure(go.Scatter(
        x=loss['iteration'],
        y=loss['parts'],
        name='parts',
        mode='lines',
        line=dict(color=COLORS['primary'], width=2.4, shape='hv'),
    ))
    _apply_event_lines(fig, events)
    _apply_common_layout(fig, 'Proposals', height)
    fig.update_yaxes(rangemode='tozero', dtick=1)
    return fig


# ============================================================================
# GEOMETRY
# ============================================================================

def _axis_segment(part: Dict[str, Any], points: np.ndarray, length: float) -> Optional[np.ndarray]:
    axis = part.get('axis')
    if axis is None or len(points) == 0:
        return None
    axis = np.asarray(axis, dtype=np.float64)
    anchor = np.asarray(part['pivot'], dtype=np.float64) if part.get('pivot') is not None else points.mean(axis=0)
    return np.stack([anchor - 0.5 * length * axis, anchor + 0.5 * length * axis])


def create_pointcloud_chart(
    points: np.ndarray,
    labels: np.ndarray,
    parts: Optional[Sequence[Dict[str, Any]]] = None,
    title: str = 'Parts',
    marker_size: float = 2.0,
    max_points: int = 20000,
    height: int = 560,
) -> go.Figure:
    """
    Labeled point cloud as a 3D scatter with joint axes.
    부분 라벨 3D 점군

    Args:
        points: (N, 3) coordinates
        labels: (N,) part labels (0 = static)
        parts: result.json part entries; their axes are drawn through the
            pivot (revolute) or the part centroid (prismatic)
        max_points: Evenly strided subsample above this size
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(points) == 0:
        return go.Figure()
    if len(points) > max_points:
        stride = int(np.ceil(len(points) / max_points))
        points, labels = points[::stride], labels[::stride]

    fig = go.Figure()
    for label in np.unique(labels):
        mask = labels == label
        fig.add_trace(go.Scatter3d(
            x=points[mask, 0], y=points[mask, 1], z=points[mask, 2],
            mode='markers',
            name='static' if label == STATIC_LABEL else f'part {label}',
            marker=dict(size=marker_size, color=part_color(int(label))),
        ))

    extent = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    for part in parts or []:
        label = int(part['label'])
        segment = _axis_segment(part, points[labels == label], 0.6 * extent)
        if segment is None:
            continue
        joint_type = JointType(part.get('joint_type', 'unknown'))
        fig.add_trace(go.Scatter3d(
            x=segment[:, 0], y=segment[:, 1], z=segment[:, 2],
            mode='lines',
            name=f'axis {label} ({joint_type.value})',
            line=dict(color=JOINT_COLORS[joint_type], width=6),
        ))

    _apply_common_layout(fig, title, height)
    fig.update_layout(scene=dict(aspectmode='data'))
    return fig


# ============================================================================
# TABLES AND METRICS
# ============================================================================

def build_joint_table(result: Dict[str, Any]) -> pd.DataFrame:
    """One row per part of a result.json document."""
    rows = []
    for part in result.get('parts', []):
        joint_type = part.get('joint_type', 'unknown')
        revolute = joint_type == JointType.REVOLUTE.value
        rows.append({
            'part': part['label'],
            'type': joint_type,
            'points': part.get('points'),
            'motion': (f"{part['angle_deg']:.2f}°" if revolute
                       else f"{part.get('translation', 0.0):.4f}"),
            'axis': None if part.get('axis') is None else np.round(part['axis'], 4).tolist(),
            'pivot': None if part.get('pivot') is None else np.round(part['pivot'], 4).tolist(),
        })
    return pd.DataFrame(rows, columns=['part', 'type', 'points', 'motion', 'axis', 'pivot'])


def create_joint_error_chart(metrics: Dict[str, Any], height: int = 320) -> go.Figure:
    """Axis angle error per part; parts with a wrong joint type are red."""
    parts = [p for p in metrics.get('parts', []) if p.get('axis_ang') is not None]
    if not parts:
        return go.Figure()

    colors = [COLORS['primary'] if p['type_match'] else COLORS['danger'] for p in parts]
    fig = go.Figure(go.Bar(
        x=[f"part {p['label']}" for p in parts],
        y=[p['axis_ang'] for p in parts],
        marker_color=colors,
        name='Axis Ang',
    ))
    _apply_common_layout(fig, 'Axis angle error (deg)', height)
    return fig
