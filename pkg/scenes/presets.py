"""
Named scene presets.
장면 프리셋 (노트북, 냉장고, 서랍장, 수납장, 창문, 오븐, 테이블)

Coordinates: x width, y depth (front = +y), z up; objects fit the unit cube.
"""
from typing import Callable, Dict, List, Tuple

import numpy as np

from config import JointType
from errors import PresetNotFoundError
from scenes.generator import JointSpec, PartSpec, SceneSpec
from scenes.shapes import BoxShape


PANEL = 0.02
GAP = 0.02
DOOR_GAP = 0.005
DOOR_THICKNESS = 0.025


def _box(lower, upper) -> BoxShape:
    return BoxShape.from_bounds(lower, upper)


def _frame(width: float, depth: float, height: float,
           dividers_x: Tuple[float, ...] = (), shelves_z: Tuple[float, ...] = ()) -> PartSpec:
    """Open-front carcass: back, sides, top, bottom, optional dividers and shelves."""
    w, d, h, t = width / 2, depth / 2, height / 2, PANEL
    boxes = [
        _box((-w, -d, -h), (w, -d + t, h)),
        _box((-w, -d, -h), (-w + t, d, h)),
        _box((w - t, -d, -h), (w, d, h)),
        _box((-w, -d, -h), (w, d, -h + t)),
        _box((-w, -d, h - t), (w, d, h)),
    ]
    boxes += [_box((x - t / 2, -d, -h), (x + t / 2, d, h)) for x in dividers_x]
    boxes += [_box((-w, -d, z - t / 2), (w, d, z + t / 2)) for z in shelves_z]
    return PartSpec('body', tuple(boxes), static=True)


def _drawer(name: str, x_range, z_range, front: float, drawer_depth: float) -> PartSpec:
    return PartSpec(name, (_box((x_range[0], front - drawer_depth, z_range[0]),
                                (x_range[1], front, z_range[1])),))


def _door(name: str, x_range, z_range, front: float) -> PartSpec:
    y0 = front + DOOR_GAP
    return PartSpec(name, (_box((x_range[0], y0, z_range[0]),
                                (x_range[1], y0 + DOOR_THICKNESS, z_range[1])),))


def _slide(part: int, magnitude: float, axis=(0.0, 1.0, 0.0)) -> JointSpec:
    return JointSpec(part, JointType.PRISMATIC, tuple(axis), (0.0, 0.0, 0.0), magnitude)


def _hinge(part: int, degrees: float, axis, pivot) -> JointSpec:
    return JointSpec(part, JointType.REVOLUTE, tuple(axis), tuple(pivot), float(np.radians(degrees)))


def _stack(z_low: float, z_high: float, count: int, spacing: float = 0.0) -> List[Tuple[float, float]]:
    """Split [z_low, z_high] into ``count`` slots separated by ``spacing``."""
    height = (z_high - z_low - spacing * (count - 1)) / count
    return [(z_low + i * (height + spacing), z_low + i * (height + spacing) + height)
            for i in range(count)]


# ============================================================================
# PRESETS
# ============================================================================

def laptop() -> SceneSpec:
    base = PartSpec('base', (_box((-0.3, -0.45, -0.05), (0.3, 0.45, -0.01)),), static=True)
    lid = PartSpec('lid', (_box((-0.3, -0.45, -0.01), (0.3, 0.45, 0.015)),))
    return SceneSpec('laptop', (base, lid),
                     (_hinge(1, 60.0, (0.0, -1.0, 0.0), (-0.3, 0.0, -0.01)),))


def fridge_2door() -> SceneSpec:
    w, d, h = 0.6, 0.6, 1.0
    front = d / 2
    body = _frame(w, d, h, shelves_z=(0.1,))
    upper = _door('upper_door', (-w / 2, w / 2), (0.105, h / 2), front)
    lower = _door('lower_door', (-w / 2, w / 2), (-h / 2, 0.095), front)
    joints = (
        _hinge(1, 70.0, (0.0, 0.0, 1.0), (-w / 2, front + DOOR_GAP, 0.0)),
        _hinge(2, 50.0, (0.0, 0.0, -1.0), (w / 2, front + DOOR_GAP, 0.0)),
    )
    return SceneSpec('fridge-2door', (body, upper, lower), joints)


def drawers3_adjacent() -> SceneSpec:
    w, d, h = 0.7, 0.5, 0.8
    front = d / 2
    body = _frame(w, d, h)
    inner_x = (-w / 2 + PANEL + GAP, w / 2 - PANEL - GAP)
    slots = _stack(-h / 2 + PANEL + GAP, h / 2 - PANEL - GAP, 3)
    drawers = tuple(_drawer(f'drawer_{i}', inner_x, z, front, 0.3) for i, z in enumerate(slots))
    joints = (_slide(1, 0.30), _slide(2, 0.18), _slide(3, 0.42))
    return SceneSpec('drawers3-adjacent', (body,) + drawers, joints)


def storage5_mixed() -> SceneSpec:
    w, d, h = 1.0, 0.5, 0.8
    front = d / 2
    body = _frame(w, d, h, dividers_x=(0.0,))
    upper, lower = _stack(-h / 2, h / 2, 2, spacing=0.01)[::-1]
    doors = (
        _door('left_upper_door', (-w / 2, -0.005), upper, front),
        _door('left_lower_door', (-w / 2, -0.005), lower, front),
    )
    inner_x = (PANEL / 2 + GAP, w / 2 - PANEL - GAP)
    slots = _stack(-h / 2 + PANEL + GAP, h / 2 - PANEL - GAP, 3, spacing=0.01)
    drawers = tuple(_drawer(f'drawer_{i}', inner_x, z, front, 0.35) for i, z in enumerate(slots))
    pivot = (-w / 2, front + DOOR_GAP, 0.0)
    joints = (
        _hinge(1, 60.0, (0.0, 0.0, 1.0), pivot),
        _hinge(2, 45.0, (0.0, 0.0, 1.0), pivot),
        _slide(3, 0.25), _slide(4, 0.35), _slide(5, 0.15),
    )
    return SceneSpec('storage5-mixed', (body,) + doors + drawers, joints)


def storage7() -> SceneSpec:
    w, d, h = 1.0, 0.45, 0.9
    front = d / 2
    third = w / 6
    body = _frame(w, d, h, dividers_x=(-third, third))
    upper, lower = _stack(-h / 2, h / 2, 2, spacing=0.01)[::-1]
    left_x = (-w / 2, -third - 0.005)
    right_x = (third + 0.005, w / 2)
    parts = [
        _door('left_upper_door', left_x, upper, front),
        _door('left_lower_door', left_x, lower, front),
    ]
    inner_x = (-third + PANEL / 2 + GAP, third - PANEL / 2 - GAP)
    slots = _stack(-h / 2 + PANEL + GAP, h / 2 - PANEL - GAP, 3, spacing=0.01)
    parts += [_drawer(f'drawer_{i}', inner_x, z, front, 0.35) for i, z in enumerate(slots)]
    parts += [
        _door('right_upper_door', right_x, upper, front),
        _door('right_lower_door', right_x, lower, front),
    ]
    left_pivot = (-w / 2, front + DOOR_GAP, 0.0)
    right_pivot = (w / 2, front + DOOR_GAP, 0.0)
    joints = (
        _hinge(1, 65.0, (0.0, 0.0, 1.0), left_pivot),
        _hinge(2, 40.0, (0.0, 0.0, 1.0), left_pivot),
        _slide(3, 0.22), _slide(4, 0.32), _slide(5, 0.14),
        _hinge(6, 55.0, (0.0, 0.0, -1.0), right_pivot),
        _hinge(7, 30.0, (0.0, 0.0, -1.0), right_pivot),
    )
    return SceneSpec('storage7', (body,) + tuple(parts), joints)


def window3_prismatic() -> SceneSpec:
    bar = 0.05
    w, h, d = 0.5, 0.35, 0.05
    frame = PartSpec('frame', (
        _box((-w, -d, h - bar), (w, d, h)),
        _box((-w, -d, -h), (w, d, -h + bar)),
        _box((-w, -d, -h + bar), (-w + bar, d, h - bar)),
        _box((w - bar, -d, -h + bar), (w, d, h - bar)),
    ), static=True)
    z_range = (-h + bar + 0.01, h - bar - 0.01)
    panes = tuple(
        PartSpec(f'pane_{i}', (_box((x0, y - 0.005, z_range[0]), (x0 + 0.3, y + 0.005, z_range[1])),))
        for i, (x0, y) in enumerate(((-0.45, -0.03), (-0.15, 0.0), (0.15, 0.03)))
    )
    axis = (1.0, 0.0, 0.0)
    joints = (_slide(1, 0.25, axis), _slide(2, -0.2, axis), _slide(3, -0.3, axis))
    return SceneSpec('window3-prismatic', (frame,) + panes, joints)


def oven() -> SceneSpec:
    w, d, h = 0.7, 0.6, 0.8
    front = d / 2
    shelf = -0.2
    body = _frame(w, d, h, shelves_z=(shelf,))
    door = _door('door', (-w / 2, w / 2), (shelf + 0.005, h / 2), front)
    drawer = _drawer('drawer', (-w / 2 + PANEL + GAP, w / 2 - PANEL - GAP),
                     (-h / 2 + PANEL + GAP, shelf - PANEL / 2 - GAP), front, 0.4)
    joints = (
        _hinge(1, 75.0, (-1.0, 0.0, 0.0), (0.0, front + DOOR_GAP, shelf + 0.005)),
        _slide(2, 0.25),
    )
    return SceneSpec('oven', (body, door, drawer), joints)


def table_drawers() -> SceneSpec:
    top = [_box((-0.5, -0.3, 0.25), (0.5, 0.3, 0.3))]
    legs = [_box((x, y, -0.3), (x + 0.05, y + 0.05, 0.25))
            for x in (-0.5, 0.45) for y in (-0.3, 0.25)]
    table = PartSpec('table', tuple(top + legs), static=True)
    drawers = (
        _drawer('left_drawer', (-0.4, -0.02), (0.1, 0.245), 0.3, 0.45),
        _drawer('right_drawer', (0.02, 0.4), (0.1, 0.245), 0.3, 0.45),
    )
    return SceneSpec('table-drawers', (table,) + drawers, (_slide(1, 0.25), _slide(2, 0.35)))


PRESETS: Dict[str, Callable[[], SceneSpec]] = {
    'laptop': laptop,
    'fridge-2door': fridge_2door,
    'drawers3-adjacent': drawers3_adjacent,
    'storage5-mixed': storage5_mixed,
    'storage7': storage7,
    'window3-prismatic': window3_prismatic,
    'oven': oven,
    'table-drawers': table_drawers,
}


def list_presets() -> List[str]:
    return sorted(PRESETS)


def preset(name: str) -> SceneSpec:
    """
    Look up a preset scene spec.

    Raises:
        PresetNotFoundError: Unknown name
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise PresetNotFoundError(name, list(PRESETS)) from None
