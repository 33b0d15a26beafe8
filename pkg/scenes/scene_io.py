"""
Scene directory reader/writer.
장면 디렉터리 입출력

Layout:
    state0.ply, state1.ply      labeled point clouds (binary little-endian)
    truth.json                  joints, label names, point counts
    views/state1_XX.depth       reference depth rasters of state 1
    views/state0_XX.depth       reference depth rasters of state 0
"""
from pathlib import Path
from typing import Union
import json
import logging

import numpy as np

from geometry import read_pointcloud, write_pointcloud
from rendering import read_depth_raster, write_depth_raster
from scenes.generator import JointTruth, SceneTruth


logger = logging.getLogger(__name__)

TRUTH_FILE = 'truth.json'


def write_scene(directory: Union[str, Path], truth: SceneTruth, extra: dict = None) -> Path:
    """
    Write a SceneTruth to ``directory``.

    Args:
        directory: Output scene directory (created if missing)
        truth: Generated scene
        extra: Additional JSON-serializable metadata stored under ``meta``

    Returns:
        Directory path
    """
    directory = Path(directory)
    (directory / 'views').mkdir(parents=True, exist_ok=True)
    write_pointcloud(directory / 'state0.ply', truth.state0)
    write_pointcloud(directory / 'state1.ply', truth.state1)

    for i, view in enumerate(truth.depth_views_state1):
        write_depth_raster(directory / 'views' / f'state1_{i:02d}.depth', view)
    for i, view in enumerate(truth.depth_views_state0):
        write_depth_raster(directory / 'views' / f'state0_{i:02d}.depth', view)

    labels, counts = np.unique(truth.state0.labels, return_counts=True)
    document = {
        'name': truth.name,
        'joints': [joint.to_dict() for joint in truth.joints],
        'labels': {
            str(int(label)): {
                'name': truth.part_names.get(int(label), ''),
                'points': int(count),
            }
            for label, count in zip(labels, counts)
        },
        'views': len(truth.depth_views_state1),
        'meta': extra or {},
    }
    with open(directory / TRUTH_FILE, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
    logger.info("Wrote scene '%s' to %s", truth.name, directory)
    return directory


def read_scene(directory: Union[str, Path]) -> SceneTruth:
    """
    Read a scene directory written by ``write_scene``.

    Raises:
        FileNotFoundError: Missing point clouds or truth file
        ValueError: Malformed content
    """
    directory = Path(directory)
    for name in ('state0.ply', 'state1.ply', TRUTH_FILE):
        if not (directory / name).is_file():
            raise FileNotFoundError(f"Scene file missing: {directory / name}")

    state0 = read_pointcloud(directory / 'state0.ply')
    state1 = read_pointcloud(directory / 'state1.ply')
    if len(state0) != len(state1):
        raise ValueError("state0 and state1 point counts differ")

    with open(directory / TRUTH_FILE, encoding='utf-8') as handle:
        document = json.load(handle)

    views_dir = directory / 'views'
    views1 = [read_depth_raster(p) for p in sorted(views_dir.glob('state1_*.depth'))]
    views0 = [read_depth_raster(p) for p in sorted(views_dir.glob('state0_*.depth'))]
    part_names = {int(k): v.get('name', '') for k, v in document.get('labels', {}).items()}
    return SceneTruth(
        state0=state0,
        state1=state1,
        joints=[JointTruth.from_dict(j) for j in document.get('joints', [])],
        depth_views_state1=views1,
        depth_views_state0=views0,
        name=document.get('name', directory.name),
        part_names=part_names,
    )


def read_scene_meta(directory: Union[str, Path]) -> dict:
    with open(Path(directory) / TRUTH_FILE, encoding='utf-8') as handle:
        return json.load(handle)
