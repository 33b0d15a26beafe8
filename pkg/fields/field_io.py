"""
Field and proposal serialization.
가우시안 필드 PLY / 제안 JSON 입출력
"""
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union
import json

import numpy as np

from fields.assignment import PartAssignment
from fields.gaussian_field import GaussianField
from fields.proposal import PartProposal
from geometry import read_ply, write_ply


def write_field_ply(
    path: Union[str, Path],
    field: GaussianField,
    assignment: Optional[PartAssignment] = None,
) -> Path:
    """
    Write primitives as a PLY point set.

    Centers are the vertices; ``label`` holds the hard part label (0 when
    no assignment is given) and ``P_s`` the static probability.
    """
    labels = (assignment.hard_labels if assignment is not None
              else np.zeros(len(field), dtype=np.int64))
    extra = {
        'P_s': field.static_prob,
        'static_logit': field.static_logits,
        'opacity': field.alphas,
    }
    for k in range(3):
        extra[f'scale_{k}'] = field.scales[:, k]
    for k in range(4):
        extra[f'rot_{k}'] = field.quats[:, k]
    return write_ply(path, field.centers, labels=labels, extra=extra)


def read_field_ply(path: Union[str, Path]) -> Tuple[GaussianField, np.ndarray]:
    """
    Read a PLY written by ``write_field_ply``.

    Returns:
        (GaussianField, hard labels)
    """
    props = read_ply(path)
    centers = np.stack([props['x'], props['y'], props['z']], axis=1)
    field = GaussianField(
        centers=centers,
        quats=np.stack([props[f'rot_{k}'] for k in range(4)], axis=1),
        scales=np.stack([props[f'scale_{k}'] for k in range(3)], axis=1),
        alphas=props['opacity'],
        static_logits=props['static_logit'],
    )
    return field, np.asarray(props.get('label', np.zeros(len(centers))), dtype=np.int64)


def write_proposals_json(path: Union[str, Path], proposals: Sequence[PartProposal]) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump([p.to_dict() for p in proposals], handle, indent=2, sort_keys=True)
    return path


def read_proposals_json(path: Union[str, Path]) -> List[PartProposal]:
    with open(path, encoding='utf-8') as handle:
        return [PartProposal.from_dict(item) for item in json.load(handle)]
