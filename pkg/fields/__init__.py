# Fields package: Gaussian primitives, GMM part proposals, assignment, T(G)
from .gaussian_field import (
    GaussianField,
    init_from_pointcloud,
)
from .proposal import (
    PartProposal,
    LikelihoodGradient,
    softplus,
    inverse_softplus,
    alive_proposals,
    log_part_likelihood,
    part_likelihood,
    log_likelihood_backward,
    part_likelihood_backward,
)
from .gradients import StateGradient
from .assignment import (
    PartAssignment,
    assign,
    assignment_backward,
)
from .transform import (
    STATIC_PART,
    TransformedField,
    transform_object,
    motion_backward,
    transform_backward,
)
from .field_io import (
    write_field_ply,
    read_field_ply,
    write_proposals_json,
    read_proposals_json,
)

__all__ = [
    # Primitives
    'GaussianField',
    'init_from_pointcloud',
    # Proposals and likelihoods
    'PartProposal',
    'LikelihoodGradient',
    'softplus',
    'inverse_softplus',
    'alive_proposals',
    'log_part_likelihood',
    'part_likelihood',
    'log_likelihood_backward',
    'part_likelihood_backward',
    'StateGradient',
    # Assignment
    'PartAssignment',
    'assign',
    'assignment_backward',
    # Transform
    'STATIC_PART',
    'TransformedField',
    'transform_object',
    'motion_backward',
    'transform_backward',
    # I/O
    'write_field_ply',
    'read_field_ply',
    'write_proposals_json',
    'read_proposals_json',
]
