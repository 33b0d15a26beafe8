"""Unit tests for pruning, proposal integration and the optimizer driver."""
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import JointType, PipelineConfig, PruneAction, RenderConfig, StepSizes
from errors import OptimizationError
from fields import GaussianField, PartProposal, assign, transform_object
from geometry import OBB, RigidMotion, axis_angle_matrix, matrix_axis_angle, matrix_to_rotation6d
from objectives import LossReport, Targets, objective_stage1
from optimization import (
    Adam,
    EventLog,
    MergeCandidate,
    adjacency,
    associate,
    detect_collisions,
    enforce_joint_type,
    evaluate_merges,
    freeze_joint_types,
    merge_round,
    obb_overlap_volume,
    optimize,
    prune_motions,
    prune_prismatic,
    prune_revolute,
    refine,
    run_cycle,
    score,
    select_and_fuse,
    step,
    transform_obb,
)
import optimization.optimizer as optimizer_module
from proposals import ProposalInit
from rendering import fibonacci_cameras, render_views


SERIAL = RenderConfig(resolution=24, parallel=False)


def box_grid(lower, upper, counts):
    axes = [np.linspace(lo, hi, k) for lo, hi, k in zip(lower, upper, counts)]
    return np.stack(np.meshgrid(*axes, indexing='ij'), axis=-1).reshape(-1, 3)


def make_field(centers, static_logits, scale=0.04):
    n = len(centers)
    quats = np.zeros((n, 4))
    quats[:, 0] = 1.0
    return GaussianField(np.asarray(centers, dtype=float), quats, np.full((n, 3), scale),
                         np.full(n, 0.9), np.asarray(static_logits, dtype=float))


def fitted(points, motion=None, weight=1.0, min_std=0.03):
    return PartProposal.from_moments(points.mean(axis=0), np.maximum(points.std(axis=0), min_std),
                                     weight, motion)


def same_motion(a, b):
    return np.array_equal(a.r, b.r) and np.array_equal(a.c, b.c) and np.array_equal(a.t, b.t)


def aabb_overlap(lo_a, hi_a, lo_b, hi_b):
    return float(np.prod(np.clip(np.minimum(hi_a, hi_b) - np.maximum(lo_a, lo_b), 0.0, None)))


def small_config():
    config = PipelineConfig()
    config.render = SERIAL
    return config


# ============================================================================
# Toy scene: static base, a drawer split in two fragments, a hinged door
# ============================================================================

BASE = box_grid((-0.3, -0.3, -0.15), (0.3, -0.05, 0.15), (5, 3, 3))
DRAWER = box_grid((-0.2, 0.0, -0.1), (0.2, 0.2, 0.1), (6, 3, 3))
DOOR = box_grid((0.35, -0.3, -0.15), (0.4, -0.05, 0.15), (2, 4, 4))
SLIDE = RigidMotion(t=[0.0, 0.15, 0.0])
HINGE = RigidMotion.from_axis_angle([0.0, 0.0, 1.0], np.radians(60.0), center=[0.4, -0.05, 0.0])


@pytest.fixture
def toy():
    centers = np.vstack([BASE, DRAWER, DOOR])
    nb, nd = len(BASE), len(DRAWER)
    logits = np.concatenate([np.full(nb, 1000.0), np.full(nd + len(DOOR), -1000.0)])
    field = make_field(centers, logits)
    left = DRAWER[DRAWER[:, 0] < 0]
    right = DRAWER[DRAWER[:, 0] > 0]
    total = nd + len(DOOR)
    fragments = [fitted(left, SLIDE, len(left) / total), fitted(right, SLIDE, len(right) / total),
                 fitted(DOOR, HINGE, len(DOOR) / total)]

    config = small_config()
    cameras = fibonacci_cameras(np.zeros(3), 2.5, 2, 24, 30.0)
    assignment = assign(field, fragments, config.gaussian.epsilon)
    transformed = transform_object(field, fragments, assignment, config.gaussian.cull_weight)
    views = render_views(transformed, cameras, SERIAL)
    return field, fragments, views, config


# ============================================================================
# Overlap volumes
# ============================================================================

class TestOverlapVolume:
    def test_identical_cubes(self):
        cube = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        assert obb_overlap_volume(cube, cube) == pytest.approx(1.0, abs=0.01)

    def test_disjoint(self):
        a = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b = OBB.axis_aligned([2, 0, 0], [3, 1, 1])
        assert obb_overlap_volume(a, b) == 0.0

    def test_half_slab(self):
        a = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b = OBB.axis_aligned([0.5, 0, 0], [1.5, 1, 1])
        assert obb_overlap_volume(a, b) == pytest.approx(0.5, abs=0.01)

    def test_random_boxes_match_aabb_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            lo_a = rng.uniform(-1, 0, 3)
            hi_a = lo_a + rng.uniform(0.3, 1.5, 3)
            lo_b = rng.uniform(-1, 0.5, 3)
            hi_b = lo_b + rng.uniform(0.3, 1.5, 3)
            a, b = OBB.axis_aligned(lo_a, hi_a), OBB.axis_aligned(lo_b, hi_b)
            smaller = min(a.volume, b.volume)
            expected = aabb_overlap(lo_a, hi_a, lo_b, hi_b)
            assert abs(obb_overlap_volume(a, b, seed=5) - expected) <= 0.01 * smaller

    def test_symmetric_in_arguments(self):
        a = OBB.axis_aligned([0, 0, 0], [1, 0.5, 0.7])
        rot = axis_angle_matrix(np.array([1.0, 1.0, 0.0]) / np.sqrt(2), 0.6)
        b = OBB([0.4, 0.3, 0.2], rot.T, [0.5, 0.4, 0.3])
        assert obb_overlap_volume(a, b, seed=11) == obb_overlap_volume(b, a, seed=11)

    def test_contained_rotated_box(self):
        rot = axis_angle_matrix(np.array([0.0, 0.0, 1.0]), np.pi / 4)
        big = OBB(np.zeros(3), rot.T, [2.0, 2.0, 2.0])
        small = OBB.axis_aligned([-0.1, -0.1, -0.1], [0.1, 0.1, 0.1])
        assert obb_overlap_volume(big, small) == pytest.approx(small.volume)

    def test_zero_volume(self):
        flat = OBB.axis_aligned([0, 0, 0], [1, 1, 0])
        cube = OBB.axis_aligned([0, 0, -1], [1, 1, 1])
        assert obb_overlap_volume(flat, cube) == 0.0

    def test_too_few_samples(self):
        cube = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        with pytest.raises(ValueError):
            obb_overlap_volume(cube, cube, samples=100)

    def test_transform_obb(self):
        box = OBB.axis_aligned([0, 0, 0], [2, 1, 1])
        moved = transform_obb(box, HINGE)
        assert np.allclose(moved.center, HINGE.apply(box.center))
        assert np.allclose(moved.axes[0], HINGE.rotation @ box.axes[0])
        assert moved.volume == pytest.approx(box.volume)


# ============================================================================
# Calibration rules
# ============================================================================

class TestPrunePrismatic:
    def test_full_removal(self):
        out = prune_prismatic(RigidMotion(t=[1.0, 0, 0]), np.array([1.0, 0, 0]))
        assert np.allclose(out.t, 0.0)

    def test_partial_removal(self):
        out = prune_prismatic(RigidMotion(t=[1.0, 1.0, 0]), np.array([1.0, 0, 0]))
        assert np.allclose(out.t, [0.0, 1.0, 0.0])

    def test_projection_property(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            t = rng.normal(size=3)
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            motion = RigidMotion(r=matrix_to_rotation6d(axis_angle_matrix(rng.normal(size=3), 0.3)), t=t)
            out = prune_prismatic(motion, axis)
            assert abs(out.t @ axis) < 1e-12
            assert np.linalg.norm(out.t) <= np.linalg.norm(t) + 1e-15
            assert np.array_equal(out.r, motion.r)
            again = prune_prismatic(out, axis)
            assert np.allclose(again.t, out.t, atol=1e-15)

    def test_non_unit_axis(self):
        with pytest.raises(ValueError):
            prune_prismatic(RigidMotion(t=[1.0, 0, 0]), np.array([2.0, 0, 0]))


class TestPruneRevolute:
    def test_snaps_to_box_axis_and_halves(self):
        box = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        axis = np.array([np.cos(np.radians(5.0)), np.sin(np.radians(5.0)), 0.0])
        motion = RigidMotion.from_axis_angle(axis, np.radians(4.0), center=[0.1, 0.2, 0.3], translation=[0.05, 0, 0])
        out, applied = prune_revolute(motion, box)
        new_axis, angle = matrix_axis_angle(out.rotation)
        assert applied
        assert np.allclose(new_axis, [1.0, 0.0, 0.0], atol=1e-9)
        assert np.degrees(angle) == pytest.approx(2.0)
        assert np.array_equal(out.c, motion.c) and np.array_equal(out.t, motion.t)

    def test_sign_preserved(self):
        box = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        motion = RigidMotion.from_axis_angle([0.05, -1.0, 0.0], np.radians(3.0))
        out, _ = prune_revolute(motion, box)
        new_axis, _ = matrix_axis_angle(out.rotation)
        assert np.allclose(new_axis, [0.0, -1.0, 0.0], atol=1e-9)

    def test_large_angle_untouched(self):
        box = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        motion = RigidMotion.from_axis_angle([0.3, 0.2, 1.0], np.radians(10.0))
        out, applied = prune_revolute(motion, box)
        assert not applied
        assert out is motion

    def test_random_axes_land_on_box_axes(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            rot = axis_angle_matrix(rng.normal(size=3), rng.uniform(0, np.pi))
            box = OBB(np.zeros(3), rot.T, rng.uniform(0.1, 1.0, 3))
            motion = RigidMotion.from_axis_angle(rng.normal(size=3), np.radians(rng.uniform(0.5, 4.9)))
            out, applied = prune_revolute(motion, box)
            new_axis, _ = matrix_axis_angle(out.rotation)
            assert applied
            assert np.max(np.abs(box.axes @ new_axis)) == pytest.approx(1.0, abs=1e-9)


class TestEnforceJointType:
    def test_revolute(self):
        motion = RigidMotion.from_axis_angle([0, 0, 1], np.radians(30.0), translation=[0.001, 0, 0])
        out = enforce_joint_type(motion, 4000)
        assert out.joint_type == JointType.REVOLUTE
        assert np.array_equal(out.t, np.zeros(3))
        assert out.angle == pytest.approx(motion.angle)

    def test_prismatic(self):
        motion = RigidMotion.from_axis_angle([0, 0, 1], np.radians(0.5), translation=[0.2, 0, 0])
        out = enforce_joint_type(motion, 4000)
        assert out.joint_type == JointType.PRISMATIC
        assert np.allclose(out.rotation, np.eye(3))
        assert np.allclose(out.t, [0.2, 0, 0])

    def test_degenerate_motion(self):
        out = enforce_joint_type(RigidMotion(t=[0.001, 0, 0]), 5000)
        assert out.joint_type == JointType.PRISMATIC
        assert np.array_equal(out.t, np.zeros(3))

    def test_before_freeze(self):
        motion = RigidMotion.from_axis_angle([0, 0, 1], np.radians(30.0))
        assert enforce_joint_type(motion, 3999) is motion

    def test_decided_once(self):
        motion = enforce_joint_type(RigidMotion.from_axis_angle([0, 0, 1], np.radians(30.0)), 4000)
        assert enforce_joint_type(motion, 9000) is motion


# ============================================================================
# Detection
# ============================================================================

class TestDetectCollisions:
    def test_static_pair(self):
        a = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b = OBB.axis_aligned([0.5, 0, 0], [1.5, 1, 1])
        assert detect_collisions([(a, a), (b, b)]) == []

    def test_drawers_pushed_together(self):
        a0 = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b0 = OBB.axis_aligned([1.1, 0, 0], [2.1, 1, 1])
        push = RigidMotion(t=[0.5, 0.0, 0.0])
        reports = detect_collisions([(a0, transform_obb(a0, push)), (b0, b0)])
        assert len(reports) == 1
        report = reports[0]
        assert report.pair == (0, 1)
        assert report.pruned == 0
        assert abs(report.axis[0]) == pytest.approx(1.0)
        assert report.v0 == 0.0
        assert report.v1 == pytest.approx(0.4, abs=0.01)

    def test_flags_match_aabb_oracle(self):
        rng = np.random.default_rng(12)
        checked = 0
        for _ in range(40):
            lo_a = rng.uniform(-1, 0, 3)
            hi_a = lo_a + rng.uniform(0.3, 1.0, 3)
            lo_b = rng.uniform(-0.5, 0.5, 3)
            hi_b = lo_b + rng.uniform(0.3, 1.0, 3)
            shift_a, shift_b = rng.normal(scale=0.4, size=3), rng.normal(scale=0.4, size=3)
            a0, b0 = OBB.axis_aligned(lo_a, hi_a), OBB.axis_aligned(lo_b, hi_b)
            a1 = transform_obb(a0, RigidMotion(t=shift_a))
            b1 = transform_obb(b0, RigidMotion(t=shift_b))
            delta = (aabb_overlap(lo_a + shift_a, hi_a + shift_a, lo_b + shift_b, hi_b + shift_b)
                     - aabb_overlap(lo_a, hi_a, lo_b, hi_b))
            smaller = min(a0.volume, b0.volume)
            if delta != 0.0 and abs(delta - 1e-4) < 0.03 * smaller:
                continue
            checked += 1
            flagged = len(detect_collisions([(a0, a1), (b0, b1)])) == 1
            assert flagged == (delta > 1e-4)
        assert checked > 20

    def test_volumes_symmetric(self):
        a0 = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b0 = OBB.axis_aligned([1.05, 0, 0], [2.0, 0.8, 0.9])
        a1 = transform_obb(a0, RigidMotion(t=[0.4, 0.1, 0.0]))
        forward = detect_collisions([(a0, a1), (b0, b0)])[0]
        backward = detect_collisions([(b0, b0), (a0, a1)])[0]
        assert forward.v0 == backward.v0 and forward.v1 == backward.v1
        assert backward.pruned == 1

    def test_planned_actions(self):
        a0 = OBB.axis_aligned([0, 0, 0], [1, 1, 1])
        b0 = OBB.axis_aligned([1.1, 0, 0], [2.1, 1, 1])
        push = RigidMotion(t=[0.5, 0.0, 0.0])
        parts = [(a0, transform_obb(a0, push)), (b0, b0)]
        near_identity = detect_collisions(parts, [push, RigidMotion()])[0]
        assert near_identity.action == PruneAction.REVOLUTE_RESET
        typed = push.with_params(joint_type=JointType.PRISMATIC)
        assert detect_collisions(parts, [typed, RigidMotion()])[0].action == PruneAction.PRISMATIC_PROJECTED


class TestPruneMotions:
    def test_colliding_translation_projected(self):
        a = box_grid((0.0, 0.0, 0.0), (0.4, 0.2, 0.1), (9, 5, 3))
        b = box_grid((0.45, 0.0, 0.0), (0.85, 0.2, 0.1), (9, 5, 3))
        field = make_field(np.vstack([a, b]), np.full(len(a) + len(b), -1000.0))
        proposals = [
            PartProposal.from_moments(a.mean(axis=0), np.full(3, 0.03), 0.5, RigidMotion(t=[0.3, 0.05, 0.0])),
            PartProposal.from_moments(b.mean(axis=0), np.full(3, 0.03), 0.5, RigidMotion()),
        ]
        assignment = assign(field, proposals)
        reports = prune_motions(field, proposals, assignment, iteration=100)
        assert len(reports) == 1
        assert reports[0].pruned == 0 and reports[0].iteration == 100
        assert abs(proposals[0].motion.t[0]) < 1e-9
        assert proposals[0].motion.t[1] == pytest.approx(0.05)
        assert np.array_equal(proposals[1].motion.t, np.zeros(3))

    def test_undecided_reset_records_projection(self):
        a = box_grid((0.0, 0.0, 0.0), (0.4, 0.2, 0.1), (9, 5, 3))
        b = box_grid((0.45, 0.0, 0.0), (0.85, 0.2, 0.1), (9, 5, 3))
        field = make_field(np.vstack([a, b]), np.full(len(a) + len(b), -1000.0))
        push = RigidMotion.from_axis_angle(np.array([0.0, 0.0, 1.0]), np.radians(2.0),
                                           center=a.mean(axis=0), translation=[0.3, 0.0, 0.0])
        proposals = [
            PartProposal.from_moments(a.mean(axis=0), np.full(3, 0.03), 0.5, push),
            PartProposal.from_moments(b.mean(axis=0), np.full(3, 0.03), 0.5, RigidMotion()),
        ]
        report = prune_motions(field, proposals, assign(field, proposals), iteration=50)[0]
        assert report.action == PruneAction.REVOLUTE_RESET
        assert report.projected
        assert report.to_dict()['projected'] is True
        motion = proposals[0].motion
        assert np.degrees(motion.angle) == pytest.approx(1.0, abs=1e-6)
        assert abs(motion.t @ report.axis) < 1e-9

    def test_prismatic_report_is_projected(self):
        a = box_grid((0.0, 0.0, 0.0), (0.4, 0.2, 0.1), (9, 5, 3))
        b = box_grid((0.45, 0.0, 0.0), (0.85, 0.2, 0.1), (9, 5, 3))
        field = make_field(np.vstack([a, b]), np.full(len(a) + len(b), -1000.0))
        slide = RigidMotion(t=[0.3, 0.0, 0.0], joint_type=JointType.PRISMATIC)
        proposals = [
            PartProposal.from_moments(a.mean(axis=0), np.full(3, 0.03), 0.5, slide),
            PartProposal.from_moments(b.mean(axis=0), np.full(3, 0.03), 0.5, RigidMotion()),
        ]
        report = prune_motions(field, proposals, assign(field, proposals), iteration=50)[0]
        assert report.action == PruneAction.PRISMATIC_PROJECTED
        assert report.projected

    def test_single_part(self):
        a = box_grid((0.0, 0.0, 0.0), (0.4, 0.2, 0.1), (5, 3, 3))
        field = make_field(a, np.full(len(a), -1000.0))
        proposals = [PartProposal.from_moments(a.mean(axis=0), np.full(3, 0.1), 1.0)]
        assert prune_motions(field, proposals, assign(field, proposals), iteration=100) == []


# ============================================================================
# Proposal integration
# ============================================================================

class TestAdjacency:
    def test_touching_and_separated(self):
        a = box_grid((0, 0, 0), (0.2, 0.2, 0.2), (3, 3, 3))
        b = a + [0.25, 0, 0]
        c = a + [5.0, 0, 0]
        field = make_field(np.vstack([a, b, c]), np.full(81, -1000.0))
        proposals = [fitted(a), fitted(b), fitted(c)]
        pairs = adjacency(assign(field, proposals), field.centers, k=8)
        assert (0, 1) in pairs
        assert not any(2 in pair for pair in pairs)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        centers = rng.uniform(-1, 1, size=(60, 3))
        field = make_field(centers, rng.normal(size=60))
        proposals = [PartProposal.from_moments(rng.uniform(-1, 1, 3), np.full(3, 0.4), 1.0) for _ in range(4)]
        assignment = assign(field, proposals)
        k = 5

        entries = [(p, m) for m in range(4) for p in assignment.members(m)]
        points = centers[[p for p, _ in entries]]
        d2 = np.sum((points[:, None] - points[None]) ** 2, axis=2)
        np.fill_diagonal(d2, np.inf)
        expected = set()
        for e, row in enumerate(d2):
            for other in np.argsort(row, kind='stable')[:k]:
                a, b = entries[e][1], entries[other][1]
                if a != b:
                    expected.add((min(a, b), max(a, b)))
        assert adjacency(assignment, centers, k) == expected

    def test_single_part(self):
        field = make_field(np.zeros((3, 3)) + np.arange(3)[:, None], np.full(3, -1000.0))
        proposals = [PartProposal.from_moments(np.ones(3), np.ones(3), 1.0)]
        assert adjacency(assign(field, proposals), field.centers) == set()


class TestScore:
    def test_deterministic(self, toy):
        field, fragments, views, config = toy
        assert score(field, fragments, views, config) == score(field, fragments, views, config)

    def test_true_motions_beat_identity(self, toy):
        field, fragments, views, config = toy
        at_rest = [p.copy() for p in fragments]
        for p in at_rest:
            p.motion = RigidMotion()
        assert score(field, fragments, views, config) == pytest.approx(0.0, abs=1e-12)
        assert score(field, at_rest, views, config) > 1e-3

    def test_needs_views(self, toy):
        field, fragments, _, config = toy
        with pytest.raises(ValueError):
            score(field, fragments, [], config)


class TestEvaluateMerges:
    def test_fragments_vs_door(self, toy):
        field, fragments, views, config = toy
        candidates = evaluate_merges(field, fragments, [(0, 1), (0, 2)], views, config)
        by_pair = {c.pair: c for c in candidates}
        assert set(by_pair) == {(0, 1), (1, 0), (0, 2), (2, 0)}
        assert by_pair[(0, 1)].delta == 0.0
        assert by_pair[(1, 0)].delta == 0.0
        assert by_pair[(0, 2)].delta > config.merge.tau_merge
        assert by_pair[(2, 0)].delta > config.merge.tau_merge
        assert all(c.current >= 0 and c.swapped >= 0 for c in candidates)


class TestSelectAndFuse:
    @pytest.fixture
    def four(self):
        rng = np.random.default_rng(2)
        blocks = [rng.normal(size=(10, 3)) * 0.02 + [0.3 * i, 0, 0] for i in range(4)]
        field = make_field(np.vstack(blocks), np.full(40, -1000.0))
        motions = [RigidMotion(t=[0, 0.01 * i, 0]) for i in range(4)]
        proposals = [fitted(b, m, 0.25, min_std=0.02) for b, m in zip(blocks, motions)]
        return field, proposals, assign(field, proposals)

    def test_nothing_below_threshold(self, four):
        field, proposals, assignment = four
        out, log = select_and_fuse(field, proposals, [MergeCandidate((0, 1), 1.0, 0.5)], assignment)
        assert log == []
        assert len(out) == 4

    def test_single_merge(self, four):
        field, proposals, assignment = four
        out, log = select_and_fuse(field, proposals, [MergeCandidate((0, 1), 0.2, 0.2001)], assignment)
        assert len(out) == 3
        assert log[0]['absorbed'] == 0 and log[0]['survivor'] == 1 and log[0]['survivor_after'] == 0
        fused = out[0]
        assert same_motion(fused.motion, proposals[1].motion)
        union = np.union1d(assignment.members(0), assignment.members(1))
        assert np.allclose(fused.mu, field.centers[union].mean(axis=0), atol=1e-9)
        assert fused.obb is not None

    def test_conflicts_skip_consumed(self, four):
        field, proposals, assignment = four
        candidates = [MergeCandidate((1, 2), 0.0, 2e-5), MergeCandidate((0, 1), 0.0, 1e-5),
                      MergeCandidate((3, 2), 0.0, 3e-5)]
        out, log = select_and_fuse(field, proposals, candidates, assignment)
        assert [(e['absorbed'], e['survivor']) for e in log] == [(0, 1), (3, 2)]
        assert len(out) == 2
        assert same_motion(out[0].motion, proposals[1].motion)
        assert same_motion(out[1].motion, proposals[2].motion)

    def test_mass_conserved(self, four):
        field, proposals, assignment = four
        candidates = [MergeCandidate((0, 1), 0.0, 1e-5), MergeCandidate((2, 3), 0.0, 1e-5)]
        out, _ = select_and_fuse(field, proposals, candidates, assignment)
        assert sum(p.weight for p in out) == pytest.approx(sum(p.weight for p in proposals), abs=1e-9)
        assert len(field) == 40

    def test_members_after_fusion_cover_union(self):
        rng = np.random.default_rng(9)
        a = rng.normal(size=(15, 3)) * 0.03
        b = rng.normal(size=(15, 3)) * 0.03 + [0.1, 0, 0]
        field = make_field(np.vstack([a, b]), np.full(30, -1000.0))
        proposals = [fitted(a, weight=0.5), fitted(b, weight=0.5)]
        assignment = assign(field, proposals)
        out, _ = select_and_fuse(field, proposals, [MergeCandidate((0, 1), 0.0, 0.0)], assignment)
        union = np.union1d(assignment.members(0), assignment.members(1))
        assert np.array_equal(assign(field, out).members(0), union)


# ============================================================================
# Optimizer
# ============================================================================

class TestAdam:
    def test_zero_gradient(self):
        adam = Adam()
        param = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(adam.update('pivot', param, np.zeros_like(param)), param)

    def test_first_step_is_learning_rate(self):
        adam = Adam(StepSizes(translation=0.01))
        out = adam.update('translation', np.zeros((1, 3)), np.array([[3.0, -0.5, 0.0]]))
        assert np.allclose(out, [[-0.01, 0.01, 0.0]], atol=1e-8)

    def test_frozen_rows(self):
        adam = Adam()
        param = np.ones((3, 6))
        out = adam.update('rotation', param, np.ones_like(param), frozen=np.array([False, True, False]))
        assert np.array_equal(out[1], param[1])
        assert not np.array_equal(out[0], param[0])

    def test_reset_rows(self):
        adam = Adam()
        grad = np.ones((2, 3))
        out = adam.update('mu', np.zeros((2, 3)), grad)
        adam.reset_rows('mu', [1])
        again = adam.update('mu', out, -grad)
        assert np.allclose(again[1] - out[1], adam.learning_rate('mu'), atol=1e-8)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            Adam().update('mu', np.zeros((2, 3)), np.zeros((3, 3)))


class TestEventLog:
    def test_order(self, tmp_path):
        log = EventLog()
        log.append('prune', 100, pair=[0, 1])
        log.append('freeze', 100, part=0)
        log.append('merge', 5000)
        assert [e['seq'] for e in log] == [0, 1, 2]
        with pytest.raises(ValueError):
            log.append('prune', 4000)
        path = log.write_json(tmp_path / 'events.json')
        assert json.loads(path.read_text())[1]['kind'] == 'freeze'
        assert len(log.of_kind('prune')) == 1


def make_state(toy, **schedule):
    field, fragments, views, config = toy
    for key, value in schedule.items():
        setattr(config.schedule, key, value)
    p1 = transform_object(field, fragments, assign(field, fragments)).centers
    targets = Targets.from_clouds(p1, views, views)
    init = ProposalInit(0.01, np.arange(len(field)), proposals=fragments)
    return associate(field, init, targets, config)


class TestAssociate:
    def test_anchors_and_weights(self, toy):
        state = make_state(toy)
        assert state.part_count == 3
        for proposal, anchor in zip(state.proposals, state.anchors):
            assert np.array_equal(proposal.mu, anchor.mu)
            assert np.allclose(proposal.scale, anchor.scale)
        assert sum(p.weight for p in state.proposals) == pytest.approx(1.0)

    def test_no_proposals(self, toy):
        field, _, views, config = toy
        targets = Targets.from_clouds(field.centers, views)
        with pytest.raises(ValueError):
            associate(field, ProposalInit(0.01, np.array([], dtype=int)), targets, config)


class TestStep:
    def test_records_loss(self, toy):
        state = make_state(toy)
        for _ in range(3):
            step(state)
        assert state.iteration == 3
        assert [row['iteration'] for row in state.loss_rows] == [1, 2, 3]
        assert all(np.isfinite(row['total']) for row in state.loss_rows)

    def test_deterministic(self, toy):
        first, second = make_state(toy), make_state(toy)
        step(first)
        step(second)
        assert np.array_equal(first.field.centers, second.field.centers)
        for a, b in zip(first.proposals, second.proposals):
            assert np.array_equal(a.motion.r, b.motion.r) and np.array_equal(a.mu, b.mu)

    def test_frozen_parameters_untouched(self, toy):
        state = make_state(toy)
        state.proposals[0].motion = state.proposals[0].motion.with_params(joint_type=JointType.PRISMATIC)
        state.proposals[2].motion = state.proposals[2].motion.with_params(t=np.zeros(3), joint_type=JointType.REVOLUTE)
        rotation = state.proposals[0].motion.r.copy()
        for _ in range(2):
            step(state)
        assert np.array_equal(state.proposals[0].motion.r, rotation)
        assert np.array_equal(state.proposals[2].motion.t, np.zeros(3))

    def test_non_finite_loss(self, toy, monkeypatch):
        state = make_state(toy)
        grad = objective_stage1(state.field, state.proposals, state.anchors, state.targets, state.config).grad
        broken = LossReport({'depth': float('nan')}, {'depth': 1.0}, float('nan'), grad)
        monkeypatch.setattr(optimizer_module, 'objective_stage1', lambda *args, **kwargs: broken)
        with pytest.raises(OptimizationError) as info:
            step(state)
        assert info.value.diagnostics['iteration'] == 0
        assert state.iteration == 0


class TestSchedule:
    @pytest.fixture
    def recorded(self, toy, monkeypatch):
        state = make_state(toy, cycle_iters=250, prune_every=100, merge_every=200, type_freeze_at=150)
        calls = {'prune': [], 'merge': [], 'freeze': []}

        def fake_step(s):
            s.iteration += 1

        monkeypatch.setattr(optimizer_module, 'step', fake_step)
        monkeypatch.setattr(optimizer_module, 'prune', lambda s: calls['prune'].append(s.iteration))
        monkeypatch.setattr(optimizer_module, 'freeze_joint_types', lambda s: calls['freeze'].append(s.iteration))
        monkeypatch.setattr(optimizer_module, 'merge_round',
                            lambda s: calls['merge'].append(s.iteration) or False)
        return state, calls

    def test_trigger_iterations(self, recorded):
        state, calls = recorded
        assert run_cycle(state) is False
        assert calls['prune'] == [100, 200]
        assert calls['merge'] == [200]
        assert calls['freeze'][0] == 150 and calls['freeze'][-1] == 250
        kinds = [e['kind'] for e in state.events]
        assert kinds[0] == 'cycle_start' and kinds[-1] == 'cycle_end'

    def test_prune_ablation(self, recorded):
        state, calls = recorded
        state.config.ablation.prune = False
        run_cycle(state)
        assert calls['prune'] == []

    def test_optimize_stops_without_merge(self, toy, monkeypatch):
        state = make_state(toy)
        cycles = []
        monkeypatch.setattr(optimizer_module, 'run_cycle', lambda s: cycles.append(1) or False)
        optimize(state)
        assert len(cycles) == 1

    def test_optimize_bounded(self, toy, monkeypatch):
        state = make_state(toy, max_cycles=3)
        cycles = []
        monkeypatch.setattr(optimizer_module, 'run_cycle', lambda s: cycles.append(1) or True)
        optimize(state)
        assert len(cycles) == 3
        cycles.clear()
        state.config.ablation.merge = False
        optimize(state)
        assert len(cycles) == 1


class TestFreezeAndMerge:
    def test_freeze_joint_types(self, toy):
        state = make_state(toy, type_freeze_at=0)
        assert freeze_joint_types(state) == 3
        types = [p.motion.joint_type for p in state.proposals]
        assert types == [JointType.PRISMATIC, JointType.PRISMATIC, JointType.REVOLUTE]
        assert np.array_equal(state.proposals[2].motion.t, np.zeros(3))
        assert len(state.events.of_kind('freeze')) == 3
        assert freeze_joint_types(state) == 0

    def test_fragments_merge(self, toy):
        state = make_state(toy)
        assert merge_round(state)
        assert state.part_count == 2
        assert len(state.anchors) == 2
        merges = state.events.of_kind('merge')
        assert len(merges) == 1 and {merges[0]['absorbed'], merges[0]['survivor']} == {0, 1}
        assert not merge_round(state)

    def test_merge_monotone(self, toy):
        state = make_state(toy)
        counts = [state.part_count]
        for _ in range(3):
            merge_round(state)
            counts.append(state.part_count)
        assert all(a >= b for a, b in zip(counts, counts[1:]))


class TestRefine:
    def test_zero_iterations(self, toy):
        state = make_state(toy)
        centers = state.field.centers.copy()
        assert refine(state, 0) is state
        assert np.array_equal(state.field.centers, centers)
        assert state.iteration == 0

    def test_steps_recorded(self, toy):
        state = make_state(toy)
        refine(state, 2)
        assert state.iteration == 2
        assert [row['stage'] for row in state.loss_rows] == ['refine', 'refine']
        assert {'depth0', 'depth', 'col'} <= set(state.loss_rows[0])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
