"""Tests for the reconstruction pipeline and run-directory I/O."""
from dataclasses import replace
import json
import os
import sys

import numpy as np
import pandas as pd
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import (
    AblationConfig,
    InitConfig,
    JointType,
    PipelineConfig,
    PruneConfig,
    RenderConfig,
    ScheduleConfig,
)
from geometry import RigidMotion
import reconstruction_pipeline
from reconstruction_pipeline import (
    articulate,
    finalize_motion,
    read_run,
    run_pipeline,
    state_fractions,
    write_animation,
    write_run,
)
from scenes import generate, preset


RUN_FILES = ['result.json', 'events.json', 'loss.csv', 'pred_state0.ply', 'pred_state1.ply',
             'field.ply', 'proposals.json', 'proposals_init.json', 'config.toml']


def tiny_config(**ablation) -> PipelineConfig:
    return PipelineConfig(
        render=RenderConfig(resolution=24, parallel=False),
        init=InitConfig(seed_count=4, phi_step_deg=10.0, d_step=0.1, refine_rounds=1, face_samples=16),
        schedule=ScheduleConfig(prune_every=5, merge_every=10, type_freeze_at=10, cycle_iters=10,
                                max_cycles=2, refine_iters=3, log_every=5),
        prune=PruneConfig(overlap_samples=1024),
        ablation=AblationConfig(**ablation),
    )


@pytest.fixture(scope="module")
def scene():
    spec = replace(preset('laptop'), samples_per_part=120, views=3)
    return generate(spec, RenderConfig(resolution=24, parallel=False))


def run(scene, config=None, **kwargs):
    return run_pipeline(scene.state0, scene.state1, scene.depth_views_state1,
                        scene.depth_views_state0, config or tiny_config(), scene=scene.name, **kwargs)


@pytest.fixture(scope="module")
def result(scene):
    return run(scene)


# ============================================================================
# run_pipeline
# ============================================================================

class TestRunPipeline:
    def test_articulated_result(self, result, scene):
        assert result.status == 'articulated'
        assert result.part_count >= 1
        assert result.labels.shape == (len(scene.state0),)
        assert result.labels.min() >= 0
        assert result.labels.max() <= result.part_count

    def test_joint_types_are_decided(self, result):
        for motion in result.motions.values():
            assert motion.joint_type != JointType.UNKNOWN

    def test_schedule_ran_with_refinement(self, result):
        assert result.iterations >= 10 + 3
        kinds = [e['kind'] for e in result.events]
        assert kinds[0] == 'cycle_start'
        assert 'refine_start' in kinds
        stages = pd.DataFrame(result.loss_rows)['stage']
        assert (stages == 'refine').sum() == 3

    def test_result_document(self, result):
        document = result.to_dict()
        assert document['scene'] == 'laptop'
        assert document['part_count'] == result.part_count
        assert len(document['parts']) == result.part_count
        for part in document['parts']:
            if part['joint_type'] == 'revolute':
                assert np.linalg.norm(part['axis']) == pytest.approx(1.0)
                assert part['pivot'] is not None
            else:
                assert part['pivot'] is None
        json.dumps(document)

    def test_deterministic(self, result, scene):
        again = run(scene)
        assert json.dumps(again.to_dict(), sort_keys=True) == json.dumps(result.to_dict(), sort_keys=True)
        assert again.events.to_list() == result.events.to_list()

    def test_merge_disabled_runs_one_cycle(self, scene):
        single = run(scene, tiny_config(merge=False))
        assert len(single.events.of_kind('cycle_start')) == 1
        assert single.events.of_kind('merge') == []

    def test_static_object(self, scene):
        static = run_pipeline(scene.state0, scene.state0, scene.depth_views_state0,
                              scene.depth_views_state0, tiny_config())
        assert static.is_static
        assert static.part_count == 0
        assert np.all(static.labels == 0)
        assert static.to_dict()['parts'] == []

    def test_views_required(self, scene):
        with pytest.raises(ValueError):
            run_pipeline(scene.state0, scene.state1, [], [], tiny_config())

    def test_unknown_override_rejected(self, scene):
        with pytest.raises(ValueError):
            run(scene, motion_overrides={99: RigidMotion()})

    def test_override_replaces_initial_motion(self, scene, monkeypatch):
        seen = {}
        forced = RigidMotion(t=[0.0, 0.3, 0.0])

        def capture(field, init, targets, config):
            seen['motion'] = init.proposals[0].motion
            raise RuntimeError('stop')

        monkeypatch.setattr(reconstruction_pipeline, 'associate', capture)
        with pytest.raises(RuntimeError, match='stop'):
            run(scene, motion_overrides={0: forced})
        assert seen['motion'] is forced

    def test_callable_override_sees_every_proposal(self, scene, monkeypatch):
        calls = []

        def push_in(index, proposal):
            calls.append(index)
            return RigidMotion(c=proposal.mu, t=[0.0, -0.1, 0.0])

        def capture(field, init, targets, config):
            assert all(np.allclose(p.motion.t, [0.0, -0.1, 0.0]) for p in init.proposals)
            raise RuntimeError('stop')

        monkeypatch.setattr(reconstruction_pipeline, 'associate', capture)
        with pytest.raises(RuntimeError, match='stop'):
            run(scene, motion_overrides=push_in)
        assert calls == list(range(len(calls)))
        assert calls

    def test_refinement_skipped_without_rest_views(self, scene):
        config = tiny_config(merge=False)
        config = replace(config, schedule=replace(config.schedule, cycle_iters=5))
        partial = run_pipeline(scene.state0, scene.state1, scene.depth_views_state1, [], config)
        assert partial.events.of_kind('refine_start') == []


class TestFinalizeMotion:
    def test_undecided_rotation_becomes_revolute(self):
        m = RigidMotion.from_axis_angle(np.array([0.0, 0.0, 1.0]), np.radians(40.0), translation=[0.1, 0, 0])
        final = finalize_motion(m, PipelineConfig())
        assert final.joint_type == JointType.REVOLUTE
        np.testing.assert_array_equal(final.t, np.zeros(3))

    def test_decided_motion_is_unchanged(self):
        m = RigidMotion(t=[0.0, 0.2, 0.0], joint_type=JointType.PRISMATIC)
        assert finalize_motion(m, PipelineConfig()) is m


# ============================================================================
# Articulation of labeled points
# ============================================================================

class TestArticulate:
    def setup_method(self):
        rng = np.random.default_rng(2)
        self.points = rng.uniform(size=(50, 3))
        self.labels = np.repeat([0, 1], 25)
        self.motion = RigidMotion.from_axis_angle(np.array([0.0, 0.0, 1.0]), np.radians(45.0),
                                                  center=[0.5, 0.5, 0.0], translation=[0.0, 0.0, 0.2])

    def test_fraction_zero_is_rest(self):
        cloud = articulate(self.points, self.labels, {1: self.motion}, 0.0)
        np.testing.assert_allclose(cloud.points, self.points, atol=1e-12)

    def test_fraction_one_is_full_motion(self):
        cloud = articulate(self.points, self.labels, {1: self.motion}, 1.0)
        np.testing.assert_allclose(cloud.points[25:], self.motion.apply(self.points[25:]), atol=1e-12)
        np.testing.assert_array_equal(cloud.points[:25], self.points[:25])
        np.testing.assert_array_equal(cloud.labels, self.labels)

    def test_state_fractions(self):
        np.testing.assert_allclose(state_fractions(5), [0.0, 0.25, 0.5, 0.75, 1.0])
        with pytest.raises(ValueError):
            state_fractions(1)


# ============================================================================
# Run directory
# ============================================================================

class TestRunDirectory:
    def test_write_creates_all_files(self, result, tmp_path):
        write_run(tmp_path / 'run', result)
        for name in RUN_FILES:
            assert (tmp_path / 'run' / name).is_file(), name

    def test_round_trip(self, result, tmp_path):
        record = read_run(write_run(tmp_path / 'run', result))
        assert record.result == json.loads(json.dumps(result.to_dict()))
        assert record.config.to_dict() == result.config.to_dict()
        assert set(record.motions) == set(result.motions)
        for label, motion in result.motions.items():
            np.testing.assert_array_equal(record.motions[label].r, motion.r)
            assert record.motions[label].joint_type == motion.joint_type
        np.testing.assert_array_equal(record.pred_state0.labels, result.labels)
        np.testing.assert_allclose(record.pred_state1.points, result.predicted_cloud(1.0).points)
        assert len(record.loss) == len(result.loss_rows)
        assert record.metrics is None

    def test_rewrite_is_byte_identical(self, result, tmp_path):
        write_run(tmp_path / 'a', result)
        write_run(tmp_path / 'b', result)
        for name in ('result.json', 'events.json', 'loss.csv'):
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes()

    def test_missing_files(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_run(tmp_path)

    def test_animation(self, result, scene, tmp_path):
        record = read_run(write_run(tmp_path / 'run', result))
        written = write_animation(record, tmp_path / 'anim', 3, truth=scene)
        names = sorted(p.name for p in written)
        assert names == ['state_00.ply', 'state_01.ply', 'state_02.ply',
                         'truth_00.ply', 'truth_01.ply', 'truth_02.ply']


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
