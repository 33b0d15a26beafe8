"""Unit tests for synthetic scene generation."""
import dataclasses
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import JointType, RenderConfig
from errors import PresetNotFoundError, SceneSpecError
from geometry import chamfer_one_sided, median_spacing
from rendering import mean_foreground_error, render_views, SplatSet
from scenes import (
    BoxShape,
    JointSpec,
    PartSpec,
    SceneSpec,
    generate,
    list_presets,
    normalize_spec,
    preset,
    read_scene,
    write_scene,
)


SMALL_RENDER = RenderConfig(resolution=32, parallel=False)


def small(spec: SceneSpec, views: int = 0, **changes) -> SceneSpec:
    return dataclasses.replace(spec, samples_per_part=150, views=views, **changes)


def apply_truth(truth):
    moved = truth.state0.points.copy()
    for label, motion in truth.motions().items():
        mask = truth.state0.labels == label
        moved[mask] = motion.apply(truth.state0.points[mask])
    return moved


@pytest.fixture(scope="module")
def laptop_truth():
    return generate(small(preset('laptop'), views=2), SMALL_RENDER)


class TestGenerate:
    def test_laptop_lid_follows_hinge(self, laptop_truth):
        lid = laptop_truth.state0.labels == 1
        motion = laptop_truth.motions()[1]
        assert motion.joint_type == JointType.REVOLUTE
        assert np.degrees(motion.angle) == pytest.approx(60.0)
        expected = motion.apply(laptop_truth.state0.points[lid])
        assert np.allclose(laptop_truth.state1.points[lid], expected, atol=1e-9)

    def test_drawer_displacement(self):
        truth = generate(small(preset('drawers3-adjacent')))
        joint = truth.joints[0]
        mask = truth.state0.labels == joint.label
        shift = truth.state1.points[mask].mean(axis=0) - truth.state0.points[mask].mean(axis=0)
        assert joint.magnitude == pytest.approx(0.3)
        assert np.allclose(shift, joint.magnitude * joint.axis, atol=1e-9)

    def test_static_points_identical(self, laptop_truth):
        static = laptop_truth.state0.labels == 0
        assert np.array_equal(laptop_truth.state0.points[static], laptop_truth.state1.points[static])

    def test_truth_chamfer_is_zero(self):
        truth = generate(small(preset('storage5-mixed')))
        assert chamfer_one_sided(apply_truth(truth), truth.state1) < 1e-12

    def test_counts_and_labels(self):
        spec = small(preset('fridge-2door'))
        truth = generate(spec)
        labels, counts = np.unique(truth.state0.labels, return_counts=True)
        assert labels.tolist() == [0, 1, 2]
        assert counts.tolist() == [150, 150, 150]
        assert np.array_equal(truth.state0.labels, truth.state1.labels)

    def test_deterministic(self):
        a = generate(small(preset('oven'), seed=4))
        b = generate(small(preset('oven'), seed=4))
        c = generate(small(preset('oven'), seed=5))
        assert np.array_equal(a.state0.points, b.state0.points)
        assert not np.array_equal(a.state0.points, c.state0.points)

    def test_noise(self):
        truth = generate(small(preset('laptop'), noise_sigma=0.002))
        static = truth.state0.labels == 0
        diff = truth.state1.points[static] - truth.state0.points[static]
        assert 0 < np.abs(diff).max() < 0.05

    def test_views_rendered(self, laptop_truth):
        assert len(laptop_truth.depth_views_state1) == 2
        assert len(laptop_truth.depth_views_state0) == 2
        assert laptop_truth.depth_views_state1[0].foreground.any()

    def test_reference_views_reproduced(self, laptop_truth):
        spacing = median_spacing(laptop_truth.state1)
        splats = SplatSet(laptop_truth.state1.points, spacing, 0.9)
        cameras = [view.camera for view in laptop_truth.depth_views_state1]
        for rendered, reference in zip(render_views(splats, cameras, SMALL_RENDER),
                                       laptop_truth.depth_views_state1):
            assert mean_foreground_error(rendered, reference) < 2 * spacing


class TestSpecValidation:
    def base(self):
        return PartSpec('base', (BoxShape.from_bounds((-0.5, -0.5, -0.1), (0.5, 0.5, 0.0)),), static=True)

    def test_interpenetration_rejected(self):
        lid = PartSpec('lid', (BoxShape.from_bounds((-0.2, -0.2, -0.05), (0.2, 0.2, 0.1)),))
        spec = SceneSpec('bad', (self.base(), lid),
                         (JointSpec(1, JointType.PRISMATIC, (0, 0, 1), (0, 0, 0), 0.2),),
                         samples_per_part=200, views=0)
        with pytest.raises(SceneSpecError):
            generate(spec)

    def test_needs_one_static_part(self):
        spec = SceneSpec('bad', (self.base(), self.base()), (), views=0)
        with pytest.raises(SceneSpecError):
            spec.validate()

    @pytest.mark.parametrize("joint_type,magnitude", [
        (JointType.REVOLUTE, np.radians(90.0)),
        (JointType.PRISMATIC, 0.6),
    ])
    def test_magnitude_bounds(self, joint_type, magnitude):
        lid = PartSpec('lid', (BoxShape.from_bounds((-0.2, -0.2, 0.0), (0.2, 0.2, 0.1)),))
        spec = SceneSpec('bad', (self.base(), lid),
                         (JointSpec(1, joint_type, (0, 0, 1), (0, 0, 0), magnitude),), views=0)
        with pytest.raises(SceneSpecError):
            spec.validate()

    def test_normalization_fits_unit_cube(self):
        big = PartSpec('base', (BoxShape.from_bounds((0, 0, 0), (4, 2, 1)),), static=True)
        lid = PartSpec('lid', (BoxShape.from_bounds((0, 0, 1), (4, 2, 1.2)),))
        spec = SceneSpec('big', (big, lid), (JointSpec(1, JointType.PRISMATIC, (0, 0, 1), (0, 0, 0), 1.0),))
        normalized = normalize_spec(spec)
        corners = np.vstack([b.corners() for p in normalized.parts for b in p.boxes])
        assert np.allclose(corners.max(axis=0) - corners.min(axis=0), [1.0, 0.5, 0.3])
        assert np.allclose((corners.max(axis=0) + corners.min(axis=0)) / 2, 0.0)
        assert normalized.joints[0].magnitude == pytest.approx(0.25)

    def test_out_of_bound_slide_on_large_object_rejected(self):
        # 1.0 would shrink to 0.25 after scaling; the bound holds on the spec as written
        big = PartSpec('base', (BoxShape.from_bounds((0, 0, 0), (4, 2, 1)),), static=True)
        lid = PartSpec('lid', (BoxShape.from_bounds((0, 0, 1), (4, 2, 1.2)),))
        spec = SceneSpec('big', (big, lid), (JointSpec(1, JointType.PRISMATIC, (0, 0, 1), (0, 0, 0), 1.0),),
                         views=0)
        with pytest.raises(SceneSpecError, match="exceeds"):
            generate(spec)


class TestPresets:
    def test_laptop(self):
        spec = preset('laptop')
        assert len(spec.joints) == 1
        assert spec.joints[0].joint_type == JointType.REVOLUTE

    def test_storage7_mixed(self):
        spec = preset('storage7')
        types = {j.joint_type for j in spec.joints}
        assert len(spec.joints) == 7
        assert types == {JointType.REVOLUTE, JointType.PRISMATIC}

    def test_drawers_touch(self):
        spec = preset('drawers3-adjacent')
        assert [j.joint_type for j in spec.joints] == [JointType.PRISMATIC] * 3
        boxes = [part.boxes[0] for part in spec.parts[1:]]
        tops = [b.center[2] + b.half[2] for b in boxes]
        bottoms = [b.center[2] - b.half[2] for b in boxes]
        assert tops[0] == pytest.approx(bottoms[1])
        assert tops[1] == pytest.approx(bottoms[2])

    def test_unknown(self):
        with pytest.raises(PresetNotFoundError) as info:
            preset('spaceship')
        assert 'laptop' in str(info.value)

    @pytest.mark.parametrize("name", list_presets())
    def test_every_preset_generates(self, name):
        truth = generate(small(preset(name)))
        assert 1 <= truth.movable_count <= 7
        assert np.abs(truth.state0.points).max() <= 0.5 + 1e-9


class TestSceneIO:
    def test_roundtrip(self, tmp_path, laptop_truth):
        write_scene(tmp_path / 'scene', laptop_truth)
        back = read_scene(tmp_path / 'scene')
        assert np.array_equal(back.state0.points, laptop_truth.state0.points)
        assert np.array_equal(back.state1.labels, laptop_truth.state1.labels)
        assert back.joints[0].joint_type == JointType.REVOLUTE
        assert np.allclose(back.joints[0].axis, laptop_truth.joints[0].axis)
        assert len(back.depth_views_state1) == 2
        assert np.allclose(back.depth_views_state1[1].depth,
                           laptop_truth.depth_views_state1[1].depth, atol=1e-5)

    def test_missing_files(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_scene(tmp_path)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
