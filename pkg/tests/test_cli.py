"""Tests for the command-line surface."""
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import cli
from errors import OptimizationError
from geometry import PointCloud, RigidMotion, write_pointcloud
from scenes import read_scene


TINY_CONFIG = """\
seed = 0

[render]
resolution = 24
parallel = false

[init]
seed_count = 4
phi_step_deg = 10.0
d_step = 0.1
refine_rounds = 1
face_samples = 16

[schedule]
prune_every = 5
merge_every = 10
type_freeze_at = 10
cycle_iters = 10
max_cycles = 2
refine_iters = 3
log_every = 5

[prune]
overlap_samples = 1024
"""


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Scene generated and reconstructed once through the CLI."""
    root = tmp_path_factory.mktemp('cli')
    config = root / 'tiny.toml'
    config.write_text(TINY_CONFIG, encoding='utf-8')
    scene, run = root / 'scene', root / 'run'
    assert cli.main(['gen', '--preset', 'laptop', '--out', str(scene), '--views', '3',
                     '--resolution', '24', '--config', str(config)]) == 0
    assert cli.main(['run', '--scene', str(scene), '--config', str(config), '--out', str(run)]) == 0
    return {'root': root, 'config': config, 'scene': scene, 'run': run}


class TestGen:
    def test_scene_written(self, workspace):
        truth = read_scene(workspace['scene'])
        assert truth.name == 'laptop'
        assert truth.movable_count == 1
        assert len(truth.depth_views_state1) == 3
        meta = json.loads((workspace['scene'] / 'truth.json').read_text(encoding='utf-8'))['meta']
        assert meta['preset'] == 'laptop'
        assert meta['resolution'] == 24

    def test_unknown_preset_is_usage_error(self, tmp_path):
        assert cli.main(['gen', '--preset', 'nope', '--out', str(tmp_path / 's')]) == 2

    def test_unknown_flag_is_usage_error(self, tmp_path):
        assert cli.main(['gen', '--preset', 'laptop', '--out', str(tmp_path), '--bogus']) == 2

    def test_missing_command_is_usage_error(self):
        assert cli.main([]) == 2


class TestInit:
    def test_proposals_dumped(self, workspace, tmp_path):
        out = tmp_path / 'init'
        assert cli.main(['init', '--scene', str(workspace['scene']), '--config',
                         str(workspace['config']), '--out', str(out)]) == 0
        document = json.loads((out / 'proposals_init.json').read_text(encoding='utf-8'))
        assert document['movable_count'] > 0
        gmm = json.loads((out / 'proposals.json').read_text(encoding='utf-8'))
        assert len(gmm) == len(document['gmm'])


class TestRun:
    def test_run_directory(self, workspace):
        result = json.loads((workspace['run'] / 'result.json').read_text(encoding='utf-8'))
        assert result['status'] == 'articulated'
        assert result['part_count'] >= 1
        assert (workspace['run'] / 'config.toml').is_file()

    def test_same_seed_is_byte_identical(self, workspace):
        again = workspace['root'] / 'run_again'
        assert cli.main(['run', '--scene', str(workspace['scene']), '--config', str(workspace['config']),
                         '--out', str(again)]) == 0
        for name in ('result.json', 'events.json'):
            assert (again / name).read_bytes() == (workspace['run'] / name).read_bytes()

    def test_bad_config_is_usage_error(self, workspace, tmp_path):
        bad = tmp_path / 'bad.toml'
        bad.write_text("[schedule]\nnot_a_key = 1\n", encoding='utf-8')
        assert cli.main(['run', '--scene', str(workspace['scene']), '--config', str(bad),
                         '--out', str(tmp_path / 'r')]) == 2

    def test_missing_config_is_usage_error(self, workspace, tmp_path):
        assert cli.main(['run', '--scene', str(workspace['scene']), '--config',
                         str(tmp_path / 'absent.toml'), '--out', str(tmp_path / 'r')]) == 2

    def test_missing_scene_is_failure(self, tmp_path):
        assert cli.main(['run', '--scene', str(tmp_path / 'none'), '--out', str(tmp_path / 'r')]) == 3

    def test_optimization_failure_writes_diagnostic(self, workspace, tmp_path, monkeypatch):
        def explode(scene_dir, config):
            raise OptimizationError("Non-finite loss at iteration 3", {'iteration': 3})

        monkeypatch.setattr(cli, 'run_scene', explode)
        out = tmp_path / 'failed'
        assert cli.main(['run', '--scene', str(workspace['scene']), '--out', str(out)]) == 3
        diagnostic = json.loads((out / 'diagnostic.json').read_text(encoding='utf-8'))
        assert diagnostic['iteration'] == 3
        assert 'Non-finite' in diagnostic['error']


class TestEvalAndReport:
    def test_eval_writes_metrics(self, workspace, capsys):
        assert cli.main(['eval', '--result', str(workspace['run']), '--truth', str(workspace['scene'])]) == 0
        metrics = json.loads((workspace['run'] / 'metrics.json').read_text(encoding='utf-8'))
        result = json.loads((workspace['run'] / 'result.json').read_text(encoding='utf-8'))
        assert len(metrics['parts']) == result['part_count']
        assert metrics['chamfer']['cd_w'] >= 0.0
        assert 'Axis Ang' in capsys.readouterr().out

    def test_report_with_ablation_columns(self, workspace, capsys):
        cli.main(['eval', '--result', str(workspace['run']), '--truth', str(workspace['scene'])])
        csv_path = workspace['root'] / 'report.csv'
        assert cli.main(['report', '--runs', str(workspace['run']), '--ablation',
                         '--csv', str(csv_path)]) == 0
        out = capsys.readouterr().out
        assert 'OverSeg' in out and 'CD-w' in out
        assert csv_path.is_file()

    def test_report_without_metrics_fails(self, workspace, tmp_path):
        run = tmp_path / 'unevaluated'
        write_fake_run(run, [1], np.repeat([0, 1], 10))
        assert cli.main(['report', '--runs', str(run)]) == 3

    def test_eval_flags_part_count_mismatch(self, workspace, tmp_path, capsys):
        truth = read_scene(workspace['scene'])
        labels = truth.state1.labels.copy()
        movable = np.flatnonzero(labels == 1)
        labels[movable[::2]] = 2
        run = tmp_path / 'split'
        write_fake_run(run, [1, 2], labels, truth.state0.points, truth.state1.points, truth.joints[0].motion)
        assert cli.main(['eval', '--result', str(run), '--truth', str(workspace['scene'])]) == 0
        metrics = json.loads((run / 'metrics.json').read_text(encoding='utf-8'))
        assert 'part_count' in metrics['flags']
        assert 'flags:' in capsys.readouterr().out


def write_fake_run(directory, part_labels, labels, points0=None, points1=None, motion=None):
    directory.mkdir(parents=True)
    motion = motion or RigidMotion()
    if points0 is None:
        points0 = np.random.default_rng(0).uniform(size=(len(labels), 3))
    points1 = points0 if points1 is None else points1
    result = {
        'scene': 'fake',
        'status': 'articulated',
        'part_count': len(part_labels),
        'parts': [{'label': label, 'motion': motion.to_dict()} for label in part_labels],
    }
    (directory / 'result.json').write_text(json.dumps(result), encoding='utf-8')
    write_pointcloud(directory / 'pred_state0.ply', PointCloud(points0, labels=labels))
    write_pointcloud(directory / 'pred_state1.ply', PointCloud(points1, labels=labels))


class TestAnimate:
    def test_intermediate_states(self, workspace, tmp_path):
        out = tmp_path / 'anim'
        assert cli.main(['animate', '--result', str(workspace['run']), '--steps', '4',
                         '--out', str(out)]) == 0
        assert sorted(p.name for p in out.glob('*.ply')) == [f'state_{i:02d}.ply' for i in range(4)]

    def test_single_step_is_failure(self, workspace, tmp_path):
        assert cli.main(['animate', '--result', str(workspace['run']), '--steps', '1',
                         '--out', str(tmp_path / 'a')]) == 3


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
