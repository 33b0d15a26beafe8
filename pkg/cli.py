"""
Command-line surface of the reconstruction pipeline.
명령줄 인터페이스

    gen      --preset NAME --out DIR [--seed S --noise σ]
    init     --scene DIR --out DIR
    run      --scene DIR --out DIR [--config FILE]
    eval     --result DIR --truth DIR
    report   --runs DIR... [--ablation]
    animate  --result DIR --steps K --out DIR [--scene DIR]

Exit codes: 0 success, 2 usage or configuration error, 3 pipeline failure.
"""
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence
import argparse
import logging
import sys

from config import LOG_LEVEL, load_config
from errors import ConfigError, OptimizationError, PresetNotFoundError, SceneSpecError
from evaluation import evaluate, format_table, metrics_text, report_table
from fields import write_proposals_json
from proposals import initialize_proposals, write_init_json
from reconstruction_pipeline import METRICS_FILE, read_run, run_scene, write_animation, write_json, write_run
from scenes import generate, list_presets, preset, read_scene, write_scene


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3

DIAGNOSTIC_FILE = 'diagnostic.json'


# ============================================================================
# COMMANDS
# ============================================================================

def cmd_gen(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    spec = preset(args.preset)
    changes = {'seed': args.seed if args.seed is not None else config.scene.seed}
    if args.noise is not None:
        changes['noise_sigma'] = args.noise
    if args.views is not None:
        changes['views'] = args.views
    spec = replace(spec, **changes)
    render_config = replace(config.render, resolution=args.resolution or config.render.resolution)

    truth = generate(spec, render_config, config.scene.camera_distance_factor)
    write_scene(args.out, truth, extra={
        'preset': args.preset,
        'seed': spec.seed,
        'noise_sigma': spec.noise_sigma,
        'resolution': render_config.resolution,
    })
    print(f"{truth.name}: {len(truth.state0)} points, {truth.movable_count} movable parts -> {args.out}")
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    truth = read_scene(args.scene)
    result = initialize_proposals(truth.state0, truth.state1, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_init_json(out / 'proposals_init.json', result)
    write_proposals_json(out / 'proposals.json', result.proposals)
    print(f"{len(result.proposals)} proposals over {len(result.movable)} movable points -> {out}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    out = Path(args.out)
    try:
        result = run_scene(args.scene, config)
    except OptimizationError as error:
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / DIAGNOSTIC_FILE, {'error': str(error), **error.diagnostics})
        raise
    write_run(out, result)
    print(f"{result.scene}: {result.status}, {result.part_count} parts after "
          f"{result.iterations} iterations -> {out}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    run = read_run(args.result)
    truth = read_scene(args.truth)
    report = evaluate(run.motions, run.pred_state1, truth, n=args.samples, seed=args.seed)
    document = report.to_dict()
    write_json(Path(args.out) if args.out else run.directory / METRICS_FILE, document)
    print(metrics_text(run.name, document))
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rows = []
    for directory in args.runs:
        run = read_run(directory)
        if run.metrics is None:
            logger.warning("%s has no %s; run eval first", directory, METRICS_FILE)
            continue
        rows.append((run.name, run.metrics, run.config.ablation))
    if not rows:
        logger.error("No evaluated runs among %d directories", len(args.runs))
        return EXIT_FAILURE

    table = report_table(rows, ablation=args.ablation)
    print(format_table(table))
    if args.csv:
        table.to_csv(args.csv, index=False)
    return EXIT_OK


def cmd_animate(args: argparse.Namespace) -> int:
    run = read_run(args.result)
    truth = read_scene(args.scene) if args.scene else None
    written = write_animation(run, args.out, args.steps, truth)
    print(f"{len(written)} point clouds -> {args.out}")
    return EXIT_OK


# ============================================================================
# PARSER
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='partmotion',
        description="Articulated object reconstruction from two point-cloud states",
    )
    parser.add_argument('--log-level', default=LOG_LEVEL,
                        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'],
                        help="logging level (default: $PARTMOTION_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help="generate a synthetic scene from a preset")
    gen.add_argument('--preset', required=True, help=f"one of: {', '.join(list_presets())}")
    gen.add_argument('--out', required=True, help="scene directory")
    gen.add_argument('--seed', type=int, default=None)
    gen.add_argument('--noise', type=float, default=None, help="Gaussian point noise σ")
    gen.add_argument('--views', type=int, default=None, help="reference views per state")
    gen.add_argument('--resolution', type=int, default=None, help="reference view resolution")
    gen.add_argument('--config', default=None, help="TOML config file")
    gen.set_defaults(handler=cmd_gen)

    init = sub.add_parser('init', help="run proposal initialization only")
    init.add_argument('--scene', required=True)
    init.add_argument('--out', required=True)
    init.add_argument('--config', default=None)
    init.set_defaults(handler=cmd_init)

    run = sub.add_parser('run', help="run the full pipeline on a scene")
    run.add_argument('--scene', required=True)
    run.add_argument('--out', required=True, help="run directory")
    run.add_argument('--config', default=None)
    run.add_argument('--seed', type=int, default=None)
    run.set_defaults(handler=cmd_run)

    ev = sub.add_parser('eval', help="score a run against its scene")
    ev.add_argument('--result', required=True, help="run directory")
    ev.add_argument('--truth', required=True, help="scene directory")
    ev.add_argument('--out', default=None, help="metrics JSON path (default: RESULT/metrics.json)")
    ev.add_argument('--samples', type=int, default=10000, help="Chamfer points per side")
    ev.add_argument('--seed', type=int, default=0, help="Chamfer sampling seed")
    ev.set_defaults(handler=cmd_eval)

    report = sub.add_parser('report', help="aggregate table over evaluated runs")
    report.add_argument('--runs', nargs='+', required=True)
    report.add_argument('--ablation', action='store_true', help="add ablation switch columns")
    report.add_argument('--csv', default=None, help="also write the table as CSV")
    report.set_defaults(handler=cmd_report)

    animate = sub.add_parser('animate', help="write intermediate states of a run")
    animate.add_argument('--result', required=True)
    animate.add_argument('--out', required=True)
    animate.add_argument('--steps', type=int, default=5)
    animate.add_argument('--scene', default=None, help="also articulate the ground truth")
    animate.set_defaults(handler=cmd_animate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and run one command.

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return EXIT_USAGE if exit_.code else EXIT_OK

    logging.basicConfig(
        level=getattr(logging, args.log_level, logging.INFO),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return args.handler(args)
    except (ConfigError, PresetNotFoundError, SceneSpecError) as error:
        logger.error("%s", error)
        return EXIT_USAGE
    except OptimizationError as error:
        logger.error("Optimization failed: %s", error)
        return EXIT_FAILURE
    except (OSError, ValueError, KeyError) as error:
        logger.error("%s failed: %s", args.command, error)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
