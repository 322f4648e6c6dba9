"""Command-line entry point for meta-transition."""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import yaml

from . import __version__
from .config_manager import ConfigManager, deep_merge
from .data.dataset_io import (
    load_checkpoint,
    metadata_path,
    read_dataset_csv,
    read_metadata,
    read_transition_csv,
    write_dataset_csv,
    write_metadata,
    write_transition_csv,
)
from .data.dataset import TEST, TRAIN
from .errors import (
    DatasetParseError,
    DivergenceError,
    InvalidConfigError,
    InvalidInputError,
    MetaTransitionError,
    ShapeError,
)
from .logging_config import enable_debug_logging
from .metrics.bounds import bound_inputs_for, rademacher_bound
from .metrics.evaluation import accuracy, estimation_error
from .model.classifier import predict
from .noise.transition import NOISE_KINDS, NoiseSpec, check_row_stochastic
from .pipeline.experiment_runner import ExperimentRunner, apply_noise, build_clean_dataset
from .pipeline.results import METHODS, ResultsStore, write_summary
from .pipeline.sweep_processor import SweepManifest, SweepProcessor
from .training.meta_trainer import INIT_SOURCES
from .training.hypergradient import HYPERGRAD_MODES

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {value}")
    return number


def non_negative_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return number


def rate(value: str) -> float:
    number = float(value)
    if not 0.0 <= number <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {value}")
    return number


def setup_argument_parser() -> argparse.ArgumentParser:
    """Setup command line argument parser.

    Returns:
        Configured argument parser
    """
    parser = CliArgumentParser(
        prog="meta-transition",
        description="Learn label-noise transition matrices with a clean meta set",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--config", type=str, default=None,
                        help="Path to configuration file (default: ./config.yml if present)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument("--version", action="version", version=f"meta-transition {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND",
                                       parser_class=CliArgumentParser)
    subparsers.required = True

    generate = subparsers.add_parser("generate", help="Generate a split Gaussian-mixture dataset")
    generate.add_argument("--classes", type=positive_int, help="Number of classes")
    generate.add_argument("--dim", type=positive_int, help="Feature dimension")
    generate.add_argument("--per-class", type=positive_int, help="Samples per class")
    generate.add_argument("--radius", type=float, help="Radius of the class means")
    generate.add_argument("--std", type=float, help="Per-class standard deviation")
    generate.add_argument("--n-train", type=non_negative_int,
                          help="Training rows (default: all rows left after meta and test)")
    generate.add_argument("--n-meta", type=non_negative_int, help="Meta rows")
    generate.add_argument("--n-test", type=non_negative_int, help="Test rows")
    generate.add_argument("--seed", type=int, default=0, help="Random seed")
    generate.add_argument("--out", required=True, help="Output dataset CSV")

    corrupt = subparsers.add_parser("corrupt", help="Corrupt the training labels of a dataset")
    corrupt.add_argument("--data", required=True, help="Clean dataset CSV")
    corrupt.add_argument("--kind", choices=NOISE_KINDS, required=True, help="Noise kind")
    corrupt.add_argument("--rate", type=rate, required=True, help="Noise rate in [0, 1]")
    corrupt.add_argument("--pairs", default=None,
                         help="Pair list like 0:1,2:3 or a preset (cyclic, cifar10)")
    corrupt.add_argument("--seed", type=int, default=0, help="Random seed")
    corrupt.add_argument("--out", required=True, help="Output dataset CSV")

    train = subparsers.add_parser("train", help="Train one method and append a result row")
    train.add_argument("--method", choices=METHODS, required=True, help="Method to run")
    train.add_argument("--data", required=True, help="Dataset CSV (corrupted or clean)")
    train.add_argument("--seed", type=int, default=0, help="Random seed")
    train.add_argument("--truth", default=None,
                       help="Ground-truth transition CSV (default: from dataset metadata)")
    train.add_argument("--out-dir", default=None, help="Directory for run artifacts")
    train.add_argument("--results", default=None, help="Results CSV to append to")
    train.add_argument("--init", choices=INIT_SOURCES, default=None, help="Initial transition")
    train.add_argument("--alpha", type=float, default=None, help="Classifier step size")
    train.add_argument("--beta", type=float, default=None, help="Meta step size (default: alpha)")
    train.add_argument("--iterations", type=non_negative_int, default=None,
                       help="Meta iterations")
    train.add_argument("--batch-size", type=positive_int, default=None, help="Train batch size")
    train.add_argument("--meta-batch-size", type=positive_int, default=None,
                       help="Meta batch size")
    train.add_argument("--mode", choices=HYPERGRAD_MODES, default=None,
                       help="Hypergradient mode")
    train.add_argument("--epochs", type=non_negative_int, default=None,
                       help="Baseline training epochs")
    train.add_argument("--lr", type=float, default=None, help="Baseline learning rate")

    evaluate = subparsers.add_parser("eval", help="Evaluate a checkpoint and transition estimate")
    evaluate.add_argument("--checkpoint", required=True, help="Checkpoint file")
    evaluate.add_argument("--data", required=True, help="Dataset CSV")
    evaluate.add_argument("--estimate", default=None, help="Estimated transition CSV")
    evaluate.add_argument("--truth", default=None,
                          help="Ground-truth transition CSV (default: from dataset metadata)")

    sweep = subparsers.add_parser("sweep", help="Run a grid of methods, noise settings and seeds")
    sweep.add_argument("--manifest", required=True, help="YAML sweep manifest")
    sweep.add_argument("--results", default=None, help="Results CSV (resumed when present)")
    sweep.add_argument("--summary", default=None, help="Write a mean/std summary CSV here")
    sweep.add_argument("--workers", type=positive_int, default=None, help="Parallel workers")
    return parser


def _dump(payload: Dict[str, Any]) -> None:
    yaml.safe_dump(payload, sys.stdout, default_flow_style=False, sort_keys=False)


def _ground_truth(path: Optional[str], data_path: str) -> Optional[np.ndarray]:
    if path:
        return check_row_stochastic(read_transition_csv(path))
    metadata = read_metadata(metadata_path(data_path)) or {}
    matrix = metadata.get('transition_matrix')
    return None if matrix is None else np.asarray(matrix, dtype=np.float64)


def cmd_generate(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    data = config_manager.config['data']
    for key, value in (('classes', args.classes), ('dim', args.dim),
                       ('per_class', args.per_class), ('radius', args.radius),
                       ('std', args.std), ('n_meta', args.n_meta), ('n_test', args.n_test)):
        if value is not None:
            data[key] = value
    if args.n_train is not None:
        data['n_train'] = args.n_train
    elif args.per_class is not None or args.classes is not None:
        data['n_train'] = None
    spec = config_manager.get_mixture_spec()
    counts = config_manager.get_split_counts()
    dataset = build_clean_dataset(spec, counts, args.seed)
    write_dataset_csv(dataset, args.out)
    write_metadata(metadata_path(args.out), {
        'num_classes': dataset.num_classes,
        'seed': args.seed,
        'mixture': spec.to_dict(),
        'split_counts': {
            'train': dataset.count(TRAIN),
            'meta': dataset.count("meta"),
            'test': dataset.count(TEST),
        },
    })
    print(args.out)
    return EXIT_OK


def cmd_corrupt(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    dataset = read_dataset_csv(args.data)
    if dataset.is_corrupted:
        dataset = dataset.with_noisy_labels(None)
    noise = NoiseSpec.from_args(args.kind, args.rate, args.pairs, dataset.num_classes)
    noisy, truth, report = apply_noise(dataset, noise, args.seed)
    write_dataset_csv(noisy, args.out)
    metadata = read_metadata(metadata_path(args.data)) or {'num_classes': dataset.num_classes}
    metadata.update({
        'noise': noise.to_dict(),
        'noise_seed': args.seed,
        'transition_matrix': truth.tolist(),
        'empirical_transition': report.empirical.tolist(),
    })
    write_metadata(metadata_path(args.out), metadata)
    _dump({
        'path': args.out,
        'noise': noise.to_dict(),
        'class_counts': report.class_counts.tolist(),
        'empirical_transition': report.empirical.tolist(),
        'max_entry_error': report.max_entry_error,
    })
    return EXIT_OK


def cmd_train(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    baselines = config_manager.config['baselines']
    if args.epochs is not None:
        baselines['epochs'] = args.epochs
    if args.lr is not None:
        baselines['lr'] = args.lr
    dataset = read_dataset_csv(args.data)
    metadata = read_metadata(metadata_path(args.data)) or {}
    noise = None
    if metadata.get('noise'):
        raw = metadata['noise']
        noise = NoiseSpec(raw['kind'], raw['rate'], tuple(tuple(p) for p in raw.get('pairs', [])))
    truth = _ground_truth(args.truth, args.data)

    runner = ExperimentRunner(config_manager)
    train_config = runner.train_config(
        args.seed, init_source=args.init, alpha=args.alpha, beta=args.beta,
        iterations=args.iterations, batch_size=args.batch_size,
        meta_batch_size=args.meta_batch_size, hypergrad_mode=args.mode)
    out_dir = args.out_dir or os.path.join(config_manager.get_output_dir(),
                                           f"{args.method}_seed{args.seed}")
    outcome = runner.run_method(args.method, dataset, args.seed, noise=noise,
                                ground_truth=truth, train_config=train_config,
                                output_dir=out_dir)
    write_metadata(os.path.join(out_dir, "run.meta.yml"), {
        'method': args.method,
        'seed': args.seed,
        'data': args.data,
        'train_config': train_config.to_dict(),
        'baselines': dict(baselines),
        'model': dict(config_manager.config['model']),
    })
    results_path = args.results or os.path.join(out_dir, "results.csv")
    ResultsStore(results_path).append(outcome.record)
    _dump({'results': results_path, 'record': dict(zip(
        ("method", "noise_kind", "rate", "seed", "test_accuracy",
         "estimation_error", "bound_value", "wall_time_seconds"),
        outcome.record.to_row()))})
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    params = load_checkpoint(args.checkpoint)
    dataset = read_dataset_csv(args.data)
    test_idx = dataset.require_split(TEST, "evaluation")
    payload: Dict[str, Any] = {
        'test_accuracy': accuracy(predict(params, dataset.features[test_idx]),
                                  dataset.clean_labels[test_idx]),
    }
    truth = _ground_truth(args.truth, args.data)
    if args.estimate:
        estimate = read_transition_csv(args.estimate)
        payload['estimation_error'] = (None if truth is None
                                       else estimation_error(truth, estimate))
    evaluation = config_manager.get_evaluation_config()
    train_features = dataset.features[dataset.indices(TRAIN)]
    if train_features.shape[0]:
        payload['bound_value'] = rademacher_bound(bound_inputs_for(
            params, train_features, train_features.shape[0],
            evaluation['delta'], evaluation['eps']))
    _dump(payload)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, config_manager: ConfigManager) -> int:
    with open(args.manifest, 'r', encoding='utf-8') as f:
        try:
            raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InvalidConfigError(f"Error parsing sweep manifest: {e}")
    if isinstance(raw, dict) and raw.get('config'):
        config_manager.config = deep_merge(config_manager.config, raw['config'])
    if args.workers is not None:
        config_manager.config['sweep']['workers'] = args.workers
    num_classes = int(config_manager.config['data']['classes'])
    if isinstance(raw, dict) and raw.get('dataset'):
        num_classes = read_dataset_csv(raw['dataset']).num_classes
    manifest = SweepManifest.from_dict(raw, num_classes)
    results_path = args.results or os.path.join(config_manager.get_output_dir(), "results.csv")
    processor = SweepProcessor(config_manager, results_path)
    report = processor.run(manifest)
    if args.summary:
        write_summary(processor.store.read(), args.summary)
        logger.info("Summary written to %s", args.summary)
    print(results_path)
    return EXIT_RUNTIME if report['summary']['failed'] else EXIT_OK


COMMANDS = {
    'generate': cmd_generate,
    'corrupt': cmd_corrupt,
    'train': cmd_train,
    'eval': cmd_eval,
    'sweep': cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run meta-transition.

    Returns:
        Exit code: 0 success, 1 usage or configuration error, 2 runtime
        failure or divergence, 3 IO error
    """
    try:
        parser = setup_argument_parser()
        args = parser.parse_args(argv)
        config_manager = ConfigManager(args.config)
        if args.verbose:
            enable_debug_logging()
        logger.debug("Running command %s", args.command)
        return COMMANDS[args.command](args, config_manager)

    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return EXIT_RUNTIME

    except DivergenceError as e:
        logger.error("Training diverged: %s", e)
        return EXIT_RUNTIME

    except OSError as e:
        logger.error("IO error: %s", e)
        return EXIT_IO

    except (InvalidConfigError, InvalidInputError, ShapeError, DatasetParseError,
            yaml.YAMLError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE

    except MetaTransitionError as e:
        logger.error("Error: %s", e)
        return EXIT_RUNTIME

    except Exception as e:
        logger.error("Fatal error: %s", e, exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
