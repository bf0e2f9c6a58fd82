"""Command-line entry point: stgncde <command> --config <path> [--set k=v]... [--seed n] [--out dir]"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import RunConfig, build_config, config_defaults, load_config, save_config, settings
from .data import (
    DatasetMeta,
    NormStats,
    WindowDataset,
    convert_npz,
    export_masks,
    generate_synthetic,
    load_dataset,
    prepare_datasets,
)
from .errors import ConfigError, StgncdeError
from .models import model_from_params
from .presets import LR_GRID, MASK_RATE_GRID, SWEEP_GRIDS, WEIGHT_DECAY_GRID
from .solver import SolverConfig
from .training import Checkpoint, build_model, evaluate, load_checkpoint, predict, train_loop
from .utils.csv_export import write_horizon_metrics, write_node_series, write_predictions, write_table
from .utils.logger import logger

SPLITS = ("train", "val", "test")
DEFAULT_MASK_RATES = "0.1,0.3,0.5"
DEFAULT_MASK_VARIANTS = "full,temporal_only,spatial_only"


def _progress_logger(data: Dict[str, Any]):
    logger.debug(f"Progress: {data}")


def _config_epilog() -> str:
    lines = ["config keys (JSON file or --set key=value), with defaults:"]
    for key, value in config_defaults().items():
        lines.append(f"  {key} = {json.dumps(value)}")
    lines.append(f"grids: lr in {list(LR_GRID)}, weight_decay in {list(WEIGHT_DECAY_GRID)}")
    lines.append("exit codes: 0 success, 2 config error, 3 data error, 4 numerical divergence")
    return "\n".join(lines)


def _resolve_config(args: argparse.Namespace, base: Optional[Dict[str, Any]] = None) -> RunConfig:
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(f"seed={args.seed}")
    if args.config is None and base is not None:
        config = build_config(base, overrides)
    else:
        config = load_config(args.config, overrides)

    if config.allow_off_grid and (config.lr not in LR_GRID or config.weight_decay not in WEIGHT_DECAY_GRID):
        logger.warning(f"Running off the hyperparameter grid: lr={config.lr}, weight_decay={config.weight_decay}")
    return config


def _out_dir(args: argparse.Namespace, command: str) -> Path:
    out = Path(args.out) if args.out else settings.OUTPUT_DIR / command
    out.mkdir(parents=True, exist_ok=True)
    return out


def load_series(config: RunConfig) -> Tuple[DatasetMeta, np.ndarray]:
    if config.dataset == "synthetic":
        return generate_synthetic(config.synthetic_nodes, config.synthetic_steps, config.synthetic_noise, config.seed)
    return load_dataset(Path(config.values_csv), Path(config.meta_json))


def _prepare(config: RunConfig, missing_rate: Optional[float] = None,
             norm_stats: Optional[NormStats] = None) -> Tuple[DatasetMeta, Dict[str, WindowDataset]]:
    meta, series = load_series(config)
    return meta, prepare_datasets(series, config, missing_rate, norm_stats)


def _write_json(path: Path, data: Dict[str, Any]):
    with open(path, "w") as f:
        json.dump(data, f, indent=2)


def _load_for_inference(args: argparse.Namespace) -> Tuple[RunConfig, Checkpoint, Dict[str, WindowDataset]]:
    """Checkpoint, resolved config and datasets normalized with the checkpoint's statistics"""
    checkpoint_dir = Path(args.checkpoint) if args.checkpoint else settings.OUTPUT_DIR / "train"
    checkpoint = load_checkpoint(checkpoint_dir)
    config = _resolve_config(args, checkpoint.config)
    meta, series = load_series(config)
    dims = checkpoint.params.dims
    if meta.num_nodes != dims.num_nodes or meta.num_features != dims.input_dim:
        raise ConfigError(
            f"Checkpoint was trained on {dims.num_nodes} nodes x {dims.input_dim} features, "
            f"dataset has {meta.num_nodes} x {meta.num_features}"
        )
    return config, checkpoint, prepare_datasets(series, config, norm_stats=checkpoint.norm_stats)


def _normalized_output(checkpoint: Checkpoint) -> bool:
    return not checkpoint.config.get("loss_in_original_units", True)


def _fit(config: RunConfig, meta: DatasetMeta, datasets: Dict[str, WindowDataset], out_dir: Path,
         log_name: str = "train_log.csv"):
    model = build_model(config, meta.num_nodes, meta.num_features)
    return train_loop(model, datasets, config, out_dir, log_name, _progress_logger)


def _train_once(config: RunConfig, out_dir: Path, log_name: str = "train_log.csv",
                missing_rate: Optional[float] = None):
    meta, datasets = _prepare(config, missing_rate)
    return _fit(config, meta, datasets, out_dir, log_name)


def cmd_train(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out_dir = _out_dir(args, "train")
    save_config(config, out_dir / "config.json")
    logger.info(f"Starting training run in {out_dir}")

    result = _train_once(config, out_dir)
    _write_json(out_dir / "metrics.json", {
        "split": "test",
        "best_epoch": result.best_epoch,
        "best_val_mae": result.best_val_mae,
        **result.test.to_dict(),
    })
    logger.info(f"Training finished; checkpoint, log and metrics written to {out_dir}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config, checkpoint, datasets = _load_for_inference(args)
    model = model_from_params(checkpoint.params, SolverConfig(config.solver, config.steps_per_unit))
    evaluation = evaluate(model, datasets[args.split], config.batch_size, _normalized_output(checkpoint))

    out_dir = _out_dir(args, "evaluate")
    _write_json(out_dir / "metrics.json", {"split": args.split, "epoch": checkpoint.epoch, **evaluation.to_dict()})
    write_horizon_metrics(evaluation.horizons, out_dir / "horizon_metrics.csv")
    overall = evaluation.overall
    logger.info(f"{args.split}: MAE {overall.mae:.4f}, RMSE {overall.rmse:.4f}, MAPE {overall.mape:.2f}%")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    config, checkpoint, datasets = _load_for_inference(args)
    model = model_from_params(checkpoint.params, SolverConfig(config.solver, config.steps_per_unit))
    predictions = predict(model, datasets[args.split], config.batch_size, _normalized_output(checkpoint))

    path = write_predictions(predictions, _out_dir(args, "predict") / "predictions.csv")
    logger.info(f"Wrote {predictions.shape[0]} windows of {args.split} predictions to {path}")
    return 0


def _parse_list(raw: str, name: str) -> List[str]:
    items = [item.strip() for item in raw.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"--{name} needs at least one value")
    return items


def _parse_rates(raw: str) -> List[float]:
    rates = []
    for item in _parse_list(raw, "rates"):
        try:
            rate = float(item)
        except ValueError:
            raise ConfigError(f"Missing rate {item!r} is not a number")
        if not any(abs(rate - g) < 1e-12 for g in MASK_RATE_GRID):
            raise ConfigError(f"Missing rate {rate} is not on the grid {list(MASK_RATE_GRID)}")
        rates.append(rate)
    return rates


def _export_rate_masks(datasets: Dict[str, WindowDataset], out_dir: Path, rate: float):
    path = export_masks(datasets["test"].masks, out_dir / f"masks_p{rate:.1f}.csv")
    logger.info(f"Wrote test-split masks for rate {rate} to {path}")


def cmd_mask_eval(args: argparse.Namespace) -> int:
    rates = _parse_rates(args.rates)
    out_dir = _out_dir(args, "mask-eval")
    rows = []

    if args.checkpoint:
        config, checkpoint, _ = _load_for_inference(args)
        model = model_from_params(checkpoint.params, SolverConfig(config.solver, config.steps_per_unit))
        for rate in rates:
            _, datasets = _prepare(config, missing_rate=rate, norm_stats=checkpoint.norm_stats)
            if args.export_masks:
                _export_rate_masks(datasets, out_dir, rate)
            overall = evaluate(model, datasets["test"], config.batch_size, _normalized_output(checkpoint)).overall
            rows.append({"rate": rate, "variant": config.variant, "MAE": overall.mae,
                         "RMSE": overall.rmse, "MAPE": overall.mape})
            logger.info(f"rate {rate}: MAE {overall.mae:.4f}")
    else:
        base = _resolve_config(args)
        variants = _parse_list(args.variants, "variants")
        for rate in rates:
            # One set of masks per rate, shared by every variant
            meta, datasets = _prepare(base, missing_rate=rate)
            if args.export_masks:
                _export_rate_masks(datasets, out_dir, rate)
            for variant in variants:
                config = base.with_overrides(variant=variant, missing_rate=rate)
                run_dir = out_dir / f"{config.variant}_p{rate:.1f}"
                logger.info(f"Training {config.variant} at missing rate {rate}")
                overall = _fit(config, meta, datasets, run_dir).test.overall
                rows.append({"rate": rate, "variant": config.variant, "MAE": overall.mae,
                             "RMSE": overall.rmse, "MAPE": overall.mape})

    path = write_table(rows, out_dir / "mask_eval.csv")
    logger.info(f"Wrote {len(rows)} rows to {path}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    config, checkpoint, datasets = _load_for_inference(args)
    model = model_from_params(checkpoint.params, SolverConfig(config.solver, config.steps_per_unit))
    dataset = datasets[args.split]

    num_nodes = dataset.num_nodes
    try:
        nodes = [int(n) for n in _parse_list(args.nodes, "nodes")]
    except ValueError:
        raise ConfigError(f"--nodes must be a comma-separated list of integers, got {args.nodes!r}")
    bad = [n for n in nodes if not 0 <= n < num_nodes]
    if bad:
        raise ConfigError(f"Unknown node id(s) {bad}; valid ids are 0..{num_nodes - 1}")
    if not 1 <= args.horizon_step <= config.horizon:
        raise ConfigError(f"--horizon-step must lie in 1..{config.horizon}, got {args.horizon_step}")

    evaluation = evaluate(model, dataset, config.batch_size, _normalized_output(checkpoint))
    out_dir = _out_dir(args, "export")
    for node in nodes:
        write_node_series(evaluation.predictions, evaluation.targets, node, out_dir / f"node_{node}.csv",
                          horizon_step=args.horizon_step, input_len=config.input_len)
    write_horizon_metrics(evaluation.horizons, out_dir / "horizon_metrics.csv")
    logger.info(f"Exported {len(nodes)} node series and horizon metrics to {out_dir}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _resolve_config(args)
    if args.key not in base.to_dict():
        raise ConfigError(f"Unknown sweep key {args.key!r}")

    configs = [build_config(base.to_dict(), [f"{args.key}={raw}"]) for raw in _parse_list(args.values, "values")]
    grid = SWEEP_GRIDS.get(args.key)
    if grid is not None and not base.allow_off_grid:
        off_grid = [getattr(c, args.key) for c in configs if getattr(c, args.key) not in grid]
        if off_grid:
            raise ConfigError(f"Sweep values {off_grid} for {args.key} are not on the grid {list(grid)}")

    out_dir = _out_dir(args, "sweep")
    rows = []
    for config in configs:
        value = getattr(config, args.key)
        logger.info(f"Sweep {args.key}={value}")
        result = _train_once(config, out_dir / f"{args.key}_{value}")
        overall = result.test.overall
        rows.append({args.key: value, "MAE": overall.mae, "RMSE": overall.rmse,
                     "MAPE": overall.mape, "best_epoch": result.best_epoch})
    path = write_table(rows, out_dir / f"sweep_{args.key}.csv", [args.key, "MAE", "RMSE", "MAPE", "best_epoch"])
    logger.info(f"Wrote sweep results to {path}")
    return 0


def cmd_convert(args: argparse.Namespace) -> int:
    out_dir = Path(args.out) if args.out else settings.OUTPUT_DIR / "data" / args.name.lower()
    convert_npz(Path(args.npz), out_dir, args.name, args.value_type, args.features)
    return 0


COMMANDS = {
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "predict": cmd_predict,
    "mask-eval": cmd_mask_eval,
    "export": cmd_export,
    "sweep": cmd_sweep,
    "convert": cmd_convert,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Spatio-temporal graph neural CDE forecasting",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, epilog=_config_epilog(),
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", type=Path, default=None, help="JSON run configuration")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        return p

    run_command("train", "train a model and write checkpoint, log and metrics")

    for name, help_text in (("evaluate", "evaluate a checkpoint"), ("predict", "write per-window predictions")):
        p = run_command(name, help_text)
        p.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory")
        p.add_argument("--split", choices=SPLITS, default="test")

    p = run_command("mask-eval", "irregular-observation study over missing rates")
    p.add_argument("--rates", default=DEFAULT_MASK_RATES, help=f"comma-separated rates from {list(MASK_RATE_GRID)}")
    p.add_argument("--variants", default=DEFAULT_MASK_VARIANTS, help="comma-separated model variants")
    p.add_argument("--checkpoint", type=Path, default=None, help="evaluate this checkpoint instead of training")
    p.add_argument("--export-masks", action="store_true",
                   help="write masks_p<rate>.csv listing the dropped test-split inputs")

    p = run_command("export", "per-node prediction series and per-horizon errors")
    p.add_argument("--checkpoint", type=Path, default=None, help="checkpoint directory")
    p.add_argument("--split", choices=SPLITS, default="test")
    p.add_argument("--nodes", default="0", help="comma-separated node ids")
    p.add_argument("--horizon-step", type=int, default=1, help="forecast step exported per node (1-based)")

    p = run_command("sweep", "train one model per value of a config key")
    p.add_argument("--key", required=True, help="config key to vary, e.g. embed_dim")
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("convert", help="convert a PeMS .npz archive to values CSV + meta JSON")
    p.add_argument("--npz", type=Path, required=True)
    p.add_argument("--name", required=True, help="dataset name, e.g. PeMSD4")
    p.add_argument("--value-type", choices=("volume", "velocity"), default="volume")
    p.add_argument("--features", type=int, default=None, help="keep only the first k features")
    p.add_argument("--out", type=Path, default=None, help="output directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except StgncdeError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
