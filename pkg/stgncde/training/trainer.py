import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..autodiff import Tensor
from ..config import RunConfig
from ..data import Metrics, WindowBatch, WindowDataset, compute_metrics, denorm, per_horizon_metrics, zscore
from ..errors import DivergenceError
from ..models import BaseForecaster, ModelDims, create_model
from ..solver import SolverConfig
from ..utils.csv_export import write_training_log
from ..utils.logger import logger
from .batch_pool import GradientPool
from .checkpoint import Checkpoint, save_checkpoint
from .early_stopping import EarlyStopping
from .loss import l1_loss
from .optimizer import Adam

SHUFFLE_STREAM = 101


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_mae: float
    val_rmse: float
    val_mape: float
    seconds: float


@dataclass
class Evaluation:
    overall: Metrics
    horizons: List[Metrics]
    predictions: np.ndarray = field(repr=False)
    targets: np.ndarray = field(repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall": self.overall.to_dict(),
            "horizons": [dict(horizon=h + 1, **m.to_dict()) for h, m in enumerate(self.horizons)],
        }


@dataclass
class TrainResult:
    best_epoch: int
    best_val_mae: float
    history: List[EpochLog]
    test: Evaluation
    stopped_early: bool = False
    checkpoint_dir: Optional[Path] = None


def build_model(config: RunConfig, num_nodes: int, input_dim: int) -> BaseForecaster:
    dims = ModelDims.from_config(config, num_nodes, input_dim)
    solver = SolverConfig(config.solver, config.steps_per_unit)
    return create_model(config.variant, dims, solver, seed=config.seed)


def predict(model: BaseForecaster, dataset: WindowDataset, batch_size: int = 64,
            normalized_output: bool = False) -> np.ndarray:
    """Forecasts for every window of `dataset` in original units, shape (W, V, S, M)"""
    outputs = [model(batch.paths).data for batch in dataset.batches(batch_size)]
    predictions = np.concatenate(outputs, axis=0)
    if normalized_output:
        predictions = denorm(dataset.norm_stats.channels(predictions.shape[-1]), predictions)
    return predictions


def evaluate(model: BaseForecaster, dataset: WindowDataset, batch_size: int = 64,
             normalized_output: bool = False) -> Evaluation:
    predictions = predict(model, dataset, batch_size, normalized_output)
    return Evaluation(
        overall=compute_metrics(predictions, dataset.targets),
        horizons=per_horizon_metrics(predictions, dataset.targets),
        predictions=predictions,
        targets=dataset.targets,
    )


class Trainer:
    """Mini-batch training with validation-based early stopping"""

    def __init__(self, model: BaseForecaster, datasets: Dict[str, WindowDataset], config: RunConfig,
                 output_dir: Optional[Path] = None, log_name: str = "train_log.csv"):
        self.model = model
        self.datasets = datasets
        self.config = config
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.log_name = log_name
        self.normalized_output = not config.loss_in_original_units
        self.optimizer = Adam(
            model.params.parameters(),
            lr=config.lr,
            weight_decay=config.weight_decay,
            decoupled_weight_decay=config.decoupled_weight_decay,
            grad_clip=config.grad_clip,
        )
        self.progress_callback: Optional[Callable[[Dict[str, Any]], None]] = None

    def set_progress_callback(self, callback: Callable[[Dict[str, Any]], None]):
        """Set progress callback for per-epoch updates"""
        self.progress_callback = callback

    def emit_progress(self, progress_data: Dict[str, Any]):
        """Emit progress update if callback is set"""
        if self.progress_callback:
            self.progress_callback(progress_data)

    def _chunk_loss(self, batch: WindowBatch, total: int) -> Tensor:
        targets = batch.targets
        if self.normalized_output:
            targets = zscore(batch.norm_stats.channels(targets.shape[-1]), targets)
        return l1_loss(self.model(batch.paths), targets, denominator=total)

    def train_epoch(self, epoch: int, pool: GradientPool, rng: np.random.Generator) -> float:
        weighted = 0.0
        entries = 0
        for step, batch in enumerate(self.datasets["train"].batches(self.config.batch_size, rng), start=1):
            try:
                loss, grads = pool.run(batch, self._chunk_loss)
            except DivergenceError as e:
                raise DivergenceError(f"Epoch {epoch}, batch {step}: {e}") from e
            if not math.isfinite(loss):
                raise DivergenceError(f"Non-finite training loss at epoch {epoch}, batch {step}")

            self.optimizer.step(grads)
            weighted += loss * batch.targets.size
            entries += batch.targets.size
            logger.debug(f"epoch {epoch} batch {step}: loss {loss:.6f}, grad norm {self.optimizer.last_grad_norm:.4g}")
        return weighted / max(entries, 1)

    def _save_best(self, epoch: int, best_val_mae: float):
        if self.output_dir is None:
            return
        save_checkpoint(self.output_dir, Checkpoint(
            params=self.model.params,
            norm_stats=self.datasets["train"].norm_stats,
            epoch=epoch,
            best_val_mae=best_val_mae,
            config=self.config.to_dict(),
        ))

    def fit(self) -> TrainResult:
        config = self.config
        rng = np.random.default_rng([config.seed, SHUFFLE_STREAM])
        stopper = EarlyStopping(config.patience)
        history: List[EpochLog] = []
        best_state = self.model.params.state_dict()
        log_path = self.output_dir / self.log_name if self.output_dir is not None else None

        logger.info(
            f"Training {config.variant} model ({self.model.params.num_parameters()} parameters) "
            f"on {len(self.datasets['train'])} windows for up to {config.epochs} epochs"
        )
        with GradientPool(self.model.params.parameters(), config.num_workers) as pool:
            for epoch in range(1, config.epochs + 1):
                started = time.perf_counter()
                train_loss = self.train_epoch(epoch, pool, rng)
                val = evaluate(self.model, self.datasets["val"], config.batch_size, self.normalized_output)
                seconds = time.perf_counter() - started if config.log_wall_time else 0.0

                improved = stopper.update(epoch, val.overall.mae)
                if improved:
                    best_state = self.model.params.state_dict()
                    self._save_best(epoch, stopper.best)

                history.append(EpochLog(epoch, train_loss, val.overall.mae, val.overall.rmse, val.overall.mape, seconds))
                if log_path is not None:
                    write_training_log([asdict(row) for row in history], log_path)

                logger.info(
                    f"Epoch {epoch}: train loss {train_loss:.4f}, val MAE {val.overall.mae:.4f}, "
                    f"RMSE {val.overall.rmse:.4f}, MAPE {val.overall.mape:.2f}%"
                    + (" (best)" if improved else "")
                )
                self.emit_progress({
                    "status": "epoch",
                    "epoch": epoch,
                    "train_loss": train_loss,
                    "val_mae": val.overall.mae,
                    "best_epoch": stopper.best_epoch,
                    "improved": improved,
                })

                if stopper.should_stop:
                    logger.info(f"Early stopping at epoch {epoch}; best epoch {stopper.best_epoch}")
                    break

        self.model.params.load_state_dict(best_state)
        test = evaluate(self.model, self.datasets["test"], config.batch_size, self.normalized_output)
        logger.info(
            f"Test (best epoch {stopper.best_epoch}): MAE {test.overall.mae:.4f}, "
            f"RMSE {test.overall.rmse:.4f}, MAPE {test.overall.mape:.2f}%"
        )
        self.emit_progress({"status": "completed", "best_epoch": stopper.best_epoch, "test_mae": test.overall.mae})

        return TrainResult(
            best_epoch=stopper.best_epoch,
            best_val_mae=stopper.best,
            history=history,
            test=test,
            stopped_early=stopper.should_stop,
            checkpoint_dir=self.output_dir,
        )


def train_loop(model: BaseForecaster, datasets: Dict[str, WindowDataset], config: RunConfig,
               output_dir: Optional[Path] = None, log_name: str = "train_log.csv",
               progress_callback: Optional[Callable[[Dict[str, Any]], None]] = None) -> TrainResult:
    trainer = Trainer(model, datasets, config, output_dir, log_name)
    if progress_callback is not None:
        trainer.set_progress_callback(progress_callback)
    return trainer.fit()
