from .batch_pool import ChunkStatus, GradientPool
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .early_stopping import EarlyStopping
from .loss import l1_loss
from .optimizer import Adam, AdamState, adam_step, clip_grad_norm
from .trainer import (
    EpochLog,
    Evaluation,
    Trainer,
    TrainResult,
    build_model,
    evaluate,
    predict,
    train_loop,
)

__all__ = [
    'ChunkStatus', 'GradientPool', 'Checkpoint', 'load_checkpoint', 'save_checkpoint', 'EarlyStopping',
    'l1_loss', 'Adam', 'AdamState', 'adam_step', 'clip_grad_norm', 'EpochLog', 'Evaluation', 'Trainer',
    'TrainResult', 'build_model', 'evaluate', 'predict', 'train_loop',
]
