import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ..errors import DataError, ParseError
from ..utils.logger import logger

VALUE_TYPES = ("volume", "velocity")


@dataclass(frozen=True)
class DatasetMeta:
    name: str
    num_nodes: int
    num_steps: int
    num_features: int = 1
    interval_minutes: int = 5
    value_type: str = "volume"

    def __post_init__(self):
        if self.num_nodes < 1:
            raise DataError(f"Dataset {self.name}: num_nodes must be positive, got {self.num_nodes}")
        if self.num_steps < 1:
            raise DataError(f"Dataset {self.name}: num_steps must be positive, got {self.num_steps}")
        if self.num_features < 1:
            raise DataError(f"Dataset {self.name}: num_features must be positive, got {self.num_features}")
        if self.value_type not in VALUE_TYPES:
            raise DataError(f"Dataset {self.name}: value_type must be one of {VALUE_TYPES}, got {self.value_type!r}")

    @property
    def trainable(self) -> bool:
        """Long enough for at least one 12-in/12-out window"""
        return self.num_steps > 24

    @property
    def num_columns(self) -> int:
        return self.num_nodes * self.num_features

    def column_names(self):
        """Node-major header: node0_f0, node0_f1, ..., node1_f0, ..."""
        return [f"node{v}_f{d}" for v in range(self.num_nodes) for d in range(self.num_features)]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_json(cls, path: Path) -> "DatasetMeta":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"Meta file not found: {path}")
        try:
            with open(path, "r") as f:
                raw = json.load(f)
        except json.JSONDecodeError as e:
            raise DataError(f"Meta file {path} is not valid JSON: {e}")

        missing = [key for key in ("name", "num_nodes", "num_steps", "num_features") if key not in raw]
        if missing:
            raise DataError(f"Meta file {path} is missing {missing}")
        try:
            return cls(
                name=str(raw["name"]),
                num_nodes=int(raw["num_nodes"]),
                num_steps=int(raw["num_steps"]),
                num_features=int(raw["num_features"]),
                interval_minutes=int(raw.get("interval_minutes", 5)),
                value_type=str(raw.get("value_type", "volume")),
            )
        except (TypeError, ValueError) as e:
            raise DataError(f"Meta file {path} has invalid values: {e}")

    def save(self, path: Path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)


def _read_values(path: Path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=np.float64, float_precision="round_trip")
    except ValueError:
        pass

    # Slow path only to report where the bad cell is
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    for column in raw.columns:
        numeric = pd.to_numeric(raw[column], errors="coerce")
        bad = numeric.isna()
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            raise ParseError(line=row + 2, column=column, value=raw[column].iloc[row])
    return raw.astype(np.float64)


def load_dataset(values_csv: Path, meta_json: Path) -> Tuple[DatasetMeta, np.ndarray]:
    """Read a values CSV and its meta JSON into a (num_steps, V, D) float64 array"""
    meta = DatasetMeta.from_json(meta_json)
    values_csv = Path(values_csv)
    if not values_csv.is_file():
        raise DataError(f"Values file not found: {values_csv}")

    try:
        frame = _read_values(values_csv)
    except pd.errors.EmptyDataError:
        raise DataError(f"Values file {values_csv} is empty")
    except pd.errors.ParserError as e:
        raise DataError(f"Values file {values_csv} could not be parsed: {e}")

    if frame.shape[1] != meta.num_columns:
        raise DataError(
            f"{values_csv}: expected {meta.num_columns} columns "
            f"({meta.num_nodes} nodes x {meta.num_features} features), found {frame.shape[1]}"
        )
    if frame.shape[0] != meta.num_steps:
        raise DataError(f"{values_csv}: expected {meta.num_steps} rows, found {frame.shape[0]}")
    if list(frame.columns) != meta.column_names():
        logger.warning(f"{values_csv}: header does not follow node-major naming; using column order as is")

    series = frame.to_numpy(dtype=np.float64).reshape(meta.num_steps, meta.num_nodes, meta.num_features)
    if not np.all(np.isfinite(series)):
        raise DataError(f"{values_csv}: contains non-finite values")
    logger.info(f"Loaded {meta.name}: {meta.num_steps} steps, {meta.num_nodes} nodes, {meta.num_features} features")
    return meta, series


def save_dataset(meta: DatasetMeta, series: np.ndarray, out_dir: Path) -> Tuple[Path, Path]:
    """Write the values CSV + meta JSON pair"""
    series = np.asarray(series, dtype=np.float64)
    expected = (meta.num_steps, meta.num_nodes, meta.num_features)
    if series.shape != expected:
        raise DataError(f"Series shape {series.shape} does not match meta {expected}")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    values_path = out_dir / "values.csv"
    meta_path = out_dir / "meta.json"

    frame = pd.DataFrame(series.reshape(meta.num_steps, meta.num_columns), columns=meta.column_names())
    frame.to_csv(values_path, index=False, float_format="%.17g")
    meta.save(meta_path)
    return values_path, meta_path


def generate_synthetic(num_nodes: int = 5, num_steps: int = 2000, noise: float = 0.05,
                       seed: int = 0) -> Tuple[DatasetMeta, np.ndarray]:
    """Ring of sensors: x_v(t) = sin(2pi(t+10v)/288) + 0.3 sin(2pi t/36) + N(0, noise^2)"""
    rng = np.random.default_rng(seed)
    t = np.arange(num_steps, dtype=np.float64)[:, None]
    v = np.arange(num_nodes, dtype=np.float64)[None, :]
    signal = np.sin(2.0 * np.pi * (t + 10.0 * v) / 288.0) + 0.3 * np.sin(2.0 * np.pi * t / 36.0)
    series = signal + rng.normal(0.0, noise, size=signal.shape)

    meta = DatasetMeta(name="synthetic-ring", num_nodes=num_nodes, num_steps=num_steps,
                       num_features=1, value_type="volume")
    return meta, series[:, :, None]


def convert_npz(npz_path: Path, out_dir: Path, name: str, value_type: str = "volume",
                features: Optional[int] = None) -> Tuple[Path, Path]:
    """Convert a PeMS .npz archive (array `data`, steps x nodes x features) to CSV + meta JSON"""
    npz_path = Path(npz_path)
    if not npz_path.is_file():
        raise DataError(f"Archive not found: {npz_path}")
    with np.load(npz_path) as archive:
        if "data" not in archive:
            raise DataError(f"{npz_path} has no 'data' array (found {list(archive.keys())})")
        data = np.asarray(archive["data"], dtype=np.float64)

    if data.ndim == 2:
        data = data[:, :, None]
    if data.ndim != 3:
        raise DataError(f"{npz_path}: expected steps x nodes x features, got shape {data.shape}")
    if features is not None:
        if features < 1 or features > data.shape[2]:
            raise DataError(f"Cannot keep {features} features from an archive with {data.shape[2]}")
        data = data[:, :, :features]

    meta = DatasetMeta(name=name, num_nodes=data.shape[1], num_steps=data.shape[0],
                       num_features=data.shape[2], value_type=value_type)
    paths = save_dataset(meta, data, out_dir)
    logger.info(f"Converted {npz_path} to {paths[0]} ({meta.num_steps} steps, {meta.num_nodes} nodes)")
    return paths
