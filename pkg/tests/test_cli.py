import json
import shutil
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from stgncde import main as cli
from stgncde.config import config_keys
from stgncde.errors import DivergenceError

TOY_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "toy.json"

SMALL = [
    "--set", "synthetic_nodes=3",
    "--set", "synthetic_steps=200",
    "--set", "hidden_h=4",
    "--set", "hidden_z=4",
    "--set", "epochs=2",
    "--set", "batch_size=32",
    "--set", "num_workers=1",
]


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    out = tmp_path_factory.mktemp("train")
    assert cli.main(["train", "--config", str(TOY_CONFIG), *SMALL, "--out", str(out)]) == 0
    return out


def test_train_writes_artifacts(trained):
    for name in ("config.json", "train_log.csv", "checkpoint.json", "checkpoint.bin", "metrics.json"):
        assert (trained / name).is_file(), name
    metrics = json.loads((trained / "metrics.json").read_text())
    assert len(metrics["horizons"]) == 12
    assert set(metrics["overall"]) == {"mae", "rmse", "mape"}
    log = pd.read_csv(trained / "train_log.csv")
    assert list(log.columns) == ["epoch", "train_loss", "val_mae", "val_rmse", "val_mape", "seconds"]


def test_seed_flag_reaches_the_config(tmp_path):
    assert cli.main(["train", "--config", str(TOY_CONFIG), *SMALL, "--set", "epochs=1",
                     "--seed", "7", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "config.json").read_text())["seed"] == 7


def test_repeated_training_logs_are_identical(tmp_path):
    logs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert cli.main(["train", "--config", str(TOY_CONFIG), *SMALL, "--set", "epochs=1", "--out", str(out)]) == 0
        logs.append((out / "train_log.csv").read_bytes())
    assert logs[0] == logs[1]
    assert (pd.read_csv(tmp_path / "a" / "train_log.csv")["seconds"] == 0.0).all()


def test_evaluate(trained, tmp_path):
    assert cli.main(["evaluate", "--checkpoint", str(trained), "--out", str(tmp_path)]) == 0
    evaluated = json.loads((tmp_path / "metrics.json").read_text())
    trained_metrics = json.loads((trained / "metrics.json").read_text())
    assert evaluated["overall"]["mae"] == pytest.approx(trained_metrics["overall"]["mae"], abs=1e-12)
    assert len(pd.read_csv(tmp_path / "horizon_metrics.csv")) == 12


def test_evaluate_uses_the_stored_normalization(trained, tmp_path):
    checkpoint = tmp_path / "checkpoint"
    shutil.copytree(trained, checkpoint)
    manifest = json.loads((checkpoint / "checkpoint.json").read_text())
    manifest["norm_stats"]["mean"] = [m + 5.0 for m in manifest["norm_stats"]["mean"]]
    manifest["norm_stats"]["std"] = [s * 3.0 for s in manifest["norm_stats"]["std"]]
    (checkpoint / "checkpoint.json").write_text(json.dumps(manifest))

    out = tmp_path / "eval"
    assert cli.main(["evaluate", "--checkpoint", str(checkpoint), "--out", str(out)]) == 0
    shifted = json.loads((out / "metrics.json").read_text())["overall"]["mae"]
    original = json.loads((trained / "metrics.json").read_text())["overall"]["mae"]
    assert abs(shifted - original) > 1e-6


def test_predict(trained, tmp_path):
    assert cli.main(["predict", "--checkpoint", str(trained), "--split", "val", "--out", str(tmp_path)]) == 0
    frame = pd.read_csv(tmp_path / "predictions.csv")
    assert list(frame.columns) == ["window", "node", "horizon", "prediction"]
    assert len(frame) == 17 * 3 * 12


def test_export_node_series(trained, tmp_path):
    assert cli.main(["export", "--checkpoint", str(trained), "--nodes", "0,1,2", "--out", str(tmp_path)]) == 0
    horizons = pd.read_csv(tmp_path / "horizon_metrics.csv")
    assert len(horizons) == 12

    frames = [pd.read_csv(tmp_path / f"node_{v}.csv") for v in range(3)]
    assert all(list(f.columns) == ["t", "truth", "prediction"] for f in frames)
    assert all(len(f) == 17 for f in frames)
    assert frames[0]["t"].iloc[0] == 12

    errors = np.concatenate([np.abs(f["truth"] - f["prediction"]).to_numpy() for f in frames])
    assert errors.mean() == pytest.approx(horizons["mae"].iloc[0], abs=1e-9)


def test_export_unknown_node(trained, tmp_path):
    assert cli.main(["export", "--checkpoint", str(trained), "--nodes", "9", "--out", str(tmp_path)]) == 2


def test_mask_eval_trains_each_rate(tmp_path):
    code = cli.main(["mask-eval", "--config", str(TOY_CONFIG), *SMALL, "--set", "epochs=1",
                     "--rates", "0.0,0.5", "--variants", "full", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "mask_eval.csv")
    assert list(table.columns) == ["rate", "variant", "MAE", "RMSE", "MAPE"]
    assert table["rate"].tolist() == [0.0, 0.5]
    assert (tmp_path / "full_p0.5" / "checkpoint.json").is_file()


def test_mask_eval_with_checkpoint(trained, tmp_path):
    code = cli.main(["mask-eval", "--checkpoint", str(trained), "--rates", "0.0,0.3", "--out", str(tmp_path)])
    assert code == 0
    assert len(pd.read_csv(tmp_path / "mask_eval.csv")) == 2


def test_mask_eval_default_table_with_masks(tmp_path):
    code = cli.main(["mask-eval", "--config", str(TOY_CONFIG), *SMALL, "--set", "epochs=1",
                     "--export-masks", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "mask_eval.csv")
    assert len(table) == 9
    assert table["rate"].tolist() == [0.1] * 3 + [0.3] * 3 + [0.5] * 3
    assert table["variant"].tolist() == ["full", "temporal_only", "spatial_only"] * 3
    assert (table[["MAE", "RMSE", "MAPE"]] >= 0).all().all()

    # 17 test windows x 3 nodes x floor(rate * 12) dropped inputs
    for rate, dropped in ((0.1, 1), (0.3, 3), (0.5, 6)):
        masks = pd.read_csv(tmp_path / f"masks_p{rate}.csv")
        assert list(masks.columns) == ["window_index", "node", "time_index"]
        assert len(masks) == 17 * 3 * dropped


def test_mask_eval_checkpoint_exports_masks(trained, tmp_path):
    code = cli.main(["mask-eval", "--checkpoint", str(trained), "--rates", "0.5", "--export-masks",
                     "--out", str(tmp_path)])
    assert code == 0
    assert len(pd.read_csv(tmp_path / "masks_p0.5.csv")) == 17 * 3 * 6


def test_mask_eval_rejects_rates_off_the_grid(tmp_path):
    assert cli.main(["mask-eval", "--config", str(TOY_CONFIG), "--rates", "0.7", "--out", str(tmp_path)]) == 2


def test_sweep(tmp_path):
    code = cli.main(["sweep", "--config", str(TOY_CONFIG), *SMALL, "--set", "epochs=1",
                     "--key", "embed_dim", "--values", "1,3", "--out", str(tmp_path)])
    assert code == 0
    table = pd.read_csv(tmp_path / "sweep_embed_dim.csv")
    assert list(table.columns) == ["embed_dim", "MAE", "RMSE", "MAPE", "best_epoch"]
    assert table["embed_dim"].tolist() == [1, 3]


def test_sweep_rejects_values_off_the_grid(tmp_path):
    code = cli.main(["sweep", "--config", str(TOY_CONFIG), *SMALL, "--key", "num_layers", "--values", "1,4",
                     "--out", str(tmp_path)])
    assert code == 2
    assert not (tmp_path / "sweep_num_layers.csv").exists()


def test_convert(tmp_path):
    archive = tmp_path / "pems.npz"
    np.savez(archive, data=np.random.default_rng(0).uniform(0, 50, size=(40, 3, 3)))
    out = tmp_path / "converted"
    assert cli.main(["convert", "--npz", str(archive), "--name", "PeMSD-mini", "--features", "1",
                     "--out", str(out)]) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert (meta["num_nodes"], meta["num_steps"], meta["num_features"]) == (3, 40, 1)
    assert pd.read_csv(out / "values.csv").shape == (40, 3)


def test_unknown_config_key_exits_with_2(tmp_path):
    assert cli.main(["train", "--config", str(TOY_CONFIG), "--set", "hidden_size=3", "--out", str(tmp_path)]) == 2


def test_missing_data_exits_with_3(tmp_path):
    args = ["train", "--set", "dataset=csv", "--set", f"values_csv={tmp_path / 'values.csv'}",
            "--set", f"meta_json={tmp_path / 'meta.json'}", "--out", str(tmp_path)]
    assert cli.main(args) == 3


def test_divergence_exits_with_4(monkeypatch, tmp_path):
    def diverge(*args, **kwargs):
        raise DivergenceError("Solver state became non-finite at step 3/11")

    monkeypatch.setattr(cli, "_train_once", diverge)
    assert cli.main(["train", "--config", str(TOY_CONFIG), "--out", str(tmp_path)]) == 4


def test_help_lists_every_config_key(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["train", "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    for key in config_keys():
        assert key in out
