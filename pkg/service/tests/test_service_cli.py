from __future__ import annotations

import json

from risksum_service.cli import build_parser, run_command


def write_dataset(path, dataset):
    with path.open("w", encoding="utf-8") as handle:
        for split, rows in (("train", dataset.train), ("val", dataset.val)):
            for row in rows:
                handle.write(
                    json.dumps({"text": row.text, "label": row.label, "split": split})
                    + "\n"
                )


def test_no_subcommand_prints_usage_and_fails(capsys):
    assert run_command([]) == 1
    assert "usage:" in capsys.readouterr().err


def test_serve_defaults_name_public_checkpoints():
    args = build_parser().parse_args(["serve"])
    assert args.risk_model == "bert-base-uncased"
    assert args.port == 8000
    assert args.test_mode is False


def test_serve_maps_none_to_unloaded_capability(monkeypatch):
    captured = {}

    def fake_create_app(config, bundle=None):
        captured["config"] = config
        return object()

    monkeypatch.setattr("risksum_service.app.create_app", fake_create_app)
    monkeypatch.setattr(
        "uvicorn.run", lambda app, host, port: captured.update(host=host, port=port)
    )
    code = run_command(
        [
            "serve",
            "--risk-model", "none",
            "--sentiment-model", "none",
            "--generator-model", "none",
            "--port", "9001",
            "--test-mode",
        ]
    )
    assert code == 0
    config = captured["config"]
    assert config.risk_model is None
    assert config.sentiment_model is None
    assert config.generator_model is None
    assert config.test_mode is True
    assert captured["port"] == 9001


def test_finetune_trains_and_saves(tmp_path, capsys, dataset_factory, tiny_checkpoints):
    data_path = tmp_path / "dataset.jsonl"
    write_dataset(data_path, dataset_factory(n_train=16, n_val=4, seed=0))
    out = tmp_path / "model"
    code = run_command(
        [
            "finetune",
            "--dataset", str(data_path),
            "--out", str(out),
            "--base-model", str(tiny_checkpoints["encoder_base"]),
            "--max-epochs", "1",
        ]
    )
    assert code == 0
    assert (out / "config.json").exists()
    assert (out / "training_metrics.jsonl").exists()
    assert "best epoch" in capsys.readouterr().out


def test_finetune_reports_dataset_errors(tmp_path, capsys, dataset_factory, tiny_checkpoints):
    data_path = tmp_path / "dataset.jsonl"
    write_dataset(data_path, dataset_factory(n_train=4, n_val=2, seed=0))
    code = run_command(
        [
            "finetune",
            "--dataset", str(data_path),
            "--out", str(tmp_path / "model"),
            "--base-model", str(tiny_checkpoints["encoder_base"]),
        ]
    )
    assert code == 1
    assert "dataset too small" in capsys.readouterr().err
