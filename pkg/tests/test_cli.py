"""Command-line workflows, exit codes, and byte-stable outputs."""

import yaml
from click.testing import CliRunner

from lmaudit.cli import main

SIM_DOC = {
    "seed": 77,
    "n": 300,
    "baseline": -3.0,
    "noise_sigma": 0.4,
    "factors": [
        {
            "taxonomy": {"name": "gender", "levels": ["female", "male"]},
            "probabilities": [0.6, 0.4],
            "effects": [0.0, 0.1],
        },
        {
            "taxonomy": {"name": "age", "levels": ["young", "old"], "ordinal": True},
            "probabilities": [0.75, 0.25],
            "effects": [0.0, 0.5],
        },
    ],
    "covariates": [
        {"name": "headpose_dev", "kind": "folded_normal", "params": [0.3], "coefficient": 0.8}
    ],
}

AUDIT_DOC = {
    "dataset": {
        "input": "dataset.csv",
        "factors": [
            {"name": "gender", "levels": ["female", "male"]},
            {"name": "age", "levels": ["young", "old"], "ordinal": True},
        ],
        "covariates": ["headpose_dev"],
    },
    "models": [
        {"name": "demographic", "terms": ["gender", "age"]},
        {"name": "full", "terms": ["gender", "age", "headpose_dev"]},
    ],
    "emmeans": {"factors": ["gender", "age"]},
    "output": {"directory": "out", "formats": ["plain", "delimited"]},
}


def _write(path, doc):
    path.write_text(yaml.safe_dump(doc), encoding="utf-8")


def _simulate(runner, tmp_path, **extra):
    sim = tmp_path / "sim.yaml"
    _write(sim, {**SIM_DOC, **extra})
    result = runner.invoke(main, ["simulate", "--config", str(sim), "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    return tmp_path / "dataset.csv"


def test_version():
    result = CliRunner().invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "lmaudit" in result.output


def test_simulate_writes_dataset_and_truth(tmp_path):
    runner = CliRunner()
    data = _simulate(runner, tmp_path)
    assert data.exists()
    truth = yaml.safe_load((tmp_path / "truth.yaml").read_text(encoding="utf-8"))
    assert truth["seed"] == 77
    assert truth["factor_effects"]["age"]["old"] == 0.5
    header = data.read_text(encoding="utf-8").splitlines()[0]
    assert header == "sample_id,gender,age,headpose_dev,nme"


def test_simulate_overrides_and_determinism(tmp_path):
    runner = CliRunner()
    a = tmp_path / "a"
    b = tmp_path / "b"
    c = tmp_path / "c"
    for out in (a, b, c):
        out.mkdir()
    sim = tmp_path / "sim.yaml"
    _write(sim, SIM_DOC)
    base = ["simulate", "--config", str(sim)]
    assert runner.invoke(main, base + ["--out", str(a)]).exit_code == 0
    assert runner.invoke(main, base + ["--out", str(b)]).exit_code == 0
    assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()
    assert runner.invoke(main, base + ["--out", str(c), "--seed", "5", "--n", "10"]).exit_code == 0
    lines = (c / "dataset.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 11
    assert yaml.safe_load((c / "truth.yaml").read_text(encoding="utf-8"))["seed"] == 5


def test_audit_end_to_end(tmp_path):
    runner = CliRunner()
    data = _simulate(runner, tmp_path)
    cfg = tmp_path / "audit.yaml"
    doc = dict(AUDIT_DOC)
    doc["dataset"] = {**AUDIT_DOC["dataset"], "input": str(data)}
    doc["output"] = {"directory": str(tmp_path / "out"), "formats": ["plain", "delimited"]}
    _write(cfg, doc)

    result = runner.invoke(main, ["audit", "--config", str(cfg)])
    assert result.exit_code == 0, result.output
    assert "rows in 300 = kept 300 + filtered 0 + errored 0" in result.output
    out = tmp_path / "out"
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "anova.csv", "correlations.csv", "emmeans.csv",
        "models.csv", "provenance.csv", "report.txt",
    ]
    text = (out / "report.txt").read_text(encoding="utf-8")
    assert "model full" in text
    assert "marginal means: age" in text


def test_audit_flag_overrides(tmp_path):
    runner = CliRunner()
    data = _simulate(runner, tmp_path)
    cfg = tmp_path / "audit.yaml"
    _write(cfg, AUDIT_DOC)  # dataset.input points at a nonexistent relative path

    out = tmp_path / "md"
    result = runner.invoke(
        main,
        [
            "audit", "--config", str(cfg), "--input", str(data),
            "--out", str(out), "--format", "markdown", "--alpha", "0.01",
        ],
    )
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in out.iterdir()) == ["report.md"]
    assert "alpha 0.01" in (out / "report.md").read_text(encoding="utf-8")


def test_audit_runs_are_byte_identical(tmp_path):
    runner = CliRunner()
    data = _simulate(runner, tmp_path)
    cfg = tmp_path / "audit.yaml"
    doc = dict(AUDIT_DOC)
    doc["dataset"] = {**AUDIT_DOC["dataset"], "input": str(data)}
    _write(cfg, doc)
    contents = []
    for sub in ("one", "two"):
        out = tmp_path / sub
        result = runner.invoke(main, ["audit", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        contents.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert contents[0] == contents[1]


def test_exit_codes(tmp_path):
    runner = CliRunner()
    # 2: unreadable config
    result = runner.invoke(main, ["audit", "--config", str(tmp_path / "none.yaml")])
    assert result.exit_code == 2
    assert "error:" in result.output

    # 3: data problem (unknown factor level in the dataset)
    data = tmp_path / "dataset.csv"
    data.write_text(
        "sample_id,gender,age,headpose_dev,nme\n"
        "a,female,young,0.1,0.05\n"
        "b,alien,old,0.2,0.06\n",
        encoding="utf-8",
    )
    cfg = tmp_path / "audit.yaml"
    doc = dict(AUDIT_DOC)
    doc["dataset"] = {**AUDIT_DOC["dataset"], "input": str(data)}
    _write(cfg, doc)
    result = runner.invoke(main, ["audit", "--config", str(cfg)])
    assert result.exit_code == 3
    assert "outside taxonomy" in result.output

    # 4: numeric failure (constant covariate column is rank deficient)
    rows = ["sample_id,gender,age,headpose_dev,nme"]
    for i in range(40):
        gender = "female" if i % 2 else "male"
        age = "young" if i % 4 < 2 else "old"
        rows.append(f"s{i},{gender},{age},0.25,{0.04 + 0.001 * (i % 7)}")
    data.write_text("\n".join(rows) + "\n", encoding="utf-8")
    result = runner.invoke(main, ["audit", "--config", str(cfg)])
    assert result.exit_code == 4
    assert "rank deficient" in result.output


def test_metrics_stdout(tmp_path):
    data = tmp_path / "lm.csv"
    data.write_text(
        "sample_id,bbox_height_px,gt_x0,gt_y0,gt_x1,gt_y1,pred_x0,pred_y0,pred_x1,pred_y1\n"
        "a,100,0,0,10,0,3,4,10,0\n"
        "b,200,0,0,10,0,3,4,10,0\n",
        encoding="utf-8",
    )
    result = CliRunner().invoke(main, ["metrics", "--input", str(data)])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "sample_id,nme"
    assert lines[1] == "a,0.025"
    assert lines[2] == "b,0.0125"


def test_metrics_with_pose_columns(tmp_path):
    data = tmp_path / "lm.csv"
    data.write_text(
        "sample_id,bbox_height_px,pitch_deg,yaw_deg,roll_deg,"
        "gt_x0,gt_y0,pred_x0,pred_y0\n"
        "a,100,0,0,0,0,0,3,4\n",
        encoding="utf-8",
    )
    out = tmp_path / "metrics.csv"
    result = CliRunner().invoke(
        main, ["metrics", "--input", str(data), "--output", str(out)]
    )
    assert result.exit_code == 0, result.output
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "sample_id,nme,headpose_dev"
    assert lines[1] == "a,0.05,0.0"


def test_metrics_errors(tmp_path):
    data = tmp_path / "lm.csv"
    data.write_text("sample_id,bbox_height_px\na,100\n", encoding="utf-8")
    result = CliRunner().invoke(main, ["metrics", "--input", str(data)])
    assert result.exit_code == 3
    data.write_text(
        "sample_id,bbox_height_px,gt_x0,gt_y0,pred_x0,pred_y0\n", encoding="utf-8"
    )
    result = CliRunner().invoke(main, ["metrics", "--input", str(data)])
    assert result.exit_code == 3
    assert "no data rows" in result.output


def test_ensemble_majority_and_merge(tmp_path):
    data = tmp_path / "votes.csv"
    data.write_text(
        "sample_id,gender_1,gender_2,gender_3,age_1,age_2,age_3,race_1\n"
        "a,Male,Female,Male,20-29,30-39,20-29,East Asian\n"
        "b,Female,Female,Male,3-9,10-19,70+,White\n",
        encoding="utf-8",
    )
    result = CliRunner().invoke(main, ["ensemble", "--input", str(data)])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "sample_id,gender,race,age_fine,age"
    assert lines[1] == "a,Male,East Asian,20-29,20-39"
    assert lines[2] == "b,Female,White,10-19,3-19"


def test_ensemble_input_validation(tmp_path):
    data = tmp_path / "votes.csv"
    data.write_text("sample_id,gender_1\na,Male\n", encoding="utf-8")
    result = CliRunner().invoke(main, ["ensemble", "--input", str(data)])
    assert result.exit_code == 3
    assert "missing columns" in result.output

    ok = tmp_path / "ok.csv"
    ok.write_text(
        "sample_id,gender_1,gender_2,gender_3,age_1,age_2,age_3,race_1\n"
        "a,Male,Male,Male,20-29,20-29,20-29,White\n",
        encoding="utf-8",
    )
    result = CliRunner().invoke(
        main, ["ensemble", "--input", str(ok), "--age-taxonomy", "nope"]
    )
    assert result.exit_code == 3
    assert "unknown taxonomy preset" in result.output
