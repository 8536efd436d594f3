"""End-to-end tests of the ``detgeom`` command line."""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.decoding.config import DecoderConfig  # noqa: E402
from src.main import EXIT_BAD_INPUT, EXIT_OK, main  # noqa: E402

CONFIG_DIR = Path(__file__).parent.parent / "experiments" / "config"

ANNOTATION = """<annotation>
  <object><name>Person</name>
    <bndbox><xmin>0</xmin><ymin>0</ymin><xmax>10</xmax><ymax>20</ymax></bndbox>
  </object>
  <object><name>Person</name>
    <bndbox><xc>25</xc><yc>10</yc><w>10</w><h>20</h></bndbox>
  </object>
</annotation>"""


def _write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


@pytest.fixture
def dataset(tmp_path):
    gt_dir = tmp_path / "gt"
    gt_dir.mkdir()
    (gt_dir / "frame1.xml").write_text(ANNOTATION, encoding="utf-8")
    return gt_dir


def test_eval_perfect_detections(dataset, tmp_path, capsys):
    dets = _write_jsonl(tmp_path / "dets.jsonl", [
        {"image_id": "frame1", "score": 0.9, "class": "Person", "box": [0, 0, 10, 20]},
        {"image_id": "frame1", "score": 0.8, "class": "Person", "box": [20, 0, 30, 20]},
    ])
    pr_out = tmp_path / "out" / "pr.csv"
    report_out = tmp_path / "out" / "report.json"
    code = main(["eval", str(dataset), str(dets), "--pr-out", str(pr_out), "--report-out", str(report_out)])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "TP: 2" in out
    assert "AP: 100.00" in out
    assert pr_out.read_text().splitlines()[0] == "score,precision,recall"
    assert json.loads(report_out.read_text())["ap"] == pytest.approx(1.0)


def test_eval_missing_and_malformed_inputs(dataset, tmp_path, capsys):
    assert main(["eval", str(dataset), str(tmp_path / "missing.jsonl")]) == EXIT_BAD_INPUT
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"image_id": "frame1"}\n', encoding="utf-8")
    assert main(["eval", str(dataset), str(bad)]) == EXIT_BAD_INPUT
    assert "bad.jsonl:1" in capsys.readouterr().err
    good = _write_jsonl(tmp_path / "good.jsonl", [{"image_id": "frame1", "score": 0.5, "box": [0, 0, 1, 1]}])
    assert main(["eval", str(dataset), str(good), "--iou-thresh", "1.5"]) == EXIT_BAD_INPUT


def test_nms_keeps_pedestrian_pair_under_diou(tmp_path, capsys):
    dets = _write_jsonl(tmp_path / "dets.jsonl", [
        {"image_id": "a", "score": 0.9, "class": "Person", "box": [0, 0, 10, 20]},
        {"image_id": "a", "score": 0.8, "class": "Person", "box": [6, 0, 16, 20]},
    ])
    assert main(["nms", str(dets), "--thresh", "0.2", "--metric", "iou"]) == EXIT_OK
    assert len(capsys.readouterr().out.splitlines()) == 1
    assert main(["nms", str(dets), "--thresh", "0.2", "--metric", "diou"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert [json.loads(line)["score"] for line in lines] == [0.9, 0.8]


def test_nms_oversized_number_is_bad_input(tmp_path, capsys):
    huge = tmp_path / "huge.jsonl"
    huge.write_text('{"image_id": "a", "score": 0.5, "box": [0, 0, 1' + "0" * 400 + ', 1]}\n', encoding="utf-8")
    assert main(["nms", str(huge)]) == EXIT_BAD_INPUT
    assert "huge.jsonl:1" in capsys.readouterr().err


def test_nms_empty_file(tmp_path, capsys):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    assert main(["nms", str(empty)]) == EXIT_OK
    assert capsys.readouterr().out == ""


def _zero_tensors(tmp_path, config_path):
    config = DecoderConfig.from_yaml(config_path)
    paths = []
    for spec in config.grid_specs():
        path = tmp_path / f"head_{spec.grid_size}.bin"
        np.zeros(spec.expected_length, dtype="<f4").tofile(path)
        paths.append(str(path))
    return paths


def test_decode_zero_tensors(tmp_path, capsys):
    config = CONFIG_DIR / "yolov3_decoder.yaml"
    paths = _zero_tensors(tmp_path, config)
    assert main(["decode", *paths, "--config", str(config), "--conf", "0"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 10647
    assert json.loads(lines[0])["score"] == pytest.approx(0.25)

    assert main(["decode", *paths, "--config", str(config), "--conf", "0.5"]) == EXIT_OK
    assert capsys.readouterr().out == ""


def test_decode_rejects_wrong_length_tensor(tmp_path, capsys):
    config = CONFIG_DIR / "cvc_decoder.yaml"
    paths = _zero_tensors(tmp_path, config)
    np.zeros(5, dtype="<f4").tofile(paths[1])
    assert main(["decode", *paths, "--config", str(config)]) == EXIT_BAD_INPUT
    assert Path(paths[1]).name in capsys.readouterr().err


def test_gradcheck(capsys):
    assert main(["gradcheck", "--samples", "0"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[-1] == "PASS"
    assert main(["gradcheck", "--samples", "50"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("samples: 50\n")
    assert main(["gradcheck", "--eps", "0"]) == EXIT_BAD_INPUT


def test_sim_small_run_is_deterministic(tmp_path, capsys):
    curves = tmp_path / "curves.csv"
    cases = tmp_path / "cases.csv"
    argv = ["sim", "--cases", "5", "--seed", "1", "--curves-out", str(curves), "--cases-out", str(cases)]
    assert main(argv) == EXIT_OK
    first = capsys.readouterr().out
    assert main(argv) == EXIT_OK
    assert capsys.readouterr().out == first
    assert first.startswith("cases: 5\n")
    assert curves.read_text().splitlines()[0] == "step,loss_iou,loss_diou"
    assert len(cases.read_text().splitlines()) == 6


def test_sim_zero_cases_and_config_file(capsys):
    assert main(["sim", "--cases", "0"]) == EXIT_OK
    assert "n/a" in capsys.readouterr().out
    config = CONFIG_DIR / "convergence_disjoint.yaml"
    assert main(["sim", "--config", str(config), "--cases", "3"]) == EXIT_OK
    assert "disjoint/iou: cases=3 success_rate=0.0000" in capsys.readouterr().out
    assert main(["sim", "--cases", "1", "--lr", "-1"]) == EXIT_BAD_INPUT


def test_usage_errors_exit_with_bad_input(capsys):
    for argv in (["eval"], ["nms", "x", "--metric", "soft"], ["frobnicate"], []):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == EXIT_BAD_INPUT


def test_version(capsys):
    assert main(["--version"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("commit:") and " config:" in out


def test_eval_plot_output(dataset, tmp_path):
    dets = _write_jsonl(tmp_path / "dets.jsonl", [
        {"image_id": "frame1", "score": 0.9, "box": [0, 0, 10, 20]},
        {"image_id": "frame1", "score": 0.4, "box": [40, 40, 50, 50]},
    ])
    plot = tmp_path / "plots" / "pr.png"
    assert main(["eval", str(dataset), str(dets), "--plot-out", str(plot)]) == EXIT_OK
    assert plot.stat().st_size > 0
