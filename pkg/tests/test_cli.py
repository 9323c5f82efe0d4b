import numpy as np
import pytest

from rakeness.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from rakeness.experiments import RESULT_HEADER, SUMMARY_HEADER
from rakeness.io import read_keyvalue, read_matrix, read_spectrum, read_table

ECG_CFG = """\
# tiny ecg run
experiment = ecg
n_train = 12
n_test = 3
n_trials = 2
M_list = 16, 32, 48
r_list = 0.038, 0.001
solver = omp
sweep_trials = 2
"""

IMAGE_CFG = """\
experiment = image
n_train = 40
n_test = 2
n_trials = 1
M_list = 96
r_list = 0.047
solver = omp
"""


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(*args):
    return main(list(args) + ["--workers", "1"])


@pytest.fixture(scope="module")
def ecg_out(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("ecg")
    cfg = write_cfg(tmp, ECG_CFG)
    out = str(tmp / "out")
    assert run("design", "--config", cfg, "--out", out) == EXIT_OK
    assert run("run", "--config", cfg, "--out", out) == EXIT_OK
    assert run("summarize", "--out", out) == EXIT_OK
    return tmp, cfg, out


def test_design_artifacts(ecg_out):
    _, _, out = ecg_out
    meta = read_keyvalue(f"{out}/design.meta")
    assert meta["status.r0.038"] == "ok"
    assert meta["status.r0.001"].startswith("infeasible")
    assert len(meta["config_hash"]) == 16 and meta["master_seed"] == "0"
    sd = read_spectrum(f"{out}/design_r0.038.csv")
    assert sd.df * sd.values.sum() == pytest.approx(1.0, abs=1e-8)
    assert read_spectrum(f"{out}/signal_psd.csv").n_half == sd.n_half


def test_run_rows_and_schema(ecg_out):
    _, _, out = ecg_out
    header, rows = read_table(f"{out}/results.csv")
    assert tuple(header) == RESULT_HEADER
    # infeasible r is skipped: 3 M values x (iid + one r) x 2 trials
    assert len(rows) == 3 * 2 * 2
    assert [int(r[6]) for r in rows] == list(range(12))
    assert {r[1] for r in rows} == {"iid", "rakeness"}
    assert all(r[2] == "" for r in rows if r[1] == "iid")
    raw = open(f"{out}/results.csv", "rb").read()
    assert b"\r" not in raw


def test_rerun_is_byte_identical(ecg_out, tmp_path):
    _, cfg, out = ecg_out
    out2 = str(tmp_path / "again")
    assert run("design", "--config", cfg, "--out", out2) == EXIT_OK
    assert run("run", "--config", cfg, "--out", out2) == EXIT_OK
    for name in ("results.csv", "design_r0.038.csv", "design.meta", "results.meta"):
        assert open(f"{out}/{name}", "rb").read() == open(f"{out2}/{name}", "rb").read()


def test_summary(ecg_out):
    _, _, out = ecg_out
    header, rows = read_table(f"{out}/summary.csv")
    assert tuple(header) == SUMMARY_HEADER
    assert len(rows) == 6
    svg = open(f"{out}/plot.svg").read()
    assert svg.startswith("<svg") and svg.count("<polyline") == 2


def test_summarize_constant_inputs(tmp_path):
    lines = [",".join(RESULT_HEADER)]
    row = 0
    for M in (32, 64):
        for method, r in (("iid", ""), ("rakeness", "0.038")):
            for t in range(3):
                lines.append(f"ecg,{method},{r},{M},{t},12.5,{row}")
                row += 1
    (tmp_path / "results.csv").write_text("\n".join(lines) + "\n")
    assert run("summarize", "--out", str(tmp_path)) == EXIT_OK
    _, rows = read_table(tmp_path / "summary.csv")
    assert all(float(r[7]) == 0.0 for r in rows)
    svg = (tmp_path / "plot.svg").read_text()
    import re

    bars = re.findall(r'<line x1="[\d.]+" y1="([\d.]+)" x2="[\d.]+" y2="([\d.]+)" stroke="#[0-9a-f]{6}"/>', svg)
    assert len(bars) == 4 and all(a == b for a, b in bars)


def test_sweep(ecg_out, tmp_path):
    _, cfg, _ = ecg_out
    assert run("sweep-r", "--config", cfg, "--out", str(tmp_path)) == EXIT_OK
    header, rows = read_table(tmp_path / "sweep.csv")
    assert [float(r[0]) for r in rows] == [0.001, 0.038]
    assert read_keyvalue(tmp_path / "sweep.meta")["best_r"] == "0.038"


def test_image_flow(tmp_path):
    cfg = write_cfg(tmp_path, IMAGE_CFG)
    out = str(tmp_path / "img")
    assert run("design", "--config", cfg, "--out", out) == EXIT_OK
    meta = read_keyvalue(f"{out}/design.meta")
    assert all(1 <= int(meta[f"J.r0.047.sub{k}"]) <= 36 for k in (5, 6, 9, 10))
    B = read_matrix(f"{out}/design_r0.047_sub5.csv")
    assert B.shape == (36, 36) and np.trace(B) == pytest.approx(1.0)
    assert run("run", "--config", cfg, "--out", out) == EXIT_OK
    _, rows = read_table(f"{out}/results.csv")
    assert len(rows) == 2


def test_generators(tmp_path):
    assert main(["gen-ecg", "--config", write_cfg(tmp_path, ECG_CFG), "--out", str(tmp_path)]) == EXIT_OK
    assert read_matrix(tmp_path / "ecg_train.csv").shape == (12, 256)
    assert main(["gen-images", "--config", write_cfg(tmp_path, IMAGE_CFG, "i.cfg"), "--out", str(tmp_path)]) == EXIT_OK
    header, rows = read_table(tmp_path / "images_test.csv")
    assert len(header) == 577 and header[-1] == "label" and len(rows) == 2


def test_selftest(capsys):
    assert main(["selftest"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("[PASS]") == 4 and "[FAIL]" not in out


def test_exit_codes(tmp_path):
    assert main(["design"]) == EXIT_CONFIG
    assert main(["nonsense"]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert main(["selftest", "--seed", "-1"]) == EXIT_CONFIG
    assert main(["selftest", "--workers", "0"]) == EXIT_CONFIG
    bad = write_cfg(tmp_path, "experiment = ecg\nn_trials = 0\n", "bad.cfg")
    assert run("design", "--config", bad, "--out", str(tmp_path)) == EXIT_CONFIG
    infeasible = write_cfg(tmp_path, ECG_CFG.replace("0.038, 0.001", "0.001"), "inf.cfg")
    assert run("design", "--config", infeasible, "--out", str(tmp_path / "inf")) == EXIT_INFEASIBLE
    # run before design names the missing step
    assert run("run", "--config", write_cfg(tmp_path, ECG_CFG), "--out", str(tmp_path / "empty")) == EXIT_CONFIG
    assert main(["summarize", "--out", str(tmp_path / "nowhere")]) == EXIT_CONFIG


def test_missing_design_message(tmp_path, capsys):
    run("run", "--config", write_cfg(tmp_path, ECG_CFG), "--out", str(tmp_path))
    assert "rakeness design --config" in capsys.readouterr().err


def test_seed_override_changes_results(ecg_out, tmp_path):
    _, cfg, out = ecg_out
    out2 = str(tmp_path / "s")
    assert run("design", "--config", cfg, "--out", out2, "--seed", "5") == EXIT_OK
    assert run("run", "--config", cfg, "--out", out2, "--seed", "5") == EXIT_OK
    assert read_keyvalue(f"{out2}/results.meta")["master_seed"] == "5"
    assert open(f"{out}/results.csv").read() != open(f"{out2}/results.csv").read()
