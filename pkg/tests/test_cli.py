"""Command-line behavior: exit codes, file outputs, determinism, --json."""

import json

import numpy as np
import pytest

from qipf.cli import main
from qipf.tableio import read_csv, read_series_csv, read_signal_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_regression_recipe(tmp_path, name="reg.cfg"):
    path = tmp_path / name
    path.write_text(
        "[experiment]\npipeline = regression-uq\n\n"
        "[data]\nkind = xsinx\nn = 30\nlo = -5\nhi = 5\nseed = 0\n"
        "test_n = 20\ntest_lo = -8\ntest_hi = 8\ntest_seed = 1\n"
        "normalize = true\n\n"
        "[model]\nhidden = 8\nseed = 0\n\n"
        "[train]\nepochs = 30\nlr = 0.01\nseed = 0\n\n"
        "[uq]\nmodes = 3\n\n"
        "[mc]\npasses = 5\nrate = 0.2\nseed = 0\n")
    return path


def test_no_command_is_usage_error(capsys):
    code, _, _ = run(capsys)
    assert code == 2


def test_generate_sine_and_lorenz(tmp_path, capsys):
    out = tmp_path / "sig.csv"
    code, stdout, _ = run(capsys, "generate", "sine", "--freqs", "50",
                          "--fs", "600", "--n", "400", "-o", str(out))
    assert code == 0
    assert "wrote 400 rows" in stdout
    assert read_signal_csv(out).shape == (400,)
    code, _, _ = run(capsys, "generate", "lorenz", "--n", "200",
                     "-o", str(tmp_path / "lor.csv"))
    assert code == 0
    assert read_signal_csv(tmp_path / "lor.csv").shape == (200,)


def test_generate_labeled_series(tmp_path, capsys):
    out = tmp_path / "xy.csv"
    code, _, _ = run(capsys, "generate", "xsinx", "--n", "25", "--lo", "-5",
                     "--hi", "5", "-o", str(out))
    assert code == 0
    ds = read_series_csv(out)
    assert ds.inputs.shape == (25, 1)
    code, _, _ = run(capsys, "generate", "blobs", "--n-per-class", "10",
                     "-o", str(tmp_path / "b.csv"))
    assert code == 0
    assert read_series_csv(tmp_path / "b.csv").inputs.shape == (30, 2)
    code, _, _ = run(capsys, "generate", "twosine",
                     "-o", str(tmp_path / "t.csv"))
    assert code == 0
    assert read_series_csv(tmp_path / "t.csv").inputs.shape == (50, 1)


def test_generate_missing_flags_exit_2(tmp_path, capsys):
    code, _, stderr = run(capsys, "generate", "sine", "-o",
                          str(tmp_path / "x.csv"))
    assert code == 2
    assert "--freqs" in stderr and "--fs" in stderr


def test_json_error_payload(tmp_path, capsys):
    code, _, stderr = run(capsys, "--json", "generate", "sine", "-o",
                          str(tmp_path / "x.csv"))
    assert code == 2
    payload = json.loads(stderr.strip())
    assert payload["error"] == "UsageError"
    assert "--freqs" in payload["message"]


def test_generate_runtime_failure_exit_1(tmp_path, capsys):
    # Nyquist violation comes from the generator, not argument parsing
    code, _, stderr = run(capsys, "generate", "sine", "--freqs", "50",
                          "--fs", "60", "--n", "100",
                          "-o", str(tmp_path / "x.csv"))
    assert code == 1
    assert "Nyquist" in stderr


def test_decompose_grid_outputs_and_determinism(tmp_path, capsys):
    sig = tmp_path / "sig.csv"
    run(capsys, "generate", "sine", "--freqs", "50", "--fs", "600",
        "--n", "400", "-o", str(sig))
    out = tmp_path / "modes.csv"
    code, stdout, _ = run(capsys, "decompose", str(sig), "--sigma", "0.8",
                          "--modes", "3", "--grid=-3:3:0.5",
                          "-o", str(out))
    assert code == 0
    assert "decomposed 13 points into 3 modes" in stdout
    header, data = read_csv(out)
    assert header == ["x1", "mode1", "mode2", "mode3", "ipf"]
    assert data.shape == (13, 5)
    assert (tmp_path / "modes.json").exists()
    first = out.read_bytes()
    run(capsys, "decompose", str(sig), "--sigma", "0.8", "--modes", "3",
        "--grid=-3:3:0.5", "-o", str(out))
    assert out.read_bytes() == first


def test_decompose_timeseries_and_plot(tmp_path, capsys):
    sig = tmp_path / "sig.csv"
    run(capsys, "generate", "sine", "--freqs", "50", "--fs", "600",
        "--n", "300", "-o", str(sig))
    out = tmp_path / "ts"
    svg = tmp_path / "ts.svg"
    code, stdout, _ = run(capsys, "decompose", str(sig), "--sigma", "1.0",
                          "--modes", "4", "--timeseries", "--warmup", "50",
                          "-o", str(out), "--plot", str(svg))
    assert code == 0
    assert "decomposed 250 points into 4 modes" in stdout
    assert (tmp_path / "ts.csv").exists()
    assert (tmp_path / "ts.json").exists()
    assert svg.read_text().startswith("<svg")


def test_decompose_mode_selection_errors(tmp_path, capsys):
    sig = tmp_path / "sig.csv"
    run(capsys, "generate", "sine", "--freqs", "50", "--fs", "600",
        "--n", "300", "-o", str(sig))
    code, _, stderr = run(capsys, "decompose", str(sig), "--sigma", "1.0",
                          "--modes", "3", "-o", str(tmp_path / "o.csv"))
    assert code == 2
    assert "exactly one of" in stderr
    code, _, _ = run(capsys, "decompose", str(sig), "--sigma", "1.0",
                     "--modes", "3", "--grid=-1:1:0.5", "--timeseries",
                     "-o", str(tmp_path / "o.csv"))
    assert code == 2
    code, _, stderr = run(capsys, "decompose", str(sig), "--sigma", "1.0",
                          "--modes", "3", "--grid", "nonsense",
                          "-o", str(tmp_path / "o.csv"))
    assert code == 1
    code, _, stderr = run(capsys, "decompose", str(tmp_path / "nofile.csv"),
                          "--sigma", "1.0", "--modes", "3", "--grid=-1:1:0.5",
                          "-o", str(tmp_path / "o.csv"))
    assert code == 1


def test_train_then_uq_stages(tmp_path, capsys):
    recipe = write_regression_recipe(tmp_path)
    out_dir = tmp_path / "run"
    code, _, stderr = run(capsys, "uq", str(recipe), "--out-dir",
                          str(out_dir))
    assert code == 1
    assert "train stage first" in stderr
    code, stdout, _ = run(capsys, "train", str(recipe), "--out-dir",
                          str(out_dir))
    assert code == 0
    assert "trained model written" in stdout
    assert (out_dir / "model.json").exists()
    code, stdout, _ = run(capsys, "uq", str(recipe), "--out-dir",
                          str(out_dir))
    assert code == 0
    assert (out_dir / "qipf_report.jsonl").exists()
    assert (out_dir / "mc_report.jsonl").exists()


def test_evaluate_regression_recipe(tmp_path, capsys):
    recipe = write_regression_recipe(tmp_path)
    out_dir = tmp_path / "run"
    code, stdout, _ = run(capsys, "evaluate", str(recipe), "--out-dir",
                          str(out_dir))
    assert code == 0
    assert "qipf pearson" in stdout
    assert (out_dir / "summary.csv").exists()
    assert (out_dir / "uncertainty.svg").exists()


def test_evaluate_missing_recipe_exit_1(tmp_path, capsys):
    code, _, stderr = run(capsys, "evaluate", str(tmp_path / "none.cfg"))
    assert code == 1


def test_plot_variants(tmp_path, capsys):
    recipe = write_regression_recipe(tmp_path)
    out_dir = tmp_path / "run"
    run(capsys, "evaluate", str(recipe), "--out-dir", str(out_dir))
    for src, name in ((out_dir / "qipf_report.jsonl", "r.svg"),
                      (out_dir / "loss.csv", "l.svg")):
        code, _, _ = run(capsys, "plot", str(src), "-o",
                         str(tmp_path / name))
        assert code == 0
        assert (tmp_path / name).read_text().startswith("<svg")
    sig = tmp_path / "sig.csv"
    run(capsys, "generate", "sine", "--freqs", "50", "--fs", "600",
        "--n", "300", "-o", str(sig))
    run(capsys, "decompose", str(sig), "--sigma", "0.8", "--modes", "3",
        "--grid=-2:2:0.5", "-o", str(tmp_path / "m.csv"))
    for src in ("m.csv", "m.json"):
        code, _, _ = run(capsys, "plot", str(tmp_path / src), "-o",
                         str(tmp_path / f"{src}.svg"))
        assert code == 0


def test_plot_rejects_unusable_tables(tmp_path, capsys):
    path = tmp_path / "one.csv"
    path.write_text("a,b\n1.0,2.0\n")
    code, _, stderr = run(capsys, "plot", str(path), "-o",
                          str(tmp_path / "x.svg"))
    assert code == 1
    assert "at least two rows" in stderr
    path.write_text("a,b,c\n1.0,2.0,3.0\n4.0,5.0,6.0\n")
    code, _, stderr = run(capsys, "plot", str(path), "-o",
                          str(tmp_path / "x.svg"))
    assert code == 1
    assert "cannot infer" in stderr


def test_output_dir_environment_redirect(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QIPF_OUTPUT_DIR", str(tmp_path / "sandbox"))
    code, _, _ = run(capsys, "generate", "sine", "--freqs", "50",
                     "--fs", "600", "--n", "100", "-o", "rel.csv")
    assert code == 0
    assert (tmp_path / "sandbox" / "rel.csv").exists()
    # absolute paths ignore the redirect
    out = tmp_path / "abs.csv"
    code, _, _ = run(capsys, "generate", "sine", "--freqs", "50",
                     "--fs", "600", "--n", "100", "-o", str(out))
    assert code == 0
    assert out.exists()
