import json
import subprocess
import sys

import numpy as np
import pytest

from chunkreg.cli import main, parse_cols
from chunkreg.posterior import read_draws
from chunkreg.summaries import load

from conftest import write_csv


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def dataset(tmp_path, capsys):
    path = tmp_path / "d.csv"
    code, out, _ = run(["simulate", "--n", 3000, "--k", 10, "--seed", 5, "--out", path], capsys)
    assert code == 0
    return path


@pytest.fixture
def stats_file(tmp_path, dataset, capsys):
    out = tmp_path / "s.json"
    code, _, _ = run(["ingest", "--input", dataset, "--predictor-cols", "1-10",
                      "--response-col", 11, "--out", out], capsys)
    assert code == 0
    return out


def test_parse_cols():
    assert parse_cols("1-3,7") == [1, 2, 3, 7]
    assert parse_cols("2,3") == [2, 3]


def test_ingest_replay_flags(tmp_path, dataset, capsys):
    out = tmp_path / "s.json"
    code, text, _ = run(["ingest", "--input", dataset, "--predictor-cols", "1-10",
                         "--response-col", 11, "--first-rows", 100000, "--next-rows", 100000,
                         "--out", out], capsys)
    assert code == 0
    s = load(out)
    assert s.n == 3000 and s.p == 11
    assert f"n=3000 p=11 bytes={dataset.stat().st_size}" in text


def test_ingest_update_matches_one_shot(tmp_path, capsys):
    rng = np.random.default_rng(8)
    a, b = rng.standard_normal((400, 3)), rng.standard_normal((250, 3))
    write_csv(tmp_path / "a.csv", a)
    write_csv(tmp_path / "b.csv", b)
    write_csv(tmp_path / "ab.csv", np.vstack([a, b]))
    common = ["--predictor-cols", "1,2", "--response-col", 3, "--first-rows", 70, "--next-rows", 33]
    run(["ingest", "--input", tmp_path / "a.csv", *common, "--out", tmp_path / "sa.json"], capsys)
    run(["ingest", "--input", tmp_path / "b.csv", *common, "--update", tmp_path / "sa.json",
         "--out", tmp_path / "sab.json"], capsys)
    run(["ingest", "--input", tmp_path / "ab.csv", *common, "--out", tmp_path / "one.json"], capsys)
    u, o = load(tmp_path / "sab.json"), load(tmp_path / "one.json")
    assert u.n == o.n == 650
    np.testing.assert_allclose(u.xtx, o.xtx, rtol=1e-12, atol=0)
    np.testing.assert_allclose(u.xty, o.xty, rtol=1e-12, atol=0)
    assert u.yty == pytest.approx(o.yty, rel=1e-12)


def test_ingest_missing_response_col(dataset, tmp_path, capsys):
    code, _, err = run(["ingest", "--input", dataset, "--predictor-cols", "1-10",
                        "--out", tmp_path / "s.json"], capsys)
    assert code == 1
    assert err.startswith("usage:")
    assert err.strip().splitlines()[-1].startswith("chunkreg: error: usage:")


def test_ingest_bad_data_exit_2(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("1,2\n3,x\n")
    code, _, err = run(["ingest", "--input", tmp_path / "bad.csv", "--predictor-cols", "1",
                        "--response-col", 2, "--out", tmp_path / "s.json"], capsys)
    assert code == 2
    assert "chunkreg: error: data:" in err and "'x'" in err
    assert len(err.strip().splitlines()) == 1


def test_sample_replay_priors(stats_file, tmp_path, capsys):
    prefix = tmp_path / "run_"
    code, text, _ = run(["sample", "--stats", stats_file, "--beta-prior", "mvnorm-known",
                         "--mean-mu", "zeros", "--cov-c", "identity",
                         "--sigmasq-prior", "inverse-gamma", "--ig-a", 1, "--ig-b", 1,
                         "--sigmasq-init", 1, "--samples", 11000, "--out-prefix", prefix], capsys)
    assert code == 0
    chain = read_draws(f"{prefix}draws.csv")
    assert chain.t_samples == 11000 and chain.p == 11
    assert "draws=11000" in text


def test_sample_flat_jeffreys(stats_file, tmp_path, capsys):
    code, _, _ = run(["sample", "--stats", stats_file, "--beta-prior", "flat",
                      "--sigmasq-prior", "jeffreys", "--sigmasq-init", 1, "--samples", 50,
                      "--out-prefix", tmp_path / "f_"], capsys)
    assert code == 0
    assert read_draws(tmp_path / "f_draws.csv").t_samples == 50


def test_sample_hierarchical_and_chains(stats_file, tmp_path, capsys):
    code, _, _ = run(["sample", "--stats", stats_file, "--beta-prior", "mvnorm-unknown",
                      "--samples", 20, "--chains", 2, "--zero-intercept",
                      "--out-prefix", tmp_path / "h_"], capsys)
    assert code == 0
    c0 = read_draws(tmp_path / "h_chain0_draws.csv")
    c1 = read_draws(tmp_path / "h_chain1_draws.csv")
    assert c0.p == 10 and c0.first_index == 1 and c0.cinv.shape == (20, 10, 10)
    assert not np.array_equal(c0.beta, c1.beta)


def test_sample_wrong_mu_length(stats_file, tmp_path, capsys):
    code, _, err = run(["sample", "--stats", stats_file, "--beta-prior", "mvnorm-known",
                        "--mean-mu", "1,2,3", "--out-prefix", tmp_path / "x_"], capsys)
    assert code == 2
    assert "expected length 11" in err
    assert err.startswith("chunkreg: error: data:")


def test_sample_factorization_failure_exit_3(tmp_path, capsys):
    x = np.random.default_rng(1).standard_normal(30)
    write_csv(tmp_path / "c.csv", np.column_stack([x, 2 * x, x + 1]))
    run(["ingest", "--input", tmp_path / "c.csv", "--predictor-cols", "1,2",
         "--response-col", 3, "--out", tmp_path / "s.json"], capsys)
    code, _, err = run(["sample", "--stats", tmp_path / "s.json", "--samples", 5,
                        "--out-prefix", tmp_path / "r_"], capsys)
    assert code == 3
    assert err.startswith("chunkreg: error: numerical:") and "iteration 1" in err


def test_summarize(stats_file, tmp_path, capsys):
    prefix = tmp_path / "r_"
    run(["sample", "--stats", stats_file, "--beta-prior", "mvnorm-known",
         "--samples", 1100, "--out-prefix", prefix], capsys)
    out = tmp_path / "summary.csv"
    code, text, _ = run(["summarize", "--draws", f"{prefix}draws.csv", "--burn-in", 100,
                         "--probs", "0.975,0.5,0.025", "--out", out,
                         "--plot-data", tmp_path / "plot_"], capsys)
    assert code != 0  # probs must be increasing
    code, text, _ = run(["summarize", "--draws", f"{prefix}draws.csv", "--burn-in", 100,
                         "--probs", "0.05,0.5,0.95", "--out", out,
                         "--plot-data", tmp_path / "plot_"], capsys)
    assert code == 0
    assert "retained draws: 1000" in text
    header = out.read_text().splitlines()[0].split(",")
    assert header == ["parameter", "mean", "sd", "naive_se", "q0.05", "q0.5", "q0.95"]
    hist = (tmp_path / "plot_beta0_history.csv").read_text().splitlines()
    assert len(hist) == 1001 and hist[1].startswith("101,")
    assert (tmp_path / "plot_sigmasq_density.csv").exists()


def test_summarize_burn_in_too_large(stats_file, tmp_path, capsys):
    run(["sample", "--stats", stats_file, "--samples", 10, "--out-prefix", tmp_path / "r_"], capsys)
    code, _, err = run(["summarize", "--draws", tmp_path / "r_draws.csv", "--burn-in", 10], capsys)
    assert code == 2 and "burn_in" in err


def test_simulate_cli(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, text, _ = run(["simulate", "--n", 20, "--k", 3, "--rho", 0, "--sigma-sq", 0,
                         "--seed", 2, "--out", out, "--truth-out", tmp_path / "t.json"], capsys)
    assert code == 0
    truth = json.loads((tmp_path / "t.json").read_text())
    beta = np.array(truth["beta"])
    assert f"bytes={out.stat().st_size}" in text
    assert text.strip().splitlines()[-1] == "beta=" + ",".join(format(b, ".17g") for b in beta)
    data = np.loadtxt(out, delimiter=",")
    np.testing.assert_allclose(data[:, 3], beta[0] + data[:, :3] @ beta[1:], rtol=1e-13, atol=1e-13)


def test_simulate_bad_rho(tmp_path, capsys):
    code, _, err = run(["simulate", "--n", 5, "--k", 10, "--rho", -0.5,
                        "--out", tmp_path / "d.csv"], capsys)
    assert code == 1 and "chunkreg: error: usage:" in err


def test_simulate_replay_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        run(["simulate", "--n", 500, "--k", 4, "--seed", 11, "--out", tmp_path / f"{name}.csv"], capsys)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_bench_columns(tmp_path, capsys):
    code, text, _ = run(["bench", "--n", 2000, "--k", 3, "--samples", 20,
                         "--workdir", tmp_path], capsys)
    assert code == 0
    header, row = text.strip().splitlines()
    cols = header.split(",")
    assert cols[:4] == ["predictors", "rows", "bytes", "ingest_seconds"]
    assert all(c.startswith("sample_seconds_beta") for c in cols[4:]) and len(cols) == 7
    vals = row.split(",")
    assert vals[0] == "3" and vals[1] == "2000" and int(vals[2]) > 0


def test_bench_hierarchical_slower_at_k100(tmp_path, capsys):
    code, text, _ = run(["bench", "--n", 2000, "--k", 100, "--samples", 200,
                         "--priors", "1:1,3:1", "--workdir", tmp_path], capsys)
    assert code == 0
    vals = text.strip().splitlines()[1].split(",")
    assert float(vals[5]) > float(vals[4])


# VmHWM belongs to the exec'd address space; ru_maxrss would inherit the
# parent's high-water mark across fork/exec.
PEAK_SCRIPT = """
import sys
from chunkreg.cli import main
code = main(sys.argv[1:])
hwm = [l for l in open("/proc/self/status") if l.startswith("VmHWM:")][0]
print(int(hwm.split()[1]) // 1024)
sys.exit(code)
"""


def peak_ingest_mb(path, out):
    proc = subprocess.run(
        [sys.executable, "-c", PEAK_SCRIPT, "ingest", "--input", str(path),
         "--predictor-cols", "1-10", "--response-col", "11",
         "--first-rows", "20000", "--next-rows", "20000", "--out", str(out)],
        capture_output=True, text=True, check=True,
    )
    return int(proc.stdout.strip().splitlines()[-1])


def test_ingest_memory_flat_across_file_size(tmp_path, capsys):
    sizes = {}
    for n in (50_000, 500_000):
        path = tmp_path / f"d{n}.csv"
        run(["simulate", "--n", n, "--k", 10, "--digits", 6, "--out", path], capsys)
        sizes[n] = peak_ingest_mb(path, tmp_path / "s.json")
    assert sizes[500_000] - sizes[50_000] < 25, sizes
