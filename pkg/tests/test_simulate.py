import numpy as np
import pytest

from chunkreg.errors import DomainError, ShapeError
from chunkreg.simulate import (
    SimulationConfig,
    compound_symmetry,
    compound_symmetry_cholesky,
    load_truth,
    simulate_dataset,
)


def test_noiseless_uncorrelated(tmp_path):
    beta = np.array([0.5, 1.0, -2.0, 3.0])
    out = tmp_path / "d.csv"
    got = simulate_dataset(
        SimulationConfig(n=500, k=3, rho=0.0, sigma_sq=0.0, beta=beta, chunk_rows=128), out
    )
    np.testing.assert_array_equal(got, beta)
    data = np.loadtxt(out, delimiter=",")
    assert data.shape == (500, 4)
    np.testing.assert_allclose(data[:, 3], beta[0] + data[:, :3] @ beta[1:], rtol=1e-13, atol=1e-13)


def test_predictor_correlation(tmp_path):
    out = tmp_path / "d.csv"
    simulate_dataset(SimulationConfig(n=100_000, k=10, rho=0.2, seed=3), out)
    data = np.loadtxt(out, delimiter=",")
    corr = np.corrcoef(data[:, :10].T)
    off = corr[~np.eye(10, dtype=bool)]
    assert np.all(np.abs(off - 0.2) < 0.02)
    assert np.all(np.abs(data[:, :10].var(axis=0) - 1.0) < 0.02)


def test_deterministic_and_chunk_invariant(tmp_path):
    paths = []
    for i, chunk in enumerate((1000, 1000, 333)):
        p = tmp_path / f"d{i}.csv"
        simulate_dataset(SimulationConfig(n=2000, k=4, seed=99, chunk_rows=chunk), p)
        paths.append(p)
    a, b, c = (p.read_bytes() for p in paths)
    assert a == b == c
    other = tmp_path / "o.csv"
    simulate_dataset(SimulationConfig(n=2000, k=4, seed=100), other)
    assert other.read_bytes() != a


def test_truth_sidecar(tmp_path):
    out = tmp_path / "d.csv"
    beta = simulate_dataset(SimulationConfig(n=10, k=2, seed=1, sigma_sq=2.0), out)
    truth = load_truth(tmp_path / "d.csv.truth.json")
    np.testing.assert_array_equal(truth["beta"], beta)
    assert truth["sigma_sq"] == 2.0 and truth["k"] == 2
    simulate_dataset(SimulationConfig(n=10, k=2, seed=1), out, tmp_path / "t.json")
    assert load_truth(tmp_path / "t.json")["n"] == 10


def test_beta_drawn_standard_normal(tmp_path):
    betas = [simulate_dataset(SimulationConfig(n=1, k=50, seed=s), tmp_path / "d.csv")
             for s in range(40)]
    b = np.concatenate(betas)
    assert abs(b.mean()) < 0.1 and abs(b.std() - 1.0) < 0.1


@pytest.mark.parametrize("k", [2, 10, 100, 1000])
def test_compound_symmetry_cholesky(k):
    for rho in (0.2, -0.9 / max(k - 1, 1), 0.95):
        low = compound_symmetry_cholesky(k, rho)
        assert np.max(np.abs(low @ low.T - compound_symmetry(k, rho))) < 1e-12


def test_rho_domain():
    with pytest.raises(DomainError):
        SimulationConfig(n=10, k=10, rho=-0.2)
    with pytest.raises(DomainError):
        SimulationConfig(n=10, k=3, rho=1.0)
    SimulationConfig(n=10, k=10, rho=-0.1 + 1e-9)
    with pytest.raises(ShapeError):
        SimulationConfig(n=10, k=3, beta=np.ones(3))


def test_digits_control_file_size(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    simulate_dataset(SimulationConfig(n=1000, k=10, seed=1, digits=6), a)
    simulate_dataset(SimulationConfig(n=1000, k=10, seed=1), b)
    assert a.stat().st_size < 0.6 * b.stat().st_size
    np.testing.assert_allclose(np.loadtxt(a, delimiter=","), np.loadtxt(b, delimiter=","),
                               rtol=1e-5, atol=1e-5)
