import itertools
import math

import numpy as np
import pytest

from catnet.errors import TooManyFeaturesError
from catnet.shapley import Background, baseline_value, exact_shap, mc_shap, shap_matrix


def brute_force_shap(f, x, rows):
    """Independent oracle: direct sum over all coalitions."""
    p = len(x)
    phi = np.zeros(p)
    base = np.mean([f(r[None])[0] for r in rows])

    def value(S):
        total = 0.0
        for r in rows:
            mixed = r.copy()
            for idx in S:
                mixed[idx] = x[idx]
            total += f(mixed[None])[0]
        return total / len(rows) - base

    for j in range(p):
        others = [i for i in range(p) if i != j]
        for size in range(p):
            for S in itertools.combinations(others, size):
                w = math.factorial(size) * math.factorial(p - size - 1) / math.factorial(p)
                phi[j] += w * (value(S + (j,)) - value(S))
    return phi


class TestExact:
    def test_linear_model_known_values(self):
        bg = Background(rows=np.zeros((4, 2)))
        f = lambda X: X @ np.array([2.0, 3.0])
        phi = exact_shap(f, np.array([1.0, 1.0]), bg)
        assert np.allclose(phi, [2.0, 3.0], atol=1e-12)

    def test_ignored_feature_gets_exactly_zero(self):
        rng = np.random.default_rng(0)
        bg = Background(rows=rng.normal(size=(8, 3)))
        f = lambda X: np.sin(X[:, 0]) + X[:, 1] ** 2
        phi = exact_shap(f, rng.normal(size=3), bg)
        assert phi[2] == 0.0

    def test_product_model_matches_brute_force(self):
        rows = np.array([[0.5, -1.0], [2.0, 1.5]])
        bg = Background(rows=rows)
        f = lambda X: X[:, 0] * X[:, 1]
        x = np.array([1.2, -0.7])
        phi = exact_shap(f, x, bg)
        oracle = brute_force_shap(f, x, rows)
        assert np.allclose(phi, oracle, atol=1e-12)

    def test_efficiency(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            p = int(rng.integers(2, 9))
            A = rng.normal(size=(p, p))
            b = rng.normal(size=p)

            def f(X, A=A, b=b):
                return np.einsum("ni,ij,nj->n", X, A, X) + X @ b

            bg = Background(rows=rng.normal(size=(8, p)))
            x = rng.normal(size=p)
            phi = exact_shap(f, x, bg)
            gap = phi.sum() - (f(x[None])[0] - baseline_value(f, bg))
            assert abs(gap) <= 1e-8

    def test_symmetry_for_duplicated_feature(self):
        rng = np.random.default_rng(2)
        rows = rng.normal(size=(6, 3))
        rows[:, 1] = rows[:, 0]
        bg = Background(rows=rows)
        f = lambda X: 3.0 * X[:, 0] + 3.0 * X[:, 1] + X[:, 2] ** 2
        x = rng.normal(size=3)
        x[1] = x[0]
        phi = exact_shap(f, x, bg)
        assert phi[0] == pytest.approx(phi[1], abs=1e-8)

    def test_additivity(self):
        rng = np.random.default_rng(3)
        bg = Background(rows=rng.normal(size=(5, 4)))
        f1 = lambda X: np.tanh(X[:, 0]) * X[:, 2]
        f2 = lambda X: X[:, 1] ** 2 - X[:, 3]
        fsum = lambda X: f1(X) + f2(X)
        x = rng.normal(size=4)
        assert np.allclose(
            exact_shap(fsum, x, bg),
            exact_shap(f1, x, bg) + exact_shap(f2, x, bg),
            atol=1e-8,
        )

    def test_feature_cap(self):
        bg = Background(rows=np.zeros((2, 13)))
        with pytest.raises(TooManyFeaturesError, match="mc_shap"):
            exact_shap(lambda X: X.sum(axis=1), np.zeros(13), bg)


class TestMonteCarlo:
    def test_seeded_determinism(self):
        rng = np.random.default_rng(4)
        bg = Background(rows=rng.normal(size=(6, 5)))
        f = lambda X: np.sin(X).sum(axis=1)
        x = rng.normal(size=5)
        a = mc_shap(f, x, bg, K=20, seed=42)
        b = mc_shap(f, x, bg, K=20, seed=42)
        assert np.array_equal(a, b)
        c = mc_shap(f, x, bg, K=20, seed=43)
        assert not np.array_equal(a, c)

    def test_linear_model_exact_for_any_K(self):
        rng = np.random.default_rng(5)
        beta = rng.normal(size=6)
        f = lambda X: X @ beta + 1.5
        bg = Background(rows=rng.normal(size=(16, 6)))
        x = rng.normal(size=6)
        closed = beta * (x - bg.rows.mean(axis=0))
        for K in (1, 3):
            phi = mc_shap(f, x, bg, K=K, seed=K)
            assert np.allclose(phi, closed, atol=1e-12)

    def test_single_row_draws_converge_for_linear(self):
        rng = np.random.default_rng(6)
        beta = rng.normal(size=4)
        f = lambda X: X @ beta
        bg = Background(rows=rng.normal(size=(8, 4)))
        x = rng.normal(size=4)
        closed = beta * (x - bg.rows.mean(axis=0))
        phi = mc_shap(f, x, bg, K=4000, seed=7, rows_per_perm=1)
        assert np.max(np.abs(phi - closed)) < 0.1 * np.ptp(closed)

    def test_close_to_exact_for_nonlinear_model(self):
        rng = np.random.default_rng(7)
        bg = Background(rows=rng.normal(size=(16, 8)))

        def f(X):
            return np.sin(X[:, 0]) * X[:, 1] + 0.5 * X[:, 2] ** 2 + np.tanh(X[:, 3:]).sum(axis=1)

        x = rng.normal(size=8)
        exact = exact_shap(f, x, bg)
        approx = mc_shap(f, x, bg, K=2000, seed=8)
        assert np.max(np.abs(approx - exact)) <= 0.05 * np.ptp(exact)

    def test_requires_positive_K(self):
        bg = Background(rows=np.zeros((1, 2)))
        with pytest.raises(ValueError):
            mc_shap(lambda X: X.sum(axis=1), np.zeros(2), bg, K=0, seed=0)

    def test_error_shrinks_with_more_permutations(self):
        rng = np.random.default_rng(15)
        bg = Background(rows=rng.normal(size=(8, 5)))
        f = lambda X: np.sin(X[:, 0]) * X[:, 1] + X[:, 2] ** 2 + X[:, 3] - X[:, 4]
        x = rng.normal(size=5)

        def spread(K):
            draws = np.array([
                mc_shap(f, x, bg, K=K, seed=s, rows_per_perm=1) for s in range(10)
            ])
            return draws.std(axis=0).mean()

        small, big = spread(64), spread(1024)
        # 16x the permutations should shrink the spread about 4x
        assert big < small / 2.0


class TestMatrix:
    def test_single_sample_column(self):
        rng = np.random.default_rng(9)
        bg = Background(rows=rng.normal(size=(4, 3)))
        f = lambda X: X @ np.array([1.0, -2.0, 0.5])
        samples = rng.normal(size=(1, 3))
        sm = shap_matrix(f, samples, bg, K=5, seed=1)
        assert sm.values.shape == (3, 1)
        assert np.allclose(sm.values[:, 0], exact_shap(f, samples[0], bg), atol=1e-12)

    def test_exact_path_matches_per_sample_calls(self):
        rng = np.random.default_rng(10)
        bg = Background(rows=rng.normal(size=(4, 4)))
        f = lambda X: X[:, 0] * X[:, 1] + X[:, 2]
        samples = rng.normal(size=(6, 4))
        sm = shap_matrix(f, samples, bg, K=10, seed=2)
        for i in range(6):
            assert np.allclose(sm.values[:, i], exact_shap(f, samples[i], bg), atol=1e-12)

    def test_null_feature_row_centered(self):
        # force the Monte-Carlo path with p = 13 and a weak fitted null
        rng = np.random.default_rng(11)
        p, n = 13, 200
        beta = rng.normal(size=p)
        beta[5] = 0.02  # nearly-null feature
        f = lambda X: X @ beta
        samples = rng.normal(size=(n, p))
        bg = Background.subsample(samples, 32, seed=3)
        sm = shap_matrix(f, samples, bg, K=8, seed=4)
        row = sm.values[5]
        assert abs(row.mean()) <= 3.0 * row.std() / math.sqrt(n)

    def test_linear_rows_track_centered_features(self):
        rng = np.random.default_rng(12)
        p, n = 5, 120
        beta = rng.normal(size=p)
        f = lambda X: X @ beta
        samples = rng.normal(size=(n, p))
        bg = Background.subsample(samples, 32, seed=5)
        sm = shap_matrix(f, samples, bg, K=4, seed=6)
        for j in range(p):
            target = beta[j] * (samples[:, j] - bg.rows[:, j].mean())
            r = np.corrcoef(sm.values[j], target)[0, 1]
            assert r > 0.999

    def test_csv_export(self, tmp_path):
        rng = np.random.default_rng(13)
        bg = Background(rows=rng.normal(size=(3, 2)))
        f = lambda X: X.sum(axis=1)
        sm = shap_matrix(f, rng.normal(size=(4, 2)), bg, K=2, seed=7)
        path = tmp_path / "shap.csv"
        sm.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "feature,0,1,2,3"
        assert len(lines) == 3


class TestBackground:
    def test_subsample_seeded_and_bounded(self):
        rng = np.random.default_rng(14)
        samples = rng.normal(size=(50, 4))
        a = Background.subsample(samples, 16, seed=0)
        b = Background.subsample(samples, 16, seed=0)
        assert np.array_equal(a.rows, b.rows)
        assert a.rows.shape == (16, 4)
        big = Background.subsample(samples, 500, seed=0)
        assert big.rows.shape == (50, 4)

    def test_empty_background_rejected(self):
        with pytest.raises(ValueError):
            Background(rows=np.zeros((0, 3)))
