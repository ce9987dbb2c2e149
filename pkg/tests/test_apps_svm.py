import numpy as np
import pytest

from dpconic.conic import Status
from dpconic.dp import calibrate_laplace, sample_noise
from dpconic.ldr import IndividualChance, VertexChance
from dpconic.apps.svm import (
    LabeledPoints,
    accuracy,
    classify,
    circle_law_adjacency,
    privatize_svm,
    solve_svm,
    synthetic_gaussian_classes,
)


def brute_force_1d_threshold(xs, ys, lam, grid=400):
    """Grid search over (w, b) for the 1-D soft-margin objective."""
    best, best_val = None, np.inf
    for w in np.linspace(-5, 5, grid):
        for b in np.linspace(-6, 6, grid):
            margins = ys * (w * xs - b)
            hinge = np.maximum(0.0, 1.0 - margins)
            val = lam * w * w + hinge.mean()
            if val < best_val:
                best, best_val = (w, b), val
    return best, best_val


class TestBuildSvm:
    def test_1d_separable_threshold(self):
        xs = np.array([0.0, 2.0])
        ys = np.array([-1.0, 1.0])
        data = LabeledPoints(xs[:, None], ys, regularizer=1e-3)
        w, b, sol = solve_svm(data)
        (w0, b0), val0 = brute_force_1d_threshold(xs, ys, 1e-3)
        # objective value matches the brute-force oracle
        val = 1e-3 * w[0] ** 2 + np.maximum(
            0.0, 1.0 - ys * (w[0] * xs - b)).mean()
        assert val <= val0 + 1e-3
        # the separating threshold b/w sits at the midpoint
        assert abs(b / w[0] - 1.0) < 1e-3
        # zero hinge loss at the optimum
        assert np.all(ys * (w[0] * xs - b) >= 1 - 1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            LabeledPoints(np.zeros((3, 2)), np.ones(3), 1e-3)

    def test_nonbinary_labels_rejected(self):
        with pytest.raises(ValueError):
            LabeledPoints(np.zeros((2, 2)), np.array([0.0, 1.0]), 1e-3)

    def test_synthetic_accuracy(self):
        train, tx, ty = synthetic_gaussian_classes(m=100, seed=7)
        w, b, _ = solve_svm(train)
        assert accuracy(w, b, tx, ty) >= 0.97


class TestClassify:
    def test_sides(self):
        assert classify(np.array([1.0, 0.0]), 0.0, np.array([[2.0, 0.0]]))[0] == 1.0
        assert classify(np.array([1.0, 0.0]), 0.0, np.array([[-2.0, 0.0]]))[0] == -1.0

    def test_tie_goes_positive(self):
        assert classify(np.array([1.0, 0.0]), 0.0, np.array([[0.0, 0.0]]))[0] == 1.0


@pytest.fixture(scope="module")
def svm_setup():
    train, tx, ty = synthetic_gaussian_classes(m=40, seed=1)
    noise = calibrate_laplace(5.0, 1.0, k=3)
    pv = privatize_svm(train, noise, IndividualChance(eta_bar=0.05), seed=3)
    return train, tx, ty, noise, pv


class TestPrivatizeSvm:

    def test_nominal_inflated(self, svm_setup):
        train, _, _, _, pv = svm_setup
        w, b, _ = solve_svm(train)
        assert np.linalg.norm(pv.w_nominal) > np.linalg.norm(w)

    def test_release_increment_data_independent(self, svm_setup):
        train, _, _, noise, pv = svm_setup
        wr, br = pv.release(seed=11)
        d = sample_noise(noise, 11, 1)[0]
        assert np.array_equal(wr, pv.w_nominal + d[:-1])
        assert br == pv.b_nominal + d[-1]

    def test_chance_rows_hold_on_draws(self, svm_setup):
        train, _, _, noise, pv = svm_setup
        zet = sample_noise(noise, 123, 4000, stream=6)
        xs = pv.rule.evaluate_many(zet)
        n = train.n
        wv, bv, zv = xs[:, :n], xs[:, n], xs[:, n + 1:]
        margins = train.labels[None, :] * (wv @ train.features.T - bv[:, None]) \
            - 1 + zv
        viol = (margins < -1e-9).any(axis=1) | (zv < -1e-9).any(axis=1)
        # 80 rows at 5% each would union-bound far above this; the joint
        # empirical rate stays modest because few rows are active
        assert viol.mean() <= 0.2

    def test_vertex_variant_solves(self):
        train, _, _ = synthetic_gaussian_classes(m=20, seed=2)
        noise = calibrate_laplace(2.0, 1.0, k=3)
        pv = privatize_svm(train, noise, VertexChance(eta=0.1, samples=50), seed=4)
        assert pv.solution.status == Status.OPTIMAL

    def test_objective_offset(self, svm_setup):
        train, _, _, noise, pv = svm_setup
        assert pv.objective_offset == pytest.approx(
            train.regularizer * train.n * noise.coordinate_variance)

    def test_noise_dim_checked(self):
        train, _, _ = synthetic_gaussian_classes(m=20, seed=2)
        with pytest.raises(ValueError):
            privatize_svm(train, calibrate_laplace(1.0, 1.0, k=2),
                          IndividualChance(eta_bar=0.05))


class TestAdjacency:
    def test_jitter_stays_in_circles(self):
        train, _, _ = synthetic_gaussian_classes(m=30, seed=5)
        adj = circle_law_adjacency(train, radius=0.05)
        rng = np.random.default_rng(0)
        d1, d2 = adj.sample_pair(rng)
        for d in (d1, d2):
            shift = np.linalg.norm(d.features - train.features, axis=1)
            assert np.all(shift <= 0.05 + 1e-12)
        assert np.array_equal(d1.labels, train.labels)
