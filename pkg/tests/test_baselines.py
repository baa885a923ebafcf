import numpy as np
import pytest
from scipy.stats import spearmanr

from isolatent.baselines import classical_mds, isomap, stress
from isolatent.dissimilarity import (
    DissimilarityMatrix,
    PointSet,
    euclidean_distances,
    gen_swiss_roll,
)
from isolatent.errors import ValidationError
from isolatent.graph import choose_eps, zero_dim_persistence

from helpers import pairwise_distances, similarity_stress_ratio


class TestClassicalMds:
    def test_points_on_a_line(self):
        d = euclidean_distances(PointSet(np.array([[1.0], [2.0], [4.0]])))
        emb = classical_mds(d, 1)
        rec = pairwise_distances(emb)
        assert np.abs(rec - d.values).max() < 1e-9

    def test_exact_on_euclidean_input(self):
        rng = np.random.Generator(np.random.Philox(key=51))
        pts = rng.standard_normal((20, 2))
        d = euclidean_distances(PointSet(pts))
        emb = classical_mds(d, 2)
        assert stress(d, emb) < 1e-9

    def test_dimension_deficit_leaves_stress(self):
        square = PointSet(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
        d = euclidean_distances(square)
        emb = classical_mds(d, 1)
        # brute-force stress evaluation over all six pairs
        residual = 0.0
        for i in range(4):
            for j in range(i + 1, 4):
                residual += (d.values[i, j] - abs(emb[i, 0] - emb[j, 0])) ** 2
        assert residual > 1e-3
        assert stress(d, emb) == pytest.approx(residual, rel=1e-12)

    def test_output_centered(self):
        rng = np.random.Generator(np.random.Philox(key=52))
        pts = rng.standard_normal((15, 3)) + 5.0
        emb = classical_mds(euclidean_distances(PointSet(pts)), 3)
        assert np.abs(emb.mean(axis=0)).max() < 1e-9

    def test_eigensolver_against_characteristic_polynomial(self):
        # 3x3 case: eigenvalues of the centered Gram matrix vs cubic roots
        rng = np.random.Generator(np.random.Philox(key=53))
        pts = rng.standard_normal((3, 2))
        d = euclidean_distances(PointSet(pts))
        v = d.values
        h = np.eye(3) - np.full((3, 3), 1.0 / 3.0)
        b = -0.5 * h @ (v**2) @ h
        # char poly of a 3x3 symmetric matrix: -x^3 + tr x^2 - c2 x + det
        tr = np.trace(b)
        c2 = 0.5 * (tr**2 - np.trace(b @ b))
        det = np.linalg.det(b)
        roots = np.sort(np.roots([-1.0, tr, -c2, det]).real)
        evals = np.sort(np.linalg.eigvalsh(b))
        assert np.allclose(roots, evals, atol=1e-8)

    def test_rejects_bad_q(self):
        d = euclidean_distances(PointSet(np.zeros((3, 2)) + np.arange(3)[:, None]))
        with pytest.raises(ValidationError):
            classical_mds(d, 3)


class TestIsomap:
    def test_complete_graph_equals_mds(self):
        rng = np.random.Generator(np.random.Philox(key=54))
        pts = rng.standard_normal((12, 3))
        d = euclidean_distances(PointSet(pts))
        emb_iso, kept = isomap(d, np.inf, 2)
        emb_mds = classical_mds(d, 2)
        assert np.array_equal(kept, np.arange(12))
        assert np.abs(emb_iso - emb_mds).max() < 1e-9

    def test_swiss_roll_unrolling(self):
        ps, truth = gen_swiss_roll(300, noise_sd=0.0, seed=7)
        d = euclidean_distances(ps)
        eps = choose_eps(zero_dim_persistence(d), n_components=1)
        emb, kept = isomap(d, eps, 2)
        assert kept.size == 300
        d_emb = pairwise_distances(emb)
        d_true = pairwise_distances(truth)
        iu = np.triu_indices(300, 1)
        rho = spearmanr(d_true[iu], d_emb[iu]).statistic
        assert rho >= 0.9
        assert similarity_stress_ratio(truth, emb) < 0.05

    def test_two_components_drop_smaller(self):
        rng = np.random.Generator(np.random.Philox(key=55))
        a = rng.uniform(0, 1, size=(10, 2))
        b = rng.uniform(0, 1, size=(6, 2)) + 50.0
        d = euclidean_distances(PointSet(np.vstack([a, b])))
        emb, kept = isomap(d, 3.0, 2)
        assert np.array_equal(kept, np.arange(10))
        assert emb.shape == (10, 2)

    def test_component_too_small(self):
        d = euclidean_distances(PointSet(np.array([[0.0], [10.0], [20.0]])))
        with pytest.raises(ValidationError):
            isomap(d, 1.0, 2)


class TestStress:
    def test_exact_embedding_zero(self):
        rng = np.random.Generator(np.random.Philox(key=56))
        pts = rng.standard_normal((10, 2))
        d = euclidean_distances(PointSet(pts))
        assert stress(d, pts) < 1e-20

    def test_single_pair(self):
        d = DissimilarityMatrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
        z = np.zeros((2, 2))
        assert stress(d, z) == 4.0

    def test_against_naive_loop(self):
        rng = np.random.Generator(np.random.Philox(key=57))
        pts = rng.standard_normal((9, 3))
        z = rng.standard_normal((9, 2))
        d = euclidean_distances(PointSet(pts))
        naive = 0.0
        for i in range(9):
            for j in range(i + 1, 9):
                naive += (d.values[i, j] - np.linalg.norm(z[i] - z[j])) ** 2
        assert stress(d, z) == pytest.approx(naive, abs=1e-12)

    def test_rigid_invariance(self):
        rng = np.random.Generator(np.random.Philox(key=58))
        pts = rng.standard_normal((12, 3))
        z = rng.standard_normal((12, 2))
        d = euclidean_distances(PointSet(pts))
        theta = 0.83
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        z2 = z @ rot.T + np.array([3.0, -1.0])
        assert abs(stress(d, z) - stress(d, z2)) < 1e-9
