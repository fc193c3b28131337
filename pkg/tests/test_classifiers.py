import numpy as np
import pytest

from femda.classifiers import (
    FittedClassifier,
    Method,
    fit,
    predict,
    score_femda,
    score_qda,
    score_rqda,
    score_tqda,
)
from femda.datagen import GeneralizedGaussian, SyntheticConfig, generate_mixture
from femda.errors import DimensionMismatch, EmptyCluster, MissingNu
from femda.estimators import ClusterModel, FitConfig
from femda.spd import cholesky

from conftest import make_spd


def _model(mu, sigma, nu=None):
    return ClusterModel(
        mu=np.asarray(mu, dtype=float),
        sigma=cholesky(sigma),
        nu=nu,
        converged=True,
        iterations=0,
        final_step_norm=0.0,
    )


def _clone_with_sigma(model, sigma):
    return ClusterModel(
        mu=model.mu,
        sigma=cholesky(sigma),
        nu=model.nu,
        converged=model.converged,
        iterations=model.iterations,
        final_step_norm=model.final_step_norm,
    )


class TestScaleInsensitiveRule:
    def test_unit_distance_identity_scatter(self):
        models = [_model(np.zeros(3), np.eye(3)), _model(np.ones(3) * 5, np.eye(3))]
        x = np.array([1.0, 0.0, 0.0])
        assert score_femda(x, models)[0] == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("per_class", [False, True])
    def test_scale_cancellation(self, rng, per_class):
        models = [
            _model(rng.standard_normal(4), make_spd(rng, 4)) for _ in range(3)
        ]
        x = rng.standard_normal(4)
        base = score_femda(x, models)
        factors = (1e-3, 0.7, 1e3) if per_class else (37.0, 37.0, 37.0)
        scaled = [
            _clone_with_sigma(mod, c * mod.sigma.matrix)
            for mod, c in zip(models, factors)
        ]
        drift = np.abs(score_femda(x, scaled) - base).max()
        assert drift <= 1e-10

    def test_tie_breaks_to_lowest_index(self, rng):
        # with sigma_2 = e * I in dimension 2, the two scores coincide for
        # every x: log(d/e) + 1 == log d
        models = [_model(np.zeros(2), np.eye(2)), _model(np.zeros(2), np.e * np.eye(2))]
        X = rng.standard_normal((20, 2))
        scores = np.array([score_femda(x, models) for x in X])
        np.testing.assert_allclose(scores[:, 0], scores[:, 1], atol=1e-12)
        # bitwise-equal score columns (identical models) resolve to class 0
        twin = FittedClassifier(
            method=Method.FEMDA, class_count=2, models=[models[0], models[0]]
        )
        assert np.all(predict(twin, X) == 0)

    def test_observation_at_mean_wins(self):
        models = [_model([1.0, 1.0], np.eye(2)), _model([-1.0, -1.0], np.eye(2))]
        clf = FittedClassifier(method=Method.FEMDA, class_count=2, models=models)
        pred = predict(clf, np.array([[1.0, 1.0], [-1.0, -1.0]]))
        assert pred.tolist() == [0, 1]


class TestGaussianRule:
    def test_zero_distance_wins(self, rng):
        sigma = make_spd(rng, 3)
        models = [_model([1.0, 0, 0], sigma), _model([0.0, 2, 0], sigma)]
        assert score_qda(np.array([1.0, 0, 0]), models).argmin() == 0

    def test_one_dimensional_nearer_mean(self):
        models = [_model([-1.0], np.eye(1)), _model([1.0], np.eye(1))]
        scores = score_qda(np.array([0.2]), models)
        assert scores.argmin() == 1

    def test_not_scale_invariant(self, rng):
        models = [_model(rng.standard_normal(3), make_spd(rng, 3)) for _ in range(2)]
        x = rng.standard_normal(3)
        base = score_qda(x, models)
        scaled = [models[0], _clone_with_sigma(models[1], 5.0 * models[1].sigma.matrix)]
        new = score_qda(x, scaled)
        assert new[0] == base[0]
        assert new[1] == pytest.approx(base[1] / 5.0, rel=1e-12)

    def test_two_class_equal_scatter_boundary_is_hyperplane(self, rng):
        # equal scatters: d1(x) - d2(x) is affine, so the decision boundary is
        # the Mahalanobis-equidistant hyperplane; compare against its closed
        # form on a plane grid
        sigma = make_spd(rng, 2)
        mu0, mu1 = np.array([1.0, -0.5]), np.array([-2.0, 1.5])
        models = [_model(mu0, sigma), _model(mu1, sigma)]
        clf = FittedClassifier(method=Method.QDA, class_count=2, models=models)
        inv = np.linalg.inv(sigma)
        w = 2 * inv @ (mu1 - mu0)
        b = mu1 @ inv @ mu1 - mu0 @ inv @ mu0
        gx, gy = np.meshgrid(np.linspace(-5, 5, 41), np.linspace(-5, 5, 41))
        grid = np.column_stack([gx.ravel(), gy.ravel()])
        closed_form = np.where(grid @ w < b, 0, 1)
        on_boundary = np.abs(grid @ w - b) < 1e-9
        pred = predict(clf, grid)
        assert np.array_equal(pred[~on_boundary], closed_form[~on_boundary])

    def test_logdet_flag(self, rng):
        models = [_model(rng.standard_normal(3), make_spd(rng, 3)) for _ in range(2)]
        x = rng.standard_normal(3)
        plain = score_qda(x, models)
        full = score_qda(x, models, logdet_term=True)
        for j, mod in enumerate(models):
            assert full[j] == pytest.approx(plain[j] + mod.sigma.logdet, rel=1e-12)


class TestRobustGaussianRule:
    def test_at_mean_with_equal_scatters(self, rng):
        sigma = make_spd(rng, 3)
        models = [_model([2.0, 0, 0], sigma), _model([0.0, 0, 0], sigma)]
        assert score_rqda(np.array([2.0, 0, 0]), models).argmin() == 0

    def test_agreement_with_gaussian_rule_on_clean_gaussian_data(self):
        cfg = SyntheticConfig(
            n=3000,
            seed=5,
            radius=5.0,
            cluster_families=(GeneralizedGaussian(1.0),) * 3,
            priors=(0.33, 0.33, 0.34),
        )
        X, y, _ = generate_mixture(cfg)
        Xtr, ytr, Xte = X[:2100], y[:2100], X[2100:]
        pred_q = predict(fit("qda", Xtr, ytr), Xte)
        pred_r = predict(fit("rqda", Xtr, ytr), Xte)
        assert (pred_q == pred_r).mean() >= 0.95

    def test_deterministic_given_models(self, rng):
        models = [_model(rng.standard_normal(4), make_spd(rng, 4)) for _ in range(3)]
        x = rng.standard_normal(4)
        assert np.array_equal(score_rqda(x, models), score_rqda(x, models))


class TestStudentRule:
    def test_identical_models_tie_to_first(self, rng):
        sigma = make_spd(rng, 4)
        mu = rng.standard_normal(4)
        models = [_model(mu, sigma, nu=8.0), _model(mu, sigma, nu=8.0)]
        clf = FittedClassifier(method=Method.TQDA, class_count=2, models=models)
        X = rng.standard_normal((10, 4))
        scores = np.array([score_tqda(x, models) for x in X])
        np.testing.assert_allclose(scores[:, 0], scores[:, 1], rtol=1e-12)
        assert np.all(predict(clf, X) == 0)

    def test_monotone_in_distance(self):
        model = _model(np.zeros(3), np.eye(3), nu=6.0)
        scores = [
            score_tqda(np.array([r, 0.0, 0.0]), [model])[0]
            for r in (0.5, 1.0, 2.0, 4.0, 8.0)
        ]
        assert all(a < b for a, b in zip(scores, scores[1:]))

    def test_large_nu_matches_gaussian_logdet_ranking(self, rng):
        X, y, _ = generate_mixture(SyntheticConfig(n=900, seed=9))
        clf = fit("qda", X[:600], y[:600], FitConfig(qda_logdet=True))
        nu_models = [_model(m.mu, m.sigma.matrix, nu=1e4) for m in clf.models]
        Xte = X[600:]
        student = np.array([score_tqda(x, nu_models).argmin() for x in Xte[:150]])
        gauss = np.array(
            [score_qda(x, clf.models, logdet_term=True).argmin() for x in Xte[:150]]
        )
        assert np.array_equal(student, gauss)

    def test_missing_nu(self, rng):
        models = [_model(rng.standard_normal(3), make_spd(rng, 3))]
        with pytest.raises(MissingNu):
            score_tqda(rng.standard_normal(3), models)


class TestFitAndPredict:
    def test_fit_sanity_on_separated_blobs(self, rng):
        mu0, mu1 = np.array([-4.0, 0.0]), np.array([4.0, 0.0])
        X = np.vstack(
            [rng.standard_normal((200, 2)) + mu0, rng.standard_normal((200, 2)) + mu1]
        )
        y = np.repeat([0, 1], 200)
        clf = fit("qda", X, y)
        assert np.linalg.norm(clf.models[0].mu - mu0) < 0.3
        assert np.linalg.norm(clf.models[1].mu - mu1) < 0.3

    def test_knn_retains_data_verbatim(self, rng):
        X = rng.standard_normal((50, 3))
        y = np.arange(50) % 2
        clf = fit("knn", X, y, knn_k=3)
        assert clf.models is None
        assert np.array_equal(clf.knn_data, X)
        assert np.array_equal(clf.knn_labels, y)

    def test_fit_determinism(self):
        X, y, _ = generate_mixture(SyntheticConfig(n=600, seed=3))
        for method in Method:
            a = fit(method, X, y)
            b = fit(method, X, y)
            assert np.array_equal(predict(a, X[:100]), predict(b, X[:100]))

    def test_missing_class_raises(self, rng):
        X = rng.standard_normal((30, 2))
        y = np.array([0] * 15 + [2] * 15)  # label 1 absent
        with pytest.raises(EmptyCluster):
            fit("qda", X, y)

    def test_knn_self_prediction_k1(self, rng):
        X = rng.standard_normal((80, 4))
        y = rng.integers(0, 3, size=80)
        y[:3] = [0, 1, 2]
        clf = fit("knn", X, y, knn_k=1)
        assert np.array_equal(predict(clf, X), y)

    def test_knn_vote_tie_breaks_low(self):
        X = np.array([[0.0], [2.0]])
        y = np.array([1, 0])
        clf = fit("knn", X, y, knn_k=2)
        # both neighbors vote once; tie resolved to label 0
        assert predict(clf, np.array([[1.0]]))[0] == 0

    def test_empty_test_matrix(self, rng):
        X, y, _ = generate_mixture(SyntheticConfig(n=300, seed=2))
        for method in ("qda", "knn"):
            clf = fit(method, X, y)
            assert predict(clf, np.empty((0, 10))).shape == (0,)

    def test_row_permutation_equivariance(self, rng):
        X, y, _ = generate_mixture(SyntheticConfig(n=600, seed=3))
        clf = fit("femda", X[:400], y[:400])
        Xte = X[400:]
        perm = rng.permutation(len(Xte))
        assert np.array_equal(predict(clf, Xte)[perm], predict(clf, Xte[perm]))

    def test_dimension_mismatch(self, rng):
        X, y, _ = generate_mixture(SyntheticConfig(n=300, seed=2))
        clf = fit("qda", X, y)
        with pytest.raises(DimensionMismatch):
            predict(clf, rng.standard_normal((5, 3)))

    def test_degenerate_distance_minus_inf_wins(self, rng):
        models = [
            _model([1.0, 2.0], make_spd(rng, 2)),
            _model([0.0, 0.0], make_spd(rng, 2)),
        ]
        clf = FittedClassifier(method=Method.FEMDA, class_count=2, models=models)
        scores = score_femda(np.array([1.0, 2.0]), models)
        assert scores[0] == -np.inf
        assert predict(clf, np.array([[1.0, 2.0]]))[0] == 0


class TestAffineInvariance:
    @pytest.mark.parametrize("method", ["qda", "rqda", "femda", "tqda"])
    def test_consistent_map_preserves_labels(self, rng, method):
        X, y, _ = generate_mixture(SyntheticConfig(n=900, seed=4))
        clf = fit(method, X[:600], y[:600])
        Xte = X[600:]
        base = predict(clf, Xte)
        q, r = np.linalg.qr(rng.standard_normal((10, 10)))
        rot = q * np.sign(np.diag(r))
        shift = rng.standard_normal(10) * 2
        moved_models = [
            ClusterModel(
                mu=rot @ m.mu + shift,
                sigma=cholesky(rot @ m.sigma.matrix @ rot.T),
                nu=m.nu,
                converged=m.converged,
                iterations=m.iterations,
                final_step_norm=m.final_step_norm,
            )
            for m in clf.models
        ]
        moved = FittedClassifier(
            method=clf.method,
            class_count=clf.class_count,
            models=moved_models,
            qda_logdet=clf.qda_logdet,
        )
        assert np.array_equal(base, predict(moved, Xte @ rot.T + shift))
