"""
Tests for GMM training, density evaluation and detector scoring.
"""

import json
import math

import numpy as np
import pytest

from spoofaudit.errors import (
    FeatureError,
    InsufficientDataError,
    ModelFileError,
    NonFiniteDataError,
)
from spoofaudit.models.features import FeatureKind, FeatureMatrix
from spoofaudit.models.gmm import DetectorModel, GmmModel
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.schemas.gmm import GmmConfig
from spoofaudit.services.cache import FeatureCache
from spoofaudit.services.gmm import (
    derive_seeds,
    fit_em,
    fit_em_trace,
    load_detector,
    log_density,
    log_density_frames,
    save_detector,
    score,
    score_cached,
    train_detector,
)

DIM = 60


def gmm(means, variances=None, weights=None) -> GmmModel:
    means = np.atleast_2d(np.asarray(means, dtype=float))
    k = means.shape[0]
    return GmmModel(
        weights=np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float),
        means=means,
        variances=np.ones_like(means) if variances is None else np.asarray(variances, dtype=float),
    )


def detector(bona_mean: float = 0.0, spoof_mean: float = 0.0) -> DetectorModel:
    return DetectorModel(
        bona_model=gmm(np.full((1, DIM), bona_mean)),
        spoof_model=gmm(np.full((1, DIM), spoof_mean)),
        feature_config=FeatureConfig.lfcc(),
        seed=0,
    )


def lfcc_frames(values: np.ndarray) -> FeatureMatrix:
    return FeatureMatrix(values=values, kind=FeatureKind.LFCC, frame_hop_ms=15.0)


def direct_log_density(model: GmmModel, x) -> float:
    """Sum every component density dimension by dimension."""
    total = 0.0
    for w, mu, var in zip(model.weights, model.means, model.variances, strict=True):
        density = 1.0
        for xd, md, vd in zip(x, mu, var, strict=True):
            density *= math.exp(-((xd - md) ** 2) / (2 * vd)) / math.sqrt(2 * math.pi * vd)
        total += w * density
    return math.log(total)


class TestFitEm:
    """Tests for EM training."""

    def test_single_component_is_maximum_likelihood(self):
        """Test that one component converges to the sample mean and population variance."""
        rng = np.random.default_rng(0)
        x = rng.normal([1.0, -2.0, 0.5], [1.0, 0.3, 2.0], size=(500, 3))

        model = fit_em(x, 1, seed=0)

        np.testing.assert_allclose(model.weights, [1.0])
        np.testing.assert_allclose(model.means[0], x.mean(axis=0), rtol=1e-10)
        np.testing.assert_allclose(model.variances[0], x.var(axis=0), rtol=1e-8)

    def test_recovers_two_clusters(self):
        """Test that two well-separated clusters are recovered."""
        rng = np.random.default_rng(1)
        x = np.concatenate([rng.normal(-5, 1, 2000), rng.normal(5, 1, 2000)])[:, None]

        model = fit_em(x, 2, seed=3)

        order = np.argsort(model.means[:, 0])
        np.testing.assert_allclose(model.means[order, 0], [-5.0, 5.0], atol=0.1)
        np.testing.assert_allclose(model.weights[order], [0.5, 0.5], atol=0.02)
        np.testing.assert_allclose(model.variances[order, 0], [1.0, 1.0], atol=0.1)

    def test_duplicated_frames_give_identical_model(self):
        """Test that repeating every frame leaves the fitted model unchanged."""
        rng = np.random.default_rng(2)
        x = rng.standard_normal((300, 4))

        once = fit_em(x, 3, seed=5)
        twice = fit_em(np.vstack([x, x]), 3, seed=5)

        np.testing.assert_allclose(once.weights, twice.weights, rtol=1e-12)
        np.testing.assert_allclose(once.means, twice.means, rtol=1e-12)
        np.testing.assert_allclose(once.variances, twice.variances, rtol=1e-12)

    def test_same_seed_same_model(self):
        """Test that training is deterministic for a fixed seed."""
        x = np.random.default_rng(3).standard_normal((400, 2))
        a = fit_em(x, 4, seed=11)
        b = fit_em(x, 4, seed=11)
        np.testing.assert_array_equal(a.means, b.means)

    def test_log_likelihood_is_monotone(self):
        """Test that the mean log-likelihood never decreases between iterations."""
        rng = np.random.default_rng(4)
        x = np.vstack([rng.normal(0, 1, (400, 2)), rng.normal(3, 0.5, (300, 2))])

        _, trace = fit_em_trace(x, GmmConfig(n_components=4, max_iter=40, rel_tol=0.0), seed=0)

        assert trace.n_iter == 40
        assert (np.diff(trace.log_likelihood) >= -1e-8).all()

    def test_log_likelihood_is_monotone_on_random_data(self):
        """Test monotone EM over many small random datasets and mixture sizes."""
        rng = np.random.default_rng(40)
        for _ in range(200):
            dim = int(rng.integers(1, 9))
            k = int(rng.integers(1, 17))
            centers = rng.normal(0.0, 3.0, (int(rng.integers(1, 5)), dim))
            n = int(rng.integers(k, 4 * k + 40))
            x = centers[rng.integers(0, centers.shape[0], n)] + rng.normal(0.0, 1.0, (n, dim))
            config = GmmConfig(n_components=k, max_iter=15, rel_tol=0.0, rescue_fraction=0.0)

            _, trace = fit_em_trace(x, config, seed=int(rng.integers(0, 2**31)))

            ll = np.asarray(trace.log_likelihood)
            assert (np.diff(ll) >= -1e-8 * np.maximum(1.0, np.abs(ll[:-1]))).all()

    def test_without_kmeans_refinement(self):
        """Test that initialising straight from the k-means++ centres still fits valid models."""
        rng = np.random.default_rng(41)
        x = np.concatenate([rng.normal(-5, 1, 500), rng.normal(5, 1, 500)])[:, None]

        model = fit_em(x, 2, seed=0, kmeans_iter=0)

        order = np.argsort(model.means[:, 0])
        np.testing.assert_allclose(model.means[order, 0], [-5.0, 5.0], atol=0.2)
        assert model.weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_parameters_stay_valid(self):
        """Test that weights lie on the simplex and variances respect the floor."""
        rng = np.random.default_rng(5)
        x = np.column_stack([rng.standard_normal(500), np.zeros(500)])
        config = GmmConfig(n_components=3, variance_floor=1e-4)

        model, _ = fit_em_trace(x, config, seed=0)

        assert (model.weights > 0).all()
        assert model.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert (model.variances >= 1e-4).all()
        assert model.variances[:, 1] == pytest.approx(1e-4)

    def test_too_few_frames(self):
        """Test that fewer frames than components raises InsufficientDataError."""
        with pytest.raises(InsufficientDataError):
            fit_em(np.zeros((3, 2)) + np.arange(3)[:, None], 4, seed=0)

    def test_too_few_distinct_frames(self):
        """Test that repeated frames do not count as distinct data."""
        with pytest.raises(InsufficientDataError, match="distinct"):
            fit_em(np.ones((100, 2)), 2, seed=0)

    def test_non_finite_frames(self):
        """Test that NaN frames raise NonFiniteDataError."""
        x = np.random.default_rng(0).standard_normal((50, 2))
        x[7, 1] = np.nan
        with pytest.raises(NonFiniteDataError, match="1 training frame"):
            fit_em(x, 2, seed=0)

    def test_default_components(self):
        """Test that the default mixture has 512 components."""
        assert GmmConfig().n_components == 512


class TestLogDensity:
    """Tests for log_density."""

    def test_standard_normal_at_zero(self):
        """Test the 1-D standard normal log-density at its mean."""
        assert log_density(gmm([[0.0]]), [0.0]) == pytest.approx(-0.5 * math.log(2 * math.pi))
        assert log_density(gmm([[0.0]]), [0.0]) == pytest.approx(-0.91894, abs=1e-5)

    def test_equal_components_collapse(self):
        """Test that two identical components equal a single one."""
        x = np.array([0.3, -1.2])
        one = gmm([[1.0, 0.0]], [[2.0, 0.5]])
        two = gmm([[1.0, 0.0], [1.0, 0.0]], [[2.0, 0.5], [2.0, 0.5]])

        assert log_density(two, x) == pytest.approx(log_density(one, x), abs=1e-12)

    def test_matches_direct_summation(self):
        """Test against a direct sum over components and dimensions for random models."""
        rng = np.random.default_rng(6)
        for _ in range(100):
            k, dim = int(rng.integers(1, 9)), int(rng.integers(1, 7))
            weights = rng.dirichlet(np.ones(k))
            means = rng.standard_normal((k, dim))
            variances = rng.uniform(0.2, 3.0, (k, dim))
            model = gmm(means, variances, weights)
            for x in rng.standard_normal((5, dim)):
                expected = direct_log_density(model, x)
                assert log_density(model, x) == pytest.approx(expected, abs=1e-9)

    def test_far_frame_is_finite(self):
        """Test that a frame far from every component stays finite."""
        value = log_density(gmm([[0.0], [1.0]]), [1e4])
        assert math.isfinite(value)
        assert value < -1e7

    def test_dimension_mismatch(self):
        """Test that a frame of the wrong size raises FeatureError."""
        with pytest.raises(FeatureError):
            log_density(gmm([[0.0, 0.0]]), [0.0])


class TestScore:
    """Tests for detector scoring."""

    def test_identical_models_score_zero(self):
        """Test that equal class models give a zero score."""
        frames = lfcc_frames(np.random.default_rng(0).standard_normal((20, DIM)))
        assert score(detector(), frames) == pytest.approx(0.0, abs=1e-12)

    def test_sign_follows_the_closer_model(self):
        """Test that frames near the spoof model score positive."""
        det = detector(bona_mean=0.0, spoof_mean=2.0)
        near_spoof = lfcc_frames(np.full((5, DIM), 2.0))
        near_bona = lfcc_frames(np.zeros((5, DIM)))

        assert score(det, near_spoof) > 0
        assert score(det, near_bona) < 0

    def test_mean_of_frame_ratios(self):
        """Test that the score is the mean per-frame log-likelihood ratio."""
        det = detector(bona_mean=0.0, spoof_mean=0.5)
        values = np.random.default_rng(1).standard_normal((30, DIM))

        llr = log_density_frames(det.spoof_model, values) - log_density_frames(
            det.bona_model, values
        )

        assert score(det, lfcc_frames(values)) == pytest.approx(llr.mean(), rel=1e-12)

    def test_frame_order_does_not_matter(self):
        """Test that permuting frames leaves the score unchanged."""
        det = detector(bona_mean=0.0, spoof_mean=0.5)
        values = np.random.default_rng(2).standard_normal((30, DIM))
        shuffled = values[np.random.default_rng(3).permutation(30)]

        assert score(det, lfcc_frames(shuffled)) == pytest.approx(
            score(det, lfcc_frames(values)), abs=1e-9
        )

    def test_wrong_feature_kind(self):
        """Test that MFCC features are refused by an LFCC detector."""
        feat = FeatureMatrix(values=np.zeros((3, DIM)), kind=FeatureKind.MFCC, frame_hop_ms=10)
        with pytest.raises(FeatureError):
            score(detector(), feat)

    def test_score_cached_matches_direct(self, tmp_path):
        """Test that cached scoring returns the same values for any job count."""
        det = detector(bona_mean=0.0, spoof_mean=0.3)
        cache = FeatureCache(tmp_path / "cache")
        cache.write_config(det.feature_config)
        rng = np.random.default_rng(4)
        feats = {f"u{i}": lfcc_frames(rng.standard_normal((10, DIM))) for i in range(5)}
        for utt_id, feat in feats.items():
            cache.write(utt_id, feat)

        serial = score_cached(det, list(feats), cache, jobs=1)
        parallel = score_cached(det, list(feats), cache, jobs=2)

        assert list(serial) == list(feats)
        assert serial == parallel
        assert serial["u3"] == score(det, feats["u3"])

    def test_score_cached_rejects_other_configuration(self, tmp_path):
        """Test that a cache of another LFCC preset is not scored by the detector."""
        det = detector()
        cache = FeatureCache(tmp_path / "cache")
        cache.write_config(FeatureConfig.lfcc("M01"))
        cache.write("u0", lfcc_frames(np.zeros((10, DIM))))

        with pytest.raises(FeatureError, match="different configuration"):
            score_cached(det, ["u0"], cache)


class TestDetector:
    """Tests for two-class training and model files."""

    def test_seeds_are_derived_deterministically(self):
        """Test that class seeds differ from each other and repeat for the same seed."""
        bona, spoof = derive_seeds(42)
        assert bona != spoof
        assert derive_seeds(42) == (bona, spoof)
        assert derive_seeds(43) != (bona, spoof)

    def test_train_and_round_trip(self, tmp_path):
        """Test that a saved detector loads back with identical parameters and scores."""
        rng = np.random.default_rng(7)
        bona = [lfcc_frames(rng.normal(0.0, 1.0, (40, DIM))) for _ in range(3)]
        spoof = [lfcc_frames(rng.normal(1.0, 1.0, (40, DIM))) for _ in range(3)]
        det = train_detector(
            bona,
            spoof,
            FeatureConfig.lfcc(),
            seed=1,
            gmm_config=GmmConfig(n_components=2),
            dataset_id="unit",
        )

        loaded = load_detector(save_detector(det, tmp_path / "det.json"))

        np.testing.assert_array_equal(loaded.bona_model.means, det.bona_model.means)
        np.testing.assert_array_equal(loaded.spoof_model.variances, det.spoof_model.variances)
        assert loaded.feature_config == det.feature_config
        assert loaded.dataset_id == "unit"
        assert score(loaded, spoof[0]) == score(det, spoof[0])
        assert score(det, spoof[0]) > score(det, bona[0])

    def test_dimension_mismatch_with_config(self):
        """Test that features of the wrong width are refused."""
        x = np.random.default_rng(0).standard_normal((50, 10))
        with pytest.raises(FeatureError, match="dims"):
            train_detector(x, x, FeatureConfig.lfcc(), seed=0, gmm_config=GmmConfig(n_components=2))

    def test_empty_class(self):
        """Test that a class without frames raises InsufficientDataError."""
        x = np.random.default_rng(0).standard_normal((50, DIM))
        with pytest.raises(InsufficientDataError):
            train_detector(x, [], FeatureConfig.lfcc(), seed=0)

    def test_missing_model_file(self, tmp_path):
        """Test that a missing model file raises ModelFileError."""
        with pytest.raises(ModelFileError, match="not found"):
            load_detector(tmp_path / "nope.json")

    def test_invalid_model_file(self, tmp_path):
        """Test that a malformed model file raises ModelFileError."""
        path = tmp_path / "bad.json"
        path.write_text('{"format": "spoofaudit.detector/1"}')
        with pytest.raises(ModelFileError, match="Invalid"):
            load_detector(path)

    @pytest.mark.parametrize(
        ("field", "index", "value", "match"),
        [
            ("variances", (0, 0), -1.0, "variances"),
            ("variances", (0, 1), 0.0, "variances"),
            ("weights", (0,), 0.5, "sum to"),
            ("weights", (0,), -1.0, "non-negative"),
        ],
    )
    def test_edited_model_file_is_rejected(self, tmp_path, field, index, value, match):
        """Test that out-of-range mixture parameters in a model file raise ModelFileError."""
        path = save_detector(detector(), tmp_path / "gmm.json")
        doc = json.loads(path.read_text())
        target = doc["bona_model"][field]
        for i in index[:-1]:
            target = target[i]
        target[index[-1]] = value
        path.write_text(json.dumps(doc))

        with pytest.raises(ModelFileError, match=match):
            load_detector(path)
