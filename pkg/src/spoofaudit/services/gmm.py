"""Diagonal-covariance GMMs trained by EM, and the two-class detector built from them.

Training frames are first collapsed to distinct rows with multiplicities, so every sum
below is a weighted sum over distinct frames taken in a fixed order.
"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from pydantic import ValidationError
from scipy.special import logsumexp
from sklearn.cluster import KMeans, kmeans_plusplus
from sklearn.metrics import pairwise_distances_argmin

from spoofaudit.errors import (
    FeatureError,
    InsufficientDataError,
    ModelFileError,
    NonFiniteDataError,
)
from spoofaudit.models.features import FeatureMatrix
from spoofaudit.models.gmm import DetectorModel, FitTrace, GmmModel
from spoofaudit.schemas.features import FeatureConfig
from spoofaudit.schemas.gmm import DetectorFile, GmmConfig
from spoofaudit.services.cache import FeatureCache
from spoofaudit.utils.provenance import build_provenance

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
MIN_WEIGHT = 1e-12


def _as_frames(frames) -> np.ndarray:
    if isinstance(frames, FeatureMatrix):
        frames = frames.values
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise FeatureError(f"frames must be a 2-D array, got {x.ndim}-D")
    return x


def _component_log_prob(x: np.ndarray, weights, means, variances) -> np.ndarray:
    """log w_k + log N(x; mu_k, diag var_k) for every row of ``x`` and component k."""
    precision = 1.0 / variances
    const = np.log(weights) - 0.5 * (
        x.shape[1] * LOG_2PI
        + np.log(variances).sum(axis=1)
        + (means * means * precision).sum(axis=1)
    )
    return const - 0.5 * ((x * x) @ precision.T) + x @ (means * precision).T


def log_density_frames(model: GmmModel, frames) -> np.ndarray:
    x = _as_frames(frames)
    if x.shape[1] != model.dim:
        raise FeatureError(f"frame dim {x.shape[1]} does not match model dim {model.dim}")
    lp = _component_log_prob(x, model.weights, model.means, model.variances)
    return logsumexp(lp, axis=1)


def log_density(model: GmmModel, frame) -> float:
    """log sum_k w_k N(frame; mu_k, diag var_k)."""
    x = np.asarray(frame, dtype=np.float64).reshape(-1)
    if x.shape[0] != model.dim:
        raise FeatureError(f"frame has {x.shape[0]} values, model dim is {model.dim}")
    return float(log_density_frames(model, x[None, :])[0])


def _compress(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    unique, counts = np.unique(x, axis=0, return_counts=True)
    return unique, counts.astype(np.float64)


def _weighted_moments(x, counts, labels, k):
    mass = np.bincount(labels, weights=counts, minlength=k)
    s1 = np.zeros((k, x.shape[1]))
    s2 = np.zeros((k, x.shape[1]))
    np.add.at(s1, labels, counts[:, None] * x)
    np.add.at(s2, labels, counts[:, None] * x * x)
    return mass, s1, s2


def _initialize(x, counts, config: GmmConfig, seed: int):
    k = config.n_components
    centers, _ = kmeans_plusplus(x, k, sample_weight=counts, random_state=seed)
    if config.kmeans_iter > 0:
        km = KMeans(
            n_clusters=k, init=centers, n_init=1, max_iter=config.kmeans_iter, random_state=seed
        ).fit(x, sample_weight=counts)
        centers, labels = km.cluster_centers_, km.labels_
    else:
        labels = pairwise_distances_argmin(x, centers)

    n = counts.sum()
    global_mean = (counts[:, None] * x).sum(axis=0) / n
    global_var = np.maximum(
        (counts[:, None] * (x - global_mean) ** 2).sum(axis=0) / n, config.variance_floor
    )

    mass, s1, s2 = _weighted_moments(x, counts, labels, k)
    means = centers.copy()
    variances = np.tile(global_var, (k, 1))
    spread = mass > 1
    means[spread] = s1[spread] / mass[spread, None]
    variances[spread] = np.maximum(
        s2[spread] / mass[spread, None] - means[spread] ** 2, config.variance_floor
    )
    weights = np.maximum(mass / n, MIN_WEIGHT)
    return weights / weights.sum(), means, variances, global_var


def fit_em_trace(frames, config: GmmConfig, seed: int) -> tuple[GmmModel, FitTrace]:
    """Fit a diagonal GMM and return it with its per-iteration log-likelihood trace."""
    x = _as_frames(frames)
    n_frames, dim = x.shape
    k = config.n_components
    if dim < 1:
        raise FeatureError("frames must have at least one dimension")
    if n_frames < k:
        raise InsufficientDataError(f"{n_frames} frame(s) cannot support {k} components")
    if not np.all(np.isfinite(x)):
        bad = int(np.count_nonzero(~np.all(np.isfinite(x), axis=1)))
        raise NonFiniteDataError(f"{bad} training frame(s) contain NaN or infinite values")

    x, counts = _compress(x)
    if x.shape[0] < k:
        raise InsufficientDataError(
            f"only {x.shape[0]} distinct frame(s) for {k} components ({n_frames} frames total)"
        )
    n = counts.sum()

    weights, means, variances, global_var = _initialize(x, counts, config, seed)

    history: list[float] = []
    converged = False
    rescued = 0
    for iteration in range(config.max_iter):
        mass = np.zeros(k)
        s1 = np.zeros((k, dim))
        s2 = np.zeros((k, dim))
        frame_ll = np.empty(x.shape[0])
        for start in range(0, x.shape[0], config.chunk_size):
            block = x[start : start + config.chunk_size]
            c = counts[start : start + config.chunk_size]
            lp = _component_log_prob(block, weights, means, variances)
            lse = logsumexp(lp, axis=1)
            frame_ll[start : start + block.shape[0]] = lse
            resp = np.exp(lp - lse[:, None]) * c[:, None]
            mass += resp.sum(axis=0)
            s1 += resp.T @ block
            s2 += resp.T @ (block * block)

        ll = float((counts * frame_ll).sum() / n)
        history.append(ll)
        logger.debug(f"EM iteration {iteration + 1}: mean log-likelihood {ll:.8f}")

        safe = np.maximum(mass, np.finfo(np.float64).tiny)
        means = s1 / safe[:, None]
        variances = np.maximum(s2 / safe[:, None] - means * means, config.variance_floor)
        weights = mass / n

        starved = np.flatnonzero(mass < config.rescue_fraction * n)
        if starved.size:
            # Re-seed at the worst-explained distinct frames
            order = np.argsort(frame_ll, kind="stable")[: starved.size]
            means[starved] = x[order]
            variances[starved] = global_var
            rescued += int(starved.size)
            logger.debug(f"Re-seeded {starved.size} starved component(s)")
        weights = np.maximum(weights, MIN_WEIGHT)
        weights = weights / weights.sum()

        if len(history) > 1:
            prev = history[-2]
            if abs(ll - prev) / max(abs(prev), np.finfo(np.float64).tiny) < config.rel_tol:
                converged = True
                break

    model = GmmModel(weights=weights, means=means, variances=variances)
    trace = FitTrace(log_likelihood=history, converged=converged, rescued_components=rescued)
    status = "converged" if converged else "stopped at max_iter"
    logger.info(
        f"GMM fit ({k} components, dim {dim}, {n_frames} frames): {status} after "
        f"{trace.n_iter} iteration(s), mean log-likelihood {history[-1]:.4f}"
    )
    return model, trace


def fit_em(
    frames,
    n_components: int,
    seed: int,
    max_iter: int = 100,
    rel_tol: float = 1e-6,
    **options,
) -> GmmModel:
    config = GmmConfig(n_components=n_components, max_iter=max_iter, rel_tol=rel_tol, **options)
    model, _ = fit_em_trace(frames, config, seed)
    return model


def score(detector: DetectorModel, feat: FeatureMatrix) -> float:
    """Mean per-frame log-likelihood ratio, spoof over bona fide. Positive leans synthetic."""
    if feat.kind is not detector.feature_config.kind:
        raise FeatureError(
            f"detector expects {detector.feature_config.kind.value} features, got {feat.kind.value}"
        )
    if feat.n_frames == 0:
        raise FeatureError("cannot score an empty feature matrix")
    llr = log_density_frames(detector.spoof_model, feat.values) - log_density_frames(
        detector.bona_model, feat.values
    )
    return float(llr.mean())


def _stack(features: Sequence[FeatureMatrix] | np.ndarray) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return _as_frames(features)
    if isinstance(features, FeatureMatrix):
        return features.values
    if not features:
        return np.empty((0, 0))
    return np.vstack([f.values for f in features])


def derive_seeds(seed: int) -> tuple[int, int]:
    """Independent (bona, spoof) seeds from one detector seed."""
    bona, spoof = np.random.SeedSequence(seed).generate_state(2)
    return int(bona), int(spoof)


def train_detector(
    bona_features: Sequence[FeatureMatrix] | np.ndarray,
    spoof_features: Sequence[FeatureMatrix] | np.ndarray,
    cfg: FeatureConfig,
    seed: int,
    gmm_config: GmmConfig | None = None,
    dataset_id: str = "",
) -> DetectorModel:
    gmm_config = gmm_config or GmmConfig()
    bona = _stack(bona_features)
    spoof = _stack(spoof_features)
    if bona.size == 0 or spoof.size == 0:
        raise InsufficientDataError("both classes need at least one training frame")
    if bona.shape[1] != spoof.shape[1]:
        raise FeatureError(f"class feature dims differ: {bona.shape[1]} vs {spoof.shape[1]}")
    if bona.shape[1] != cfg.output_dims:
        raise FeatureError(
            f"training features have {bona.shape[1]} dims, {cfg.kind.value} config gives "
            f"{cfg.output_dims}"
        )

    bona_seed, spoof_seed = derive_seeds(seed)
    logger.info(
        f"Training detector: {bona.shape[0]} bona fide / {spoof.shape[0]} spoof frames, "
        f"{gmm_config.n_components} components, seed {seed}"
    )
    bona_model, _ = fit_em_trace(bona, gmm_config, bona_seed)
    spoof_model, _ = fit_em_trace(spoof, gmm_config, spoof_seed)
    return DetectorModel(
        bona_model=bona_model,
        spoof_model=spoof_model,
        feature_config=cfg,
        seed=seed,
        dataset_id=dataset_id,
    )


def save_detector(
    detector: DetectorModel, path: Path, gmm_config: GmmConfig | None = None
) -> Path:
    provenance = build_provenance(
        "train-gmm",
        {
            "seed": detector.seed,
            "dataset_id": detector.dataset_id,
            "feature_config": detector.feature_config.model_dump(mode="json"),
            "gmm_config": gmm_config.model_dump(mode="json") if gmm_config else None,
        },
    )
    doc = DetectorFile.from_detector(detector, gmm_config, provenance)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(doc.model_dump_json(indent=2) + "\n")
    return path


def load_detector(path: Path) -> DetectorModel:
    path = Path(path)
    if not path.is_file():
        raise ModelFileError(f"Model file not found: {path}")
    try:
        doc = DetectorFile.model_validate_json(path.read_text())
        return doc.to_detector()
    except (ValidationError, ValueError) as e:
        raise ModelFileError(f"Invalid model file {path}: {e}") from e


# Worker state for process-parallel scoring
_worker_detector: DetectorModel | None = None
_worker_cache: FeatureCache | None = None


def _init_worker(detector: DetectorModel, root: str) -> None:
    global _worker_detector, _worker_cache
    _worker_detector = detector
    _worker_cache = FeatureCache(Path(root))


def _score_in_worker(utt_id: str) -> float:
    return score(_worker_detector, _worker_cache.read(utt_id))


def score_cached(
    detector: DetectorModel, ids: Sequence[str], cache: FeatureCache, jobs: int = 1
) -> dict[str, float]:
    """Score cached features of ``ids``, in order. Values do not depend on ``jobs``.

    The cache must hold features of the configuration the detector was trained on.
    """
    cached = cache.read_config()
    if cached != detector.feature_config:
        raise FeatureError(
            f"{cache.root} holds features made with a different configuration than the "
            f"detector was trained on (cache: {cached.model_dump_json()}, "
            f"detector: {detector.feature_config.model_dump_json()})"
        )
    if jobs <= 1 or len(ids) <= 1:
        values = [score(detector, cache.read(i)) for i in ids]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=(detector, str(cache.root))
        ) as pool:
            values = list(pool.map(_score_in_worker, ids, chunksize=16))
    logger.info(f"Scored {len(values)} utterance(s) with detector {detector.dataset_id or '-'}")
    return dict(zip(ids, values, strict=True))
