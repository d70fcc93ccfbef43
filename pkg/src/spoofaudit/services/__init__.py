from spoofaudit.services.audio import load_working_audio, read_wav, resample, to_mono
from spoofaudit.services.cache import FeatureCache
from spoofaudit.services.features import extract, extract_lfcc, extract_logspec, extract_mfcc
from spoofaudit.services.gmm import fit_em, load_detector, save_detector, score, train_detector
from spoofaudit.services.harness import build_sets, evaluate_set, run_study, stuttering_study
from spoofaudit.services.metrics import calibrate, compute_eer, delta, fpr_at_threshold
from spoofaudit.services.report import render_bias_table, summarize_fluency
from spoofaudit.services.score_io import Manifest, ManifestFormat, join, load_manifest, load_scores
from spoofaudit.services.toy import toy_corpus, write_toy_corpus

__all__ = [
    "FeatureCache",
    "Manifest",
    "ManifestFormat",
    "build_sets",
    "calibrate",
    "compute_eer",
    "delta",
    "evaluate_set",
    "extract",
    "extract_lfcc",
    "extract_logspec",
    "extract_mfcc",
    "fit_em",
    "fpr_at_threshold",
    "join",
    "load_detector",
    "load_manifest",
    "load_scores",
    "load_working_audio",
    "read_wav",
    "render_bias_table",
    "resample",
    "run_study",
    "save_detector",
    "score",
    "stuttering_study",
    "summarize_fluency",
    "to_mono",
    "toy_corpus",
    "train_detector",
]
