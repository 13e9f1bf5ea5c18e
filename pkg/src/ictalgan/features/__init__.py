"""Wavelet, entropy and band-power features of EEG windows."""

from .extract import FEATURE_NAMES, extract_features, feature_names, write_feature_csv

__all__ = ["FEATURE_NAMES", "extract_features", "feature_names", "write_feature_csv"]
