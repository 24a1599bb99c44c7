from .entropy import approximate_entropy, binned_entropy, sample_entropy
from .manifest import (
    ExtractionQuality,
    FeatureDescriptor,
    FeatureManifest,
    FeatureVector,
    compact_manifest,
    default_manifest,
    extract_all,
    extract_matrix,
    extract_signal,
    read_features_csv,
    write_features_csv,
)
from .spectral import autoregressive_coeffs, cwt_coefficients, fft_coefficients, ricker
from .statistical import extract_statistical

__all__ = [
    "ExtractionQuality", "FeatureDescriptor", "FeatureManifest", "FeatureVector",
    "approximate_entropy", "autoregressive_coeffs", "binned_entropy", "compact_manifest",
    "cwt_coefficients", "default_manifest", "extract_all", "extract_matrix", "extract_signal",
    "extract_statistical", "fft_coefficients", "read_features_csv", "ricker",
    "sample_entropy", "write_features_csv",
]
