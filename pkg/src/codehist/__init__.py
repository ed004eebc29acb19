"""Token-space evaluation of generative image models.

Compare models where discrete tokenizers actually operate: histograms over
codebook usage, spatial co-occurrence structure, a learned quality regressor,
and the plumbing (file formats, degradations, CLI) to run the comparisons
reproducibly.
"""

__version__ = "0.1.0"

from .baselines import (
    GaussianFit,
    fit_gaussian,
    frechet_distance,
    median_pairwise_distance,
    mmd2,
)
from .degrade import PARAM_RANGES, DegradeSpec, apply_degradation, severity_of
from .diagnostics import adjacent_mi, token_entropy
from .distances import ChdReport, alt_distance, chd, hellinger, hellinger_sparse
from .errors import FormatError, NumericError
from .harness import (
    CorrelationReport,
    SweepResult,
    correlation_report,
    kendall,
    nmse,
    pairwise_accuracy,
    sample_sweep,
    spearman,
)
from .histograms import (
    DEFAULT_DISPLACEMENTS,
    DisplacementSet,
    SparseCooccurrence,
    UnigramHistogram,
    cooccurrence,
    merge_cooccurrence,
    merge_unigram,
    unigram,
)
from .images import Image, load_image, save_image
from .manifest import RunManifest, file_digest, load_manifest, verify_inputs, write_manifest
from .palette import PaletteCodebook, build_palette, patch_means, tokenize, tokenize_all
from .token_io import (
    Codebook,
    FeatureSet,
    GridLayout,
    TokenDataset,
    load_features,
    load_tokens,
    parse_features,
    parse_tokens,
    read_features,
    read_tokens,
    read_tokens_text,
    save_features,
    save_tokens,
    write_features,
    write_tokens,
    write_tokens_text,
)

__all__ = [
    "__version__",
    "Codebook",
    "GridLayout",
    "TokenDataset",
    "FeatureSet",
    "Image",
    "FormatError",
    "NumericError",
    "DisplacementSet",
    "UnigramHistogram",
    "SparseCooccurrence",
    "DEFAULT_DISPLACEMENTS",
    "unigram",
    "cooccurrence",
    "merge_unigram",
    "merge_cooccurrence",
    "ChdReport",
    "chd",
    "hellinger",
    "hellinger_sparse",
    "alt_distance",
    "GaussianFit",
    "fit_gaussian",
    "frechet_distance",
    "mmd2",
    "median_pairwise_distance",
    "token_entropy",
    "adjacent_mi",
    "DegradeSpec",
    "PARAM_RANGES",
    "apply_degradation",
    "severity_of",
    "PaletteCodebook",
    "build_palette",
    "patch_means",
    "tokenize",
    "tokenize_all",
    "CorrelationReport",
    "SweepResult",
    "spearman",
    "kendall",
    "nmse",
    "pairwise_accuracy",
    "correlation_report",
    "sample_sweep",
    "RunManifest",
    "file_digest",
    "write_manifest",
    "load_manifest",
    "verify_inputs",
    "load_tokens",
    "save_tokens",
    "read_tokens",
    "write_tokens",
    "parse_tokens",
    "read_tokens_text",
    "write_tokens_text",
    "load_features",
    "save_features",
    "read_features",
    "write_features",
    "parse_features",
    "load_image",
    "save_image",
]
