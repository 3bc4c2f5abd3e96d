"""Cross-modal attribute insertion for image-text pairs.

Public surface: the core data model, the augmenter, fixture and remote
providers, the baseline augmenters, and the evaluation metrics.  The
``xmai`` console script in :mod:`xmai.cli` wires these into corpus runs.
"""

from .augment import augment_example, find_mask_sites, result_to_dict, select_insertion
from .baselines import delete_augment, eda_augment
from .core import (
    AugmentationConfig,
    AugmentationResult,
    Detection,
    DetectionRecord,
    MultimodalExample,
    TokenStream,
    load_corpus,
    load_detections,
    tokenize,
    validate_config,
)
from .metrics import (
    QueryRank,
    axiom_violation_rate,
    bleu,
    classification_report,
    corpus_similarity,
    count_insertions,
    meteor_lite,
    mrr,
    rank_gallery,
)
from .providers import (
    FixtureMaskFill,
    FixturePosTagger,
    FixtureTextEmbedder,
    ImageEmbeddingMap,
    ProviderBundle,
    ProviderError,
    WordEmbeddingTable,
    cosine,
)
from .rng import SplitMix64, derive_stream, fnv1a64

__version__ = "0.1.0"

__all__ = [
    "AugmentationConfig",
    "AugmentationResult",
    "Detection",
    "DetectionRecord",
    "FixtureMaskFill",
    "FixturePosTagger",
    "FixtureTextEmbedder",
    "ImageEmbeddingMap",
    "MultimodalExample",
    "ProviderBundle",
    "ProviderError",
    "QueryRank",
    "SplitMix64",
    "TokenStream",
    "WordEmbeddingTable",
    "augment_example",
    "axiom_violation_rate",
    "bleu",
    "classification_report",
    "corpus_similarity",
    "cosine",
    "count_insertions",
    "delete_augment",
    "derive_stream",
    "eda_augment",
    "find_mask_sites",
    "fnv1a64",
    "load_corpus",
    "load_detections",
    "meteor_lite",
    "mrr",
    "rank_gallery",
    "result_to_dict",
    "select_insertion",
    "tokenize",
    "validate_config",
    "__version__",
]
