"""weathershift: adverse-weather augmentation for small-object detection.

Procedurally renders desk-scale cone scenes, learns unpaired sunny-to-adverse
style transfer, synthesizes label-preserving augmented datasets, scores their
realism with a Frechet distance over image features, and measures how the
augmentation moves detector mAP across a full experiment matrix.
"""

__version__ = "0.1.0"

from .dataset import (  # noqa: F401
    BoundingBox,
    Condition,
    Dataset,
    ImageRecord,
    load_manifest,
    merge_datasets,
    save_manifest,
    split_dataset,
    validate_dataset,
)
from .errors import AnalysisError, ConfigError, DataError, WeathershiftError  # noqa: F401
