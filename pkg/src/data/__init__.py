# Dataset module
from .dataset import (
    ActivityVocabulary,
    BinaryLabel,
    Dataset,
    Record,
    load_canonical,
    save_canonical,
)
from .splits import SplitSpec, shuffle_split, split_indices, stratified_subset
