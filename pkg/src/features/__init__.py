# Features module
from .assembler import (
    Extractor,
    FeatureConfig,
    FeatureMatrix,
    FeatureVector,
    PRIMARY_EXTRACTORS,
    assemble,
    extract_matrix,
)
from .extractors import axis_ranges, signal_energy, sma, svm_series, total_abs_svm
from .wavelets import WaveletSpec, cwt_single_scale
