"""Training-free point-cloud classification and part segmentation.

Deterministic geometric operators (farthest point sampling, exact k-NN,
mean/max pooling) plus an input-adaptive Gaussian-cosine positional
encoding build shape descriptors with no learned weights; inference is
softmax-weighted similarity against a memory bank built in one pass over
the training set.
"""

from .config import (
    PipelineConfig,
    StageConfig,
    modelnet40_config,
    scanobjectnn_config,
    shapenetpart_config,
)
from .core import DispersionStats, Labels, PointCloud, canonicalize, global_dispersion
from .encoder import (
    GlobalDescriptor,
    PointDescriptors,
    StagePyramid,
    build_pyramid,
    encode_classification,
    encode_segmentation,
    stage_forward,
)
from .encoding import (
    AdaptiveParams,
    AnchorGrid,
    EncodingConfig,
    adaptive_encode,
    adaptive_params,
    fourier_encode,
    hybrid_encode,
    modulate,
)
from .geom import IndexSet, Neighborhood, fps, group, idw_interpolate, knn
from .inference import (
    ClsBank,
    PartPrediction,
    Prediction,
    SegBank,
    build_cls_bank,
    build_seg_bank,
    classify,
    evaluate_classification,
    evaluate_segmentation,
    fewshot_episode,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptiveParams",
    "AnchorGrid",
    "ClsBank",
    "DispersionStats",
    "EncodingConfig",
    "GlobalDescriptor",
    "IndexSet",
    "Labels",
    "Neighborhood",
    "PartPrediction",
    "PipelineConfig",
    "PointCloud",
    "PointDescriptors",
    "Prediction",
    "SegBank",
    "StageConfig",
    "StagePyramid",
    "adaptive_encode",
    "adaptive_params",
    "build_cls_bank",
    "build_pyramid",
    "build_seg_bank",
    "canonicalize",
    "classify",
    "encode_classification",
    "encode_segmentation",
    "evaluate_classification",
    "evaluate_segmentation",
    "fewshot_episode",
    "fourier_encode",
    "fps",
    "global_dispersion",
    "group",
    "hybrid_encode",
    "idw_interpolate",
    "knn",
    "modelnet40_config",
    "modulate",
    "scanobjectnn_config",
    "segment",
    "shapenetpart_config",
    "stage_forward",
]
