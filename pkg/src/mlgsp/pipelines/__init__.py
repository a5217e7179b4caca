from .compression import METHODS, CompressionReport, compress_rgb, synthetic_icon
from .edges import PANEL_LABELS, EdgePanel, edge_detect_pipeline
from .metrics import boundary_accuracy, boundary_map, metrics, mse, psnr
from .segmentation import (
    SegmentationResult,
    gsp_baseline,
    kmeans_baseline,
    planted_cube,
    segment_hsi,
    singular_gap_select,
)

__all__ = [
    "METHODS",
    "CompressionReport",
    "compress_rgb",
    "synthetic_icon",
    "PANEL_LABELS",
    "EdgePanel",
    "edge_detect_pipeline",
    "boundary_accuracy",
    "boundary_map",
    "metrics",
    "mse",
    "psnr",
    "SegmentationResult",
    "gsp_baseline",
    "kmeans_baseline",
    "planted_cube",
    "segment_hsi",
    "singular_gap_select",
]
