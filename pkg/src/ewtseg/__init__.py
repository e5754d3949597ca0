"""Unsupervised texture segmentation with empirical wavelet features.

The pieces compose left to right: cartoon+texture decomposition
(`decompose`), adaptive or fixed filter banks (`transform` and the
modules behind it), windowed feature maps (`compute_features`),
clustering (`cluster`), and region-overlap scoring (`report`).
`segment` and `run_pipeline` chain them; `run_benchmark` sweeps
option grids over generated mosaic datasets.
"""

__version__ = "0.1.0"

from .bench import BenchGrid, BenchResult, run_benchmark
from .cartoon import (DecompositionConfig, DecompositionResult,
                      decompose, decompose_auto, default_params)
from .classic import (dwt_decimated, dwt_undecimated, gabor_bank, meyer_lp,
                      packet_best_basis, prescribed_curvelet)
from .clustering import ClusterConfig, Partition, cluster, kmeans, nystrom
from .ewt2d import (CoefficientStack, FilterBank, apply_bank,
                    detect_radial_boundaries, ewt2d_curvelet, ewt2d_lp,
                    ewt2d_tensor, reconstruct)
from .features import (FeatureField, PostProcessConfig, compute_features,
                       load_features, save_features)
from .imgio import (ImageFormatError, load_image, load_labels, save_image,
                    save_labels)
from .metrics import ContingencyTable, MetricReport, contingency, report
from .modes import BoundarySet, detect_boundaries_1d
from .mosaic import (MASK_LAYOUTS, MosaicSpec, build_mask, compose_mosaic,
                     generate_dataset, load_dataset, noise_texture,
                     sinusoid_texture, texture_pool)
from .pipeline import (WAVELET_FAMILIES, RunConfig, StageError,
                       run_pipeline, segment, transform)

__all__ = [name for name in dir() if not name.startswith("_")]
