"""White blood cell image classification on the SPD manifold.

The pipeline: Lab conversion, a-channel equalization, mixture-model pixel
clustering and morphological cleanup for segmentation; region covariance
descriptors over the nucleus; classification by minimum Riemannian
distance to class means or by tangent-space LDA.
"""

from .classify import (
    ConfusionMatrix,
    LabeledSample,
    MdrmModel,
    TsldaModel,
    evaluate,
    load_model,
    mdrm_distances,
    mdrm_predict,
    mdrm_train,
    predict,
    save_model,
    tslda_predict,
    tslda_scores,
    tslda_train,
)
from .colorspace import extract_lab_channels, rgb_to_xyz, xyz_to_lab
from .config import PipelineConfig, load_config, parse_config
from .covdesc import (
    FEATURE_NAMES,
    CovarianceIntegral,
    feature_map,
    load_spd_text,
    region_covariance,
    region_covariance_fast,
    save_spd_text,
)
from .dataset import DatasetManifest, scan_dataset, split_manifest, stratified_split
from .errors import (
    DataError,
    DegenerateInputError,
    DimensionMismatchError,
    EmptyClassError,
    NonSymmetricError,
    NotPositiveDefiniteError,
    NumericError,
    RegionTooSmallError,
    RiemcyteError,
    SingularScatterError,
    UsageError,
)
from .imgio import load_image, save_image, save_mask
from .pipeline import Segmentation, descriptor_from_image, descriptor_from_path, segment_image
from .preprocess import (
    GaussianMixture1D,
    Roi,
    classify_pixels,
    extract_rois,
    fill_holes,
    fit_gmm3,
    hist_equalize,
    morph_open,
    quantize_plane,
    remove_small_components,
    select_foreground,
)
from .spdgeom import (
    EigenPair,
    MeanResult,
    euclidean_mean,
    exp_map,
    log_map,
    metric_inner,
    riemann_distance,
    riemannian_mean,
    spd_exp,
    spd_log,
    sym_eig,
    tangent_coords,
    unupper_vec,
    upper_vec,
)

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix",
    "CovarianceIntegral",
    "DataError",
    "DatasetManifest",
    "DegenerateInputError",
    "DimensionMismatchError",
    "EigenPair",
    "EmptyClassError",
    "FEATURE_NAMES",
    "GaussianMixture1D",
    "LabeledSample",
    "MdrmModel",
    "MeanResult",
    "NonSymmetricError",
    "NotPositiveDefiniteError",
    "NumericError",
    "PipelineConfig",
    "RegionTooSmallError",
    "RiemcyteError",
    "Roi",
    "Segmentation",
    "SingularScatterError",
    "TsldaModel",
    "UsageError",
    "classify_pixels",
    "descriptor_from_image",
    "descriptor_from_path",
    "euclidean_mean",
    "evaluate",
    "exp_map",
    "extract_lab_channels",
    "extract_rois",
    "feature_map",
    "fill_holes",
    "fit_gmm3",
    "hist_equalize",
    "load_config",
    "load_image",
    "load_model",
    "load_spd_text",
    "log_map",
    "mdrm_distances",
    "mdrm_predict",
    "mdrm_train",
    "metric_inner",
    "morph_open",
    "parse_config",
    "predict",
    "quantize_plane",
    "region_covariance",
    "region_covariance_fast",
    "remove_small_components",
    "rgb_to_xyz",
    "riemann_distance",
    "riemannian_mean",
    "save_image",
    "save_mask",
    "save_model",
    "save_spd_text",
    "scan_dataset",
    "segment_image",
    "select_foreground",
    "spd_exp",
    "spd_log",
    "split_manifest",
    "stratified_split",
    "sym_eig",
    "tangent_coords",
    "tslda_predict",
    "tslda_scores",
    "tslda_train",
    "unupper_vec",
    "upper_vec",
    "xyz_to_lab",
]
