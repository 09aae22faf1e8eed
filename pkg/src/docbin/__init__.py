"""Hybrid document-image binarization with DIBCO-style evaluation."""
from .config import RunConfig, load_config
from .enhance import ClaheParams, clahe, gate_and_enhance, local_average_contrast, michelson_contrast
from .hybrid import (
    ContrastCategory,
    HybridParams,
    classify_contrast,
    detect_smear,
    hybrid_binarize,
    run_pipeline,
    select_global_threshold,
)
from .metrics import confusion, drd, evaluate, f_measure, nubn, pseudo_f_measure, psnr, rank_scores
from .postprocess import PostprocessParams, postprocess
from .raster import (connected_components, histogram, integral, load_binary, load_gray,
                     local_mean_std, save_binary, save_gray)
from .threshold_global import apply_threshold, otsu, tsmo
from .threshold_local import LocalParams, bernsen, niblack, nick, nick_region, sauvola

__version__ = "0.1.0"
