"""Mask synthesis, expansion, and evaluation tools for inpainting-based
object removal.

The package splits into:

* image      - image/mask/label-map containers, Canny edges, PNG I/O
* sdf        - exact Euclidean distance transforms and signed distance fields
* morphology - Euclidean-disk dilation and erosion
* losses     - boundary, mask-expansion, reconstruction, style, adversarial,
               and cross-entropy losses plus their weighted totals
* synth      - copy-paste paired-dataset generation and random masks
* inpaint    - classical diffusion and fast-marching inpainting backends
* expansion  - segment selection, soft-mask optimization, mask expansion
* metrics    - PSNR/SSIM and bin-wise aggregation
* experiments- sweep harness and figure renders (CLI in inpaintmask.cli)
"""

from .expansion import (
    CoverageStats,
    binarize,
    coverage_stats,
    expand_for_inpainting,
    expand_mask,
    optimize_soft_mask,
    select_segment,
)
from .image import (
    BinaryMask,
    Image,
    LabelMap,
    apply_mask,
    canny_edges,
    load_image,
    load_label_map,
    load_mask,
    save_image,
    save_label_map,
    save_mask,
    to_grayscale,
)
from .inpaint import BACKENDS, InpaintRequest, inpaint_diffusion, inpaint_fast_march, run_inpaint
from .losses import (
    CriticScores,
    FeaturePyramid,
    LossWeights,
    SoftMask,
    boundary_loss,
    build_feature_pyramid,
    feature_matching_loss,
    gram,
    hinge_gan_losses,
    mask_expansion_loss,
    pixelwise_cross_entropy,
    reconstruction_loss,
    style_loss,
    total_loss,
)
from .metrics import MetricsRecord, aggregate, psnr, ssim
from .morphology import dilate, erode, rescale_mask
from .sdf import (
    SignedDistanceField,
    euclidean_distance_to,
    normalize_sdf,
    render_offset_map,
    signed_distance,
)
from .synth import (
    ObjectCutout,
    SampleTriplet,
    build_procedural_sources,
    extract_objects,
    generate_dataset,
    load_dataset,
    random_irregular_mask,
    superimpose,
)

__version__ = "0.1.0"
