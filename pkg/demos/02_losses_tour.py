"""A tour of every loss the package computes.

Each loss is a pure function over grids, feature pyramids, or critic
scores. The weighted totals at the published weights close the tour.

Run:  python demos/02_losses_tour.py
"""

import numpy as np

from inpaintmask import (
    BinaryMask,
    CriticScores,
    Image,
    LossWeights,
    SoftMask,
    boundary_loss,
    build_feature_pyramid,
    feature_matching_loss,
    hinge_gan_losses,
    mask_expansion_loss,
    pixelwise_cross_entropy,
    reconstruction_loss,
    style_loss,
    total_loss,
)
from inpaintmask.sdf import signed_distance

rng = np.random.default_rng(42)

# --- boundary and mask-expansion losses over a signed distance field -----
mask = np.zeros((32, 32))
mask[10:22, 8:24] = 1
phi = signed_distance(BinaryMask(mask))

ideal = SoftMask(mask.astype(float))
print(f"boundary loss at the ideal mask: {boundary_loss(phi, ideal):.1f} "
      "(negative: interior distances are negative)")

for alpha in (0.0, 0.5, 2.0):
    value, grad = mask_expansion_loss(phi, ideal, alpha)
    grow = int((grad < 0).sum())
    print(f"expansion loss alpha={alpha}: value {value:8.1f}, "
          f"{grow} px with negative gradient (want mask there)")

# --- image-space losses ---------------------------------------------------
a = Image(rng.random((32, 32, 3)))
b = Image(np.clip(a.data + rng.normal(0, 0.05, a.data.shape), 0, 1))
n_masked = 64
print(f"reconstruction loss (N_M={n_masked}): {reconstruction_loss(a, b, n_masked):.4f}")

pa, pb = build_feature_pyramid(a), build_feature_pyramid(b)
print(f"style loss: {style_loss(pa, pb):.6f}")
print(f"feature matching loss: {feature_matching_loss(pa, pb):.6f}")

# --- adversarial and segmentation losses ----------------------------------
gen, disc = hinge_gan_losses(
    CriticScores(rng.normal(0.8, 0.3, 64)), CriticScores(rng.normal(-0.6, 0.3, 64))
)
print(f"hinge losses: generator {gen:.3f}, discriminator {disc:.3f}")

probs = rng.dirichlet(np.ones(4), size=(16, 16))
classes = rng.integers(0, 4, (16, 16))
print(f"pixelwise cross entropy: {pixelwise_cross_entropy(probs, classes):.3f}")

# --- weighted totals at the published weights -----------------------------
w = LossWeights()
components = {"eg": 0.5, "ef": 0.1, "sg": 0.4, "sc": 0.2,
              "ig": 0.5, "if": 0.25, "is": 0.008, "ir": 0.375, "x": 0.002}
value = total_loss(components, w, absent=("ps",))
print(f"total objective (ps absent): {value:.4f}")
print(f"the expansion term alone contributes lambda_x * L_x = {w.lambda_x * components['x']:.1f}")
