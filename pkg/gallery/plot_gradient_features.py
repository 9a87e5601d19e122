"""
Gradient direction features
===========================

A 16x16 image is binarized, differentiated with 3x3 Sobel kernels and
each pixel gradient is split onto its two neighbouring compass directions.
Summing each direction plane over an N x N block grid gives 8*N*N values.
"""

import numpy as np

from knnsvm.features import (GradientConfig, binarize, decompose_to_planes, direction_unit,
                             extract_gradient_features, magnitude_phase, sobel_gradients)

# a filled square: four straight edges
img = np.zeros((16, 16), np.uint8)
img[4:12, 4:12] = 255

gx, gy = sobel_gradients(binarize(img, 128))
mag, phase = magnitude_phase(gx, gy)
planes = decompose_to_planes(mag, phase)
print("plane sums by direction (0=E, 2=N, ...):", planes.sum(axis=(1, 2)).round(1))

# the two components of each pixel add back up to the original gradient
units = np.array([direction_unit(k) for k in range(8)])
recon = np.einsum("khw,kd->hwd", planes, units)
print("max reconstruction error:", np.abs(recon[..., 0] - gx).max(), np.abs(recon[..., 1] - gy).max())

feats = extract_gradient_features(img, GradientConfig(n_blocks=4))
print("feature length:", feats.shape[0])
print("block 0 (top-left corner), 8 planes:", feats[:8])
