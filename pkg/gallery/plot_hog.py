"""
Histogram of oriented gradients
===============================

Unsigned 9-bin orientation histograms over 4x4 cells, grouped into
overlapping 2x2-cell blocks and L2-normalized. A 28x28 image gives
6 x 6 blocks of 36 values, 1296 in total.
"""

import numpy as np

from knnsvm.features import HogConfig, cell_histograms, extract_hog

cfg = HogConfig(cell_size=4)

# vertical stripe: horizontal gradients only, so everything lands in bin 0
img = np.zeros((28, 28))
img[:, 12:16] = 255
hist = cell_histograms(img, cfg)
print("cell grid:", hist.shape[:2], "bins:", hist.shape[2])
print("total votes per bin:", hist.sum(axis=(0, 1)).round(1))

v = extract_hog(img, cfg)
print("descriptor length:", v.shape[0], "expected:", cfg.output_length(28, 28))

# a blank image has no gradients, and the epsilon keeps normalization finite
print("blank image is all zeros:", not extract_hog(np.zeros((28, 28)), cfg).any())
