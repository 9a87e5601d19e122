"""
Hybrid classification on an MNIST split
=======================================

600 training and 100 test images per digit, HOG features. A test image
whose 3 nearest neighbours agree is labelled by 1-NN; the rest go to a
small one-vs-one SVM trained on the 18 nearest samples of every digit.

Reads the bundled prefix of the MNIST training file under tests/data.
"""

import time
from pathlib import Path

import numpy as np

from knnsvm import HogConfig, HybridConfig, SplitSpec, SvmTrainConfig, extract_hog, hybrid_classify, \
    knn_classify, load_idx_dataset, take_split
from knnsvm.features import extract_all

data = Path(__file__).resolve().parent.parent / "tests" / "data"
ds = load_idx_dataset(data / "mnist-train-7989-images.idx3-ubyte.gz",
                      data / "mnist-train-7989-labels.idx1-ubyte.gz")
train, test = take_split(ds, SplitSpec(600, 100))
print("train / test:", len(train), len(test))

t0 = time.perf_counter()
x_train = extract_all(train.images, extract_hog, HogConfig())
x_test = extract_all(test.images, extract_hog, HogConfig())
print(f"HOG features {x_train.shape[1]} wide, {time.perf_counter() - t0:.1f} s")

pred = knn_classify(x_train, train.labels, x_test, 1)
print("1-NN accuracy:", (pred == test.labels).mean())

cfg = HybridConfig(k_votes=1, gate_m=3, sift_p=18, svm=SvmTrainConfig(c_reg=4.0, gamma=0.0025))
report = hybrid_classify(x_train, train.labels, x_test, cfg, test.labels)
print("hybrid accuracy:", report.accuracy)
print("routed to KNN / SVM:", report.knn_routed_count, report.svm_routed_count)
print("timings:", {k: round(v, 2) for k, v in report.timings.items()})

# where the SVM route changed the 1-NN answer
changed = np.flatnonzero(report.predictions != pred)
fixed = int((report.predictions[changed] == test.labels[changed]).sum())
print(f"{len(changed)} answers changed, {fixed} of them now correct")
