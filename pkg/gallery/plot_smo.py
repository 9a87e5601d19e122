"""
Training a binary SVM with SMO
==============================

The solver works on a precomputed kernel matrix. On two points the
answer is known in closed form: with K = [[1, k], [k, 1]] both
multipliers equal 1/(1-k), the bias is zero and the decision values
at the two training points are exactly +1 and -1.
"""

import numpy as np

from knnsvm.svm import SvmTrainConfig, decision_value, dual_objective, smo_train

k = 0.3
K = np.array([[1.0, k], [k, 1.0]])
y = np.array([1.0, -1.0])
m = smo_train(K, y, SvmTrainConfig(c_reg=10.0, tol=1e-9))
print("alphas:", m.alphas, "expected:", 1 / (1 - k))
print("bias:", m.bias)
print("decision values:", [round(decision_value(m, K[i]), 12) for i in range(2)])

# a slightly larger random problem, watching the dual objective climb
rng = np.random.default_rng(0)
x = rng.normal(size=(40, 2))
y = np.where(x[:, 0] + 0.3 * rng.normal(size=40) > 0, 1.0, -1.0)
d2 = ((x[:, None] - x[None]) ** 2).sum(-1)
K = np.exp(-0.5 * d2)
trace = []
m = smo_train(K, y, SvmTrainConfig(c_reg=1.0, tol=1e-6),
              callback=lambda alphas: trace.append(dual_objective(alphas, K, y)))
print("iterations:", m.iterations, "converged:", m.converged)
print("dual objective, first and last:", round(trace[0], 4), round(trace[-1], 4))
print("support vectors:", len(m.support_indices), "of", len(y))
