"""
Evening out a skewed training set
=================================

True alarms are the minority class, and a net trained on the raw ratio
learns to say "false" too often. Two remedies ship here: synthesizing
minority rows by interpolation (with a difficulty-weighted variant),
and reweighting the loss. This script shows the bookkeeping for both.
"""

import numpy as np

from vtalarm.imbalance import ResampleConfig, adasyn, class_weights, smote

rng = np.random.default_rng(6)

# A 2D set that is easy to picture: 40 minority points around (0, 0),
# 160 majority points around (3, 0).
x = np.vstack([rng.normal(0, 1, size=(40, 2)), rng.normal((3, 0), 1, size=(160, 2))])
y = np.concatenate([np.ones(40, dtype=int), np.zeros(160, dtype=int)])
print("before:", int(y.sum()), "true /", int((y == 0).sum()), "false")

# ratio 1.0 asks for as many minority rows as there are majority rows.
config = ResampleConfig(method="smote", ratio=1.0, k_neighbors=5, seed=0)
out_x, out_y = smote(x, y, config)
print("after smote:", int(out_y.sum()), "true /", int((out_y == 0).sum()), "false")

# Every synthetic row sits on the straight segment between a minority
# point and one of its five nearest minority neighbors. The provenance
# log carries (parent, neighbor, gap) so that can be re-derived.
_, _, log = smote(x, y, config, return_provenance=True)
parent, neighbor, gap = log[0]
rebuilt = x[parent] + gap * (x[neighbor] - x[parent])
print("first synthetic row:", np.round(out_x[200], 4))
print("rebuilt from its parents:", np.round(rebuilt, 4))

# The difficulty-weighted variant gives more synthetic rows to minority
# points whose neighborhoods are full of the majority class, pushing
# new samples toward the decision boundary.
ada_x, ada_y, ada_log = adasyn(x, y, ResampleConfig(method="adasyn", ratio=1.0, k_neighbors=5, seed=0), return_provenance=True)
boundary_parent_x = np.array([x[p][0] for p, _, _ in ada_log])
print("after adasyn:", int(ada_y.sum()), "true /", int((ada_y == 0).sum()), "false")
print("mean parent x-coordinate (adasyn):", round(float(boundary_parent_x.mean()), 3),
      "vs minority mean:", round(float(x[:40, 0].mean()), 3))

# Loss reweighting is the no-new-rows alternative: each class gets
# weight N / (2 * N_class), so the weighted sample count stays N.
weights = class_weights(y)
print("weight per true alarm:", round(weights.weight_true, 3))
print("weight per false alarm:", round(weights.weight_false, 3))
print("weighted count:", round(float(weights.for_labels(y).sum()), 9), "== 200")
