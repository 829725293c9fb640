# %% [markdown]
# # Training a ferns ensemble
#
# A fern is a depth-D sequence of random binary tests. Every object lands in
# one of 2^D leaves, and each leaf stores one log-score per class, fitted on
# a bootstrap bag. Prediction sums the scores over the ensemble and takes
# the best class.

# %%
import numpy as np

from rferns import persist
from rferns.bench import gen_gaussian_classes
from rferns.ferns import decision_scores, oob_error, predict, train

data = gen_gaussian_classes(50, 4, 3, 3.0, seed=0).dataset
print(data.n_objects, "objects,", data.n_attributes, "attributes,", data.n_classes, "classes")

# %% [markdown]
# Training is deterministic in the seed. The worker count only changes
# speed: a model trained with eight workers is bit-identical to a serial one.

# %%
model = train(data, depth=5, n_ferns=1000, seed=0)
same = train(data, depth=5, n_ferns=1000, seed=0, workers=8)
assert np.array_equal(model.tables, same.tables)

# %% [markdown]
# Each object is out of bag for roughly a third of the ferns. Voting with
# just those ferns gives an honest error estimate without a held-out set.

# %%
oob = oob_error(model, data)
print(f"OOB error {oob.error:.4f} over {oob.n_evaluated} objects")

scores, labels = decision_scores(model, data)
print("training accuracy", np.mean(labels == data.labels))
print("first object scores", np.round(scores[0], 2), "->", predict(model, data.matrix[0]))

# %% [markdown]
# Models are stored as versioned JSON. Loading and re-saving reproduces the
# file byte for byte.

# %%
text = persist.dumps(model)
assert persist.dumps(persist.loads(text)) == text
print(f"model file is {len(text) / 1e6:.1f} MB")
