# %% [markdown]
# # Boruta with the ferns importance
#
# The wrapper builds shuffled shadow copies explicitly. Each iteration
# retrains on the data plus its shadows. A real attribute scores a hit when
# its importance beats every shadow. A binomial test on the hit count
# eventually confirms the attribute or rejects it.

# %%
from rferns.bench import augment_with_shadow_features, gen_gaussian_classes
from rferns.boruta import BorutaConfig, boruta_run

problem = augment_with_shadow_features(gen_gaussian_classes(50, 4, 3, 3.0, seed=0), 200, seed=0)
cfg = BorutaConfig(max_iterations=40, depth=7, scans=200, seed=0)
result = boruta_run(problem.dataset, cfg)

# %%
print("iterations", result.iterations, result.counts())
print("confirmed:", [problem.dataset.names[j] for j in result.confirmed])
print("tentative attributes per iteration:", result.history[:10], "...")

# %% [markdown]
# Any callable `(dataset, seed) -> importances` can act as the provider.
# Here is a crude univariate score for comparison.

# %%
import numpy as np


def class_mean_spread(data, seed):
    means = np.stack([data.matrix[data.labels == c].mean(0) for c in range(data.n_classes)])
    return means.std(0)


alt = boruta_run(problem.dataset, BorutaConfig(max_iterations=40), class_mean_spread)
print("univariate provider:", alt.counts())
