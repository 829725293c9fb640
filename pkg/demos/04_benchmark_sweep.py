# %% [markdown]
# # Benchmark sweeps on the parity problem
#
# The Madelon-style generator hides a 5-bit parity behind jittered bit
# columns and 15 noisy linear combinations, then appends w noise columns.
# No single column carries signal on its own. Depth-1 ferns therefore
# cannot find the bits, while deeper ferns can.

# %%
import collections

from rferns.bench import gen_madelon, run_experiment, write_results_csv

rows = []
for w in (10, 50):
    problem = gen_madelon(2000, w, seed=0)
    rows += run_experiment(problem, grid=[(1, 1000), (3, 1000), (7, 1000)], repeats=3, seed=0)

# %%
summary = collections.defaultdict(list)
for r in rows:
    summary[(r.problem, r.depth)].append((r.false_positives, r.false_negatives))
for (name, depth), runs in sorted(summary.items()):
    print(f"{name:>6} D={depth}: (FP, FN) per repeat {runs}")

# %% [markdown]
# Results go to CSV for plotting elsewhere. With `runtime=False` the
# wall-clock column is left blank, so two runs give identical files.

# %%
write_results_csv(rows, "madelon_sweep.csv", runtime=False)
print(open("madelon_sweep.csv").read().splitlines()[:3])
