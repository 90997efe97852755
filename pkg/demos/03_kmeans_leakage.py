"""
What the coordinator of a federated K-means learns
===================================================

Each node holds one Iris flower; each iteration the coordinator sees the
per-cluster sums. Those sums are a hidden subset sum instance, but a
degenerate one: the attack that broke random instances finds many binary
vectors, almost never the real assignment histories.
"""

# %%
from collections import Counter
from fractions import Fraction

from hssplab import AttackParams, load_dataset, run_attack, sample_kmeans_instance
from hssplab.kmeans import Dataset, weight_rank

try:
    from sklearn.datasets import load_iris

    raw = load_iris()
    iris = Dataset([[Fraction(str(round(float(v), 1))) for v in r] for r in raw.data])
except ImportError:
    # any 4-column csv in the usual Iris layout works too
    iris = load_dataset("iris.csv")
print(iris.n, "flowers,", iris.d, "attributes")

# %%
inst, trace, nodes = sample_kmeans_instance(iris, n=10, k=3, t_max=100, m=60, seed=3)
print("nodes:", nodes)
print("assignments settle after a few rounds:")
for t in range(5):
    print("  it", t, trace.assignments[t])
print("column norms:", set(sum(c) for c in inst.columns()), " rank(W) =", weight_rank(inst))

# %%
# nodes sharing a history are indistinguishable: W has repeated columns
print("history multiplicities:", sorted(Counter(map(tuple, inst.columns())).values()))

# %%
rep = run_attack(inst, AttackParams(beta=10))
print("binary vectors:", rep.recovered_count, " true columns:", rep.true_match_count)
print("mean L1:", round(float(rep.mean_l1_recovered), 2), "(true columns have m/k = 20)")
print("x recovered:", rep.x_success, " failure:", rep.failure)
print("step 1 still contains the truth:", rep.step1_truth_in_lattice)

# %%
# many seeds at once, one CSV row per (run, provenance):
#   hssplab experiment --runs 20 --data iris.csv --out runs.csv
