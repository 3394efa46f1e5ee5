"""Random tiny instances shared by the oracle-backed tests."""
import numpy as np

from upmclp.graph import shortest_distances
from upmclp.instance import GeneratorConfig, generate_geometric, normalize
from upmclp.oracle import mclp_by_enumeration
from upmclp.preprocess import max_budget_reduction

FRACTIONS = (0.005, 0.01, 0.05)


def enum_solver(d, w, p, R):
    return mclp_by_enumeration(d, w, p, R)[0]


def random_tiny(seed: int, n=None, p=None, fraction=None):
    """Complete geometric graph with a radius placed just below a pairwise
    distance, so that small budgets can still change coverage."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 8)) if n is None else n
    p = int(rng.integers(1, 3)) if p is None else p
    fraction = FRACTIONS[seed % 3] if fraction is None else fraction
    inst = generate_geometric(GeneratorConfig(n=n, seed=seed, budget_fraction=fraction),
                              mclp_solver=enum_solver)
    d = shortest_distances(inst.net)
    vals = np.unique(d[np.triu_indices(n, 1)])
    target = float(rng.choice(vals))
    red = max_budget_reduction(inst.net, inst.B)
    R = max(target - rng.uniform(0.0, 1.2) * red, 0.5 * target)
    inst, _ = normalize(inst.with_params(R=R, p=p))
    return inst


def random_sparse(seed: int, n: int, max_degree: int = 4, extra: float = 0.5,
                  p: int = 1, budget: float | None = None):
    """Random connected graph with bounded degree and generous radius/budget,
    so LP points are far from trivial."""
    from upmclp.graph import Network
    from upmclp.instance import Instance

    rng = np.random.default_rng(seed)
    deg = np.zeros(n, dtype=int)
    pairs = set()
    order = rng.permutation(n)
    for t in range(1, n):
        cand = [int(order[s]) for s in range(t) if deg[order[s]] < max_degree]
        a, b = int(order[t]), int(rng.choice(cand))
        pairs.add((min(a, b), max(a, b)))
        deg[a] += 1
        deg[b] += 1
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in pairs and deg[a] < max_degree and deg[b] < max_degree \
                    and rng.random() < extra:
                pairs.add((a, b))
                deg[a] += 1
                deg[b] += 1
    edges = []
    for a, b in sorted(pairs):
        l = float(rng.uniform(1.0, 4.0))
        u = float(rng.uniform(0.0, 0.6 * l))
        c = float(rng.integers(1, 4))
        edges.append((a, b, l, u, c))
    net = Network.from_edges(n, edges)
    w = rng.integers(1, 101, size=n).astype(float)
    R = float(rng.uniform(3.0, 6.0))
    B = float(rng.uniform(0.5, 3.0)) if budget is None else budget
    inst, _ = normalize(Instance(net, w, p, R, B, name=f"sparse{n}-s{seed}"))
    return inst
