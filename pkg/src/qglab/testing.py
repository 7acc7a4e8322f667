"""Seeded random instances for property-based checks.

The generator draws small connected graphs (3-5 edges, no self-loops,
lengths in [0.5, 2]) with smooth trigonometric potentials bounded by
sup-norm 3 and vertex strengths in [-2, 2].  Construction starts from a
random spanning tree, so connectivity holds for every seed.
"""

import numpy as np

from .graphs import build_graph

__all__ = ["random_instance", "random_test_function"]

# potential family: c0 + c1 sin(w x) + c2 cos(w x) with sum |c_i| <= QMAX
QMAX = 3.0
SIGMA_RANGE = 2.0
LENGTH_RANGE = (0.5, 2.0)


def _random_potential(rng):
    amp = rng.uniform(0.2, 1.0)
    c = rng.uniform(-1.0, 1.0, size=3)
    c *= QMAX * amp / np.sum(np.abs(c))
    w = rng.uniform(0.5, 3.0)
    return {"kind": "expr",
            "expr": "%.17g + %.17g*sin(%.17g*x) + %.17g*cos(%.17g*x)"
                    % (c[0], c[1], w, c[2], w)}


def random_instance(seed, n_edges=None, free=False):
    """A random connected instance; identical seeds give identical graphs."""
    rng = np.random.default_rng(seed)
    ne = int(rng.integers(3, 6)) if n_edges is None else int(n_edges)
    nv = int(rng.integers(2, ne + 1))
    vertices = [{"id": "v%d" % i,
                 "sigma": float(rng.uniform(-SIGMA_RANGE, SIGMA_RANGE))}
                for i in range(nv)]
    edges = []
    for j in range(ne):
        if j < nv - 1:
            # spanning-tree phase: attach vertex j+1 to an earlier one
            a, b = j + 1, int(rng.integers(0, j + 1))
        else:
            a, b = 0, 0
            while a == b:
                a, b = (int(x) for x in rng.integers(0, nv, size=2))
        edges.append({"id": "e%d" % j,
                      "from": "v%d" % a, "to": "v%d" % b,
                      "length": float(rng.uniform(*LENGTH_RANGE)),
                      "potential": _random_potential(rng)})
    if free:
        for v in vertices:
            v["sigma"] = 0.0
        for e in edges:
            e["potential"] = {"kind": "constant", "value": 0.0}
    return build_graph({"vertices": vertices, "edges": edges})


def random_test_function(g, seed, points=33):
    """Random vertex-continuous edge samples, admissible for the form.

    Linear interpolation between random vertex values plus a few interior
    sine bumps that vanish at both endpoints, sampled uniformly.
    """
    rng = np.random.default_rng(seed)
    vertex_value = {v.id: float(rng.uniform(-1.0, 1.0)) for v in g.vertices}
    t = np.linspace(0.0, 1.0, points)
    out = {}
    for e in g.edges:
        vals = (vertex_value[e.source] * (1.0 - t)
                + vertex_value[e.target] * t)
        for mode in range(1, 4):
            vals = vals + rng.uniform(-0.5, 0.5) * np.sin(mode * np.pi * t)
        out[e.id] = vals
    return out
