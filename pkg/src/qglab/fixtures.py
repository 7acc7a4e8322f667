"""Bundled example instances.

Three small graphs exercised throughout the test suite and the demo
command: a free unit interval, a unit 3-star with an attractive delta
coupling at the center, and an interval instance that is isospectral to
the free Neumann operator despite carrying a nonzero potential and
nonzero vertex strengths.
"""

import copy
import json

from .graphs import build_graph

__all__ = ["FIXTURE_NAMES", "fixture_document", "fixture_graph",
           "save_fixture"]

_DOCS = {
    # free Neumann interval of unit length: eigenvalues (n pi)^2
    "interval": {
        "vertices": [{"id": "left", "sigma": 0.0},
                     {"id": "right", "sigma": 0.0}],
        "edges": [{"id": "seg", "from": "left", "to": "right",
                   "length": 1.0,
                   "potential": {"kind": "constant", "value": 0.0}}],
    },
    # unit 3-star, attractive coupling at the center: lambda_0 < 0 and
    # the averaged-shift limit equals -2/9
    "star3": {
        "vertices": [{"id": "center", "sigma": -1.0},
                     {"id": "tip1", "sigma": 0.0},
                     {"id": "tip2", "sigma": 0.0},
                     {"id": "tip3", "sigma": 0.0}],
        "edges": [{"id": "arm1", "from": "center", "to": "tip1",
                   "length": 1.0,
                   "potential": {"kind": "constant", "value": 0.0}},
                  {"id": "arm2", "from": "center", "to": "tip2",
                   "length": 1.0,
                   "potential": {"kind": "constant", "value": 0.0}},
                  {"id": "arm3", "from": "center", "to": "tip3",
                   "length": 1.0,
                   "potential": {"kind": "constant", "value": 0.0}}],
    },
    # interval [0, 1/2] with q = 2/(1+x)^2, sigma = (-1, 2/3): same
    # spectrum as the free Neumann operator, so lambda_0 = 0 and
    # lambda_n = (2 n pi)^2
    "counterexample": {
        "vertices": [{"id": "left", "sigma": -1.0},
                     {"id": "right", "sigma": 2.0 / 3.0}],
        "edges": [{"id": "seg", "from": "left", "to": "right",
                   "length": 0.5,
                   "potential": {"kind": "expr",
                                 "expr": "2/(1+x)^2"}}],
    },
}

FIXTURE_NAMES = tuple(sorted(_DOCS))


def fixture_document(name):
    """The graph-description JSON object for a named fixture."""
    if name not in _DOCS:
        raise KeyError("unknown fixture %r; have %s"
                       % (name, ", ".join(FIXTURE_NAMES)))
    return copy.deepcopy(_DOCS[name])


def fixture_graph(name):
    """The named fixture as a validated MetricGraph."""
    return build_graph(fixture_document(name))


def save_fixture(name, path):
    """Write the fixture's graph JSON to a file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fixture_document(name), fh, indent=2, sort_keys=True)
        fh.write("\n")
