"""Catalog of symmetric interaction graphs and their spectra.

Vertices are ``0..n-1``; edges are stored as sorted pairs in a canonical
order.  Triangular-torus vertex ``(i, j)`` is labelled ``i * b + j``; the
honeycomb labelling is given in :func:`hex_torus`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

CATALOG_TAGS = ("ring", "complete", "star", "platonic", "hex_torus", "tri_torus")

# standard labellings (same as the usual generator tables for these solids)
PLATONIC_EDGES = {
    "tetrahedron": (4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    "cube": (8, [(0, 1), (0, 3), (0, 4), (1, 2), (1, 7), (2, 3), (2, 6), (3, 5), (4, 5), (4, 7),
                 (5, 6), (6, 7)]),
    "octahedron": (6, [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 5), (2, 4), (2, 5),
                       (3, 4), (3, 5), (4, 5)]),
    "dodecahedron": (20, [(0, 1), (0, 10), (0, 19), (1, 2), (1, 8), (2, 3), (2, 6), (3, 4),
                          (3, 19), (4, 5), (4, 17), (5, 6), (5, 15), (6, 7), (7, 8), (7, 14),
                          (8, 9), (9, 10), (9, 13), (10, 11), (11, 12), (11, 18), (12, 13),
                          (12, 16), (13, 14), (14, 15), (15, 16), (16, 17), (17, 18), (18, 19)]),
    "icosahedron": (12, [(0, 1), (0, 5), (0, 7), (0, 8), (0, 11), (1, 2), (1, 5), (1, 6), (1, 8),
                         (2, 3), (2, 6), (2, 8), (2, 9), (3, 4), (3, 6), (3, 9), (3, 10), (4, 5),
                         (4, 6), (4, 10), (4, 11), (5, 6), (5, 11), (7, 8), (7, 9), (7, 10),
                         (7, 11), (8, 9), (9, 10), (10, 11)]),
}
PLATONIC_NAMES = tuple(PLATONIC_EDGES)


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]
    tag: str = "user"

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        canon = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise GraphError(f"self-loop at {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
            e = (min(i, j), max(i, j))
            if e in canon:
                raise GraphError(f"duplicate edge {e}")
            canon.add(e)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def is_catalog(self) -> bool:
        return self.tag.split(":")[0] in CATALOG_TAGS

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges], "tag": self.tag}

    @classmethod
    def from_dict(cls, data: dict) -> "Graph":
        return cls(int(data["n"]), tuple(tuple(e) for e in data["edges"]), data.get("tag", "user"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def ring(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"ring needs n >= 3, got {n}")
    return Graph(n, tuple((k, (k + 1) % n) for k in range(n)), f"ring:{n}")


def complete(n: int) -> Graph:
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)), f"complete:{n}")


def star(m: int) -> Graph:
    """Centre ``0`` joined to ``m`` leaves."""
    if m < 1:
        raise GraphError(f"star needs at least one leaf, got {m}")
    return Graph(m + 1, tuple((0, k) for k in range(1, m + 1)), f"star:{m}")


def platonic(name: str) -> Graph:
    try:
        n, edges = PLATONIC_EDGES[name]
    except KeyError:
        raise GraphError(f"unknown solid {name!r}; choose from {PLATONIC_NAMES}") from None
    return Graph(n, tuple(edges), f"platonic:{name}")


def tri_torus(a: int, b: int) -> Graph:
    """Triangular lattice on an ``a x b`` torus: neighbours (+1,0), (0,+1), (+1,-1)."""
    if a < 3 or b < 3:
        raise GraphError(f"triangular torus needs a, b >= 3, got {a}x{b}")
    edges = []
    for i in range(a):
        for j in range(b):
            v = i * b + j
            edges.append((v, ((i + 1) % a) * b + j))
            edges.append((v, i * b + (j + 1) % b))
            edges.append((v, ((i + 1) % a) * b + (j - 1) % b))
    return Graph(a * b, tuple(edges), f"tri_torus:{a}x{b}")


def hex_torus(a: int, b: int) -> Graph:
    """Honeycomb on an ``a x b`` rhombic torus of two-site unit cells.

    Cell ``(i, j)`` holds sites ``A = 2 (i b + j)`` and ``B = A + 1``; each
    ``A`` bonds to the ``B`` of cells ``(i, j)``, ``(i-1, j)`` and
    ``(i, j-1)``.  Drawn on the square grid this is the brick wall; for
    ``a == b`` the torus keeps the hexagonal point symmetry.
    """
    if a < 2 or b < 2:
        raise GraphError(f"hex torus needs a, b >= 2, got {a}x{b}")

    def site(i, j, s):
        return 2 * ((i % a) * b + (j % b)) + s

    edges = []
    for i in range(a):
        for j in range(b):
            edges.append((site(i, j, 0), site(i, j, 1)))
            edges.append((site(i, j, 0), site(i - 1, j, 1)))
            edges.append((site(i, j, 0), site(i, j - 1, 1)))
    return Graph(2 * a * b, tuple(edges), f"hex_torus:{a}x{b}")


def adjacency(g: Graph) -> np.ndarray:
    A = np.zeros((g.n, g.n))
    for i, j in g.edges:
        A[i, j] = A[j, i] = 1.0
    return A


def degree(g: Graph) -> list[int]:
    deg = [0] * g.n
    for i, j in g.edges:
        deg[i] += 1
        deg[j] += 1
    return deg


def spectrum(g: Graph) -> np.ndarray:
    """Ascending adjacency eigenvalues."""
    return np.linalg.eigvalsh(adjacency(g))


def is_regular(g: Graph) -> bool:
    return len(set(degree(g))) == 1


def is_connected(g: Graph) -> bool:
    nbrs = [[] for _ in range(g.n)]
    for i, j in g.edges:
        nbrs[i].append(j)
        nbrs[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in nbrs[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == g.n


def ring_spectrum(n: int) -> np.ndarray:
    return 2 * np.cos(2 * np.pi * np.arange(n) / n)
