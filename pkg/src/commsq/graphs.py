"""Bipartite graph families and inclusion matrices built from them."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

import numpy as np


@dataclass
class BipartiteGraph:
    even: list[str]
    odd: list[str]
    edges: dict[tuple[str, str], int]
    family: dict = field(default_factory=dict)
    # vertices whose neighbourhood was cut by truncation of an infinite family
    boundary: frozenset = frozenset()

    def __post_init__(self):
        ev, od = set(self.even), set(self.odd)
        if ev & od:
            raise ValueError("vertex listed on both sides")
        for (a, b), m in self.edges.items():
            if a not in ev or b not in od:
                raise ValueError(f"edge {a}-{b} breaks the bipartition")
            if int(m) < 1:
                raise ValueError("edge multiplicity must be >= 1")
        if not self.is_connected():
            raise ValueError("graph is not connected")

    @property
    def vertices(self) -> list[str]:
        return self.even + self.odd

    def neighbours(self) -> dict[str, dict[str, int]]:
        nb: dict[str, dict[str, int]] = {v: {} for v in self.vertices}
        for (a, b), m in self.edges.items():
            nb[a][b] = m
            nb[b][a] = m
        return nb

    def degree(self, v: str) -> int:
        return sum(self.neighbours()[v].values())

    def is_connected(self) -> bool:
        vs = self.vertices
        if not vs:
            return False
        nb = self.neighbours()
        seen = {vs[0]}
        queue = deque([vs[0]])
        while queue:
            v = queue.popleft()
            for w in nb[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(vs)

    def adjacency(self) -> np.ndarray:
        """Symmetric adjacency over the order even + odd."""
        G = bipartite_blocks(self)
        ne, no = G.shape
        D = np.zeros((ne + no, ne + no), dtype=np.int64)
        D[:ne, ne:] = G
        D[ne:, :ne] = G.T
        return D

    def distance_from(self, sources) -> dict[str, int]:
        nb = self.neighbours()
        dist = {s: 0 for s in sources}
        queue = deque(dist)
        while queue:
            v = queue.popleft()
            for w in nb[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        return dist

    def to_json(self) -> str:
        fam = dict(self.family)
        kind = fam.pop("kind", "custom")
        return json.dumps(
            {
                "family": kind,
                "params": fam,
                "even": self.even,
                "odd": self.odd,
                "edges": [[a, b, m] for (a, b), m in sorted(self.edges.items())],
            },
            sort_keys=True,
        )


def bipartite_blocks(g: BipartiteGraph) -> np.ndarray:
    """G with rows = even vertices, columns = odd vertices."""
    ie = {v: i for i, v in enumerate(g.even)}
    io = {v: i for i, v in enumerate(g.odd)}
    G = np.zeros((len(g.even), len(g.odd)), dtype=np.int64)
    for (a, b), m in g.edges.items():
        G[ie[a], io[b]] = m
    return G


def from_edge_list(pairs, root: str, family: dict | None = None, boundary=()) -> BipartiteGraph:
    """2-colour an undirected edge list; `root` goes to the even side."""
    nb: dict[str, list[str]] = {}
    order: list[str] = []
    for a, b in pairs:
        for v in (a, b):
            if v not in nb:
                nb[v] = []
                order.append(v)
        nb[a].append(b)
        nb[b].append(a)
    colour = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in nb[v]:
            if w not in colour:
                colour[w] = 1 - colour[v]
                queue.append(w)
            elif colour[w] == colour[v]:
                raise ValueError("graph is not bipartite")
    if len(colour) != len(nb):
        raise ValueError("graph is not connected")
    edges: dict[tuple[str, str], int] = {}
    for a, b in pairs:
        e, o = (a, b) if colour[a] == 0 else (b, a)
        edges[(e, o)] = edges.get((e, o), 0) + 1
    even = [v for v in order if colour[v] == 0]
    odd = [v for v in order if colour[v] == 1]
    return BipartiteGraph(even, odd, edges, family or {}, frozenset(boundary))


# ---------------------------------------------------------------- families

def star(rays, horizon: int | None = None) -> BipartiteGraph:
    """m-star with centre 'c'; ray i vertex at distance d from the centre is 'r{i}_{d}'.

    A ray given as None (or math.inf) is infinite and needs a horizon.
    """
    if len(rays) < 2:
        raise ValueError("a star needs at least two rays")
    pairs = []
    boundary = []
    for i, k in enumerate(rays, start=1):
        infinite = k is None or k == float("inf")
        if infinite:
            if horizon is None or horizon < 1:
                raise ValueError("infinite ray needs a horizon")
            k = horizon
            boundary.append(f"r{i}_{k}")
        elif int(k) < 1:
            raise ValueError("ray lengths must be >= 1")
        prev = "c"
        for d in range(1, int(k) + 1):
            v = f"r{i}_{d}"
            pairs.append((prev, v))
            prev = v
    fam = {"kind": "star", "rays": [None if (k is None or k == float("inf")) else int(k) for k in rays]}
    if boundary:
        fam["horizon"] = horizon
    return from_edge_list(pairs, "c", fam, boundary)


def path(m: int) -> BipartiteGraph:
    """A_m with vertices '1'..'m'; even-numbered vertices on the even side."""
    if m < 2:
        raise ValueError("A_m needs m >= 2")
    pairs = [(str(i), str(i + 1)) for i in range(1, m)]
    return from_edge_list(pairs, "2", {"kind": "path", "m": m})


def kite(k: int) -> BipartiteGraph:
    """4-cycle k0-k1-k2-k3 with a path p1..pk hanging from k0."""
    if k < 1:
        raise ValueError("kite needs k >= 1")
    pairs = [("k0", "k1"), ("k1", "k2"), ("k2", "k3"), ("k3", "k0")]
    prev = "k0"
    for d in range(1, k + 1):
        pairs.append((prev, f"p{d}"))
        prev = f"p{d}"
    return from_edge_list(pairs, "k0", {"kind": "kite", "k": k})


E10_EVEN = ["A", "B", "C", "D", "E"]
E10_ODD = ["a", "b", "c", "d", "e"]


def e10() -> BipartiteGraph:
    """Path A a B c C d D e E with the pendant b at B."""
    pairs = [("A", "a"), ("B", "a"), ("B", "b"), ("B", "c"), ("C", "c"),
             ("C", "d"), ("D", "d"), ("D", "e"), ("E", "e")]
    g = from_edge_list(pairs, "A", {"kind": "E10"})
    return BipartiteGraph(E10_EVEN, E10_ODD, g.edges, g.family)


def hoffman(n: int, horizon: int) -> BipartiteGraph:
    """T(1,n,inf) truncated after vertex `horizon`.

    Leg 1..n, branch vertex n+1, pendant n+2, ray n+3, n+4, ...
    """
    if n < 2:
        raise ValueError("Hoffman graphs need n >= 2")
    if horizon < n + 3:
        raise ValueError("horizon too small")
    b = n + 1
    pairs = [(str(i), str(i + 1)) for i in range(1, n + 1)]
    pairs.append((str(b), str(b + 1)))
    pairs.append((str(b), str(b + 2)))
    pairs += [(str(i), str(i + 1)) for i in range(b + 2, horizon)]
    fam = {"kind": "hoffman", "n": n, "horizon": horizon}
    g = from_edge_list(pairs, str(b), fam, [str(horizon)])
    key = lambda v: int(v)
    return BipartiteGraph(sorted(g.even, key=key), sorted(g.odd, key=key), g.edges, g.family, g.boundary)


def shearer_graph(lam: float, horizon: int) -> BipartiteGraph:
    """Path P0, P1, ... with n_k leaves Q{k},{j} at P_k, truncated at P_horizon."""
    from . import shearer

    st = shearer.shearer_build(lam, horizon)
    pairs = [(f"P{k}", f"P{k + 1}") for k in range(horizon)]
    for k, nk in enumerate(st.n_seq):
        for j in range(1, nk + 1):
            pairs.append((f"P{k}", f"Q{k},{j}"))
    fam = {"kind": "shearer", "lambda": lam, "horizon": horizon}
    return from_edge_list(pairs, "P0", fam, [f"P{horizon}"])


def build_graph(spec: dict) -> BipartiteGraph:
    """Dispatch on a family descriptor such as {"kind": "star", "rays": [1, 2, 3]}."""
    kind = spec.get("kind")
    if kind == "star":
        return star(spec["rays"], spec.get("horizon"))
    if kind == "kite":
        return kite(int(spec["k"]))
    if kind == "path":
        return path(int(spec["m"]))
    if kind == "E10":
        return e10()
    if kind == "hoffman":
        return hoffman(int(spec["n"]), int(spec["horizon"]))
    if kind == "shearer":
        return shearer_graph(float(spec["lambda"]), int(spec["horizon"]))
    raise ValueError(f"unknown family {kind!r}")


# ---------------------------------------------------------- polynomial images

@dataclass
class PolyImage:
    parity: str  # "even" or "odd"
    first: np.ndarray  # even case: evens x evens; odd case: evens x odds
    second: np.ndarray  # even case: odds x odds; odd case: odds x evens
    untrusted: frozenset


def polynomial_image(g: BipartiteGraph, coeffs) -> PolyImage:
    """P(Delta) split along the bipartition; coefficients lowest degree first."""
    coeffs = [int(c) for c in coeffs]
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ValueError("zero polynomial")
    degs = [i for i, c in enumerate(coeffs) if c]
    par = {d % 2 for d in degs}
    if len(par) != 1:
        raise ValueError("polynomial mixes even and odd exponents")
    D = g.adjacency()
    P = np.zeros_like(D)
    for c in reversed(coeffs):
        P = P @ D
        P[np.diag_indices_from(P)] += c
    deg = len(coeffs) - 1
    untrusted = frozenset()
    if g.boundary:
        dist = g.distance_from(g.boundary)
        untrusted = frozenset(v for v, d in dist.items() if d < deg)
    idx = {v: i for i, v in enumerate(g.vertices)}
    for v in g.vertices:
        if v in untrusted:
            continue
        row = P[idx[v]]
        if (row < 0).any():
            raise ValueError(f"P(Delta) has a negative entry in row {v}")
    ne = len(g.even)
    if par == {0}:
        return PolyImage("even", P[:ne, :ne].copy(), P[ne:, ne:].copy(), untrusted)
    return PolyImage("odd", P[:ne, ne:].copy(), P[ne:, :ne].copy(), untrusted)
