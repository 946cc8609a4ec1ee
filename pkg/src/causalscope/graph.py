"""Semi-Markovian causal graphs: validation, structural queries, projection.

Vertices are integers ``0..n-1``; all variables share one alphabet of size
``K`` with values ``0..K-1``. Bidirected edges are stored as unordered pairs;
the hidden fork behind each pair is materialized only where it matters
(d-separation, sampling, exact inference).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    CycleDetected,
    DegenerateParams,
    DuplicateEdge,
    GraphInvariantError,
    SelfLoop,
    SetsOverlap,
    VertexOutOfRange,
)
from .rng import substream


@dataclass(frozen=True)
class GraphClassParams:
    """Tight class parameters: max in-degree d, max c-component size l."""

    d: int
    l: int


class Smcg:
    """Directed acyclic graph over observables plus bidirected edges.

    Each bidirected edge {i, j} stands for one hidden root variable with
    exactly two observable children i and j. Instances are immutable and
    validated at construction.
    """

    def __init__(self, n: int, K: int, directed: Iterable[Sequence[int]] = (),
                 bidirected: Iterable[Sequence[int]] = ()):
        self.n = int(n)
        self.K = int(K)
        self.directed = tuple(sorted((int(a), int(b)) for a, b in directed))
        # collapse duplicate bidirected pairs; orientation is meaningless
        self.bidirected = tuple(sorted({tuple(sorted((int(a), int(b)))) for a, b in bidirected}))
        _check_invariants(self)
        self.parents_of = tuple(
            tuple(sorted(a for a, b in self.directed if b == v)) for v in range(self.n)
        )
        self.children_of = tuple(
            tuple(sorted(b for a, b in self.directed if a == v)) for v in range(self.n)
        )
        self.bidirected_neighbors = tuple(
            tuple(sorted({b if a == v else a for a, b in self.bidirected if v in (a, b)}))
            for v in range(self.n)
        )
        # hidden edge ids incident to each vertex, in edge-index order
        self.hidden_edges_of = tuple(
            tuple(e for e, (a, b) in enumerate(self.bidirected) if v in (a, b))
            for v in range(self.n)
        )
        self._topo = _kahn_order(self)

    def __eq__(self, other):
        return (isinstance(other, Smcg) and self.n == other.n and self.K == other.K
                and self.directed == other.directed and self.bidirected == other.bidirected)

    def __hash__(self):
        return hash((self.n, self.K, self.directed, self.bidirected))

    def __repr__(self):
        return (f"Smcg(n={self.n}, K={self.K}, directed={list(self.directed)}, "
                f"bidirected={list(self.bidirected)})")


class GeneralCausalGraph:
    """Causal DAG with explicit unobservable vertices of arbitrary structure.

    Observables are ``0..n_observable-1``; unobservables follow as
    ``n_observable..n_observable+n_unobservable-1``. Directed edges may touch
    any vertex. Projection (below) normalizes this to an Smcg.
    """

    def __init__(self, n_observable: int, n_unobservable: int, K: int,
                 directed: Iterable[Sequence[int]] = ()):
        self.n_observable = int(n_observable)
        self.n_unobservable = int(n_unobservable)
        self.K = int(K)
        self.directed = tuple(sorted((int(a), int(b)) for a, b in directed))
        total = self.n_observable + self.n_unobservable
        if self.K < 2:
            raise GraphInvariantError(f"alphabet size must be >= 2, got {self.K}")
        for a, b in self.directed:
            if a == b:
                raise SelfLoop(f"self-loop at {a}")
            if not (0 <= a < total and 0 <= b < total):
                raise VertexOutOfRange(f"edge ({a},{b}) outside 0..{total - 1}")
        if _has_cycle(total, self.directed):
            raise CycleDetected("directed edges contain a cycle")

    def is_observable(self, v: int) -> bool:
        return v < self.n_observable


def _check_invariants(g: Smcg) -> None:
    if g.n < 0:
        raise GraphInvariantError("vertex count must be non-negative")
    if g.K < 2:
        raise GraphInvariantError(f"alphabet size must be >= 2, got {g.K}")
    seen = set()
    for a, b in g.directed:
        if a == b:
            raise SelfLoop(f"self-loop at {a}")
        if not (0 <= a < g.n and 0 <= b < g.n):
            raise VertexOutOfRange(f"edge ({a},{b}) outside 0..{g.n - 1}")
        if (a, b) in seen:
            raise DuplicateEdge(f"directed edge ({a},{b}) listed twice")
        seen.add((a, b))
    for a, b in g.bidirected:
        if a == b:
            raise SelfLoop(f"bidirected edge at single vertex {a}")
        if not (0 <= a < g.n and 0 <= b < g.n):
            raise VertexOutOfRange(f"bidirected edge ({a},{b}) outside 0..{g.n - 1}")
    if _has_cycle(g.n, g.directed):
        raise CycleDetected("directed edges contain a cycle")


def _has_cycle(n: int, edges: Sequence[tuple[int, int]]) -> bool:
    indeg = [0] * n
    children = [[] for _ in range(n)]
    for a, b in edges:
        indeg[b] += 1
        children[a].append(b)
    queue = [v for v in range(n) if indeg[v] == 0]
    done = 0
    while queue:
        v = queue.pop()
        done += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return done != n


def _kahn_order(g: Smcg) -> tuple[int, ...]:
    indeg = [len(g.parents_of[v]) for v in range(g.n)]
    heap = [v for v in range(g.n) if indeg[v] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        v = heapq.heappop(heap)
        order.append(v)
        for c in g.children_of[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    return tuple(order)


def validate(g: Smcg) -> None:
    """Re-check all Smcg invariants, raising on the first violation."""
    _check_invariants(g)


def topological_order(g: Smcg) -> tuple[int, ...]:
    """Linear extension of the directed edges, ties broken by smallest id."""
    return g._topo


def _check_subset(g: Smcg, X: Iterable[int], name: str = "vertex set"):
    X = frozenset(int(v) for v in X)
    for v in X:
        if not (0 <= v < g.n):
            raise VertexOutOfRange(f"{name} contains {v}, outside 0..{g.n - 1}")
    return X


def c_components(g: Smcg, subset: Iterable[int] | None = None) -> tuple[tuple[int, ...], ...]:
    """Partition of ``subset`` into c-components of the induced subgraph.

    Components are connected components of the bidirected-edge relation
    restricted to ``subset`` (default: all vertices), listed by minimum
    vertex id, each sorted ascending.
    """
    if subset is None:
        subset = range(g.n)
    sub = _check_subset(g, subset, "subset")
    blocks = []
    unseen = set(sub)
    while unseen:
        root = min(unseen)
        comp = {root}
        stack = [root]
        unseen.remove(root)
        while stack:
            v = stack.pop()
            for w in g.bidirected_neighbors[v]:
                if w in unseen:
                    unseen.remove(w)
                    comp.add(w)
                    stack.append(w)
        blocks.append(tuple(sorted(comp)))
    return tuple(sorted(blocks))


def parents(g: Smcg, X: Iterable[int]) -> frozenset[int]:
    """Observable parents of the set X, excluding X itself."""
    X = _check_subset(g, X)
    out = set()
    for v in X:
        out.update(g.parents_of[v])
    return frozenset(out - X)


def ancestors(g: Smcg, X: Iterable[int]) -> frozenset[int]:
    """Observable ancestors of X (via directed edges), excluding X."""
    X = _check_subset(g, X)
    frontier = list(X)
    visited = set(X)
    while frontier:
        v = frontier.pop()
        for p in g.parents_of[v]:
            if p not in visited:
                visited.add(p)
                frontier.append(p)
    return frozenset(visited - X)


def descendants(g: Smcg, X: Iterable[int]) -> frozenset[int]:
    """Observable descendants of X (via directed edges), excluding X."""
    X = _check_subset(g, X)
    frontier = list(X)
    visited = set(X)
    out = set()
    while frontier:
        v = frontier.pop()
        for c in g.children_of[v]:
            if c not in visited:
                visited.add(c)
                frontier.append(c)
                out.add(c)
    return frozenset(out - X)


def d_separated(g: Smcg, X: Iterable[int], Y: Iterable[int], Z: Iterable[int]) -> bool:
    """True iff every path between X and Y is blocked by Z.

    Paths are read on the expanded graph where each bidirected edge becomes
    its hidden fork node; Z may contain observables only (hidden forks are
    never conditioned on).
    """
    X, Y, Z = (_check_subset(g, S, nm) for S, nm in ((X, "X"), (Y, "Y"), (Z, "Z")))
    if X & Y or X & Z or Y & Z:
        raise SetsOverlap("X, Y, Z must be pairwise disjoint")
    if not X or not Y:
        return True
    # expanded DAG: forks n..n+len(bidirected)-1
    total = g.n + len(g.bidirected)
    par = [list(g.parents_of[v]) for v in range(g.n)] + [[] for _ in g.bidirected]
    for e, (a, b) in enumerate(g.bidirected):
        par[a].append(g.n + e)
        par[b].append(g.n + e)
    # ancestral set of X|Y|Z, inclusive
    anc = set(X | Y | Z)
    frontier = list(anc)
    while frontier:
        v = frontier.pop()
        for p in par[v]:
            if p not in anc:
                anc.add(p)
                frontier.append(p)
    # moralize the induced subgraph, then drop Z
    adj = {v: set() for v in anc}
    for v in anc:
        ps = [p for p in par[v] if p in anc]
        for p in ps:
            adj[v].add(p)
            adj[p].add(v)
        for i in range(len(ps)):
            for j in range(i + 1, len(ps)):
                adj[ps[i]].add(ps[j])
                adj[ps[j]].add(ps[i])
    blocked = set(Z)
    frontier = [v for v in X]
    seen = set(X)
    while frontier:
        v = frontier.pop()
        if v in Y:
            return False
        for w in adj[v]:
            if w not in seen and w not in blocked:
                seen.add(w)
                frontier.append(w)
    return True


def class_params(g: Smcg) -> GraphClassParams:
    """Tight (d, l): max observable in-degree, max c-component size."""
    d = max((len(g.parents_of[v]) for v in range(g.n)), default=0)
    l = max((len(c) for c in c_components(g)), default=1)
    return GraphClassParams(d=d, l=max(l, 1))


def max_total_degree(g: Smcg) -> int:
    """Max over vertices of observable in-degree plus out-degree."""
    return max(
        (len(g.parents_of[v]) + len(g.children_of[v]) for v in range(g.n)), default=0
    )


def _unobservable_reach(h: GeneralCausalGraph) -> list[set[int]]:
    """For each unobservable u: observables reachable via all-unobservable paths."""
    n, u_count = h.n_observable, h.n_unobservable
    children = [[] for _ in range(n + u_count)]
    for a, b in h.directed:
        children[a].append(b)
    reach: list[set[int]] = [set() for _ in range(u_count)]
    # process unobservables in reverse topological order so reach sets compose
    order = []
    indeg = [0] * (n + u_count)
    for a, b in h.directed:
        if b >= n and a >= n:
            indeg[b] += 1
    ready = [u for u in range(n, n + u_count) if indeg[u] == 0]
    while ready:
        v = ready.pop()
        order.append(v)
        for c in children[v]:
            if c >= n:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
    for v in reversed(order):
        acc = reach[v - n]
        for c in children[v]:
            if c < n:
                acc.add(c)
            else:
                acc.update(reach[c - n])
    return reach


def project_to_smcg(h: GeneralCausalGraph) -> Smcg:
    """Project a general causal graph onto a semi-Markovian one.

    Copies observables; adds i -> j when h has the edge or a directed path
    through unobservables only; adds {i, j} bidirected when one unobservable
    reaches both through unobservables only.
    """
    n = h.n_observable
    reach = _unobservable_reach(h)
    directed = set()
    for a, b in h.directed:
        if a < n and b < n:
            directed.add((a, b))
        elif a < n and b >= n:
            for j in reach[b - n]:
                if j != a:
                    directed.add((a, j))
    bidirected = set()
    for r in reach:
        targets = sorted(r)
        for i in range(len(targets)):
            for j in range(i + 1, len(targets)):
                bidirected.add((targets[i], targets[j]))
    return Smcg(n=n, K=h.K, directed=sorted(directed), bidirected=sorted(bidirected))


def general_c_components(h: GeneralCausalGraph) -> tuple[tuple[int, ...], ...]:
    """c-components of a general graph straight from the definition.

    Two observables are related when some unobservable reaches both through
    all-unobservable directed paths; components close that relation
    transitively. Independent of projection, used to cross-check it.
    """
    parent = list(range(h.n_observable))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in _unobservable_reach(h):
        vs = sorted(r)
        for v in vs[1:]:
            ra, rb = find(vs[0]), find(v)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    blocks: dict[int, list[int]] = {}
    for v in range(h.n_observable):
        blocks.setdefault(find(v), []).append(v)
    return tuple(sorted(tuple(sorted(b)) for b in blocks.values()))


def chain_graph(n: int, K: int = 2) -> Smcg:
    return Smcg(n=n, K=K, directed=[(i, i + 1) for i in range(n - 1)])


def star_graph(n: int, K: int = 2) -> Smcg:
    """All of 0..n-2 point at the hub n-1."""
    return Smcg(n=n, K=K, directed=[(i, n - 1) for i in range(n - 1)])


def random_graph(n: int, K: int, d: int, l: int, seed: int,
                 group_extend_prob: float = 0.5) -> Smcg:
    """Random member of the class with in-degree <= d, c-components <= l.

    Vertices 0..n-1 are already in topological order; each vertex draws a
    uniform number of earlier parents up to d. Bidirected edges form paths
    inside random disjoint groups grown to size at most l.
    """
    if n <= 0:
        raise DegenerateParams("need n >= 1")
    rng = substream(seed, "gen-graph")
    directed = []
    for v in range(1, n):
        k = int(rng.integers(0, min(d, v) + 1))
        if k:
            ps = rng.choice(v, size=k, replace=False)
            directed.extend((int(p), v) for p in ps)
    bidirected = []
    perm = rng.permutation(n)
    group = [int(perm[0])]
    for v in perm[1:]:
        if len(group) < l and rng.random() < group_extend_prob:
            bidirected.append((group[-1], int(v)))
            group.append(int(v))
        else:
            group = [int(v)]
    return Smcg(n=n, K=K, directed=directed, bidirected=bidirected)
