"""Adversarial fixtures: the parity-twin model pair and the hard-graph
generator used to stress the testers.

The twin pair lives on a graph G' with a bidirected tree over a component C
and s parent vertices, each with one child in C. Both models drive C by
parities of fair hidden bits; they differ only in the first component
vertex's mechanism, and only when the parents carry one secret assignment.
Under that one intervention the two interventional distributions have
disjoint supports (TV = 1); under every other intervention they are
identical and uniform component by component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadDimensions, TooLargeToEnumerate
from .graph import Smcg, c_components
from .model import Intervention, Smbn, _decode, exact_interventional, marginalize
from .rng import substream

EXACT_TOL = 1e-12


@dataclass
class AdversaryPair:
    graph: Smcg
    model_m: Smbn
    model_n: Smbn
    secret_pa: tuple[int, ...]
    c_vertices: tuple[int, ...]
    w_vertices: tuple[int, ...]


def _random_spanning_tree(l: int, rng) -> list[tuple[int, int]]:
    if l <= 1:
        return []
    if l == 2:
        return [(0, 1)]
    # Pruefer decode gives a uniform labelled spanning tree
    pruefer = [int(rng.integers(0, l)) for _ in range(l - 2)]
    degree = [1] * l
    for p in pruefer:
        degree[p] += 1
    edges = []
    for p in pruefer:
        for leaf in range(l):
            if degree[leaf] == 1:
                edges.append((min(leaf, p), max(leaf, p)))
                degree[leaf] -= 1
                degree[p] -= 1
                break
    last = [v for v in range(l) if degree[v] == 1]
    edges.append((min(last), max(last)))
    return edges


def build_adversary_pair(l: int, s: int, secret_pa, tree_seed: int | None = None) -> AdversaryPair:
    """Construct the twin models for component size l and s parents.

    ``secret_pa`` gives the parent assignment (one bit per parent, in parent
    order) on which the two models separate. The bidirected edges over the
    component form a path by default, or a seeded random spanning tree.
    Parent j's single child is component vertex j mod l. Boolean alphabet.
    """
    secret = tuple(int(b) for b in secret_pa)
    if l < 1 or s < 1:
        raise BadDimensions("need l >= 1 and s >= 1")
    if len(secret) != s or any(b not in (0, 1) for b in secret):
        raise BadDimensions(f"secret_pa must be {s} bits")
    C = tuple(range(l))
    W = tuple(range(l, l + s))
    directed = [(W[j], j % l) for j in range(s)]
    if tree_seed is None:
        tree = [(i, i + 1) for i in range(l - 1)]
    else:
        tree = _random_spanning_tree(l, substream(tree_seed, "adversary-tree"))
    g = Smcg(n=l + s, K=2, directed=directed, bidirected=tree)

    secret_of = {W[j]: secret[j] for j in range(s)}
    priors = [np.array([0.5, 0.5]) for _ in g.bidirected]

    def component_cpt(v: int, flip_consistent: bool) -> np.ndarray:
        obs_pa, hid_pa = g.parents_of[v], g.hidden_edges_of[v]
        width = len(obs_pa) + len(hid_pa)
        rows = np.empty((2**width, 2))
        for row in range(2**width):
            vals = _decode(row, width, 2)
            w_vals, u_vals = vals[: len(obs_pa)], vals[len(obs_pa):]
            consistent = all(w_vals[k] == secret_of[p] for k, p in enumerate(obs_pa))
            if not consistent:
                rows[row] = (0.5, 0.5)  # private fair coin folded into the row
            else:
                bit = sum(u_vals) % 2
                if flip_consistent:
                    bit ^= 1
                rows[row] = (1.0 - bit, float(bit))
        return rows

    def cpts(flip_first: bool):
        out = []
        for v in range(g.n):
            if v in C:
                out.append(component_cpt(v, flip_first and v == C[0]))
            else:
                out.append(np.array([[1.0, 0.0]]))  # parents are constant zero
        return out

    model_m = Smbn(g, priors, cpts(flip_first=False))
    model_n = Smbn(g, priors, cpts(flip_first=True))
    return AdversaryPair(g, model_m, model_n, secret, C, W)


@dataclass
class AdversaryReport:
    ok: bool
    interventions_checked: int
    failures: list = field(default_factory=list)
    ledger: list = field(default_factory=list)


def verify_adversary_pair(ap: AdversaryPair, max_interventions: int = 200_000) -> AdversaryReport:
    """Replay the whole case analysis by exact enumeration.

    For every intervention do(t) over subsets of C and Pa(C): when t leaves
    C free and (counting unintervened parents as their constant 0) matches
    the secret assignment, the two models must sit at TV exactly 1;
    otherwise they must agree exactly and be uniform on every c-component of
    the induced subgraph on the free component vertices.
    """
    g = ap.graph
    verts = list(range(g.n))
    total = 3 ** len(verts)
    if total > max_interventions:
        raise TooLargeToEnumerate(f"{total} interventions exceed guard {max_interventions}")
    secret_of = {w: ap.secret_pa[j] for j, w in enumerate(ap.w_vertices)}
    report = AdversaryReport(ok=True, interventions_checked=0)

    for mask in range(1 << len(verts)):
        T = [v for v in verts if mask >> v & 1]
        for row in range(2 ** len(T)):
            t_map = dict(zip(T, _decode(row, len(T), 2)))
            I = Intervention(t_map)
            report.interventions_checked += 1
            free_c = [v for v in ap.c_vertices if v not in t_map]
            effective_w = {w: t_map.get(w, 0) for w in ap.w_vertices}
            covered = len(free_c) == len(ap.c_vertices) and all(
                effective_w[w] == secret_of[w] for w in ap.w_vertices
            )
            dist_m = marginalize(exact_interventional(ap.model_m, I), free_c)
            dist_n = marginalize(exact_interventional(ap.model_n, I), free_c)
            entry = {"do": I.key or "(none)", "case": "covered" if covered else "violating"}
            if covered:
                tv = float(np.abs(dist_m.probs - dist_n.probs).sum()) / 2.0
                entry["tv"] = tv
                if abs(tv - 1.0) > EXACT_TOL:
                    report.ok = False
                    report.failures.append((I.key, f"expected TV 1, got {tv}"))
            else:
                dev_eq = float(np.abs(dist_m.probs - dist_n.probs).max(initial=0.0))
                comps = c_components(g, free_c)
                dev_unif = 0.0
                for comp in comps:
                    marg = marginalize(dist_m, comp)
                    dev_unif = max(dev_unif, float(np.abs(marg.probs - 1.0 / marg.probs.size).max()))
                joint_dev = float(np.abs(dist_m.probs - 1.0 / dist_m.probs.size).max(initial=0.0))
                entry["equal_dev"] = dev_eq
                entry["uniform_dev"] = max(dev_unif, joint_dev)
                if dev_eq > EXACT_TOL:
                    report.ok = False
                    report.failures.append((I.key, f"models differ by {dev_eq}"))
                if max(dev_unif, joint_dev) > EXACT_TOL:
                    report.ok = False
                    report.failures.append((I.key, f"non-uniform component, dev {dev_unif}"))
            report.ledger.append(entry)
    return report


def build_hard_graph(n: int, d: int, l: int, seed: int) -> Smcg:
    """Random bipartite lower-bound graph.

    Sources split into a random part (n vertices) and a fixed part (l*d - 2
    vertices); sinks form n/l bidirected paths of length l, every fixed
    source parents each sink block, and random sources attach with density
    2/n. n is padded up to a multiple of l.
    """
    if l * d < 2:
        raise BadDimensions("need l*d >= 2")
    if n < 1:
        raise BadDimensions("need n >= 1")
    if n % l:
        n += l - n % l
    rng = substream(seed, "hard-graph")
    n_fixed = l * d - 2
    base = n + n_fixed
    blocks = [tuple(base + i * l + j for j in range(l)) for i in range(n // l)]
    directed = []
    for k in range(n_fixed):
        for block in blocks:
            directed.append((n + k, block[k % l]))
    for block in blocks:
        hit = rng.random(n) < 2.0 / n
        targets = rng.integers(0, l, size=n)
        for a in range(n):
            if hit[a]:
                directed.append((a, block[int(targets[a])]))
    bidirected = [(block[j], block[j + 1]) for block in blocks for j in range(l - 1)]
    return Smcg(n=base + n, K=2, directed=sorted(set(directed)), bidirected=bidirected)
