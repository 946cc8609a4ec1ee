"""Semi-Markovian Bayesian networks over an Smcg.

A model attaches a prior to the hidden variable behind every bidirected
edge and a conditional probability table to every observable. Exact
interventional distributions are computed by brute-force enumeration of the
joint assignment space (observables x hiddens), which keeps every quantity
auditable at desk scale; a cell-count guard rejects anything bigger.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._kernels import ancestral_draw, product_of_factors
from .errors import (
    PreconditionViolated,
    TooLargeToEnumerate,
    VertexNotInSupport,
    VertexOutOfRange,
)
from .graph import Smcg, c_components, parents, topological_order
from .rng import substream

DEFAULT_MAX_CELLS = 1 << 26

CPT_TOL = 1e-12
DIST_TOL = 1e-9


class Intervention:
    """Partial assignment of observable vertices: the do() targets."""

    def __init__(self, assignment: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        self.pairs: tuple[tuple[int, int], ...] = tuple(
            sorted((int(v), int(x)) for v, x in items)
        )
        seen = [v for v, _ in self.pairs]
        if len(set(seen)) != len(seen):
            raise PreconditionViolated("intervention assigns a vertex twice")
        self._map = dict(self.pairs)
        self.targets: frozenset[int] = frozenset(self._map)

    def __contains__(self, v: int) -> bool:
        return v in self._map

    def __getitem__(self, v: int) -> int:
        return self._map[v]

    def __len__(self) -> int:
        return len(self.pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, Intervention) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __repr__(self) -> str:
        return f"Intervention({dict(self.pairs)})"

    @property
    def key(self) -> str:
        """Canonical string form, e.g. '1=0,4=2'; empty string for do()."""
        return ",".join(f"{v}={x}" for v, x in self.pairs)

    def validate_for(self, g: Smcg) -> None:
        for v, x in self.pairs:
            if not (0 <= v < g.n):
                raise VertexOutOfRange(f"intervention target {v} outside 0..{g.n - 1}")
            if not (0 <= x < g.K):
                raise PreconditionViolated(f"value {x} for vertex {v} outside 0..{g.K - 1}")


@dataclass
class DiscreteDist:
    """Distribution over joint values of an ordered vertex list.

    ``probs`` is row-major in ``support_vars`` order (first variable most
    significant), length ``K ** len(support_vars)``.
    """

    support_vars: tuple[int, ...]
    probs: np.ndarray
    K: int

    def __post_init__(self):
        self.support_vars = tuple(int(v) for v in self.support_vars)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.probs.shape != (self.K ** len(self.support_vars),):
            raise PreconditionViolated(
                f"probs length {self.probs.shape} does not match K^{len(self.support_vars)}"
            )
        if np.any(self.probs < 0):
            raise PreconditionViolated("negative probability entry")
        if abs(float(self.probs.sum()) - 1.0) > DIST_TOL:
            raise PreconditionViolated(f"probabilities sum to {self.probs.sum()}, not 1")


def marginalize(dist: DiscreteDist, S: Iterable[int]) -> DiscreteDist:
    """Exact marginal of ``dist`` on the subset S of its support."""
    S = sorted(set(int(v) for v in S))
    for v in S:
        if v not in dist.support_vars:
            raise VertexNotInSupport(f"vertex {v} not in support {dist.support_vars}")
    m = len(dist.support_vars)
    keep = [i for i, v in enumerate(dist.support_vars) if v in S]
    drop = tuple(i for i in range(m) if i not in keep)
    table = dist.probs.reshape((dist.K,) * m) if m else dist.probs
    out = table.sum(axis=drop) if drop else table
    return DiscreteDist(tuple(S), np.asarray(out, dtype=np.float64).ravel(), dist.K)


def atom_index(samples: np.ndarray, columns: Sequence[int], K: int) -> np.ndarray:
    """Row-major atom index of each sample restricted to ``columns``."""
    cols = list(columns)
    out = np.zeros(samples.shape[0], dtype=np.int64)
    for c in cols:
        out = out * K + samples[:, c]
    return out


class Smbn:
    """An Smcg plus hidden priors and per-vertex CPTs.

    ``hidden_priors[e]`` is the length-K prior of the hidden variable behind
    bidirected edge ``e`` (in ``graph.bidirected`` order). ``cpts[v]`` has one
    row per joint assignment of (sorted observable parents of v, then sorted
    incident hidden edge ids), first slot most significant.
    """

    def __init__(self, graph: Smcg, hidden_priors: Sequence[Sequence[float]],
                 cpts: Sequence[Sequence[Sequence[float]]]):
        self.graph = graph
        K = graph.K
        if len(hidden_priors) != len(graph.bidirected):
            raise PreconditionViolated(
                f"expected {len(graph.bidirected)} hidden priors, got {len(hidden_priors)}"
            )
        self.hidden_priors = tuple(np.asarray(p, dtype=np.float64) for p in hidden_priors)
        for e, p in enumerate(self.hidden_priors):
            if p.shape != (K,) or abs(float(p.sum()) - 1.0) > CPT_TOL or np.any(p < 0):
                raise PreconditionViolated(f"hidden prior {e} is not a distribution over {K} values")
        if len(cpts) != graph.n:
            raise PreconditionViolated(f"expected {graph.n} CPTs, got {len(cpts)}")
        self.cpts = tuple(np.asarray(t, dtype=np.float64) for t in cpts)
        for v in range(graph.n):
            rows = K ** (len(graph.parents_of[v]) + len(graph.hidden_edges_of[v]))
            t = self.cpts[v]
            if t.shape != (rows, K):
                raise PreconditionViolated(
                    f"CPT for vertex {v} has shape {t.shape}, expected {(rows, K)}"
                )
            if np.any(t < 0) or np.any(np.abs(t.sum(axis=1) - 1.0) > CPT_TOL):
                raise PreconditionViolated(f"CPT rows for vertex {v} do not sum to 1")
        self._plan = None
        self._comp_locals: dict[tuple[int, ...], np.ndarray] = {}

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def K(self) -> int:
        return self.graph.K

    def parent_slots(self, v: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(sorted observable parents, sorted incident hidden edge ids)."""
        return self.graph.parents_of[v], self.graph.hidden_edges_of[v]


def _exact_table(m: Smbn, I: Intervention, max_cells: int):
    """Joint factor table over (free observables, hidden edges) under do(I)."""
    g = m.graph
    K = g.K
    free = [v for v in range(g.n) if v not in I]
    n_hidden = len(g.bidirected)
    n_axes = len(free) + n_hidden
    if n_axes and K**n_axes > max_cells:
        raise TooLargeToEnumerate(
            f"K^{n_axes} cells exceed the guard of {max_cells}; raise max_cells to force"
        )
    axis_of = {("v", v): i for i, v in enumerate(free)}
    axis_of.update({("u", e): len(free) + e for e in range(n_hidden)})

    tables, offsets, coeffs, consts = [], [0], [], []

    def add_factor(table, coeff, const):
        tables.append(np.asarray(table, dtype=np.float64).ravel())
        offsets.append(offsets[-1] + tables[-1].size)
        coeffs.append(coeff)
        consts.append(const)

    for e in range(n_hidden):
        coeff = np.zeros(n_axes, dtype=np.int64)
        coeff[axis_of[("u", e)]] = 1
        add_factor(m.hidden_priors[e], coeff, 0)
    for v in free:
        obs_pa, hid_pa = m.parent_slots(v)
        slots = [("v", p) for p in obs_pa] + [("u", e) for e in hid_pa]
        coeff = np.zeros(n_axes, dtype=np.int64)
        const = 0
        # row*K + value indexes the flattened CPT
        for pos, slot in enumerate(slots):
            w = K ** (len(slots) - pos)
            if slot[0] == "v" and slot[1] in I:
                const += w * I[slot[1]]
            else:
                coeff[axis_of[slot]] += w
        coeff[axis_of[("v", v)]] += 1
        add_factor(m.cpts[v], coeff, const)

    joint = product_of_factors(
        n_axes, K, np.concatenate(tables) if tables else np.zeros(0),
        np.asarray(offsets[:-1], dtype=np.int64),
        np.asarray(coeffs, dtype=np.int64).reshape(len(consts), n_axes),
        np.asarray(consts, dtype=np.int64),
    )
    return free, n_hidden, joint


def exact_interventional(m: Smbn, I: Intervention | None = None,
                         max_cells: int = DEFAULT_MAX_CELLS) -> DiscreteDist:
    """Exact distribution over the free observables under do(I).

    Sums the CPT product over all hidden assignments with intervened
    vertices clamped; normalization holds by construction.
    """
    I = I or Intervention()
    I.validate_for(m.graph)
    free, n_hidden, joint = _exact_table(m, I, max_cells)
    K = m.K
    n_axes = len(free) + n_hidden
    if n_hidden:
        table = joint.reshape((K,) * n_axes)
        joint = table.sum(axis=tuple(range(len(free), n_axes))).ravel()
    return DiscreteDist(tuple(free), joint, K)


def _sampling_plan(m: Smbn):
    """Per-model step tables shared by every sampling call."""
    if m._plan is not None:
        return m._plan
    g = m.graph
    n, K, n_hidden = g.n, g.K, len(g.bidirected)
    n_slots = n + n_hidden
    tables = [p for p in m.hidden_priors] + [m.cpts[v].ravel() for v in range(n)]
    offsets = np.zeros(n_hidden + n, dtype=np.int64)
    acc = 0
    flat = []
    for i, t in enumerate(tables):
        offsets[i] = acc
        flat.append(np.asarray(t, dtype=np.float64).ravel())
        acc += flat[-1].size
    coeff_rows = np.zeros((n_hidden + n, n_slots), dtype=np.int64)
    for v in range(n):
        obs_pa, hid_pa = m.parent_slots(v)
        slots = [p for p in obs_pa] + [n + e for e in hid_pa]
        for pos, s in enumerate(slots):
            coeff_rows[n_hidden + v, s] = K ** (len(slots) - 1 - pos)
    m._plan = (np.concatenate(flat) if flat else np.zeros(0), offsets, coeff_rows)
    return m._plan


def sample_interventional(m: Smbn, I: Intervention | None = None, count: int = 1,
                          seed: int = 0) -> np.ndarray:
    """Ancestral sampling under do(I): (count, n) array of full assignments.

    Hidden variables are drawn from their priors, observables in topological
    order from their CPT rows; intervened vertices are clamped to I's values
    and their mechanisms ignored. Deterministic given (seed, I).
    """
    I = I or Intervention()
    I.validate_for(m.graph)
    g = m.graph
    n, K, n_hidden = g.n, g.K, len(g.bidirected)
    flat, offsets, coeff_rows = _sampling_plan(m)
    step_ids = list(range(n_hidden)) + [
        n_hidden + v for v in topological_order(g) if v not in I
    ]
    step_slot = np.array(
        [n + e for e in range(n_hidden)] + [i - n_hidden for i in step_ids[n_hidden:]],
        dtype=np.int64,
    )
    step_offset = offsets[step_ids]
    step_coeffs = coeff_rows[step_ids]
    step_const = np.zeros(len(step_ids), dtype=np.int64)
    preset = np.zeros(n + n_hidden, dtype=np.int64)
    for v, x in I.pairs:
        preset[v] = x
    rng = substream(seed, "sample", I.key)
    uniforms = rng.random((int(count), len(step_ids)))
    assign = ancestral_draw(preset, step_slot, step_offset, step_coeffs, step_const,
                            K, flat, uniforms)
    return assign[:, :n]


def truncation_check(m: Smbn, S: Iterable[int], D: Iterable[int],
                     d_assign: Mapping[int, int], tol: float = 1e-9,
                     max_cells: int = DEFAULT_MAX_CELLS) -> bool:
    """Do extra interventions beyond Pa(S) leave the S-distribution alone?

    Compares P[S | do(D=d)] against P[S | do(Pa(S) = d restricted)] in TV;
    requires D disjoint from S and D containing Pa(S).
    """
    g = m.graph
    S = sorted(set(int(v) for v in S))
    D = frozenset(int(v) for v in D)
    if D & set(S):
        raise PreconditionViolated("D must be disjoint from S")
    pa = parents(g, S)
    if not pa <= D:
        raise PreconditionViolated("D must contain Pa(S)")
    if set(d_assign) != set(D):
        raise PreconditionViolated("d_assign must assign exactly D")
    full = marginalize(exact_interventional(m, Intervention(d_assign), max_cells), S)
    trimmed = marginalize(
        exact_interventional(m, Intervention({v: d_assign[v] for v in pa}), max_cells), S
    )
    return float(np.abs(full.probs - trimmed.probs).sum()) / 2.0 <= tol


def local_distribution(m: Smbn, S: Sequence[int], pa_assignment: Sequence[int],
                       max_cells: int = DEFAULT_MAX_CELLS) -> DiscreteDist:
    """P[S | do(Pa(S) = pa_assignment)], the tester/learner target object."""
    S = sorted(set(int(v) for v in S))
    pa = sorted(parents(m.graph, S))
    I = Intervention(dict(zip(pa, pa_assignment)))
    return marginalize(exact_interventional(m, I, max_cells), S)


def _assignment_table(g: Smcg, comps, W, t_map, local_tables, max_cells):
    """Product over components of local tables, evaluated on all W-assignments."""
    K = g.K
    n_axes = len(W)
    if n_axes and K**n_axes > max_cells:
        raise TooLargeToEnumerate(f"K^{n_axes} cells exceed the guard of {max_cells}")
    axis_of = {v: i for i, v in enumerate(W)}
    tables, offsets, coeffs, consts = [], [0], [], []
    for comp, table in zip(comps, local_tables):
        pa = sorted(parents(g, comp))
        coeff = np.zeros(n_axes, dtype=np.int64)
        const = 0
        for pos, p in enumerate(pa):
            w = (K ** (len(pa) - 1 - pos)) * (K ** len(comp))
            if p in axis_of:
                coeff[axis_of[p]] += w
            else:
                const += w * t_map[p]
        for pos, s in enumerate(comp):
            coeff[axis_of[s]] += K ** (len(comp) - 1 - pos)
        tables.append(np.asarray(table, dtype=np.float64).ravel())
        offsets.append(offsets[-1] + tables[-1].size)
        coeffs.append(coeff)
        consts.append(const)
    if not tables:
        return np.ones(K**n_axes if n_axes else 1, dtype=np.float64)
    return product_of_factors(
        n_axes, K, np.concatenate(tables),
        np.asarray(offsets[:-1], dtype=np.int64),
        np.asarray(coeffs, dtype=np.int64).reshape(len(consts), n_axes),
        np.asarray(consts, dtype=np.int64),
    )


def component_local_tables(m: Smbn, comps, max_cells: int = DEFAULT_MAX_CELLS):
    """Exact local tables P[S_i | do(pa)] stacked over all pa rows.

    Cached per model: the same component recurs across many interventions.
    """
    K = m.K
    out = []
    for comp in comps:
        comp = tuple(comp)
        if comp not in m._comp_locals:
            pa = sorted(parents(m.graph, comp))
            rows = []
            for pa_row in range(K ** len(pa)):
                vals = _decode(pa_row, len(pa), K)
                rows.append(local_distribution(m, comp, vals, max_cells).probs)
            m._comp_locals[comp] = np.stack(rows)
        out.append(m._comp_locals[comp])
    return out


def _decode(index: int, width: int, K: int) -> tuple[int, ...]:
    out = []
    for pos in range(width):
        out.append((index // K ** (width - 1 - pos)) % K)
    return tuple(out)


def c_component_factorization(m: Smbn, T: Iterable[int], t_assign: Mapping[int, int],
                              max_cells: int = DEFAULT_MAX_CELLS) -> DiscreteDist:
    """Reconstruct P[V \\ T | do(t)] as a product of local interventionals.

    One factor per c-component of the induced subgraph on the free vertices;
    each factor is the exact local distribution under do(parents). Exists to
    validate the factorization identity and to power the learned oracle.
    """
    g = m.graph
    T = frozenset(int(v) for v in T)
    if set(t_assign) != T:
        raise PreconditionViolated("t_assign must assign exactly T")
    W = tuple(sorted(set(range(g.n)) - T))
    comps = c_components(g, W)
    local_tables = component_local_tables(m, comps, max_cells)
    probs = _assignment_table(g, comps, W, dict(t_assign), local_tables, max_cells)
    return DiscreteDist(W, probs, g.K)


def independence_lemma_check(m: Smbn, T: Iterable[int], C: Sequence[int], i: int,
                             D: Iterable[int], tol: float = 1e-9,
                             max_cells: int = DEFAULT_MAX_CELLS) -> bool:
    """Conditionals under do(D) match conditionals under do(Pa of the prefix).

    C must be a c-component of the graph induced on V \\ T, ordered
    topologically; the check sweeps every intervention value for T and D and
    every prefix assignment with nonzero conditioning probability.
    """
    g = m.graph
    K = g.K
    T = tuple(sorted(set(int(v) for v in T)))
    topo_pos = {v: p for p, v in enumerate(topological_order(g))}
    C_sorted = tuple(sorted(C, key=lambda v: topo_pos[v]))
    if tuple(sorted(C_sorted)) not in c_components(g, sorted(set(range(g.n)) - set(T))):
        raise PreconditionViolated("C is not a c-component of the induced subgraph")
    if not (1 <= i <= len(C_sorted)):
        raise PreconditionViolated(f"i must be in 1..{len(C_sorted)}")
    prefix = C_sorted[:i]
    free = set(range(g.n)) - set(T)
    pa_induced = frozenset(
        p for v in prefix for p in g.parents_of[v] if p in free
    ) - set(prefix)
    D = frozenset(int(v) for v in D)
    if not (pa_induced <= D <= free - set(prefix)):
        raise PreconditionViolated("need V\\(T u prefix) >= D >= Pa_G'(prefix)")
    D_sorted = tuple(sorted(D))
    pa_sorted = tuple(sorted(pa_induced))

    for t_row in range(K ** len(T)):
        t_map = dict(zip(T, _decode(t_row, len(T), K)))
        for d_row in range(K ** len(D_sorted)):
            d_map = dict(zip(D_sorted, _decode(d_row, len(D_sorted), K)))
            lhs_I = Intervention({**t_map, **d_map})
            rhs_I = Intervention({**t_map, **{p: d_map[p] for p in pa_sorted}})
            lhs = marginalize(exact_interventional(m, lhs_I, max_cells), prefix)
            rhs = marginalize(exact_interventional(m, rhs_I, max_cells), prefix)
            kp = K ** (i - 1)
            lhs_t, rhs_t = lhs.probs.reshape(kp, K), rhs.probs.reshape(kp, K)
            lhs_cond, rhs_cond = lhs_t.sum(axis=1), rhs_t.sum(axis=1)
            for row in range(kp):
                if lhs_cond[row] <= 1e-12 or rhs_cond[row] <= 1e-12:
                    continue
                diff = np.abs(lhs_t[row] / lhs_cond[row] - rhs_t[row] / rhs_cond[row])
                if float(diff.max()) > tol:
                    return False
    return True


def random_smbn(g: Smcg, alpha: float = 1.0, seed: int = 0) -> Smbn:
    """Random model on g: CPT rows and priors from a symmetric Dirichlet."""
    rng = substream(seed, "gen-model")
    K = g.K
    priors = [rng.dirichlet(np.full(K, alpha)) for _ in g.bidirected]
    cpts = []
    for v in range(g.n):
        rows = K ** (len(g.parents_of[v]) + len(g.hidden_edges_of[v]))
        cpts.append(rng.dirichlet(np.full(K, alpha), size=rows))
    return Smbn(g, priors, cpts)


def model_equal(a: Smbn, b: Smbn) -> bool:
    return (a.graph == b.graph
            and all(np.array_equal(x, y) for x, y in zip(a.hidden_priors, b.hidden_priors))
            and all(np.array_equal(x, y) for x, y in zip(a.cpts, b.cpts)))
