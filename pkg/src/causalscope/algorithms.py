"""Top-level interventional algorithms.

Goodness-of-fit and two-sample testing decompose model distance into
Hellinger subtests on local distributions P[S | do(pa(S))] exposed by a
covering intervention set; the learner estimates the same locals and serves
any interventional distribution back through c-component factorization. The
subadditivity audit validates, by exact enumeration, the inequality that
makes the decomposition sound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .covering import (
    CoveringSet,
    build_randomized,
    build_randomized_family,
    verify_covering,
)
from .errors import NotCovering, PreconditionViolated
from .graph import Smcg, c_components, class_params, parents
from .model import (
    DEFAULT_MAX_CELLS,
    DiscreteDist,
    Intervention,
    Smbn,
    _assignment_table,
    _decode,
    atom_index,
    exact_interventional,
    local_distribution,
    sample_interventional,
)
from .rng import derive_seed
from .stats import (
    DEFAULT_BASE_CONSTANT,
    DEFAULT_CALIBRATION_REPS,
    DEFAULT_LEARN_CONSTANT,
    TestParams,
    hellinger_two_sample_test,
    learn_empirical,
    learn_sample_size,
    sample_size_for_test,
    squared_hellinger,
)

AUDIT_SLACK = 1e-9


@dataclass(frozen=True)
class LocalTarget:
    """One (S, pa(S)) pair with the covering-set intervention exposing it."""

    S: tuple[int, ...]
    pa_vertices: tuple[int, ...]
    pa_assignment: tuple[int, ...]
    witness: int


@dataclass
class TesterConfig:
    __test__ = False  # keep pytest collection away despite the name

    base_constant: float = DEFAULT_BASE_CONSTANT
    calibration_reps: int = DEFAULT_CALIBRATION_REPS
    budget_mode: str = "per-target"  # or "aggregate"
    delta_cover: float = 0.1
    cover_attempts: int = 50
    learn_constant: float = DEFAULT_LEARN_CONSTANT


def enumerate_local_targets(g: Smcg, cs: CoveringSet,
                            require_covering: bool = True) -> list[LocalTarget]:
    """All distinct (S, pa) pairs exposed by the covering set.

    A pair is exposed by intervention I when I leaves S free and clamps
    Pa(S); duplicates keep the first witness. Output is sorted by (S, pa).
    ``require_covering=False`` enumerates whatever a deficient set exposes
    (diagnostic use; the testers lose their far-side guarantee).
    """
    if require_covering and verify_covering(g, cs) is not None:
        raise NotCovering("the provided intervention set is not covering for this graph")
    shapes = []
    for comp in c_components(g):
        for mask in range(1, 1 << len(comp)):
            S = tuple(comp[j] for j in range(len(comp)) if mask >> j & 1)
            shapes.append((S, tuple(sorted(parents(g, S)))))
    found: dict[tuple, LocalTarget] = {}
    for j, iv in enumerate(cs.interventions):
        for S, pa in shapes:
            if any(v in iv for v in S):
                continue
            if not all(p in iv for p in pa):
                continue
            key = (S, tuple(iv[p] for p in pa))
            if key not in found:
                found[key] = LocalTarget(S, pa, key[1], j)
    return [found[k] for k in sorted(found)]


def _local_test_budget(K: int, d: int, l: int, n: int, eps: float,
                       config: TesterConfig, delta_sub: float) -> int:
    eps2_loc = eps**2 / (2.0 * K ** (l * (d + 1)) * n)
    if config.budget_mode == "aggregate":
        return int(math.ceil(config.base_constant * K ** (l * (d + 7 / 4)) * n / eps**2))
    return sample_size_for_test(K**l, eps2_loc, delta_sub, config.base_constant)


def _build_verified_covering(g: Smcg, seed: int, config: TesterConfig) -> CoveringSet:
    # the randomized draw fails w.p. <= delta_cover; retry until verified so
    # covering failure never eats into the testers' error budget
    for attempt in range(config.cover_attempts):
        cs = build_randomized(g, config.delta_cover, derive_seed(seed, "cover", attempt))
        if verify_covering(g, cs) is None:
            return cs
    raise NotCovering(f"no covering draw verified in {config.cover_attempts} attempts")


def _run_local_tests(x: Smbn, y: Smbn, g: Smcg, eps: float, seed: int,
                     covering: CoveringSet | None, config: TesterConfig, mode: str,
                     require_covering: bool = True):
    if not (0.0 < eps <= 1.0):
        raise PreconditionViolated("eps must be in (0, 1]")
    if x.graph != g or y.graph != g:
        raise PreconditionViolated("both models must live on the given graph")
    p = class_params(g)
    K, n = g.K, g.n
    if covering is None:
        cs = _build_verified_covering(g, seed, config)
    else:
        cs = covering
        if require_covering and verify_covering(g, cs) is not None:
            raise NotCovering("provided covering set fails verification")
    targets = enumerate_local_targets(g, cs, require_covering=False)
    eps2_loc = eps**2 / (2.0 * K ** (p.l * (p.d + 1)) * n)
    delta_sub = 1.0 / (3.0 * K ** (p.l * p.d) * 2**p.l * n)
    budget = _local_test_budget(K, p.d, p.l, n, eps, config, delta_sub)
    params = TestParams(eps2_loc, delta_sub, budget, config.calibration_reps,
                        config.base_constant)

    seed_x, seed_y = derive_seed(seed, "x-samples"), derive_seed(seed, "y-samples")
    batches: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    entries = []
    decision = "equal"
    total_samples = 0
    for t_idx, tgt in enumerate(targets):
        entry = {"S": list(tgt.S), "pa": list(tgt.pa_assignment),
                 "pa_vertices": list(tgt.pa_vertices), "witness": tgt.witness}
        if decision == "far":
            entry["verdict"] = "skipped"
            entries.append(entry)
            continue
        if tgt.witness not in batches:
            iv = cs.interventions[tgt.witness]
            sx = sample_interventional(x, iv, budget, seed_x)
            sy = sample_interventional(y, iv, budget, seed_y)
            batches[tgt.witness] = (sx, sy)
            total_samples += 2 * budget
        sx, sy = batches[tgt.witness]
        verdict = hellinger_two_sample_test(
            atom_index(sx, tgt.S, K), atom_index(sy, tgt.S, K),
            K ** len(tgt.S), params, derive_seed(seed, "calibration", t_idx),
        )
        entry.update(statistic=verdict.statistic, threshold=verdict.threshold,
                     verdict=verdict.decision, samples=verdict.samples_used)
        entries.append(entry)
        if verdict.decision == "far":
            decision = "far"
    report = {
        "mode": mode,
        "decision": decision,
        "covering_size": len(cs),
        "interventions_used": len(batches),
        "total_samples": total_samples,
        "seed": int(seed),
        "params": {
            "eps": eps, "eps2_local": eps2_loc, "delta_subtest": delta_sub,
            "budget_per_side": budget, "budget_mode": config.budget_mode,
            "base_constant": config.base_constant,
            "calibration_reps": config.calibration_reps,
            "d": p.d, "l": p.l, "K": K, "n": n,
        },
        "targets": entries,
    }
    return decision, report


def c2st(x: Smbn, y: Smbn, g: Smcg, eps: float, seed: int,
         covering: CoveringSet | None = None,
         config: TesterConfig | None = None,
         require_covering: bool = True):
    """Two-sample test: are the models identical or eps-far in some intervention?

    Returns ("equal" | "far", report). Fails with probability at most 1/3
    on inputs that are exactly equal or eps-far.
    """
    return _run_local_tests(x, y, g, eps, seed, covering, config or TesterConfig(),
                            "c2st", require_covering)


def cgft(m: Smbn, x: Smbn, g: Smcg, eps: float, seed: int,
         covering: CoveringSet | None = None,
         config: TesterConfig | None = None):
    """Goodness-of-fit test of unknown x against the known hypothesis m.

    Runs the two-sample tester with the known side's samples drawn from m;
    identical thresholds and budgets.
    """
    return _run_local_tests(m, x, g, eps, seed, covering, config or TesterConfig(), "cgft")


def c2st_unknown_graph(x: Smbn, y: Smbn, d: int, l: int, K: int, n: int,
                       eps: float, seed: int,
                       config: TesterConfig | None = None):
    """Two-sample test knowing only the class bounds (d, l), not the graph.

    Uses the graph-free randomized covering family (failure budget 1/6) and
    tests every subset of size <= l of the free vertices of each
    intervention, at per-subtest error 1/(6 K^(ld) 2^l n).
    """
    config = config or TesterConfig()
    if not (0.0 < eps <= 1.0):
        raise PreconditionViolated("eps must be in (0, 1]")
    if x.n != n or y.n != n or x.K != K or y.K != K:
        raise PreconditionViolated("models do not match the declared (n, K)")
    cs = build_randomized_family(n, K, d, l, 1.0 / 6.0, derive_seed(seed, "cover"))
    # duplicate interventions re-run the same subtests on fresh samples: they
    # add false-rejection mass without adding power, so run each pattern once
    distinct = []
    seen = set()
    for iv in cs.interventions:
        if iv.pairs not in seen:
            seen.add(iv.pairs)
            distinct.append(iv)
    n_subtests = sum(
        math.comb(n - len(iv), size)
        for iv in distinct
        for size in range(1, min(l, n - len(iv)) + 1)
    )
    eps2_loc = eps**2 / (2.0 * K ** (l * (d + 1)) * n)
    # the union bound must close over every execution, so the per-subtest
    # budget is the tighter of the nominal figure and 1/(6 * executions)
    delta_sub = min(
        1.0 / (6.0 * K ** (l * d) * 2**l * n),
        1.0 / (6.0 * max(n_subtests, 1)),
    )
    budget = _local_test_budget(K, d, l, n, eps, config, delta_sub)
    params = TestParams(eps2_loc, delta_sub, budget, config.calibration_reps,
                        config.base_constant)
    seed_x, seed_y = derive_seed(seed, "x-samples"), derive_seed(seed, "y-samples")

    decision = "equal"
    entries = []
    total_samples = 0
    interventions_used = 0
    for j, iv in enumerate(distinct):
        if decision == "far":
            break
        free = [v for v in range(n) if v not in iv]
        sx = sample_interventional(x, iv, budget, seed_x)
        sy = sample_interventional(y, iv, budget, seed_y)
        interventions_used += 1
        total_samples += 2 * budget
        for size in range(1, min(l, len(free)) + 1):
            if decision == "far":
                break
            for S in itertools.combinations(free, size):
                verdict = hellinger_two_sample_test(
                    atom_index(sx, S, K), atom_index(sy, S, K), K ** len(S),
                    params, derive_seed(seed, "calibration", j, *S),
                )
                if verdict.decision == "far":
                    decision = "far"
                    entries.append({"witness": j, "S": list(S),
                                    "statistic": verdict.statistic,
                                    "threshold": verdict.threshold,
                                    "verdict": "far",
                                    "samples": verdict.samples_used})
                    break
    report = {
        "mode": "c2st-unknown-graph",
        "decision": decision,
        "covering_size": len(cs),
        "distinct_interventions": len(distinct),
        "planned_subtests": n_subtests,
        "interventions_used": interventions_used,
        "total_samples": total_samples,
        "seed": int(seed),
        "params": {
            "eps": eps, "eps2_local": eps2_loc, "delta_subtest": delta_sub,
            "budget_per_side": budget, "d": d, "l": l, "K": K, "n": n,
            "budget_mode": config.budget_mode, "base_constant": config.base_constant,
            "calibration_reps": config.calibration_reps,
        },
        "rejections": entries,
    }
    return decision, report


@dataclass
class LearnedOracle:
    """Learned local distributions, one per (S, pa) target, plus the graph.

    Any interventional distribution is reconstructed as the product of the
    stored locals over the c-components of the induced free subgraph.
    """

    graph: Smcg
    locals: dict[tuple[tuple[int, ...], tuple[int, ...]], DiscreteDist]
    meta: dict = field(default_factory=dict)


def clp_learn(x: Smbn, g: Smcg, eps: float, seed: int,
              covering: CoveringSet | None = None,
              config: TesterConfig | None = None) -> LearnedOracle:
    """Learn every local distribution well enough that any interventional
    query answered by factorization lands within eps total variation.

    Per-target TV goal eps_loc with eps_loc^2 = eps^2 / (2 K^(l(d+1)) n) and
    per-target failure budget 1/(3 K^(ld) 2^l n).
    """
    config = config or TesterConfig()
    if not (0.0 < eps < 1.0):
        raise PreconditionViolated("eps must be in (0, 1)")
    if x.graph != g:
        raise PreconditionViolated("model must live on the given graph")
    p = class_params(g)
    K, n = g.K, g.n
    if covering is None:
        cs = _build_verified_covering(g, seed, config)
    else:
        cs = covering
        if verify_covering(g, cs) is not None:
            raise NotCovering("provided covering set fails verification")
    targets = enumerate_local_targets(g, cs)
    eps_loc = math.sqrt(eps**2 / (2.0 * K ** (p.l * (p.d + 1)) * n))
    delta_t = 1.0 / (3.0 * K ** (p.l * p.d) * 2**p.l * n)

    need = {}
    for tgt in targets:
        need[tgt.witness] = max(
            need.get(tgt.witness, 0),
            learn_sample_size(K ** len(tgt.S), eps_loc, delta_t, config.learn_constant),
        )
    seed_x = derive_seed(seed, "x-samples")
    batches = {
        w: sample_interventional(x, cs.interventions[w], m, seed_x)
        for w, m in sorted(need.items())
    }
    locals_map = {}
    for tgt in targets:
        atoms = atom_index(batches[tgt.witness], tgt.S, K)
        locals_map[(tgt.S, tgt.pa_assignment)] = learn_empirical(
            atoms, tgt.S, K, eps_loc, delta_t, config.learn_constant
        )
    meta = {
        "eps": eps, "eps_local": eps_loc, "delta_target": delta_t,
        "seed": int(seed), "covering_size": len(cs),
        "total_samples": int(sum(need.values())),
        "learn_constant": config.learn_constant,
    }
    return LearnedOracle(graph=g, locals=locals_map, meta=meta)


def exact_local_oracle(m: Smbn, max_cells: int = DEFAULT_MAX_CELLS) -> LearnedOracle:
    """Oracle whose locals are the exact local distributions of m."""
    g = m.graph
    locals_map = {}
    for comp in c_components(g):
        for mask in range(1, 1 << len(comp)):
            S = tuple(comp[j] for j in range(len(comp)) if mask >> j & 1)
            pa = tuple(sorted(parents(g, S)))
            for row in range(g.K ** len(pa)):
                vals = _decode(row, len(pa), g.K)
                locals_map[(S, vals)] = local_distribution(m, S, vals, max_cells)
    return LearnedOracle(graph=g, locals=locals_map, meta={"source": "exact"})


def oracle_query_with_mass(o: LearnedOracle, T, t_assign,
                           max_cells: int = DEFAULT_MAX_CELLS):
    """Factorized interventional estimate plus the pre-normalization mass.

    Learned locals multiply to only approximately a distribution; the
    product is renormalized (an all-zero product falls back to uniform) and
    the raw mass is returned alongside.
    """
    g = o.graph
    T = frozenset(int(v) for v in T)
    t_map = {int(v): int(val) for v, val in dict(t_assign).items()}
    if set(t_map) != T:
        raise PreconditionViolated("t_assign must assign exactly T")
    for v in T:
        if not (0 <= v < g.n):
            raise PreconditionViolated(f"vertex {v} out of range")
    W = tuple(sorted(set(range(g.n)) - T))
    comps = c_components(g, W)
    tables = []
    for comp in comps:
        pa = tuple(sorted(parents(g, comp)))
        rows = []
        for row in range(g.K ** len(pa)):
            key = (comp, _decode(row, len(pa), g.K))
            if key not in o.locals:
                raise PreconditionViolated(f"oracle is missing the local for {key}")
            rows.append(o.locals[key].probs)
        tables.append(np.stack(rows))
    probs = _assignment_table(g, comps, W, t_map, tables, max_cells)
    mass = float(probs.sum())
    if mass > 0:
        probs = probs / mass
    else:
        probs = np.full(probs.shape, 1.0 / probs.size)
    return DiscreteDist(W, probs, g.K), mass


def oracle_query(o: LearnedOracle, T, t_assign,
                 max_cells: int = DEFAULT_MAX_CELLS) -> DiscreteDist:
    """Estimated P[V \\ T | do(t)] from the stored locals."""
    dist, _ = oracle_query_with_mass(o, T, t_assign, max_cells)
    return dist


@dataclass
class AuditReport:
    gamma_max: float
    worst_joint_h2: float
    bound: float
    holds: bool
    worst_intervention: str
    observable_bound: float | None = None
    holds_observable: bool | None = None


def subadditivity_audit(x: Smbn, y: Smbn, g: Smcg,
                        max_cells: int = DEFAULT_MAX_CELLS) -> AuditReport:
    """Exhaustive check that local closeness bounds every interventional gap.

    gamma_max is the largest squared Hellinger distance between exact local
    distributions over full c-components of any induced subgraph G[V \\ T];
    worst_joint_h2 is the largest squared Hellinger distance between full
    interventional distributions over all (T, t). Holds when
    worst <= gamma_max * K^(l(d+1)) * n (+ slack); bidirected-free graphs
    are additionally held to the tighter worst <= n * gamma_max.
    """
    if x.graph != g or y.graph != g:
        raise PreconditionViolated("both models must live on the given graph")
    p = class_params(g)
    K, n = g.K, g.n
    local_cache: dict[tuple, float] = {}
    gamma_max = 0.0
    worst = 0.0
    worst_at = ""
    for mask in range(1 << n):
        T = [v for v in range(n) if mask >> v & 1]
        W = [v for v in range(n) if not mask >> v & 1]
        for comp in c_components(g, W):
            pa = tuple(sorted(parents(g, comp)))
            for row in range(K ** len(pa)):
                key = (comp, row)
                if key not in local_cache:
                    vals = _decode(row, len(pa), K)
                    local_cache[key] = squared_hellinger(
                        local_distribution(x, comp, vals, max_cells),
                        local_distribution(y, comp, vals, max_cells),
                    )
                gamma_max = max(gamma_max, local_cache[key])
        for row in range(K ** len(T)):
            iv = Intervention(dict(zip(T, _decode(row, len(T), K))))
            h2 = squared_hellinger(exact_interventional(x, iv, max_cells),
                                   exact_interventional(y, iv, max_cells))
            if h2 > worst:
                worst, worst_at = h2, iv.key or "(none)"
    bound = gamma_max * K ** (p.l * (p.d + 1)) * n
    report = AuditReport(
        gamma_max=gamma_max, worst_joint_h2=worst, bound=bound,
        holds=worst <= bound + AUDIT_SLACK, worst_intervention=worst_at,
    )
    if not g.bidirected:
        report.observable_bound = n * gamma_max
        report.holds_observable = worst <= report.observable_bound + AUDIT_SLACK
    return report
