"""Covering intervention sets.

A covering set exposes every local distribution: for every subset S of every
c-component and every assignment to Pa(S), some intervention leaves S free
while clamping Pa(S) to exactly that assignment. Two constructions are
provided: an oblivious randomized draw sized by a union bound, and a
resampling loop in the constructive Lovasz-local-lemma style for graphs with
bounded total degree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateParams, IterationBudgetExceeded, TooLargeToEnumerate
from .graph import GraphClassParams, Smcg, c_components, class_params, max_total_degree, parents
from .model import Intervention, _decode
from .rng import substream

RESAMPLE_ROUND_BUDGET = 10**6
DEFAULT_MAX_WITNESSES = 5_000_000


@dataclass
class CoveringSet:
    interventions: tuple[Intervention, ...]
    params: GraphClassParams
    target_delta: float | None
    construction: str  # "randomized" | "resampled" | "explicit"
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.interventions)


def randomized_size(n: int, K: int, d: int, l: int, delta: float) -> int:
    """ceil(K^(ld) * (3d)^l * (ln n + 2 l d ln K + ln(1/delta))), base clamped for d=0."""
    if n <= 0:
        raise DegenerateParams("need n >= 1")
    if not (0.0 < delta < 1.0):
        raise DegenerateParams("delta must be in (0, 1)")
    base = max(3 * d, 1) ** l
    t = K ** (l * d) * base * (math.log(n) + 2 * l * d * math.log(K) + math.log(1.0 / delta))
    return max(1, int(math.ceil(t)))


def resampled_size(K: int, d: int, l: int) -> int:
    """ceil(K^(ld) * (3d)^l * (l d^2 + l d ln K + 2)), base clamped for d=0."""
    base = max(3 * d, 1) ** l
    return max(1, int(math.ceil(K ** (l * d) * base * (l * d * d + l * d * math.log(K) + 2))))


def _draw_family(rng, t: int, n: int, K: int, d: int) -> np.ndarray:
    """t random interventions: each vertex free w.p. 1/(d+1), else uniform value."""
    free = rng.random((t, n)) < 1.0 / (d + 1)
    vals = rng.integers(0, K, size=(t, n))
    return np.where(free, -1, vals).astype(np.int16)


def _family_to_interventions(A: np.ndarray) -> tuple[Intervention, ...]:
    out = []
    for row in A:
        out.append(Intervention({int(v): int(x) for v, x in enumerate(row) if x >= 0}))
    return tuple(out)


def family_matrix(cs: CoveringSet, n: int) -> np.ndarray:
    A = np.full((len(cs.interventions), n), -1, dtype=np.int16)
    for j, iv in enumerate(cs.interventions):
        for v, x in iv.pairs:
            A[j, v] = x
    return A


def build_randomized_family(n: int, K: int, d: int, l: int, delta: float,
                            seed: int) -> CoveringSet:
    """Graph-free randomized construction; covering w.p. >= 1 - delta for any
    graph in the (d, l) class on n vertices."""
    t = randomized_size(n, K, d, l, delta)
    rng = substream(seed, "cover-randomized")
    A = _draw_family(rng, t, n, K, d)
    return CoveringSet(
        interventions=_family_to_interventions(A),
        params=GraphClassParams(d=d, l=l),
        target_delta=delta,
        construction="randomized",
        meta={"seed": int(seed), "n": int(n), "K": int(K)},
    )


def build_randomized(g: Smcg, delta: float, seed: int) -> CoveringSet:
    p = class_params(g)
    return build_randomized_family(g.n, g.K, p.d, p.l, delta, seed)


def _event_list(g: Smcg):
    """All (S, Pa(S), pa) witness requirements in canonical order."""
    events = []
    for comp in c_components(g):
        for mask in range(1, 1 << len(comp)):
            S = tuple(comp[j] for j in range(len(comp)) if mask >> j & 1)
            pa = tuple(sorted(parents(g, S)))
            for row in range(g.K ** len(pa)):
                events.append((S, pa, _decode(row, len(pa), g.K)))
    return events


def _event_covered(A: np.ndarray, S, pa, pa_vals) -> bool:
    ok = (A[:, list(S)] == -1).all(axis=1) if S else np.ones(len(A), dtype=bool)
    if pa:
        ok &= (A[:, list(pa)] == np.asarray(pa_vals, dtype=np.int16)).all(axis=1)
    return bool(ok.any())


def verify_covering(g: Smcg, cs: CoveringSet,
                    max_witnesses: int = DEFAULT_MAX_WITNESSES):
    """Exhaustively check the covering property.

    Returns None when every (S, pa) pair is witnessed, else the first
    uncovered (S, pa_assignment) in canonical order.
    """
    events = _event_list(g)
    if len(events) > max_witnesses:
        raise TooLargeToEnumerate(
            f"{len(events)} witness requirements exceed the guard of {max_witnesses}"
        )
    A = family_matrix(cs, g.n)
    for S, pa, pa_vals in events:
        if not _event_covered(A, S, pa, pa_vals):
            return S, pa_vals
    return None


def build_resampled(g: Smcg, seed: int,
                    round_budget: int = RESAMPLE_ROUND_BUDGET) -> CoveringSet:
    """Covering set via Moser-Tardos resampling of uncovered requirements.

    Draws the randomized family sized for the bounded-total-degree regime,
    then repeatedly picks the first uncovered (S, pa) and redraws the columns
    of S and Pa(S) across all interventions until nothing is uncovered.
    """
    if g.n <= 0:
        raise DegenerateParams("need n >= 1")
    p = class_params(g)
    d = max(max_total_degree(g), p.d)
    l = p.l
    K = g.K
    t = resampled_size(K, d, l)
    rng = substream(seed, "cover-resampled")
    A = _draw_family(rng, t, g.n, K, d)

    events = _event_list(g)
    touching: dict[int, list[int]] = {v: [] for v in range(g.n)}
    for idx, (S, pa, _) in enumerate(events):
        for v in set(S) | set(pa):
            touching[v].append(idx)
    bad = {idx for idx, (S, pa, vals) in enumerate(events)
           if not _event_covered(A, S, pa, vals)}

    rounds = 0
    while bad:
        if rounds >= round_budget:
            raise IterationBudgetExceeded(
                f"resampling exceeded {round_budget} rounds; parameters likely "
                "outside the local-lemma regime"
            )
        idx = min(bad)
        S, pa, _ = events[idx]
        cols = sorted(set(S) | set(pa))
        free = rng.random((t, len(cols))) < 1.0 / (d + 1)
        vals = rng.integers(0, K, size=(t, len(cols)))
        A[:, cols] = np.where(free, -1, vals).astype(np.int16)
        affected = set()
        for v in cols:
            affected.update(touching[v])
        for j in affected:
            S2, pa2, vals2 = events[j]
            if _event_covered(A, S2, pa2, vals2):
                bad.discard(j)
            else:
                bad.add(j)
        rounds += 1

    return CoveringSet(
        interventions=_family_to_interventions(A),
        params=GraphClassParams(d=d, l=l),
        target_delta=None,
        construction="resampled",
        meta={"seed": int(seed), "n": int(g.n), "K": int(K), "resample_rounds": rounds},
    )


def explicit_covering(interventions: Sequence[Intervention], params: GraphClassParams,
                      **meta) -> CoveringSet:
    return CoveringSet(tuple(interventions), params, None, "explicit", dict(meta))
