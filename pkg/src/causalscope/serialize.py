"""JSON (de)serialization for every artifact the CLI reads or writes.

All writers produce canonical bytes: sorted keys, two-space indent, trailing
newline. Identical values always serialize to identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .algorithms import LearnedOracle
from .covering import CoveringSet
from .graph import GeneralCausalGraph, GraphClassParams, Smcg
from .model import DiscreteDist, Intervention, Smbn


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def save_json(obj, path) -> None:
    Path(path).write_text(canonical_dumps(obj))


def load_json(path):
    return json.loads(Path(path).read_text())


# -- graphs ----------------------------------------------------------------

def graph_to_dict(g: Smcg) -> dict:
    return {
        "n": g.n,
        "K": g.K,
        "directed": [list(e) for e in g.directed],
        "bidirected": [list(e) for e in g.bidirected],
    }


def graph_from_dict(d: dict) -> Smcg:
    return Smcg(n=d["n"], K=d["K"], directed=d.get("directed", ()),
                bidirected=d.get("bidirected", ()))


def general_graph_to_dict(h: GeneralCausalGraph) -> dict:
    return {
        "n_observable": h.n_observable,
        "n_unobservable": h.n_unobservable,
        "K": h.K,
        "edges": [list(e) for e in h.directed],
    }


def general_graph_from_dict(d: dict) -> GeneralCausalGraph:
    return GeneralCausalGraph(
        n_observable=d["n_observable"], n_unobservable=d["n_unobservable"],
        K=d["K"], directed=d.get("edges", ()),
    )


# -- models ----------------------------------------------------------------

def model_to_dict(m: Smbn) -> dict:
    g = m.graph
    cpts = {}
    for v in range(g.n):
        obs_pa, hid_pa = m.parent_slots(v)
        width = len(obs_pa) + len(hid_pa)
        rows = {}
        for row in range(g.K**width):
            vals = []
            rest = row
            for pos in range(width):
                vals.append(rest // g.K ** (width - 1 - pos) % g.K)
            rows[",".join(str(x) for x in vals)] = [float(p) for p in m.cpts[v][row]]
        cpts[str(v)] = rows
    return {
        **graph_to_dict(g),
        "hidden_priors": {str(e): [float(p) for p in prior]
                          for e, prior in enumerate(m.hidden_priors)},
        "cpts": cpts,
    }


def model_from_dict(d: dict) -> Smbn:
    g = graph_from_dict(d)
    priors = [d["hidden_priors"][str(e)] for e in range(len(g.bidirected))]
    cpts = []
    for v in range(g.n):
        width = len(g.parents_of[v]) + len(g.hidden_edges_of[v])
        table = np.empty((g.K**width, g.K))
        for key, probs in d["cpts"][str(v)].items():
            vals = [int(x) for x in key.split(",")] if key else []
            row = 0
            for x in vals:
                row = row * g.K + x
            table[row] = probs
        cpts.append(table)
    return Smbn(g, priors, cpts)


# -- distributions, interventions, samples ---------------------------------

def dist_to_dict(dist: DiscreteDist) -> dict:
    return {
        "support_vars": list(dist.support_vars),
        "K": dist.K,
        "probs": [float(p) for p in dist.probs],
    }


def dist_from_dict(d: dict) -> DiscreteDist:
    return DiscreteDist(tuple(d["support_vars"]), np.asarray(d["probs"]), d["K"])


def parse_do(text: str) -> Intervention:
    """Parse 'v=x,v=x' notation; empty/blank means do()."""
    text = (text or "").strip()
    if not text:
        return Intervention()
    pairs = []
    for part in text.split(","):
        v, x = part.split("=")
        pairs.append((int(v), int(x)))
    return Intervention(pairs)


def write_samples(samples: np.ndarray, path) -> None:
    lines = [",".join(str(int(x)) for x in row) for row in samples]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_samples(path) -> np.ndarray:
    rows = [
        [int(x) for x in line.split(",")]
        for line in Path(path).read_text().splitlines() if line.strip()
    ]
    return np.asarray(rows, dtype=np.int64)


# -- covering sets ----------------------------------------------------------

def covering_to_dict(cs: CoveringSet) -> dict:
    return {
        "interventions": [{str(v): x for v, x in iv.pairs} for iv in cs.interventions],
        "metadata": {
            "d": cs.params.d,
            "l": cs.params.l,
            "delta": cs.target_delta,
            "construction": cs.construction,
            **{k: v for k, v in cs.meta.items()},
        },
    }


def covering_from_dict(d: dict) -> CoveringSet:
    meta = dict(d.get("metadata", {}))
    params = GraphClassParams(d=meta.pop("d"), l=meta.pop("l"))
    delta = meta.pop("delta", None)
    construction = meta.pop("construction", "explicit")
    interventions = tuple(
        Intervention({int(v): int(x) for v, x in iv.items()})
        for iv in d["interventions"]
    )
    return CoveringSet(interventions, params, delta, construction, meta)


# -- learned oracles ---------------------------------------------------------

def oracle_to_dict(o: LearnedOracle) -> dict:
    locals_out = {}
    for (S, pa), dist in o.locals.items():
        key = ",".join(str(v) for v in S) + "|" + ",".join(str(x) for x in pa)
        locals_out[key] = [float(p) for p in dist.probs]
    return {"graph": graph_to_dict(o.graph), "locals": locals_out, "meta": o.meta}


def oracle_from_dict(d: dict) -> LearnedOracle:
    g = graph_from_dict(d["graph"])
    locals_map = {}
    for key, probs in d["locals"].items():
        s_part, pa_part = key.split("|")
        S = tuple(int(v) for v in s_part.split(",") if s_part)
        pa = tuple(int(x) for x in pa_part.split(",")) if pa_part else ()
        locals_map[(S, pa)] = DiscreteDist(S, np.asarray(probs), g.K)
    return LearnedOracle(graph=g, locals=locals_map, meta=d.get("meta", {}))
