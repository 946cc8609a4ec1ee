"""Acceptance suite: the package's exit criteria, one test per criterion.

Each test prints a single PASS/FAIL line (run with -s to see them inline).
These are heavier, statistically meaningful runs; expect a few minutes total
with the numba backend.
"""

import itertools
import json
import math
import time

import numpy as np

from causalscope import (
    GeneralCausalGraph,
    Intervention,
    build_adversary_pair,
    build_randomized,
    c2st,
    c_component_factorization,
    c_components,
    cgft,
    clp_learn,
    exact_interventional,
    exact_local_oracle,
    general_c_components,
    independence_lemma_check,
    oracle_query,
    project_to_smcg,
    random_graph,
    random_smbn,
    squared_hellinger,
    subadditivity_audit,
    topological_order,
    tv_distance,
    verify_adversary_pair,
    verify_covering,
)
from causalscope.model import DiscreteDist, _decode
from causalscope import cli


def report(num, name, passed, detail):
    line = f"[criterion {num:02d}] {name}: {'PASS' if passed else 'FAIL'} ({detail})"
    print(line)
    assert passed, line


def all_interventions(n, K):
    for mask in range(1 << n):
        T = [v for v in range(n) if mask >> v & 1]
        for row in range(K ** len(T)):
            yield T, dict(zip(T, _decode(row, len(T), K)))


def test_criterion_01_factorization_identity():
    worst = 0.0
    pairs = 0
    n_models = 500
    for i in range(n_models):
        n = 2 + i % 6
        g = random_graph(n, 2, 2, 2, seed=1000 + i)
        m = random_smbn(g, seed=2000 + i)
        for T, t in all_interventions(n, 2):
            f = c_component_factorization(m, T, t)
            e = exact_interventional(m, Intervention(t))
            worst = max(worst, tv_distance(f, e))
            pairs += 1
    report(1, "c-component factorization identity", worst <= 1e-9,
           f"{n_models} models, {pairs} (T,t) pairs, max TV {worst:.2e}")


def test_criterion_02_subadditivity():
    holds_all = True
    worst_ratio = 0.0
    checked = 0
    for i in range(400):
        n = 2 + i % 6
        g = random_graph(n, 2, 2, 2, seed=3000 + i)
        x = random_smbn(g, seed=4000 + i)
        y = random_smbn(g, seed=5000 + i)
        rep = subadditivity_audit(x, y, g)
        holds_all &= rep.holds
        if rep.bound > 0:
            worst_ratio = max(worst_ratio, rep.worst_joint_h2 / rep.bound)
        checked += 1
    obs_holds_all = True
    for i in range(100):
        n = 3 + i % 6
        g = random_graph(n, 2, 2, 1, seed=6000 + i)  # l=1: no bidirected edges
        x = random_smbn(g, seed=7000 + i)
        y = random_smbn(g, seed=8000 + i)
        rep = subadditivity_audit(x, y, g)
        holds_all &= rep.holds
        obs_holds_all &= bool(rep.holds_observable)
        checked += 1
    report(2, "squared-Hellinger subadditivity bound", holds_all and obs_holds_all,
           f"{checked} model pairs, worst joint/bound ratio {worst_ratio:.3f}, "
           f"observable-case bound also held")


def test_criterion_03_hellinger_tv_sandwich():
    rng = np.random.default_rng(99)
    worst_violation = 0.0
    trials = 10_000
    for _ in range(trials):
        d = int(rng.integers(2, 9))
        p = DiscreteDist((0,), rng.dirichlet(np.ones(d)), d)
        q = DiscreteDist((0,), rng.dirichlet(np.ones(d)), d)
        h2, tv = squared_hellinger(p, q), tv_distance(p, q)
        worst_violation = max(worst_violation, h2 - tv, tv - math.sqrt(2 * h2))
    report(3, "H^2 <= TV <= sqrt(2 H^2) sandwich", worst_violation <= 1e-12,
           f"{trials} random pairs, worst violation {worst_violation:.2e}")


def test_criterion_04_covering_guarantee():
    trials, ok = 200, 0
    for seed in range(trials):
        g = random_graph(4 + seed % 5, 2, 2, 2, seed=9000 + seed)
        cs = build_randomized(g, 0.05, seed=seed)
        ok += verify_covering(g, cs) is None
    rate = ok / trials
    report(4, "randomized covering success rate", rate >= 0.93,
           f"{ok}/{trials} seeded draws covered at delta=0.05")


def test_criterion_05_tester_soundness_completeness():
    ap = build_adversary_pair(2, 2, (1, 1))
    trials = 60
    floor = 2 / 3 - 0.12
    rates = {}
    t0 = time.time()
    for name, runner in (
        ("c2st-equal", lambda s: c2st(ap.model_m, ap.model_m, ap.graph, 0.5, s)[0] == "equal"),
        ("c2st-far", lambda s: c2st(ap.model_m, ap.model_n, ap.graph, 0.5, s)[0] == "far"),
        ("cgft-equal", lambda s: cgft(ap.model_m, ap.model_m, ap.graph, 0.5, s)[0] == "equal"),
        ("cgft-far", lambda s: cgft(ap.model_m, ap.model_n, ap.graph, 0.5, s)[0] == "far"),
    ):
        hits = sum(runner(seed) for seed in range(trials))
        rates[name] = hits / trials
    passed = all(r >= floor for r in rates.values())
    detail = ", ".join(f"{k} {v:.3f}" for k, v in rates.items())
    report(5, "tester completeness/soundness at the 2/3 level", passed,
           f"{detail}; floor {floor:.3f}; {time.time() - t0:.0f}s")


def test_criterion_06_adversary_exactness():
    failures = []
    pairs = 0
    for l, s in itertools.product((1, 2, 3), (1, 2, 3)):
        for secret_int in range(2**s):
            secret = tuple(secret_int >> j & 1 for j in range(s))
            rep = verify_adversary_pair(build_adversary_pair(l, s, secret))
            pairs += 1
            if not rep.ok:
                failures.append((l, s, secret, rep.failures[:1]))
    report(6, "adversary pair exactness (TV=1 / uniform cases)", not failures,
           f"{pairs} path-tree pairs exhaustively enumerated; failures: {failures[:2]}")


def test_criterion_07_learning_contract():
    eps, runs = 0.3, 30
    good = 0
    exact_ok = True
    for r in range(runs):
        n = 2 + r % 4
        g = random_graph(n, 2, 2, 2, seed=10_000 + r)
        x = random_smbn(g, seed=11_000 + r)
        oracle = clp_learn(x, g, eps, seed=12_000 + r)
        worst = 0.0
        for T, t in all_interventions(n, 2):
            got = oracle_query(oracle, T, t)
            want = exact_interventional(x, Intervention(t))
            worst = max(worst, tv_distance(got, want))
        good += worst < eps
        if r < 10:  # exact-locals injection must be exact everywhere
            oe = exact_local_oracle(x)
            for T, t in all_interventions(n, 2):
                if tv_distance(oracle_query(oe, T, t),
                               exact_interventional(x, Intervention(t))) > 1e-9:
                    exact_ok = False
    rate = good / runs
    report(7, "learning contract (oracle within eps)", rate >= 2 / 3 and exact_ok,
           f"{good}/{runs} runs under eps={eps}; exact-locals oracle exact: {exact_ok}")


def test_criterion_08_projection_correctness():
    cases = []
    # hidden fork
    h = GeneralCausalGraph(2, 1, 2, [(2, 0), (2, 1)])
    g = project_to_smcg(h)
    cases.append(g.directed == () and g.bidirected == ((0, 1),))
    # hidden chain of two unobservables
    h = GeneralCausalGraph(2, 2, 2, [(0, 2), (2, 3), (3, 1)])
    g = project_to_smcg(h)
    cases.append(g.directed == ((0, 1),) and g.bidirected == ())
    # mixed: fork through a hidden chain plus a direct edge
    h = GeneralCausalGraph(3, 2, 2, [(3, 4), (4, 0), (3, 1), (0, 2), (1, 2)])
    g = project_to_smcg(h)
    cases.append(g.directed == ((0, 2), (1, 2)) and g.bidirected == ((0, 1),))
    # hidden vertex with an observable parent acts as a directed relay
    h = GeneralCausalGraph(3, 1, 2, [(0, 3), (3, 1), (3, 2)])
    g = project_to_smcg(h)
    cases.append(g.directed == ((0, 1), (0, 2)) and g.bidirected == ((1, 2),))
    # c-components agree between the general definition and the projection
    comps_ok = True
    for seed in range(50):
        rng = np.random.default_rng(seed)
        n_obs, n_hid = 4, 2
        edges = []
        for u in range(n_obs, n_obs + n_hid):
            for v in rng.choice(n_obs, size=2, replace=False):
                edges.append((u, int(v)))
        h = GeneralCausalGraph(n_obs, n_hid, 2, edges)
        comps_ok &= general_c_components(h) == c_components(project_to_smcg(h))
    report(8, "projection to semi-Markovian form", all(cases) and comps_ok,
           f"{len(cases)} hand-built cases plus 50 random c-component cross-checks")


def test_criterion_09_independence_lemma():
    instances, checked = 100, 0
    ok = True
    for i in range(instances):
        n = 3 + i % 3
        g = random_graph(n, 2, 2, 2, seed=13_000 + i)
        m = random_smbn(g, seed=14_000 + i)
        pos = {v: p for p, v in enumerate(topological_order(g))}
        for mask in range(1 << n):
            T = [v for v in range(n) if mask >> v & 1]
            free = [v for v in range(n) if not mask >> v & 1]
            for C in c_components(g, free):
                ordered = sorted(C, key=lambda v: pos[v])
                for i_prefix in range(1, len(ordered) + 1):
                    prefix = set(ordered[:i_prefix])
                    lower = frozenset(
                        p for v in prefix for p in g.parents_of[v]
                        if p in set(free)
                    ) - prefix
                    upper = set(free) - prefix
                    extra = sorted(upper - lower)
                    for emask in range(1 << len(extra)):
                        D = set(lower) | {extra[j] for j in range(len(extra))
                                          if emask >> j & 1}
                        ok &= independence_lemma_check(m, T, C, i_prefix, D, tol=1e-9)
                        checked += 1
    report(9, "independence lemma by exact enumeration", ok,
           f"{instances} instances, {checked} (T, C, i, D) combinations")


def test_criterion_10_cli_determinism(tmp_path):
    def run_all(root):
        root.mkdir()
        out = {}

        def go(name, argv):
            assert cli.main([str(a) for a in argv]) in (0, 1)
            out[name] = [p for p in sorted(root.glob("**/*"))
                         if p.is_file() and not p.name.endswith("manifest.json")]

        g, m, m2 = root / "g.json", root / "m.json", root / "m2.json"
        go("gen-graph", ["gen-graph", "--kind", "random", "--n", "3", "--seed", "3",
                         "--out", g])
        go("gen-graph-hard", ["gen-graph", "--kind", "hard", "--n", "4", "--d", "1",
                              "--l", "2", "--seed", "4", "--out", root / "hard.json"])
        go("gen-model", ["gen-model", "--graph", g, "--seed", "5", "--out", m])
        go("gen-model2", ["gen-model", "--graph", g, "--seed", "6", "--out", m2])
        general = root / "h.json"
        general.write_text(json.dumps({"n_observable": 2, "n_unobservable": 1,
                                       "K": 2, "edges": [[2, 0], [2, 1]]}))
        go("project", ["project", "--general", general, "--out", root / "proj.json"])
        go("cover", ["cover", "--graph", g, "--delta", "0.1", "--seed", "1",
                     "--out", root / "cover.json"])
        go("cover-resampled", ["cover", "--graph", g, "--method", "resampled",
                               "--seed", "1", "--out", root / "cover2.json"])
        go("cover-verify", ["cover-verify", "--graph", g, "--cover", root / "cover.json"])
        go("dist", ["dist", "--model", m, "--do", "0=1", "--out", root / "dist.json"])
        go("sample", ["sample", "--model", m, "--do", "0=1", "--count", "25",
                      "--seed", "2", "--out", root / "s.txt"])
        go("c2st", ["c2st", "--x", m, "--y", m2, "--graph", g, "--eps", "0.5",
                    "--seed", "7", "--report", root / "c2st.json"])
        go("cgft", ["cgft", "--model", m, "--x", m, "--graph", g, "--eps", "0.5",
                    "--seed", "8", "--report", root / "cgft.json"])
        go("c2st-unknown", ["c2st-unknown", "--x", m, "--y", m, "--d", "1", "--l", "2",
                            "--K", "2", "--n", "3", "--eps", "0.6", "--seed", "9",
                            "--report", root / "unk.json"])
        go("learn", ["learn", "--x", m, "--graph", g, "--eps", "0.4", "--seed", "10",
                     "--out", root / "oracle.json"])
        go("query", ["query", "--oracle", root / "oracle.json", "--do", "0=0",
                     "--out", root / "q.json"])
        go("audit", ["audit-subadditivity", "--x", m, "--y", m2, "--graph", g,
                     "--out", root / "audit.json"])
        adv = root / "adv"
        go("adversary", ["adversary", "--l", "2", "--s", "2", "--secret", "1,1",
                         "--outdir", adv])
        go("verify-adversary", ["verify-adversary", "--pair", adv,
                                "--report", root / "advrep.json"])
        go("replay", ["replay", root / "dist.json.manifest.json"])
        return {p.relative_to(root): p.read_bytes() for p in out["replay"]}

    a = run_all(tmp_path / "a")
    b = run_all(tmp_path / "b")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    report(10, "CLI determinism (two full runs byte-identical)", same,
           f"{len(a)} artifacts compared across independent runs")
