#!/usr/bin/env python3
"""Independent reference implementation used to produce the checked-in fixtures.

Implements the pinned instance generator (SplitMix64 plus the documented draw
mappings and draw order), the canonical instance file layout, and the three
models solved by exhaustive enumeration with the same tie-breaking rule
(maximum objective, then lexicographically smallest sorted match list).

Usage:
    python3 tools/reference_impl.py crates/core/fixtures
"""

import itertools
import sys
from pathlib import Path

MASK = (1 << 64) - 1
DEFAULT_HLA = [55, 110, 150, 160, 205, 210, 255, 300, 305, 310, 350, 355, 360]
BLOOD = ["O", "A", "B", "AB"]


class SplitMix64:
    def __init__(self, seed):
        self.x = seed & MASK

    def next_u64(self):
        self.x = (self.x + 0x9E3779B97F4A7C15) & MASK
        z = self.x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def index(self, k):
        return (self.next_u64() * k) >> 64

    def unit(self):
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def blood(self, weights):
        u = self.unit()
        acc = 0.0
        for t, w in zip(BLOOD, weights):
            acc += w
            if u < acc:
                return t
        last = max(i for i, w in enumerate(weights) if w > 0)
        return BLOOD[last]


def generate(seed, agents=4, pairs=5, hla=DEFAULT_HLA, blood=(0.25, 0.25, 0.25, 0.25), pra=0.5):
    rng = SplitMix64(seed)
    recs = []
    for a in range(agents):
        for k in range(pairs):
            patient = rng.blood(blood)
            donor = rng.blood(blood)
            recs.append((k, a, patient, donor))
    n = len(recs)
    pra_m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                pra_m[i][j] = 1 if rng.unit() < pra else 0
    hla_m = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j:
                hla_m[i][j] = hla[rng.index(len(hla))]
    return {"agents": agents, "pairs": recs, "pra": pra_m, "hla": hla_m}


def write_instance(inst):
    lines = ["[header]", "format_version = 1", f"n = {len(inst['pairs'])}", f"num_agents = {inst['agents']}"]
    for a in range(inst["agents"]):
        lines += ["", "[[agents]]", f"id = {a}", f'name = "agent-{a + 1}"']
    for k, a, patient, donor in inst["pairs"]:
        lines += ["", "[[pairs]]", f"pair_id = {k}", f"agent_id = {a}",
                  f'patient_blood = "{patient}"', f'donor_blood = "{donor}"']
    lines += ["", "[matrices]"]
    for key, m in (("pra_compat", inst["pra"]), ("hla_score", inst["hla"])):
        lines.append(f"{key} = [")
        for row in m:
            lines.append("    [" + ", ".join(str(x) for x in row) + "],")
        lines.append("]")
    return "\n".join(lines) + "\n"


CAN_GIVE = {"O": {"O", "A", "B", "AB"}, "A": {"A", "AB"}, "B": {"B", "AB"}, "AB": {"AB"}}


def feasible(inst, i, j):
    """Patient of i receives from donor of j."""
    return inst["pairs"][i][2] in CAN_GIVE[inst["pairs"][j][3]] and inst["pra"][i][j] == 1


def edges(inst, pool, l_hla=None, count_only=True):
    out = []
    for i, j in itertools.combinations(sorted(pool), 2):
        if not (feasible(inst, i, j) and feasible(inst, j, i)):
            continue
        if l_hla is not None and not (inst["hla"][i][j] >= l_hla and inst["hla"][j][i] >= l_hla):
            continue
        w = 1 if count_only else inst["hla"][i][j] + inst["hla"][j][i]
        out.append(((i, j), w))
    return out


def matchings(es):
    """Every set of pairwise disjoint edges."""
    def rec(k, used, chosen):
        if k == len(es):
            yield list(chosen)
            return
        yield from rec(k + 1, used, chosen)
        (i, j), _ = es[k]
        if i not in used and j not in used:
            chosen.append(k)
            yield from rec(k + 1, used | {i, j}, chosen)
            chosen.pop()
    yield from rec(0, frozenset(), [])


def best(es, agent_of=None, floors=None, agents=0):
    top = None
    for sel in matchings(es):
        if floors is not None:
            got = [0] * agents
            for k in sel:
                i, j = es[k][0]
                got[agent_of[i]] += 1
                got[agent_of[j]] += 1
            if any(g < f for g, f in zip(got, floors)):
                continue
        value = sum(es[k][1] for k in sel)
        key = [es[k][0] for k in sorted(sel)]
        if top is None or value > top[0] or (value == top[0] and key < top[1]):
            top = (value, key)
    return top


def solve_csv(inst, model, l_hla=210, count_only=False):
    agents = inst["agents"]
    agent_of = [p[1] for p in inst["pairs"]]
    pools = [[i for i, a in enumerate(agent_of) if a == s] for s in range(agents)]
    rows = ["model,agent_id,assigned_kidneys,total"]
    if model in (1, 2):
        per = []
        for pool in pools:
            es = edges(inst, pool) if model == 1 else edges(inst, pool, l_hla, count_only)
            per.append(2 * len(best(es)[1]))
    else:
        floors = [2 * len(best(edges(inst, pool))[1]) for pool in pools]
        es = edges(inst, range(len(agent_of)), l_hla, count_only)
        top = best(es, agent_of, floors, agents)
        if top is None:
            return "\n".join(rows) + "\n"
        per = [0] * agents
        for i, j in top[1]:
            per[agent_of[i]] += 1
            per[agent_of[j]] += 1
    total = sum(per)
    rows += [f"model{model},{a},{k},{total}" for a, k in enumerate(per)]
    return "\n".join(rows) + "\n"


def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "default_seed42.toml").write_text(write_instance(generate(42)))
    small = generate(7, agents=3, pairs=4, pra=0.8)
    (out / "small_seed7.toml").write_text(write_instance(small))
    (out / "small_seed7_model1.csv").write_text(solve_csv(small, 1))
    (out / "small_seed7_model2.csv").write_text(solve_csv(small, 2, 210))
    (out / "small_seed7_model3.csv").write_text(solve_csv(small, 3, 210))
    (out / "small_seed7_model3_count.csv").write_text(solve_csv(small, 3, 205, count_only=True))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/fixtures")
