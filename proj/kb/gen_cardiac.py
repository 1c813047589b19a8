#!/usr/bin/env python3
"""Writes cardiac.ckb and cardiac_actions.ckb.

Both files describe the same process. In cardiac.ckb the treatments are
context atoms; in cardiac_actions.ckb each treatment is a yes/no p-predicate
whose prior is pinned by the plan, and rhythm(t) has all five as parents.
"""
import itertools
import pathlib
import random

RHYTHM = ["nsr", "vf", "vt", "af", "svt", "b", "a"]
POA = ["none", "1min", "2min", "3min", "4min", "5min", "sustained"]
CD = ["none", "mild", "moderate", "severe"]
CBF = ["present", "absent"]
INTER = ["no_inter", "dfib", "cpr"]
MED = ["no_med", "epi", "atro", "lido"]

# Cells fixed by hand; everything else in a row is filled around them.
FIXED = {
    ("no_inter", "epi"): {("nsr", "nsr"): 50, ("vf", "nsr"): 10, ("vt", "nsr"): 10},
    ("dfib", "atro"): {("af", "vf"): 350},
    ("no_inter", "no_med"): {("vf", "a"): 150},
    ("no_inter", "atro"): {("af", "vf"): 200},
}

# Rough pull of each treatment towards some rhythms.
PULL = {
    "dfib": {"nsr": 40, "b": 10},
    "cpr": {"vf": 10, "b": 10},
    "no_inter": {},
    "epi": {"nsr": 10, "vf": 10},
    "atro": {"b": 10, "nsr": 5},
    "lido": {"nsr": 10, "vt": -5},
    "no_med": {"a": 10},
}


def fmt(milli):
    s = f"{milli / 1000:.3f}".rstrip("0")
    return s + "0" if s.endswith(".") else s


def transition_rows():
    rng = random.Random(1994)
    rows = {}
    for inter, med in itertools.product(INTER, MED):
        fixed = FIXED.get((inter, med), {})
        for prev in RHYTHM:
            weights = {}
            for nxt in RHYTHM:
                w = rng.randint(1, 20) + (60 if nxt == prev else 0)
                w += PULL[inter].get(nxt, 0) + PULL[med].get(nxt, 0)
                weights[nxt] = max(w, 1)
            row = {n: v for (p, n), v in fixed.items() if p == prev}
            free = [n for n in RHYTHM if n not in row]
            budget = 1000 - sum(row.values())
            total = sum(weights[n] for n in free)
            for n in free:
                row[n] = budget * weights[n] // total
            row[max(free, key=lambda n: row[n])] += 1000 - sum(row.values())
            rows[(inter, med, prev)] = row
    return rows


# Regimes are made exclusive by precedence: dfib over cpr, epi over atro
# over lido.
def inter_guard(inter):
    return {
        "no_inter": ["no_inter(X,T-1)"],
        "dfib": ["dfib(X,T-1)"],
        "cpr": ["cpr(X,T-1)", "not dfib(X,T-1)"],
    }[inter]


def med_guard(med):
    return {
        "no_med": ["no_med(X,T-1)"],
        "epi": ["epi(X,T-1)"],
        "atro": ["atro(X,T-1)", "not epi(X,T-1)"],
        "lido": ["lido(X,T-1)", "not epi(X,T-1)", "not atro(X,T-1)"],
    }[med]


def regime_of(acts):
    inter = "dfib" if acts["dfib"] else "cpr" if acts["cpr"] else "no_inter"
    med = "epi" if acts["epi"] else "atro" if acts["atro"] else "lido" if acts["lido"] else "no_med"
    return inter, med


CBF_GIVEN = {"nsr": 1000, "vf": 0, "vt": 100, "af": 950, "svt": 900, "b": 800, "a": 0}

POA_NEXT = {p: POA[min(i + 1, len(POA) - 1)] for i, p in enumerate(POA)}

# cd(t) given poa(t), cd(t-1); damage never recedes.
CD_GIVEN = {
    "none": {c: {c: 1000} for c in CD},
    "1min": {c: {c: 1000} for c in CD},
    "2min": {c: {c: 1000} for c in CD},
    "3min": {"none": {"none": 700, "mild": 300}, "mild": {"moderate": 1000},
             "moderate": {"moderate": 800, "severe": 200}, "severe": {"severe": 1000}},
    "4min": {"none": {"none": 400, "mild": 500, "moderate": 100}, "mild": {"mild": 600, "moderate": 400},
             "moderate": {"moderate": 600, "severe": 400}, "severe": {"severe": 1000}},
    "5min": {"none": {"none": 200, "mild": 500, "moderate": 200, "severe": 100},
             "mild": {"mild": 500, "moderate": 400, "severe": 100},
             "moderate": {"moderate": 500, "severe": 500}, "severe": {"severe": 1000}},
    "sustained": {"none": {"none": 100, "mild": 600, "moderate": 200, "severe": 100},
                  "mild": {"mild": 980, "moderate": 20},
                  "moderate": {"moderate": 700, "severe": 300}, "severe": {"severe": 1000}},
}

HEADER = """\
# Cardiac arrest example: rhythm, cerebral blood flow (cbf), period of
# anoxia (poa) and cerebral damage (cd) of a patient over discrete time.
# Generated by gen_cardiac.py.

domain person = {john, mary}.

value rhythm = {nsr, vf, vt, af, svt, b, a}.
value cbf = {present, absent}.
value poa = {none, 1min, 2min, 3min, 4min, 5min, sustained}.
value cd = {none, mild, moderate, severe}.

pred rhythm(person, time).
pred cbf(person, time).
pred poa(person, time).
pred cd(person, time).
"""

SHARED = """
prob rhythm(X,0,nsr) = 0.001.
prob rhythm(X,0,vf) = 0.74.
prob rhythm(X,0,vt) = 0.1.
prob rhythm(X,0,af) = 0.05.
prob rhythm(X,0,svt) = 0.03.
prob rhythm(X,0,b) = 0.029.
prob rhythm(X,0,a) = 0.05.

prob poa(X,0,none) = 0.99.
prob poa(X,0,1min) = 0.005.
prob poa(X,0,2min) = 0.002.
prob poa(X,0,3min) = 0.001.
prob poa(X,0,4min) = 0.001.
prob poa(X,0,5min) = 0.0005.
prob poa(X,0,sustained) = 0.0005.

prob cd(X,0,none) = 0.99.
prob cd(X,0,mild) = 0.005.
prob cd(X,0,moderate) = 0.003.
prob cd(X,0,severe) = 0.002.
"""


def shared_tail():
    out = ["", "# cbf follows the rhythm at the same time."]
    for r in RHYTHM:
        p = CBF_GIVEN[r]
        out.append(f"prob cbf(X,T,present) | rhythm(X,T,{r}) = {fmt(p)}.")
        out.append(f"prob cbf(X,T,absent) | rhythm(X,T,{r}) = {fmt(1000 - p)}.")
    out += ["", "# anoxia resets with flow and grows without it."]
    for c in CBF:
        for p in POA:
            nxt = "none" if c == "present" else POA_NEXT[p]
            for v in POA:
                out.append(f"prob poa(X,T,{v}) | cbf(X,T-1,{c}), poa(X,T-1,{p}) = {fmt(1000 if v == nxt else 0)}.")
    out += ["", "# cerebral damage given current anoxia and previous damage."]
    for p in POA:
        for c in CD:
            row = CD_GIVEN[p][c]
            for v in CD:
                out.append(f"prob cd(X,T,{v}) | poa(X,T,{p}), cd(X,T-1,{c}) = {fmt(row.get(v, 0))}.")
    return "\n".join(out) + "\n"


def context_kb(rows):
    out = [HEADER, "cpred dfib(person, time).", "cpred cpr(person, time).", "cpred epi(person, time).",
           "cpred atro(person, time).", "cpred lido(person, time).", "cpred no_inter(person, time).",
           "cpred no_med(person, time).", "", "combine rhythm with noisy_max.", SHARED,
           "# rhythm transitions, one block per treatment regime."]
    for inter, med in itertools.product(INTER, MED):
        guard = ", ".join(inter_guard(inter) + med_guard(med))
        out.append(f"\n# {inter} / {med}")
        for prev in RHYTHM:
            for nxt in RHYTHM:
                a = fmt(rows[(inter, med, prev)][nxt])
                out.append(f"prob rhythm(X,T,{nxt}) | rhythm(X,T-1,{prev}) = {a} <- {guard}.")
    out.append(shared_tail())
    out.append("ctx no_inter(X,T) <- not dfib(X,T), not cpr(X,T).")
    out.append("ctx no_med(X,T) <- not lido(X,T), not atro(X,T), not epi(X,T).")
    return "\n".join(out) + "\n"


ACTS = ["dfib", "cpr", "epi", "atro", "lido"]


def action_kb(rows):
    out = [HEADER]
    for a in ACTS:
        out.append(f"value {a}_act = {{no, yes}}.")
    for a in ACTS:
        out.append(f"pred {a}_act(person, time).")
    for a in ACTS:
        out.append(f"cpred {a}(person, time).")
    out += ["", "combine rhythm with noisy_max.", SHARED, "# action priors are pinned by the plan."]
    for a in ACTS:
        out.append(f"prob {a}_act(X,T,yes) = 1.0 <- {a}(X,T).")
        out.append(f"prob {a}_act(X,T,no) = 0.0 <- {a}(X,T).")
        out.append(f"prob {a}_act(X,T,yes) = 0.0 <- not {a}(X,T).")
        out.append(f"prob {a}_act(X,T,no) = 1.0 <- not {a}(X,T).")
    out.append("\n# rhythm transitions with every action as a parent.")
    for bits in itertools.product([False, True], repeat=len(ACTS)):
        acts = dict(zip(ACTS, bits))
        inter, med = regime_of(acts)
        given = ", ".join(f"{a}_act(X,T-1,{'yes' if acts[a] else 'no'})" for a in ACTS)
        for prev in RHYTHM:
            for nxt in RHYTHM:
                a = fmt(rows[(inter, med, prev)][nxt])
                out.append(f"prob rhythm(X,T,{nxt}) | rhythm(X,T-1,{prev}), {given} = {a}.")
    out.append(shared_tail())
    return "\n".join(out) + "\n"


def main():
    here = pathlib.Path(__file__).resolve().parent
    rows = transition_rows()
    (here / "cardiac.ckb").write_text(context_kb(rows))
    (here / "cardiac_actions.ckb").write_text(action_kb(rows))


if __name__ == "__main__":
    main()
