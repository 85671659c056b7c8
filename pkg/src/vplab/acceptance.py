"""The acceptance suite: eleven exhaustive or randomized checks with time limits.

Each check returns a CheckResult; ``run_all`` runs them in order.  Checks are
deterministic given the seed.
"""
from __future__ import annotations

import itertools
import math
import random
import time
from dataclasses import dataclass, field
from typing import Optional

from .families import check_vp, family_nat, family_powerset, family_replacement, unflatten_depth
from .fm import (FmSpec, all_partial_orders, build_model, comp_report, poset_realization,
                 symmetric_injection_exists)
from .gen import random_assignment, random_formula, random_structure, relation_structures
from .hf import (EMPTY, canon, hset, is_nat, kpair, nat, as_nat, successor,
                 tuple_space)
from .morphisms import ef_game, enumerate_morphisms, find_rigid, is_rigid
from .sat import PointSpace, Structure, evaluate, inject_fault, sat_oracle, sentence_holds
from .syntax import (And, Eq, Exists, Language, Not, RAtom, UAtom, Var, check_fml, code_of,
                     encode, fml, format_formula, formula_basis, parse_formula, slot_count,
                     subformulas)
from . import twist as tw


@dataclass
class CheckResult:
    number: int
    name: str
    passed: Optional[bool]
    detail: str
    seconds: float
    limit: float
    data: dict = field(default_factory=dict)

    @property
    def skipped(self) -> bool:
        return self.passed is None

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s / {self.limit:.0f}s)"

    def as_dict(self) -> dict:
        return {"number": self.number, "name": self.name,
                "status": "skip" if self.skipped else ("pass" if self.passed else "fail"),
                "detail": self.detail, "seconds": round(self.seconds, 3), "limit": self.limit,
                "data": self.data}


# -- 1 and 2: truth ------------------------------------------------------------

def oracle_cases(seed: int, count: int):
    rng = random.Random(seed)
    for _ in range(count):
        consts = [nat(i) for i in range(rng.randint(0, 2))]
        S = random_structure(rng, max_size=4, constants=consts, injective=True)
        phi = random_formula(rng, S.language, qrank=rng.randint(0, 3), nvars=3)
        env = random_assignment(rng, S, 3)
        yield S, phi, env


def oracle_agreement(seed: int = 0, count: int = 1000) -> dict:
    agree, subset_ok, mismatches = 0, True, []
    for S, phi, env in oracle_cases(seed, count):
        truth, g = sat_oracle(S, phi, env)
        if truth == evaluate(S, phi, env):
            agree += 1
        elif len(mismatches) < 3:
            mismatches.append((S.label(), format_formula(phi)))
        full = frozenset(tuple_space(slot_count(phi), S.M).elements)
        subset_ok &= all(gk <= full for gk in g)
    return {"cases": count, "agree": agree, "subset_ok": subset_ok, "mismatches": mismatches}


def check_oracle_equivalence(seed=0, count=1000) -> tuple:
    r = oracle_agreement(seed, count)
    ok = r["agree"] == r["cases"] and r["cases"] >= 1000 and r["subset_ok"]
    return ok, f"{r['agree']}/{r['cases']} agree, every g(k) within the tuple space: {r['subset_ok']}", \
        {"cases": r["cases"], "agree": r["agree"]}


def quirk_case():
    S = Structure.build([nat(0), nat(1)], I={nat(0): nat(0), nat(1): nat(0)}, name="shared")
    phi = parse_formula("c:0=c:1")
    return S, phi


def check_sat_quirk(seed=0) -> tuple:
    S, phi = quirk_case()
    bottom_up, _ = sat_oracle(S, phi, {})
    standard = sentence_holds(S, phi)
    rng = random.Random(seed)
    diverging = 0
    for _ in range(300):
        consts = [nat(i) for i in range(2)]
        T = random_structure(rng, max_size=3, constants=consts, injective=False)
        psi = random_formula(rng, T.language, qrank=2)
        env = random_assignment(rng, T, 3)
        if sat_oracle(T, psi, env)[0] != evaluate(T, psi, env):
            diverging += 1
    ok = bottom_up is False and standard is True and diverging > 0
    return ok, (f"I(0)=I(1): bottom-up says {bottom_up}, standard says {standard}; "
                f"{diverging}/300 random non-injective cases diverge"), \
        {"bottom_up": bottom_up, "standard": standard, "random_divergences": diverging}


# -- 3 to 6: families and rigidity -----------------------------------------------

def check_infinity(top=7) -> tuple:
    fam = dict(family_nat(top).members)
    bad = []
    for x in range(1, top + 1):
        for y in range(x + 1, top + 1):
            S, T = fam[x], fam[y]
            iso = enumerate_morphisms("isomorphism", S, T)
            elem = enumerate_morphisms("k-elementary", S, T, k=y + 1)
            emb = enumerate_morphisms("embedding", S, T)
            if iso or elem or len(emb) != math.comb(y, x):
                bad.append((x, y, len(iso), len(elem), len(emb)))
    pairs = top * (top - 1) // 2
    return not bad, f"{pairs} pairs: no isomorphisms, no (y+1)-elementary maps, C(y,x) embeddings" \
        if not bad else f"violations {bad[:3]}", {"pairs": pairs}


def check_powerset(max_size=3) -> tuple:
    bad, pairs = [], 0
    for n in range(max_size + 1):
        A = canon(nat(i) for i in range(n))
        fam = family_powerset(A)
        for (X, S), (Y, T) in itertools.product(fam.members, repeat=2):
            pairs += 1
            emb = enumerate_morphisms("embedding", S, T)
            if X is not Y and emb:
                bad.append((X, Y))
            if X is Y and (len(emb) != 1 or any(a is not b for a, b in emb[0].pairs)):
                bad.append((X, Y))
    return not bad, f"{pairs} ordered pairs over |A|<=3: embeddings only for X=Y, and then only the identity", \
        {"pairs": pairs}


def check_replacement(max_size=3) -> tuple:
    codomain = [nat(5), nat(6)]
    bad, maps, depths = [], 0, set()
    for n in range(1, max_size + 1):
        A = canon(nat(i) for i in range(n))
        for values in itertools.product(codomain, repeat=n):
            maps += 1
            F = dict(zip(A.elements, values))
            fam = family_replacement(A, F)
            rep = check_vp(fam, "embedding")
            if rep.found:
                bad.append(F)
            depths.add(unflatten_depth(fam))
    return not bad, (f"{maps} maps: no embedding between distinct members; "
                     f"observed unflatten depth {sorted(depths)}"), \
        {"maps": maps, "unflatten_depths": sorted(depths)}


def check_rigidity() -> tuple:
    chains = all(is_rigid(find_rigid(n, "construct")) for n in range(1, 7))
    found = find_rigid(2, "search")
    edgeless = Structure.build([nat(0), nat(1)], predicates=("R",))
    ok = chains and len(found.R) == 1 and is_rigid(found) and not is_rigid(edgeless)
    return ok, (f"chains 1..6 rigid: {chains}; search(2) found {len(found.R)} edge(s); "
                f"edgeless 2-point relation rigid: {is_rigid(edgeless)}"), {}


# -- 7: naturals ---------------------------------------------------------------

def check_naturals(top=8, inj_top=6) -> tuple:
    ns = [nat(i) for i in range(top + 1)]
    fails = []
    if not all(is_nat(x) and as_nat(x) == i for i, x in enumerate(ns)):
        fails.append("encoding")
    for x, y in itertools.product(ns, repeat=2):
        if x in y:
            segment = all(z in x for z in y for w in x if z in w)
            if not (x.members < y.members and segment):
                fails.append(("i", as_nat(x), as_nat(y)))
        if not (x in y or x is y or y in x):
            fails.append(("iii", as_nat(x), as_nat(y)))
    for x, y in itertools.product(ns[:inj_top + 1], repeat=2):
        if x.members < y.members:
            for values in itertools.product(x.elements, repeat=len(y)):
                if len(set(values)) == len(values):
                    fails.append(("ii", as_nat(x), as_nat(y)))
                    break
    for x in ns[1:]:
        for y in x:
            if x is successor(y) and not all(z in y or z is y for z in x):
                fails.append(("iv", as_nat(x)))
    return not fails, "clauses (i)-(iv) hold for naturals <= 8 (injections searched <= 6)" \
        if not fails else f"failures: {fails[:3]}", {}


# -- 8: twisted membership ---------------------------------------------------------

def _protected_perm(rng, W, protected):
    free = [x for x in W if x not in protected]
    img = free[:]
    rng.shuffle(img)
    pi = dict(zip(free, img))
    return pi


def twist_samples(seed=0, count=500):
    rng = random.Random(seed)
    bad = 0
    for _ in range(count):
        U = tw.random_fragment(rng, max_size=12)
        phi = tw.random_twist_formula(rng, U)
        env = {v: rng.choice(U.W) for v in range(3)}
        if tw.eval_twisted(phi, U, env) != tw.eval_translated(phi, U, env):
            bad += 1
    return bad


def pair_cases(seed=0):
    """(fragment, x, y, hypothesis_ok) cases for the pairing equation."""
    rng = random.Random(seed)
    base = [nat(i) for i in range(3)] + [hset(nat(2)), hset(hset(EMPTY))]
    cases = []
    for x, y in itertools.product(base, repeat=2):
        protected = set(tw.pair_seeds([(x, y)]))
        W = tw.transitive_closure(list(protected) + base + [nat(4)])
        for _ in range(3):
            U = tw.UniverseFragment(W, _protected_perm(rng, W, protected))
            cases.append((U, x, y))
        # violation: move {x} to another set while keeping the rest in place
        sx, sxy = hset(x), hset(x, y)
        others = [z for z in W if z not in protected]
        if sx is not sxy and others:
            Z = others[rng.randrange(len(others))]
            W2 = tw.transitive_closure(W + [hset(Z, sxy)])
            cases.append((tw.UniverseFragment(W2, {sx: Z, Z: sx}), x, y))
    return cases


def transfer_samples(seed=0, count=300):
    rng = random.Random(seed)
    for _ in range(count):
        consts = [nat(0)] if rng.random() < 0.3 else []
        S = random_structure(rng, max_size=2, constants=consts, predicates=("R",))
        T = random_structure(rng, max_size=3, constants=consts, predicates=("R",))
        if rng.random() < 0.5:
            emb = enumerate_morphisms("embedding", S, T, limit=1)
            f = emb[0].map if emb else {x: rng.choice(T.elements) for x in S.elements}
        else:
            f = {x: rng.choice(T.elements) for x in S.elements}
        fc = tw.map_code(f)
        extra = [nat(3), hset(nat(2)), hset(hset(nat(1)))]
        W = tw.transitive_closure([S.code(), T.code(), fc] + extra)
        protected = set()
        for A in (S, T):
            for x, y in tw.structure_hypotheses(A, tw.UniverseFragment(W)):
                protected.update(tw.pair_seeds([(x, y)]))
        for p in fc:
            protected.update(tw.pair_seeds([tuple(_unpair(p))]))
        if rng.random() < 0.5:
            protected.update(v for A in (S, T) for v in (A.M, A.R, A.I_set))
        protected &= set(W)
        U = tw.UniverseFragment(W, _protected_perm(rng, W, protected))
        yield S, T, f, U, rng.randint(0, 2)


def _unpair(p):
    from .hf import unpair
    return unpair(p)


def moved_relation_case():
    """π exchanges R with another relation of the same rank; nothing else moves."""
    dom = [nat(0), nat(1)]
    S = Structure.build(dom, R=[(nat(0), nat(1))], predicates=("R",))
    R2 = canon([kpair(nat(1), nat(0))])
    W = tw.transitive_closure([S.code(), R2] + tw.pair_seeds([(x, y) for x in dom for y in dom]))
    U = tw.UniverseFragment(W, {S.R: R2, R2: S.R})
    return S, U, R2


def check_twist(seed=0) -> tuple:
    parts = {}
    parts["translation_disagreements"] = twist_samples(seed, 500)
    held = violated_wrong = sat_cases = 0
    for U, x, y in pair_cases(seed):
        ok_hyp = not tw.pair_hypothesis(x, y, U)
        z = tw.kpair_twisted(x, y, U)
        if ok_hyp:
            sat_cases += 1
            held += z is kpair(x, y) and tw.pair_search(x, y, U) == [kpair(x, y)]
        else:
            violated_wrong += z is not kpair(x, y)
    parts["pair_cases_with_hypothesis"] = sat_cases
    parts["pair_cases_holding"] = held
    parts["pair_violations_detected"] = violated_wrong

    U01 = tw.fragment([nat(1)], [[nat(0), nat(1)]])
    w01 = tw.foundation_witness(U01)
    parts["swap01_witness_is_empty"] = w01 is not None and w01[0] is EMPTY
    V4 = tw.transitive_closure([canon(c) for r in range(5) for c in itertools.combinations(
        [EMPTY, hset(EMPTY), hset(hset(EMPTY)), nat(2)], r)])
    swaps = found = 0
    for Y in V4:
        for X in Y:
            swaps += 1
            found += tw.foundation_witness(tw.swap_fragment(X, Y)) is not None
    parts["member_swaps"] = swaps
    parts["member_swaps_with_witness"] = found
    parts["identity_has_no_witness"] = tw.foundation_witness(tw.UniverseFragment(V4)) is None

    k2_ok = k2_total = 0
    for S, T, f, U, k in transfer_samples(seed):
        r = tw.key2_check(S, T, f, U, k)
        if r.hypotheses_ok:
            k2_total += 1
            k2_ok += r.holds
    S, U, R2 = moved_relation_case()
    r = tw.key2_check(S, S, {x: x for x in S.elements}, U, 2)
    k2_total += r.hypotheses_ok
    k2_ok += r.hypotheses_ok and r.holds and tw.structure_pi(S, U).R is R2
    parts["transfer_samples_with_hypothesis"] = k2_total
    parts["transfer_holding"] = k2_ok

    ok = (parts["translation_disagreements"] == 0
          and sat_cases > 0 and held == sat_cases and violated_wrong > 0
          and parts["swap01_witness_is_empty"] and found == swaps and swaps > 0
          and parts["identity_has_no_witness"]
          and k2_total >= 50 and k2_ok == k2_total)
    detail = (f"500 dual-path samples, {parts['translation_disagreements']} disagree; "
              f"pairing {held}/{sat_cases} under hypothesis, {violated_wrong} violations caught; "
              f"swap 0<->1 witness ∅: {parts['swap01_witness_is_empty']}; "
              f"{found}/{swaps} member swaps break Foundation; embedding transfer {k2_ok}/{k2_total}")
    return ok, detail, parts


# -- 9: permutation models ----------------------------------------------------------

def check_fm() -> tuple:
    names = ["i", "j", "k"]
    posets = bad = pairs = 0
    realize_ok = True
    for n in range(1, 4):
        idx = names[:n]
        subsets = [frozenset(c) for r in range(3) for c in itertools.combinations(idx, r)]
        for order in all_partial_orders(idx):
            posets += 1
            model = build_model(FmSpec(tuple(idx), order, 3, 1))
            for x, y in itertools.product(subsets, repeat=2):
                pairs += 1
                w = symmetric_injection_exists(x, y, model)
                if (w is not None) != (x <= y) or (w is not None and not w.checked):
                    bad += 1
            realize_ok &= poset_realization(model)["agrees"]
    anti = build_model(FmSpec.from_pairs(names, [], 3, 1))
    rep = comp_report(anti, family=[{"i"}, {"j"}, {"k"}])
    ok = bad == 0 and realize_ok and rep["comparable_pairs"] == 0 and not rep["comp_holds"]
    return ok, (f"{posets} partial orders, {pairs} (x,y) checks, {bad} mismatches; "
                f"down-set realization agrees: {realize_ok}; 3-antichain comparable pairs: "
                f"{rep['comparable_pairs']}"), {"posets": posets, "pairs": pairs}


# -- 10: witness minimality ------------------------------------------------------------

def small_formulas(max_sub=4) -> list:
    """Every formula over two atoms, ¬, ∧ and ∃v0 with at most max_sub subformulas."""
    atoms = [RAtom(Var(0), Var(1)), Eq(Var(0), Var(0))]
    found = {a: None for a in atoms}
    frontier = list(atoms)
    while frontier:
        new = []
        pool = list(found)
        for p in frontier:
            cands = [Not(p), Exists(0, p)]
            cands += [And(p, q) for q in pool] + [And(q, p) for q in pool]
            for c in cands:
                if c not in found and len(subformulas(c)) <= max_sub:
                    found[c] = None
                    new.append(c)
        frontier = new
    return list(found)


def padded_witnesses(w, fillers):
    """w with one or two extra entries inserted anywhere before its last entry."""
    for r in (1, 2):
        for ins in itertools.product(fillers, repeat=r):
            for positions in itertools.combinations_with_replacement(range(len(w)), r):
                padded = w[:-1]
                for pos, item in sorted(zip(positions, ins), reverse=True):
                    padded.insert(min(pos, len(padded)), item)
                padded.append(w[-1])
                yield padded


def check_minimality(max_sub=4) -> tuple:
    L = Language.of()
    extras = [code_of(RAtom(Var(1), Var(0))), code_of(UAtom(Var(0)))]
    formulas = small_formulas(max_sub)
    pads = rejected = accepted_minimal = genuine = 0
    for phi in formulas:
        fc = encode(phi, L)
        w = list(fc.witness)
        accepted_minimal += check_fml(fc.code, w, len(w), L)
        for padded in padded_witnesses(w, extras + w[:-1]):
            pads += 1
            genuine += fml(fc.code, padded, len(padded), L)
            rejected += not check_fml(fc.code, padded, len(padded), L)
    ok = rejected == pads and genuine > 0 and accepted_minimal == len(formulas)
    return ok, (f"{len(formulas)} formulas, {pads} padded sequences ({genuine} satisfy the bare "
                f"witness clauses), {rejected} rejected; minimal witnesses accepted: "
                f"{accepted_minimal}/{len(formulas)}"), \
        {"formulas": len(formulas), "pads": pads, "genuine": genuine}


# -- 11: EF games against formulas ----------------------------------------------------

def check_ef(max_size=3, k=2) -> tuple:
    structs = relation_structures(max_size)
    L = Language.of(predicates=("R",))
    levels = formula_basis(L, k, k, over=structs)
    sentences = levels[k]
    space = PointSpace(structs, k)
    sig = [tuple(space.holds_in(ext, i) for _, ext in sentences) for i in range(len(structs))]
    # spot-check the bitmask route against the plain evaluator
    rng = random.Random(0)
    spot_bad = 0
    for _ in range(40):
        i = rng.randrange(len(structs))
        p = rng.randrange(len(sentences))
        if sentence_holds(structs[i], sentences[p][0]) != sig[i][p]:
            spot_bad += 1
    bad = pairs = equiv = 0
    for i, j in itertools.combinations(range(len(structs)), 2):
        pairs += 1
        g = ef_game(structs[i], structs[j], k)
        equiv += g
        if g != (sig[i] == sig[j]):
            bad += 1
    ok = bad == 0 and spot_bad == 0
    return ok, (f"{len(structs)} structures up to isomorphism, {pairs} pairs "
                f"({equiv} rank-{k} equivalent), {len(sentences)} sentence generators; "
                f"{bad} disagreements"), {"structures": len(structs), "pairs": pairs}


# -- driver --------------------------------------------------------------------------

CHECKS = [
    (1, "oracle equivalence", 30, 1000, check_oracle_equivalence),
    (2, "bottom-up constant-equality divergence", 30, 300, check_sat_quirk),
    (3, "membership orders on naturals", 60, 21, check_infinity),
    (4, "subset families", 10, 84, check_powerset),
    (5, "function-graph families", 30, 14, check_replacement),
    (6, "rigid relations", 60, 6, check_rigidity),
    (7, "natural-number facts", 30, 81, check_naturals),
    (8, "twisted membership", 120, 900, check_twist),
    (9, "truncated permutation models", 120, 1200, check_fm),
    (10, "witness minimality", 10, 5000, check_minimality),
    (11, "EF games against formulas", 120, 6670, check_ef),
]


def run_check(number: int, guard: Optional[int] = None) -> CheckResult:
    for num, name, limit, cost, fn in CHECKS:
        if num == number:
            if guard is not None and cost > guard:
                return CheckResult(num, name, None, f"skipped: cost {cost} exceeds guard {guard}",
                                   0.0, limit)
            t0 = time.perf_counter()
            ok, detail, data = fn()
            dt = time.perf_counter() - t0
            if ok and dt > limit:
                ok, detail = False, detail + f"; too slow ({dt:.1f}s > {limit}s)"
            return CheckResult(num, name, bool(ok), detail, dt, limit, data)
    raise ValueError(f"no check numbered {number}")


def run_all(guard: Optional[int] = None, only=None) -> list:
    return [run_check(num, guard) for num, *_ in CHECKS if only is None or num in only]


def mutation_check(fault: str = "negation", count: int = 200) -> dict:
    """Run the oracle comparison with a corrupted clause; it should disagree."""
    with inject_fault(fault):
        r = oracle_agreement(seed=1, count=count)
    return {"fault": fault, "cases": count, "disagreements": count - r["agree"],
            "detected": r["agree"] < count}
