"""Randomised property suites shared by the CLI and the test-suite."""
from __future__ import annotations

import random
from typing import Callable

from .bkmod import (
    BKModule,
    Form,
    Workspace,
    apply_base_change,
    random_base_change,
    random_base_change_matrix,
    random_frobenius,
    random_module,
)
from .cdm import (
    NoConvergence,
    b_operation,
    cdm_reduce,
    closed_form_cdm,
    is_bad_genre,
    relating_scalars,
    verify_reduction,
)
from .coeffring import CoeffRing, random_vseries
from .quotient import (
    check_etale_base_change,
    compose,
    functor_T,
    g_action,
    identity_element,
    invariant_functions,
    invariants_independent,
    random_group_element,
    random_xpoint,
)
from .straighten import (
    assemble_F,
    is_integral_straightening,
    presentation_identity,
    reachability,
    straighten,
    straighten_identity,
)
from .tametype import first_obstruction, second_obstruction

SUITES = ("coeffring", "cdm", "straighten", "quotient")


class Check:
    """Counts samples of one property and keeps the first counterexample."""

    def __init__(self, name: str):
        self.name = name
        self.samples = 0
        self.failures = 0
        self.counterexample = None
        self.notes: dict = {}

    def record(self, ok: bool, example: Callable[[], object] | None = None):
        self.samples += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None and example is not None:
                self.counterexample = example()

    def report(self) -> dict:
        out = {"samples": self.samples, "failures": self.failures, "passed": self.failures == 0}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        out.update(self.notes)
        return out


def _module_json(M: BKModule):
    return lambda: M.to_json()


def suite_coeffring(ws: Workspace, samples: int, rng: random.Random) -> list[Check]:
    ring = ws.ring
    space = ws.vspace
    axioms, units, phi, division = Check("ring_axioms"), Check("unit_inverse"), Check("phi_multiplicative"), Check("divide_exact")
    for _ in range(samples):
        a, b, c = (ring.random(rng) for _ in range(3))
        ok = ring.mul(a, ring.mul(b, c)) == ring.mul(ring.mul(a, b), c)
        ok &= ring.mul(a, ring.add(b, c)) == ring.add(ring.mul(a, b), ring.mul(a, c))
        ok &= ring.add(a, ring.neg(a)) == 0
        axioms.record(ok, lambda: [ring.to_json(a), ring.to_json(b), ring.to_json(c)])
        if ring.is_unit(a):
            units.record(ring.mul(a, ring.inv(a)) == 1, lambda: ring.to_json(a))
        else:
            try:
                ring.inv(a)
                units.record(False, lambda: ring.to_json(a))
            except ZeroDivisionError:
                units.record(True)
        s, t = random_vseries(space, rng), random_vseries(space, rng)
        phi.record((s * t).phi() == s.phi() * t.phi(), lambda: [s.to_json(), t.to_json()])
        r = rng.randrange(0, 3)
        division.record((s.shift(r)).divide_exact(r) == s, lambda: s.to_json())
    return [axioms, units, phi, division]


def suite_cdm(ws: Workspace, samples: int, rng: random.Random) -> list[Check]:
    tau = ws.tau
    f = tau.f
    fact, ident, conv, closed, classify = (
        Check("b_operation_factorization"),
        Check("reduction_identity"),
        Check("cdm_convergence"),
        Check("closed_form_agreement"),
        Check("base_change_classification"),
    )
    for _ in range(samples):
        form = rng.choice([Form.ETA, Form.ETA_PRIME])
        G = random_frobenius(ws, rng, 0, form)
        res = b_operation(G, form)
        fact.record(res.B * res.M == G and res.B.det().valuation() == 0, lambda: G.to_json())

        i = 1 % f
        F = random_frobenius(ws, rng, i, form)
        P = random_base_change_matrix(ws, rng, tau.gamma[i - 1])
        phP = P.phi_to(tau.gamma[i], tau.z[i], tau.p)
        rF = b_operation(F, form)
        lhs = b_operation(F * phP, form).B
        rhs = rF.B * b_operation(rF.M * phP, form).B
        ident.record(lhs == rhs, lambda: {"F": F.to_json(), "P": P.to_json()})

        M = random_module(ws, rng)
        if is_bad_genre(M):
            continue
        try:
            r = cdm_reduce(M)
            conv.record(verify_reduction(M, r), _module_json(M))
        except NoConvergence:
            conv.record(False, _module_json(M))
            continue

        Ms = random_module(ws, rng, forms=[form] * f, scalar=True)
        if not is_bad_genre(Ms):
            try:
                rs = cdm_reduce(Ms)
                cf = closed_form_cdm(Ms, rs.limit)
                closed.record(all(a == b for a, b in zip(cf, rs.intermediate)), _module_json(Ms))
            except NoConvergence:
                closed.record(False, _module_json(Ms))

        N = apply_base_change(M, random_base_change(ws, rng))
        try:
            r2 = cdm_reduce(N)
        except NoConvergence:
            classify.record(False, _module_json(N))
            continue
        sols = relating_scalars(ws, r.params, r2.params)
        ok = len(sols) >= 1
        if r.params.has_unit_parameter():
            ok &= len(sols) == 1
        classify.record(ok, _module_json(M))
    return [fact, ident, conv, closed, classify]


def find_reachability_failure(ws: Workspace, rng: random.Random, tries: int = 2000) -> dict | None:
    """Search scalar eta-form data for an index where U * F = F' has no solution."""
    for _ in range(tries):
        M = random_module(ws, rng, scalar=True)
        if is_bad_genre(M):
            continue
        try:
            r = cdm_reduce(M)
        except NoConvergence:
            continue
        for entry in reachability(M, r):
            if not entry["reachable"]:
                return {"module": M.to_json(), "index": entry["index"]}
    return None


def suite_straighten(ws: Workspace, samples: int, rng: random.Random) -> list[Check]:
    tau = ws.tau
    ring = ws.ring
    if second_obstruction(tau.p, tau.z):
        witness = Check("reachability_failure_instance")
        found = find_reachability_failure(ws, rng)
        witness.record(found is not None)
        if found is not None:
            witness.notes["instance"] = found
        witness.notes["second_obstruction"] = True
        return [witness]
    ident, integral, reach = Check("straighten_identity"), Check("straighten_integral"), Check("reachability_all_true")
    for _ in range(samples):
        x = random_xpoint(ring, tau.f, rng)
        y = tuple(ring.random(rng) for _ in range(tau.f))
        G = functor_T(ws, x).restricted()
        try:
            data = straighten(ws, y, G)
        except NoConvergence:
            ident.record(False, lambda: {"x": x.to_json(), "y": [ring.to_json(c) for c in y]})
            continue
        ident.record(straighten_identity(ws, y, G, data.J), lambda: {"x": x.to_json()})
        integral.record(is_integral_straightening(ws, data.J), lambda: {"x": x.to_json()})
        if not first_obstruction(tau.p, tau.z):
            M = random_module(ws, rng, scalar=True)
            if is_bad_genre(M):
                continue
            try:
                r = cdm_reduce(M)
            except NoConvergence:
                reach.record(False, _module_json(M))
                continue
            rr = reachability(M, r)
            reach.record(all(e["reachable"] and e["criterion"] for e in rr), _module_json(M))
    return [ident, integral, reach]


def suite_quotient(ws: Workspace, samples: int, rng: random.Random) -> list[Check]:
    tau = ws.tau
    ring = ws.ring
    f = tau.f
    axioms, inv, pres, etale, indep = (
        Check("action_axioms"),
        Check("invariance"),
        Check("presentation_identity"),
        Check("etale_base_change"),
        Check("invariants_independent_off_degenerate_locus"),
    )
    field = CoeffRing(ring.p, ring.m, 1)
    can_straighten = not second_obstruction(tau.p, tau.z)
    for _ in range(samples):
        x = random_xpoint(ring, f, rng)
        g, h = random_group_element(ring, f, rng), random_group_element(ring, f, rng)
        ident = g_action(compose(g, h), x) == g_action(g, g_action(h, x))
        ident &= g_action(identity_element(ring, f), x) == x
        axioms.record(ident, lambda: x.to_json())
        inv.record(invariant_functions(g_action(g, x)) == invariant_functions(x), lambda: x.to_json())
        pt = random_xpoint(field, f, rng)
        generic = all(Ai[3] != 0 for Ai in pt.A[1:])
        indep.record(invariants_independent(pt) == generic, lambda: pt.to_json())
        if can_straighten:
            try:
                J = assemble_F(ws, g, x)
            except NoConvergence:
                pres.record(False, lambda: {"g": g.to_json(), "x": x.to_json()})
                continue
            pres.record(presentation_identity(ws, g, x, J), lambda: {"g": g.to_json(), "x": x.to_json()})
            rep = check_etale_base_change(ws, functor_T(ws, x).restricted(),
                                          functor_T(ws, g_action(g, x)).restricted(), J)
            etale.record(rep["passed"], lambda: {"g": g.to_json(), "x": x.to_json()})
    return [axioms, inv, pres, etale, indep]


RUNNERS = {
    "coeffring": suite_coeffring,
    "cdm": suite_cdm,
    "straighten": suite_straighten,
    "quotient": suite_quotient,
}


def run_suites(names, ws: Workspace, samples: int, seed: int) -> dict:
    results = {}
    for name in names:
        rng = random.Random(f"{seed}:{name}")
        checks = RUNNERS[name](ws, samples, rng)
        results[name] = {c.name: c.report() for c in checks}
    passed = all(c["passed"] for r in results.values() for c in r.values())
    return {"suites": results, "passed": passed}
