"""Built-in property checks runnable from the command line.

Each check re-verifies one mathematical contract of the library on freshly
sampled inputs: the restricted-solve identity behind the support cost, the
closed-form gradient, midpoint convexity of the fractional relaxation, the
scalar relaxation family, agreement of the tree search with exhaustive
enumeration, and feasibility of the stepwise heuristic. They are quick
versions of the repository test suite, bundled so an installed copy can
vouch for itself without pytest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .graph import SimilarityGraph
from .master import SolveLimits, solve_support_selection
from .oracle import (
    beta_star,
    dense_coupled_matrix,
    eval_cost,
    eval_cost_fractional,
    eval_gradient,
    evaluate,
    relaxation_family_value,
    verify_penrose,
)
from .problem import (
    ProblemInstance,
    SparsityBudget,
    build_quadform,
    check_feasible,
)
from .stepwise import stepwise_fit


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_instance(rng, t, d, n=9, lambda_delta=0.6):
    xs = tuple(rng.standard_normal((n, d)) for _ in range(t))
    ys = tuple(rng.standard_normal(n) for _ in range(t))
    return ProblemInstance(
        graph=SimilarityGraph.chain(t),
        x_blocks=xs,
        y_blocks=ys,
        lambda_beta=float(rng.uniform(0.5, 3.0)),
        lambda_delta=lambda_delta,
    )


def check_pseudoinverse_identity(rng, rounds=60) -> CheckResult:
    """(Z(M+lam I)Z)^+ Z mu equals the direct restricted solve."""
    worst = 0.0
    for _ in range(rounds):
        t = int(rng.integers(2, 4))
        d = int(rng.integers(2, 4))
        inst = _random_instance(rng, t, d, n=7)
        qf = build_quadform(inst)
        m = dense_coupled_matrix(qf)
        lam = qf.lambda_beta
        td = t * d
        zb = rng.random(td) < 0.5
        zf = zb.astype(np.float64)
        zdiag = np.diag(zf)
        a = zdiag @ (m + lam * np.eye(td)) @ zdiag
        pinv = np.linalg.pinv(a, rcond=1e-12)
        if not verify_penrose(a, pinv, tol=1e-8):
            return CheckResult(
                "pseudoinverse identity", False, "Penrose conditions failed"
            )
        via_pinv = pinv @ (zf * qf.mu)
        direct = beta_star(qf, zb)
        worst = max(worst, float(np.max(np.abs(via_pinv - direct))))
    ok = worst <= 1e-8
    return CheckResult(
        "pseudoinverse identity", ok, f"max deviation {worst:.2e} over {rounds} draws"
    )


def check_gradient(rng, rounds=10, eps=1e-6) -> CheckResult:
    """Closed-form cost gradient versus central finite differences."""
    worst = 0.0
    for _ in range(rounds):
        inst = _random_instance(rng, 3, 4)
        qf = build_quadform(inst)
        td = 12
        zb = rng.random(td) < 0.5
        ev = evaluate(qf, zb)
        grad = eval_gradient(qf, zb, ev.cache)
        zf = zb.astype(np.float64)
        for j in range(td):
            zp, zm = zf.copy(), zf.copy()
            zp[j] += eps
            zm[j] -= eps
            fd = (eval_cost_fractional(qf, zp) - eval_cost_fractional(qf, zm)) / (
                2.0 * eps
            )
            denom = max(1.0, abs(grad[j]))
            worst = max(worst, abs(fd - grad[j]) / denom)
    ok = worst <= 1e-5
    return CheckResult("cost gradient", ok, f"max relative error {worst:.2e}")


def check_convexity(rng, rounds=40) -> CheckResult:
    """Midpoint convexity of the fractional cost plus the scalar family."""
    worst = -np.inf
    for _ in range(rounds):
        inst = _random_instance(rng, 2, 3)
        qf = build_quadform(inst)
        z1 = rng.random(6)
        z2 = rng.random(6)
        mid = eval_cost_fractional(qf, 0.5 * (z1 + z2))
        chord = 0.5 * (
            eval_cost_fractional(qf, z1) + eval_cost_fractional(qf, z2)
        )
        worst = max(worst, mid - chord)
    if worst > 1e-10:
        return CheckResult(
            "relaxation convexity", False, f"midpoint violation {worst:.2e}"
        )
    anchor = relaxation_family_value(1.0, 19.0, 1.0, 1.0, 1.0)
    if abs(anchor + 0.05) > 1e-12:
        return CheckResult(
            "relaxation convexity", False, f"family anchor value {anchor!r}"
        )
    zs = np.linspace(0.0, 1.0, 101)
    g = np.array(
        [relaxation_family_value(2.0, 19.0, 1.0, 1.0, z) for z in zs]
    )
    violated = False
    for i in range(101):
        for j in range(i + 2, 101, 2):
            mid = (i + j) // 2
            if g[mid] > 0.5 * (g[i] + g[j]) + 1e-12:
                violated = True
                break
        if violated:
            break
    ok = violated
    return CheckResult(
        "relaxation convexity",
        ok,
        f"midpoint slack {worst:.2e}; squared member violates convexity: {violated}",
    )


def check_solver_exactness(rng, rounds=5) -> CheckResult:
    """Tree search equals exhaustive enumeration on 2x3 instances."""
    budget = SparsityBudget(max_per_vertex=1, max_global=2, max_changes=1)
    limits = SolveLimits(gap_tol=1e-9)
    worst = 0.0
    for _ in range(rounds):
        inst = _random_instance(rng, 2, 3)
        qf = build_quadform(inst)
        best = 0.0
        for bits in itertools.product((False, True), repeat=6):
            z = np.array(bits)
            if not z.any():
                continue
            if not check_feasible(z, budget, qf.graph):
                continue
            best = min(best, eval_cost(qf, z))
        res = solve_support_selection(qf, budget, limits=limits)
        if res.status != "optimal":
            return CheckResult("solver exactness", False, f"status {res.status}")
        worst = max(worst, abs(res.upper_bound - best))
    ok = worst <= 1e-8
    return CheckResult(
        "solver exactness", ok, f"max gap to enumeration {worst:.2e}"
    )


def check_stepwise_feasibility(rng, rounds=10) -> CheckResult:
    """The heuristic always lands inside the budgets with nonpositive cost."""
    for i in range(rounds):
        t = int(rng.integers(2, 5))
        d = int(rng.integers(3, 7))
        inst = _random_instance(rng, t, d)
        k_l = int(rng.integers(1, min(3, d) + 1))
        k_g = int(rng.integers(k_l, min(d, k_l + 2) + 1))
        k_c = int(rng.integers(0, 2 * k_l + 1))
        budget = SparsityBudget(
            max_per_vertex=k_l, max_global=k_g, max_changes=k_c
        )
        res = stepwise_fit(inst, budget, seed=i)
        if not check_feasible(res.z, budget, inst.graph):
            return CheckResult(
                "stepwise feasibility", False, f"budget violated on round {i}"
            )
        if res.cost > 1e-12:
            return CheckResult(
                "stepwise feasibility", False, f"positive cost {res.cost:.2e}"
            )
    return CheckResult(
        "stepwise feasibility", True, f"{rounds} random instances feasible"
    )


def run_selftest(seed: int = 0) -> list[CheckResult]:
    """All checks, each on its own substream of the given seed."""
    checks = (
        check_pseudoinverse_identity,
        check_gradient,
        check_convexity,
        check_solver_exactness,
        check_stepwise_feasibility,
    )
    results = []
    for i, check in enumerate(checks):
        rng = np.random.default_rng([seed, i])
        results.append(check(rng))
    return results
