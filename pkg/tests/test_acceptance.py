"""Acceptance criteria, one test each, with exact tolerances and wall-clock limits.

Every criterion prints a single ``criterion N: PASS|FAIL`` line; the lines are
repeated in the pytest terminal summary. Run this file directly to get just
the lines.
"""

import functools
import itertools
import math
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_game  # noqa: E402
from oracles import ce_rows, profiles, simplex_lp_max, utility_row  # noqa: E402
from scelab.analysis import (  # noqa: E402
    admits_perfectly_stable_vector,
    admits_stable_vector,
    cce_to_stable,
    everyone_leads,
    lift_to_all_leaders,
    optimal_cce,
    optimal_commitment,
    relation_fixture,
)
from scelab.fixtures import GAMES, load_fixture, load_vector_fixture, table6_mlbetter  # noqa: E402
from scelab.game import CorrelatedDistribution, StackelbergGame, expected_utility, is_cce  # noqa: E402
from scelab.hardness import (  # noqa: E402
    DnfFormula,
    DualPoint,
    dnf_to_sg,
    is_tautology,
    sep_violations,
    sep_to_wdasw,
    wdasw_violations,
)
from scelab.oracle import OracleInfeasible, OracleObjective, StabilityConstraint, stability_oracle  # noqa: E402
from scelab.solvers import (  # noqa: E402
    solve_f_sce_pa,
    solve_opt_sce,
    solve_opt_sce_pa,
    stability_violations,
    verify_efficiency,
    verify_stability,
)
from scelab.vector import DefectionKey, VectorForm, constant_vector  # noqa: E402

pytestmark = pytest.mark.acceptance

RESULTS: dict[int, str] = {}


def criterion(number: int, limit: float, title: str):
    """Time the body, record one PASS/FAIL line and enforce the runtime limit."""

    def wrap(body):
        @functools.wraps(body)
        def run():
            start = time.perf_counter()
            try:
                body()
                elapsed = time.perf_counter() - start
                assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
            except AssertionError as exc:
                elapsed = time.perf_counter() - start
                first = str(exc).splitlines()[0] if str(exc) else "assertion failed"
                _report(number, f"FAIL ({elapsed:.2f} s / {limit:g} s) {title}: {first}")
                raise
            _report(number, f"PASS ({elapsed:.2f} s / {limit:g} s) {title}")

        return run

    return wrap


def _report(number: int, text: str) -> None:
    line = f"criterion {number}: {text}"
    RESULTS[number] = line
    print(line)


def _sg_with_leaders(rng, k, max_profiles=27):
    while True:
        n = rng.randint(max(k, 2), 4)
        counts = [rng.randint(1, 3) for _ in range(n)]
        if any(c > 1 for c in counts) and math.prod(counts) <= max_profiles:
            break
    return StackelbergGame(random_game(rng, counts), rng.sample(range(n), k))


@criterion(1, 1.0, "worked example: objective, no-defection entry and verifier verdicts")
def test_criterion_1_worked_example():
    sg = load_fixture("fig1_left")
    report = solve_opt_sce(sg, [1, 0])
    assert report.objective == 5, report.objective
    assert report.vector.empty == CorrelatedDistribution.delta((0, 0))
    x, xp = load_vector_fixture("example_x"), load_vector_fixture("example_x_prime")
    assert verify_stability(sg, x, "first-level")
    assert verify_efficiency(sg, x, "sce")
    assert not verify_stability(sg, x, "perfect")
    assert verify_stability(sg, xp, "perfect")
    assert verify_efficiency(sg, xp, "sce-pa")


@criterion(2, 30.0, "oracle query counts on 100 random games with 1 to 3 leaders")
def test_criterion_2_query_counts():
    rng = random.Random(2024)
    for i in range(100):
        k = 1 + i % 3
        sg = _sg_with_leaders(rng, k)
        lam = [Fraction(rng.randint(0, 4), 4) for _ in range(k)]
        pos = [Fraction(rng.randint(1, 4), 4) for _ in range(k)]
        assert solve_opt_sce(sg, lam).oracle_queries == k + 2, (i, "opt-sce")
        assert solve_f_sce_pa(sg, pos).oracle_queries == k + 1, (i, "f-sce-pa")
        assert solve_opt_sce_pa(sg, lam).oracle_queries == k * 2 ** (k - 1) + 1, (i, "opt-sce-pa")


@criterion(3, 1.0, "welfare gap: perfectly stable plan 2k against best CE 2 for k in {2, 3, 5}")
def test_criterion_3_welfare_gap():
    for k in (2, 3, 5):
        sg = table6_mlbetter(k)
        assert solve_opt_sce_pa(sg, [1, 1]).objective == 2 * k, k
        ce = stability_oracle(sg, OracleObjective((1, 1)), ())
        assert expected_utility(sg.game, ce, 0) + expected_utility(sg.game, ce, 1) == 2, k


@criterion(4, 5.0, "ordering fixture: objective 10, keys differ, every set-only collapse unstable")
def test_criterion_4_ordering():
    sg = load_fixture("table4_ordering")
    report = solve_opt_sce_pa(sg, [0, 0, 1])
    assert report.objective == 10, report.objective
    v = report.vector
    pair = frozenset({0, 1})
    assert v.entry(DefectionKey(pair, 0)) != v.entry(DefectionKey(pair, 1))
    assert verify_stability(sg, v, "perfect")
    sets = [frozenset(c) for size in (2, 3) for c in itertools.combinations(sg.leaders, size)]
    candidates = 0
    for reps in itertools.product(*(sorted(s) for s in sets)):
        forced = {DefectionKey(s, p): v.entry(DefectionKey(s, r)) for s, r in zip(sets, reps) for p in s}
        assert stability_violations(sg, v.replace(forced), "perfect"), reps
        candidates += 1
    assert candidates == 24


def _all_formulas():
    literals = [(f"v{i}", neg) for i in (1, 2, 3) for neg in (False, True)]
    clauses = [frozenset(c) for size in (1, 2, 3) for c in itertools.combinations(literals, size)]
    for m in (1, 2, 3):
        for chosen in itertools.combinations(clauses, m):
            names = sorted({v for c in chosen for v, _ in c})
            yield DnfFormula(tuple(names), chosen)


@criterion(5, 60.0, "reduction: witness perfectly stable iff tautology, all DNFs up to 3 vars and 3 clauses")
def test_criterion_5_reduction():
    count = 0
    for phi in _all_formulas():
        sg, witness = dnf_to_sg(phi)
        assert verify_stability(sg, witness, "perfect") == is_tautology(phi), str(phi)
        count += 1
    assert count == 11521


@criterion(6, 30.0, "separation matches weighted deviation-adjusted welfare on 200 instances")
def test_criterion_6_separation():
    rng = random.Random(6)
    for i in range(200):
        while True:
            n = rng.randint(2, 4)
            counts = [rng.randint(1, 4) for _ in range(n)]
            if math.prod(counts) <= 36:
                break
        game = random_game(rng, counts)
        sg = StackelbergGame(game, rng.sample(range(n), rng.randint(1, n)))
        c = OracleObjective(tuple(Fraction(rng.randint(-2, 2), 2) for _ in range(n)))
        thresholds = [StabilityConstraint(p, rng.randint(-3, 3)) for p in sg.leaders if rng.random() < 0.6]
        zf = {
            (p, a, b): Fraction(rng.randint(0, 6), rng.randint(1, 3))
            for p in sg.followers
            for a, b in itertools.permutations(range(counts[p]), 2)
            if rng.random() < 0.5
        }
        zl = {t.player: Fraction(rng.randint(0, 4), 2) for t in thresholds}
        d = DualPoint(zf, zl, Fraction(rng.randint(-6, 12), 2))
        w, t = sep_to_wdasw(c, sg.leaders, thresholds, d)
        sep = list(sep_violations(sg, c, thresholds, d))
        welfare = list(wdasw_violations(game, w, t))
        assert bool(sep) == bool(welfare) and sep == welfare, i


def _battery(rng, failures):
    sg = _sg_with_leaders(rng, rng.randint(1, 3), max_profiles=18)
    game = sg.game
    n = game.player_count
    # a full-game CE is the constant entry of a perfectly stable vector
    c = OracleObjective(tuple(Fraction(rng.randint(-2, 2), 2) for _ in range(n)))
    ce = stability_oracle(sg, c, ())
    for form in (VectorForm.COMPACT, VectorForm.FULL):
        if not verify_stability(sg, constant_vector(sg, ce, form), "perfect"):
            failures.append("constant CE vector not perfectly stable")
    # lifting to everyone leading keeps perfect stability
    v = solve_opt_sce_pa(sg, [1] * len(sg.leaders)).vector
    big, lifted = lift_to_all_leaders(sg, v)
    if not verify_stability(big, lifted, "perfect"):
        failures.append("lift broke perfect stability")
    # a CCE yields a stable vector that holds each defector to at most her CCE utility
    x = optimal_cce(game, [rng.randint(-2, 2) for _ in range(n)])
    everyone, sv = cce_to_stable(game, x)
    if not verify_stability(everyone, sv, "first-level"):
        failures.append("CCE construction not stable")
    for p in range(n):
        if expected_utility(game, sv[(p,)], p) > expected_utility(game, x, p):
            failures.append("CCE construction pays a defector more")


@criterion(7, 60.0, "containment battery on 500 random games plus the fixture corpus")
def test_criterion_7_containments():
    rng = random.Random(7)
    failures: list[str] = []
    for _ in range(500):
        _battery(rng, failures)
    for name in GAMES:
        failures += [f"{name}: {f}" for f in relation_fixture(name, check=False).failures()]
    # perfect stability without CCE, and a leader set that changes the answer
    left = load_fixture("table5_left")
    corner = CorrelatedDistribution.delta((0, 0))
    if is_cce(left.game, corner) or not admits_perfectly_stable_vector(everyone_leads(left.game), corner):
        failures.append("table5_left: corner is not a perfectly stable non-CCE")
    if admits_stable_vector(left.with_leaders([0]), corner):
        failures.append("table5_left: corner stable with one leader")
    # a CCE with no perfectly stable all-leader vector
    right = load_fixture("table5_right")
    cycle = CorrelatedDistribution.uniform([(0, 0), (1, 1), (2, 2)])
    if not is_cce(right.game, cycle):
        failures.append("table5_right: uniform diagonal is not a CCE")
    if admits_perfectly_stable_vector(everyone_leads(right.game), cycle):
        failures.append(
            "table5_right: the uniform diagonal CCE does admit a perfectly stable all-leader vector, "
            "so this fixture does not witness that CCE is outside the perfectly stable set"
        )
    assert not failures, "; ".join(failures)


@criterion(8, 30.0, "single leader: stable, perfectly stable and commitment optima coincide on 100 games")
def test_criterion_8_single_leader():
    rng = random.Random(8)
    for i in range(100):
        sg = _sg_with_leaders(rng, 1)
        s = solve_opt_sce(sg, [1]).objective
        ps = solve_opt_sce_pa(sg, [1]).objective
        _, value = optimal_commitment(sg)
        assert s == ps == value, (i, s, ps, value)


@criterion(9, 60.0, "oracle optima match double-description vertex enumeration on 200 instances")
def test_criterion_9_oracle_vs_vertices():
    rng = random.Random(9)
    for i in range(200):
        while True:
            n = rng.randint(1, 3)
            counts = [rng.randint(1, 4) for _ in range(n)]
            if math.prod(counts) <= 12:
                break
        game = random_game(rng, counts)
        exempt = sorted(rng.sample(range(n), rng.randint(0, n)))
        sg = StackelbergGame(game, exempt)
        coeffs = tuple(Fraction(rng.randint(-2, 2), 2) for _ in range(n))
        thresholds = [StabilityConstraint(p, Fraction(rng.randint(-6, 6), 2)) for p in exempt if rng.random() < 0.5]
        table = {s: game.payoffs(s) for s in profiles(counts)}
        rows = ce_rows(counts, table, [p for p in range(n) if p not in exempt])
        rows += [(utility_row(counts, table, t.player), t.threshold) for t in thresholds]
        rows.append(([Fraction(0)] * len(table), Fraction(0)))  # keeps the dimension when no rows
        objective = [sum((c * table[s][p] for p, c in enumerate(coeffs)), Fraction(0)) for s in profiles(counts)]
        expected = simplex_lp_max(objective, rows)
        try:
            x = stability_oracle(sg, OracleObjective(coeffs), exempt, thresholds)
        except OracleInfeasible:
            assert expected is None, (i, expected)
            continue
        got = sum((c * expected_utility(game, x, p) for p, c in enumerate(coeffs)), Fraction(0))
        assert got == expected, (i, got, expected)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
