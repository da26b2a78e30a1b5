"""Command-line front end.

Every command writes one JSON document to stdout (or ``--out``). Exit status
is 0 on success, 1 when a verification comes out false, and 2 on bad input.
A game argument is a path to a game document; if no such file exists, the
name of a bundled fixture (``fig1_left`` or ``fig1_left.json``) is accepted.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from . import analysis, fixtures, hardness, solvers
from .game import (
    GameError,
    StackelbergGame,
    distribution_to_document,
    expected_utility,
    format_rational,
    game_to_document,
    is_cce,
    is_ce,
    load_game,
)
from .oracle import OracleInfeasible
from .vector import DistributionVector, vector_from_document, vector_to_document

EXIT_OK, EXIT_FALSE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_json(path: str, what: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {what} {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path!r} is not valid JSON: {exc}") from None


def _game(arg: str) -> StackelbergGame:
    path = Path(arg)
    if path.exists():
        return load_game(_read_json(arg, "game"))
    name = path.name.removesuffix(".json")
    if name in fixtures.GAMES:
        return fixtures.load_fixture(name)
    raise InputError(f"no game file or bundled fixture named {arg!r}")


def _vector(arg: str) -> DistributionVector:
    path = Path(arg)
    if path.exists():
        return vector_from_document(_read_json(arg, "vector"))
    name = path.name.removesuffix(".json")
    if name in fixtures.VECTORS:
        return fixtures.load_vector_fixture(name)
    raise InputError(f"no vector file or bundled vector named {arg!r}")


def _lambda(sg: StackelbergGame, text: str | None) -> list[str]:
    if text is None:
        raise InputError("--lambda is required for this command")
    return [w.strip() for w in text.split(",") if w.strip()]


# -- commands ----------------------------------------------------------------


def _solve(args, solver) -> tuple[dict, int]:
    sg = _game(args.game)
    lam = _lambda(sg, args.weights)
    if solver is solvers.solve_opt_sce_pa:
        report = solver(sg, lam, threads=args.threads)
    else:
        report = solver(sg, lam)
    return report.to_document(), EXIT_OK


def cmd_solve_sce(args):
    return _solve(args, solvers.solve_opt_sce)


def cmd_solve_sce_pa_any(args):
    return _solve(args, solvers.solve_f_sce_pa)


def cmd_solve_sce_pa_opt(args):
    return _solve(args, solvers.solve_opt_sce_pa)


def cmd_verify(args):
    if args.vector is None:
        raise InputError("--vector is required for verify")
    if args.mode is None:
        raise InputError("--mode is required for verify")
    sg = _game(args.game)
    v = _vector(args.vector)
    doc: dict[str, Any] = {"mode": args.mode}
    if args.mode in ("first-level", "perfect"):
        problems = solvers.stability_violations(sg, v, args.mode)
        doc["verdict"] = not problems
        doc["violations"] = problems
    else:
        doc["verdict"] = solvers.verify_efficiency(sg, v, args.mode)
    return doc, EXIT_OK if doc["verdict"] else EXIT_FALSE


def cmd_optimal_commitment(args):
    sg = _game(args.game)
    x, value = analysis.optimal_commitment(sg)
    return {"distribution": distribution_to_document(x), "value": format_rational(value)}, EXIT_OK


def cmd_relations(args):
    """Where one distribution sits among CE, CCE and the stable sets."""
    sg = _game(args.game)
    if args.vector is not None:
        x = _vector(args.vector).empty
        source = "vector"
    else:
        lam = ["1"] * len(sg.leaders) if args.weights is None else _lambda(sg, args.weights)
        x = solvers.solve_opt_sce_pa(sg, lam, threads=args.threads).vector.empty
        source = "optimal perfectly stable plan"
    game = sg.game
    everyone = analysis.everyone_leads(game)
    doc = {
        "distribution": distribution_to_document(x),
        "source": source,
        "utilities": [format_rational(expected_utility(game, x, p)) for p in game.players()],
        "ce": is_ce(game, x),
        "cce": is_cce(game, x),
        "stable": analysis.admits_stable_vector(sg, x),
        "perfectly_stable": analysis.admits_perfectly_stable_vector(sg, x),
        "stable_everyone_leads": analysis.admits_stable_vector(everyone, x),
        "perfectly_stable_everyone_leads": analysis.admits_perfectly_stable_vector(everyone, x),
    }
    return doc, EXIT_OK


def cmd_dnf(args):
    phi = hardness.DnfFormula.parse(args.formula)
    sg, witness = hardness.dnf_to_sg(phi, swmax=args.swmax)
    if args.check:
        doc = {
            "tautology": hardness.is_tautology(phi),
            "perfectly_stable": solvers.verify_stability(sg, witness, "perfect"),
        }
    else:
        doc = {"formula": str(phi), "game": game_to_document(sg), "vector": vector_to_document(witness)}
    return doc, EXIT_OK


_FIXTURE_NOTES = {
    "fig1_left": "worked two-leader example: stable versus perfectly stable vectors",
    "table2_no_pape": "three leaders with no perfectly stable vector that is efficient after every record",
    "table4_ordering": "optimal perfectly stable plans must remember the last defector",
    "table5_left": "perfect stability without CCE; a second leader enlarges the stable set",
    "table5_right": "a cyclic CCE and how far it extends when everyone leads",
    "table6_mlbetter_k2": "perfect stability beats every CE on welfare (k = 2)",
    "table6_mlbetter_k3": "perfect stability beats every CE on welfare (k = 3)",
    "table6_mlbetter_k5": "perfect stability beats every CE on welfare (k = 5)",
}


def cmd_fixtures(args):
    entries = []
    ok = True
    for name in fixtures.GAMES:
        fx = analysis.relation_fixture(name, check=False)
        claims = [
            {"claim": c.description, "expected": c.expected, "holds": c.check() == c.expected}
            for c in fx.claims
        ]
        ok &= all(c["holds"] for c in claims)
        entries.append({"name": name, "exercises": _FIXTURE_NOTES[name], "claims": claims})
    return {"fixtures": entries, "all_hold": ok}, EXIT_OK if ok else EXIT_FALSE


# -- plumbing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scelab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True, metavar="COMMAND")

    def add(verb: str, handler, help_text: str, game: bool = True) -> argparse.ArgumentParser:
        p = sub.add_parser(verb, help=help_text, description=help_text)
        if game:
            p.add_argument("game", help="game document path or bundled fixture name")
        p.add_argument("--out", help="write the JSON result here instead of stdout")
        p.add_argument("--threads", type=int, default=1, help="worker threads for oracle queries (default 1)")
        p.set_defaults(handler=handler)
        return p

    for verb, handler, text in (
        ("solve-sce", cmd_solve_sce, "optimal stable vector for leader weights"),
        ("solve-sce-pa-any", cmd_solve_sce_pa_any, "some perfectly stable vector, efficient among them"),
        ("solve-sce-pa-opt", cmd_solve_sce_pa_opt, "optimal perfectly stable vector for leader weights"),
    ):
        add(verb, handler, text).add_argument(
            "--lambda", dest="weights", metavar="W1,W2,...", help="one rational weight per leader"
        )
    p = add("verify", cmd_verify, "check a vector for stability or efficiency")
    p.add_argument("--vector", help="vector document path or bundled vector name")
    p.add_argument("--mode", choices=[m.value for m in solvers.StabilityMode] + [m.value for m in solvers.EfficiencyMode])
    add("optimal-commitment", cmd_optimal_commitment, "best correlated commitment of a single leader")
    p = add("relations", cmd_relations, "memberships of one distribution in CE, CCE and the stable sets")
    p.add_argument("--vector", help="take the no-defection entry of this vector")
    p.add_argument("--lambda", dest="weights", metavar="W1,W2,...", help="weights for the default plan")
    p = add("dnf", cmd_dnf, "build the tautology-reduction game for a DNF formula", game=False)
    p.add_argument("formula", help='formula such as "(v1 & !v2) | (v3)"')
    p.add_argument("--swmax", action="store_true", help="add the one-action welfare leader")
    p.add_argument("--check", action="store_true", help="only report tautology and witness stability")
    add("fixtures", cmd_fixtures, "list bundled games and re-check their documented facts", game=False)
    return parser


def run_command(argv: Sequence[str] | None = None) -> tuple[int, Any]:
    """Parse ``argv``, run the command and return ``(exit status, JSON document)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (EXIT_OK if exc.code == 0 else EXIT_INPUT), None
    if args.threads < 1:
        return EXIT_INPUT, {"error": "--threads must be at least 1"}
    try:
        doc, status = args.handler(args)
    except (InputError, GameError, OracleInfeasible) as exc:
        return EXIT_INPUT, {"error": str(exc)}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    return status, doc


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    status, doc = run_command(argv)
    if doc is not None:
        out_requested = "--out" in argv
        if "error" in doc:
            print(f"error: {doc['error']}", file=sys.stderr)
        elif not out_requested:
            print(json.dumps(doc, indent=2))
    return status


if __name__ == "__main__":
    sys.exit(main())
