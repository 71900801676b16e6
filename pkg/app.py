"""Command-line front end: price games, sample mixture curves, compute
least-squares prices, simulate reinvestment, and reproduce the put comparison.

    python app.py price --game two_point.json --r 0.05
    python app.py mixture --game-a a.json --game-b b.json --r 0.05 --grid 101
    python app.py least-squares --portfolio portfolio.json
    python app.py simulate --game two_point.json --u 7.22364 --t 0.27364 --steps 100000
    python app.py verify --game two_point.json --r 0.05
    python app.py option-demo --S 90 --K 120 --T 2 --sigma 0.1 --r 0.04

Exit codes: 0 success, 1 input error, 2 solver found no solution, 3 internal failure.
"""
import argparse
import logging
import sys

from components.least_squares import LeastSquaresPricer, load_portfolio
from components.mixture import MixtureAnalyzer
from components.montecarlo import (
    DEFAULT_STEPS,
    MonteCarloSimulator,
    SimulationSpec,
    verify_price,
)
from components.options import PutModel, QuadratureConfig, demo_compare
from utils.errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    GameSpecError,
    InfeasibleBoxError,
    NoSolutionError,
)
from utils.game_model import GameLoader, Rate
from utils.growth_solver import GrowthSolver, SolverConfig
from utils.number_format import NumberFormatter

logger = logging.getLogger("app")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NO_SOLUTION = 2
EXIT_INTERNAL = 3

INPUT_ERRORS = (GameSpecError, DomainError, BracketError, FileNotFoundError)
SOLVER_ERRORS = (NoSolutionError, ConvergenceError, InfeasibleBoxError)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="app.py", description="Growth-optimal prices of games"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-outer", type=float, default=SolverConfig.outer_tol)
    common.add_argument("--tol-inner", type=float, default=SolverConfig.inner_tol)
    common.add_argument("--max-iter", type=int, default=SolverConfig.max_iter)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="output file (default stdout)")

    sub = parser.add_subparsers(dest="command", required=True)

    price = sub.add_parser("price", parents=[common], help="price one game")
    price.add_argument("--game", required=True)
    price.add_argument("--r", type=float, required=True)

    mixture = sub.add_parser("mixture", parents=[common], help="f, g, h, u curves of two games")
    mixture.add_argument("--game-a", required=True)
    mixture.add_argument("--game-b", required=True)
    mixture.add_argument("--r", type=float, required=True)
    mixture.add_argument("--grid", type=int, default=101)

    least = sub.add_parser("least-squares", parents=[common], help="min-norm price vector")
    least.add_argument("--portfolio", required=True)
    least.add_argument("--r", type=float, default=None, help="overrides the portfolio rate")

    simulate = sub.add_parser("simulate", parents=[common], help="simulate reinvestment")
    simulate.add_argument("--game", required=True)
    simulate.add_argument("--u", type=float, required=True)
    simulate.add_argument("--t", type=float, required=True)
    simulate.add_argument("--r", type=float, default=None, help="report z-score against r")
    _simulation_flags(simulate)

    verify = sub.add_parser("verify", parents=[common], help="price a game, then simulate it")
    verify.add_argument("--game", required=True)
    verify.add_argument("--r", type=float, required=True)
    _simulation_flags(verify)

    demo = sub.add_parser("option-demo", parents=[common], help="European put comparison")
    demo.add_argument("--S", type=float, required=True)
    demo.add_argument("--K", type=float, required=True)
    demo.add_argument("--T", type=float, required=True)
    demo.add_argument("--sigma", type=float, required=True)
    demo.add_argument("--r", type=float, required=True)
    demo.add_argument("--nodes", type=int, default=QuadratureConfig.nodes_per_panel)

    return parser


def _simulation_flags(parser):
    parser.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--streams", type=int, default=1)


def init_components(args):
    solver = GrowthSolver(
        SolverConfig(outer_tol=args.tol_outer, inner_tol=args.tol_inner, max_iter=args.max_iter)
    )
    return {
        "solver": solver,
        "mixture": MixtureAnalyzer(solver),
        "simulator": MonteCarloSimulator(),
    }


# ---------- subcommands ----------

def cmd_price(args, components):
    rate = Rate(args.r)
    game = GameLoader(rate=rate).load_game(args.game)
    outcome = components["solver"].price(game, rate)
    return NumberFormatter.dumps({"game": game.label, "r": rate.r, **outcome.to_dict()})


def cmd_mixture(args, components):
    rate = Rate(args.r)
    loader = GameLoader(rate=rate)
    gA, gB = loader.load_game(args.game_a), loader.load_game(args.game_b)
    analyzer = components["mixture"]
    curves = analyzer.curves(gA, gB, rate, n_grid=args.grid)
    reports = analyzer.concavity_reports(curves)
    crossings = analyzer.equivalence_points(curves, tol=1e-8)

    if (args.format or "csv") == "csv":
        # the CSV owns the output stream; the concavity report goes to stderr
        for report in reports:
            sys.stderr.write(
                f"concavity {report.curve}: violation={report.violation:.3g} triple={report.triple}\n"
            )
        return curves.to_csv()
    return NumberFormatter.dumps(
        {
            "curves": curves.to_frame().to_dict(orient="list"),
            "concavity": [
                {"curve": r.curve, "violation": r.violation, "triple": r.triple} for r in reports
            ],
            "equivalence_points": crossings,
        }
    )


def cmd_least_squares(args, components):
    rate = Rate(args.r) if args.r is not None else None
    portfolio = load_portfolio(args.portfolio, rate=rate, solver=components["solver"])
    pricer = LeastSquaresPricer(portfolio, solver=components["solver"])
    result = pricer.least_squares_prices()
    return NumberFormatter.dumps(pricer.result_document(result))


def cmd_simulate(args, components):
    game = GameLoader(rate=Rate(args.r) if args.r is not None else None).load_game(args.game)
    spec = SimulationSpec(
        game=game,
        price=args.u,
        proportion=args.t,
        steps=args.steps,
        seed=args.seed,
        streams=args.streams,
    )
    result = components["simulator"].simulate(spec)
    return NumberFormatter.dumps(result.to_dict(r=args.r))


def cmd_verify(args, components):
    rate = Rate(args.r)
    game = GameLoader(rate=rate).load_game(args.game)
    report = verify_price(
        game,
        rate,
        solver=components["solver"],
        steps=args.steps,
        seed=args.seed,
        streams=args.streams,
    )
    return NumberFormatter.dumps(report)


def cmd_option_demo(args, components):
    model = PutModel(S=args.S, K=args.K, T=args.T, sigma=args.sigma, r=args.r)
    comparison = demo_compare(
        model, solver=components["solver"], q=QuadratureConfig(nodes_per_panel=args.nodes)
    )
    return NumberFormatter.dumps(comparison)


COMMANDS = {
    "price": cmd_price,
    "mixture": cmd_mixture,
    "least-squares": cmd_least_squares,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "option-demo": cmd_option_demo,
}


def _emit(text, out):
    if not text.endswith("\n"):
        text += "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(
        stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s", force=True
    )

    try:
        if args.format == "csv" and args.command != "mixture":
            raise GameSpecError(f"--format csv is only available for 'mixture', not {args.command!r}")
        components = init_components(args)
        logger.info("running %s", args.command)
        _emit(COMMANDS[args.command](args, components), args.out)
        return EXIT_OK
    except INPUT_ERRORS as e:
        return _fail(e, EXIT_INPUT)
    except SOLVER_ERRORS as e:
        return _fail(e, EXIT_NO_SOLUTION)
    except Exception as e:
        return _fail(e, EXIT_INTERNAL)


def _fail(error, code):
    sys.stderr.write(f"error: {type(error).__name__}: {error}\n")
    return code


if __name__ == "__main__":
    sys.exit(run())
