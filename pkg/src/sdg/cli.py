"""Command-line front end.

Every command prints one JSON run report on stdout (``--format text`` renders
the same data as ``key: value`` lines) and signals its verdict through a
stable exit code:

    0  success (certified equilibrium, zero-sum, Nash, accepted LCP solution)
    1  malformed input, invalid parameters, dimension mismatch
    2  ``solve``: game is not zero-sum
    3  ``solve``: solver failure or the result could not be certified
    4  ``recognize``: constant-sum with a nonzero constant
    5  ``recognize``: not constant-sum
    6  ``check``/``lcp``: not a Nash equilibrium / not an LCP solution

The environment variable ``SDG_TOL`` overrides every command's default
tolerance; an explicit ``--tol`` overrides both.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io, linalg
from .linalg import DimensionError
from .equilibrium import NASH_TOL, certify_nash, exploitability
from .game import (
    NetworkGame,
    check_profile,
    embed_polymatrix,
    pairwise_zero_sum_random,
    phi_i,
    security_game,
)
from .lcp import LCP_TOL, LcpError, build_lcp, kkt_to_lcp, lcp_to_kkt, verify_lcp
from .mmw import CROSS_CHECK, mmw_selfplay
from .recognizer import constant_sum_linear_oracle, recognize
from .sdp import MAX_ITER, solve_equilibrium

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_ZERO_SUM = 2
EXIT_SOLVER = 3
EXIT_CONSTANT_SUM = 4
EXIT_NOT_CONSTANT_SUM = 5
EXIT_REJECTED = 6

DEFAULT_TOLS = {"ipm": 1e-5, "mmw": 1e-2, "check": NASH_TOL, "lcp": LCP_TOL}
MMW_ITERS = 20_000


class InputError(Exception):
    """Bad user input; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors, which would collide with "not zero-sum"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _tol(args, kind: str) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get("SDG_TOL")
    if env:
        try:
            value = float(env)
        except ValueError:
            raise InputError(f"SDG_TOL={env!r} is not a number") from None
        if value <= 0:
            raise InputError("SDG_TOL must be positive")
        return value
    return DEFAULT_TOLS[kind]


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _read_json(path: str, digests: dict, key: str):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    digests[key] = io.digest(raw)
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: not UTF-8 JSON ({exc})") from exc


def _load_game(path: str, digests: dict) -> NetworkGame:
    obj = _read_json(path, digests, "game")
    try:
        return io.game_from_dict(obj)
    except io.SchemaError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_matrices(path: str, digests: dict, key: str) -> list[np.ndarray]:
    obj = _read_json(path, digests, key)
    try:
        return io.matrices_from_dict(obj, "strategies" if key == "profile" else "blocks")
    except io.SchemaError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _write(path: str, obj) -> None:
    Path(path).write_text(io.dumps(obj), encoding="utf-8")


def _encode_profile(profile) -> list:
    return [io.encode_cmat(x) for x in profile]


# -- commands: each returns (results, exit code) -------------------------------------------


def cmd_solve(args, digests):
    game = _load_game(args.game, digests)
    tol = _tol(args, args.algorithm)
    res: dict = {"algorithm": args.algorithm, "tol": tol}
    zero_sum = False
    if args.algorithm == "ipm":
        oracle = constant_sum_linear_oracle(game)
        zero_sum = oracle.zero_sum
        res["recognition"] = {"oracle": oracle.oracle, "C": oracle.constant, "zero_sum": zero_sum}
        if not zero_sum and not args.force:
            res["reason"] = "game is not zero-sum (use --force to solve anyway)"
            return res, EXIT_NOT_ZERO_SUM
        sol = solve_equilibrium(game, max_iter=args.max_iter or MAX_ITER)
        res["primal"] = _solution_summary(sol.primal)
        res["dual"] = _solution_summary(sol.dual)
        profile = sol.profile
        if profile is None:
            res["reason"] = "no equilibrium could be extracted from the primal solution"
            return res, EXIT_SOLVER
    else:
        profile = mmw_selfplay(game, n_iters=args.max_iter or MMW_ITERS, **CROSS_CHECK)
    ok, rep = certify_nash(game, profile, tol, zero_sum=zero_sum)
    res["certified"] = ok
    res["exploitability"] = rep.to_dict()
    res["profile"] = _encode_profile(profile)
    if args.out:
        _write(args.out, io.matrices_to_dict(profile, "strategies"))
        res["out"] = args.out
    return res, EXIT_OK if ok else EXIT_SOLVER


def _solution_summary(sol) -> dict | None:
    if sol is None:
        return None
    return {
        "status": sol.status,
        "objective": sol.primal_objective,
        "dual_objective": sol.dual_objective,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual,
        "iterations": sol.iterations,
    }


def cmd_recognize(args, digests):
    game = _load_game(args.game, digests)
    result = recognize(game)
    if result.zero_sum:
        code = EXIT_OK
    elif result.constant_sum:
        code = EXIT_CONSTANT_SUM
    else:
        code = EXIT_NOT_CONSTANT_SUM
    return result.to_dict(), code


def cmd_check(args, digests):
    game = _load_game(args.game, digests)
    profile = _load_matrices(args.profile, digests, "profile")
    tol = _tol(args, "check")
    try:
        ok, rep = certify_nash(game, profile, tol)
    except (DimensionError, linalg.NotHermitianError, ValueError) as exc:
        raise InputError(f"{args.profile}: {exc}") from exc
    return rep.to_dict(), EXIT_OK if ok else EXIT_REJECTED


def cmd_generate(args, digests):
    params = {k: v for k, v in vars(args).items() if k not in ("func", "format", "out", "tol", "verbose")}
    try:
        if args.kind == "pairwise-zs":
            dims = [int(x) for x in args.dims.split(",")]
            if min(dims) < 1 or args.n_players < 1:
                raise ValueError("n_players and dims must be >= 1")
            game = pairwise_zero_sum_random(
                args.n_players, dims[0] if len(dims) == 1 else dims, args.edge_probability, args.seed
            )
        elif args.kind == "security":
            game = security_game(
                args.n_evaders, args.n_inspectors, args.n_exits, normalize=not args.raw
            )
        else:
            obj = _read_json(args.polymatrix, digests, "polymatrix")
            actions, edges = io.polymatrix_from_dict(obj)
            game = embed_polymatrix(actions, edges)
    except io.SchemaError as exc:
        raise InputError(f"{args.polymatrix}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise InputError(f"invalid parameters: {exc}") from exc
    digests.setdefault("params", io.digest(io.dumps(params).encode()))
    text = io.dumps(io.game_to_dict(game))
    res = {
        "players": game.n_players,
        "dims": list(game.dims),
        "edges": len(game.edges),
        "game_digest": io.digest(text.encode()),
    }
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        res["out"] = args.out
    else:
        res["game"] = json.loads(text)
    return res, EXIT_OK


def cmd_lcp(args, digests):
    game = _load_game(args.game, digests)
    tol = _tol(args, "lcp")
    try:
        inst = build_lcp(game, form=args.form)
    except LcpError as exc:
        raise InputError(str(exc)) from exc
    if args.action == "build":
        res = {"instance": inst.summary()}
        if args.profile is None:
            return res, EXIT_OK
        profile = _load_matrices(args.profile, digests, "profile")
        try:
            profile = [linalg.as_matrix(x) for x in profile]
            lam = [linalg.lambda_max(m) for m in _phis(inst.game, profile)]
            blocks = kkt_to_lcp(inst.game, profile, lam, tol, form=args.form)
        except DimensionError as exc:
            raise InputError(str(exc)) from exc
        except LcpError as exc:
            res["reason"] = str(exc)
            return res, EXIT_REJECTED
        res["blocks"] = [io.encode_cmat(b) for b in blocks]
        if args.out:
            _write(args.out, io.matrices_to_dict(blocks, "blocks"))
            res["out"] = args.out
        return res, EXIT_OK

    blocks = _load_matrices(args.blocks, digests, "blocks")
    try:
        residuals = verify_lcp(inst, blocks, tol)
    except LcpError as exc:
        raise InputError(f"{args.blocks}: {exc}") from exc
    res = {"instance": inst.summary(), "residuals": residuals.to_dict()}
    res["trivial_solution"] = residuals.trivial
    if residuals.accepted and not residuals.trivial:
        try:
            profile, lam = lcp_to_kkt(inst, blocks, tol)
            rep = exploitability(inst.game, profile)
            res["recovered"] = {
                "multipliers": lam,
                "total_exploitability": rep.total_exploitability,
                "profile": _encode_profile(profile),
            }
        except LcpError as exc:
            res["recovered"] = {"error": str(exc)}
    return res, EXIT_OK if residuals.accepted else EXIT_REJECTED


def _phis(game, profile):
    profile = check_profile(game, profile)
    return [phi_i(game, i, profile) for i in range(game.n_players)]


# -- parser and driver -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdg", description="Semidefinite network games: solve, recognize, check, generate, LCP.")
    p.add_argument("--format", choices=["json", "text"], default="json", help="report format on stdout")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    # accept --format after the subcommand too, without clobbering the top-level value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "text"], default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tol_arg(q):
        q.add_argument("--tol", type=_positive_float, default=None, help="tolerance (default: SDG_TOL or per command)")

    q = sub.add_parser("solve", parents=[common], help="compute and certify a Nash equilibrium")
    q.add_argument("game")
    tol_arg(q)
    q.add_argument("--algorithm", choices=["ipm", "mmw"], default="ipm")
    q.add_argument("--max-iter", type=int, default=None,
                   help=f"solver iterations (ipm default {MAX_ITER}, mmw default {MMW_ITERS})")
    q.add_argument("--out", help="write the profile here")
    q.add_argument("--force", action="store_true", help="skip the zero-sum check (ipm)")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("recognize", parents=[common], help="decide zero-sum / constant-sum")
    q.add_argument("game")
    q.set_defaults(func=cmd_recognize, tol=None)

    q = sub.add_parser("check", parents=[common], help="exploitability of a profile")
    q.add_argument("game")
    q.add_argument("profile")
    tol_arg(q)
    q.set_defaults(func=cmd_check)

    q = sub.add_parser("generate", help="write a game file")
    kinds = q.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    k = kinds.add_parser("pairwise-zs", parents=[common], help="random pairwise zero-sum game")
    k.add_argument("n_players", type=int)
    k.add_argument("dims", help="one dimension, or a comma-separated list")
    k.add_argument("edge_probability", type=float)
    k = kinds.add_parser("security", parents=[common], help="evaders and inspectors")
    k.add_argument("n_evaders", type=int)
    k.add_argument("n_inspectors", type=int)
    k.add_argument("n_exits", type=int)
    k.add_argument("--raw", action="store_true", help="keep the constant-sum payoffs (no normalization)")
    k = kinds.add_parser("embed", parents=[common], help="diagonal embedding of a classical polymatrix file")
    k.add_argument("polymatrix")
    for k in kinds.choices.values():
        k.add_argument("--seed", type=int, default=0, help="64-bit seed")
        k.add_argument("--out", help="write the game file here")
        k.set_defaults(func=cmd_generate, tol=None)

    q = sub.add_parser("lcp", help="build or verify complementarity instances")
    actions = q.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("build", "verify"):
        a = actions.add_parser(name, parents=[common])
        a.add_argument("game")
        if name == "verify":
            a.add_argument("blocks")
        else:
            a.add_argument("--profile", help="map this equilibrium profile to LCP blocks")
            a.add_argument("--out", help="write the blocks here")
        a.add_argument("--form", choices=["scaled", "lifted"], default="scaled")
        tol_arg(a)
        a.set_defaults(func=cmd_lcp)
    return p


def _options(args) -> dict:
    return {
        k: v for k, v in sorted(vars(args).items())
        if k not in ("func", "verbose") and v is not None
    }


def _text(report: dict) -> str:
    lines = [f"command: {report['command']}  exit: {report['exit_code']}"]

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}{k}.", v)
        elif isinstance(obj, list) and obj and isinstance(obj[0], list):
            lines.append(f"{prefix[:-1]}: <{len(obj)} matrices>")
        else:
            lines.append(f"{prefix[:-1]}: {obj}")

    walk("", report["results"])
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    command = args.command + (f" {args.kind}" if args.command == "generate" else "")
    command += f" {args.action}" if args.command == "lcp" else ""
    digests: dict = {}
    start = time.perf_counter()
    try:
        results, code = args.func(args, digests)
    except InputError as exc:
        print(f"sdg {command}: error: {exc}", file=sys.stderr)
        results, code = {"error": str(exc)}, EXIT_INPUT
    report = {
        "command": command,
        "input_digest": digests,
        "options": _options(args),
        "results": results,
        "exit_code": code,
        "wall_time": time.perf_counter() - start,
    }
    out = io.dumps(report) if args.format == "json" else _text(report)
    sys.stdout.write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
