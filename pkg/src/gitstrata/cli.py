"""Command-line client.

By default every subcommand runs the shared handlers in-process; with
``--server URL`` it posts the same payloads to a running service instance
and renders the returned report identically.

Exit codes: 0 success, 1 a verification check failed, 2 problem-file parse
error, 3 semantic error (bad support, dimension mismatch, invalid partition,
cap exceeded), 4 refinement incomplete (blow-up required but not
representable).
"""

from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.request
from pathlib import Path
from typing import Optional

from . import handlers, refine
from .errors import (GitstrataError, ProblemFormatError, SemanticError,
                     UnsupportedBlowupError)
from .reports import dumps_human, dumps_machine

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_SEMANTIC = 3
EXIT_INCOMPLETE = 4


def _load_spec(spec: str, cap: Optional[int]) -> handlers.LoadedProblem:
    if spec.startswith("p1n:"):
        return handlers.load_problem_text(spec, cap=cap)
    path = Path(spec)
    if not path.exists():
        raise ProblemFormatError(f"no such problem file: {spec}")
    return handlers.load_problem_text(path.read_text(), cap=cap)


def _emit(report: dict, fmt: str) -> None:
    if fmt == "machine":
        sys.stdout.write(dumps_machine(report))
    else:
        sys.stdout.write(dumps_human(report))


def _write_dot(dot: Optional[str], path: Optional[str]) -> None:
    if path and dot is not None:
        Path(path).write_text(dot)


def _post(server: str, route: str, payload: dict) -> dict:
    req = urllib.request.Request(
        server.rstrip("/") + route,
        data=json.dumps(payload).encode(),
        headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req) as resp:
            return json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        body = exc.read().decode()
        try:
            detail = json.loads(body).get("detail", {})
        except json.JSONDecodeError:
            detail = {"code": "SEMANTIC", "message": body}
        code = detail.get("code") if isinstance(detail, dict) else "SEMANTIC"
        message = detail.get("message") if isinstance(detail, dict) else str(detail)
        if code == "PARSE":
            raise ProblemFormatError(message)
        if code == "UNSUPPORTED_BLOWUP":
            raise UnsupportedBlowupError(message)
        raise SemanticError(message)


def _problem_payload(spec: str, cap: Optional[int]) -> dict:
    loaded = _load_spec(spec, cap)
    if loaded.kind == "p1n":
        return {"p1n": loaded.points}
    from .torusgit import problem_to_dict
    assert loaded.torus is not None
    return problem_to_dict(loaded.torus)


def cmd_hm(args: argparse.Namespace) -> int:
    support = [int(tok) for tok in args.support.split(",") if tok != ""]
    if args.server:
        payload = {"problem": _problem_payload(args.problem, args.max_supports),
                   "support": support}
        report = _post(args.server, "/hm", payload)["report"]
    else:
        loaded = _load_spec(args.problem, args.max_supports)
        if loaded.kind != "torus":
            raise SemanticError("stability verdicts need a torus problem")
        assert loaded.torus is not None
        report = handlers.run_hm(loaded.torus, support)
    _emit(report, args.format)
    return EXIT_OK


def cmd_strata(args: argparse.Namespace) -> int:
    if args.server:
        payload = {"problem": _problem_payload(args.problem, args.max_supports),
                   "dot": bool(args.dot), "workers": args.workers}
        resp = _post(args.server, "/strata", payload)
        report, dot = resp["report"], resp.get("dot")
    else:
        loaded = _load_spec(args.problem, args.max_supports)
        if loaded.kind != "torus":
            raise SemanticError("the instability stratification needs a torus problem")
        assert loaded.torus is not None
        report, dot = handlers.run_strata(loaded.torus, workers=args.workers)
    _emit(report, args.format)
    _write_dot(dot, args.dot)
    if not report["result"]["closure_order"]["ok"]:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_refine(args: argparse.Namespace) -> int:
    if args.server:
        payload = {"problem": _problem_payload(args.problem, args.max_supports),
                   "dot": bool(args.dot), "depth_cap": args.depth_cap}
        resp = _post(args.server, "/refine", payload)
        report, dot = resp["report"], resp.get("dot")
        complete = bool(resp.get("complete"))
    else:
        loaded = _load_spec(args.problem, args.max_supports)
        report, dot, complete = handlers.run_refine(loaded, depth_cap=args.depth_cap)
    _emit(report, args.format)
    _write_dot(dot, args.dot)
    if not complete:
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_p1n(args: argparse.Namespace) -> int:
    if args.action == "classify":
        if args.arg is None:
            raise SemanticError("classify needs a partition or point list argument")
        if ":" in args.arg:
            kwargs = {"points": args.arg}
        else:
            kwargs = {"partition": args.arg}
        if args.server:
            report = _post(args.server, "/p1n/classify",
                           {"n": args.n, **kwargs})["report"]
        else:
            report = handlers.run_p1n_classify(args.n, **kwargs)
    elif args.action == "enumerate":
        if args.server:
            report = _post(args.server, "/p1n/enumerate", {"n": args.n})["report"]
        else:
            report = handlers.run_p1n_enumerate(args.n)
    elif args.action == "components":
        if args.arg is None:
            raise SemanticError("components needs a stratum label argument")
        if args.server:
            report = _post(args.server, "/p1n/components",
                           {"n": args.n, "label": args.arg})["report"]
        else:
            report = handlers.run_p1n_components(args.n, args.arg)
    else:
        raise SemanticError(f"unknown p1n action {args.action!r}")
    _emit(report, args.format)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    report = handlers.run_check(args.seed, minnorm_trials=args.trials,
                                hm_trials=args.trials,
                                closure_trials=max(1, args.trials // 5))
    _emit(report, args.format)
    return EXIT_OK if report["result"]["ok"] else EXIT_CHECK_FAILED


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import app
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gitstrata",
        description="Exact stability and stratification workbench")
    parser.add_argument("--format", choices=("human", "machine"), default="human")
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; the CLI becomes a thin client")
    parser.add_argument("--max-supports", type=int, default=None,
                        help="enumeration cap on weight indices (env GITSTRATA_CAP)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_hm = sub.add_parser("hm", help="stability verdict with an exact certificate")
    p_hm.add_argument("problem")
    p_hm.add_argument("--support", required=True,
                      help="comma-separated coordinate indices")
    p_hm.set_defaults(func=cmd_hm)

    p_str = sub.add_parser("strata", help="instability stratification and checks")
    p_str.add_argument("problem")
    p_str.add_argument("--dot", default=None, help="write the index poset as DOT")
    p_str.add_argument("--workers", type=int, default=1)
    p_str.set_defaults(func=cmd_strata)

    p_ref = sub.add_parser("refine", help="refined stratification tree")
    p_ref.add_argument("problem", help="problem file or p1n:N")
    p_ref.add_argument("--dot", default=None, help="write the tree as DOT")
    p_ref.add_argument("--depth-cap", type=int, default=refine.DEFAULT_DEPTH_CAP)
    p_ref.set_defaults(func=cmd_refine)

    p_p1n = sub.add_parser("p1n", help="point configurations on the projective line")
    p_p1n.add_argument("action", choices=("classify", "enumerate", "components"))
    p_p1n.add_argument("n", type=int)
    p_p1n.add_argument("arg", nargs="?", default=None,
                       help="partition '4+1+1', points 'a:b,c:d,...', or a stratum label")
    p_p1n.set_defaults(func=cmd_p1n)

    p_chk = sub.add_parser("check", help="randomized exact self-checks")
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--trials", type=int, default=100)
    p_chk.set_defaults(func=cmd_check)

    p_srv = sub.add_parser("serve", help="run the HTTP service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnsupportedBlowupError as exc:
        print(f"unsupported blow-up: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE
    except SemanticError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC
    except GitstrataError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_SEMANTIC


if __name__ == "__main__":
    sys.exit(main())
