"""Thin-client command line.

All logic lives behind the service API; the CLI talks to it through an
in-process ASGI transport by default, or over HTTP when --base-url points
at a running server (`splitrate serve`).  Exit code is 0 iff every check of
the requested run passed.

Subcommands: run <config.json>, reproduce <name>, list, report <dir>,
serve.  The output root defaults to the SPLITRATE_OUTPUT_ROOT env var.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx


def _client(base_url):
    if base_url:
        return httpx.Client(base_url=base_url, timeout=600.0)
    # in-process ASGI transport: same API surface, no server required
    from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _print_checks(checks) -> None:
    for c in checks:
        status = "pass" if c["passed"] else "FAIL"
        extra = "" if c["passed"] else f"  (first violation at k={c['first_violation']})"
        print(f"  [{status}] {c['name']}: worst margin {c['worst_margin']:.3e}{extra}")


def cmd_run(args) -> int:
    from .experiments import load_config

    config = load_config(args.config)
    payload = {"config": config.model_dump(), "output_dir": args.output}
    with _client(args.base_url) as client:
        resp = client.post("/experiments", json=payload)
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return 2
    report = resp.json()
    print(f"experiment {config.problem}/{config.algorithm}: "
          f"{'pass' if report['passed'] else 'FAIL'}")
    _print_checks(report["checks"])
    for note in report.get("notes", []):
        print(f"  note: {note}")
    for art in report.get("artifacts", []):
        print(f"  wrote {art}")
    return report["exit_code"]


def cmd_reproduce(args) -> int:
    with _client(args.base_url) as client:
        resp = client.post(f"/reproduce/{args.name}",
                           json={"output_dir": args.output})
    if resp.status_code == 404:
        detail = resp.json()["detail"]
        print(f"error: {detail['error']}", file=sys.stderr)
        print("registry: " + ", ".join(detail["registry"]), file=sys.stderr)
        return 2
    report = resp.json()
    print(f"reproduction {report['name']} ({report['criterion']}): "
          f"{'pass' if report['passed'] else 'FAIL'}")
    _print_checks(report["checks"])
    if report.get("values"):
        print("  values: " + json.dumps(report["values"], default=float))
    return report["exit_code"]


def cmd_list(args) -> int:
    with _client(args.base_url) as client:
        resp = client.get("/registry")
    data = resp.json()
    print("reproductions:")
    for entry in data["reproductions"]:
        print(f"  {entry['name']:<20} {entry['criterion']:<15} "
              f"[{entry['runtime_class']}]")
    print("problems: " + ", ".join(data["problems"]))
    return 0


def cmd_report(args) -> int:
    with _client(args.base_url) as client:
        resp = client.get("/report", params={"path": args.dir})
    if resp.status_code != 200:
        print(f"error: {resp.json().get('detail', resp.text)}", file=sys.stderr)
        return 2
    report = resp.json()["report"]
    print(f"report {resp.json()['path']}: "
          f"{'pass' if report.get('passed') else 'FAIL'}")
    _print_checks(report.get("checks", []))
    return 0 if report.get("passed") else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="splitrate",
        description="operator-splitting solvers with a convergence-rate "
                    "verification harness")
    parser.add_argument("--base-url", default=None,
                        help="talk to a running server instead of in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config (JSON)")
    p.add_argument("config")
    p.add_argument("--output", default=None, help="artifact directory")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("reproduce", help="run a named reproduction")
    p.add_argument("name")
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("list", help="list reproductions and problems")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("report", help="summarize a persisted report")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
