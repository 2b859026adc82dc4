"""Command-line front end for the watermarking pipeline.

Each subcommand is a thin client over the service handlers: by default it
calls them in-process, with ``--server URL`` the same request is POSTed to
a running HTTP instance instead.  A plain key=value config file may
pre-set any flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .attacks import ATTACK_KINDS
from .service import models, ops


class CliError(Exception):
    """Domain failure: maps to exit code 1."""


_ENDPOINTS = {
    "run": (ops.run, models.RunRequest, models.RunResponse),
    "embed": (ops.embed_op, models.EmbedRequest, models.EmbedResponse),
    "extract": (ops.extract_op, models.ExtractRequest, models.ExtractResponse),
    "protect": (ops.protect_op, models.ProtectRequest, models.ProtectResponse),
    "attack": (ops.attack_op, models.AttackRequest, models.AttackResponse),
    "bench": (ops.bench_op, models.BenchRequest, models.BenchResponse),
    "report": (ops.report_op, models.ReportRequest, models.ReportResponse),
}


class Client:
    """Dispatches requests either in-process or to a remote service."""

    def __init__(self, server: str = None):
        self.server = server.rstrip("/") if server else None

    def call(self, name: str, request):
        handler, _, response_model = _ENDPOINTS[name]
        if self.server is None:
            try:
                return handler(request)
            except ValueError as exc:
                raise CliError(str(exc))
        import httpx

        resp = httpx.post(
            f"{self.server}/{name}", json=request.model_dump(), timeout=600.0
        )
        if resp.status_code == 400:
            raise CliError(resp.json().get("detail", "request rejected"))
        resp.raise_for_status()
        return response_model.model_validate(resp.json())


# --- small helpers -------------------------------------------------------


def _int_list(text: str, flag: str) -> list:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(part) for part in str(text).split(",") if part != ""]
    except ValueError:
        raise CliError(f"{flag} expects comma-separated integers, got {text!r}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}")


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def load_config(path: str) -> dict:
    """key=value lines; blank lines and # comments ignored."""
    values = {}
    for lineno, raw in enumerate(_read(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key=value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        key = {"in": "infile"}.get(key, key)
        value = value.strip()
        try:
            values[key] = int(value)
        except ValueError:
            values[key] = value
    return values


# --- subcommand handlers -------------------------------------------------


def _cmd_run(client: Client, args) -> int:
    req = models.RunRequest(
        source=_read(args.infile),
        args=_int_list(args.args, "--args") if args.args is not None else [],
    )
    resp = client.call("run", req)
    for line in resp.output:
        print(line)
    if resp.status != "ok":
        print(f"error: {resp.status}: {resp.error}", file=sys.stderr)
        return 1
    return 0


def _cmd_embed(client: Client, args) -> int:
    req = models.EmbedRequest(
        source=_read(args.infile),
        watermark=args.watermark,
        trigger=_int_list(args.trigger, "--trigger"),
        anchor=args.anchor,
    )
    resp = client.call("embed", req)
    _write(args.out, resp.source)
    _emit({"out": args.out, "watermark": args.watermark})
    return 0


def _cmd_extract(client: Client, args) -> int:
    req = models.ExtractRequest(
        source=_read(args.infile),
        trigger=_int_list(args.trigger, "--trigger"),
        anchor=args.anchor,
    )
    resp = client.call("extract", req)
    if not resp.found:
        print("NOT-FOUND")
        return 1
    print(resp.watermark)
    return 0


def _cmd_protect(client: Client, args) -> int:
    req = models.ProtectRequest(
        source=_read(args.infile),
        trigger=_int_list(args.trigger, "--trigger"),
        policy=args.policy,
        anchor=args.anchor,
    )
    resp = client.call("protect", req)
    _write(args.out, resp.source)
    if args.plan:
        _write(args.plan, json.dumps(resp.plan, sort_keys=True, indent=2) + "\n")
    _emit({"out": args.out, "sites": len(resp.plan["sites"])})
    return 0


def _cmd_attack(client: Client, args) -> int:
    req = models.AttackRequest(
        source=_read(args.infile), kind=args.kind, seed=args.seed
    )
    resp = client.call("attack", req)
    _write(args.out, resp.source)
    _emit({"out": args.out, "kind": args.kind, "seed": args.seed})
    return 0


def _cmd_bench(client: Client, args) -> int:
    corpus_dir = Path(args.corpus)
    if not corpus_dir.is_dir():
        raise CliError(f"corpus directory not found: {args.corpus}")
    corpus = {
        path.stem: path.read_text(encoding="utf-8")
        for path in sorted(corpus_dir.glob("*.gm"))
    }
    if not corpus:
        raise CliError(f"no .gm programs in {args.corpus}")
    try:
        inputs = json.loads(_read(args.inputs))
    except json.JSONDecodeError as exc:
        raise CliError(f"bad inputs file {args.inputs}: {exc}")
    req = models.BenchRequest(
        corpus=corpus,
        watermark=args.watermark,
        trigger=_int_list(args.trigger, "--trigger"),
        policy=args.policy,
        inputs=inputs,
        seed=args.seed,
    )
    resp = client.call("bench", req)
    text = json.dumps(resp.report, sort_keys=True, indent=2) + "\n"
    if args.out:
        _write(args.out, text)
        _emit({"out": args.out})
    else:
        sys.stdout.write(text)
    return 0


def _cmd_report(client: Client, args) -> int:
    try:
        report = json.loads(_read(args.infile))
    except json.JSONDecodeError as exc:
        raise CliError(f"bad report file {args.infile}: {exc}")
    resp = client.call("report", models.ReportRequest(report=report, format=args.format))
    if args.out:
        _write(args.out, resp.text)
        _emit({"out": args.out})
    else:
        sys.stdout.write(resp.text)
    return 0


def _cmd_serve(client: Client, args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


# --- argument parsing ----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file pre-setting any flag")
    common.add_argument("--server", help="base URL of a running service")

    parser = argparse.ArgumentParser(
        prog="graphmark",
        description="heap-tree watermarking, constant encoding, and attacks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="execute a program")
    p.add_argument("--in", dest="infile")
    p.add_argument("--args", help="comma-separated integer arguments")
    p.set_defaults(func=_cmd_run, needs=("infile",))

    p = sub.add_parser("embed", parents=[common], help="embed a watermark")
    p.add_argument("--in", dest="infile")
    p.add_argument("--watermark", type=int)
    p.add_argument("--trigger")
    p.add_argument("--anchor")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_embed, needs=("infile", "watermark", "trigger", "out"))

    p = sub.add_parser("extract", parents=[common], help="recover a watermark")
    p.add_argument("--in", dest="infile")
    p.add_argument("--trigger")
    p.add_argument("--anchor")
    p.set_defaults(func=_cmd_extract, needs=("infile", "trigger"))

    p = sub.add_parser("protect", parents=[common], help="encode constants")
    p.add_argument("--in", dest="infile")
    p.add_argument("--trigger")
    p.add_argument("--policy")
    p.add_argument("--anchor")
    p.add_argument("--out")
    p.add_argument("--plan")
    p.set_defaults(func=_cmd_protect, needs=("infile", "trigger", "out"))

    p = sub.add_parser("attack", parents=[common], help="apply a transformation")
    p.add_argument("--in", dest="infile")
    p.add_argument("--kind", choices=ATTACK_KINDS)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_attack, needs=("infile", "kind", "out"))

    p = sub.add_parser("bench", parents=[common], help="measure a corpus")
    p.add_argument("--corpus")
    p.add_argument("--watermark", type=int)
    p.add_argument("--trigger")
    p.add_argument("--policy")
    p.add_argument("--inputs")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench, needs=("corpus", "watermark", "trigger", "inputs"))

    p = sub.add_parser("report", parents=[common], help="render a report")
    p.add_argument("--in", dest="infile")
    p.add_argument("--format", choices=("json", "md", "markdown"))
    p.add_argument("--out")
    p.set_defaults(func=_cmd_report, needs=("infile",))

    p = sub.add_parser("serve", parents=[common], help="start the HTTP service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=_cmd_serve, needs=())

    return parser


_FALLBACKS = {
    "anchor": "wm_root",
    "policy": "all",
    "seed": 0,
    "format": "md",
    "host": "127.0.0.1",
    "port": 8000,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            for key, value in load_config(args.config).items():
                if getattr(args, key, None) is None:
                    setattr(args, key, value)
        except CliError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    for key, value in _FALLBACKS.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    missing = [n for n in args.needs if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--in" if n == "infile" else f"--{n}" for n in missing)
        print(f"error: missing required value(s): {flags}", file=sys.stderr)
        return 2
    try:
        return args.func(Client(args.server), args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
