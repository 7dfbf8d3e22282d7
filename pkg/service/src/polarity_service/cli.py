"""Service entry points: `serve` and `export-cache`.

POLARITY_SERVICE_ADDR ("host:port") sets the default listen address;
POLARITY_MODEL and POLARITY_WINDOW pick the scoring backend (see scoring).
"""

from __future__ import annotations

import argparse
import os
import sys

from .export import ExportError, export_cache
from .scoring import WINDOW_ASPECT, WINDOW_FULL, LexiconScorer, load_scorer_from_env

DEFAULT_ADDR = "127.0.0.1:8000"


def _default_host_port() -> tuple[str, int]:
    addr = os.environ.get("POLARITY_SERVICE_ADDR", DEFAULT_ADDR)
    host, _, port = addr.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app

    scorer = load_scorer_from_env()
    app = create_app(scorer)
    host, port = _default_host_port()
    if args.host:
        host = args.host
    if args.port:
        port = args.port
    print(f"serving {scorer.model_id} on {host}:{port}", file=sys.stderr)
    uvicorn.run(app, host=host, port=port, log_level="warning")
    return 0


def cmd_export_cache(args) -> int:
    if args.window:
        scorer = LexiconScorer(args.window)
        if os.environ.get("POLARITY_MODEL", "lexicon") != "lexicon":
            print("export-cache --window only applies to the lexicon scorer",
                  file=sys.stderr)
            return 2
    else:
        scorer = load_scorer_from_env()
    try:
        n = export_cache(args.dataset, args.out, scorer)
    except (OSError, ExportError) as e:
        print(f"polarity-service export-cache: error: {e}", file=sys.stderr)
        return 1
    print(f"exported {n} scores ({scorer.model_id}) -> {args.out}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="polarity-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("export-cache", help="score a dataset file into a polarity cache")
    p.add_argument("--dataset", required=True, help="dataset JSONL")
    p.add_argument("--out", required=True, help="cache JSONL to write")
    p.add_argument("--window", choices=(WINDOW_FULL, WINDOW_ASPECT), default=None,
                   help="override the lexicon scorer's input windowing")
    p.set_defaults(fn=cmd_export_cache)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
