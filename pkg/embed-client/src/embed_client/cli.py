"""Extraction client CLI.

`extract` turns a request file (JSON Lines: {"key", "tokens", "span"}) into
the embedding file the segmentation core ingests; `encode-sentences` does the
same for sentence windows, writing a {"dimension": d} header line first.
Output order always follows input order and keys round-trip verbatim.

Exit codes: 0 success, 2 malformed input, 3 model/extraction failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import ModelError, resolve_backend

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_MODEL = 3


class RequestError(ValueError):
    """The request file is malformed or violates an invariant."""


def read_requests(path: str | Path, require_unique_keys: bool = True) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise RequestError(f"no such file: {path}")
    requests = []
    seen = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise RequestError(f"{path}:{lineno}: not valid JSON ({exc})") from exc
        if "key" not in obj or "tokens" not in obj:
            raise RequestError(f"{path}:{lineno}: request needs 'key' and 'tokens'")
        key = str(obj["key"])
        tokens = obj["tokens"]
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise RequestError(f"{path}:{lineno}: 'tokens' must be a list of strings")
        span = obj.get("span")
        if span is not None:
            try:
                lo, hi = int(span[0]), int(span[1])
            except (TypeError, ValueError, IndexError) as exc:
                raise RequestError(f"{path}:{lineno}: 'span' must be [lo, hi]") from exc
            if not (0 <= lo < hi <= len(tokens)):
                raise RequestError(
                    f"{path}:{lineno}: span [{lo}, {hi}] outside chunk of {len(tokens)} tokens"
                )
            span = (lo, hi)
        if require_unique_keys and key in seen:
            raise RequestError(f"{path}:{lineno}: duplicate key {key!r}")
        seen.add(key)
        requests.append({"key": key, "tokens": tokens, "span": span})
    return requests


def _vector_line(key: str, vector) -> str:
    return json.dumps({"key": key, "vector": [float(x) for x in vector]})


def cmd_extract(args: argparse.Namespace) -> int:
    requests = read_requests(args.requests)
    backend = resolve_backend(args.model, args.dimension)
    if args.expect_dimension is not None and backend.dimension != args.expect_dimension:
        raise ModelError(
            f"dimension mismatch: model yields {backend.dimension}, "
            f"request expects {args.expect_dimension}"
        )
    lines = []
    for req in requests:
        vector = backend.embed(req["tokens"], req["span"])
        if vector.shape != (backend.dimension,):
            raise ModelError(
                f"model returned shape {vector.shape} for key {req['key']!r}"
            )
        lines.append(_vector_line(req["key"], vector))
    Path(args.out).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    print(f"{len(lines)} vectors ({backend.name}, d={backend.dimension}) -> {args.out}")
    return EXIT_OK


def cmd_encode_sentences(args: argparse.Namespace) -> int:
    requests = read_requests(args.sentences)
    backend = resolve_backend(args.model, args.dimension)
    lines = [json.dumps({"dimension": backend.dimension})]
    for req in requests:
        if not req["tokens"]:
            raise RequestError(f"sentence {req['key']!r} is empty")
        vector = backend.embed(req["tokens"], req["span"])
        lines.append(_vector_line(req["key"], vector))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(
        f"{len(lines) - 1} sentence encodings ({backend.name}, d={backend.dimension}) "
        f"-> {args.out}"
    )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lecseg-embed",
        description="Run an embedding model over transcript chunks or sentences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="embed chunk/concept requests")
    p.add_argument("requests", help="request JSONL: {key, tokens, span}")
    p.add_argument("--model", default="hash", help="hash | st:<name> | hf:<name>")
    p.add_argument("--dimension", type=int, default=256, help="hash-backend dimension")
    p.add_argument(
        "--expect-dimension", type=int, help="fail unless the model yields this dimension"
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("encode-sentences", help="embed sentence windows")
    p.add_argument("sentences", help="sentence JSONL: {key, tokens}")
    p.add_argument("--model", default="hash")
    p.add_argument("--dimension", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_encode_sentences)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RequestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ModelError, ValueError) as exc:
        print(f"extraction error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
