"""Command-line interface.

Four subcommands cover the reconstruction pipeline:

* ``archreco reconstruct`` — run the enabled extractors over a repository
  and write the resulting model file.
* ``archreco aggregate`` — union several model files into one, failing on
  contradictions.
* ``archreco resolve`` — evaluate the links in a model and annotate each
  with its resolution status.
* ``archreco validate`` — check a model file's structure (and optionally
  its root against a schema).

stdout carries machine-readable JSON only; all diagnostics go to stderr.
Logging verbosity comes from the ``ARCHRECO_LOG`` environment variable
(``error``, ``warn``, ``info`` or ``debug``; default ``warn``).

Exit codes: 0 success, 1 validation failure or unreadable model file,
2 aggregation conflict, 3 extractor failure, 4 strict resolution policy
violation, 64 configuration or usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import build_registry, load_config
from .engine import create_model_entity
from .errors import (
    ConfigError,
    ConflictError,
    ExtractorError,
    IllegalMutationError,
    InvalidEntityError,
    LinkResolutionError,
    ParseError,
    SchemaError,
    VersionError,
)
from .linking import resolve_links
from .model import (
    ModelFile,
    SequentialIds,
    compile_schema,
    random_id,
    read_model_file,
    structural_problems,
    write_model_file,
)
from .registry import RunContext

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONFLICT = 2
EXIT_EXTRACTOR = 3
EXIT_POLICY = 4
EXIT_CONFIG = 64

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("ARCHRECO_LOG", "warn").lower(), logging.WARNING)
    root = logging.getLogger("archreco")
    root.setLevel(level)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
        root.addHandler(handler)


def _fail(message: str) -> None:
    print(f"archreco: {message}", file=sys.stderr)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; keep 2 reserved for conflicts."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="archreco", description="Static microservice architecture reconstruction.")
    sub = parser.add_subparsers(dest="command", required=True)

    reconstruct = sub.add_parser("reconstruct", help="run extractors over a repository")
    reconstruct.add_argument("--config", required=True, help="configuration JSON file")
    reconstruct.add_argument("--repo", required=True, help="repository root directory")
    reconstruct.add_argument("--out", required=True, help="output model file")
    reconstruct.add_argument(
        "--deterministic",
        action="store_true",
        help="use sequential entity ids for reproducible output",
    )
    reconstruct.set_defaults(handler=cmd_reconstruct)

    aggregate = sub.add_parser("aggregate", help="union several model files")
    aggregate.add_argument("models", nargs="+", help="input model files")
    aggregate.add_argument("--out", required=True, help="output model file")
    aggregate.add_argument(
        "--strict-merge",
        action="store_true",
        help="only merge array objects sharing an equal primitive field",
    )
    aggregate.set_defaults(handler=cmd_aggregate)

    resolve = sub.add_parser("resolve", help="resolve links in a model")
    resolve.add_argument("model", help="input model file")
    resolve.add_argument("--out", required=True, help="output model file")
    resolve.add_argument(
        "--strict-ambiguous", action="store_true", help="fail when any link is ambiguous"
    )
    resolve.add_argument(
        "--strict-unresolved", action="store_true", help="fail when any link is unresolved"
    )
    resolve.add_argument(
        "--re-resolve", action="store_true", help="discard recorded resolutions first"
    )
    resolve.set_defaults(handler=cmd_resolve)

    validate = sub.add_parser("validate", help="check a model file")
    validate.add_argument("model", help="model file to check")
    validate.add_argument("--schema", help="JSON Schema file the root entity must satisfy")
    validate.set_defaults(handler=cmd_validate)

    return parser


def cmd_reconstruct(args) -> int:
    try:
        config = load_config(args.config)
        registry = build_registry(config)
    except ConfigError as exc:
        _fail(str(exc))
        return EXIT_CONFIG

    repo = Path(args.repo)
    if not repo.is_dir():
        _fail(f"repository path is not a directory: {repo}")
        return EXIT_CONFIG

    ids = SequentialIds() if (args.deterministic or config.deterministic_ids) else random_id
    ctx = RunContext(repo_root=repo, ids=ids, registry=registry)
    try:
        root = create_model_entity(config.initial_type, config.initial_fields, registry, ctx)
    except ConflictError as exc:
        _fail(str(exc))
        return EXIT_CONFLICT
    except (ExtractorError, IllegalMutationError) as exc:
        _fail(str(exc))
        if getattr(exc, "stderr", None):
            print(exc.stderr.rstrip(), file=sys.stderr)
        return EXIT_EXTRACTOR
    except InvalidEntityError as exc:
        _fail(str(exc))
        return EXIT_CONFIG

    write_model_file(ModelFile(root=root), args.out)
    entities = len({report.entity_uuid for report in ctx.reports})
    runs = sum(len(report.extractors_executed) for report in ctx.reports)
    print(
        f"archreco: {entities} entities, {runs} extractor runs, "
        f"{len(ctx.reports)} passes -> {args.out}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_aggregate(args) -> int:
    from .aggregate import aggregate_models

    try:
        models = [read_model_file(path) for path in args.models]
    except (ParseError, VersionError) as exc:
        _fail(str(exc))
        return EXIT_INVALID
    try:
        merged = aggregate_models(models, strict=args.strict_merge, sources=args.models)
    except ConflictError as exc:
        _fail(str(exc))
        return EXIT_CONFLICT
    except VersionError as exc:
        _fail(str(exc))
        return EXIT_INVALID
    write_model_file(merged, args.out)
    print(f"archreco: merged {len(models)} models -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_resolve(args) -> int:
    try:
        model = read_model_file(args.model)
    except (ParseError, VersionError) as exc:
        _fail(str(exc))
        return EXIT_INVALID
    policy = {
        "ambiguous": "error" if args.strict_ambiguous else "record",
        "unresolved": "error" if args.strict_unresolved else "record",
    }
    try:
        resolved, report = resolve_links(model, policy, re_resolve=args.re_resolve)
    except LinkResolutionError as exc:
        _fail(str(exc))
        return EXIT_POLICY
    write_model_file(resolved, args.out)
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        model = read_model_file(args.model)
    except (ParseError, VersionError) as exc:
        _fail(str(exc))
        return EXIT_INVALID

    problems = [
        f"{pointer or '/'}: {message}" for pointer, message in structural_problems(model.root)
    ]
    if args.schema:
        try:
            schema = json.loads(Path(args.schema).read_text(encoding="utf-8"))
            validator = compile_schema(schema)
        except (OSError, json.JSONDecodeError, SchemaError) as exc:
            _fail(f"cannot use schema {args.schema}: {exc}")
            return EXIT_CONFIG
        for error in validator.iter_errors(model.root):
            problems.append(f"/{'/'.join(str(p) for p in error.absolute_path)}: {error.message}")

    for problem in problems:
        print(f"archreco: {args.model}: {problem}", file=sys.stderr)
    if problems:
        return EXIT_INVALID
    print(f"archreco: {args.model}: ok", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
