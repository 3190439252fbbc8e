"""Extractor registration, schema-gated dispatch and external processes.

An extractor is a unit of reconstruction logic: it receives a copy of a
model entity plus a run context and returns the (additively) enriched
entity. Each extractor declares a JSON Schema gate; the engine only
dispatches it to entities the schema accepts. Extractors may be in-process
callables or external commands speaking JSON over stdin/stdout.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterator

from . import scan as scan_module
from .errors import (
    ExtractorError,
    ProtocolError,
    RegistrationError,
    TimeoutError,
)
from .model import EXTRACTORS_KEY, UUIDS_KEY, compile_schema, random_id

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0


@dataclass(frozen=True)
class ExternalCommand:
    """A subprocess extractor body: argv plus a wall-clock timeout."""

    argv: tuple[str, ...]
    timeout: float = DEFAULT_TIMEOUT

    def __init__(self, argv, timeout: float = DEFAULT_TIMEOUT):
        argv = tuple(str(a) for a in argv)
        if not argv:
            raise ValueError("external command needs at least a program name")
        if timeout <= 0:
            raise ValueError("timeout must be positive")
        object.__setattr__(self, "argv", argv)
        object.__setattr__(self, "timeout", float(timeout))


@dataclass(frozen=True)
class ExtractorSpec:
    """Identity, input gate and body of one extractor.

    ``repeatable`` is reserved for a future re-execution mode; the registry
    rejects it so configurations asking for it fail loudly instead of
    silently running once.
    """

    id: str
    input_schema: dict
    body: Callable[[dict, "RunContext"], dict] | ExternalCommand
    repeatable: bool = False


@dataclass
class RunContext:
    """Everything an extractor body may rely on besides the entity itself.

    ``scan`` exposes the repository scanning helpers, ``ids`` yields fresh
    entity ids, and ``create_entity`` builds a fully-processed sub-entity
    (running all matching extractors on it before returning it).
    """

    repo_root: Path
    scan: Any = None
    ids: Callable[[], str] = random_id
    registry: "ExtractorRegistry | None" = None
    depth: int = 0
    reports: list = field(default_factory=list)

    def __post_init__(self):
        self.repo_root = Path(self.repo_root)
        if self.scan is None:
            self.scan = scan_module

    def child(self) -> "RunContext":
        """A context one nesting level deeper, sharing the report log."""
        return dataclasses.replace(self, depth=self.depth + 1)

    def create_entity(self, type_tag: str, initial_fields: dict | None = None) -> dict:
        if self.registry is None:
            raise RegistrationError("context is not bound to a registry")
        from .engine import create_model_entity

        return create_model_entity(type_tag, initial_fields, self.registry, self.child())

    def path_of(self, entity: dict) -> Path:
        """Absolute filesystem location of an entity's ``$path``."""
        return self.repo_root / entity.get("$path", "")


class ExtractorRegistry:
    """Ordered collection of extractors with schema-gated lookup."""

    def __init__(self, specs: "list[ExtractorSpec] | tuple[ExtractorSpec, ...]" = ()):
        self._specs: list[ExtractorSpec] = []
        self._validators: dict[str, Any] = {}
        for spec in specs:
            self.register(spec)

    def register(self, spec: ExtractorSpec) -> None:
        """Add an extractor; id must be unique, schema must compile."""
        if not spec.id or not isinstance(spec.id, str):
            raise RegistrationError("extractor id must be a non-empty string")
        if any(existing.id == spec.id for existing in self._specs):
            raise RegistrationError(f"extractor id {spec.id!r} is already registered")
        if spec.repeatable:
            raise RegistrationError(
                f"extractor {spec.id!r}: repeatable execution is not supported"
            )
        if not callable(spec.body) and not isinstance(spec.body, ExternalCommand):
            raise RegistrationError(
                f"extractor {spec.id!r}: body must be callable or an ExternalCommand"
            )
        validator = compile_schema(spec.input_schema)
        self._specs.append(spec)
        self._validators[spec.id] = validator

    def __len__(self) -> int:
        return len(self._specs)

    def __iter__(self) -> Iterator[ExtractorSpec]:
        return iter(self._specs)

    def ids(self) -> list[str]:
        return [spec.id for spec in self._specs]

    def get(self, extractor_id: str) -> ExtractorSpec:
        for spec in self._specs:
            if spec.id == extractor_id:
                return spec
        raise KeyError(extractor_id)

    def matching(self, entity: dict) -> list[ExtractorSpec]:
        """Extractors whose schema accepts ``entity`` and which have not
        already run on it, in registration order."""
        already_ran = entity.get(EXTRACTORS_KEY, [])
        return [
            spec
            for spec in self._specs
            if spec.id not in already_ran and self._validators[spec.id].is_valid(entity)
        ]


def register_extractor(registry: ExtractorRegistry, spec: ExtractorSpec) -> ExtractorRegistry:
    """Register ``spec`` and return the registry (for chaining)."""
    registry.register(spec)
    return registry


def invoke_external(command: ExternalCommand, entity: dict, ctx: RunContext) -> dict:
    """Run one external extractor invocation.

    Wire protocol: the process receives ``{"entity": ..., "repo_root": ...}``
    as JSON on stdin and must print exactly one JSON object — the enriched
    entity — to stdout, exiting 0. stderr is free-form diagnostics. The
    process must not touch ``$uuids``.
    """
    request = json.dumps({"entity": entity, "repo_root": str(ctx.repo_root)})
    try:
        proc = subprocess.run(
            list(command.argv),
            input=request.encode("utf-8"),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=command.timeout,
        )
    except subprocess.TimeoutExpired as exc:
        stderr_text = (exc.stderr or b"").decode("utf-8", errors="replace")
        raise TimeoutError(
            f"external extractor {command.argv[0]!r} exceeded {command.timeout}s",
            stderr=stderr_text,
        ) from exc
    except OSError as exc:
        raise ExtractorError(f"cannot execute {command.argv[0]!r}: {exc}") from exc

    stderr_text = proc.stderr.decode("utf-8", errors="replace")
    if stderr_text:
        logger.debug("external extractor %s stderr: %s", command.argv[0], stderr_text.rstrip())
    if proc.returncode != 0:
        raise ExtractorError(
            f"external extractor {command.argv[0]!r} exited with {proc.returncode}",
            exit_code=proc.returncode,
            stderr=stderr_text,
        )
    try:
        result = json.loads(proc.stdout.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError(
            f"external extractor {command.argv[0]!r} wrote invalid JSON: {exc}",
            stderr=stderr_text,
        ) from exc
    if not isinstance(result, dict):
        raise ProtocolError(
            f"external extractor {command.argv[0]!r} must return a JSON object, "
            f"got {type(result).__name__}",
            stderr=stderr_text,
        )
    if result.get(UUIDS_KEY) != entity.get(UUIDS_KEY):
        raise ProtocolError(
            f"external extractor {command.argv[0]!r} altered {UUIDS_KEY}",
            stderr=stderr_text,
        )
    return result
