"""Model entities, identity bookkeeping, schema validation and model file I/O.

A model entity is a plain JSON object (a ``dict``). The framework reserves
every key beginning with ``$``: uppercase ``$``-keys (``$TYPE``, ``$LINK``)
belong to the framework itself, lowercase ones matching ``^\\$[a-z0-9_]+$``
(``$path``, ...) are scratch space for extractor-to-extractor data. Two
bookkeeping keys travel with every engine-created entity:

* ``$uuids`` - identities of all original entities merged into this one,
* ``$extractors`` - ids of every extractor that has operated on any of them.
"""

from __future__ import annotations

import json
import re
import uuid as _uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import jsonschema

from .errors import (
    InvalidEntityError,
    ParseError,
    PointerSyntaxError,
    SchemaError,
    VersionError,
)

Json = Any  # any JSON-compatible value

TYPE_KEY = "$TYPE"
UUIDS_KEY = "$uuids"
EXTRACTORS_KEY = "$extractors"
LINK_TYPE = "$LINK"

BOOKKEEPING_KEYS = (UUIDS_KEY, EXTRACTORS_KEY)

FORMAT_VERSION = "1"

# Lowercase $-keys are the extractor-writable subset of the internal space.
EXTRACTOR_DATA_KEY_RE = re.compile(r"^\$[a-z0-9_]+$")


def is_internal_key(key: str) -> bool:
    """Return True iff ``key`` is reserved for framework or extractor data.

    One uniform rule: any key beginning with ``$`` is internal. Uppercase
    ``$``-keys are framework-owned; keys matching ``^\\$[a-z0-9_]+$`` are
    the extractor-writable subset (see :data:`EXTRACTOR_DATA_KEY_RE`).
    """
    return key.startswith("$")


def json_equal(a: Json, b: Json) -> bool:
    """Structural equality under JSON semantics.

    Key order is ignored, booleans are distinct from numbers, and numbers
    compare by mathematical value (``1 == 1.0``).
    """
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(json_equal(value, b[key]) for key, value in a.items())
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(json_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, (dict, list)) or isinstance(b, (dict, list)):
        return False
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


def random_id() -> str:
    """Fresh version-4 UUID, lowercase-hyphenated."""
    return str(_uuid.uuid4())


class SequentialIds:
    """Deterministic id source producing ``e-0001``, ``e-0002``, ...

    Used for reproducible test output; the default source is :func:`random_id`.
    """

    def __init__(self, prefix: str = "e-"):
        self.prefix = prefix
        self._n = 0

    def __call__(self) -> str:
        self._n += 1
        return f"{self.prefix}{self._n:04d}"


def new_entity(
    type_tag: str,
    initial_fields: dict[str, Json] | None = None,
    *,
    id_source: Callable[[], str] = random_id,
) -> dict[str, Json]:
    """Create a model entity with a fresh identity.

    The result carries ``$TYPE``, one fresh UUID in ``$uuids``, an empty
    ``$extractors`` list, and all ``initial_fields``. Bookkeeping keys may
    not appear in ``initial_fields``.
    """
    initial_fields = initial_fields or {}
    for key in BOOKKEEPING_KEYS:
        if key in initial_fields:
            raise InvalidEntityError(
                f"initial fields may not contain bookkeeping key {key!r}"
            )
    entity: dict[str, Json] = {
        TYPE_KEY: type_tag,
        UUIDS_KEY: [id_source()],
        EXTRACTORS_KEY: [],
    }
    for key, value in initial_fields.items():
        if key != TYPE_KEY:
            entity[key] = value
    return entity


_validator_cache: dict[str, jsonschema.Draft202012Validator] = {}


def compile_schema(schema: dict[str, Json]) -> jsonschema.Draft202012Validator:
    """Check ``schema`` against the 2020-12 meta-schema and return a validator.

    Raises SchemaError for documents that are not valid JSON Schema.
    """
    if not isinstance(schema, (dict, bool)):
        raise SchemaError(f"schema must be a JSON object, got {type(schema).__name__}")
    key = json.dumps(schema, sort_keys=True)
    validator = _validator_cache.get(key)
    if validator is None:
        try:
            jsonschema.Draft202012Validator.check_schema(schema)
        except jsonschema.SchemaError as exc:
            raise SchemaError(f"invalid schema: {exc.message}") from exc
        validator = jsonschema.Draft202012Validator(schema)
        _validator_cache[key] = validator
    return validator


def validate_entity(entity: Json, schema: dict[str, Json]) -> bool:
    """True iff ``entity`` validates against ``schema`` (JSON Schema 2020-12).

    Bookkeeping keys are ordinary properties: they never cause a failure
    unless the schema itself constrains them (e.g. via
    ``additionalProperties: false``).
    """
    return compile_schema(schema).is_valid(entity)


class _NotFound:
    """Singleton marking a pointer that resolved to nothing."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NOT_FOUND"

    def __bool__(self):
        return False


NOT_FOUND = _NotFound()

_INDEX_RE = re.compile(r"^(?:0|[1-9][0-9]*)$")


def pointer_tokens(pointer: str) -> list[str]:
    """Split an RFC 6901 pointer into unescaped reference tokens.

    Raises PointerSyntaxError for strings that are not valid pointers.
    """
    if pointer == "":
        return []
    if not pointer.startswith("/"):
        raise PointerSyntaxError(f"pointer must be empty or start with '/': {pointer!r}")
    tokens = []
    for raw in pointer[1:].split("/"):
        if re.search(r"~(?![01])", raw):
            raise PointerSyntaxError(f"invalid escape in pointer token {raw!r}")
        tokens.append(raw.replace("~1", "/").replace("~0", "~"))
    return tokens


def escape_token(token: str) -> str:
    """Escape one reference token for inclusion in a pointer string."""
    return token.replace("~", "~0").replace("/", "~1")


def resolve_pointer(root: Json, pointer: str) -> Json:
    """Evaluate an RFC 6901 pointer against ``root``.

    Returns the referenced value, or :data:`NOT_FOUND` when any step misses
    (absent key, bad array index, primitive in the middle of the path).
    """
    current = root
    for token in pointer_tokens(pointer):
        if isinstance(current, dict):
            if token not in current:
                return NOT_FOUND
            current = current[token]
        elif isinstance(current, list):
            if not _INDEX_RE.match(token):
                return NOT_FOUND
            index = int(token)
            if index >= len(current):
                return NOT_FOUND
            current = current[index]
        else:
            return NOT_FOUND
    return current


@dataclass
class ModelFile:
    """A model persisted to disk: the top-level entity plus a format tag."""

    root: dict[str, Json]
    format_version: str = FORMAT_VERSION


def dumps_canonical(value: Json) -> str:
    """Serialize to the canonical on-disk form.

    Two-space indentation, keys in insertion order, UTF-8, trailing newline.
    Insertion order is what makes deterministic runs byte-identical.
    """
    return json.dumps(value, indent=2, ensure_ascii=False) + "\n"


def write_model_file(model: ModelFile, path: str | Path) -> None:
    """Write ``model`` to ``path`` in canonical form."""
    document = {"format_version": model.format_version, "root": model.root}
    Path(path).write_text(dumps_canonical(document), encoding="utf-8")


def read_model_file(path: str | Path) -> ModelFile:
    """Read a model file, checking JSON well-formedness and format version."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model file {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or "root" not in document:
        raise ParseError(f"model file {path} lacks a top-level 'root' object")
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(
            f"model file {path} has format_version {version!r}, expected {FORMAT_VERSION!r}"
        )
    root = document["root"]
    if not isinstance(root, dict):
        raise ParseError(f"model file {path}: 'root' must be a JSON object")
    return ModelFile(root=root, format_version=version)


def structural_problems(root: Json) -> list[tuple[str, str]]:
    """Bookkeeping violations in a model tree, as (pointer, message) pairs.

    Every dict carrying ``$TYPE`` (or either bookkeeping key) must hold a
    non-empty list of unique id strings in ``$uuids`` and a list of unique
    extractor ids in ``$extractors``; link entities instead need a valid
    ``target_schema`` and ``search_pointer``. An empty list means the tree
    is well-formed.
    """
    problems: list[tuple[str, str]] = []
    _check_structure(root, "", problems)
    return problems


def _check_structure(value: Json, pointer: str, problems: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        type_tag = value.get(TYPE_KEY)
        if type_tag is not None and not isinstance(type_tag, str):
            problems.append((pointer, f"{TYPE_KEY} must be a string"))
        elif type_tag == LINK_TYPE:
            _check_link(value, pointer, problems)
            return  # a link's schema is not model content; do not descend
        if type_tag is not None or UUIDS_KEY in value or EXTRACTORS_KEY in value:
            _check_bookkeeping(value, pointer, problems)
        for key, child in value.items():
            _check_structure(child, f"{pointer}/{escape_token(key)}", problems)
    elif isinstance(value, list):
        for i, child in enumerate(value):
            _check_structure(child, f"{pointer}/{i}", problems)


def _check_link(link: dict, pointer: str, problems: list[tuple[str, str]]) -> None:
    if "target_schema" not in link:
        problems.append((pointer, "link lacks target_schema"))
    else:
        try:
            compile_schema(link["target_schema"])
        except SchemaError as exc:
            problems.append((f"{pointer}/target_schema", str(exc)))
    search_pointer = link.get("search_pointer")
    if not isinstance(search_pointer, str):
        problems.append((pointer, "link lacks search_pointer"))
    else:
        try:
            pointer_tokens(search_pointer)
        except PointerSyntaxError as exc:
            problems.append((f"{pointer}/search_pointer", str(exc)))


def _check_bookkeeping(entity: dict, pointer: str, problems: list[tuple[str, str]]) -> None:
    uuids = entity.get(UUIDS_KEY)
    if (
        not isinstance(uuids, list)
        or not uuids
        or not all(isinstance(u, str) for u in uuids)
    ):
        problems.append((pointer, f"entity needs a non-empty list of id strings in {UUIDS_KEY}"))
    elif len(set(uuids)) != len(uuids):
        problems.append((pointer, f"duplicate ids in {UUIDS_KEY}"))
    executed = entity.get(EXTRACTORS_KEY)
    if not isinstance(executed, list) or not all(isinstance(x, str) for x in executed):
        problems.append((pointer, f"entity needs a list of extractor ids in {EXTRACTORS_KEY}"))
    elif len(set(executed)) != len(executed):
        problems.append((pointer, f"duplicate ids in {EXTRACTORS_KEY}"))
