"""Reconstruction run configuration.

A configuration is a JSON file naming the initial entity, the extractors
to enable (built-in ids and/or external commands) and optional settings:

.. code-block:: json

    {
      "initial_entity": {"type_tag": "architecture", "fields": {"$path": ""}},
      "enabled_extractors": ["compose-services", "java-detector"],
      "external_extractors": [
        {
          "id": "my-tool",
          "input_schema": {"type": "object"},
          "argv": ["python3", "/abs/path/tool.py"],
          "timeout": 30
        }
      ],
      "deterministic_ids": false
    }

Unknown keys and malformed values raise ConfigError — configurations
fail loudly rather than silently ignoring a typo.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArchrecoError, ConfigError
from .model import BOOKKEEPING_KEYS
from .registry import DEFAULT_TIMEOUT, ExternalCommand, ExtractorRegistry, ExtractorSpec
from .std_extractors import builtin_specs

_TOP_LEVEL_KEYS = {
    "initial_entity",
    "enabled_extractors",
    "external_extractors",
    "deterministic_ids",
}
_INITIAL_ENTITY_KEYS = {"type_tag", "fields"}
_EXTERNAL_KEYS = {"id", "input_schema", "argv", "timeout", "repeatable"}


@dataclass
class ReconstructionConfig:
    """Validated contents of a configuration file."""

    initial_type: str
    initial_fields: dict
    enabled_extractors: list[str]
    external_extractors: list[ExtractorSpec] = field(default_factory=list)
    deterministic_ids: bool = False


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _parse_external(entry, position: int) -> ExtractorSpec:
    where = f"external_extractors[{position}]"
    _require(isinstance(entry, dict), f"{where} must be an object")
    unknown = set(entry) - _EXTERNAL_KEYS
    _require(not unknown, f"{where} has unknown keys: {sorted(unknown)}")
    _require(isinstance(entry.get("id"), str) and entry["id"], f"{where} needs a non-empty string 'id'")
    _require(isinstance(entry.get("input_schema"), dict), f"{where} needs an object 'input_schema'")
    argv = entry.get("argv")
    _require(
        isinstance(argv, list) and argv and all(isinstance(a, str) for a in argv),
        f"{where} needs a non-empty string array 'argv'",
    )
    timeout = entry.get("timeout", DEFAULT_TIMEOUT)
    _require(
        isinstance(timeout, (int, float)) and not isinstance(timeout, bool) and timeout > 0,
        f"{where}: 'timeout' must be a positive number",
    )
    repeatable = entry.get("repeatable", False)
    _require(isinstance(repeatable, bool), f"{where}: 'repeatable' must be a boolean")
    return ExtractorSpec(
        id=entry["id"],
        input_schema=entry["input_schema"],
        body=ExternalCommand(argv, timeout=float(timeout)),
        repeatable=repeatable,
    )


def load_config(path: str | Path) -> ReconstructionConfig:
    """Parse and validate a configuration file. Raises ConfigError."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration {path} is not valid JSON: {exc}") from exc
    _require(isinstance(document, dict), "configuration must be a JSON object")

    unknown = set(document) - _TOP_LEVEL_KEYS
    _require(not unknown, f"configuration has unknown keys: {sorted(unknown)}")
    _require("initial_entity" in document, "configuration needs 'initial_entity'")
    _require("enabled_extractors" in document, "configuration needs 'enabled_extractors'")

    initial = document["initial_entity"]
    _require(isinstance(initial, dict), "'initial_entity' must be an object")
    unknown = set(initial) - _INITIAL_ENTITY_KEYS
    _require(not unknown, f"'initial_entity' has unknown keys: {sorted(unknown)}")
    type_tag = initial.get("type_tag", "architecture")
    _require(
        isinstance(type_tag, str) and bool(type_tag),
        "'initial_entity.type_tag' must be a non-empty string",
    )
    fields = initial.get("fields", {})
    _require(isinstance(fields, dict), "'initial_entity.fields' must be an object")
    for key in BOOKKEEPING_KEYS:
        _require(key not in fields, f"'initial_entity.fields' may not set {key}")

    enabled = document["enabled_extractors"]
    _require(
        isinstance(enabled, list) and all(isinstance(e, str) for e in enabled),
        "'enabled_extractors' must be an array of extractor ids",
    )

    externals_raw = document.get("external_extractors", [])
    _require(isinstance(externals_raw, list), "'external_extractors' must be an array")
    externals = [_parse_external(entry, i) for i, entry in enumerate(externals_raw)]

    deterministic = document.get("deterministic_ids", False)
    _require(isinstance(deterministic, bool), "'deterministic_ids' must be a boolean")

    return ReconstructionConfig(
        initial_type=type_tag,
        initial_fields=fields,
        enabled_extractors=list(enabled),
        external_extractors=externals,
        deterministic_ids=deterministic,
    )


def build_registry(config: ReconstructionConfig) -> ExtractorRegistry:
    """Registry holding the enabled extractors in their listed order.

    An id in ``enabled_extractors`` refers either to a built-in extractor
    or to an entry in ``external_extractors``; anything else (or a
    duplicate, or an invalid gate schema) raises ConfigError.
    """
    available = {spec.id: spec for spec in builtin_specs()}
    for spec in config.external_extractors:
        _require(spec.id not in available, f"external extractor id {spec.id!r} shadows another extractor")
        available[spec.id] = spec

    registry = ExtractorRegistry()
    for extractor_id in config.enabled_extractors:
        spec = available.get(extractor_id)
        _require(spec is not None, f"unknown extractor id {extractor_id!r} in 'enabled_extractors'")
        try:
            registry.register(spec)
        except ArchrecoError as exc:
            raise ConfigError(f"cannot enable extractor {extractor_id!r}: {exc}") from exc
    return registry
