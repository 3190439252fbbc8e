"""Built-in extractors for common microservice repository layouts.

Four extractors ship with the package:

* ``compose-services`` — reads ``docker-compose.yml``/``.yaml`` at an
  architecture entity's ``$path`` and creates one microservice sub-entity
  per service (name, domain, build path, container ports).
* ``java-detector`` — marks a microservice with ``java: true`` when any
  ``.java`` file exists under its ``$path``.
* ``dependency-manifest`` — collects declared dependencies from
  ``package.json``, ``pom.xml`` and ``requirements.txt``.
* ``http-call-links`` — finds http(s) URLs inside string literals and
  records one link entity per distinct URL under ``calls``, pointing at
  ``/microservices`` with a schema matching domain, port and endpoint.

All of them read ``$path`` as a ``/``-separated path relative to the
repository root (empty string means the root itself).
"""

from __future__ import annotations

import json
import posixpath
import re
import xml.etree.ElementTree as ET

import yaml

from . import scan
from .errors import ExtractorError
from .linking import make_link
from .registry import ExtractorSpec, RunContext

COMPOSE_SERVICES_ID = "compose-services"
JAVA_DETECTOR_ID = "java-detector"
DEPENDENCY_MANIFEST_ID = "dependency-manifest"
HTTP_CALL_LINKS_ID = "http-call-links"

_ARCHITECTURE_AT_PATH = {
    "type": "object",
    "properties": {
        "$TYPE": {"const": "architecture"},
        "$path": {"type": "string"},
    },
    "required": ["$TYPE", "$path"],
}

_MICROSERVICE_AT_PATH = {
    "type": "object",
    "properties": {
        "$TYPE": {"const": "microservice"},
        "$path": {"type": "string"},
    },
    "required": ["$TYPE", "$path"],
}

_COMPOSE_NAMES = ("docker-compose.yml", "docker-compose.yaml")


def _relative_subpath(base: str, relative: str) -> str | None:
    """Resolve ``relative`` against the repo-relative ``base`` directory.

    Returns a normalized repo-relative POSIX path, or None when the result
    escapes the repository root.
    """
    joined = posixpath.normpath(posixpath.join(base, relative))
    if joined == ".":
        return ""
    if joined == ".." or joined.startswith("../"):
        return None
    return joined


def _container_port(entry, source: str) -> int:
    """Container-side port of one compose ``ports`` entry.

    Accepts bare ints, ``"8080"``, ``"123:456"``, ``"host:123:456"``,
    an optional ``/protocol`` suffix, and long-form ``{target: ...}``.
    """
    if isinstance(entry, bool):
        raise ExtractorError(f"unsupported ports entry {entry!r} in {source}")
    if isinstance(entry, int):
        return entry
    if isinstance(entry, str):
        container = entry.split("/", 1)[0].rsplit(":", 1)[-1]
        if container.isdigit():
            return int(container)
        raise ExtractorError(f"unsupported ports entry {entry!r} in {source}")
    if isinstance(entry, dict):
        target = entry.get("target")
        if isinstance(target, int) and not isinstance(target, bool):
            return target
        if isinstance(target, str) and target.isdigit():
            return int(target)
        raise ExtractorError(f"unsupported ports entry {entry!r} in {source}")
    raise ExtractorError(f"unsupported ports entry {entry!r} in {source}")


def compose_services_extractor(entity: dict, ctx: RunContext) -> dict:
    """Create one microservice sub-entity per compose service."""
    base = ctx.path_of(entity)
    compose_file = next((base / name for name in _COMPOSE_NAMES if (base / name).is_file()), None)
    if compose_file is None:
        return entity
    try:
        document = yaml.safe_load(compose_file.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ExtractorError(f"malformed compose file {compose_file.name}: {exc}") from exc
    services = (document or {}).get("services", {})
    if not isinstance(services, dict):
        raise ExtractorError(f"malformed compose file {compose_file.name}: 'services' must be a mapping")

    created = []
    for name, service in services.items():
        service = service if isinstance(service, dict) else {}
        fields: dict = {"name": name, "domain": name}
        build = service.get("build")
        build_context = build.get("context") if isinstance(build, dict) else build
        if isinstance(build_context, str):
            subpath = _relative_subpath(entity["$path"], build_context)
            if subpath is not None:
                fields["$path"] = subpath
        ports = [
            _container_port(entry, compose_file.name)
            for entry in service.get("ports") or []
        ]
        if ports:
            fields["ports"] = ports
        created.append(ctx.create_entity("microservice", fields))

    if created:
        entity["microservices"] = entity.get("microservices", []) + created
    return entity


def java_detector(entity: dict, ctx: RunContext) -> dict:
    """Set ``java: true`` when the service's tree contains a .java file."""
    base = ctx.path_of(entity)
    if base.is_dir() and scan.get_paths(base, "**/*.java"):
        entity["java"] = True
    return entity


def _npm_dependencies(manifest) -> list[dict]:
    dependencies = manifest.get("dependencies") or {}
    if not isinstance(dependencies, dict):
        raise ExtractorError("package.json 'dependencies' must be an object")
    return [
        {"name": name, "version": str(version)}
        for name, version in dependencies.items()
    ]


def _maven_dependencies(tree: ET.ElementTree) -> list[dict]:
    found = []
    for element in tree.iter():
        if element.tag.rpartition("}")[2] != "dependency":
            continue
        name = version = None
        for child in element:
            tag = child.tag.rpartition("}")[2]
            if tag == "artifactId":
                name = (child.text or "").strip()
            elif tag == "version":
                version = (child.text or "").strip()
        if name:
            entry = {"name": name}
            if version:
                entry["version"] = version
            found.append(entry)
    return found


def _pip_dependencies(text: str) -> list[dict]:
    found = []
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        match = re.match(r"^([A-Za-z0-9._\[\],-]+?)\s*(?:(?:==|>=|<=|~=|!=|>|<)\s*(\S+))?$", line)
        if not match:
            continue
        entry = {"name": match.group(1)}
        if match.group(2):
            entry["version"] = match.group(2)
        found.append(entry)
    return found


def dependency_manifest_extractor(entity: dict, ctx: RunContext) -> dict:
    """Collect declared dependencies as ``{"name", "version"?}`` records."""
    base = ctx.path_of(entity)
    if not base.is_dir():
        return entity
    dependencies: list[dict] = []

    package_json = base / "package.json"
    if package_json.is_file():
        try:
            manifest = json.loads(package_json.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ExtractorError(f"unparsable manifest package.json: {exc}") from exc
        if not isinstance(manifest, dict):
            raise ExtractorError("unparsable manifest package.json: not an object")
        dependencies.extend(_npm_dependencies(manifest))

    pom = base / "pom.xml"
    if pom.is_file():
        try:
            tree = ET.parse(pom)
        except ET.ParseError as exc:
            raise ExtractorError(f"unparsable manifest pom.xml: {exc}") from exc
        dependencies.extend(_maven_dependencies(tree))

    requirements = base / "requirements.txt"
    if requirements.is_file():
        dependencies.extend(_pip_dependencies(requirements.read_text(encoding="utf-8")))

    if dependencies:
        entity["dependencies"] = entity.get("dependencies", []) + dependencies
    return entity


def _call_target_schema(url_match: re.Match) -> dict:
    properties: dict = {"domain": {"const": url_match.group("host")}}
    required = ["domain"]
    if url_match.group("port"):
        properties["ports"] = {"contains": {"const": int(url_match.group("port"))}}
        required.append("ports")
    if url_match.group("path"):
        properties["endpoints"] = {"contains": {"const": url_match.group("path")}}
        required.append("endpoints")
    return {"type": "object", "properties": properties, "required": required}


def http_call_link_extractor(entity: dict, ctx: RunContext) -> dict:
    """Record one link per distinct http(s) URL found in string literals.

    Each link targets ``/microservices`` with a schema requiring the URL's
    host as ``domain``, its port among ``ports`` and its path among
    ``endpoints`` (port and path only when present in the URL).
    """
    base = ctx.path_of(entity)
    if not base.is_dir():
        return entity
    url_re = re.compile(scan.url_pattern())
    seen: list[str] = []
    for literal in scan.search_content(base, "**/*", scan.string_literal_pattern()):
        body = next((group for group in literal.captures if group is not None), "")
        for url_match in url_re.finditer(body):
            if url_match.group(0) not in seen:
                seen.append(url_match.group(0))

    calls = []
    for url in seen:
        url_match = url_re.match(url)
        calls.append(make_link(_call_target_schema(url_match), "/microservices"))
    if calls:
        entity["calls"] = entity.get("calls", []) + calls
    return entity


def builtin_specs() -> list[ExtractorSpec]:
    """Fresh specs for the built-in extractors, in recommended order."""
    return [
        ExtractorSpec(COMPOSE_SERVICES_ID, dict(_ARCHITECTURE_AT_PATH), compose_services_extractor),
        ExtractorSpec(JAVA_DETECTOR_ID, dict(_MICROSERVICE_AT_PATH), java_detector),
        ExtractorSpec(DEPENDENCY_MANIFEST_ID, dict(_MICROSERVICE_AT_PATH), dependency_manifest_extractor),
        ExtractorSpec(HTTP_CALL_LINKS_ID, dict(_MICROSERVICE_AT_PATH), http_call_link_extractor),
    ]


BUILTIN_IDS = (
    COMPOSE_SERVICES_ID,
    JAVA_DETECTOR_ID,
    DEPENDENCY_MANIFEST_ID,
    HTTP_CALL_LINKS_ID,
)
