"""Retroactive resolution of schema-described references between entities.

Extractors that discover a reference to a not-yet-known entity (say, an
HTTP call to another service) record a link entity instead of guessing:
``$TYPE`` is ``$LINK`` and the entity carries a ``target_schema`` (what
the target must look like) plus a ``search_pointer`` (where in the model
to search, as a JSON Pointer to an array). Links carry no ``$uuids`` or
``$extractors`` — they are references, not reconstructed entities.

``resolve_links`` runs after aggregation, when the model is as complete
as it will get: each link's pointer is evaluated against the model root
and every element of the referenced array is validated against the
target schema. Exactly one match resolves the link; several are recorded
as ambiguous, none as unresolved.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field

from .errors import LinkResolutionError
from .model import (
    LINK_TYPE,
    NOT_FOUND,
    TYPE_KEY,
    UUIDS_KEY,
    ModelFile,
    compile_schema,
    escape_token,
    pointer_tokens,
    resolve_pointer,
)

logger = logging.getLogger(__name__)

RESOLUTION_KEY = "resolution"

_STATUSES = ("resolved", "ambiguous", "unresolved")
_POLICY_ACTIONS = ("record", "error")


@dataclass(frozen=True)
class ResolutionReport:
    """Outcome of one resolution sweep: tallies plus one detail per link."""

    resolved: int
    ambiguous: int
    unresolved: int
    details: tuple[dict, ...] = field(default_factory=tuple)

    @property
    def total(self) -> int:
        return self.resolved + self.ambiguous + self.unresolved

    def as_dict(self) -> dict:
        return {
            "resolved": self.resolved,
            "ambiguous": self.ambiguous,
            "unresolved": self.unresolved,
            "links": [dict(detail) for detail in self.details],
        }


def make_link(target_schema: dict, search_pointer: str) -> dict:
    """Build a link entity, validating the schema and pointer eagerly.

    Raises SchemaError for an invalid schema and PointerSyntaxError for a
    malformed pointer, so broken links fail at creation time rather than
    at resolution time.
    """
    compile_schema(target_schema)
    pointer_tokens(search_pointer)
    return {
        TYPE_KEY: LINK_TYPE,
        "target_schema": copy.deepcopy(target_schema),
        "search_pointer": search_pointer,
    }


def is_link(value) -> bool:
    """True iff ``value`` is a well-formed link entity."""
    return (
        isinstance(value, dict)
        and value.get(TYPE_KEY) == LINK_TYPE
        and isinstance(value.get("search_pointer"), str)
        and "target_schema" in value
    )


def _collect_links(value, pointer: str, out: list) -> None:
    if is_link(value):
        out.append((pointer, value))
        return  # a link's schema and resolution are not model content
    if isinstance(value, dict):
        for key, child in value.items():
            _collect_links(child, f"{pointer}/{escape_token(key)}", out)
    elif isinstance(value, list):
        for i, child in enumerate(value):
            _collect_links(child, f"{pointer}/{i}", out)


def _matched_uuids(matches: list) -> list[str]:
    uuids: list[str] = []
    for match in matches:
        if isinstance(match, dict):
            for uuid in match.get(UUIDS_KEY, []):
                if uuid not in uuids:
                    uuids.append(uuid)
    return uuids


def resolve_links(
    model: ModelFile,
    policy: dict[str, str] | None = None,
    *,
    re_resolve: bool = False,
) -> tuple[ModelFile, ResolutionReport]:
    """Resolve every link in ``model`` and annotate it with the outcome.

    Each unresolved link gains a ``resolution`` field:
    ``{"status": ..., "matched_uuids": [...]}`` with status ``resolved``
    (exactly one array element satisfied the target schema), ``ambiguous``
    (several did) or ``unresolved`` (none did, or the pointer missed).
    Links that already carry a ``resolution`` are left untouched, so the
    operation is idempotent; ``re_resolve=True`` discards recorded
    outcomes first.

    ``policy`` maps ``"ambiguous"`` and ``"unresolved"`` to ``"record"``
    (default) or ``"error"``; ``"error"`` aborts with LinkResolutionError
    naming the offending links. The input model is never mutated.
    """
    effective = {"ambiguous": "record", "unresolved": "record"}
    for key, action in (policy or {}).items():
        if key not in effective:
            raise ValueError(f"unknown policy key {key!r}")
        if action not in _POLICY_ACTIONS:
            raise ValueError(f"policy for {key!r} must be one of {_POLICY_ACTIONS}, got {action!r}")
        effective[key] = action

    root = copy.deepcopy(model.root)
    links: list[tuple[str, dict]] = []
    _collect_links(root, "", links)
    if re_resolve:
        for _, link in links:
            link.pop(RESOLUTION_KEY, None)

    details: list[dict] = []
    tallies = dict.fromkeys(_STATUSES, 0)
    for link_pointer, link in links:
        recorded = link.get(RESOLUTION_KEY)
        if isinstance(recorded, dict) and recorded.get("status") in _STATUSES:
            status = recorded["status"]
            matched = list(recorded.get("matched_uuids", []))
        else:
            target = resolve_pointer(root, link["search_pointer"])
            if target is NOT_FOUND or not isinstance(target, list):
                status, matched = "unresolved", []
            else:
                validator = compile_schema(link["target_schema"])
                matches = [element for element in target if validator.is_valid(element)]
                if len(matches) == 1:
                    status = "resolved"
                elif matches:
                    status = "ambiguous"
                else:
                    status = "unresolved"
                matched = _matched_uuids(matches)
            link[RESOLUTION_KEY] = {"status": status, "matched_uuids": matched}
        tallies[status] += 1
        details.append(
            {"pointer": link_pointer, "status": status, "matched_uuids": list(matched)}
        )

    for status in ("ambiguous", "unresolved"):
        offending = [d for d in details if d["status"] == status]
        if offending and effective[status] == "error":
            listed = ", ".join(d["pointer"] or "/" for d in offending)
            raise LinkResolutionError(
                f"{len(offending)} {status} link(s): {listed}", offending=offending
            )
        for detail in offending:
            logger.warning("link at %r is %s", detail["pointer"] or "/", status)

    report = ResolutionReport(
        resolved=tallies["resolved"],
        ambiguous=tallies["ambiguous"],
        unresolved=tallies["unresolved"],
        details=tuple(details),
    )
    return ModelFile(root=root, format_version=model.format_version), report
