"""Multi-pass extractor execution over model entities.

``create_model_entity`` builds a fresh entity and drives it to a fixed
point: in each pass the engine snapshots the entity, runs every extractor
whose schema gate matches (skipping ones that already ran on it), reduces
each result to an additive delta, conflict-checks and merges the deltas,
then recurses into sub-entities that were created or modified. Extractors
work on copies, so a misbehaving one cannot corrupt the model — any
deletion or rewrite of existing data is rejected as an illegal mutation.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

from .aggregate import aggregate
from .errors import (
    ArchrecoError,
    ConflictError,
    DepthLimitError,
    ExtractorError,
    IllegalMutationError,
    InvalidEntityError,
)
from .model import (
    BOOKKEEPING_KEYS,
    EXTRACTORS_KEY,
    UUIDS_KEY,
    escape_token,
    json_equal,
    new_entity,
)
from .registry import ExternalCommand, ExtractorRegistry, ExtractorSpec, RunContext, invoke_external

MAX_DEPTH = 32


@dataclass(frozen=True)
class Delta:
    """The additions one extractor run contributed, as a sparse entity."""

    extractor_id: str
    changes: dict


@dataclass(frozen=True)
class PassReport:
    """What one engine pass over one entity did."""

    pass_index: int
    entity_uuid: str
    extractors_executed: tuple[str, ...]
    entity_modified: bool
    subentities_recursed: int


def compute_delta(snapshot: dict, output: dict, extractor_id: str) -> Delta:
    """Reduce an extractor's output to its additions over ``snapshot``.

    Raises IllegalMutationError if the output deletes, rewrites or
    re-types anything present in the snapshot, or touches the
    engine-owned bookkeeping fields.
    """
    changes = _diff_object(snapshot, output, "", extractor_id)
    return Delta(extractor_id=extractor_id, changes=changes)


def _diff_object(old: dict, new: dict, path: str, extractor_id: str) -> dict:
    for key in old:
        if key not in new:
            raise IllegalMutationError(
                extractor_id, f"{path}/{escape_token(key)}", "field was deleted"
            )
    changes: dict = {}
    for key, new_value in new.items():
        key_path = f"{path}/{escape_token(key)}"
        if key not in old:
            changes[key] = copy.deepcopy(new_value)
            continue
        old_value = old[key]
        if key in BOOKKEEPING_KEYS:
            if old_value != new_value:
                raise IllegalMutationError(
                    extractor_id, key_path, "bookkeeping fields are engine-owned"
                )
            continue
        if isinstance(old_value, dict) and isinstance(new_value, dict):
            nested = _diff_object(old_value, new_value, key_path, extractor_id)
            if nested:
                changes[key] = nested
        elif isinstance(old_value, list) and isinstance(new_value, list):
            added = _diff_array(old_value, new_value, key_path, extractor_id)
            if added:
                changes[key] = added
        elif isinstance(old_value, (dict, list)) or isinstance(new_value, (dict, list)):
            raise IllegalMutationError(extractor_id, key_path, "field changed type")
        elif not _scalar_equal(old_value, new_value):
            raise IllegalMutationError(extractor_id, key_path, "field value was rewritten")
    return changes


def _diff_array(old: list, new: list, path: str, extractor_id: str) -> list:
    """Items of ``new`` absent from ``old`` (multiset semantics).

    Order changes are tolerated. An old item may disappear only if some
    new item extends it purely additively (in-place enrichment); anything
    else counts as a removal or rewrite.
    """
    remaining = list(old)
    added = []
    for item in new:
        for i, candidate in enumerate(remaining):
            if json_equal(candidate, item):
                del remaining[i]
                break
        else:
            added.append(item)
    for leftover in remaining:
        if not any(_extends_additively(leftover, item) for item in added):
            raise IllegalMutationError(
                extractor_id, path, "array item was removed or rewritten"
            )
    return [copy.deepcopy(item) for item in added]


def _extends_additively(old_value, new_value) -> bool:
    if not (isinstance(old_value, dict) and isinstance(new_value, dict)):
        return False
    try:
        _diff_object(old_value, new_value, "", "probe")
    except IllegalMutationError:
        return False
    return True


def _scalar_equal(a, b) -> bool:
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


def _union_ids(existing: list, extra: list) -> list:
    out = list(existing)
    for item in extra:
        if item not in out:
            out.append(item)
    return out


def _execute(spec: ExtractorSpec, entity_copy: dict, ctx: RunContext) -> dict:
    if isinstance(spec.body, ExternalCommand):
        return invoke_external(spec.body, entity_copy, ctx)
    try:
        result = spec.body(entity_copy, ctx)
    except ArchrecoError:
        raise
    except Exception as exc:
        raise ExtractorError(f"extractor {spec.id!r} failed: {exc}") from exc
    if not isinstance(result, dict):
        raise ExtractorError(
            f"extractor {spec.id!r} returned {type(result).__name__}, expected an entity"
        )
    return result


def _combine_deltas(deltas: list[Delta]) -> dict:
    """Merge deltas from one pass, naming the exact conflicting pair."""
    combined = copy.deepcopy(deltas[0].changes)
    for position, delta in enumerate(deltas[1:], start=1):
        try:
            combined = aggregate(combined, delta.changes)
        except ConflictError:
            for earlier in deltas[:position]:
                try:
                    aggregate(
                        earlier.changes,
                        delta.changes,
                        left_origin=earlier.extractor_id,
                        right_origin=delta.extractor_id,
                    )
                except ConflictError as exact:
                    raise exact from None
            raise
    return combined


def _index_subentities(value, index: dict, *, skip: dict | None = None) -> None:
    """Map every uuid of every nested entity (dicts carrying ``$uuids``)
    to its node; ``skip`` excludes the root entity itself."""
    if isinstance(value, dict):
        if value is not skip:
            uuids = value.get(UUIDS_KEY)
            if isinstance(uuids, list):
                for uuid in uuids:
                    index.setdefault(uuid, value)
        for child in value.values():
            _index_subentities(child, index)
    elif isinstance(value, list):
        for child in value:
            _index_subentities(child, index)


def _collect_candidates(value, path: tuple, snapshot_index: dict, out: list) -> None:
    """Nested entities that are new or differ from their snapshot state."""
    if isinstance(value, dict):
        if path:
            uuids = value.get(UUIDS_KEY)
            if isinstance(uuids, list) and uuids:
                previous = next(
                    (snapshot_index[u] for u in uuids if u in snapshot_index), None
                )
                if previous is None or not json_equal(value, previous):
                    out.append((path, value))
        for key, child in value.items():
            _collect_candidates(child, path + (key,), snapshot_index, out)
    elif isinstance(value, list):
        for i, child in enumerate(value):
            _collect_candidates(child, path + (i,), snapshot_index, out)


def _set_at(root: dict, path: tuple, value) -> None:
    node = root
    for step in path[:-1]:
        node = node[step]
    node[path[-1]] = value


def run_extractors(entity: dict, registry: ExtractorRegistry, ctx: RunContext) -> dict:
    """Drive ``entity`` to a fixed point and return the processed copy.

    The input is never mutated. Each extractor runs at most once per
    entity (recorded in ``$extractors``); passes repeat until one finds
    no matching extractor. Appends a PassReport per pass to
    ``ctx.reports``, including the final empty pass.
    """
    if not isinstance(entity, dict) or UUIDS_KEY not in entity or EXTRACTORS_KEY not in entity:
        raise InvalidEntityError("run_extractors needs an entity with bookkeeping fields")
    if ctx.depth > MAX_DEPTH:
        raise DepthLimitError(f"entity nesting exceeded {MAX_DEPTH} levels")

    current = copy.deepcopy(entity)
    uuid = current[UUIDS_KEY][0] if current[UUIDS_KEY] else ""
    pass_index = 0
    while True:
        snapshot = copy.deepcopy(current)
        specs = registry.matching(snapshot)
        deltas = []
        for spec in specs:
            output = _execute(spec, copy.deepcopy(snapshot), ctx)
            deltas.append(compute_delta(snapshot, output, spec.id))

        nonempty = [d for d in deltas if d.changes]
        merged = aggregate(snapshot, _combine_deltas(nonempty)) if nonempty else snapshot
        merged[EXTRACTORS_KEY] = _union_ids(
            merged.get(EXTRACTORS_KEY, []), [spec.id for spec in specs]
        )

        snapshot_index: dict = {}
        _index_subentities(snapshot, snapshot_index, skip=snapshot)
        candidates: list = []
        _collect_candidates(merged, (), snapshot_index, candidates)
        candidates.sort(key=lambda item: -len(item[0]))  # deepest first, stable
        for path, node in candidates:
            _set_at(merged, path, run_extractors(node, registry, ctx.child()))

        ctx.reports.append(
            PassReport(
                pass_index=pass_index,
                entity_uuid=uuid,
                extractors_executed=tuple(spec.id for spec in specs),
                entity_modified=bool(nonempty),
                subentities_recursed=len(candidates),
            )
        )
        current = merged
        if not specs:
            return current
        pass_index += 1
        if pass_index > len(registry) + 1:
            raise ArchrecoError("engine pass bound exceeded; run-once accounting broke")


def create_model_entity(
    type_tag: str,
    initial_fields: dict | None,
    registry: ExtractorRegistry,
    ctx: RunContext,
) -> dict:
    """Create a new entity and run all matching extractors to completion."""
    entity = new_entity(type_tag, initial_fields, id_source=ctx.ids)
    return run_extractors(entity, registry, ctx)
