"""Recursive union of JSON values with explicit conflicts.

The merge never resolves a disagreement silently: fields are only ever
added, never removed or modified, and two incompatible writes raise
:class:`~archreco.errors.ConflictError` naming the deepest conflicting
location. Arrays union by compatibility, so primitives act as implicit
keys (one copy of each unique value; objects with matching scalar fields
merge, distinct ones coexist).

Known hazard: ``{}`` is compatible with everything and will merge into the
first entry of any object array. The ``strict`` option additionally
requires paired objects to share at least one equal primitive user field.
"""

from __future__ import annotations

import copy
from typing import Any, Iterable, Sequence

from .errors import ConflictError, VersionError
from .model import BOOKKEEPING_KEYS, ModelFile, escape_token, is_internal_key

Json = Any


def _is_container(value) -> bool:
    return isinstance(value, (dict, list))


def _scalars_equal(a, b) -> bool:
    # bool is not a number; 1 and 1.0 are the same mathematical value
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


def _union_list(a: list, b: list) -> list:
    out = list(a)
    for item in b:
        if item not in out:
            out.append(item)
    return out


def _is_bookkeeping_pair(key, a, b) -> bool:
    return key in BOOKKEEPING_KEYS and isinstance(a, list) and isinstance(b, list)


def aggregate(
    a: Json,
    b: Json,
    *,
    strict: bool = False,
    left_origin: str | None = None,
    right_origin: str | None = None,
) -> Json:
    """Merge two JSON values, raising ConflictError on incompatibility.

    Equal primitives collapse, objects union recursively, arrays union by
    compatibility (:func:`merge_arrays`). ``$uuids`` and ``$extractors``
    are set-unioned rather than compatibility-merged. The result shares no
    mutable structure with either input.
    """
    return _merge(a, b, "", strict, left_origin, right_origin)


def _merge(a, b, path, strict, left_origin, right_origin):
    if isinstance(a, dict) and isinstance(b, dict):
        out = {}
        for key, value in a.items():
            if key not in b:
                out[key] = copy.deepcopy(value)
            elif _is_bookkeeping_pair(key, value, b[key]):
                out[key] = _union_list(value, b[key])
            else:
                out[key] = _merge(
                    value, b[key], f"{path}/{escape_token(key)}", strict, left_origin, right_origin
                )
        for key, value in b.items():
            if key not in a:
                out[key] = copy.deepcopy(value)
        return out
    if isinstance(a, list) and isinstance(b, list):
        return merge_arrays(a, b, strict=strict)
    if not _is_container(a) and not _is_container(b) and _scalars_equal(a, b):
        return a
    raise ConflictError(path, a, b, left_origin, right_origin)


def merge_arrays(a: Sequence[Json], b: Sequence[Json], *, strict: bool = False) -> list[Json]:
    """Union two arrays.

    The result starts as a copy of ``a``; each item of ``b`` merges into
    the first compatible item already present, or is appended. Incompatible
    items coexist as separate entries; no error escapes.
    """
    out = [copy.deepcopy(item) for item in a]
    for item in b:
        for i, existing in enumerate(out):
            if compatible(existing, item, strict=strict):
                out[i] = _merge(existing, item, "", strict, None, None)
                break
        else:
            out.append(copy.deepcopy(item))
    return out


def compatible(a: Json, b: Json, *, strict: bool = False) -> bool:
    """True iff ``aggregate(a, b)`` would not raise, checked without
    building any merged output.

    With ``strict``, two objects must additionally share at least one equal
    primitive non-``$`` field; this is the pairing test :func:`merge_arrays`
    applies under strict aggregation.
    """
    if strict and isinstance(a, dict) and isinstance(b, dict):
        if not _shares_equal_primitive(a, b):
            return False
    return _compat(a, b)


def _shares_equal_primitive(a: dict, b: dict) -> bool:
    for key, value in a.items():
        if is_internal_key(key) or key not in b:
            continue
        other = b[key]
        if not _is_container(value) and not _is_container(other) and _scalars_equal(value, other):
            return True
    return False


def _compat(a, b) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        for key, value in a.items():
            if key not in b:
                continue
            if _is_bookkeeping_pair(key, value, b[key]):
                continue
            if not _compat(value, b[key]):
                return False
        return True
    if isinstance(a, list) and isinstance(b, list):
        return True
    return not _is_container(a) and not _is_container(b) and _scalars_equal(a, b)


def aggregate_models(
    models: Iterable[ModelFile],
    *,
    strict: bool = False,
    sources: Sequence[str] | None = None,
) -> ModelFile:
    """Left-fold :func:`aggregate` over the root entities of ``models``.

    All inputs must share a format version. ``sources`` (file names) are
    attached to any ConflictError for diagnosis.
    """
    models = list(models)
    if not models:
        raise ValueError("aggregate_models requires at least one model")
    versions = {m.format_version for m in models}
    if len(versions) > 1:
        raise VersionError(f"cannot aggregate mixed format versions: {sorted(versions)}")
    names = list(sources) if sources is not None else [f"model[{i}]" for i in range(len(models))]
    root = copy.deepcopy(models[0].root)
    for i in range(1, len(models)):
        left_name = names[0] if i == 1 else ",".join(names[:i])
        root = aggregate(
            root, models[i].root, strict=strict, left_origin=left_name, right_origin=names[i]
        )
    return ModelFile(root=root, format_version=models[0].format_version)
