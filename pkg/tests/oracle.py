"""Brute-force recursive merge oracle.

Written before (and kept independent of) archreco.aggregate: it re-derives
the union rules naively, using throwaway trial merges instead of a
compatibility predicate, so the two implementations can check each other.
"""

from __future__ import annotations

import copy

BOOKKEEPING = ("$uuids", "$extractors")


class OracleConflict(Exception):
    def __init__(self, path):
        self.path = path
        super().__init__(path)


def _escape(token):
    return str(token).replace("~", "~0").replace("/", "~1")


def _scalars_equal(a, b):
    # bool is not a number, 1 == 1.0 by mathematical value
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


def brute_merge(a, b, path=""):
    a_is_dict, b_is_dict = isinstance(a, dict), isinstance(b, dict)
    a_is_list, b_is_list = isinstance(a, list), isinstance(b, list)
    if a_is_dict and b_is_dict:
        out = {}
        for key in list(a) + [k for k in b if k not in a]:
            if key in a and key in b:
                if key in BOOKKEEPING and isinstance(a[key], list) and isinstance(b[key], list):
                    out[key] = list(a[key]) + [x for x in b[key] if x not in a[key]]
                else:
                    out[key] = brute_merge(a[key], b[key], path + "/" + _escape(key))
            elif key in a:
                out[key] = copy.deepcopy(a[key])
            else:
                out[key] = copy.deepcopy(b[key])
        return out
    if a_is_list and b_is_list:
        out = [copy.deepcopy(item) for item in a]
        for item in b:
            for i, existing in enumerate(out):
                try:
                    merged = brute_merge(existing, item, path)
                except OracleConflict:
                    continue
                out[i] = merged
                break
            else:
                out.append(copy.deepcopy(item))
        return out
    if a_is_dict or b_is_dict or a_is_list or b_is_list:
        raise OracleConflict(path)
    if not _scalars_equal(a, b):
        raise OracleConflict(path)
    return copy.deepcopy(a)


def canonical(value):
    """Order-insensitive canonical form: arrays sorted by their JSON dump."""
    import json

    if isinstance(value, dict):
        return {k: canonical(v) for k, v in sorted(value.items())}
    if isinstance(value, list):
        items = [canonical(v) for v in value]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    return value
