"""Property tests for the aggregation laws, cross-checked against the
brute-force oracle in oracle.py."""

import copy

from hypothesis import given, settings
from hypothesis import strategies as st

from archreco import ConflictError, aggregate, compatible
from oracle import OracleConflict, brute_merge, canonical

_SETTINGS = dict(max_examples=1000, deadline=None)

# Small alphabets on purpose: key collisions and equal scalars must be
# frequent so merges, unions and conflicts all get exercised.
_KEYS = st.text(alphabet="abcd", min_size=1, max_size=2)
_SCALARS = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=-3, max_value=3),
    st.sampled_from([0.5, 1.0, 2.0]),
    st.text(alphabet="xyz", max_size=2),
)
_JSON = st.recursive(
    _SCALARS,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(_KEYS, children, max_size=4),
    ),
    max_leaves=12,
)
_DICT_TREES = st.recursive(
    st.dictionaries(_KEYS, _SCALARS, max_size=4),
    lambda children: st.dictionaries(_KEYS, st.one_of(_SCALARS, children), max_size=4),
    max_leaves=10,
)


def _scalars_equal(a, b):
    if isinstance(a, bool) != isinstance(b, bool):
        return False
    return a == b


def _subsumes(big, small):
    """True when ``big`` contains everything in ``small``: supersets of
    keys, matching scalar leaves, and for arrays a subsuming item per
    input item (array growth counts, loss does not)."""
    if isinstance(small, dict):
        return isinstance(big, dict) and all(
            key in big and _subsumes(big[key], value) for key, value in small.items()
        )
    if isinstance(small, list):
        return isinstance(big, list) and all(
            any(_subsumes(item, wanted) for item in big) for wanted in small
        )
    return not isinstance(big, (dict, list)) and _scalars_equal(big, small)


@st.composite
def _restricted_pairs(draw):
    """Pairs whose array items have at most one compatible partner.

    Array items are objects keyed by an ``id`` field: items with equal
    ids share equal common fields (drawn once) plus side-private keys,
    items with different ids disagree on ``id`` and therefore never pair.
    """
    ids = [f"id{i}" for i in range(draw(st.integers(min_value=1, max_value=4)))]
    common_fields = {item_id: draw(st.dictionaries(_KEYS, _SCALARS, max_size=3)) for item_id in ids}
    sides = []
    for suffix in ("left", "right"):
        items = []
        for item_id in draw(st.lists(st.sampled_from(ids), unique=True, max_size=len(ids))):
            item = {"id": item_id}
            for key, value in common_fields[item_id].items():
                if draw(st.booleans()):
                    item[key] = value
            if draw(st.booleans()):
                item[f"only_{suffix}"] = draw(_SCALARS)
            items.append(item)
        side = {"services": items}
        if draw(st.booleans()):
            side[f"meta_{suffix}"] = draw(_SCALARS)
        sides.append(side)
    return sides[0], sides[1]


def _extend_conflict_free(draw, value):
    """A value that agrees with ``value`` everywhere they overlap: kept
    keys carry equal values, arrays are copied verbatim, and additions
    use the distinct ``zq*`` key space."""
    if isinstance(value, dict):
        out = {}
        for key, child in value.items():
            if draw(st.booleans()):
                out[key] = _extend_conflict_free(draw, child)
        if draw(st.booleans()):
            out[f"zq{draw(st.integers(min_value=0, max_value=3))}"] = draw(_SCALARS)
        return out
    return copy.deepcopy(value)


@st.composite
def _conflict_free_pairs(draw):
    a = draw(_JSON)
    return a, _extend_conflict_free(draw, a)


@given(pair=_restricted_pairs())
@settings(**_SETTINGS)
def test_idempotence_on_entity_shaped_values(pair):
    for side in pair:
        assert canonical(aggregate(side, side)) == canonical(side)


@given(value=_DICT_TREES)
@settings(**_SETTINGS)
def test_idempotence_on_object_trees(value):
    assert aggregate(value, value) == value


@given(pair=_conflict_free_pairs())
@settings(**_SETTINGS)
def test_monotone_growth(pair):
    a, b = pair
    merged = aggregate(a, b)  # must not raise: b only repeats or extends a
    assert _subsumes(merged, a)
    assert _subsumes(merged, b)


@given(a=_JSON, b=_JSON)
@settings(**_SETTINGS)
def test_failure_symmetry(a, b):
    def raises(x, y):
        try:
            aggregate(x, y)
            return False
        except ConflictError:
            return True

    assert raises(a, b) == raises(b, a)


@given(pair=_restricted_pairs())
@settings(**_SETTINGS)
def test_restricted_commutativity(pair):
    a, b = pair
    assert canonical(aggregate(a, b)) == canonical(aggregate(b, a))


@given(a=_JSON, b=_JSON)
@settings(**_SETTINGS)
def test_compatible_predicts_aggregate(a, b):
    try:
        aggregate(a, b)
        succeeded = True
    except ConflictError:
        succeeded = False
    assert compatible(a, b) == succeeded


@given(a=_JSON, b=_JSON)
@settings(**_SETTINGS)
def test_agrees_with_brute_force_oracle(a, b):
    try:
        expected = brute_merge(a, b)
    except OracleConflict as conflict:
        try:
            aggregate(a, b)
        except ConflictError as error:
            assert error.path == conflict.path
        else:
            raise AssertionError(f"oracle conflicts at {conflict.path}, aggregate succeeded")
    else:
        assert canonical(aggregate(a, b)) == canonical(expected)
