"""Feature structures and unification.

A value is an atom (string), an attribute map, or a set.  Sets behave as
unordered bags that deduplicate by structural equality when compared, and
two sets unify by union.  Unification of attribute maps is the usual
least upper bound: recursive merge, failing on atom clashes and on
atom versus map or set clashes.

The module keeps two representations.  :class:`FeatureStructure` is the
immutable public value with structural equality.  Internally, mutable
nodes with union-find links support cheap destructive merging while the
parsing engine solves the equations of one reading.
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping


class FeatureCycleError(ValueError):
    """A solution became cyclic (for example via ``^ X = ^``)."""


_UNSET, _ATOM, _COMPLEX, _SET = range(4)


class _Node:
    __slots__ = ("link", "kind", "atom", "attrs", "members")

    def __init__(self) -> None:
        self.link: _Node | None = None
        self.kind = _UNSET
        self.atom: str | None = None
        self.attrs: dict[str, _Node] | None = None
        self.members: list[_Node] | None = None


def _find(node: _Node) -> _Node:
    while node.link is not None:
        if node.link.link is not None:
            node.link = node.link.link
        node = node.link
    return node


def _unify_nodes(a: _Node, b: _Node) -> bool:
    a, b = _find(a), _find(b)
    if a is b:
        return True
    if a.kind == _UNSET:
        a.link = b
        return True
    if b.kind == _UNSET:
        b.link = a
        return True
    if a.kind != b.kind:
        return False
    if a.kind == _ATOM:
        if a.atom != b.atom:
            return False
        b.link = a
        return True
    if a.kind == _SET:
        a.members.extend(b.members)  # type: ignore[union-attr]
        b.link = a
        return True
    # Attribute maps: link first so reentrant merges terminate, then fold
    # the absorbed node's attributes into the survivor.
    b.link = a
    assert a.attrs is not None and b.attrs is not None
    for key, value in b.attrs.items():
        existing = a.attrs.get(key)
        if existing is None:
            a.attrs[key] = value
        elif not _unify_nodes(existing, value):
            return False
    return True


def _resolve_create(node: _Node, attrs: tuple[str, ...]) -> _Node | None:
    """Walk a path, creating structure; None when blocked by an atom or set."""
    for attr in attrs:
        node = _find(node)
        if node.kind == _UNSET:
            node.kind = _COMPLEX
            node.attrs = {}
        if node.kind != _COMPLEX:
            return None
        child = node.attrs.get(attr)  # type: ignore[union-attr]
        if child is None:
            child = _Node()
            node.attrs[attr] = child  # type: ignore[index]
        node = child
    return _find(node)


def _resolve_peek(node: _Node, attrs: tuple[str, ...]) -> _Node | None:
    """Walk a path without creating; None when any step is missing."""
    for attr in attrs:
        node = _find(node)
        if node.kind != _COMPLEX:
            return None
        child = node.attrs.get(attr)  # type: ignore[union-attr]
        if child is None:
            return None
        node = child
    return _find(node)


def _make_set(node: _Node) -> _Node | None:
    node = _find(node)
    if node.kind == _UNSET:
        node.kind = _SET
        node.members = []
    if node.kind != _SET:
        return None
    return node


Canon = Any  # nested tuples; see _canon


def _canon(node: _Node, on_stack: set[int]) -> Canon:
    node = _find(node)
    key = id(node)
    if key in on_stack:
        raise FeatureCycleError("cyclic feature structure")
    if node.kind == _ATOM:
        return ("atom", node.atom)
    if node.kind == _UNSET:
        return ("avm", ())
    on_stack.add(key)
    try:
        if node.kind == _SET:
            members = sorted({_canon(m, on_stack) for m in node.members})  # type: ignore[union-attr]
            return ("set", tuple(members))
        pairs = sorted((attr, _canon(child, on_stack)) for attr, child in node.attrs.items())  # type: ignore[union-attr]
        return ("avm", tuple(pairs))
    finally:
        on_stack.discard(key)


def _node_from_canon(canon: Canon) -> _Node:
    node = _Node()
    tag, payload = canon
    if tag == "atom":
        node.kind = _ATOM
        node.atom = payload
    elif tag == "set":
        node.kind = _SET
        node.members = [_node_from_canon(m) for m in payload]
    else:
        node.kind = _COMPLEX
        node.attrs = {attr: _node_from_canon(child) for attr, child in payload}
    return node


def _canon_from_value(value: Any) -> Canon:
    if isinstance(value, FeatureStructure):
        return value._canon
    if isinstance(value, str):
        return ("atom", value)
    if isinstance(value, Mapping):
        return ("avm", tuple(sorted((str(k), _canon_from_value(v)) for k, v in value.items())))
    if isinstance(value, Iterable):
        return ("set", tuple(sorted({_canon_from_value(v) for v in value})))
    raise TypeError(f"cannot build a feature structure from {value!r}")


def _value_from_canon(canon: Canon) -> Any:
    tag, payload = canon
    if tag == "atom":
        return payload
    if tag == "set":
        return [_value_from_canon(m) for m in payload]
    return {attr: _value_from_canon(child) for attr, child in payload}


class FeatureStructure:
    """Immutable feature structure with structural equality."""

    __slots__ = ("_canon",)

    def __init__(self, value: Any = None) -> None:
        if value is None:
            object.__setattr__(self, "_canon", ("avm", ()))
        else:
            object.__setattr__(self, "_canon", _canon_from_value(value))

    @classmethod
    def from_value(cls, value: Any) -> FeatureStructure:
        """Build from a string atom, a mapping, or an iterable (set value)."""
        fs = cls.__new__(cls)
        object.__setattr__(fs, "_canon", _canon_from_value(value))
        return fs

    @classmethod
    def _from_node(cls, node: _Node) -> FeatureStructure:
        fs = cls.__new__(cls)
        object.__setattr__(fs, "_canon", _canon(node, set()))
        return fs

    def _to_node(self) -> _Node:
        return _node_from_canon(self._canon)

    def to_value(self) -> Any:
        """Plain data form: str, dict with sorted keys, or list (set value)."""
        return _value_from_canon(self._canon)

    def __setattr__(self, name: str, value: Any) -> None:
        raise AttributeError("FeatureStructure is immutable")

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FeatureStructure):
            return self._canon == other._canon
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._canon)

    def __lt__(self, other: FeatureStructure) -> bool:
        return self._canon < other._canon

    def __repr__(self) -> str:
        return f"FeatureStructure({self.to_value()!r})"


def unify(a: FeatureStructure, b: FeatureStructure) -> FeatureStructure | None:
    """Least upper bound of two feature structures, or None on clash."""
    left = a._to_node()
    if not _unify_nodes(left, b._to_node()):
        return None
    return FeatureStructure._from_node(left)
