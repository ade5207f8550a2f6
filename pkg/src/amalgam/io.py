"""JSON reading and writing of structures.

The on-disk layout::

    {"signature": {"relations": {"le": 2}, "functions": {}, "constants": []},
     "elements": ["a", "b"],
     "relations": {"le": [["a", "a"], ["a", "b"], ["b", "b"]]},
     "functions": {},
     "constants": {}}

Function rows list the arguments followed by the value.  Serialization is
canonical (sorted keys, sorted tuples) so byte comparison of two dumps is a
meaningful equality test.
"""
import json

from .errors import DuplicateTuple, StructureError
from .structures import Signature, Structure, validate_structure


def signature_from_json(obj):
    obj = obj or {}
    return Signature(
        dict(obj.get("relations", {})),
        dict(obj.get("functions", {})),
        frozenset(obj.get("constants", [])),
    )


def structure_from_json(obj):
    if not isinstance(obj, dict):
        raise StructureError("structure JSON must be an object")
    sig = signature_from_json(obj.get("signature"))
    elements = obj.get("elements", [])
    if len(set(elements)) != len(elements):
        raise StructureError("duplicate element names")

    rels = {}
    for name, rows in (obj.get("relations") or {}).items():
        tuples = [tuple(r) for r in rows]
        if len(set(tuples)) != len(tuples):
            dup = next(t for t in tuples if tuples.count(t) > 1)
            raise DuplicateTuple(f"{name}: tuple {list(dup)} listed twice")
        rels[name] = frozenset(tuples)

    funs = {}
    for name, rows in (obj.get("functions") or {}).items():
        tab = {}
        for row in rows:
            if len(row) < 1:
                raise StructureError(f"{name}: empty function row")
            args, value = tuple(row[:-1]), row[-1]
            if args in tab:
                raise DuplicateTuple(f"{name}: arguments {list(args)} listed twice")
            tab[args] = value
        funs[name] = tab

    notes = {k: obj[k] for k in ("method", "origin") if k in obj}
    raw = Structure(sig, tuple(elements), rels, funs, dict(obj.get("constants") or {}), notes)
    return validate_structure(raw)


def structure_to_json(s):
    out = {
        "signature": s.signature.to_json(),
        "elements": list(s.elements),
        "relations": {r: [list(t) for t in sorted(s.rel(r))] for r in s.signature.relations},
        "functions": {f: [list(k) + [v] for k, v in sorted(s.fn(f).items())]
                      for f in s.signature.functions},
        "constants": dict(sorted(s.constants.items())),
    }
    for k in ("method", "origin"):
        if k in s.annotations:
            out[k] = s.annotations[k]
    return out


def parse_structure(text):
    return structure_from_json(json.loads(text))


def dump_structure(s):
    return dump_json(structure_to_json(s))


def load_structure(path):
    with open(path, encoding="utf-8") as fh:
        return parse_structure(fh.read())


def save_structure(s, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_structure(s))


def dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"


def triple_to_json(t):
    return {"a": structure_to_json(t.a), "b": structure_to_json(t.b),
            "c": structure_to_json(t.c)}


def load_triple(path):
    """A file holding ``{"a": ..., "b": ..., "c": ...}``; validated as a triple."""
    from .structures import validate_tba

    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    try:
        parts = [structure_from_json(obj[k]) for k in ("a", "b", "c")]
    except (KeyError, TypeError) as exc:
        raise StructureError(f"{path}: a triple file needs keys a, b and c") from exc
    return validate_tba(*parts)


def save_triple(t, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(triple_to_json(t)))
