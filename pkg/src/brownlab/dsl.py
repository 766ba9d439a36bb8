"""JSON operator DSL.

A document is one operator node; every node is an object with an ``"op"``
key. Subspace arguments are objects with a ``"kind"`` key, interpreted
relative to the domain of the operator they restrict or compress. Errors
carry a JSON location such as ``$.parts[1].V``. See ``docs/formats.md``.
"""

from __future__ import annotations

import json
import math
from typing import Any, Callable

from .basis import BasisLabel
from .families import FAMILY_NAMES, family_operator, js01_shift
from .operators import (
    InvarianceError,
    Operator,
    SpaceMismatch,
    add_scale,
    adjoint,
    block_upper,
    compose,
    compress,
    diagonal,
    even_odd_E,
    even_odd_V,
    identity,
    index_map,
    matrix,
    oplus,
    power,
    restrict,
    shift,
    weighted_shift,
    zero,
)
from .spaces import Space, Subspace, SumSpace, component, finite_subspace


class DSLError(ValueError):
    """Malformed DSL input; ``location`` is a JSON path into the document."""

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.message = message
        self.location = location


def _need(node: dict, key: str, loc: str):
    if key not in node:
        raise DSLError(f"missing key {key!r}", loc)
    return node[key]


def parse_complex(x: Any, loc: str = "$") -> complex:
    """A number, ``[re, im]`` or ``{"re": .., "im": ..}``."""
    if isinstance(x, bool):
        raise DSLError("expected a number, got a boolean", loc)
    if isinstance(x, (int, float)):
        z = complex(x)
    elif isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        z = complex(x[0], x[1])
    elif isinstance(x, dict) and set(x) <= {"re", "im"} and x:
        z = complex(parse_real(x.get("re", 0.0), loc + ".re"), parse_real(x.get("im", 0.0), loc + ".im"))
    else:
        raise DSLError(f"expected a complex number, got {x!r}", loc)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DSLError("non-finite number", loc)
    return z


def parse_real(x: Any, loc: str = "$") -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise DSLError(f"expected a real number, got {x!r}", loc)
    if not math.isfinite(x):
        raise DSLError("non-finite number", loc)
    return float(x)


def parse_int(x: Any, loc: str = "$", minimum: int | None = None) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise DSLError(f"expected an integer, got {x!r}", loc)
    if minimum is not None and x < minimum:
        raise DSLError(f"expected an integer >= {minimum}, got {x}", loc)
    return x


def _sequence(node: dict, loc: str, key: str, *, real: bool) -> tuple[Callable[[int], complex], float]:
    """``node[key]`` (a list) followed by ``node["tail"]`` forever; returns entries and sup."""
    vals = _need(node, key, loc)
    if not isinstance(vals, list):
        raise DSLError(f"{key!r} must be a list", loc)
    conv = parse_real if real else parse_complex
    head = [conv(v, f"{loc}.{key}[{i}]") for i, v in enumerate(vals)]
    if "tail" in node:
        tail = conv(node["tail"], loc + ".tail")
    elif head:
        tail = head[-1]
    else:
        raise DSLError(f"empty {key!r} needs a 'tail'", loc)
    sup = max([abs(v) for v in head] + [abs(tail)])
    return (lambda k: head[k] if k < len(head) else tail), sup


def _tag(x: Any, loc: str):
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise DSLError(f"summand tags are strings or integers, got {x!r}", loc)
    return x


def _parity(node: dict, loc: str) -> Callable[[BasisLabel], bool] | None:
    p = node.get("parity")
    if p is None:
        return None
    if p == "even":
        return lambda lab: lab.index % 2 == 0
    if p == "odd":
        return lambda lab: lab.index % 2 == 1
    raise DSLError(f"parity must be 'even' or 'odd', got {p!r}", loc + ".parity")


def parse_label(x: Any, loc: str) -> BasisLabel:
    if not isinstance(x, dict):
        raise DSLError("a label is {'path': [...], 'index': k}", loc)
    path = x.get("path", [])
    if not isinstance(path, list):
        raise DSLError("'path' must be a list", loc + ".path")
    return BasisLabel(tuple(_tag(t, f"{loc}.path[{i}]") for i, t in enumerate(path)), parse_int(_need(x, "index", loc), loc + ".index", 0))


def parse_subspace(node: Any, parent: Space, loc: str = "$") -> Subspace:
    if not isinstance(node, dict):
        raise DSLError("a subspace is an object with a 'kind'", loc)
    kind = _need(node, "kind", loc)
    if kind == "component":
        if not isinstance(parent, SumSpace):
            raise DSLError("'component' needs an orthogonal-sum space", loc)
        tag = _tag(_need(node, "tag", loc), loc + ".tag")
        if tag not in parent.tags:
            raise DSLError(f"no summand tagged {tag!r}; tags are {list(parent.tags)}", loc + ".tag")
        return component(parent, tag, _parity(node, loc))
    if kind == "parity":
        keep = _parity(node, loc)
        if keep is None:
            raise DSLError("missing key 'parity'", loc)
        return Subspace(parent, keep, name=str(node["parity"]))
    if kind == "union":
        parts = _need(node, "parts", loc)
        if not isinstance(parts, list) or not parts:
            raise DSLError("'parts' must be a nonempty list", loc + ".parts")
        subs = [parse_subspace(p, parent, f"{loc}.parts[{i}]") for i, p in enumerate(parts)]
        return Subspace(parent, lambda lab: any(s.contains(lab) for s in subs), name="union")
    if kind == "first":
        n = parse_int(_need(node, "n", loc), loc + ".n", 1)
        return finite_subspace(parent, parent.labels(n), name=f"first{n}")
    if kind == "labels":
        labs = _need(node, "labels", loc)
        if not isinstance(labs, list) or not labs:
            raise DSLError("'labels' must be a nonempty list", loc + ".labels")
        parsed = [parse_label(x, f"{loc}.labels[{i}]") for i, x in enumerate(labs)]
        try:
            return finite_subspace(parent, parsed)
        except ValueError as exc:
            raise DSLError(str(exc), loc + ".labels") from None
    raise DSLError(f"unknown subspace kind {kind!r}", loc + ".kind")


def _operand(node: dict, key: str, loc: str) -> Operator:
    return parse_operator(_need(node, key, loc), f"{loc}.{key}")


def _operand_list(node: dict, key: str, loc: str) -> list[Operator]:
    items = _need(node, key, loc)
    if not isinstance(items, list) or not items:
        raise DSLError(f"{key!r} must be a nonempty list", f"{loc}.{key}")
    return [parse_operator(x, f"{loc}.{key}[{i}]") for i, x in enumerate(items)]


def _build(node: dict, loc: str) -> Operator:
    op = _need(node, "op", loc)
    if op == "identity":
        return identity()
    if op == "zero":
        return zero()
    if op == "shift":
        return shift()
    if op == "weighted_shift":
        if "lambda" in node:
            lam = parse_real(node["lambda"], loc + ".lambda")
            if lam <= 1:
                raise DSLError("lambda must be > 1", loc + ".lambda")
            return js01_shift(lam)
        w, sup = _sequence(node, loc, "weights", real=True)
        return weighted_shift(w, sup=sup)
    if op == "diagonal":
        d, sup = _sequence(node, loc, "entries", real=False)
        return diagonal(d, sup=sup)
    if op == "even_odd_V":
        return even_odd_V()
    if op == "even_odd_E":
        return even_odd_E()
    if op == "index_map":
        mult = parse_int(_need(node, "mult", loc), loc + ".mult", 1)
        off = parse_int(node.get("offset", 0), loc + ".offset", 0)
        return index_map(mult, off)
    if op == "block_upper":
        v, e, u = (_operand(node, k, loc) for k in ("V", "E", "U"))
        s = parse_real(node.get("s", 1.0), loc + ".s")
        return block_upper(v, e, u, s)
    if op == "oplus":
        parts = _operand_list(node, "parts", loc)
        tags = node.get("tags")
        if tags is not None:
            if not isinstance(tags, list) or len(tags) != len(parts):
                raise DSLError("'tags' must list one tag per part", loc + ".tags")
            tags = [_tag(t, f"{loc}.tags[{i}]") for i, t in enumerate(tags)]
        return oplus(parts, tags)
    if op == "compose":
        return compose(*_operand_list(node, "factors", loc))
    if op == "adjoint":
        return adjoint(_operand(node, "of", loc))
    if op == "add_scale":
        a = parse_complex(node.get("a", 1.0), loc + ".a")
        b = parse_complex(node.get("b", 1.0), loc + ".b")
        return add_scale(a, _operand(node, "A", loc), b, _operand(node, "B", loc))
    if op in ("restrict", "compress"):
        base = _operand(node, "of", loc)
        sub = parse_subspace(_need(node, "subspace", loc), base.domain, loc + ".subspace")
        return restrict(base, sub) if op == "restrict" else compress(base, sub)
    if op == "matrix":
        rows = _need(node, "rows", loc)
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise DSLError("'rows' must be a nonempty list of lists", loc + ".rows")
        if len({len(r) for r in rows}) != 1 or len(rows[0]) != len(rows):
            raise DSLError("'rows' must form a square matrix", loc + ".rows")
        return matrix([[parse_complex(x, f"{loc}.rows[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(rows)])
    if op == "power":
        return power(_operand(node, "of", loc), parse_int(_need(node, "n", loc), loc + ".n", 0))
    if op == "family":
        name = _need(node, "name", loc)
        if name not in FAMILY_NAMES:
            raise DSLError(f"unknown family {name!r}; known: {list(FAMILY_NAMES)}", loc + ".name")
        params = node.get("params", {})
        if not isinstance(params, dict):
            raise DSLError("'params' must be an object", loc + ".params")
        try:
            return family_operator(name, params)[0]
        except (KeyError, TypeError, ValueError) as exc:
            raise DSLError(str(exc), loc + ".params") from None
    raise DSLError(f"unknown op {op!r}", loc + ".op")


def parse_operator(node: Any, loc: str = "$") -> Operator:
    """Build the operator described by a parsed JSON node."""
    if not isinstance(node, dict):
        raise DSLError("an operator node is an object with an 'op'", loc)
    try:
        return _build(node, loc)
    except DSLError:
        raise
    except (InvarianceError, SpaceMismatch) as exc:
        raise DSLError(str(exc), loc) from None
    except ValueError as exc:
        raise DSLError(str(exc), loc) from None


def loads(text: str) -> Operator:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DSLError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    return parse_operator(doc)


def load(path: str) -> tuple[Operator, Any]:
    """Operator and raw document from a DSL file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DSLError(f"cannot read {path}: {exc.strerror}") from None
    op = loads(text)
    return op, json.loads(text)
