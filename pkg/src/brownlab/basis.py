"""Labels for a countable orthonormal basis and finitely supported vectors.

Inner products are linear in the **second** argument and conjugate-linear
in the first::

    inner(u, v) = sum(conj(u[l]) * v[l] for l in common support)
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, NamedTuple, Union

Tag = Union[int, str]

#: amplitudes below this fraction of the largest modulus are dropped
PRUNE_RELATIVE = 1e-15


class BasisLabel(NamedTuple):
    """Position of one basis vector: component path plus leaf index."""

    path: tuple
    index: int

    def prefixed(self, *tags: Tag) -> "BasisLabel":
        return BasisLabel(tuple(tags) + self.path, self.index)

    def strip(self, n: int = 1) -> "BasisLabel":
        return BasisLabel(self.path[n:], self.index)

    def sort_key(self) -> tuple:
        # str and int tags can share a position across sibling components
        return (tuple((isinstance(t, str), t) for t in self.path), self.index)

    def __str__(self) -> str:
        if not self.path:
            return f"e{self.index}"
        return "e[" + ",".join(map(str, self.path)) + f";{self.index}]"


def label(index: int, *path: Tag) -> BasisLabel:
    """Shorthand: ``label(3, "2")`` is the label ``("2",), 3``."""
    return BasisLabel(tuple(path), int(index))


class SparseVector:
    """Immutable finite map ``BasisLabel -> complex``."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[BasisLabel, complex] | None = None, *, prune: bool = True):
        data = {k: complex(v) for k, v in (entries or {}).items()}
        if prune and data:
            data = _pruned(data)
        self._entries = data

    @classmethod
    def _raw(cls, data: dict) -> "SparseVector":
        obj = cls.__new__(cls)
        obj._entries = data
        return obj

    @classmethod
    def basis(cls, lab: BasisLabel, coeff: complex = 1.0) -> "SparseVector":
        if coeff == 0:
            return cls._raw({})
        return cls._raw({lab: complex(coeff)})

    @classmethod
    def zero(cls) -> "SparseVector":
        return cls._raw({})

    @classmethod
    def combine(cls, terms: Iterable[tuple[complex, "SparseVector"]]) -> "SparseVector":
        """Linear combination ``sum(c * v)`` followed by pruning."""
        acc: dict = {}
        for c, v in terms:
            if c == 0:
                continue
            for k, a in v._entries.items():
                acc[k] = acc.get(k, 0j) + c * a
        return cls._raw(_pruned(acc)) if acc else cls._raw({})

    # -- mapping protocol -------------------------------------------------
    def __getitem__(self, lab: BasisLabel) -> complex:
        return self._entries.get(lab, 0j)

    def __iter__(self):
        return iter(self.support())

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def items(self):
        return self._entries.items()

    def support(self) -> list[BasisLabel]:
        return sorted(self._entries, key=BasisLabel.sort_key)

    # -- algebra ----------------------------------------------------------
    def __add__(self, other: "SparseVector") -> "SparseVector":
        return SparseVector.combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return SparseVector.combine([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "SparseVector":
        return SparseVector._raw({k: -a for k, a in self._entries.items()})

    def __mul__(self, c: complex) -> "SparseVector":
        if c == 0:
            return SparseVector._raw({})
        return SparseVector._raw({k: c * a for k, a in self._entries.items()})

    __rmul__ = __mul__

    def __truediv__(self, c: complex) -> "SparseVector":
        return self * (1.0 / c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self):
        return hash(frozenset(self._entries.items()))

    def norm_sq(self) -> float:
        return math.fsum(a.real * a.real + a.imag * a.imag for a in self._entries.values())

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def abs_sum(self) -> float:
        return math.fsum(abs(a) for a in self._entries.values())

    def max_abs(self) -> float:
        return max((abs(a) for a in self._entries.values()), default=0.0)

    def conj(self) -> "SparseVector":
        return SparseVector._raw({k: a.conjugate() for k, a in self._entries.items()})

    def map_labels(self, f) -> "SparseVector":
        """Relabel through an injective map ``f``."""
        return SparseVector._raw({f(k): a for k, a in self._entries.items()})

    def restrict_to(self, keep) -> "SparseVector":
        """Keep the entries whose label satisfies ``keep``."""
        return SparseVector._raw({k: a for k, a in self._entries.items() if keep(k)})

    def __repr__(self) -> str:
        body = ", ".join(f"{lab}: {_fmt(a)}" for lab, a in sorted(self._entries.items(), key=lambda kv: kv[0].sort_key()))
        return f"SparseVector({{{body}}})"

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "entries": [
                {"path": list(k.path), "index": k.index, "re": a.real, "im": a.imag}
                for k, a in sorted(self._entries.items(), key=lambda kv: kv[0].sort_key())
            ]
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "SparseVector":
        acc: dict = {}
        for item in doc["entries"]:
            lab = BasisLabel(tuple(item.get("path", ())), int(item["index"]))
            acc[lab] = acc.get(lab, 0j) + complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        return cls(acc)


def _fmt(a: complex) -> str:
    return f"{a.real:g}" if a.imag == 0 else f"{a:g}"


def _pruned(data: dict) -> dict:
    peak = max(abs(a) for a in data.values())
    if peak == 0:
        return {}
    cut = PRUNE_RELATIVE * peak
    return {k: a for k, a in data.items() if abs(a) >= cut}


def basis_vector(index: int, *path: Tag) -> SparseVector:
    return SparseVector.basis(label(index, *path))


def inner(u: SparseVector, v: SparseVector) -> complex:
    """``<u, v>``, conjugate-linear in ``u`` and linear in ``v``."""
    a, b = (u, v) if len(u) <= len(v) else (v, u)
    total = 0j
    if a is u:
        for k, x in a.items():
            y = b._entries.get(k)
            if y is not None:
                total += x.conjugate() * y
    else:
        for k, y in a.items():
            x = b._entries.get(k)
            if x is not None:
                total += x.conjugate() * y
    return total


def gram_schmidt(vs: Iterable[SparseVector], tol: float = 1e-10) -> list[SparseVector]:
    """Orthonormalize ``vs`` in order, dropping numerically dependent vectors.

    Each candidate is projected twice against the accepted list (classical
    Gram-Schmidt with one reorthogonalization pass). A candidate whose
    residual norm is ``<= tol`` is discarded, so the result length is the
    detected rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    basis: list[SparseVector] = []
    for v in vs:
        w = v
        for _ in range(2):
            coeffs = [(-inner(q, w), q) for q in basis]
            w = SparseVector.combine([(1.0, w), *coeffs])
        nrm = w.norm()
        if nrm <= tol:
            continue
        basis.append(w / nrm)
    return basis
