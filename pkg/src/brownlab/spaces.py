"""Enumerated label sets: the Hilbert spaces and subspaces operators act on.

Every space fixes a deterministic order on its labels. ``label_at(k)`` is
the k-th label and ``position`` its inverse; ``size`` is ``None`` for
countably infinite spaces.
"""

from __future__ import annotations

import math
from itertools import count
from typing import Callable, Sequence

from .basis import BasisLabel, Tag


class Space:
    size: int | None = None

    def contains(self, lab: BasisLabel) -> bool:
        raise NotImplementedError

    def label_at(self, k: int) -> BasisLabel:
        raise NotImplementedError

    def position(self, lab: BasisLabel) -> int:
        raise NotImplementedError

    def labels(self, n: int) -> list[BasisLabel]:
        """The first ``n`` labels (fewer if the space is smaller)."""
        if self.size is not None:
            n = min(n, self.size)
        return [self.label_at(k) for k in range(n)]

    def __iter__(self):
        rng = range(self.size) if self.size is not None else count()
        for k in rng:
            yield self.label_at(k)

    def __contains__(self, lab) -> bool:
        return self.contains(lab)

    def _check_pos(self, k: int) -> None:
        if k < 0 or (self.size is not None and k >= self.size):
            raise IndexError(f"position {k} outside space of size {self.size}")


class LeafSpace(Space):
    """``{e_0, e_1, ...}`` under a fixed path, optionally truncated to ``size``."""

    def __init__(self, path: tuple = (), size: int | None = None):
        self.path = tuple(path)
        self.size = size

    def contains(self, lab):
        return lab.path == self.path and lab.index >= 0 and (self.size is None or lab.index < self.size)

    def label_at(self, k):
        self._check_pos(k)
        return BasisLabel(self.path, k)

    def position(self, lab):
        if not self.contains(lab):
            raise KeyError(lab)
        return lab.index

    def __eq__(self, other):
        return isinstance(other, LeafSpace) and (self.path, self.size) == (other.path, other.size)

    def __hash__(self):
        return hash(("leaf", self.path, self.size))

    def __repr__(self):
        return f"LeafSpace(path={self.path!r}, size={self.size})"


def _merge_position(which: int, m: int, sizes: Sequence[int | None]) -> int:
    """Global position of element ``m`` of part ``which`` in a round-robin merge."""
    # A round-robin merge visits part i at round r while r < size_i.
    pos = 0
    for i, s in enumerate(sizes):
        if i == which:
            continue
        # elements of part i emitted before (which, m)
        cap = m + 1 if i < which else m
        pos += cap if s is None else min(s, cap)
    return pos + m


def _merge_locate(k: int, sizes: Sequence[int | None]) -> tuple[int, int]:
    """Inverse of :func:`_merge_position`."""
    live = [i for i, s in enumerate(sizes) if s is None or s > 0]
    base = 0
    rnd = 0
    while True:
        # rounds until the next finite part is exhausted
        finite = [sizes[i] for i in live if sizes[i] is not None]
        stop = min(finite) if finite else None
        width = len(live)
        if width == 0:
            raise IndexError(k)
        span = None if stop is None else (stop - rnd) * width
        if span is None or k - base < span:
            off = k - base
            return live[off % width], rnd + off // width
        base += span
        rnd = stop
        live = [i for i in live if sizes[i] is None or sizes[i] > rnd]


class SumSpace(Space):
    """Orthogonal sum of finitely many spaces, labels prefixed by ``tags``.

    Enumeration is round-robin over the summands, so every summand is reached
    within the first few positions.
    """

    def __init__(self, parts: Sequence[Space], tags: Sequence[Tag] | None = None):
        if not parts:
            raise ValueError("SumSpace needs at least one summand")
        self.parts = tuple(parts)
        self.tags = tuple(tags) if tags is not None else tuple(range(len(parts)))
        if len(self.tags) != len(self.parts) or len(set(self.tags)) != len(self.tags):
            raise ValueError("tags must be distinct, one per summand")
        self._tag_index = {t: i for i, t in enumerate(self.tags)}
        sizes = [p.size for p in self.parts]
        self._sizes = sizes
        self.size = None if any(s is None for s in sizes) else sum(sizes)

    def split(self, lab: BasisLabel) -> tuple[int, BasisLabel]:
        if not lab.path or lab.path[0] not in self._tag_index:
            raise KeyError(lab)
        return self._tag_index[lab.path[0]], lab.strip()

    def contains(self, lab):
        if not lab.path or lab.path[0] not in self._tag_index:
            return False
        i = self._tag_index[lab.path[0]]
        return self.parts[i].contains(lab.strip())

    def label_at(self, k):
        self._check_pos(k)
        i, m = _merge_locate(k, self._sizes)
        return self.parts[i].label_at(m).prefixed(self.tags[i])

    def position(self, lab):
        i, inner_lab = self.split(lab)
        m = self.parts[i].position(inner_lab)
        return _merge_position(i, m, self._sizes)

    def __eq__(self, other):
        return isinstance(other, SumSpace) and self.tags == other.tags and self.parts == other.parts

    def __hash__(self):
        return hash(("sum", self.tags, self.parts))

    def __repr__(self):
        return f"SumSpace({list(self.parts)!r}, tags={self.tags!r})"


def _cantor(k: int) -> tuple[int, int]:
    d = (math.isqrt(8 * k + 1) - 1) // 2
    t = k - d * (d + 1) // 2
    return d - t, t


def _cantor_inv(i: int, t: int) -> int:
    d = i + t
    return d * (d + 1) // 2 + t


class CountableSumSpace(Space):
    """Orthogonal sum of countably many infinite spaces ``part(0), part(1), ...``.

    Summand ``i`` carries the integer tag ``i``; enumeration walks the Cantor
    diagonals of (summand, position).
    """

    def __init__(self, part: Callable[[int], Space], key=None):
        self._part = part
        self._cache: dict[int, Space] = {}
        self.key = key

    def part(self, i: int) -> Space:
        sp = self._cache.get(i)
        if sp is None:
            sp = self._part(i)
            if sp.size is not None:
                raise ValueError("countable sums need infinite summands")
            self._cache[i] = sp
        return sp

    def contains(self, lab):
        if not lab.path or not isinstance(lab.path[0], int) or lab.path[0] < 0:
            return False
        return self.part(lab.path[0]).contains(lab.strip())

    def label_at(self, k):
        self._check_pos(k)
        i, t = _cantor(k)
        return self.part(i).label_at(t).prefixed(i)

    def position(self, lab):
        if not self.contains(lab):
            raise KeyError(lab)
        i = lab.path[0]
        return _cantor_inv(i, self.part(i).position(lab.strip()))

    def __eq__(self, other):
        return isinstance(other, CountableSumSpace) and self.key is not None and self.key == other.key

    def __hash__(self):
        return hash(("csum", self.key))


class Subspace(Space):
    """Coordinate subspace of ``parent`` spanned by the labels satisfying ``member``.

    Enumeration follows the parent's order. ``enumerator``/``locator`` may be
    supplied when a closed form exists; otherwise the parent is scanned and
    the scan is cached.
    """

    def __init__(
        self,
        parent: Space,
        member: Callable[[BasisLabel], bool],
        *,
        enumerator: Callable[[int], BasisLabel] | None = None,
        locator: Callable[[BasisLabel], int] | None = None,
        size: int | None = None,
        name: str = "",
        scan_limit: int = 1_000_000,
    ):
        self.parent = parent
        self._member = member
        self._enumerator = enumerator
        self._locator = locator
        self.size = size
        self.name = name
        self.scan_limit = scan_limit
        self._found: list[BasisLabel] = []
        self._pos: dict[BasisLabel, int] = {}
        self._parent_cursor = 0

    def contains(self, lab):
        return self.parent.contains(lab) and bool(self._member(lab))

    def _scan_until(self, done: Callable[[], bool]) -> None:
        psize = self.parent.size
        while not done():
            if psize is not None and self._parent_cursor >= psize:
                return
            if self._parent_cursor >= self.scan_limit:
                raise RuntimeError(f"subspace {self.name or ''} scan exceeded {self.scan_limit} labels")
            lab = self.parent.label_at(self._parent_cursor)
            self._parent_cursor += 1
            if self._member(lab):
                self._pos[lab] = len(self._found)
                self._found.append(lab)

    def label_at(self, k):
        self._check_pos(k)
        if self._enumerator is not None:
            return self._enumerator(k)
        self._scan_until(lambda: len(self._found) > k)
        if k >= len(self._found):
            raise IndexError(k)
        return self._found[k]

    def position(self, lab):
        if not self.contains(lab):
            raise KeyError(lab)
        if self._locator is not None:
            return self._locator(lab)
        self._scan_until(lambda: lab in self._pos)
        return self._pos[lab]

    def complement(self, name: str = "") -> "Subspace":
        """Labels of the parent outside this subspace, in parent order."""
        csize = None
        if self.parent.size is not None and self.size is not None:
            csize = self.parent.size - self.size
        return Subspace(self.parent, lambda lab: not self._member(lab), size=csize, name=name or f"not({self.name})")

    def __repr__(self):
        return f"Subspace({self.name or '?'} of {self.parent!r})"


def whole(space: Space) -> Subspace:
    return Subspace(space, lambda lab: True, enumerator=space.label_at, locator=space.position, size=space.size, name="whole")


def finite_subspace(parent: Space, labels: Sequence[BasisLabel], name: str = "") -> Subspace:
    """Span of an explicit finite label list (kept in the given order)."""
    labs = list(labels)
    for lab in labs:
        if not parent.contains(lab):
            raise ValueError(f"{lab} is not in the parent space")
    idx = {lab: i for i, lab in enumerate(labs)}
    if len(idx) != len(labs):
        raise ValueError("duplicate labels")
    return Subspace(parent, idx.__contains__, enumerator=labs.__getitem__, locator=idx.__getitem__, size=len(labs), name=name or "span")


def component(space: SumSpace, tag: Tag, keep: Callable[[BasisLabel], bool] | None = None, name: str = "") -> Subspace:
    """Labels of summand ``tag`` (optionally filtered by ``keep`` on the inner label)."""
    i = space._tag_index[tag]

    def member(lab):
        if not lab.path or lab.path[0] != tag:
            return False
        return keep is None or keep(lab.strip())

    return Subspace(space, member, size=space.parts[i].size if keep is None else None, name=name or f"H{tag}")


class MappedSpace(Space):
    """Image of ``base`` under an injective relabeling ``fwd`` with inverse ``inv``."""

    def __init__(self, base: Space, fwd: Callable[[BasisLabel], BasisLabel], inv: Callable[[BasisLabel], BasisLabel | None]):
        self.base = base
        self.fwd = fwd
        self.inv = inv
        self.size = base.size

    def contains(self, lab):
        pre = self.inv(lab)
        return pre is not None and self.base.contains(pre)

    def label_at(self, k):
        return self.fwd(self.base.label_at(k))

    def position(self, lab):
        pre = self.inv(lab)
        if pre is None:
            raise KeyError(lab)
        return self.base.position(pre)
