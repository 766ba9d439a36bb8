"""Lazy band operators on labeled bases.

An :class:`Operator` knows the image of every basis vector under itself
(``col``) and under its adjoint (``adj_col``); both images are finitely
supported. Composite operators are immutable expression trees and evaluate
columns on demand, memoizing each column once computed.

``band`` is the column fan-out bound: every ``col``/``adj_col`` has at most
``band`` nonzero entries. It only sizes work; correctness never depends on it.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .basis import BasisLabel, SparseVector, Tag
from .spaces import CountableSumSpace, LeafSpace, Space, Subspace, SumSpace

#: default number of labels scanned when checking subspace invariance
INVARIANCE_DEPTH = 64


class InvarianceError(ValueError):
    """A subspace passed to :func:`restrict` is not invariant."""

    def __init__(self, lab: BasisLabel, image: SparseVector):
        self.label = lab
        self.image = image
        super().__init__(f"subspace is not invariant: image of {lab} leaves it ({image})")


class SpaceMismatch(ValueError):
    pass


class Operator:
    """Base class. Subclasses implement ``_col`` and ``_adj_col``."""

    domain: Space
    codomain: Space
    band: int = 1
    norm_hint: float | None = None

    def __init__(self, domain: Space, codomain: Space | None = None, *, band: int = 1, norm_hint: float | None = None):
        self.domain = domain
        self.codomain = domain if codomain is None else codomain
        self.band = band
        self.norm_hint = norm_hint
        self._cols: dict[BasisLabel, SparseVector] = {}
        self._adj_cols: dict[BasisLabel, SparseVector] = {}
        self._adjoint: Operator | None = None

    def _col(self, lab: BasisLabel) -> SparseVector:
        raise NotImplementedError

    def _adj_col(self, lab: BasisLabel) -> SparseVector:
        raise NotImplementedError

    def col(self, lab: BasisLabel) -> SparseVector:
        """Image of the basis vector ``e_lab``."""
        v = self._cols.get(lab)
        if v is None:
            v = self._col(lab)
            self._cols[lab] = v
        return v

    def adj_col(self, lab: BasisLabel) -> SparseVector:
        """Image of ``e_lab`` under the adjoint."""
        v = self._adj_cols.get(lab)
        if v is None:
            v = self._adj_col(lab)
            self._adj_cols[lab] = v
        return v

    def apply(self, v: SparseVector) -> SparseVector:
        return SparseVector.combine((a, self.col(lab)) for lab, a in v.items())

    def apply_adjoint(self, v: SparseVector) -> SparseVector:
        return SparseVector.combine((a, self.adj_col(lab)) for lab, a in v.items())

    @property
    def H(self) -> "Operator":
        return adjoint(self)

    @property
    def is_square(self) -> bool:
        return self.domain == self.codomain

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return compose(self, other)
        if isinstance(other, SparseVector):
            return self.apply(other)
        return NotImplemented

    def __add__(self, other: "Operator") -> "Operator":
        return add_scale(1.0, self, 1.0, other)

    def __sub__(self, other: "Operator") -> "Operator":
        return add_scale(1.0, self, -1.0, other)

    def __mul__(self, c: complex) -> "Operator":
        return scale(c, self)

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return scale(-1.0, self)

    def describe(self) -> str:
        return type(self).__name__


# ---------------------------------------------------------------------------
# primitives


class Diagonal(Operator):
    """``e_l -> d(l) e_l``. ``monotone`` declares ``|d|`` nonincreasing in position."""

    def __init__(self, space: Space, entries: Callable[[BasisLabel], complex], *, sup: float | None = None, monotone: bool = False, name: str = "diagonal"):
        super().__init__(space, band=1, norm_hint=sup)
        self.entries = entries
        self.monotone = monotone
        self.name = name

    def _col(self, lab):
        return SparseVector.basis(lab, self.entries(lab))

    def _adj_col(self, lab):
        return SparseVector.basis(lab, complex(self.entries(lab)).conjugate())

    def describe(self):
        return self.name


class LabelMap(Operator):
    """Weighted relabeling ``e_l -> c(l) e_{f(l)}`` for an injective ``f``.

    ``inv`` returns the preimage of a codomain label or ``None`` when the
    label is outside the range. With unimodular weights this is an isometry;
    shifts, even/odd isometries and relabeling unitaries are all instances.
    """

    def __init__(
        self,
        domain: Space,
        codomain: Space,
        fwd: Callable[[BasisLabel], BasisLabel],
        inv: Callable[[BasisLabel], BasisLabel | None],
        coeff: Callable[[BasisLabel], complex] | None = None,
        *,
        norm_hint: float | None = 1.0,
        name: str = "labelmap",
    ):
        super().__init__(domain, codomain, band=1, norm_hint=norm_hint)
        self.fwd = fwd
        self.inv = inv
        self.coeff = coeff
        self.name = name

    def _col(self, lab):
        c = 1.0 if self.coeff is None else self.coeff(lab)
        return SparseVector.basis(self.fwd(lab), c)

    def _adj_col(self, lab):
        pre = self.inv(lab)
        if pre is None:
            return SparseVector.zero()
        c = 1.0 if self.coeff is None else complex(self.coeff(pre)).conjugate()
        return SparseVector.basis(pre, c)

    def describe(self):
        return self.name


class DenseMatrix(Operator):
    """Finite matrix on ``LeafSpace(size=n)``; entry ``(i, j)`` is ``<e_i, M e_j>``."""

    def __init__(self, matrix, path: tuple = ()):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        self.matrix = m
        n = m.shape[0]
        super().__init__(LeafSpace(path, size=n), band=n, norm_hint=float(np.linalg.norm(m, 2)) if n else 0.0)
        self._path = tuple(path)

    def _col(self, lab):
        j = self.domain.position(lab)
        return SparseVector({BasisLabel(self._path, i): a for i, a in enumerate(self.matrix[:, j]) if a != 0})

    def _adj_col(self, lab):
        j = self.domain.position(lab)
        return SparseVector({BasisLabel(self._path, i): a.conjugate() for i, a in enumerate(self.matrix[j, :]) if a != 0})

    def describe(self):
        return f"matrix{self.matrix.shape}"


class ColumnOperator(Operator):
    """Operator given directly by column functions (used for explicit constructions)."""

    def __init__(self, domain, codomain, col, adj_col, *, band=2, norm_hint=None, name="columns"):
        super().__init__(domain, codomain, band=band, norm_hint=norm_hint)
        self._colf = col
        self._adjf = adj_col
        self.name = name

    def _col(self, lab):
        return self._colf(lab)

    def _adj_col(self, lab):
        return self._adjf(lab)

    def describe(self):
        return self.name


# ---------------------------------------------------------------------------
# algebra


class Adjoint(Operator):
    def __init__(self, base: Operator):
        super().__init__(base.codomain, base.domain, band=base.band, norm_hint=base.norm_hint)
        self.base = base

    def _col(self, lab):
        return self.base.adj_col(lab)

    def _adj_col(self, lab):
        return self.base.col(lab)

    def describe(self):
        return f"adjoint({self.base.describe()})"


class Compose(Operator):
    """``A B``: apply ``B`` first."""

    def __init__(self, a: Operator, b: Operator):
        if a.domain != b.codomain:
            raise SpaceMismatch(f"cannot compose: {a.domain!r} vs {b.codomain!r}")
        nh = None if a.norm_hint is None or b.norm_hint is None else a.norm_hint * b.norm_hint
        super().__init__(b.domain, a.codomain, band=a.band * b.band, norm_hint=nh)
        self.a = a
        self.b = b

    def _col(self, lab):
        return self.a.apply(self.b.col(lab))

    def _adj_col(self, lab):
        return self.b.apply_adjoint(self.a.adj_col(lab))

    def describe(self):
        return f"({self.a.describe()} . {self.b.describe()})"


class LinearCombination(Operator):
    def __init__(self, terms: Sequence[tuple[complex, Operator]]):
        ops = [op for _, op in terms]
        d, c = ops[0].domain, ops[0].codomain
        for op in ops[1:]:
            if op.domain != d or op.codomain != c:
                raise SpaceMismatch("summands act on different spaces")
        hints = [abs(a) * op.norm_hint if op.norm_hint is not None else None for a, op in terms]
        nh = None if any(h is None for h in hints) else math.fsum(hints)
        super().__init__(d, c, band=sum(op.band for op in ops), norm_hint=nh)
        self.terms = [(complex(a), op) for a, op in terms]

    def _col(self, lab):
        return SparseVector.combine((a, op.col(lab)) for a, op in self.terms)

    def _adj_col(self, lab):
        return SparseVector.combine((a.conjugate(), op.adj_col(lab)) for a, op in self.terms)

    def describe(self):
        return " + ".join(f"{a:g}*{op.describe()}" for a, op in self.terms)


def _prefixer(tag):
    return lambda lab: lab.prefixed(tag)


class OrthogonalSum(Operator):
    def __init__(self, parts: Sequence[Operator], tags: Sequence[Tag] | None = None):
        if not parts:
            raise ValueError("oplus needs at least one summand")
        for p in parts:
            if not p.is_square:
                raise SpaceMismatch("orthogonal sums need square summands")
        space = SumSpace([p.domain for p in parts], tags)
        hints = [p.norm_hint for p in parts]
        nh = None if any(h is None for h in hints) else max(hints)
        super().__init__(space, band=max(p.band for p in parts), norm_hint=nh)
        self.parts = tuple(parts)
        self.tags = space.tags
        self._pre = [_prefixer(t) for t in self.tags]

    def _col(self, lab):
        i, inner_lab = self.domain.split(lab)
        return self.parts[i].col(inner_lab).map_labels(self._pre[i])

    def _adj_col(self, lab):
        i, inner_lab = self.domain.split(lab)
        return self.parts[i].adj_col(inner_lab).map_labels(self._pre[i])

    def describe(self):
        return "oplus(" + ", ".join(p.describe() for p in self.parts) + ")"


class CountableSum(Operator):
    """``oplus_{i >= 0} part(i)``; summands are built on demand from the index."""

    def __init__(self, part: Callable[[int], Operator], key=None, *, band: int = 1, norm_hint: float | None = None):
        self._factory = part
        self._parts: dict[int, Operator] = {}
        space = CountableSumSpace(lambda i: self.part(i).domain, key=key)
        super().__init__(space, band=band, norm_hint=norm_hint)

    def part(self, i: int) -> Operator:
        op = self._parts.get(i)
        if op is None:
            op = self._factory(i)
            self._parts[i] = op
        return op

    def _col(self, lab):
        i = lab.path[0]
        return self.part(i).col(lab.strip()).map_labels(_prefixer(i))

    def _adj_col(self, lab):
        i = lab.path[0]
        return self.part(i).adj_col(lab.strip()).map_labels(_prefixer(i))


class BlockUpper(Operator):
    """``[[V, s E], [0, U]]`` on ``H1 (+) H2`` with component tags ``"1"``/``"2"``."""

    def __init__(self, v: Operator, e: Operator, u: Operator, s: float):
        if s < 0:
            raise ValueError("block coupling s must be >= 0")
        if not (v.is_square and u.is_square):
            raise SpaceMismatch("V and U must be square")
        if e.domain != u.domain or e.codomain != v.domain:
            raise SpaceMismatch("E must map the U-space into the V-space")
        space = SumSpace([v.domain, u.domain], ("1", "2"))
        hints = (v.norm_hint, e.norm_hint, u.norm_hint)
        nh = None if None in hints else max(v.norm_hint, u.norm_hint) + s * e.norm_hint
        super().__init__(space, band=max(v.band + e.band, e.band + u.band), norm_hint=nh)
        self.v, self.e, self.u, self.s = v, e, u, float(s)

    def _col(self, lab):
        tag, inner_lab = lab.path[0], lab.strip()
        if tag == "1":
            return self.v.col(inner_lab).map_labels(_prefixer("1"))
        if tag == "2":
            top = self.e.col(inner_lab).map_labels(_prefixer("1"))
            bottom = self.u.col(inner_lab).map_labels(_prefixer("2"))
            return SparseVector.combine([(self.s, top), (1.0, bottom)])
        raise KeyError(lab)

    def _adj_col(self, lab):
        tag, inner_lab = lab.path[0], lab.strip()
        if tag == "1":
            top = self.v.adj_col(inner_lab).map_labels(_prefixer("1"))
            bottom = self.e.adj_col(inner_lab).map_labels(_prefixer("2"))
            return SparseVector.combine([(1.0, top), (self.s, bottom)])
        if tag == "2":
            return self.u.adj_col(inner_lab).map_labels(_prefixer("2"))
        raise KeyError(lab)

    def describe(self):
        return f"block[{self.v.describe()}, {self.s:g}*{self.e.describe()}; 0, {self.u.describe()}]"


class Power(Operator):
    """``base^n``; columns are built level by level and shared across powers of one base."""

    def __init__(self, base: Operator, n: int):
        if n < 0:
            raise ValueError("power must be >= 0")
        if not base.is_square:
            raise SpaceMismatch("powers need a square operator")
        nh = None if base.norm_hint is None else base.norm_hint**n
        super().__init__(base.domain, band=base.band**n, norm_hint=nh)
        self.base = base
        self.n = n

    def _walk(self, lab, cache_of, step):
        levels = [power(self.base, k) for k in range(1, self.n)]
        v, start = SparseVector.basis(lab), 0
        for k in range(self.n - 1, 0, -1):
            hit = cache_of(levels[k - 1]).get(lab)
            if hit is not None:
                v, start = hit, k
                break
        for k in range(start + 1, self.n + 1):
            v = step(v)
            if k < self.n:
                cache_of(levels[k - 1])[lab] = v
        return v

    def _col(self, lab):
        return self._walk(lab, lambda op: op._cols, self.base.apply)

    def _adj_col(self, lab):
        return self._walk(lab, lambda op: op._adj_cols, self.base.apply_adjoint)

    def describe(self):
        return f"({self.base.describe()})^{self.n}"


def _inclusion(sub: Subspace, path: tuple = ()) -> LabelMap:
    """Isometry from ``LeafSpace(path, sub.size)`` onto ``sub`` inside its parent."""
    leaf = LeafSpace(path, size=sub.size)

    def inv(lab):
        if not sub.contains(lab):
            return None
        return BasisLabel(leaf.path, sub.position(lab))

    return LabelMap(leaf, sub.parent, lambda lab: sub.label_at(lab.index), inv, name="inclusion")


class Compression(Operator):
    """``P_S R |_S`` relabeled onto ``S``'s enumeration (``e_k <-> S.label_at(k)``)."""

    def __init__(self, base: Operator, sub: Subspace):
        if not base.is_square:
            raise SpaceMismatch("compression needs a square operator")
        if sub.parent != base.domain:
            raise SpaceMismatch("subspace must live in the operator's space")
        self.base = base
        self.sub = sub
        self.inclusion = _inclusion(sub)
        super().__init__(self.inclusion.domain, band=base.band, norm_hint=base.norm_hint)

    def _col(self, lab):
        return self.inclusion.apply_adjoint(self.base.col(self.inclusion.fwd(lab)))

    def _adj_col(self, lab):
        return self.inclusion.apply_adjoint(self.base.adj_col(self.inclusion.fwd(lab)))

    def embed(self, v: SparseVector) -> SparseVector:
        return self.inclusion.apply(v)

    def describe(self):
        return f"compress({self.base.describe()}, {self.sub.name or 'S'})"


class Restriction(Compression):
    """``R|_S`` for an invariant ``S``; the adjoint is the compression of ``R*``."""

    def _col(self, lab):
        parent_lab = self.inclusion.fwd(lab)
        image = self.base.col(parent_lab)
        for m in image.support():
            if not self.sub.contains(m):
                raise InvarianceError(parent_lab, image)
        return self.inclusion.apply_adjoint(image)

    def describe(self):
        return f"restrict({self.base.describe()}, {self.sub.name or 'S'})"


# ---------------------------------------------------------------------------
# builders

LEAF = LeafSpace(())


def identity(space: Space = LEAF) -> Operator:
    return Diagonal(space, lambda lab: 1.0, sup=1.0, name="I")


def zero(space: Space = LEAF) -> Operator:
    return Diagonal(space, lambda lab: 0.0, sup=0.0, name="0")


def diagonal(entries: Callable[[int], complex], space: Space = LEAF, *, sup: float | None = None, monotone: bool = False) -> Diagonal:
    """Diagonal operator ``e_k -> entries(k) e_k`` where ``k`` is the position in ``space``."""
    if isinstance(space, LeafSpace):
        return Diagonal(space, lambda lab: entries(lab.index), sup=sup, monotone=monotone)
    return Diagonal(space, lambda lab: entries(space.position(lab)), sup=sup, monotone=monotone)


def diagonal_unitary(phases: Callable[[int], complex], space: Space = LEAF) -> Diagonal:
    """Diagonal operator with unimodular entries (checked on evaluation)."""

    def entry(k):
        z = complex(phases(k))
        if abs(abs(z) - 1.0) > 1e-12:
            raise ValueError(f"phase {z} at {k} is not unimodular")
        return z

    op = diagonal(entry, space, sup=1.0)
    op.name = "diag_unitary"
    return op


def projection(sub: Subspace) -> Diagonal:
    """Orthogonal projection onto a coordinate subspace, acting on its parent."""
    return Diagonal(sub.parent, lambda lab: 1.0 if sub.contains(lab) else 0.0, sup=1.0, name=f"P[{sub.name}]")


def shift(space: LeafSpace = LEAF) -> LabelMap:
    """Unilateral shift ``e_k -> e_{k+1}``."""
    p = space.path
    return LabelMap(
        space,
        space,
        lambda lab: BasisLabel(p, lab.index + 1),
        lambda lab: BasisLabel(p, lab.index - 1) if lab.index >= 1 else None,
        name="S",
    )


def weighted_shift(weights: Callable[[int], float], space: LeafSpace = LEAF, *, sup: float | None = None) -> LabelMap:
    """``e_k -> w(k) e_{k+1}``."""
    p = space.path
    return LabelMap(
        space,
        space,
        lambda lab: BasisLabel(p, lab.index + 1),
        lambda lab: BasisLabel(p, lab.index - 1) if lab.index >= 1 else None,
        lambda lab: weights(lab.index),
        norm_hint=sup,
        name="weighted_shift",
    )


def index_map(mult: int, offset: int, space: LeafSpace = LEAF, name: str = "") -> LabelMap:
    """Isometry ``e_k -> e_{mult*k + offset}`` (``mult >= 1``, ``offset >= 0``)."""
    if mult < 1 or offset < 0:
        raise ValueError("need mult >= 1 and offset >= 0")
    p = space.path

    def inv(lab):
        q, r = divmod(lab.index - offset, mult)
        if lab.index < offset or r:
            return None
        return BasisLabel(p, q)

    return LabelMap(space, space, lambda lab: BasisLabel(p, mult * lab.index + offset), inv, name=name or f"e_k->e_{{{mult}k+{offset}}}")


def even_odd_V(space: LeafSpace = LEAF) -> LabelMap:
    """``V e_k = e_{2k}``."""
    return index_map(2, 0, space, "V_even")


def even_odd_E(space: LeafSpace = LEAF) -> LabelMap:
    """``E e_k = e_{2k+1}``; ``ran V (+) ran E`` is everything."""
    return index_map(2, 1, space, "E_odd")


def matrix(m) -> DenseMatrix:
    return DenseMatrix(m)


def adjoint(t: Operator) -> Operator:
    if isinstance(t, Adjoint):
        return t.base
    if t._adjoint is None:
        t._adjoint = Adjoint(t)
    return t._adjoint


def compose(*ops: Operator) -> Operator:
    """``compose(A, B, C) = A B C``."""
    if not ops:
        raise ValueError("compose needs at least one operator")
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = Compose(op, out)
    return out


def add_scale(a: complex, A: Operator, b: complex, B: Operator) -> Operator:
    """``a A + b B``."""
    return LinearCombination([(a, A), (b, B)])


def scale(c: complex, A: Operator) -> Operator:
    return LinearCombination([(c, A)])


def oplus(parts: Sequence[Operator], tags: Sequence[Tag] | None = None) -> OrthogonalSum:
    return OrthogonalSum(parts, tags)


def countable_oplus(part: Callable[[int], Operator], key=None, *, band: int = 1, norm_hint: float | None = None) -> CountableSum:
    return CountableSum(part, key, band=band, norm_hint=norm_hint)


def block_upper(v: Operator, e: Operator, u: Operator, s: float) -> BlockUpper:
    return BlockUpper(v, e, u, s)


def power(t: Operator, n: int) -> Power:
    """``t^n``, memoized per base so that successive powers share columns."""
    cache = t.__dict__.setdefault("_powers", {})
    p = cache.get(n)
    if p is None:
        p = cache[n] = Power(t, n)
    return p


def restrict(t: Operator, sub: Subspace, check_depth: int = INVARIANCE_DEPTH) -> Restriction:
    """Restriction to an invariant coordinate subspace.

    Invariance is verified on the first ``check_depth`` labels of ``sub``;
    later labels are checked lazily whenever their column is evaluated.
    """
    if sub.parent != t.domain:
        raise SpaceMismatch("subspace must live in the operator's space")
    for lab in sub.labels(check_depth):
        image = t.col(lab)
        for m in image.support():
            if not sub.contains(m):
                raise InvarianceError(lab, image)
    return Restriction(t, sub)


def compress(r: Operator, sub: Subspace) -> Compression:
    return Compression(r, sub)


def defect(t: Operator) -> Operator:
    """``T*T - I``."""
    return add_scale(1.0, compose(adjoint(t), t), -1.0, identity(t.domain))


def codefect(t: Operator) -> Operator:
    """``TT* - I``."""
    return add_scale(1.0, compose(t, adjoint(t)), -1.0, identity(t.domain))


def principal_block(t: Operator, n: int, labels: Sequence[BasisLabel] | None = None) -> np.ndarray:
    """Dense ``n x n`` block ``<e_i, T e_j>`` over the first ``n`` labels of the space."""
    labs = list(labels) if labels is not None else t.domain.labels(n)
    pos = {lab: i for i, lab in enumerate(labs)}
    out = np.zeros((len(labs), len(labs)), dtype=complex)
    for j, lab in enumerate(labs):
        for m, a in t.col(lab).items():
            i = pos.get(m)
            if i is not None:
                out[i, j] = a
    return out


def agree(a: Operator, b: Operator, depth: int = 64, tol: float = 1e-12, *, adjoints: bool = True) -> bool:
    """Columns (and adjoint columns) of ``a`` and ``b`` match on the first ``depth`` labels."""
    for lab in a.domain.labels(depth):
        if (a.col(lab) - b.col(lab)).norm() > tol:
            return False
    if adjoints:
        for lab in a.codomain.labels(depth):
            if (a.adj_col(lab) - b.adj_col(lab)).norm() > tol:
                return False
    return True


def adjoint_consistency(t: Operator, depth: int = 64) -> float:
    """max ``|<e_l, T e_m> - conj(<e_m, T* e_l>)|`` over the first ``depth`` labels."""
    worst = 0.0
    rows = t.codomain.labels(depth)
    for m in t.domain.labels(depth):
        col = t.col(m)
        for lab in rows:
            worst = max(worst, abs(col[lab] - t.adj_col(lab)[m].conjugate()))
    return worst
