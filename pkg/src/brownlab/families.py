"""Explicit operators and operator sequences.

Leaf-space families (``js01``, ``prz1``) use ``e_0, e_1, ...``; the first
basis vector of a sequence indexed from 1 in the literature is ``e_0``
here. Block families act on ``H1 (+) H2`` with component tags ``"1"`` and
``"2"``, both copies of the leaf space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import BasisLabel, SparseVector, gram_schmidt
from .certify import DEFAULT_DEPTH, DEFAULT_TOL, brownian_certificate, covariance_bounds
from .operators import (
    LEAF,
    BlockUpper,
    ColumnOperator,
    Compose,
    Diagonal,
    LabelMap,
    Operator,
    Restriction,
    adjoint,
    block_upper,
    compose,
    diagonal,
    diagonal_unitary,
    even_odd_E,
    even_odd_V,
    identity,
    index_map,
    matrix,
    oplus,
    power,
    principal_block,
    projection,
    restrict,
    shift,
    weighted_shift,
    zero,
)
from .spaces import LeafSpace, Space, Subspace, SumSpace, _merge_locate, _merge_position, component, whole

BLOCK_SPACE = SumSpace([LEAF, LEAF], ("1", "2"))


class ExtensionMismatch(ValueError):
    """``R`` does not extend ``T`` on the embedded subspace."""


class UnsupportedStructure(ValueError):
    """The operator is outside the structured inputs a constructor handles."""


MODES = ("strong", "star_strong", "norm", "weak_to_zero")


@dataclass
class FamilyHandle:
    """A limit operator together with a sequence ``member(1), member(2), ...``.

    ``bound(n, h)``, when present, is the analytic upper bound on the
    deviation of ``member(n)`` from ``limit`` at the vector ``h`` in the
    claimed mode.
    """

    name: str
    params: dict
    limit: Operator
    build: Callable[[int], Operator]
    claimed_mode: str
    claimed_member_cov: float | Callable[[int], float]
    claimed_limit_cov: float
    bound: Callable[[int, SparseVector], float] | None = None
    _members: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.claimed_mode not in MODES:
            raise ValueError(f"unknown mode {self.claimed_mode!r}")

    def member(self, n: int) -> Operator:
        if n < 1:
            raise ValueError("family members are indexed from n = 1")
        op = self._members.get(n)
        if op is None:
            op = self.build(n)
            self._members[n] = op
        return op

    def member_cov(self, n: int) -> float:
        c = self.claimed_member_cov
        return float(c(n)) if callable(c) else float(c)

    @property
    def space(self) -> Space:
        return self.limit.domain


# ---------------------------------------------------------------------------
# single operators


def js01_weight(lam: float, n: int) -> float:
    a = lam * lam - 1.0
    return math.sqrt((1.0 + (n + 1) * a) / (1.0 + n * a))


def js01_shift(lam: float) -> LabelMap:
    """2-isometric unilateral weighted shift with weights
    ``sqrt((1 + (n+1)(lam^2-1)) / (1 + n(lam^2-1)))``.

    The weights decrease to 1, so the defect operator is diagonal with
    decreasing entries and ``cov = sqrt(lam^2 - 1)``.
    """
    if not lam > 1:
        raise ValueError("js01 needs lambda > 1")
    op = weighted_shift(lambda n: js01_weight(lam, n), sup=lam)
    op.name = f"js01({lam:g})"
    return op


def clidr_two_isometry(q: float) -> BlockUpper:
    """Weakly stable 2-isometry ``[[V, sqrt(1-q) E0], [0, sqrt(q) I]]``.

    ``V e_k = e_{2k+2}`` is a pure isometry (no unitary part) with infinite
    codimension and ``E0 e_k = e_{4k+1}`` has range orthogonal to ``ran V``.
    """
    if not 0 < q < 1:
        raise ValueError("clidr needs 0 < q < 1")
    v = index_map(2, 2, name="V_pure")
    e0 = index_map(4, 1, name="E0")
    x = diagonal(lambda k: math.sqrt(q), sup=math.sqrt(q))
    x.name = f"sqrt({q:g})I"
    return block_upper(v, e0, x, math.sqrt(1.0 - q))


def canonical_brownian(sigma: float, u_phases: Callable[[int], complex] | None = None) -> BlockUpper:
    """``[[V, sigma E], [0, U]]`` with ``V e_k = e_{2k}``, ``E e_k = e_{2k+1}``, ``U`` diagonal unitary."""
    if not sigma > 0:
        raise ValueError("canonical_brownian needs sigma > 0")
    u = identity() if u_phases is None else diagonal_unitary(u_phases)
    return block_upper(even_odd_V(), even_odd_E(), u, sigma)


def shift_corner_operator(sigma: float = 1.0) -> BlockUpper:
    """Non-Brownian 2-isometry ``[[V, sigma E], [0, S]]`` with ``S`` the unilateral shift."""
    return block_upper(even_odd_V(), even_odd_E(), shift(), sigma)


def cyclic_permutation(n: int = 3):
    """Unitary ``e_k -> e_{k+1 mod n}`` on ``C^n``."""
    return matrix(np.roll(np.eye(n), 1, axis=0))


# ---------------------------------------------------------------------------
# power envelopes


@dataclass
class PowerEnvelope:
    n: int
    E_norm: float
    T_power: Operator
    method: str
    E_norm_matrix: float | None = None


def _corner(t: BlockUpper, n: int) -> Operator:
    h1 = component(t.domain, "1")
    h2 = component(t.domain, "2")
    return compose(projection(h1), power(t, n), projection(h2))


def power_envelope(t: Operator, n: int, depth: int = 32) -> PowerEnvelope:
    """Norm of the corner ``E_n`` of ``T^n = [[V^n, E_n], [0, X^n]]``.

    When ``E`` is a coordinate isometry scaled by ``s`` and ``X`` is
    diagonal, ``E_n* E_n = s^2 sum_{j<n} X*^j X^j`` is diagonal and the norm
    is read off its entries (sup over the first ``depth`` H2 positions,
    exact for constant-modulus ``X``). The direct route, always computed,
    is the largest eigenvalue of the principal block of ``E_n* E_n`` over
    the first ``depth`` H2 basis vectors.
    """
    if not isinstance(t, BlockUpper):
        raise TypeError("power_envelope needs an operator built by block_upper")
    if n < 1:
        raise ValueError("n must be >= 1")
    corner = _corner(t, n)
    h2_labels = [BasisLabel(("2",) + lab.path, lab.index) for lab in t.u.domain.labels(depth)]
    gram = principal_block(compose(adjoint(corner), corner), len(h2_labels), h2_labels)
    eig = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    direct = math.sqrt(max(float(eig[-1]), 0.0))

    coordinate_e = isinstance(t.e, LabelMap) and t.e.coeff is None
    if coordinate_e and isinstance(t.u, Diagonal):
        best = 0.0
        for lab in t.u.domain.labels(depth):
            r = abs(complex(t.u.entries(lab))) ** 2
            best = max(best, math.fsum(r**j for j in range(n)))
        formula = t.s * math.sqrt(best)
        return PowerEnvelope(n, formula, power(t, n), "gram-identity", direct)
    return PowerEnvelope(n, direct, power(t, n), "principal-block", direct)


# ---------------------------------------------------------------------------
# sequences


def _norm_of(h: SparseVector, keep: Callable[[BasisLabel], bool]) -> float:
    return math.sqrt(math.fsum(abs(a) ** 2 for lab, a in h.items() if keep(lab)))


def prz1_member(sigma: float, n: int, lambdas: Callable[[int], complex], zs: Callable[[int], complex]) -> ColumnOperator:
    """Brownian unitary with defect space ``<e_n>``.

    ``e_k -> lambda_k e_k`` for ``k < n``; ``e_n -> sigma e_{n+1} + z_n e_n``;
    ``e_k -> e_{k+1}`` for ``k > n``.
    """

    def col(lab):
        k = lab.index
        if k < n:
            return SparseVector.basis(lab, lambdas(k))
        if k == n:
            return SparseVector({BasisLabel((), n + 1): sigma, lab: zs(n)})
        return SparseVector.basis(BasisLabel((), k + 1))

    def adj(lab):
        k = lab.index
        if k < n:
            return SparseVector.basis(lab, complex(lambdas(k)).conjugate())
        if k == n:
            return SparseVector.basis(lab, complex(zs(n)).conjugate())
        if k == n + 1:
            return SparseVector.basis(BasisLabel((), n), sigma)
        return SparseVector.basis(BasisLabel((), k - 1))

    return ColumnOperator(LEAF, LEAF, col, adj, band=2, name=f"prz1[{n}]")


def prz1_family(sigma: float, lambdas: Callable[[int], complex] | None = None, zs: Callable[[int], complex] | None = None) -> FamilyHandle:
    """Brownian unitaries of covariance ``sigma`` converging *-strongly to a diagonal unitary."""
    if not sigma > 0:
        raise ValueError("prz1 needs sigma > 0")
    lam = lambdas or (lambda k: 1.0)
    z = zs or (lambda n: 1.0)
    limit = diagonal_unitary(lam)

    def bound(n, h):
        g = lambda m: _norm_of(h, lambda lab: lab.index >= m)  # noqa: E731
        at = lambda m: abs(h[BasisLabel((), m)])  # noqa: E731
        strong = g(n + 1) + (sigma + 1.0) * at(n) + g(n)
        star = g(n + 1) + sigma * at(n + 1) + at(n) + g(n)
        return strong + star

    return FamilyHandle(
        "prz1",
        {"sigma": sigma},
        limit,
        lambda n: prz1_member(sigma, n, lam, z),
        "star_strong",
        sigma,
        0.0,
        bound,
    )


def _odd_part_block(i: int) -> tuple[int, int]:
    """H2 index ``i`` -> (block j >= 1, position t) with ``i + 1 = 2^t (2j - 1)``."""
    m = i + 1
    t = (m & -m).bit_length() - 1
    return ((m >> t) + 1) // 2, t


def _block_member(j: int, t: int) -> int:
    return (2 * j - 1) * (1 << t) - 1


def przew2_operator(sigma: float, n: int | None) -> ColumnOperator:
    """Member ``n`` of the infinite-multiplicity sequence (``n=None`` gives the limit).

    ``H2`` splits into the infinite blocks ``M_j = {i : i + 1 = 2^t (2j-1)}``;
    ``W_j`` sends the t-th basis vector of ``M_j`` to the t-th vector of the
    interleaved basis ``E m_0, m_0, E m_1, m_1, ...`` of ``E(M_j) (+) M_j``.
    Blocks ``j <= n`` are absorbed into the isometric part, the rest keep
    the Brownian coupling ``sigma E`` with ``U = I``.
    """

    def absorbed(j):
        return n is None or j <= n

    def w(j, t):
        s, odd = divmod(t, 2)
        m = _block_member(j, s)
        return BasisLabel(("2",), m) if odd else BasisLabel(("1",), 2 * m + 1)

    def col(lab):
        k = lab.index
        if lab.path == ("1",):
            return SparseVector.basis(BasisLabel(("1",), 2 * k))
        j, t = _odd_part_block(k)
        if absorbed(j):
            return SparseVector.basis(w(j, t))
        return SparseVector({BasisLabel(("1",), 2 * k + 1): sigma, lab: 1.0})

    def adj(lab):
        k = lab.index
        if lab.path == ("1",):
            if k % 2 == 0:
                return SparseVector.basis(BasisLabel(("1",), k // 2))
            i = (k - 1) // 2
            j, s = _odd_part_block(i)
            if absorbed(j):
                return SparseVector.basis(BasisLabel(("2",), _block_member(j, 2 * s)))
            return SparseVector.basis(BasisLabel(("2",), i), sigma)
        j, s = _odd_part_block(k)
        if absorbed(j):
            return SparseVector.basis(BasisLabel(("2",), _block_member(j, 2 * s + 1)))
        return SparseVector.basis(lab)

    name = "przew2[limit]" if n is None else f"przew2[{n}]"
    return ColumnOperator(BLOCK_SPACE, BLOCK_SPACE, col, adj, band=2, name=name)


def przew2_family(sigma: float) -> FamilyHandle:
    if not sigma > 0:
        raise ValueError("przew2 needs sigma > 0")

    def tail2(n):
        return lambda lab: lab.path == ("2",) and _odd_part_block(lab.index)[0] > n

    def tail1(n):
        return lambda lab: lab.path == ("1",) and lab.index % 2 == 1 and _odd_part_block((lab.index - 1) // 2)[0] > n

    def bound(n, h):
        h2n = _norm_of(h, tail2(n))
        strong = (sigma + 2.0) * h2n
        qperp = _norm_of(h, lambda lab: tail1(n)(lab) or tail2(n)(lab))
        star = sigma * _norm_of(h, tail1(n)) + h2n + qperp
        return strong + star

    return FamilyHandle(
        "przew2",
        {"sigma": sigma},
        przew2_operator(sigma, None),
        lambda n: przew2_operator(sigma, n),
        "star_strong",
        sigma,
        0.0,
        bound,
    )


def sslnv_family(sigma_seq: Callable[[int], float] | None = None) -> FamilyHandle:
    """Brownian unitaries ``[[V, s_n E], [0, I]]`` converging in norm to the isometry ``V (+) I``."""
    seq = sigma_seq or (lambda n: 1.0 / n)
    v, e, u = even_odd_V(), even_odd_E(), identity()
    limit = block_upper(v, e, u, 0.0)
    return FamilyHandle(
        "sslnv",
        {"sigma_seq": "1/n" if sigma_seq is None else "custom"},
        limit,
        lambda n: block_upper(v, e, u, seq(n)),
        "norm",
        seq,
        0.0,
        lambda n, h: seq(n) * h.norm(),
    )


def clidr_family(q: float) -> FamilyHandle:
    """Powers ``T^n`` of the weakly stable 2-isometry, with weak limit 0."""
    t = clidr_two_isometry(q)
    return FamilyHandle("clidr", {"q": q}, zero(t.domain), lambda n: power(t, n), "weak_to_zero", 0.0, 1.0)


def constant_family(name: str, op: Operator, cov: float, params: dict | None = None) -> FamilyHandle:
    """``T_n = T`` for all ``n``."""
    return FamilyHandle(name, params or {}, op, lambda n: op, "norm", cov, cov, lambda n, h: 0.0)


# ---------------------------------------------------------------------------
# Bishop approximants


def embed_map(t_space: Space, embed: Subspace) -> Callable[[BasisLabel], BasisLabel]:
    return lambda lab: embed.label_at(t_space.position(lab))


def check_extension(r: Operator, embed: Subspace, t: Operator, depth: int, tol: float = 1e-12) -> None:
    emb = embed_map(t.domain, embed)
    for lab in t.domain.labels(depth):
        lhs = r.col(emb(lab))
        rhs = t.col(lab).map_labels(emb)
        if (lhs - rhs).norm() > tol:
            raise ExtensionMismatch(f"R e != T e at {lab} (embedded as {emb(lab)})")


class BishopApproximant(Compose):
    """``U_n* R U_n`` where the unitary ``U_n : H -> K`` fixes ``tau_n + T(tau_n)``."""

    def __init__(self, unitary: LabelMap, r: Operator, n: int, tau: list, frame: list, fixed: list):
        super().__init__(adjoint(unitary), compose(r, unitary))
        self.unitary = unitary
        self.n = n
        self.tau = tau
        self.frame = frame
        self.fixed = fixed

    def describe(self):
        return f"bishop[{self.n}]"


def bishop_approximant(
    r: Operator,
    embed: Subspace,
    t: Operator,
    n: int,
    *,
    complement_size: int | None = None,
    check_depth: int | None = None,
    tol: float = 1e-10,
) -> BishopApproximant:
    """Unitary conjugate of ``R`` onto ``H`` agreeing with ``T`` on ``tau_n``.

    ``tau_n`` is spanned by the first ``n`` basis vectors of ``H``. The span
    ``F = tau_n + T(tau_n)`` is orthonormalized; together with the
    orthonormalized remainder of its coordinate support ``L`` it spans
    ``span{e_l : l in L}``, which ``U_n`` fixes. The complements are paired
    in order: the H-tail (labels outside ``L``) goes to the fair interleave
    of the embedded H-tail and ``K (-) H``. ``complement_size`` is the
    dimension of ``K (-) H`` (``None`` = infinite).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    hspace = t.domain
    emb = embed_map(hspace, embed)
    check_extension(r, embed, t, check_depth if check_depth is not None else n + 16)

    tau = hspace.labels(n)
    f_vecs = [SparseVector.basis(lab) for lab in tau] + [t.col(lab) for lab in tau]
    frame = gram_schmidt(f_vecs, tol)
    support = sorted({lab for v in f_vecs for lab, _ in v.items()}, key=hspace.position)
    rest = gram_schmidt(frame + [SparseVector.basis(lab) for lab in support], tol)[len(frame):]
    if len(frame) + len(rest) != len(support):
        raise RuntimeError("orthonormal completion lost rank")

    fixed_pos = sorted(hspace.position(lab) for lab in support)
    fixed = set(support)
    outside = embed.complement("K-H")
    sizes = [None if hspace.size is None else hspace.size - len(fixed_pos), complement_size]
    if complement_size is not None:
        outside.size = complement_size

    def tail_index(pos: int) -> int:
        return pos - sum(1 for p in fixed_pos if p < pos)

    def tail_label(m: int) -> BasisLabel:
        pos = m
        for p in fixed_pos:
            if p <= pos:
                pos += 1
            else:
                break
        return hspace.label_at(pos)

    def inv(klab):
        if embed.contains(klab):
            hlab = hspace.label_at(embed.position(klab))
            if hlab in fixed:
                return hlab
            p = _merge_position(0, tail_index(hspace.position(hlab)), sizes)
        elif r.domain.contains(klab):
            p = _merge_position(1, outside.position(klab), sizes)
        else:
            return None
        return tail_label(p)

    def fwd(lab):
        if lab in fixed:
            return emb(lab)
        which, m = _merge_locate(tail_index(hspace.position(lab)), sizes)
        return emb(tail_label(m)) if which == 0 else outside.label_at(m)

    unitary = LabelMap(hspace, r.domain, fwd, inv, name=f"U_{n}")
    return BishopApproximant(unitary, r, n, tau, frame, sorted(fixed, key=hspace.position))


def bishop_family(r: Operator, embed: Subspace, t: Operator, *, complement_size: int | None = None, name: str = "bishop", params: dict | None = None) -> FamilyHandle:
    cov_r = covariance_bounds(r).upper
    cov_t = covariance_bounds(t).upper
    return FamilyHandle(
        name,
        params or {},
        t,
        lambda n: bishop_approximant(r, embed, t, n, complement_size=complement_size),
        "strong",
        cov_r,
        cov_t,
    )


def h1_plus_even_h2(space: SumSpace = BLOCK_SPACE) -> Subspace:
    """``H1 (+) span{e_(2,2k)}`` inside a block space."""
    return Subspace(space, lambda lab: lab.path[0] == "1" or (lab.path[0] == "2" and lab.index % 2 == 0), name="H1+evenH2")


def canonical_bishop_family(sigma: float = 1.0) -> FamilyHandle:
    r = canonical_brownian(sigma)
    sub = h1_plus_even_h2(r.domain)
    t = restrict(r, sub)
    return bishop_family(r, sub, t, name="bishop", params={"sigma": sigma, "subspace": "H1+evenH2"})


# ---------------------------------------------------------------------------
# Brownian extensions


def brownian_extension(t: Operator, sigma: float, depth: int = DEFAULT_DEPTH, tol: float = DEFAULT_TOL) -> tuple[Subspace, Operator]:
    """Brownian unitary ``R`` of covariance ``sigma`` extending ``T``.

    Supported inputs: operators already certifying at ``sigma``; unitaries
    (``R = T (+) B`` with ``B`` canonical of covariance ``sigma``);
    restrictions of a Brownian unitary of covariance ``sigma``; and
    ``block_upper`` outputs with unitary ``U``, coordinate isometries
    ``V, E`` with orthogonal ranges and coupling ``sigma``, completed by
    adjoining fresh ``H2`` vectors mapped onto ``H1 (-) (ran V + ran E)``.
    Every result is verified: ``R`` must certify and must extend ``T`` on
    the first ``depth`` labels.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    cov = covariance_bounds(t, depth)
    if cov.lower > sigma + tol:
        raise ValueError(f"sigma={sigma} is below the covariance of T (>= {cov.lower})")

    if brownian_certificate(t, sigma, depth, tol).passed:

        return _verified(whole(t.domain), t, t, sigma, depth, tol)

    if sigma > 0 and brownian_certificate(t, 0.0, depth, tol).passed:
        b = canonical_brownian(sigma)
        r = oplus([t, b])
        sub = Subspace(
            r.domain,
            lambda lab: bool(lab.path) and lab.path[0] == 0,
            enumerator=lambda k: t.domain.label_at(k).prefixed(0),
            locator=lambda lab: t.domain.position(lab.strip()),
            size=t.domain.size,
            name="T-summand",
        )
        return _verified(sub, t, r, sigma, depth, tol)

    if isinstance(t, Restriction) and brownian_certificate(t.base, sigma, depth, tol).passed:
        return _verified(t.sub, t, t.base, sigma, depth, tol)

    if isinstance(t, BlockUpper):
        return _verified(*_complete_block(t, sigma, tol), sigma, depth, tol)

    raise UnsupportedStructure(f"no Brownian extension construction for {t.describe()}")


def _complete_block(t: BlockUpper, sigma: float, tol: float):
    if abs(t.s - sigma) > tol:
        raise UnsupportedStructure("block coupling differs from sigma")
    if not (isinstance(t.v, LabelMap) and isinstance(t.e, LabelMap)):
        raise UnsupportedStructure("V and E must be coordinate isometries")
    if not brownian_certificate(t.u, 0.0).passed:
        raise UnsupportedStructure("U block is not unitary")
    h1 = t.v.domain
    gap = Subspace(h1, lambda lab: t.v.inv(lab) is None and t.e.inv(lab) is None, name="H1-(ranV+ranE)")
    fresh = LeafSpace(())
    h2new = SumSpace([t.u.domain, fresh], (0, 1))

    def e_col(lab):
        if lab.path[0] == 0:
            return t.e.col(lab.strip())
        return SparseVector.basis(gap.label_at(lab.index))

    def e_adj(lab):
        out = t.e.adj_col(lab).map_labels(lambda m: m.prefixed(0))
        if gap.contains(lab):
            out = out + SparseVector.basis(BasisLabel((1,), gap.position(lab)))
        return out

    e_new = ColumnOperator(h2new, h1, e_col, e_adj, band=1, norm_hint=1.0, name="E+J")
    r = block_upper(t.v, e_new, oplus([t.u, identity(fresh)]), t.s)

    def lift(lab):
        return lab if lab.path[0] == "1" else BasisLabel(("2", 0) + lab.path[1:], lab.index)

    def lower(lab):
        if lab.path[0] == "1":
            return lab
        if len(lab.path) >= 2 and lab.path[1] == 0:
            return BasisLabel(("2",) + lab.path[2:], lab.index)
        return None

    sub = Subspace(
        r.domain,
        lambda lab: lower(lab) is not None,
        enumerator=lambda k: lift(t.domain.label_at(k)),
        locator=lambda lab: t.domain.position(lower(lab)),
        size=t.domain.size,
        name="T-space",
    )
    return sub, t, r


def _verified(sub, t, r, sigma, depth, tol):
    check_extension(r, sub, t, depth)
    cert = brownian_certificate(r, sigma, depth, tol)
    if not cert.passed:
        raise UnsupportedStructure(f"constructed extension fails certification: {cert.failed_conditions()}")
    return sub, r


# ---------------------------------------------------------------------------
# registry used by the CLI and the DSL


def _p(params, key, default=None, cast=float):
    if key not in params:
        if default is None:
            raise KeyError(f"missing parameter {key!r}")
        return default
    return cast(params[key])


def family_handle(name: str, params: dict) -> FamilyHandle:
    """Resolve a named family with its parameter object."""
    if name == "js01":
        lam = _p(params, "lambda", math.sqrt(2.0))
        return constant_family("js01", js01_shift(lam), math.sqrt(lam * lam - 1.0), {"lambda": lam})
    if name == "canonical":
        sigma = _p(params, "sigma", 1.0)
        return constant_family("canonical", canonical_brownian(sigma), sigma, {"sigma": sigma})
    if name == "clidr":
        return clidr_family(_p(params, "q", 0.5))
    if name == "prz1":
        return prz1_family(_p(params, "sigma", 1.0))
    if name == "przew2":
        return przew2_family(_p(params, "sigma", 1.0))
    if name == "sslnv":
        return sslnv_family()
    if name == "bishop":
        return canonical_bishop_family(_p(params, "sigma", 1.0))
    raise KeyError(f"unknown family {name!r}")


FAMILY_NAMES = ("js01", "clidr", "canonical", "prz1", "przew2", "sslnv", "bishop")


def family_operator(name: str, params: dict) -> tuple[Operator, float]:
    """A single operator from a named family plus its claimed covariance.

    ``params["n"]`` selects a sequence member (default 1); ``"limit"``
    selects the limit operator. For ``clidr`` the operator is ``T`` itself.
    """
    if name == "clidr":
        return clidr_two_isometry(_p(params, "q", 0.5)), 0.0
    fam = family_handle(name, params)
    which = params.get("n", 1)
    if str(which) == "limit":
        return fam.limit, fam.claimed_limit_cov
    n = int(which)
    return fam.member(n), fam.member_cov(n)
