import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brownlab.basis import SparseVector, basis_vector, inner, label
from brownlab.families import BLOCK_SPACE, canonical_brownian, cyclic_permutation, js01_shift
from brownlab.operators import (
    LEAF,
    InvarianceError,
    SpaceMismatch,
    add_scale,
    adjoint,
    adjoint_consistency,
    agree,
    block_upper,
    codefect,
    compose,
    compress,
    defect,
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
from brownlab.spaces import LeafSpace, Subspace, component, finite_subspace

DEPTH = 24

leaf_atoms = st.sampled_from(
    [
        shift(),
        adjoint(shift()),
        even_odd_V(),
        even_odd_E(),
        index_map(3, 1),
        weighted_shift(lambda k: 1.0 + 1.0 / (k + 1), sup=2.0),
        diagonal(lambda k: complex(math.cos(k), 0.5 * math.sin(k)), sup=1.2),
        identity(),
        js01_shift(1.5),
    ]
)
coeffs = st.builds(complex, st.floats(-2, 2), st.floats(-2, 2))


def _tree(children):
    return st.one_of(
        st.builds(lambda a, b: compose(a, b), children, children),
        st.builds(lambda a, x, b, y: add_scale(x, a, y, b), children, coeffs, children, coeffs),
        st.builds(adjoint, children),
        st.builds(lambda a: power(a, 2), children),
    )


leaf_ops = st.recursive(leaf_atoms, _tree, max_leaves=4)
block_ops = st.builds(lambda v, u, s: block_upper(v, even_odd_E(), u, s), st.sampled_from([even_odd_V(), index_map(2, 2)]), st.sampled_from([identity(), shift(), adjoint(shift())]), st.floats(0.1, 3))


def test_shift_columns():
    s = shift()
    assert s.col(label(2)) == basis_vector(3)
    assert s.adj_col(label(0)) == SparseVector.zero()
    assert s.adj_col(label(3)) == basis_vector(2)


def test_weighted_shift_adjoint():
    w = weighted_shift(lambda k: k + 1.0)
    assert w.col(label(1)) == 2.0 * basis_vector(2)
    assert w.adj_col(label(2)) == 2.0 * basis_vector(1)


def test_dense_matrix_block():
    m = np.array([[1, 2j], [3, 4]])
    op = matrix(m)
    assert np.allclose(principal_block(op, 2), m)
    assert np.allclose(principal_block(adjoint(op), 2), m.conj().T)


def test_diagonal_unitary_rejects_non_unimodular():
    d = diagonal_unitary(lambda k: 1.0 if k < 3 else 0.5)
    assert d.col(label(1)) == basis_vector(1)
    with pytest.raises(ValueError):
        d.col(label(3))


def test_compose_checks_spaces():
    with pytest.raises(SpaceMismatch):
        compose(shift(), canonical_brownian(1.0))


def test_power_zero_and_adjoint_involution():
    t = js01_shift(2.0)
    assert agree(power(t, 0), identity(), DEPTH)
    assert adjoint(adjoint(t)) is t
    assert agree(power(t, 3), compose(t, t, t), DEPTH)


def test_oplus_default_tags_and_action():
    t = oplus([shift(), identity()])
    assert t.domain.tags == (0, 1)
    assert t.col(label(2, 0)) == basis_vector(3, 0)
    assert t.col(label(2, 1)) == basis_vector(2, 1)


def test_block_upper_columns():
    t = block_upper(even_odd_V(), even_odd_E(), identity(), 2.0)
    assert t.domain == BLOCK_SPACE
    assert t.col(label(3, "1")) == basis_vector(6, "1")
    assert t.col(label(3, "2")) == 2.0 * basis_vector(7, "1") + basis_vector(3, "2")
    assert t.adj_col(label(7, "1")) == 2.0 * basis_vector(3, "2")


def test_canonical_defect_is_scaled_projection():
    # derived: T*T - I = sigma^2 P_H2 for [[V, sE], [0, I]]
    sigma = 1.7
    t = canonical_brownian(sigma)
    target = add_scale(sigma**2, projection(component(BLOCK_SPACE, "2")), 0.0, zero(BLOCK_SPACE))
    assert agree(defect(t), target, 32, 1e-12)


def test_isometry_codefect():
    v = even_odd_V()
    assert all(defect(v).col(lab).norm() == 0 for lab in LEAF.labels(16))
    assert codefect(v).col(label(1)) == -basis_vector(1)


def test_restrict_checks_invariance():
    s = shift()
    with pytest.raises(InvarianceError):
        restrict(s, finite_subspace(LEAF, LEAF.labels(3)))
    tail = Subspace(LEAF, lambda lab: lab.index >= 2, name="tail")
    r = restrict(s, tail)
    assert r.col(label(0)) == basis_vector(1)


def test_restrict_lazily_detects_escape():
    # invariant on the checked window only
    sub = Subspace(LEAF, lambda lab: lab.index <= 10)
    r = restrict(shift(), sub, check_depth=4)
    with pytest.raises(InvarianceError):
        r.col(label(10))


def test_cyclic_compression_is_not_normal():
    # derived: compressing e_k -> e_(k+1 mod 3) to span{e0, e1} gives the nilpotent Jordan block
    p = cyclic_permutation(3)
    b = compress(p, finite_subspace(p.domain, p.domain.labels(2)))
    blk = principal_block(b, 2)
    assert np.allclose(blk, [[0, 0], [1, 0]])
    comm = blk.conj().T @ blk - blk @ blk.conj().T
    assert abs(np.linalg.norm(comm, 2) - 1.0) <= 1e-12


def test_compression_adjoint_commutes():
    t = canonical_brownian(1.3)
    sub = component(BLOCK_SPACE, "1")
    assert agree(compress(adjoint(t), sub), adjoint(compress(t, sub)), 24)


def test_compression_embed():
    t = canonical_brownian(1.0)
    c = compress(t, component(BLOCK_SPACE, "2"))
    assert c.embed(basis_vector(1)) == basis_vector(1, "2")


@settings(max_examples=40, deadline=None)
@given(leaf_ops)
def test_adjoint_consistency_leaf(t):
    assert adjoint_consistency(t, 12) <= 1e-9 * max(1.0, t.norm_hint or 1.0) ** 4


@settings(max_examples=25, deadline=None)
@given(block_ops)
def test_adjoint_consistency_block(t):
    assert adjoint_consistency(t, 16) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(leaf_ops, leaf_ops, leaf_ops)
def test_compose_associative(a, b, c):
    lhs = compose(compose(a, b), c)
    rhs = compose(a, compose(b, c))
    for lab in LEAF.labels(8):
        x, y = lhs.col(lab), rhs.col(lab)
        assert (x - y).norm() <= 1e-9 * max(1.0, x.norm())


@settings(max_examples=30, deadline=None)
@given(leaf_ops, leaf_ops)
def test_adjoint_of_product(a, b):
    lhs = adjoint(compose(a, b))
    rhs = compose(adjoint(b), adjoint(a))
    for lab in LEAF.labels(8):
        x, y = lhs.col(lab), rhs.col(lab)
        assert (x - y).norm() <= 1e-9 * max(1.0, x.norm())


@settings(max_examples=30, deadline=None)
@given(leaf_ops, st.integers(0, 6), st.integers(0, 6))
def test_inner_product_adjoint_identity(t, i, j):
    # <e_i, T e_j> = <T* e_i, e_j>
    lhs = inner(basis_vector(i), t.col(label(j)))
    rhs = inner(t.adj_col(label(i)), basis_vector(j))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_finite_space_operator():
    op = matrix(np.eye(2))
    assert op.domain == LeafSpace((), 2)
    assert op.domain.labels(5) == [label(0), label(1)]
