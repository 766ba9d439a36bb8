import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brownlab.basis import SparseVector, basis_vector, inner, label
from brownlab.certify import brownian_certificate, covariance_bounds, two_isometry_residual
from brownlab.families import (
    BLOCK_SPACE,
    ExtensionMismatch,
    UnsupportedStructure,
    _block_member,
    _odd_part_block,
    bishop_approximant,
    brownian_extension,
    canonical_bishop_family,
    canonical_brownian,
    clidr_family,
    clidr_two_isometry,
    family_handle,
    family_operator,
    h1_plus_even_h2,
    js01_shift,
    power_envelope,
    prz1_family,
    przew2_family,
    sslnv_family,
)
from brownlab.operators import (
    agree,
    block_upper,
    compose,
    diagonal_unitary,
    even_odd_E,
    even_odd_V,
    identity,
    index_map,
    power,
    restrict,
    shift,
)


def test_js01_rejects_small_lambda():
    with pytest.raises(ValueError):
        js01_shift(1.0)


def test_clidr_structure():
    t = clidr_two_isometry(0.5)
    # V e_k = e_(2k+2) and E0 e_k = e_(4k+1): ranges are disjoint and miss e_0
    assert t.col(label(0, "1")) == basis_vector(2, "1")
    col = t.col(label(1, "2"))
    assert col[label(5, "1")] == pytest.approx(math.sqrt(0.5))
    assert col[label(1, "2")] == pytest.approx(math.sqrt(0.5))
    assert two_isometry_residual(t) <= 1e-12
    for q in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            clidr_two_isometry(q)


def test_clidr_is_isometric():
    # derived: (1-q) E0*E0 + q X0*X0 = I on H2 and V*E0 = 0
    cov = covariance_bounds(clidr_two_isometry(0.3))
    assert cov.upper <= 1e-7


@pytest.mark.parametrize("n", range(1, 9))
def test_clidr_power_envelope(n):
    pe = power_envelope(clidr_two_isometry(0.5), n)
    assert pe.E_norm**2 == pytest.approx(1 - 0.5**n, abs=1e-12)
    assert pe.E_norm_matrix == pytest.approx(pe.E_norm, abs=1e-9)
    assert pe.method == "gram-identity"


def test_clidr_power_envelope_at_three():
    assert power_envelope(clidr_two_isometry(0.5), 3).E_norm ** 2 == pytest.approx(7 / 8, abs=1e-12)


def test_clidr_weak_decay_oracle():
    # oracle: T^n e_(1,0) stays in H1 and moves to index 2^(n+1) - 2
    t = clidr_two_isometry(0.5)
    for n in range(1, 12):
        v = power(t, n).col(label(0, "1"))
        assert v == basis_vector(2 ** (n + 1) - 2, "1")
    # H2 vectors decay like q^(n/2) in their own coordinate
    v = power(t, 10).col(label(0, "2"))
    assert abs(v[label(0, "2")]) == pytest.approx(0.5**5)


@pytest.mark.parametrize("n", [1, 4, 16, 64])
def test_canonical_power_envelope(n):
    pe = power_envelope(canonical_brownian(2.0), n)
    assert pe.E_norm == pytest.approx(2 * math.sqrt(n), abs=1e-9)


def test_power_envelope_routes_agree_for_diagonal_u():
    t = block_upper(even_odd_V(), even_odd_E(), diagonal_unitary(lambda k: cmath.exp(0.7j * k)), 1.5)
    for n in range(1, 9):
        pe = power_envelope(t, n)
        assert abs(pe.E_norm - pe.E_norm_matrix) <= 1e-9


def test_power_envelope_general_route():
    t = block_upper(even_odd_V(), even_odd_E(), shift(), 1.0)
    pe = power_envelope(t, 1)
    assert pe.method == "principal-block" and pe.E_norm == pytest.approx(1.0)


def test_power_envelope_rejects_non_block():
    with pytest.raises(TypeError):
        power_envelope(shift(), 2)


def test_canonical_rejects_nonpositive_sigma():
    with pytest.raises(ValueError):
        canonical_brownian(0.0)


@pytest.mark.parametrize("name", ["prz1", "przew2", "sslnv"])
@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_members_certify(name, n):
    fam = family_handle(name, {"sigma": 2.0})
    c = brownian_certificate(fam.member(n), fam.member_cov(n))
    assert c.passed, (name, n, c.failed_conditions())


def test_prz1_member_columns():
    fam = prz1_family(2.0, lambdas=lambda k: 1j, zs=lambda n: -1.0)
    t3 = fam.member(3)
    assert t3.col(label(1)) == 1j * basis_vector(1)
    assert t3.col(label(3)) == 2.0 * basis_vector(4) - basis_vector(3)
    assert t3.col(label(5)) == basis_vector(6)
    assert t3.adj_col(label(4)) == 2.0 * basis_vector(3)


def test_prz1_first_vector_fixed():
    fam = prz1_family(2.0)
    for n in range(1, 10):
        tn = fam.member(n)
        assert tn.col(label(0)) == fam.limit.col(label(0))
        assert tn.adj_col(label(0)) == fam.limit.adj_col(label(0))


def test_prz1_limit_is_unitary():
    assert brownian_certificate(prz1_family(2.0).limit, 0.0).passed


def test_odd_part_partition():
    seen = set()
    for i in range(512):
        j, t = _odd_part_block(i)
        assert j >= 1 and _block_member(j, t) == i
        seen.add(j)
    assert set(range(1, 9)) <= seen


def test_przew2_strong_bound():
    sigma = 2.0
    fam = przew2_family(sigma)
    for n in range(1, 9):
        tn = fam.member(n)
        for k in range(40):
            h = basis_vector(k, "2")
            dev = (tn.apply(h) - fam.limit.apply(h)).norm()
            j, _ = _odd_part_block(k)
            h2n = 1.0 if j > n else 0.0
            assert dev <= (sigma + 2) * h2n + 1e-12


def test_przew2_member_two_depth_32():
    assert brownian_certificate(przew2_family(1.5).member(2), 1.5, depth=32).passed


def test_przew2_limit_is_unitary():
    assert brownian_certificate(przew2_family(1.0).limit, 0.0).passed


def test_przew2_star_deviation_vanishes_past_block():
    fam = przew2_family(1.0)
    h = basis_vector(3, "2") + basis_vector(11, "2") + basis_vector(7, "1")
    top = max(_odd_part_block(3)[0], _odd_part_block(11)[0], _odd_part_block((7 - 1) // 2)[0])
    for n in range(top, top + 4):
        tn = fam.member(n)
        dev = (tn.apply(h) - fam.limit.apply(h)).norm() + (tn.apply_adjoint(h) - fam.limit.apply_adjoint(h)).norm()
        assert dev <= 1e-9


def test_sslnv_norm_gap():
    fam = sslnv_family()
    for n in (1, 2, 5, 10):
        diffs = [(fam.member(n).col(lab) - fam.limit.col(lab)).norm() for lab in BLOCK_SPACE.labels(64)]
        assert max(diffs) == pytest.approx(1.0 / n, abs=1e-12)
    assert brownian_certificate(fam.member(3), 1 / 3).passed


def test_clidr_family_shape():
    fam = clidr_family(0.5)
    assert fam.claimed_mode == "weak_to_zero"
    assert agree(fam.member(2), compose(clidr_two_isometry(0.5), clidr_two_isometry(0.5)), 16)


def test_member_index_starts_at_one():
    with pytest.raises(ValueError):
        prz1_family(1.0).member(0)


# Bishop approximants


@pytest.fixture(scope="module")
def bishop():
    return canonical_bishop_family(1.0)


def test_bishop_fixes_tau(bishop):
    t = bishop.limit
    for n in (1, 3, 8, 16):
        tn = bishop.member(n)
        for lab in t.domain.labels(n):
            assert tn.col(lab) == t.col(lab)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 16])
def test_bishop_covariance_and_residuals_match_r(bishop, n):
    tn = bishop.member(n)
    cov = covariance_bounds(tn)
    assert cov.lower == pytest.approx(1.0, abs=1e-12) and cov.upper == pytest.approx(1.0, abs=1e-12)
    c = brownian_certificate(tn, 1.0)
    assert c.passed
    assert two_isometry_residual(tn) <= 1e-9


def test_bishop_unitary_is_unitary(bishop):
    u = bishop.member(6).unitary
    labs = u.domain.labels(64)
    images = [u.col(lab) for lab in labs]
    assert len({tuple(v.support()) for v in images}) == len(labs)
    for lab in labs:
        assert u.adj_col(u.col(lab).support()[0]) == basis_vector(lab.index, *lab.path)


def test_bishop_strong_convergence(bishop):
    t = bishop.limit
    h = basis_vector(1)
    devs = [(bishop.member(n).apply(h) - t.apply(h)).norm() for n in range(1, 12)]
    assert devs[-1] <= 1e-9
    assert all(d <= 1e-12 for d in devs[1:])


def test_bishop_rejects_non_extension():
    r = canonical_brownian(1.0)
    sub = h1_plus_even_h2(r.domain)
    t = restrict(canonical_brownian(2.0), sub)
    with pytest.raises(ExtensionMismatch):
        bishop_approximant(r, sub, t, 2)


# Brownian extensions


def test_extension_of_brownian_is_itself():
    r = canonical_brownian(1.5)
    emb, ext = brownian_extension(r, 1.5)
    assert ext is r
    assert emb.label_at(3) == r.domain.label_at(3)


def test_extension_of_unitary():
    d = diagonal_unitary(lambda k: cmath.exp(0.4j * k))
    emb, ext = brownian_extension(d, 2.0)
    assert brownian_certificate(ext, 2.0).passed
    for k in range(16):
        assert ext.col(emb.label_at(k)) == d.col(label(k)).map_labels(lambda lab: emb.label_at(lab.index))


def test_extension_of_restriction_round_trip():
    r = canonical_brownian(math.sqrt(2.0))
    t = restrict(r, h1_plus_even_h2(r.domain))
    emb, ext = brownian_extension(t, math.sqrt(2.0))
    assert ext is r
    worst = max((ext.col(emb.label_at(k)) - t.col(label(k)).map_labels(lambda lab: emb.label_at(lab.index))).norm() for k in range(64))
    assert worst == 0.0


def test_extension_completes_block():
    t = block_upper(index_map(2, 2), index_map(4, 1), identity(), 1.0)
    assert not brownian_certificate(t, 1.0).passed
    emb, ext = brownian_extension(t, 1.0)
    assert brownian_certificate(ext, 1.0).passed


def test_extension_rejects_arbitrary_operator():
    with pytest.raises(UnsupportedStructure):
        brownian_extension(js01_shift(2.0), math.sqrt(3.0))


def test_family_operator_registry():
    op, cov = family_operator("prz1", {"sigma": 2.0, "n": "limit"})
    assert cov == 0.0 and brownian_certificate(op, 0.0).passed
    op, cov = family_operator("js01", {"lambda": 2.0})
    assert cov == pytest.approx(math.sqrt(3.0))
    with pytest.raises(KeyError):
        family_handle("nope", {})


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.integers(1, 12))
def test_prz1_bound_dominates_deviation(sigma, n):
    fam = prz1_family(sigma)
    tn = fam.member(n)
    rng = np.random.default_rng(n)
    h = SparseVector({label(k): complex(*rng.standard_normal(2)) for k in range(16)})
    dev = (tn.apply(h) - fam.limit.apply(h)).norm() + (tn.apply_adjoint(h) - fam.limit.apply_adjoint(h)).norm()
    assert dev <= fam.bound(n, h) + 1e-12


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.integers(1, 8))
def test_przew2_bound_dominates_deviation(sigma, n):
    fam = przew2_family(sigma)
    tn = fam.member(n)
    rng = np.random.default_rng(n)
    h = SparseVector({lab: complex(*rng.standard_normal(2)) for lab in BLOCK_SPACE.labels(32)})
    dev = (tn.apply(h) - fam.limit.apply(h)).norm() + (tn.apply_adjoint(h) - fam.limit.apply_adjoint(h)).norm()
    assert dev <= fam.bound(n, h) + 1e-12


def test_weak_pairing_oracle_for_h2():
    # <T^n e_(2,0), e_(2,0)> = q^(n/2) with X = sqrt(q) I
    t = clidr_two_isometry(0.25)
    for n in (1, 2, 5):
        assert inner(basis_vector(0, "2"), power(t, n).col(label(0, "2"))) == pytest.approx(0.25 ** (n / 2))

