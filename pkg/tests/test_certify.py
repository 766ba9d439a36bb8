import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brownlab.basis import label
from brownlab.certify import (
    brownian_certificate,
    covariance_bounds,
    norm_bound,
    two_isometry_operator,
    two_isometry_residual,
)
from brownlab.families import canonical_brownian, h1_plus_even_h2, js01_shift, js01_weight, shift_corner_operator, sslnv_family
from brownlab.operators import diagonal_unitary, identity, oplus, restrict, weighted_shift


def js01_defect_oracle(lam: float, n: int) -> np.ndarray:
    """Diagonal of T*T - I for the js01 shift, from the closed-form weights."""
    a = lam * lam - 1.0
    k = np.arange(n)
    return (1 + (k + 1) * a) / (1 + k * a) - 1.0


def test_canonical_passes_with_exact_covariance():
    for sigma in (0.5, 1.0, 2.0):
        c = brownian_certificate(canonical_brownian(sigma), sigma)
        assert c.passed, c.failed_conditions()
        assert c.cov.lower == pytest.approx(sigma, abs=1e-12)
        assert c.cov.upper == pytest.approx(sigma, abs=1e-12)


def test_canonical_norm_attains_bound():
    nb = norm_bound(canonical_brownian(2.0))
    assert nb.lower >= math.sqrt(5.0) - 1e-9
    assert nb.upper <= math.sqrt(5.0) + 1e-9


def test_js01_condition_iii_defect_matches_oracle():
    # P = D / sigma^2 is diagonal, so |P^2 - P| = |d(d - 1)| entrywise
    d = js01_defect_oracle(math.sqrt(2.0), 64)
    expected = float(np.max(np.abs(d * (d - 1.0))))
    assert expected == pytest.approx(0.25)
    assert int(np.argmax(np.abs(d * (d - 1.0)))) == 1
    c = brownian_certificate(js01_shift(math.sqrt(2.0)), 1.0)
    assert c.res_iii == pytest.approx(expected, abs=1e-12)
    assert "iii" in c.failed_conditions()
    assert c.verdict["i"]


def test_js01_covariance_matches_oracle():
    for lam in (math.sqrt(2.0), 1.5, 3.0):
        d = js01_defect_oracle(lam, 64)
        cov = covariance_bounds(js01_shift(lam))
        assert cov.lower == pytest.approx(math.sqrt(d.max()), abs=1e-12)
        assert cov.upper == pytest.approx(math.sqrt(lam * lam - 1), abs=1e-12)


def test_js01_weight_at_zero():
    assert js01_weight(math.sqrt(2.0), 0) == pytest.approx(math.sqrt(2.0))


def test_two_isometry_operator_is_zero_on_js01():
    t = js01_shift(1.5)
    assert two_isometry_residual(t) <= 1e-12
    assert two_isometry_operator(t).col(label(5)).norm() <= 1e-12


def test_shift_corner_fails_only_condition_ii():
    # derived: D = sigma^2 P_H2 and D(TT* - I)D = sigma^4 (SS* - I) on H2
    sigma = 2.0
    c = brownian_certificate(shift_corner_operator(sigma), sigma)
    assert c.failed_conditions() == ["ii"]
    assert c.res_ii == pytest.approx(sigma**4, abs=1e-9)


def test_orthogonal_sum_mixed_covariances():
    # derived: the sigma=1 summand contributes P = P_H2 / 4, so |P^2 - P| = 3/16
    c = brownian_certificate(oplus([canonical_brownian(1.0), canonical_brownian(2.0)]), 2.0)
    assert c.res_iii == pytest.approx(3 / 16, abs=1e-12)
    assert not c.passed
    ok = brownian_certificate(oplus([canonical_brownian(2.0), diagonal_unitary(lambda k: 1j**k)]), 2.0)
    assert ok.passed
    same = brownian_certificate(oplus([canonical_brownian(2.0), canonical_brownian(2.0)]), 2.0)
    assert same.passed


def test_restricted_canonical_fails_condition_iv():
    # derived: on the gap vectors the defect of condition (iv) is sigma^10 = 32 for sigma = sqrt(2)
    sigma = math.sqrt(2.0)
    r = canonical_brownian(sigma)
    t = restrict(r, h1_plus_even_h2(r.domain))
    c = brownian_certificate(t, sigma)
    assert c.failed_conditions() == ["iv"]
    assert c.res_iv == pytest.approx(sigma**10, rel=1e-12)


def test_sigma_zero_checks_unitarity():
    c = brownian_certificate(diagonal_unitary(lambda k: cmath.exp(1j * k)), 0.0)
    assert c.passed and c.res_ii is None
    lim = sslnv_family().limit
    c = brownian_certificate(lim, 0.0)
    assert not c.passed
    assert c.coisometry_res == pytest.approx(1.0, abs=1e-12)
    assert c.isometry_res == 0.0


def test_sigma_one_uses_nabla_directly():
    c = brownian_certificate(canonical_brownian(1.0), 1.0)
    assert c.res_iv == 0.0 and c.passed


def test_covariance_mismatch_fails():
    c = brownian_certificate(canonical_brownian(2.0), 1.5)
    assert not c.verdict["cov"]
    assert not c.passed


def test_bad_arguments():
    with pytest.raises(ValueError):
        brownian_certificate(identity(), -1.0)
    with pytest.raises(ValueError):
        brownian_certificate(identity(), 1.0, tol=0.0)
    with pytest.raises(ValueError):
        covariance_bounds(identity(), depth=0)


def test_certificate_json_shape():
    j = brownian_certificate(canonical_brownian(2.0), 2.0, depth=8).to_json()
    assert set(j) == {"sigma", "depth", "tol", "residuals", "cov", "verdict"}
    assert set(j["residuals"]) >= {"i", "ii", "iii", "iv", "unitary"}
    assert j["verdict"]["overall"] is True


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 4.0))
def test_canonical_certifies_for_any_sigma(sigma):
    assert brownian_certificate(canonical_brownian(sigma), sigma, depth=24).passed


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.0, 2 * math.pi), min_size=1, max_size=8), st.floats(0.2, 3.0))
def test_canonical_with_phases_certifies(phases, sigma):
    u = lambda k: cmath.exp(1j * phases[k % len(phases)])  # noqa: E731
    assert brownian_certificate(canonical_brownian(sigma, u), sigma, depth=24).passed


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.3, 2.5), min_size=1, max_size=10))
def test_covariance_interval_contains_true_value(ws):
    # true covariance of a weighted shift: sqrt(sup |w_k^2 - 1|)
    t = weighted_shift(lambda k: ws[k] if k < len(ws) else 1.0, sup=max(ws + [1.0]))
    truth = math.sqrt(max(abs(w * w - 1.0) for w in ws))
    cov = covariance_bounds(t, depth=16)
    assert cov.lower - 1e-12 <= truth <= cov.upper + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.3, 2.5), min_size=1, max_size=10))
def test_norm_interval_contains_true_value(ws):
    t = weighted_shift(lambda k: ws[k] if k < len(ws) else 1.0, sup=max(ws + [1.0]))
    truth = max(ws + [1.0])
    nb = norm_bound(t, depth=16)
    assert nb.lower - 1e-12 <= truth <= nb.upper + 1e-12
