from __future__ import annotations

import numpy as np
import pytest

from ncid.algebra import matrix_units
from ncid.certify import (
    Certificate,
    SigmaForm,
    certify,
    gram,
    levy_hincin_extract,
    levy_hincin_reconstruct,
    sigma_gram,
)
from ncid.convolution import root
from ncid.cumulants import free_from_moments, functional_of
from ncid.distribution import generate_realizable
from ncid.errors import CertificateFailed, NCIDError, TruncationExceeded
from ncid.ncfunctions import NilpotentPoint, eval_B, eval_R, eval_cR

from conftest import (
    divisible_cfree_pair,
    divisible_free,
    relerr,
)


def rho_gram(mf, degree):
    fam = functional_of("free", free_from_moments(mf))
    return gram(fam, degree, no_free_term=True)


def test_free_gram_semicircle(semicircle):
    mat, labels = rho_gram(semicircle, 2)
    assert labels == [(0,), (0, 0)]
    assert np.allclose(mat, [[1.0, 0.0], [0.0, 0.0]], atol=1e-12)


def test_free_gram_bernoulli(bernoulli):
    mat, _ = rho_gram(bernoulli, 2)
    assert np.allclose(mat, [[1.0, 0.0], [0.0, -1.0]], atol=1e-12)


def test_gram_degree_validation(mu22):
    with pytest.raises(TruncationExceeded):
        gram(mu22, 4)
    with pytest.raises(NCIDError):
        gram(mu22, 0)


def word_pair_value(mf, left, right):
    """phi(m_left^* m_right) through eval_word, independent of gram's lookup."""
    units = matrix_units(mf.pair.k)
    k = mf.pair.k
    coeffs = [units[u].conj().T for u in reversed(left[1:])]
    coeffs.append(units[left[0]].conj().T @ units[right[0]])
    coeffs.extend(units[u] for u in right[1:])
    coeffs.append(np.eye(k, dtype=complex))
    return mf.eval_word(coeffs)


def test_gram_matches_polynomial_pairing(mu22):
    mat, labels = gram(mu22, 2, no_free_term=True)
    d = mu22.pair.d
    for i, wi in enumerate(labels):
        for j, wj in enumerate(labels):
            want = word_pair_value(mu22, wi, wj)
            got = mat[i * d : (i + 1) * d, j * d : (j + 1) * d]
            assert relerr(got, want) < 1e-12


def test_spanning_compression_soundness(mu22, pair22):
    """Polynomial families with arbitrary coefficients inherit positivity
    from the monomial Gram."""
    mat, labels = gram(mu22, 3, no_free_term=False)
    scale = max(1.0, float(np.abs(mat).max()))
    assert np.linalg.eigvalsh(mat)[0] > -1e-10 * scale
    rng = np.random.default_rng(60)
    nm = mat.shape[0]
    for _ in range(20):
        r = int(rng.integers(2, 7))
        c = rng.normal(size=(nm, r)) + 1j * rng.normal(size=(nm, r))
        fammat = c.conj().T @ mat @ c
        fammat = 0.5 * (fammat + fammat.conj().T)
        fscale = max(1.0, float(np.abs(fammat).max()))
        assert np.linalg.eigvalsh(fammat)[0] > -1e-8 * fscale


def test_condition1_certifies_realizable(pair22, pair24):
    for seed, pair, ambient in ((0, pair22, 4), (1, pair22, 6), (2, pair24, 8)):
        mf = generate_realizable(seed, pair, 6, ambient=ambient)
        cert = certify("condition1", mf, 3)
        assert cert.passed
        assert cert.witness is None


def test_boolean_certifies_realizable(mu22, mu24):
    for mf in (mu22, mu24):
        cert = certify("boolean", mf, 3)
        assert cert.passed


def test_free_certificate_semicircle_and_bernoulli(semicircle, bernoulli):
    good = certify("free", semicircle, 2)
    assert good.passed
    bad = certify("free", bernoulli, 2)
    assert not bad.passed
    assert abs(bad.min_eig - (-1.0)) < 1e-9
    assert bad.witness is not None
    coeffs = np.asarray(bad.witness["coeffs"])
    # witness concentrates on X^2, the monomial with negative rho-square
    assert abs(abs(coeffs[1]) - 1.0) < 1e-9
    # reproduce the quadratic form from kappa values independently
    kappa = {2: 1.0, 3: 0.0, 4: -1.0}
    form = 0.0
    for a in (1, 2):
        for b in (1, 2):
            form += (np.conj(coeffs[a - 1]) * coeffs[b - 1] * kappa[a + b]).real
    assert abs(form - bad.witness["quadratic_form"]) < 1e-8
    assert bad.witness["quadratic_form"] < -0.5


def test_cfree_certificate_on_divisible_pair(pair22):
    mu, nu = divisible_cfree_pair(61, pair22)
    cert = certify("cfree", (mu, nu), 3)
    assert cert.passed


def test_unknown_kind_rejected(mu22):
    with pytest.raises(NCIDError):
        certify("monotone", mu22, 2)


def test_certificate_json_key_order(semicircle, bernoulli):
    good = certify("free", semicircle, 2).to_json()
    assert list(good) == ["kind", "degree", "min_eig", "tol", "pass"]
    bad = certify("free", bernoulli, 2).to_json()
    assert list(bad) == ["kind", "degree", "min_eig", "tol", "pass", "witness"]
    assert list(bad["witness"]) == ["coeffs", "quadratic_form"]


def test_sigma_gram_of_bordered_form_is_psd(mu22):
    sigma = SigmaForm.from_bordered(mu22, values_in="D")
    mat, _ = sigma_gram(sigma, sigma.truncation // 2)
    scale = max(1.0, float(np.abs(mat).max()))
    assert np.linalg.eigvalsh(mat)[0] > -1e-10 * scale
    with pytest.raises(TruncationExceeded):
        sigma_gram(sigma, sigma.truncation)


def test_boolean_extract_always_succeeds(mu22, mu24):
    for mf in (mu22, mu24):
        alpha, sigma = levy_hincin_extract("boolean", mf)
        assert alpha.shape == (mf.pair.d, mf.pair.d)
        assert sigma.values_in == "D"
        assert sigma.truncation == mf.truncation - 2


def test_free_extract_gates_on_certificate(bernoulli, pair22):
    nu = divisible_free(62, pair22)
    alpha, sigma = levy_hincin_extract("free", nu)
    assert sigma.values_in == "B"
    with pytest.raises(CertificateFailed) as exc:
        levy_hincin_extract("free", bernoulli)
    cert = exc.value.certificate
    assert isinstance(cert, Certificate)
    assert not cert.passed
    assert cert.witness["quadratic_form"] < -1e-9


def test_extract_reconstruct_boolean(mu22):
    alpha, sigma = levy_hincin_extract("boolean", mu22)
    rng = np.random.default_rng(63)
    for _ in range(5):
        m = int(rng.integers(2, 5))
        point = NilpotentPoint.random(rng, m, 2, scale=0.6)
        got = levy_hincin_reconstruct("boolean", alpha, sigma, point)
        assert relerr(got, eval_B(mu22, point)) < 1e-10


def test_extract_reconstruct_free(pair22):
    nu = divisible_free(64, pair22)
    alpha, sigma = levy_hincin_extract("free", nu)
    rng = np.random.default_rng(65)
    for _ in range(5):
        m = int(rng.integers(2, 5))
        point = NilpotentPoint.random(rng, m, 2, scale=0.6)
        got = levy_hincin_reconstruct("free", alpha, sigma, point)
        assert relerr(got, eval_R(nu, point)) < 1e-10


def test_extract_reconstruct_cfree(pair22):
    mu, nu = divisible_cfree_pair(66, pair22)
    alpha, sigma = levy_hincin_extract("cfree", (mu, nu))
    rng = np.random.default_rng(67)
    for _ in range(5):
        m = int(rng.integers(2, 5))
        point = NilpotentPoint.random(rng, m, 2, scale=0.6)
        got = levy_hincin_reconstruct("cfree", alpha, sigma, point)
        assert relerr(got, eval_cR(mu, nu, point)) < 1e-10


def test_reconstruct_rejects_deep_points(mu22):
    alpha, sigma = levy_hincin_extract("boolean", mu22)
    rng = np.random.default_rng(68)
    point = NilpotentPoint.random(rng, 8, 2, scale=0.5)
    with pytest.raises(TruncationExceeded):
        levy_hincin_reconstruct("boolean", alpha, sigma, point)


def test_roots_recertify(mu22, pair22):
    broot = root("boolean", mu22, 4)
    assert certify("boolean", broot, 3).passed

    nu = divisible_free(69, pair22)
    froot = root("free", nu, 3)
    assert certify("free", froot, 3).passed

    mu, nv = divisible_cfree_pair(70, pair22)
    cmu, cnu = root("cfree", (mu, nv), 3)
    assert certify("cfree", (cmu, cnu), 3).passed
