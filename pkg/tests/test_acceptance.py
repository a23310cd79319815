from __future__ import annotations

"""One test per acceptance criterion; each prints a single summary line."""

import json
import subprocess
import sys

import numpy as np

from ncid.algebra import AlgebraPair
from ncid.certify import (
    certify,
    family_from_levy_hincin,
    levy_hincin_extract,
    levy_hincin_reconstruct,
)
from ncid.convolution import root
from ncid.cumulants import (
    boolean_from_moments,
    cfree_from_moments,
    free_from_moments,
    functional_of,
    moments_from_boolean,
    moments_from_cfree,
    moments_from_free,
)
from ncid.distribution import generate_realizable, scalar_from_moments
from ncid.errors import CertificateFailed
from ncid.fock import (
    apply_coefficient,
    apply_op,
    boolean_sum_model,
    build_boolean,
    build_cfree,
    build_free,
    cfree_sum_model,
    extract_state,
    free_sum_model,
    model_moment,
    vacuum_vector,
)
from ncid.ncfunctions import (
    NilpotentPoint,
    check_cauchy_relation,
    check_identity,
    check_nc_function_axioms,
    eval_B,
    eval_R,
    eval_cR,
    extract_taylor,
    tensor_compatibility,
)
from ncid.nclattice import (
    discrete_partition,
    enumerate_nc,
    full_partition,
    moebius,
    nc_weights,
)

from conftest import (
    BERNOULLI_MOMENTS,
    SEMICIRCLE_MOMENTS,
    bvalued_realizable,
    cfree_levy_hincin_data,
    divisible_cfree_pair,
    divisible_free,
    free_levy_hincin_data,
    rand_b,
    relerr,
)
from test_fock import centered_word_state, rand_words, run_factorization


def pairs_up_to_two():
    return [
        AlgebraPair.identity(1),
        AlgebraPair.block_diagonal(1, 2),
        AlgebraPair.identity(2),
    ]


def report(num: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"criterion {num} ({name}): {status} {detail}")


def test_criterion_1_round_trips():
    worst = 0.0
    for pair in pairs_up_to_two():
        for seed in range(25):
            mu = generate_realizable(seed, pair, 6, ambient=2 * pair.d)
            nub = bvalued_realizable(seed + 500, pair, 6)

            fam_b = boolean_from_moments(mu)
            back_b = moments_from_boolean(fam_b)
            fam_b2 = boolean_from_moments(back_b)

            fam_f = free_from_moments(nub)
            back_f = moments_from_free(fam_f)
            fam_f2 = free_from_moments(back_f)

            fam_c = cfree_from_moments(mu, nub)
            back_c = moments_from_cfree(fam_c, nub)
            fam_c2 = cfree_from_moments(back_c, nub)

            for n in range(1, 7):
                worst = max(worst, relerr(back_b.raw(n), mu.raw(n)))
                worst = max(worst, relerr(back_f.raw(n), nub.raw(n)))
                worst = max(worst, relerr(back_c.raw(n), mu.raw(n)))
                worst = max(worst, relerr(fam_b2.levels[n], fam_b.levels[n]))
                worst = max(worst, relerr(fam_f2.levels[n], fam_f.levels[n]))
                worst = max(worst, relerr(fam_c2.levels[n], fam_c.levels[n]))
    ok = worst <= 1e-12
    report(1, "moment-cumulant round-trips", ok, f"worst rel err {worst:.2e} <= 1e-12")
    assert ok


def test_criterion_2_moebius_arbitration():
    worst = 0.0
    semicircle = scalar_from_moments(SEMICIRCLE_MOMENTS)
    pair22 = AlgebraPair.identity(2)
    nu22 = generate_realizable(24, pair22, 5, ambient=4)
    rng = np.random.default_rng(2)
    for nu in (semicircle, nu22):
        rho = functional_of("free", free_from_moments(nu))
        for n in range(1, 6):
            b = rand_b(rng, nu.pair.k)
            top = full_partition(n)
            via_moebius = sum(
                nc_weights(s, "f", nu, nu, b) * moebius(s, top)
                for s in enumerate_nc(n)
            )
            worst = max(worst, relerr(rho.eval_word([b] * n), via_moebius))
    mu22 = generate_realizable(25, pair22, 5, ambient=4)
    nu22b = generate_realizable(26, pair22, 5, ambient=4)
    for n in range(1, 6):
        b = rand_b(rng, 2)
        lhs = nc_weights(full_partition(n), "F", mu22, nu22b, b)
        rhs = sum(nc_weights(s, "G", mu22, nu22b, b) for s in enumerate_nc(n))
        worst = max(worst, relerr(lhs, rhs))

    catalan = [1]
    for n in range(1, 11):
        catalan.append(sum(catalan[i] * catalan[n - 1 - i] for i in range(n)))
    counts_ok = all(len(enumerate_nc(n)) == catalan[n] for n in range(1, 11))

    n3 = moebius(discrete_partition(3), full_partition(3))
    moeb_ok = n3 == 2

    bound_ok = True
    for n in range(1, 8):
        top = full_partition(n)
        for s in enumerate_nc(n):
            if abs(moebius(s, top)) > 4**n:
                bound_ok = False
    ok = worst <= 1e-12 and counts_ok and moeb_ok and bound_ok
    report(
        2,
        "Moebius arbitration",
        ok,
        f"worst rel err {worst:.2e} <= 1e-12, Catalan counts {counts_ok}, "
        f"moeb(0_3,1_3)={n3}, |moeb| bound {bound_ok}",
    )
    assert ok


def cumulant_from_ops(model, ops, bs, state="phi"):
    """<ann b1 mid b2 ... mid b_{n-1} cre b_n vac, vac> by operator products."""
    ann, cre, mid = ops
    vec = vacuum_vector(model, state)
    vec = apply_coefficient(model, vec, bs[-1])
    vec = apply_op(model, cre, vec)
    for b in reversed(bs[1:-1]):
        vec = apply_coefficient(model, vec, b)
        vec = apply_op(model, mid, vec)
    vec = apply_coefficient(model, vec, bs[0])
    vec = apply_op(model, ann, vec)
    return extract_state(model, vec, state)


def test_criterion_3_model_formula_equivalence():
    worst = 0.0
    pair22 = AlgebraPair.identity(2)
    semicircle = scalar_from_moments(SEMICIRCLE_MOMENTS)
    mu22 = generate_realizable(7, pair22, 6, ambient=8)
    for mf, seed in ((semicircle, 1), (mu22, 2)):
        model = build_boolean(mf)
        bs = rand_words(seed, mf.pair.k, 4)
        for n in range(1, 5):
            worst = max(worst, relerr(model_moment(model, bs[:n]), mf.eval_word(bs[:n])))
        bfam = boolean_from_moments(mf)
        worst = max(worst, relerr(model_moment(model, bs[:1]), bfam.levels[1] @ mf.pair.embed(bs[0])))
        for n in (2, 3, 4):
            got = cumulant_from_ops(model, ("annihilate", "create", "transfer"), bs[:n])
            worst = max(worst, relerr(got, bfam.evaluate(bs[:n])))

    a1, s1 = free_levy_hincin_data(50, pair22, 6)
    fmodel = build_free(a1, s1)
    ffam = family_from_levy_hincin("free", a1, s1)
    nu = moments_from_free(ffam)
    bs = rand_words(3, 2, 4)
    for n in range(1, 5):
        worst = max(worst, relerr(model_moment(fmodel, bs[:n]), nu.eval_word(bs[:n])))
    for n in (2, 3, 4):
        got = cumulant_from_ops(fmodel, ("annihilate", "create", "insert"), bs[:n])
        worst = max(worst, relerr(got, ffam.evaluate(bs[:n])))

    a2, s2 = cfree_levy_hincin_data(52, pair22, 6)
    cmodel = build_cfree(a1, s1, a2, s2)
    cfam = family_from_levy_hincin("cfree", a2, s2)
    mu = moments_from_cfree(cfam, nu)
    for n in range(1, 5):
        worst = max(worst, relerr(model_moment(cmodel, bs[:n], state="theta"), mu.eval_word(bs[:n])))
        worst = max(worst, relerr(model_moment(cmodel, bs[:n], state="phi"), nu.eval_word(bs[:n])))
    for n in (2, 3, 4):
        got = cumulant_from_ops(cmodel, ("k_annihilate", "k_create", "k_insert"), bs[:n], state="theta")
        worst = max(worst, relerr(got, cfam.evaluate(bs[:n])))
    ok = worst <= 1e-10
    report(3, "model-formula equivalence", ok, f"worst rel err {worst:.2e} <= 1e-10")
    assert ok


def test_criterion_4_independence_properties():
    pair22 = AlgebraPair.identity(2)
    worst = 0.0

    mus = [generate_realizable(s, pair22, 6, ambient=8) for s in (7, 8)]
    bmodel = boolean_sum_model(mus)
    bs = rand_words(11, 2, 3)
    for tags in ([0, 1], [0, 0, 1], [0, 1, 1], [0, 1, 0]):
        got = model_moment(bmodel, bs[: len(tags)], components=list(tags))
        want = run_factorization(mus, list(tags), bs[: len(tags)])
        worst = max(worst, relerr(got, want))

    frees = [free_levy_hincin_data(s, pair22, 6) for s in (50, 51)]
    fmodel = free_sum_model(frees)
    margs = [
        moments_from_free(family_from_levy_hincin("free", a, s)) for a, s in frees
    ]
    bs = rand_words(12, 2, 4)
    for tags in ([0, 1], [0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]):
        cs = bs[: len(tags)]
        centers = [margs[t].eval_word([c]) for t, c in zip(tags, cs)]
        out = centered_word_state(fmodel, list(tags), cs, centers, state="phi")
        worst = max(worst, float(np.abs(out).max()))

    cfrees = [cfree_levy_hincin_data(s, pair22, 6) for s in (52, 53)]
    cmodel = cfree_sum_model(
        [(a1, s1, a2, s2) for (a1, s1), (a2, s2) in zip(frees, cfrees)]
    )
    cmus = [
        moments_from_cfree(family_from_levy_hincin("cfree", a, s), nu)
        for (a, s), nu in zip(cfrees, margs)
    ]
    bs = rand_words(13, 2, 3)
    for tags in ([0, 1], [1, 0], [0, 1, 0]):
        cs = bs[: len(tags)]
        centers = [margs[t].eval_word([c]) for t, c in zip(tags, cs)]
        lhs = centered_word_state(cmodel, list(tags), cs, centers, state="theta")
        rhs = np.eye(2, dtype=complex)
        for t, c, q in zip(tags, cs, centers):
            rhs = rhs @ (cmus[t].eval_word([c]) - q)
        worst = max(worst, relerr(lhs, rhs))
    ok = worst <= 1e-12
    report(4, "independence properties", ok, f"worst residual {worst:.2e} <= 1e-12")
    assert ok


def test_criterion_5_divisibility_certificates():
    semicircle = scalar_from_moments(SEMICIRCLE_MOMENTS)
    bernoulli = scalar_from_moments(BERNOULLI_MOMENTS)

    boolean_ok = True
    for pair in pairs_up_to_two():
        for seed in range(25):
            mf = generate_realizable(seed, pair, 6, ambient=2 * pair.d)
            r = root("boolean", mf, 2 + seed % 4)
            if not certify("boolean", r, 3).passed:
                boolean_ok = False

    semi_ok = certify("free", semicircle, 3).passed
    for n in (2, 3):
        if not certify("free", root("free", semicircle, n), 3).passed:
            semi_ok = False

    bad = certify("free", bernoulli, 2)
    coeffs = np.asarray(bad.witness["coeffs"]) if bad.witness else np.zeros(2)
    bern_ok = (
        not bad.passed
        and abs(bad.min_eig + 1.0) < 1e-9
        and abs(abs(coeffs[1]) - 1.0) < 1e-9
    )

    cfree_ok = certify("cfree", (semicircle, semicircle), 3).passed
    ok = boolean_ok and semi_ok and bern_ok and cfree_ok
    report(
        5,
        "divisibility certificates",
        ok,
        f"boolean roots {boolean_ok}, semicircle+roots {semi_ok}, "
        f"bernoulli min_eig {bad.min_eig:.9f} witness X^2 {bern_ok}, "
        f"cfree(semi,semi) {cfree_ok}",
    )
    assert ok


def test_criterion_6_root_asymptotics():
    semicircle = scalar_from_moments(SEMICIRCLE_MOMENTS)
    fams = {
        "boolean": boolean_from_moments(semicircle).levels,
        "free": free_from_moments(semicircle).levels,
        "cfree": cfree_from_moments(semicircle, semicircle).levels,
    }
    ratios = {}
    for kind, levels in fams.items():
        errs = []
        for big_n in (100, 200):
            if kind == "cfree":
                r, _ = root("cfree", (semicircle, semicircle), big_n)
            else:
                r = root(kind, semicircle, big_n)
            worst = 0.0
            for n in range(1, 5):
                worst = max(worst, float(np.abs(big_n * r.raw(n) - levels[n]).max()))
            errs.append(worst)
        ratios[kind] = errs[1] / errs[0]
    ok = all(0.4 <= v <= 0.6 for v in ratios.values())
    detail = ", ".join(f"{k} {v:.3f}" for k, v in ratios.items())
    report(6, "1/N root asymptotics", ok, f"err(200)/err(100): {detail} in [0.4,0.6]")
    assert ok


def test_criterion_7_transform_identities():
    pair22 = AlgebraPair.identity(2)
    mu22 = generate_realizable(7, pair22, 6, ambient=8)
    nu22 = generate_realizable(8, pair22, 6, ambient=8)
    semicircle = scalar_from_moments(SEMICIRCLE_MOMENTS)

    res_b = check_identity("B", mu22, order=3, probes=50)
    res_r = check_identity("R", mu22, order=3, probes=50)
    res_c = check_identity("cR", mu22, nu22, order=3, probes=50)
    ident_ok = all(r["pass"] for r in (res_b, res_r, res_c))
    ident_worst = max(r["residual"] for r in (res_b, res_r, res_c))

    res_g = check_cauchy_relation(mu22, order=4, probes=10)
    res_ax = check_nc_function_axioms(mu22, order=3, probes=20)

    taylor_worst = 0.0
    cs = rand_words(16, 2, 4)
    bfam = boolean_from_moments(mu22)
    ffam = free_from_moments(mu22)
    for m in range(1, 5):
        taylor_worst = max(
            taylor_worst, relerr(extract_taylor(mu22, cs[:m], "M"), mu22.eval_word(cs[:m]))
        )
        taylor_worst = max(
            taylor_worst, relerr(extract_taylor(mu22, cs[:m], "B"), bfam.evaluate(cs[:m]))
        )
        taylor_worst = max(
            taylor_worst, relerr(extract_taylor(mu22, cs[:m], "R"), ffam.evaluate(cs[:m]))
        )

    res_t1 = tensor_compatibility(semicircle, 3, order=3, probes=10)
    res_t2 = tensor_compatibility(mu22, 2, order=3, probes=10)

    ok = (
        ident_ok
        and ident_worst <= 1e-10
        and res_g["pass"]
        and res_g["residual"] <= 1e-9
        and res_ax["pass"]
        and res_ax["residual"] <= 1e-10
        and taylor_worst <= 1e-12
        and res_t1["pass"]
        and res_t2["pass"]
        and max(res_t1["residual"], res_t2["residual"]) <= 1e-10
    )
    report(
        7,
        "transform identities",
        ok,
        f"identities {ident_worst:.2e} <= 1e-10, Laurent {res_g['residual']:.2e} <= 1e-9, "
        f"axioms {res_ax['residual']:.2e}, Taylor {taylor_worst:.2e} <= 1e-12, "
        f"tensor {max(res_t1['residual'], res_t2['residual']):.2e}",
    )
    assert ok


def test_criterion_8_levy_hincin():
    pair22 = AlgebraPair.identity(2)
    mu22 = generate_realizable(7, pair22, 6, ambient=8)
    bernoulli = scalar_from_moments(BERNOULLI_MOMENTS)
    rng = np.random.default_rng(80)
    worst = 0.0

    alpha, sigma = levy_hincin_extract("boolean", mu22)
    for _ in range(5):
        point = NilpotentPoint.random(rng, int(rng.integers(2, 5)), 2, scale=0.6)
        got = levy_hincin_reconstruct("boolean", alpha, sigma, point)
        worst = max(worst, relerr(got, eval_B(mu22, point)))

    nu = divisible_free(64, pair22)
    alpha_f, sigma_f = levy_hincin_extract("free", nu)
    for _ in range(5):
        point = NilpotentPoint.random(rng, int(rng.integers(2, 5)), 2, scale=0.6)
        got = levy_hincin_reconstruct("free", alpha_f, sigma_f, point)
        worst = max(worst, relerr(got, eval_R(nu, point)))

    mu_c, nu_c = divisible_cfree_pair(66, pair22)
    alpha_c, sigma_c = levy_hincin_extract("cfree", (mu_c, nu_c))
    for _ in range(5):
        point = NilpotentPoint.random(rng, int(rng.integers(2, 5)), 2, scale=0.6)
        got = levy_hincin_reconstruct("cfree", alpha_c, sigma_c, point)
        worst = max(worst, relerr(got, eval_cR(mu_c, nu_c, point)))

    refused = False
    witness_form = 0.0
    cert_tol = 0.0
    try:
        levy_hincin_extract("free", bernoulli)
    except CertificateFailed as exc:
        refused = True
        witness_form = float(exc.certificate.witness["quadratic_form"])
        cert_tol = exc.certificate.tol
    refusal_ok = refused and witness_form <= -cert_tol
    ok = worst <= 1e-10 and refusal_ok
    report(
        8,
        "Levy-Hincin extraction",
        ok,
        f"extract-reconstruct {worst:.2e} <= 1e-10, refusal witness form "
        f"{witness_form:.3e} <= -tol",
    )
    assert ok


def test_criterion_9_cli_determinism(tmp_path):
    cli = [sys.executable, "-m", "ncid.cli"]

    def run(*args):
        return subprocess.run(cli + list(args), capture_output=True, text=True, timeout=300)

    gen_args = ("gen", "--k", "2", "--d", "2", "--trunc", "6", "--seed", "11")
    one, two = run(*gen_args), run(*gen_args)
    gen_ok = one.returncode == 0 and one.stdout == two.stdout

    path = tmp_path / "law.json"
    path.write_text(one.stdout)
    ext1 = run("extract", "--kind", "boolean", str(path))
    ext2 = run("extract", "--kind", "boolean", str(path))
    ext_ok = ext1.returncode == 0 and ext1.stdout == ext2.stdout

    from ncid.serialize import dumps, functional_to_json

    bern = tmp_path / "bern.json"
    bern.write_text(dumps(functional_to_json(scalar_from_moments(BERNOULLI_MOMENTS))))
    cert = run("certify", "--kind", "free", "--degree", "2", str(bern))
    exit_ok = cert.returncode == 2 and json.loads(cert.stdout)["pass"] is False

    ok = gen_ok and ext_ok and exit_ok
    report(
        9,
        "CLI determinism",
        ok,
        f"gen byte-identical {gen_ok}, extract byte-identical {ext_ok}, "
        f"bernoulli certify exit code {cert.returncode}",
    )
    assert ok
