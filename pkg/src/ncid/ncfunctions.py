"""Matricial function transforms on nilpotent arguments.

All transforms are evaluated as terminating series over strictly increasing
index paths of a strictly upper triangular matrix point, so every value here
is exact polynomial algebra, no analytic continuation involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .algebra import AlgebraPair
from .cumulants import (
    boolean_from_moments,
    cfree_from_moments,
    free_from_moments,
)
from .distribution import MomentFunctional, contract_units, level_shape
from .errors import (
    DimensionMismatch,
    NCIDError,
    NotBValued,
    OrderExceedsTruncation,
    TruncationExceeded,
)


@dataclass(frozen=True, eq=False)
class NilpotentPoint:
    """Strictly upper triangular element of M_m(B), entries (m, m, k, k)."""

    m: int
    k: int
    entries: np.ndarray

    @classmethod
    def from_entries(cls, entries) -> "NilpotentPoint":
        entries = np.asarray(entries, dtype=complex)
        if entries.ndim != 4 or entries.shape[0] != entries.shape[1]:
            raise DimensionMismatch("entries must have shape (m, m, k, k)")
        if entries.shape[2] != entries.shape[3]:
            raise DimensionMismatch("blocks must be square")
        m = entries.shape[0]
        for i in range(m):
            for j in range(i + 1):
                if np.abs(entries[i, j]).max(initial=0.0) > 0:
                    raise DimensionMismatch(
                        "only strictly upper triangular points are supported"
                    )
        return cls(m=m, k=entries.shape[2], entries=entries)

    @classmethod
    def random(cls, rng, m: int, k: int, scale: float = 1.0) -> "NilpotentPoint":
        entries = np.zeros((m, m, k, k), dtype=complex)
        for i in range(m):
            for j in range(i + 1, m):
                entries[i, j] = scale * (
                    rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
                )
        return cls(m=m, k=k, entries=entries)

    @property
    def index(self) -> int:
        """Nilpotency index: least r with point^r = 0."""
        power = self.entries
        for r in range(1, self.m + 1):
            if np.abs(power).max(initial=0.0) == 0:
                return r
            power = np.einsum("ilab,ljbc->ijac", power, self.entries)
        return self.m + 1


def triangular_probe(coeffs) -> NilpotentPoint:
    """Superdiagonal point with the given (k, k) coefficients b1, ..., bm."""
    coeffs = [np.asarray(c, dtype=complex) for c in coeffs]
    k = coeffs[0].shape[0]
    m = len(coeffs) + 1
    entries = np.zeros((m, m, k, k), dtype=complex)
    for i, c in enumerate(coeffs):
        if c.shape != (k, k):
            raise DimensionMismatch("probe coefficients must share one shape")
        entries[i, i + 1] = c
    return NilpotentPoint(m=m, k=k, entries=entries)


TriangularProbe = triangular_probe


def _point_entries(point, k: int) -> np.ndarray:
    entries = np.asarray(getattr(point, "entries", point), dtype=complex)
    if entries.ndim != 4 or entries.shape[2] != k or entries.shape[3] != k:
        raise DimensionMismatch(f"point must have (m, m, {k}, {k}) entries")
    return entries


def eval_series(levels: dict, pair: AlgebraPair, point, include_identity: bool):
    """Sum of amplified values over strictly increasing index paths.

    levels[p] holds the (k2,)**(p-1) + (d, d) value tensor of words with p
    letters; a path i = t0 < t1 < ... < tp = j contributes the value of the
    word X b[t0, t1] X b[t1, t2] ... X b[t_{p-1}, t_p], the trailing edge
    multiplying on the right through the embedding.
    """
    entries = _point_entries(point, pair.k)
    m = entries.shape[0]
    max_stored = max(levels) if levels else 0
    # Longest chain of nonzero blocks decides which series degrees occur;
    # support adjacency has no cancellation, unlike powers of the point.
    adj = (np.abs(entries).max(axis=(2, 3)) > 0).astype(float)
    longest, power = 0, adj
    while power.max(initial=0.0) > 0:
        longest += 1
        power = power @ adj
    if longest > max_stored:
        raise TruncationExceeded(
            f"series needs {longest} levels, stored {max_stored}"
        )
    d = pair.d
    out = np.zeros((m, m, d, d), dtype=complex)
    if include_identity:
        for i in range(m):
            out[i, i] = np.eye(d)
    embedded = pair.embed_tensor(entries)
    for i in range(m):
        for j in range(i + 1, m):
            acc = np.zeros((d, d), dtype=complex)
            for p in range(1, min(j - i, max_stored) + 1):
                for mids in combinations(range(i + 1, j), p - 1):
                    nodes = (i,) + mids + (j,)
                    inner = [
                        entries[nodes[s], nodes[s + 1]] for s in range(p - 1)
                    ]
                    acc = acc + contract_units(levels[p], inner) @ embedded[
                        nodes[p - 1], j
                    ]
            out[i, j] = acc
    return out


def eval_M(mu: MomentFunctional, point):
    """Moment transform 1 + sum of amplified moments of (bX)^p."""
    return eval_series(mu.levels, mu.pair, point, include_identity=True)


def eval_B(mu: MomentFunctional, point):
    return eval_series(
        boolean_from_moments(mu).levels, mu.pair, point, include_identity=False
    )


def eval_R(nu: MomentFunctional, point):
    return eval_series(
        free_from_moments(nu).levels, nu.pair, point, include_identity=False
    )


def eval_cR(mu: MomentFunctional, nu: MomentFunctional, point):
    return eval_series(
        cfree_from_moments(mu, nu).levels, mu.pair, point, include_identity=False
    )


def extract_taylor(mu: MomentFunctional, coeffs, transform: str = "M"):
    """Taylor term of a transform along the superdiagonal probe.

    With probe coefficients b1, ..., bm the only increasing path through the
    corner runs along the superdiagonal, so the (0, m) block returns exactly
    the degree-m term: the moment of X b1 X b2 ... X bm for transform M, the
    corresponding cumulant value otherwise.
    """
    probe = triangular_probe(coeffs)
    if transform == "M":
        val = eval_M(mu, probe)
    elif transform == "B":
        val = eval_B(mu, probe)
    elif transform == "R":
        val = eval_R(mu, probe)
    else:
        raise NCIDError(f"unknown transform {transform!r}")
    return np.asarray(val[0, probe.m - 1])


def _bprod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ilab,ljbc->ijac", a, b)


def _pullback_blocks(pair: AlgebraPair, blocks: np.ndarray, tol: float = 1e-10):
    m = blocks.shape[0]
    out = np.zeros((m, m, pair.k, pair.k), dtype=complex)
    for i in range(m):
        for j in range(m):
            if np.abs(blocks[i, j]).max(initial=0.0) > 0:
                out[i, j] = pair.pullback(blocks[i, j], tol=tol)
    return out


def _strict_upper_or_raise(blocks: np.ndarray) -> None:
    m = blocks.shape[0]
    for i in range(m):
        for j in range(i + 1):
            if np.abs(blocks[i, j]).max(initial=0.0) > 1e-12:
                raise NCIDError("transform argument is not strictly upper")


def _rel_err(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(1.0, float(np.abs(lhs).max(initial=0.0)), float(np.abs(rhs).max(initial=0.0)))
    return float(np.abs(lhs - rhs).max(initial=0.0)) / scale


def check_identity(
    name: str,
    mu: MomentFunctional,
    nu: MomentFunctional | None = None,
    order: int = 4,
    seed: int = 0,
    probes: int = 50,
    tol: float = 1e-10,
) -> dict:
    """Residual check of the transform functional equations on random points.

    B:  M_mu(b) - 1 = B_mu(b) M_mu(b)
    R:  M_nu(b) - 1 = R_nu(b M_nu(b))
    cR: (M_mu(b) - 1) M_nu(b) = M_mu(b) cR_{mu,nu}(b M_nu(b))
    """
    if name not in ("B", "R", "cR"):
        raise NCIDError(f"unknown identity {name!r}")
    pair = mu.pair
    if order > mu.truncation or (nu is not None and order > nu.truncation):
        raise OrderExceedsTruncation(
            f"identity check at order {order} exceeds stored truncation"
        )
    if name == "B":
        series = boolean_from_moments(mu).levels
    elif name == "R":
        series = free_from_moments(mu).levels
    else:
        if nu is None:
            raise NCIDError("identity cR needs the second functional")
        series = cfree_from_moments(mu, nu).levels
    rng = np.random.default_rng(seed)
    m = order + 1
    worst = 0.0
    for _ in range(probes):
        point = NilpotentPoint.random(rng, m, pair.k, scale=0.7)
        if name == "B":
            mm = eval_M(mu, point)
            lhs = mm.copy()
            for i in range(m):
                lhs[i, i] = lhs[i, i] - np.eye(pair.d)
            rhs = _bprod(eval_series(series, pair, point, False), mm)
        elif name == "R":
            mm = eval_M(mu, point)
            arg = _bprod(pair.embed_tensor(point.entries), mm)
            _strict_upper_or_raise(arg)
            lhs = mm.copy()
            for i in range(m):
                lhs[i, i] = lhs[i, i] - np.eye(pair.d)
            rhs = eval_series(series, pair, _pullback_blocks(pair, arg), False)
        else:
            mmu = eval_M(mu, point)
            mnu = eval_M(nu, point)
            lhs = mmu.copy()
            for i in range(m):
                lhs[i, i] = lhs[i, i] - np.eye(pair.d)
            lhs = _bprod(lhs, mnu)
            arg = _bprod(pair.embed_tensor(point.entries), mnu)
            _strict_upper_or_raise(arg)
            rhs = _bprod(
                mmu, eval_series(series, pair, _pullback_blocks(pair, arg), False)
            )
        worst = max(worst, _rel_err(lhs, rhs))
    return {
        "identity": name,
        "order": order,
        "seed": seed,
        "probes": probes,
        "residual": worst,
        "pass": worst <= tol,
    }


def check_cauchy_relation(
    mu: MomentFunctional,
    order: int = 4,
    seed: int = 0,
    probes: int = 10,
    tol: float = 1e-9,
) -> dict:
    """Laurent-order comparison of the resolvent against the boolean series.

    At b = lambda(1 - c) with c nilpotent the resolvent expands as
    G = sum_s t^{s+1} G_s in t = 1/lambda, its inverse H as
    sum_r t^{r-1} H_r.  The boolean transform relation gives, order by
    order, delta_{r0} 1 - H_r G_0 = [B-series of (X (1-c)^{-1})^r].
    """
    if order > mu.truncation:
        raise OrderExceedsTruncation(
            f"relation check at order {order} exceeds truncation {mu.truncation}"
        )
    pair = mu.pair
    k, d = pair.k, pair.d
    rng = np.random.default_rng(seed)
    m = order + 1
    bstored = boolean_from_moments(mu).levels
    worst = 0.0
    for _ in range(probes):
        c = NilpotentPoint.random(rng, m, k, scale=0.5).entries
        # p0 = (1 - c)^{-1} as an upper triangular element of M_m(B)
        p0 = np.zeros((m, m, k, k), dtype=complex)
        for i in range(m):
            p0[i, i] = np.eye(k)
        power = c.copy()
        while np.abs(power).max(initial=0.0) > 0:
            p0 = p0 + power
            power = _bprod(power, c)
        ep0 = pair.embed_tensor(p0)
        g0 = _flat(ep0, d)
        gs = [g0]
        for s in range(1, order + 1):
            gs.append(_flat(_bprod(ep0, _amplified_word_values(mu.levels, pair, p0, s)), d))
        h0 = np.linalg.inv(g0)
        hs = [h0]
        for r in range(1, order + 1):
            acc = np.zeros_like(h0)
            for s in range(1, r + 1):
                acc = acc + hs[r - s] @ gs[s]
            hs.append(-(acc @ h0))
        for r in range(order + 1):
            lhs = -(hs[r] @ g0)
            if r == 0:
                lhs = lhs + np.eye(m * d)
            rhs = _flat(_boolean_path_series(bstored, pair, p0, r), d)
            worst = max(worst, _rel_err(lhs, rhs))
    return {
        "identity": "G",
        "order": order,
        "seed": seed,
        "probes": probes,
        "residual": worst,
        "pass": worst <= tol,
    }


def _flat(blocks: np.ndarray, v: int) -> np.ndarray:
    m = blocks.shape[0]
    return blocks.transpose(0, 2, 1, 3).reshape(m * v, m * v)


def _amplified_word_values(levels, pair, coeff: np.ndarray, p: int) -> np.ndarray:
    """id_m tensor mu applied to (X coeff)^p for upper triangular coeff."""
    m = coeff.shape[0]
    d = pair.d
    out = np.zeros((m, m, d, d), dtype=complex)
    embedded = pair.embed_tensor(coeff)
    for i in range(m):
        for j in range(i, m):
            acc = np.zeros((d, d), dtype=complex)
            for nodes in _monotone_paths(i, j, p):
                inner = [coeff[nodes[s], nodes[s + 1]] for s in range(p - 1)]
                acc = acc + contract_units(levels[p], inner) @ embedded[
                    nodes[p - 1], j
                ]
            out[i, j] = acc
    return out


def _boolean_path_series(bstored, pair, coeff: np.ndarray, r: int) -> np.ndarray:
    """Order-r boolean term: values of (X coeff)^r; empty at r = 0."""
    if r == 0:
        return np.zeros((coeff.shape[0],) * 2 + (pair.d, pair.d), dtype=complex)
    return _amplified_word_values(bstored, pair, coeff, r)


def _monotone_paths(i: int, j: int, p: int):
    """Node tuples i = t0 <= t1 <= ... <= tp = j (p edges, non-strict)."""
    if p == 0:
        if i == j:
            yield (i,)
        return
    def rec(prefix, remaining):
        last = prefix[-1]
        if remaining == 1:
            if last <= j:
                yield prefix + (j,)
            return
        for t in range(last, j + 1):
            yield from rec(prefix + (t,), remaining - 1)
    yield from rec((i,), p)


def check_nc_function_axioms(
    mu: MomentFunctional,
    order: int = 3,
    seed: int = 0,
    probes: int = 20,
    tol: float = 1e-10,
) -> dict:
    """Direct sums and similarities for the moment transform.

    Similarities use unipotent upper triangular scalar matrices, which keep
    strictly upper arguments strictly upper.
    """
    pair = mu.pair
    k, d = pair.k, pair.d
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        m1 = int(rng.integers(1, order + 1))
        m2 = int(rng.integers(1, order + 1))
        b1 = NilpotentPoint.random(rng, m1, k, scale=0.7)
        b2 = NilpotentPoint.random(rng, m2, k, scale=0.7)
        m = m1 + m2
        direct = np.zeros((m, m, k, k), dtype=complex)
        direct[:m1, :m1] = b1.entries
        direct[m1:, m1:] = b2.entries
        got = eval_M(mu, direct)
        want = np.zeros((m, m, d, d), dtype=complex)
        want[:m1, :m1] = eval_M(mu, b1)
        want[m1:, m1:] = eval_M(mu, b2)
        worst = max(worst, _rel_err(got, want))

        b = NilpotentPoint.random(rng, m, k, scale=0.7)
        s = np.eye(m, dtype=complex)
        for i in range(m):
            for j in range(i + 1, m):
                s[i, j] = rng.standard_normal() + 1j * rng.standard_normal()
        sinv = np.linalg.inv(s)
        conj = np.einsum("il,ljab,jp->ipab", s, b.entries, sinv)
        got = eval_M(mu, conj)
        want = np.einsum("il,ljab,jp->ipab", s, eval_M(mu, b), sinv)
        worst = max(worst, _rel_err(got, want))
    return {
        "identity": "axioms",
        "order": order,
        "seed": seed,
        "probes": probes,
        "residual": worst,
        "pass": worst <= tol,
    }


def amplify_functional(mu: MomentFunctional, n: int, truncation: int) -> MomentFunctional:
    """The functional id_{M_n} tensor mu over the pair (nk, nd).

    Words in M_n(B)<X> are expanded entrywise in M_n(B<X>) and mu applied to
    every entry, which on matrix-unit tuples is a delta chain along the M_n
    legs times the original value tensor.
    """
    pair = mu.pair
    k, d = pair.k, pair.d
    nk, nd = n * k, n * d
    if truncation > mu.truncation:
        raise TruncationExceeded(
            f"amplification to degree {truncation} exceeds stored {mu.truncation}"
        )
    embed = np.zeros((nd * nd, nk * nk), dtype=complex)
    for r in range(n):
        for s in range(n):
            for a in range(k):
                for b in range(k):
                    col = (r * k + a) * nk + (s * k + b)
                    big = np.zeros((nd, nd), dtype=complex)
                    big[
                        r * d : (r + 1) * d, s * d : (s + 1) * d
                    ] = pair.embedded_units[a * k + b]
                    embed[:, col] = big.reshape(-1)
    big_pair = AlgebraPair(k=nk, d=nd, embed_matrix=embed)
    levels = {}
    for p in range(1, truncation + 1):
        shape = level_shape(nk, nd, p)
        lev = np.zeros(shape, dtype=complex)
        base = mu.levels[p]
        for units in np.ndindex(*(nk * nk,) * (p - 1)):
            parts = [divmod(u, nk) for u in units]
            rs = [(idx[0] // k, idx[1] // k) for idx in parts]
            ab = [(idx[0] % k) * k + (idx[1] % k) for idx in parts]
            ok = all(rs[t][1] == rs[t + 1][0] for t in range(len(rs) - 1))
            if not ok:
                continue
            small = base[tuple(ab)] if p > 1 else base
            r0 = rs[0][0] if rs else None
            s_last = rs[-1][1] if rs else None
            block = np.zeros((nd, nd), dtype=complex)
            if rs:
                block[
                    r0 * d : (r0 + 1) * d, s_last * d : (s_last + 1) * d
                ] = small
            else:
                for r in range(n):
                    block[r * d : (r + 1) * d, r * d : (r + 1) * d] = small
            lev[units] = block
        levels[p] = lev
    return MomentFunctional(pair=big_pair, truncation=truncation, levels=levels)


def tensor_compatibility(
    mu: MomentFunctional,
    n: int,
    order: int = 3,
    seed: int = 0,
    probes: int = 10,
    tol: float = 1e-10,
) -> dict:
    """Amplification compatibility: evaluating the transform of the
    n-amplified functional at m x m points agrees with evaluating the
    original transform at the regrouped (mn) x (mn) point."""
    pair = mu.pair
    k = pair.k
    amp = amplify_functional(mu, n, order)
    rng = np.random.default_rng(seed)
    m = order + 1
    worst = 0.0
    for _ in range(probes):
        big = NilpotentPoint.random(rng, m, n * k, scale=0.6)
        small_entries = np.zeros((m * n, m * n, k, k), dtype=complex)
        for i in range(m):
            for j in range(m):
                blk = big.entries[i, j]
                for r in range(n):
                    for s in range(n):
                        small_entries[i * n + r, j * n + s] = blk[
                            r * k : (r + 1) * k, s * k : (s + 1) * k
                        ]
        got = eval_M(amp, big)
        flatgot = _flat(got, n * pair.d)
        want = eval_M(mu, small_entries)
        flatwant = _regroup(want, m, n, pair.d)
        worst = max(worst, _rel_err(flatgot, flatwant))
    return {
        "identity": "tensor",
        "order": order,
        "seed": seed,
        "probes": probes,
        "residual": worst,
        "pass": worst <= tol,
    }


def _regroup(blocks: np.ndarray, m: int, n: int, d: int) -> np.ndarray:
    """(mn, mn, d, d) block matrix as a flat (m n d) square matrix."""
    return blocks.transpose(0, 2, 1, 3).reshape(m * n * d, m * n * d)
