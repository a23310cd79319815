"""Additive convolutions and convolution roots via cumulant linearity."""

from __future__ import annotations

from .cumulants import (
    CumulantFamily,
    boolean_from_moments,
    cfree_from_moments,
    free_from_moments,
    moments_from_boolean,
    moments_from_cfree,
    moments_from_free,
)
from .distribution import MomentFunctional
from .errors import NCIDError, PairMismatch


def _check_pairs(items):
    first = items[0].pair
    for it in items[1:]:
        if not first.same_pair(it.pair):
            raise PairMismatch("operands live over different algebra pairs")
    return first


def _sum_families(fams) -> CumulantFamily:
    pair = _check_pairs(fams)
    trunc = min(f.truncation for f in fams)
    levels = {}
    for n in range(1, trunc + 1):
        total = fams[0].levels[n]
        for f in fams[1:]:
            total = total + f.levels[n]
        levels[n] = total
    return CumulantFamily(kind=fams[0].kind, pair=pair, truncation=trunc, levels=levels)


def boolean_convolve(mus) -> MomentFunctional:
    mus = list(mus)
    if len(mus) == 1:
        return mus[0]
    return moments_from_boolean(_sum_families([boolean_from_moments(m) for m in mus]))


def free_convolve(nus) -> MomentFunctional:
    nus = list(nus)
    if len(nus) == 1:
        return nus[0]
    return moments_from_free(_sum_families([free_from_moments(n) for n in nus]))


def cfree_convolve(pairs):
    """Convolve (mu_i, nu_i) pairs; returns (mu_c, nu_c) with nu_c the free
    convolution and mu_c inverted from the summed c-free cumulants."""
    pairs = list(pairs)
    if len(pairs) == 1:
        return pairs[0]
    nus = [nu for _, nu in pairs]
    nu_c = free_convolve(nus)
    ck = _sum_families([cfree_from_moments(mu, nu) for mu, nu in pairs])
    return moments_from_cfree(ck, nu_c), nu_c


def root(kind: str, data, n: int):
    """N-th convolution root: divides the cumulant family by N and inverts.

    The result is a formal moment functional; positivity may fail, and that
    failure is the non-divisibility witness the certifier looks for.
    """
    if n < 1:
        raise NCIDError(f"root order must be >= 1, got {n}")
    scale = 1.0 / n
    if kind == "boolean":
        return moments_from_boolean(boolean_from_moments(data).scaled(scale))
    if kind == "free":
        return moments_from_free(free_from_moments(data).scaled(scale))
    if kind == "cfree":
        mu, nu = data
        nu_n = moments_from_free(free_from_moments(nu).scaled(scale))
        ck_n = cfree_from_moments(mu, nu).scaled(scale)
        return moments_from_cfree(ck_n, nu_n), nu_n
    raise NCIDError(f"unknown convolution kind {kind!r}")
