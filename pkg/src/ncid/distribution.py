"""Truncated B-bimodule moment functionals on B<X> and their generation.

A MomentFunctional stores, for each 1 <= n <= N, the values
mu(X u_1 X u_2 ... u_{n-1} X) on all (n-1)-tuples of matrix units of B as a
tensor of shape (k^2,)*(n-1) + (d,d). Everything else follows from
B-bimodularity: a word b_0 X b_1 ... X b_n evaluates as
embed(b_0) . contract(level_n, b_1..b_{n-1}) . embed(b_n).
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .algebra import AlgebraPair, adjoint, adjoint_unit, cnorm
from .errors import DimensionMismatch, SeedExhausted, TruncationExceeded


def contract_units(tensor: np.ndarray, coeffs) -> np.ndarray:
    """Contract leading k^2 axes of a stored tensor with B-coefficients."""
    out = tensor
    for b in coeffs:
        out = np.tensordot(np.asarray(b, dtype=np.complex128).reshape(-1), out, axes=([0], [0]))
    return out


def level_shape(k: int, d: int, n: int) -> tuple:
    return (k * k,) * (n - 1) + (d, d)


@dataclasses.dataclass(frozen=True, eq=False)
class PolynomialWord:
    """The monomial b_0 X b_1 X ... X b_n; degree = number of X letters."""

    coefficients: tuple

    def __post_init__(self):
        object.__setattr__(
            self,
            "coefficients",
            tuple(np.asarray(c, dtype=np.complex128) for c in self.coefficients),
        )
        if len(self.coefficients) < 1:
            raise DimensionMismatch("a word needs at least the degree-0 coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


@dataclasses.dataclass(frozen=True, eq=False)
class MomentFunctional:
    """Element of the truncated moment space over an AlgebraPair.

    Parameters
    ----------
    pair : AlgebraPair
        The inclusion B in D.
    truncation : int
        Highest stored degree N.
    levels : dict
        levels[n] has shape (k^2,)*(n-1) + (d,d) for n = 1..N and holds the
        values on matrix-unit tuples of the words X u_1 X ... u_{n-1} X.
    """

    pair: AlgebraPair
    truncation: int
    levels: dict

    def __post_init__(self):
        k, d = self.pair.k, self.pair.d
        lv = {}
        for n in range(1, self.truncation + 1):
            if n not in self.levels:
                raise DimensionMismatch(f"missing moment level {n}")
            t = np.asarray(self.levels[n], dtype=np.complex128)
            want = level_shape(k, d, n)
            if t.shape != want:
                raise DimensionMismatch(f"level {n} has shape {t.shape}, expected {want}")
            lv[n] = t
        object.__setattr__(self, "levels", lv)

    def raw(self, n: int) -> np.ndarray:
        if n < 1 or n > self.truncation:
            raise TruncationExceeded(f"level {n} outside stored range 1..{self.truncation}")
        return self.levels[n]

    def eval_word(self, coeffs) -> np.ndarray:
        """mu(X c_1 X c_2 ... X c_n) for B-coefficients c_i, value in D."""
        n = len(coeffs)
        if n == 0:
            return np.eye(self.pair.d, dtype=np.complex128)
        core = contract_units(self.raw(n), coeffs[: n - 1])
        return core @ self.pair.embed(coeffs[n - 1])

    def star_residual(self) -> float:
        """Deviation from *-compatibility across all stored levels."""
        k = self.pair.k
        perm = np.array([adjoint_unit(u, k) for u in range(k * k)])
        worst = 0.0
        for n in range(1, self.truncation + 1):
            t = self.raw(n)
            slots = n - 1
            ta = adjoint(t)
            ta = np.transpose(ta, tuple(reversed(range(slots))) + (slots, slots + 1))
            for ax in range(slots):
                ta = np.take(ta, perm, axis=ax)
            worst = max(worst, cnorm(t - ta))
        return worst


def moment(mu: MomentFunctional, w: PolynomialWord) -> np.ndarray:
    """Evaluate mu on a bordered word b_0 X b_1 ... X b_n."""
    cs = w.coefficients
    n = w.degree
    if n > mu.truncation:
        raise TruncationExceeded(f"word degree {n} exceeds truncation {mu.truncation}")
    left = mu.pair.embed(cs[0])
    if n == 0:
        return left
    return left @ mu.eval_word(list(cs[1:]))


def eval_linear(mu: MomentFunctional, terms) -> np.ndarray:
    """Evaluate a formal sum of (complex scalar, PolynomialWord) pairs."""
    out = np.zeros((mu.pair.d, mu.pair.d), dtype=np.complex128)
    for scale, w in terms:
        out = out + complex(scale) * moment(mu, w)
    return out


def scalar_from_moments(ms) -> MomentFunctional:
    """Wrap a scalar moment sequence m_1..m_N (k = d = 1)."""
    pair = AlgebraPair.identity(1)
    levels = {}
    for n, m in enumerate(ms, start=1):
        levels[n] = np.full((1,) * (n - 1) + (1, 1), complex(m), dtype=np.complex128)
    return MomentFunctional(pair=pair, truncation=len(tuple(ms)), levels=levels)


def _representation_frame(pair: AlgebraPair, m: int, rng: np.random.Generator):
    """Isometry V with (b (x) 1_{m/k}) V = V embed(b), via a basis adapted
    to the embedding."""
    k, d = pair.k, pair.d
    r = d // k
    p11 = pair.embed(pair.units[0])
    # Orthonormal basis of range(embed(e11)), a rank d/k projection.
    vals, vecs = np.linalg.eigh((p11 + adjoint(p11)) / 2.0)
    base = vecs[:, vals > 0.5]
    if base.shape[1] != r:
        raise DimensionMismatch("embedding projection rank mismatch")
    u = np.zeros((d, d), dtype=np.complex128)
    for i in range(k):
        ei1 = np.zeros((k, k), dtype=np.complex128)
        ei1[i, 0] = 1.0
        block = pair.embed(ei1) @ base
        u[:, i * r : (i + 1) * r] = block
    g = rng.standard_normal((m // k, r)) + 1j * rng.standard_normal((m // k, r))
    w, _ = np.linalg.qr(g)
    v = np.kron(np.eye(k, dtype=np.complex128), w) @ adjoint(u)
    return v


def generate_realizable(seed: int, pair: AlgebraPair, truncation: int, ambient: int) -> MomentFunctional:
    """Seeded GNS-style construction: moments of a random selfadjoint matrix
    compressed by an isometry intertwining B's action.

    The result satisfies the block-positivity condition by construction and
    is *-compatible up to rounding. Raises SeedExhausted when no unital
    B-representation of the requested ambient size exists.
    """
    k, d = pair.k, pair.d
    if ambient < d or ambient % k != 0:
        raise SeedExhausted(
            f"no unital representation of M_{k} on C^{ambient} compatible with d={d}"
        )
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((ambient, ambient)) + 1j * rng.standard_normal((ambient, ambient))
    a = (g + adjoint(g)) / 2.0
    a = a / max(1.0, float(np.linalg.norm(a, 2)))
    v = _representation_frame(pair, ambient, rng)

    mult = ambient // k
    reps = np.stack([np.kron(pair.units[u], np.eye(mult, dtype=np.complex128)) for u in range(k * k)])
    ap_u = np.einsum("mn,unp->ump", a, reps)

    levels = {}
    chain = a @ v  # (ambient, d); grows one unit axis per extra letter
    for n in range(1, truncation + 1):
        levels[n] = np.einsum("mc,...md->...cd", np.conj(v), chain)
        if n < truncation:
            chain = np.einsum("ump,...pd->u...md", ap_u, chain)
    return MomentFunctional(pair=pair, truncation=truncation, levels=levels)
