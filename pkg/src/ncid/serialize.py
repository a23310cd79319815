"""Deterministic JSON encoding of distributions, cumulant families and reports.

Every float is rendered with repr-faithful '%.17g' formatting and complex
numbers as two-element [re, im] arrays, so identical data always produces
byte-identical output regardless of platform or dict ordering history.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .algebra import AlgebraPair
from .cumulants import CumulantFamily
from .distribution import MomentFunctional, level_shape
from .errors import DimensionMismatch, NCIDError

_KINDS = ("boolean", "free", "cfree")


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise NCIDError("cannot serialize non-finite float")
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return format(x, ".17g")


def _emit(obj, out: list) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(key)))
            out.append(":")
            _emit(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, val in enumerate(obj):
            if i:
                out.append(",")
            _emit(val, out)
        out.append("]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append("[" + _fmt(obj.real) + "," + _fmt(obj.imag) + "]")
    elif obj is None:
        out.append("null")
    else:
        raise NCIDError(f"cannot serialize object of type {type(obj).__name__}")


def dumps(obj) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out)


def tensor_to_json(t: np.ndarray):
    """Nested row-major lists; innermost entries are [re, im] pairs."""
    a = np.asarray(t, dtype=complex)
    if a.ndim == 0:
        return complex(a[()])
    return [tensor_to_json(a[i]) for i in range(a.shape[0])]


def _parse_complex(entry) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry)
    if (
        isinstance(entry, list)
        and len(entry) == 2
        and all(isinstance(x, (int, float)) for x in entry)
    ):
        return complex(entry[0], entry[1])
    raise DimensionMismatch(f"expected a number or [re, im] pair, got {entry!r}")


def tensor_from_json(data, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=complex)
    def fill(node, idx):
        depth = len(idx)
        if depth == len(shape):
            out[idx] = _parse_complex(node)
            return
        if not isinstance(node, list) or len(node) != shape[depth]:
            raise DimensionMismatch(
                f"expected a list of length {shape[depth]} at depth {depth}"
            )
        for i, sub in enumerate(node):
            fill(sub, idx + (i,))
    fill(data, ())
    return out


def _require(data: dict, key: str, kind=None):
    if not isinstance(data, dict) or key not in data:
        raise DimensionMismatch(f"missing required field {key!r}")
    val = data[key]
    if kind is not None and not isinstance(val, kind):
        raise DimensionMismatch(f"field {key!r} has wrong type")
    return val


def pair_to_json(pair: AlgebraPair) -> dict:
    return {
        "k": pair.k,
        "d": pair.d,
        "embed": tensor_to_json(pair.embed_matrix),
    }


def pair_from_json(data: dict) -> AlgebraPair:
    k = _require(data, "k", int)
    d = _require(data, "d", int)
    if k < 1 or d < 1:
        raise DimensionMismatch("k and d must be positive")
    embed = tensor_from_json(_require(data, "embed"), (d * d, k * k))
    pair = AlgebraPair(k=k, d=d, embed_matrix=embed)
    pair.validate()
    return pair


def _levels_to_json(levels: dict, trunc: int) -> dict:
    return {str(n): tensor_to_json(levels[n]) for n in range(1, trunc + 1)}


def _levels_from_json(data, pair: AlgebraPair, trunc: int) -> dict:
    if not isinstance(data, dict):
        raise DimensionMismatch("moment table must be an object")
    levels = {}
    for n in range(1, trunc + 1):
        node = data.get(str(n))
        if node is None:
            raise DimensionMismatch(f"missing moment level {n}")
        levels[n] = tensor_from_json(node, level_shape(pair.k, pair.d, n))
    return levels


def functional_to_json(mf: MomentFunctional) -> dict:
    out = pair_to_json(mf.pair)
    out["truncation"] = mf.truncation
    out["moments"] = _levels_to_json(mf.levels, mf.truncation)
    return out


def functional_from_json(data: dict) -> MomentFunctional:
    pair = pair_from_json(data)
    trunc = _require(data, "truncation", int)
    if trunc < 1:
        raise DimensionMismatch("truncation must be >= 1")
    levels = _levels_from_json(_require(data, "moments"), pair, trunc)
    return MomentFunctional(pair=pair, truncation=trunc, levels=levels)


def family_to_json(fam: CumulantFamily) -> dict:
    out = {"kind": fam.kind}
    out.update(pair_to_json(fam.pair))
    out["truncation"] = fam.truncation
    out["moments"] = _levels_to_json(fam.levels, fam.truncation)
    return out


def family_from_json(data: dict) -> CumulantFamily:
    kind = _require(data, "kind", str)
    if kind not in _KINDS:
        raise DimensionMismatch(f"unknown cumulant kind {kind!r}")
    mf = functional_from_json(data)
    return CumulantFamily(
        kind=kind, pair=mf.pair, truncation=mf.truncation, levels=mf.levels
    )


def pair_file_to_json(mu: MomentFunctional, nu: MomentFunctional) -> dict:
    return {"mu": functional_to_json(mu), "nu": functional_to_json(nu)}


def pair_file_from_json(data: dict):
    return (
        functional_from_json(_require(data, "mu")),
        functional_from_json(_require(data, "nu")),
    )


def load_path(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise NCIDError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise NCIDError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise NCIDError(f"{path} must contain a JSON object")
    return data


def save_path(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def sigma_to_json(sigma) -> dict:
    return {
        "values_in": sigma.values_in,
        "truncation": sigma.truncation,
        "levels": {
            str(m): tensor_to_json(sigma.levels[m])
            for m in range(sigma.truncation + 1)
        },
    }


def sigma_from_json(data: dict, pair: AlgebraPair):
    from .certify import SigmaForm

    values_in = _require(data, "values_in", str)
    if values_in not in ("B", "D"):
        raise DimensionMismatch(f"values_in must be 'B' or 'D', got {values_in!r}")
    trunc = _require(data, "truncation", int)
    if trunc < 0:
        raise DimensionMismatch("sigma truncation must be >= 0")
    v = pair.k if values_in == "B" else pair.d
    k2 = pair.k * pair.k
    table = _require(data, "levels", dict)
    levels = {}
    for m in range(trunc + 1):
        node = table.get(str(m))
        if node is None:
            raise DimensionMismatch(f"missing sigma level {m}")
        levels[m] = tensor_from_json(node, (k2,) * (m + 1) + (v, v))
    return SigmaForm(pair=pair, values_in=values_in, truncation=trunc, levels=levels)


def extraction_to_json(kind: str, pair: AlgebraPair, alpha, sigma) -> dict:
    out = {"kind": kind}
    out.update(pair_to_json(pair))
    out["alpha"] = tensor_to_json(np.asarray(alpha))
    out["sigma"] = sigma_to_json(sigma)
    return out


def extraction_from_json(data: dict):
    kind = _require(data, "kind", str)
    if kind not in _KINDS:
        raise DimensionMismatch(f"unknown transform kind {kind!r}")
    pair = pair_from_json(data)
    v = pair.k if kind == "free" else pair.d
    alpha = tensor_from_json(_require(data, "alpha"), (v, v))
    sigma = sigma_from_json(_require(data, "sigma"), pair)
    return kind, pair, alpha, sigma
