"""Operator-valued boolean, free, and c-free cumulant toolkit."""

__version__ = "0.1.0"

_EXPORTS = {
    "AlgebraPair": "algebra",
    "cnorm": "algebra",
    "is_psd": "algebra",
    "MomentFunctional": "distribution",
    "PolynomialWord": "distribution",
    "moment": "distribution",
    "eval_linear": "distribution",
    "generate_realizable": "distribution",
    "scalar_from_moments": "distribution",
    "NCPartition": "nclattice",
    "enumerate_nc": "nclattice",
    "leq": "nclattice",
    "moebius": "nclattice",
    "classify_blocks": "nclattice",
    "nc_weights": "nclattice",
    "CumulantFamily": "cumulants",
    "boolean_from_moments": "cumulants",
    "moments_from_boolean": "cumulants",
    "free_from_moments": "cumulants",
    "moments_from_free": "cumulants",
    "cfree_from_moments": "cumulants",
    "moments_from_cfree": "cumulants",
    "functional_of": "cumulants",
    "boolean_convolve": "convolution",
    "free_convolve": "convolution",
    "cfree_convolve": "convolution",
    "root": "convolution",
    "FockModel": "fock",
    "build_boolean": "fock",
    "boolean_root_model": "fock",
    "build_free": "fock",
    "build_cfree": "fock",
    "model_moment": "fock",
    "NilpotentPoint": "ncfunctions",
    "TriangularProbe": "ncfunctions",
    "eval_series": "ncfunctions",
    "eval_M": "ncfunctions",
    "eval_R": "ncfunctions",
    "eval_B": "ncfunctions",
    "eval_cR": "ncfunctions",
    "extract_taylor": "ncfunctions",
    "check_identity": "ncfunctions",
    "check_cauchy_relation": "ncfunctions",
    "check_nc_function_axioms": "ncfunctions",
    "tensor_compatibility": "ncfunctions",
    "Certificate": "certify",
    "SigmaForm": "certify",
    "gram": "certify",
    "certify": "certify",
    "levy_hincin_extract": "certify",
    "levy_hincin_reconstruct": "certify",
}

__all__ = sorted(_EXPORTS) + ["errors", "__version__"]


def __getattr__(name):
    # Lazy re-exports keep `import ncid.cli` light so the CLI can pin BLAS
    # thread counts before numpy loads.
    if name in _EXPORTS:
        import importlib

        module = importlib.import_module("." + _EXPORTS[name], __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
