"""Exact learning coefficients for LDA, with a sampling-based check.

The closed forms live in ``lda_rlct.rlct``; truths, datasets and exact
losses in ``lda_rlct.model``; the collapsed Gibbs sampler in
``lda_rlct.gibbs``; WAIC-based coefficient estimation in
``lda_rlct.estimator``; experiment orchestration in
``lda_rlct.harness``; text formats in ``lda_rlct.io``.
"""

__version__ = "0.1.0"

from .rlct import (
    AsymptoticCurve,
    InvalidShapeError,
    LdaShape,
    RlctResult,
    expected_generalization_error,
    free_energy_penalty,
    lda_dimension,
    lda_rlct,
    mf_rlct,
)

__all__ = [
    "__version__",
    "AsymptoticCurve",
    "InvalidShapeError",
    "LdaShape",
    "RlctResult",
    "expected_generalization_error",
    "free_energy_penalty",
    "lda_dimension",
    "lda_rlct",
    "mf_rlct",
]
