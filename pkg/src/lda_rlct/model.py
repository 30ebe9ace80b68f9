"""True LDA models, synthetic corpora, and exact loss evaluation.

Everything downstream works with a pair of column-stochastic matrices:
A (M x H) holds one word distribution per topic, B (H x N) one topic
distribution per document, so that A @ B gives the word distribution
of each document.  A truth is such a pair plus a document distribution
q'(j); a dataset is n tokens (doc, word) drawn from q'(j) * (A0 B0)[i, j].

Indices are 0-based in memory throughout; the on-disk formats in
``lda_rlct.io`` are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .rlct import InvalidShapeError

__all__ = [
    "PROB_FLOOR",
    "Token",
    "Dataset",
    "TrueModel",
    "validate_stochastic",
    "sample_true_model",
    "intrinsic_rank",
    "generate_dataset",
    "token_log_prob",
    "kl_divergence",
    "empirical_entropy",
]

# probabilities are clipped here before any log; keeps zero predictive
# mass finite (log(1e-300) ~ -690.8) instead of propagating -inf
PROB_FLOOR = 1e-300

STOCHASTIC_TOL = 1e-12


def validate_stochastic(matrix: np.ndarray, name: str = "matrix",
                        tol: float = STOCHASTIC_TOL) -> np.ndarray:
    """Check that matrix is column-stochastic within tol; return it.

    Raises InvalidShapeError naming the failing constraint: a wrong
    ndim, a negative (or non-finite) entry, or a column sum deviating
    from 1 by more than tol.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise InvalidShapeError(f"{name} must be 2-dimensional, got ndim={matrix.ndim}")
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise InvalidShapeError(f"{name} must be non-empty, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise InvalidShapeError(f"{name} has non-finite entries")
    if np.any(matrix < 0):
        i, j = np.argwhere(matrix < 0)[0]
        raise InvalidShapeError(
            f"{name}[{i},{j}] = {matrix[i, j]} is negative"
        )
    sums = matrix.sum(axis=0)
    bad = np.abs(sums - 1.0) > tol
    if np.any(bad):
        j = int(np.argmax(bad))
        raise InvalidShapeError(
            f"{name} column {j} sums to {sums[j]!r}, off by more than {tol}"
        )
    return matrix


@dataclass(frozen=True)
class Token:
    """One observation: word index i in document j (0-based)."""

    doc: int
    word: int

    def __post_init__(self) -> None:
        if self.doc < 0 or self.word < 0:
            raise InvalidShapeError(
                f"token indices must be non-negative, got doc={self.doc}, word={self.word}"
            )


@dataclass
class Dataset:
    """n tokens stored as parallel index arrays plus an M x N count table."""

    docs: np.ndarray
    words: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        self.docs = np.asarray(self.docs, dtype=np.int64)
        self.words = np.asarray(self.words, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.docs.shape != self.words.shape or self.docs.ndim != 1:
            raise InvalidShapeError(
                f"docs and words must be 1-d arrays of equal length, "
                f"got {self.docs.shape} and {self.words.shape}"
            )
        if self.counts.ndim != 2:
            raise InvalidShapeError("counts must be an M x N matrix")
        M, N = self.counts.shape
        if self.n > 0 and (self.words.max() >= M or self.docs.max() >= N):
            raise InvalidShapeError("token index out of range of the count table")
        if self.n > 0 and (self.words.min() < 0 or self.docs.min() < 0):
            raise InvalidShapeError("token indices must be non-negative")
        rebuilt = np.zeros((M, N), dtype=np.int64)
        np.add.at(rebuilt, (self.words, self.docs), 1)
        if not np.array_equal(rebuilt, self.counts):
            raise InvalidShapeError("counts disagree with the token list")

    @classmethod
    def from_tokens(cls, docs: np.ndarray, words: np.ndarray,
                    M: int, N: int) -> "Dataset":
        docs = np.asarray(docs, dtype=np.int64)
        words = np.asarray(words, dtype=np.int64)
        counts = np.zeros((M, N), dtype=np.int64)
        np.add.at(counts, (words, docs), 1)
        return cls(docs=docs, words=words, counts=counts)

    @property
    def n(self) -> int:
        return int(self.docs.shape[0])

    @property
    def num_words(self) -> int:
        return int(self.counts.shape[0])

    @property
    def num_docs(self) -> int:
        return int(self.counts.shape[1])

    def tokens(self) -> Iterator[Token]:
        for j, i in zip(self.docs, self.words):
            yield Token(doc=int(j), word=int(i))


@dataclass
class TrueModel:
    """A data-generating truth: A0 (M x H0), B0 (H0 x N), doc_dist (N,)."""

    A0: np.ndarray
    B0: np.ndarray
    doc_dist: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.A0 = validate_stochastic(self.A0, name="A0")
        self.B0 = validate_stochastic(self.B0, name="B0")
        M, H0 = self.A0.shape
        if self.B0.shape[0] != H0:
            raise InvalidShapeError(
                f"A0 has {H0} topics but B0 has {self.B0.shape[0]}"
            )
        N = self.B0.shape[1]
        if M < 2 or N < 2:
            raise InvalidShapeError(f"M >= 2 and N >= 2 required, got M={M}, N={N}")
        if self.doc_dist is None:
            self.doc_dist = np.full(N, 1.0 / N)
        self.doc_dist = np.asarray(self.doc_dist, dtype=float)
        if self.doc_dist.shape != (N,):
            raise InvalidShapeError(
                f"doc_dist must have length N={N}, got shape {self.doc_dist.shape}"
            )
        if np.any(self.doc_dist <= 0):
            raise InvalidShapeError("doc_dist must be strictly positive")
        if abs(self.doc_dist.sum() - 1.0) > STOCHASTIC_TOL:
            raise InvalidShapeError(
                f"doc_dist sums to {self.doc_dist.sum()!r}, off by more than {STOCHASTIC_TOL}"
            )

    @property
    def M(self) -> int:
        return int(self.A0.shape[0])

    @property
    def N(self) -> int:
        return int(self.B0.shape[1])

    @property
    def H0(self) -> int:
        return int(self.A0.shape[1])

    def word_dists(self) -> np.ndarray:
        """The M x N column-stochastic matrix A0 @ B0 of word given doc."""
        return self.A0 @ self.B0

    @property
    def r(self) -> int:
        return intrinsic_rank(self.A0, self.B0)


def _float_rank(matrix: np.ndarray, rtol: float) -> int:
    """Rank by Gaussian elimination with partial pivoting.

    A pivot counts only if its magnitude exceeds rtol times the largest
    magnitude of the original matrix, so exact zero structure (for
    instance from duplicated columns) survives.
    """
    a = np.array(matrix, dtype=float, copy=True)
    if a.size == 0:
        return 0
    scale = float(np.abs(a).max())
    if scale == 0.0:
        return 0
    rows, cols = a.shape
    row = 0
    rank = 0
    for col in range(cols):
        if row >= rows:
            break
        pivot = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[pivot, col]) <= rtol * scale:
            continue
        if pivot != row:
            a[[row, pivot]] = a[[pivot, row]]
        a[row + 1:] -= np.outer(a[row + 1:, col] / a[row, col], a[row])
        row += 1
        rank += 1
    return rank


def intrinsic_rank(A0: np.ndarray, B0: np.ndarray, rtol: float = 1e-10) -> int:
    """Intrinsic rank r of a truth: rank of the centered product U0 V0.

    U0 subtracts the last topic's word column from the others and drops
    it (M-1 rows, H0-1 columns); V0 subtracts the first document's topic
    column and drops column one (H0-1 rows, N-1 columns).  For H0 = 1
    both factors are empty and r = 0.  The rank of the float product is
    taken by Gaussian elimination with relative pivot threshold rtol.
    """
    A0 = validate_stochastic(A0, name="A0")
    B0 = validate_stochastic(B0, name="B0")
    if A0.shape[1] != B0.shape[0]:
        raise InvalidShapeError(
            f"A0 has {A0.shape[1]} topics but B0 has {B0.shape[0]}"
        )
    H0 = A0.shape[1]
    if H0 == 1:
        return 0
    U0 = A0[:-1, :-1] - A0[:-1, -1:]
    V0 = B0[:-1, 1:] - B0[:-1, :1]
    return _float_rank(U0 @ V0, rtol)


def sample_true_model(M: int, N: int, H0: int, rng: np.random.Generator,
                      doc_dist: np.ndarray | None = None,
                      max_tries: int = 1000) -> TrueModel:
    """Draw a generic truth with columns uniform on the simplex.

    Every column of A0 and B0 is Dirichlet(1, ..., 1).  Draws are
    rejected until both matrices have full column rank H0 and the
    intrinsic rank equals its generic value min(M-1, N-1, H0-1); a
    generic draw passes immediately, so rejections are rare.  Requires
    H0 <= min(M, N) so that a full-rank truth exists.
    """
    if not (M >= 2 and N >= 2 and H0 >= 1):
        raise InvalidShapeError(
            f"M >= 2, N >= 2, H0 >= 1 required, got M={M}, N={N}, H0={H0}"
        )
    if H0 > min(M, N):
        raise InvalidShapeError(
            f"H0 <= min(M, N) required for a full-rank truth, got H0={H0}"
        )
    generic_r = min(M - 1, N - 1, H0 - 1)
    for _ in range(max_tries):
        A0 = rng.dirichlet(np.ones(M), size=H0).T
        B0 = rng.dirichlet(np.ones(H0), size=N).T
        if _float_rank(A0, 1e-10) < H0 or _float_rank(B0, 1e-10) < H0:
            continue
        if intrinsic_rank(A0, B0) != generic_r:
            continue
        return TrueModel(A0=A0, B0=B0, doc_dist=doc_dist)
    raise RuntimeError(
        f"no generic truth found in {max_tries} tries for M={M}, N={N}, H0={H0}"
    )


def _categorical_rows(cum_rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    # cum_rows[t] is the cumulative distribution for draw t; index is
    # the number of cumulative values <= u, clipped against rounding
    idx = (cum_rows <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cum_rows.shape[1] - 1)


def generate_dataset(model: TrueModel, n: int, rng: np.random.Generator) -> Dataset:
    """Sample n tokens: doc from doc_dist, topic from B0, word from A0."""
    if n < 0:
        raise InvalidShapeError(f"n must be non-negative, got n={n}")
    docs = _categorical_rows(
        np.tile(np.cumsum(model.doc_dist), (n, 1)), rng.random(n)
    )
    cum_b = np.cumsum(model.B0, axis=0).T  # (N, H0)
    topics = _categorical_rows(cum_b[docs], rng.random(n))
    cum_a = np.cumsum(model.A0, axis=0).T  # (H0, M)
    words = _categorical_rows(cum_a[topics], rng.random(n))
    return Dataset.from_tokens(docs=docs, words=words, M=model.M, N=model.N)


def _log_floored(p: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(p, PROB_FLOOR))


def token_log_prob(A: np.ndarray, B: np.ndarray, token: Token) -> float:
    """log p(word | doc) under the pair (A, B), floored at PROB_FLOOR."""
    A = validate_stochastic(A, name="A")
    B = validate_stochastic(B, name="B")
    if A.shape[1] != B.shape[0]:
        raise InvalidShapeError(f"A has {A.shape[1]} topics but B has {B.shape[0]}")
    if token.word >= A.shape[0] or token.doc >= B.shape[1]:
        raise InvalidShapeError(
            f"token (doc={token.doc}, word={token.word}) out of range "
            f"for M={A.shape[0]}, N={B.shape[1]}"
        )
    p = float(A[token.word] @ B[:, token.doc])
    return float(np.log(max(p, PROB_FLOOR)))


def kl_divergence(A: np.ndarray, B: np.ndarray, model: TrueModel) -> float:
    """Exact KL divergence from the truth to (A, B) by cell enumeration.

    K = sum_j q'(j) sum_i q(i|j) log(q(i|j) / p(i|j)) with q = A0 B0
    and p = A B.  Cells with q(i|j) = 0 contribute nothing; p is
    floored so a missing support gives a large finite value.
    """
    A = validate_stochastic(A, name="A")
    B = validate_stochastic(B, name="B")
    Q = model.word_dists()
    P = A @ B
    if P.shape != Q.shape:
        raise InvalidShapeError(
            f"model shape {Q.shape} does not match candidate shape {P.shape}"
        )
    log_ratio = np.where(Q > 0, np.log(np.maximum(Q, PROB_FLOOR)) - _log_floored(P), 0.0)
    return float(model.doc_dist @ (Q * log_ratio).sum(axis=0))


def empirical_entropy(dataset: Dataset, model: TrueModel) -> float:
    """Empirical conditional entropy -(1/n) sum_t log q(word_t | doc_t)."""
    if dataset.n == 0:
        raise InvalidShapeError("empirical entropy needs at least one token")
    if dataset.counts.shape != (model.M, model.N):
        raise InvalidShapeError(
            f"dataset shape {dataset.counts.shape} does not match "
            f"model shape {(model.M, model.N)}"
        )
    logq = _log_floored(model.word_dists())
    return float(-(dataset.counts * logq).sum() / dataset.n)
