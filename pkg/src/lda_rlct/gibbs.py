"""Collapsed Gibbs sampling for LDA with conjugate parameter draws.

The chain state is the per-token topic assignment plus three count
tables.  One sweep resamples every token in order from its collapsed
conditional

    P(y_t = k | rest)  propto  (doc_topic[k, j] + alpha)
                               * (word_topic[i, k] + beta)
                               / (topic_total[k] + M * beta)

with the token removed from the tables first and added back after.
After burn-in, every ``thinning``-th sweep one explicit parameter pair
(A, B) is drawn from the conjugate Dirichlet conditionals given the
current tables; the retained pairs approximate the posterior.

The sweep itself is compiled with numba.  All randomness comes from a
numpy Generator: the sweep kernel consumes a pre-drawn array of
uniforms (one per token), which keeps runs bit-reproducible and the
kernel free of hidden state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .model import Dataset, validate_stochastic
from .rlct import InvalidShapeError

__all__ = [
    "GibbsConfig",
    "ChainState",
    "PosteriorDraws",
    "init_chain",
    "sweep",
    "draw_parameters",
    "run",
    "check_consistency",
]

# sweeps per kernel call during burn-in; bounds the uniform buffer
_BURN_CHUNK = 2000


@dataclass(frozen=True)
class GibbsConfig:
    """Sampler hyperparameters and schedule.

    alpha, beta : symmetric Dirichlet concentrations for topics per
        document and words per topic.  The defaults give the uniform
        prior on the simplices.
    burn_in : sweeps discarded before any draw is kept.
    thinning : sweeps between consecutive retained draws.
    num_draws : retained parameter draws (K).
    seed : seeds the run when no generator is passed in.
    """

    alpha: float = 1.0
    beta: float = 1.0
    burn_in: int = 10_000
    thinning: int = 20
    num_draws: int = 1_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidShapeError(
                f"alpha and beta must be positive, got {self.alpha}, {self.beta}"
            )
        if self.burn_in < 0:
            raise InvalidShapeError(f"burn_in must be >= 0, got {self.burn_in}")
        if self.thinning < 1:
            raise InvalidShapeError(f"thinning must be >= 1, got {self.thinning}")
        if self.num_draws < 1:
            raise InvalidShapeError(f"num_draws must be >= 1, got {self.num_draws}")

    @property
    def total_sweeps(self) -> int:
        return self.burn_in + self.thinning * self.num_draws


@dataclass
class ChainState:
    """Topic assignments and the count tables they induce."""

    assignments: np.ndarray  # (n,) topic of each token
    doc_topic: np.ndarray    # (H, N) tokens per topic and document
    word_topic: np.ndarray   # (M, H) tokens per word and topic
    topic_total: np.ndarray  # (H,) tokens per topic

    @property
    def num_topics(self) -> int:
        return int(self.topic_total.shape[0])


@dataclass
class PosteriorDraws:
    """K retained parameter pairs: A (K, M, H), B (K, H, N)."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self) -> None:
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.A.ndim != 3 or self.B.ndim != 3:
            raise InvalidShapeError("draw stacks must be 3-dimensional")
        if self.A.shape[0] != self.B.shape[0]:
            raise InvalidShapeError(
                f"draw counts differ: {self.A.shape[0]} vs {self.B.shape[0]}"
            )
        if self.A.shape[2] != self.B.shape[1]:
            raise InvalidShapeError(
                f"A has {self.A.shape[2]} topics but B has {self.B.shape[1]}"
            )

    @property
    def num_draws(self) -> int:
        return int(self.A.shape[0])

    def validate(self) -> None:
        for k in range(self.num_draws):
            validate_stochastic(self.A[k], name=f"draw {k} A")
            validate_stochastic(self.B[k], name=f"draw {k} B")

    def word_dists(self) -> np.ndarray:
        """Per-draw M x N word-given-doc matrices, shape (K, M, N)."""
        return np.matmul(self.A, self.B)


def init_chain(dataset: Dataset, num_topics: int, rng: np.random.Generator) -> ChainState:
    """Assign every token a uniform random topic and build the tables."""
    if num_topics < 1:
        raise InvalidShapeError(f"num_topics must be >= 1, got {num_topics}")
    if dataset.n == 0:
        raise InvalidShapeError("cannot start a chain on an empty dataset")
    M, N = dataset.counts.shape
    assignments = rng.integers(0, num_topics, size=dataset.n)
    doc_topic = np.zeros((num_topics, N), dtype=np.int64)
    word_topic = np.zeros((M, num_topics), dtype=np.int64)
    np.add.at(doc_topic, (assignments, dataset.docs), 1)
    np.add.at(word_topic, (dataset.words, assignments), 1)
    topic_total = np.bincount(assignments, minlength=num_topics)
    return ChainState(
        assignments=assignments,
        doc_topic=doc_topic,
        word_topic=word_topic,
        topic_total=topic_total,
    )


def check_consistency(state: ChainState, dataset: Dataset) -> None:
    """Raise unless the count tables match the assignments exactly."""
    H = state.num_topics
    M, N = dataset.counts.shape
    if state.assignments.shape != (dataset.n,):
        raise InvalidShapeError("assignment vector length differs from dataset")
    if state.assignments.min() < 0 or state.assignments.max() >= H:
        raise InvalidShapeError("assignment out of topic range")
    doc_topic = np.zeros((H, N), dtype=np.int64)
    word_topic = np.zeros((M, H), dtype=np.int64)
    np.add.at(doc_topic, (state.assignments, dataset.docs), 1)
    np.add.at(word_topic, (dataset.words, state.assignments), 1)
    if not np.array_equal(doc_topic, state.doc_topic):
        raise InvalidShapeError("doc_topic table out of sync with assignments")
    if not np.array_equal(word_topic, state.word_topic):
        raise InvalidShapeError("word_topic table out of sync with assignments")
    if not np.array_equal(np.bincount(state.assignments, minlength=H),
                          state.topic_total):
        raise InvalidShapeError("topic_total out of sync with assignments")
    if state.doc_topic.sum(axis=0).tolist() != np.bincount(
            dataset.docs, minlength=N).tolist():
        raise InvalidShapeError("doc_topic column sums differ from doc sizes")


@njit(cache=True, nogil=True)
def _sweep_once(words, docs, assignments, doc_topic, word_topic, topic_total,
                alpha, beta, beta_total, uniforms, cum):
    n_topics = topic_total.shape[0]
    for t in range(words.shape[0]):
        i = words[t]
        j = docs[t]
        k = assignments[t]
        doc_topic[k, j] -= 1
        word_topic[i, k] -= 1
        topic_total[k] -= 1
        total = 0.0
        for h in range(n_topics):
            total += ((doc_topic[h, j] + alpha) * (word_topic[i, h] + beta)
                      / (topic_total[h] + beta_total))
            cum[h] = total
        u = uniforms[t] * total
        k = 0
        while k < n_topics - 1 and cum[k] <= u:
            k += 1
        assignments[t] = k
        doc_topic[k, j] += 1
        word_topic[i, k] += 1
        topic_total[k] += 1


@njit(cache=True, nogil=True)
def _sweep_block(words, docs, assignments, doc_topic, word_topic, topic_total,
                 alpha, beta, beta_total, uniforms, cum):
    for s in range(uniforms.shape[0]):
        _sweep_once(words, docs, assignments, doc_topic, word_topic, topic_total,
                    alpha, beta, beta_total, uniforms[s], cum)


def _run_sweeps(state: ChainState, dataset: Dataset, config: GibbsConfig,
                num_sweeps: int, rng: np.random.Generator) -> None:
    M = dataset.counts.shape[0]
    cum = np.empty(state.num_topics)
    done = 0
    while done < num_sweeps:
        block = min(_BURN_CHUNK, num_sweeps - done)
        _sweep_block(dataset.words, dataset.docs, state.assignments,
                     state.doc_topic, state.word_topic, state.topic_total,
                     config.alpha, config.beta, M * config.beta,
                     rng.random((block, dataset.n)), cum)
        done += block


def sweep(state: ChainState, dataset: Dataset, config: GibbsConfig,
          rng: np.random.Generator) -> ChainState:
    """Resample every token once, in token order; mutates and returns state."""
    _run_sweeps(state, dataset, config, 1, rng)
    return state


def draw_parameters(state: ChainState, config: GibbsConfig,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Draw (A, B) from the Dirichlet conditionals given the tables.

    Column k of A is Dirichlet(beta + word_topic[:, k]); column j of B
    is Dirichlet(alpha + doc_topic[:, j]).
    """
    a_gamma = rng.standard_gamma(config.beta + state.word_topic)
    b_gamma = rng.standard_gamma(config.alpha + state.doc_topic)
    return a_gamma / a_gamma.sum(axis=0), b_gamma / b_gamma.sum(axis=0)


def run(dataset: Dataset, num_topics: int, config: GibbsConfig,
        rng: np.random.Generator | None = None,
        check_invariants: bool = False) -> PosteriorDraws:
    """Run the full schedule and return the retained posterior draws.

    Runs burn_in sweeps, then repeats (thinning sweeps, one parameter
    draw) num_draws times.  With check_invariants the count tables are
    re-derived from the assignments after every sweep, which is slow
    and meant for tests.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    state = init_chain(dataset, num_topics, rng)
    if check_invariants:
        check_consistency(state, dataset)

    def advance(num_sweeps: int) -> None:
        if check_invariants:
            for _ in range(num_sweeps):
                sweep(state, dataset, config, rng)
                check_consistency(state, dataset)
        else:
            _run_sweeps(state, dataset, config, num_sweeps, rng)

    M, N = dataset.counts.shape
    A = np.empty((config.num_draws, M, num_topics))
    B = np.empty((config.num_draws, num_topics, N))
    advance(config.burn_in)
    for k in range(config.num_draws):
        advance(config.thinning)
        A[k], B[k] = draw_parameters(state, config, rng)
    draws = PosteriorDraws(A=A, B=B)
    draws.validate()
    return draws
