"""WAIC-based estimation of the learning coefficient from one dataset.

Given posterior draws w_1..w_K for a dataset of n tokens, the losses

    T_n = -(1/n) sum_t log mean_k p(x_t | w_k)      (Bayes training loss)
    V_n = sum_t var_k log p(x_t | w_k)              (functional variance)
    W_n = T_n + V_n / n                             (WAIC)

combine with the empirical entropy S_n of the truth and the Bayes
generalization error G_n into one sample of the learning coefficient,

    Lambda = n * (G_n + W_n - S_n) / 2,

whose average over independent replicates estimates lambda.  G_n can
be enumerated exactly over the M x N cells or approximated by Monte
Carlo on a fresh test set; both paths live here.

Token log probabilities depend on a token only through its (word, doc)
cell, so every loss is accumulated over the count table rather than
token by token.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gibbs import GibbsConfig, PosteriorDraws, run
from .model import (
    PROB_FLOOR,
    Dataset,
    Token,
    TrueModel,
    empirical_entropy,
    generate_dataset,
)
from .rlct import InvalidShapeError

__all__ = [
    "LossReport",
    "LambdaEstimate",
    "predictive_log_prob",
    "waic",
    "gen_error_exact",
    "gen_error_mc",
    "gen_error_mc_stats",
    "run_replicate",
    "lambda_replicate",
    "aggregate",
]


@dataclass(frozen=True)
class LossReport:
    """All per-replicate losses and the resulting coefficient sample."""

    g_n: float
    s_n: float
    t_n: float
    v_n: float
    w_n: float
    lambda_sample: float


@dataclass(frozen=True)
class LambdaEstimate:
    """Replicate coefficient samples with their mean and spread."""

    values: tuple[float, ...]
    lambda_hat: float
    std: float

    @property
    def num_replicates(self) -> int:
        return len(self.values)


def _cell_log_probs(draws: PosteriorDraws) -> np.ndarray:
    """log p(word i | doc j, w_k) for every draw and cell, shape (K, M, N)."""
    return np.log(np.maximum(draws.word_dists(), PROB_FLOOR))


def _predictive_cells(draws: PosteriorDraws) -> np.ndarray:
    """log mean_k p(word i | doc j, w_k) per cell, shape (M, N)."""
    return np.log(np.maximum(draws.word_dists().mean(axis=0), PROB_FLOOR))


def predictive_log_prob(draws: PosteriorDraws, token: Token) -> float:
    """log of the posterior predictive probability of one token."""
    if draws.num_draws < 1:
        raise InvalidShapeError("need at least one draw")
    K, M, _ = draws.A.shape
    N = draws.B.shape[2]
    if token.word >= M or token.doc >= N:
        raise InvalidShapeError(
            f"token (doc={token.doc}, word={token.word}) out of range "
            f"for M={M}, N={N}"
        )
    p = np.einsum("kh,kh->k", draws.A[:, token.word, :], draws.B[:, :, token.doc])
    return float(np.log(max(p.mean(), PROB_FLOOR)))


def waic(draws: PosteriorDraws, dataset: Dataset) -> tuple[float, float, float]:
    """Return (T_n, V_n, W_n) for a dataset under the given draws.

    The variance in V_n is the population variance over the K draws.
    Requires K >= 2, otherwise V_n would be trivially zero even when
    the posterior is diffuse.
    """
    if draws.num_draws < 2:
        raise InvalidShapeError(
            f"WAIC needs at least 2 draws, got {draws.num_draws}"
        )
    if dataset.n == 0:
        raise InvalidShapeError("WAIC needs at least one token")
    counts = dataset.counts
    if counts.shape != (draws.A.shape[1], draws.B.shape[2]):
        raise InvalidShapeError(
            f"dataset shape {counts.shape} does not match draws "
            f"{(draws.A.shape[1], draws.B.shape[2])}"
        )
    n = dataset.n
    log_cells = _cell_log_probs(draws)
    t_n = float(-(counts * _predictive_cells(draws)).sum() / n)
    v_n = float((counts * log_cells.var(axis=0)).sum())
    return t_n, v_n, t_n + v_n / n


def gen_error_exact(draws: PosteriorDraws, model: TrueModel) -> float:
    """Bayes generalization error by exact enumeration over cells.

    G_n = sum_j q'(j) sum_i q(i|j) (log q(i|j) - log p*(i|j)) where p*
    is the posterior predictive mean over the draws.
    """
    Q = model.word_dists()
    log_pred = _predictive_cells(draws)
    if log_pred.shape != Q.shape:
        raise InvalidShapeError(
            f"draw shape {log_pred.shape} does not match model {Q.shape}"
        )
    inner = np.where(Q > 0, Q * (np.log(np.maximum(Q, PROB_FLOOR)) - log_pred), 0.0)
    return float(model.doc_dist @ inner.sum(axis=0))


def _mc_cells(draws: PosteriorDraws, model: TrueModel, num_tokens: int,
              rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    if num_tokens < 2:
        raise InvalidShapeError(f"need at least 2 test tokens, got {num_tokens}")
    Q = model.word_dists()
    log_pred = _predictive_cells(draws)
    if log_pred.shape != Q.shape:
        raise InvalidShapeError(
            f"draw shape {log_pred.shape} does not match model {Q.shape}"
        )
    cell_probs = (Q * model.doc_dist).ravel()
    counts = rng.multinomial(num_tokens, cell_probs / cell_probs.sum())
    values = np.where(Q > 0, np.log(np.maximum(Q, PROB_FLOOR)) - log_pred, 0.0).ravel()
    return counts, values


def gen_error_mc_stats(draws: PosteriorDraws, model: TrueModel, num_tokens: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo generalization error and its standard error.

    Averages log q(x|z) - log p*(x|z) over num_tokens fresh test tokens
    from the truth; the tokens are tallied per cell, which leaves the
    estimator unchanged.
    """
    counts, values = _mc_cells(draws, model, num_tokens, rng)
    mean = float(counts @ values) / num_tokens
    second = float(counts @ (values**2)) / num_tokens
    std_err = float(np.sqrt(max(second - mean**2, 0.0) / num_tokens))
    return mean, std_err


def gen_error_mc(draws: PosteriorDraws, model: TrueModel, num_tokens: int,
                 rng: np.random.Generator) -> float:
    """Monte Carlo generalization error over num_tokens fresh tokens."""
    return gen_error_mc_stats(draws, model, num_tokens, rng)[0]


def run_replicate(model: TrueModel, num_topics: int, n: int,
                  config: GibbsConfig, gn_mode: str = "exact",
                  num_test_tokens: int = 200_000) -> LossReport:
    """One full replicate: fresh dataset, Gibbs run, all losses.

    Three independent substreams are derived from config.seed for the
    dataset, the chain, and the Monte Carlo test set, so exact and mc
    modes see identical data and draws.
    """
    if gn_mode not in ("exact", "mc"):
        raise ValueError(f"gn_mode must be 'exact' or 'mc', got {gn_mode!r}")
    if n < 1:
        raise InvalidShapeError(f"n must be >= 1, got n={n}")
    rng_data, rng_chain, rng_test = (
        np.random.default_rng(s) for s in np.random.SeedSequence(config.seed).spawn(3)
    )
    dataset = generate_dataset(model, n, rng_data)
    draws = run(dataset, num_topics, config, rng=rng_chain)
    s_n = empirical_entropy(dataset, model)
    t_n, v_n, w_n = waic(draws, dataset)
    if gn_mode == "exact":
        g_n = gen_error_exact(draws, model)
    else:
        g_n = gen_error_mc(draws, model, num_test_tokens, rng_test)
    return LossReport(
        g_n=g_n, s_n=s_n, t_n=t_n, v_n=v_n, w_n=w_n,
        lambda_sample=n * (g_n + w_n - s_n) / 2.0,
    )


def lambda_replicate(model: TrueModel, num_topics: int, n: int,
                     config: GibbsConfig, gn_mode: str = "exact",
                     num_test_tokens: int = 200_000) -> float:
    """One sample of the learning coefficient, n(G_n + W_n - S_n)/2."""
    return run_replicate(model, num_topics, n, config, gn_mode,
                         num_test_tokens).lambda_sample


def aggregate(values: "np.ndarray | list[float] | tuple[float, ...]") -> LambdaEstimate:
    """Mean and unbiased standard deviation of replicate samples (>= 2)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.shape[0] < 2:
        raise InvalidShapeError(
            f"aggregate needs a flat list of at least 2 values, got shape {arr.shape}"
        )
    return LambdaEstimate(
        values=tuple(float(v) for v in arr),
        lambda_hat=float(arr.mean()),
        std=float(arr.std(ddof=1)),
    )
