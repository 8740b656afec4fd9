"""Covariance matrix adaptation evolution strategy, ask/tell style.

Implements the standard rank-mu update with cumulative step-size control
and the usual parameter defaults. Selection is rank-based only: fitness
values never enter the update arithmetic, so any strictly increasing
transform of the fitness leaves the search trajectory bit-identical.

Two selection modes:

- "comma": the next mean comes from the best mu of the lambda offspring.
- "plus": offspring are pooled with the surviving parents from the previous
  generation (kept with their recorded fitness, never re-evaluated) and the
  best mu of the pool are selected. Pool order is offspring first, then
  parents, and ties on fitness resolve to the earlier pool index.

State snapshots are plain JSON-safe dicts (including the generator state),
so a run can be stopped, serialized, and resumed bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadConfig, CovarianceDegenerate, WrongPopulationSize

STEP_TOL = 1e-10

COMMA = "comma"
PLUS = "plus"


@dataclass(frozen=True)
class CmaConfig:
    dim: int
    population_size: int = 10
    n_parents: int = 3
    sigma0: float = 0.25
    mode: str = COMMA
    seed: int = 0
    max_generations: int = 100

    def __post_init__(self):
        if self.dim < 1:
            raise BadConfig(f"dim must be >= 1, got {self.dim}")
        if self.population_size < 2:
            raise BadConfig(f"population_size must be >= 2, got {self.population_size}")
        if not 1 <= self.n_parents < self.population_size:
            raise BadConfig(
                f"n_parents must be in [1, population_size), got {self.n_parents}"
            )
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise BadConfig(f"sigma0 must be positive and finite, got {self.sigma0}")
        if self.mode not in (COMMA, PLUS):
            raise BadConfig(f"mode must be 'comma' or 'plus', got {self.mode!r}")
        if self.max_generations < 1:
            raise BadConfig(f"max_generations must be >= 1, got {self.max_generations}")


@dataclass
class _Weights:
    """Recombination weights and learning rates for (dim, mu)."""

    w: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float


def _derive_weights(dim: int, mu: int) -> _Weights:
    n = float(dim)
    raw = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1, dtype=np.float64))
    w = raw / raw.sum()
    mu_eff = 1.0 / float(np.sum(w**2))
    c_sigma = (mu_eff + 2.0) / (n + mu_eff + 5.0)
    d_sigma = 1.0 + 2.0 * max(0.0, math.sqrt((mu_eff - 1.0) / (n + 1.0)) - 1.0) + c_sigma
    c_c = (4.0 + mu_eff / n) / (n + 4.0 + 2.0 * mu_eff / n)
    c_1 = 2.0 / ((n + 1.3) ** 2 + mu_eff)
    c_mu = min(
        1.0 - c_1,
        2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((n + 2.0) ** 2 + mu_eff),
    )
    chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))
    return _Weights(w, mu_eff, c_sigma, d_sigma, c_c, c_1, c_mu, chi_n)


@dataclass
class CmaState:
    config: CmaConfig
    mode: str
    mean: np.ndarray
    sigma: float
    cov: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int
    rng: np.random.Generator
    parents: list = field(default_factory=list)  # [(x, fitness)] from last tell
    _eig: tuple = None  # (eigvals, eigvecs) cache
    _weights: _Weights = None

    def weights(self) -> _Weights:
        if self._weights is None:
            self._weights = _derive_weights(self.config.dim, self.config.n_parents)
        return self._weights


def init(config: CmaConfig, mean=None) -> CmaState:
    n = config.dim
    m = np.zeros(n) if mean is None else np.asarray(mean, dtype=np.float64).copy()
    if m.shape != (n,):
        raise BadConfig(f"initial mean must have shape ({n},), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise BadConfig("initial mean must be finite")
    return CmaState(
        config=config,
        mode=config.mode,
        mean=m,
        sigma=float(config.sigma0),
        cov=np.eye(n),
        p_sigma=np.zeros(n),
        p_c=np.zeros(n),
        generation=0,
        rng=np.random.default_rng(config.seed),
    )


def _eigen(state: CmaState):
    if state._eig is None:
        c = state.cov
        if not np.all(np.isfinite(c)):
            raise CovarianceDegenerate("covariance contains non-finite entries")
        vals, vecs = np.linalg.eigh(c)
        if not np.all(np.isfinite(vals)):
            raise CovarianceDegenerate("eigendecomposition failed")
        top = float(vals[-1])
        if top <= 0.0:
            raise CovarianceDegenerate("covariance has no positive eigenvalue")
        if float(vals[0]) < -1e-12 * top:
            raise CovarianceDegenerate("covariance is indefinite")
        vals = np.maximum(vals, 1e-14 * top)  # absorb round-off negatives
        state._eig = (vals, vecs)
    return state._eig


def ask(state: CmaState) -> np.ndarray:
    """Sample a population of candidate vectors, shape (lambda, dim)."""
    vals, vecs = _eigen(state)
    lam = state.config.population_size
    z = state.rng.standard_normal((lam, state.config.dim))
    y = z @ (vecs * np.sqrt(vals)).T
    return state.mean + state.sigma * y


def tell(state: CmaState, solutions, fitnesses) -> CmaState:
    """Consume one evaluated population and advance the strategy one step."""
    lam = state.config.population_size
    mu = state.config.n_parents
    x = np.asarray(solutions, dtype=np.float64)
    f = np.asarray(fitnesses, dtype=np.float64).reshape(-1)
    if x.shape != (lam, state.config.dim):
        raise WrongPopulationSize(
            f"expected solutions of shape ({lam}, {state.config.dim}), got {x.shape}"
        )
    if f.shape != (lam,):
        raise WrongPopulationSize(f"expected {lam} fitness values, got {f.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite (apply a penalty upstream)")

    pool_x = [x[i] for i in range(lam)]
    pool_f = [float(v) for v in f]
    if state.mode == PLUS:
        for px, pf in state.parents:
            pool_x.append(px)
            pool_f.append(pf)

    order = sorted(range(len(pool_f)), key=lambda i: (pool_f[i], i))
    chosen = order[:mu]

    w = state.weights()
    m_old = state.mean
    sel = np.stack([pool_x[i] for i in chosen])
    y_sel = (sel - m_old) / state.sigma
    y_w = w.w @ y_sel
    m_new = m_old + state.sigma * y_w

    vals, vecs = _eigen(state)
    inv_sqrt = (vecs / np.sqrt(vals)) @ vecs.T
    g = state.generation
    p_sigma = (1.0 - w.c_sigma) * state.p_sigma + math.sqrt(
        w.c_sigma * (2.0 - w.c_sigma) * w.mu_eff
    ) * (inv_sqrt @ y_w)
    norm_ps = float(np.linalg.norm(p_sigma))
    corr = math.sqrt(1.0 - (1.0 - w.c_sigma) ** (2 * (g + 1)))
    h_sigma = 1.0 if norm_ps / corr < (1.4 + 2.0 / (state.config.dim + 1)) * w.chi_n else 0.0

    p_c = (1.0 - w.c_c) * state.p_c + h_sigma * math.sqrt(
        w.c_c * (2.0 - w.c_c) * w.mu_eff
    ) * y_w

    rank_mu = (y_sel.T * w.w) @ y_sel
    delta_h = (1.0 - h_sigma) * w.c_c * (2.0 - w.c_c)
    cov = (
        (1.0 - w.c_1 - w.c_mu) * state.cov
        + w.c_1 * (np.outer(p_c, p_c) + delta_h * state.cov)
        + w.c_mu * rank_mu
    )
    cov = (cov + cov.T) / 2.0

    sigma = state.sigma * math.exp((w.c_sigma / w.d_sigma) * (norm_ps / w.chi_n - 1.0))

    state.mean = m_new
    state.sigma = float(sigma)
    state.cov = cov
    state.p_sigma = p_sigma
    state.p_c = p_c
    state.generation = g + 1
    state.parents = [(pool_x[i].copy(), pool_f[i]) for i in chosen]
    state._eig = None
    return state


def has_converged(state: CmaState):
    """Returns (done, reason); reason is "max_generations" or "step_size"."""
    if state.generation >= state.config.max_generations:
        return True, "max_generations"
    vals, _ = _eigen(state)
    if state.sigma * math.sqrt(float(vals[-1])) < STEP_TOL:
        return True, "step_size"
    return False, None


def snapshot(state: CmaState) -> dict:
    """JSON-safe snapshot; restore() round-trips bit-for-bit."""
    return {
        "config": {
            "dim": state.config.dim,
            "population_size": state.config.population_size,
            "n_parents": state.config.n_parents,
            "sigma0": state.config.sigma0,
            "mode": state.config.mode,
            "seed": state.config.seed,
            "max_generations": state.config.max_generations,
        },
        "mode": state.mode,
        "mean": state.mean.tolist(),
        "sigma": state.sigma,
        "cov": state.cov.tolist(),
        "p_sigma": state.p_sigma.tolist(),
        "p_c": state.p_c.tolist(),
        "generation": state.generation,
        "rng_state": state.rng.bit_generator.state,
        "parents": [[px.tolist(), pf] for px, pf in state.parents],
    }


def restore(snap: dict) -> CmaState:
    config = CmaConfig(**snap["config"])
    rng = np.random.default_rng()
    rng.bit_generator.state = snap["rng_state"]
    return CmaState(
        config=config,
        mode=snap["mode"],
        mean=np.array(snap["mean"], dtype=np.float64),
        sigma=float(snap["sigma"]),
        cov=np.array(snap["cov"], dtype=np.float64),
        p_sigma=np.array(snap["p_sigma"], dtype=np.float64),
        p_c=np.array(snap["p_c"], dtype=np.float64),
        generation=int(snap["generation"]),
        rng=rng,
        parents=[(np.array(px, dtype=np.float64), float(pf)) for px, pf in snap["parents"]],
    )
