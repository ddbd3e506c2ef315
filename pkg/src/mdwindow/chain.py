"""Exact stationary sampling and stepping of the age/residual-life chain.

The chain state is either the origin or a pair (age, residual) of positive
integers; inside an excursion the only move is (k, l) -> (k+1, l-1), and at
the origin a fresh interval length is drawn from the return law {p_n}.

Stationary draws invert the closed-form size-biased tail exp(-k^alpha), so
they carry no truncation bias even though the support is unbounded.  Draws
from {p_n} itself have no closed-form inverse; they go through a lazily
grown CDF table, with an exact size-biased rejection step for the rare mass
beyond the table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np

from .errors import ParameterError
from .measure import (
    LOG_MU0,
    MU0,
    Params,
    _level_log_mu,
    p1,
)

# Interval lengths are clamped here; for the supported exponent range the
# probability of ever exceeding it is below exp(-2^(62 alpha)) ~ 1e-34.
_TAU_CAP = 1 << 62


@dataclass(frozen=True)
class ChainState:
    """Origin (0, 0) or a point (age, residual) with both parts >= 1."""

    age: int
    residual: int

    def __post_init__(self):
        ok = (self.age == 0 and self.residual == 0) or (
            self.age >= 1 and self.residual >= 1
        )
        if not ok:
            raise ParameterError(
                f"invalid state ({self.age}, {self.residual}): exactly one zero"
            )

    @property
    def is_origin(self) -> bool:
        return self.age == 0

    @property
    def level(self) -> int:
        return self.age + self.residual


ORIGIN = ChainState(0, 0)


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream: (seed, stream_id) pins the draw sequence,
    distinct stream ids give statistically independent streams."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        )

    def shard(self, index: int) -> np.random.Generator:
        """Independent child generator for worker `index`."""
        return np.random.default_rng(
            np.random.SeedSequence(
                entropy=self.seed, spawn_key=(self.stream_id, index)
            )
        )

    def substream(self, index: int) -> "RngStream":
        """Child stream addressable by further sharding."""
        return RngStream(seed=self.seed, stream_id=(self.stream_id << 16) ^ (index + 1))


RngLike = Union[RngStream, np.random.Generator]


def as_generator(rng: RngLike) -> np.random.Generator:
    """Accept either a stream descriptor or a live generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


def stationary_level_from_uniform(u: np.ndarray, alpha: float) -> np.ndarray:
    """Map uniforms on [0,1) to stationary levels (0 = origin).

    With probability mu_0 the state is the origin; otherwise u - mu_0 is
    uniform on (0, 1/e) and the level is the unique m with
    exp(-m^alpha) <= u - mu_0 < exp(-(m-1)^alpha), i.e.
    m = ceil((-log(u - mu_0))^(1/alpha)).
    """
    u = np.asarray(u, dtype=np.float64)
    tau = np.zeros(u.shape, dtype=np.int64)
    exc = u >= MU0
    if np.any(exc):
        v = u[exc] - MU0
        v = np.maximum(v, 5e-324)  # guard the measure-zero endpoint
        m = np.ceil((-np.log(v)) ** (1.0 / alpha))
        m = np.minimum(m, float(_TAU_CAP))
        tau[exc] = np.maximum(m.astype(np.int64), 2)
    return tau


def sample_stationary_levels(
    params: Params, rng: RngLike, size: int
) -> tuple[np.ndarray, np.ndarray]:
    """Vector of stationary states as (level, age) arrays; level 0 = origin."""
    gen = as_generator(rng)
    tau = stationary_level_from_uniform(gen.random(size), params.alpha)
    age = np.zeros(size, dtype=np.int64)
    exc = tau > 0
    if np.any(exc):
        span = (tau[exc] - 1).astype(np.float64)
        a = 1 + np.floor(gen.random(int(exc.sum())) * span).astype(np.int64)
        age[exc] = np.minimum(a, tau[exc] - 1)
    return tau, age


def sample_stationary_state(params: Params, rng: RngLike) -> ChainState:
    """One draw from the invariant measure.

    Origin with probability 1 - 1/e; otherwise the level comes from the
    size-biased law P[tau = m] = (m-1) mu_m by exact tail inversion and the
    age is uniform on {1, ..., tau-1}.
    """
    tau, age = sample_stationary_levels(params, rng, 1)
    t, a = int(tau[0]), int(age[0])
    if t == 0:
        return ORIGIN
    return ChainState(a, t - a)


def _interval_tail_reject(
    params: Params, gen: np.random.Generator, count: int, n_min: int
) -> np.ndarray:
    """Exact draw from {p_k} conditional on k > n_min.

    Proposes from the closed-form size-biased tail (weights (k-1) mu_k,
    inverted exactly as in the stationary sampler) and accepts with
    probability n_min/(k-1), which is the p-law/size-biased likelihood
    ratio normalized by its supremum on the tail.
    """
    a = params.alpha
    tail = math.exp(-(float(n_min) ** a))
    out = np.empty(count, dtype=np.int64)
    need = np.arange(count)
    while need.size:
        v = np.maximum(tail * gen.random(need.size), 5e-324)
        k = np.maximum(np.ceil((-np.log(v)) ** (1.0 / a)), float(n_min + 1))
        k = np.minimum(k, float(_TAU_CAP)).astype(np.int64)
        accept = gen.random(need.size) < n_min / (k - 1).astype(np.float64)
        out[need[accept]] = k[accept]
        need = need[~accept]
    return out


class PLawSampler:
    """Inverse-CDF sampler for the return-interval law {p_n}.

    The cumulative table is extended lazily (doubling) whenever a uniform
    lands beyond the tabulated mass; past the growth cap the draw falls
    back to the exact size-biased rejection step.
    """

    _GROW_CAP = 1 << 20

    def __init__(self, params: Params, n0: int = 4096):
        self.params = params
        self._p1 = p1(params)
        self._rebuild(n0)

    def _rebuild(self, n: int):
        probs = np.exp(_level_log_mu(self.params, 2, n) - LOG_MU0)
        cdf = np.empty(n)  # cdf[k-1] = P[tau <= k]
        cdf[0] = self._p1
        cdf[1:] = self._p1 + np.cumsum(probs)
        self.cdf = cdf
        self.n = n

    def _tail_draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return _interval_tail_reject(self.params, gen, count, self.n)

    def draw(self, rng: RngLike, size: int) -> np.ndarray:
        gen = as_generator(rng)
        u = gen.random(size)
        while self.n < self._GROW_CAP and np.any(u >= self.cdf[-1]):
            self._rebuild(self.n * 2)
        tau = np.searchsorted(self.cdf, u, side="right").astype(np.int64) + 1
        beyond = u >= self.cdf[-1]
        if np.any(beyond):
            tau[beyond] = self._tail_draw(gen, int(beyond.sum()))
        return tau


@lru_cache(maxsize=32)
def p_sampler(params: Params) -> PLawSampler:
    return PLawSampler(params)


class IntervalAlias:
    """O(1) alias-method draw for {p_n}, used by the batched path engines.

    Outcomes 1..K-1 are exact table entries; the last slot is a bucket for
    the whole mass beyond K-1 and resolves through the same size-biased
    rejection step as the CDF sampler, so the combined draw is exact.
    The two samplers are cross-checked against each other in the tests.
    """

    K = 8192

    def __init__(self, params: Params):
        self.params = params
        k = self.K
        probs = np.empty(k)
        probs[0] = p1(params)
        probs[1 : k - 1] = np.exp(_level_log_mu(params, 2, k - 1) - LOG_MU0)
        probs[k - 1] = max(1.0 - probs[: k - 1].sum(), 0.0)  # tail bucket
        self._accept, self._alias = _vose_tables(probs / probs.sum())

    def _tail_draw(self, gen: np.random.Generator, count: int) -> np.ndarray:
        return _interval_tail_reject(self.params, gen, count, self.K - 1)

    def draw(self, rng: RngLike, size: int) -> np.ndarray:
        gen = as_generator(rng)
        u = gen.random((size, 2))
        j = (u[:, 0] * self.K).astype(np.int64)
        take = u[:, 1] < self._accept[j]
        slot = np.where(take, j, self._alias[j])
        tau = slot + 1
        bucket = slot == self.K - 1
        if np.any(bucket):
            tau[bucket] = self._tail_draw(gen, int(bucket.sum()))
        return tau


def _vose_tables(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose alias construction; w must sum to 1."""
    k = w.size
    scaled = w * k
    accept = np.ones(k)
    alias = np.arange(k, dtype=np.int64)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        g = large.pop()
        accept[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] - (1.0 - scaled[s])
        (small if scaled[g] < 1.0 else large).append(g)
    for i in small + large:
        accept[i] = 1.0
    return accept, alias


@lru_cache(maxsize=32)
def interval_alias(params: Params) -> IntervalAlias:
    return IntervalAlias(params)


def sample_p_interval(params: Params, rng: RngLike) -> int:
    """One interval length from {p_n} (the law of a fresh excursion)."""
    return int(p_sampler(params).draw(rng, 1)[0])


def step(params: Params, state: ChainState, rng: RngLike) -> ChainState:
    """One transition of the chain.

    Inside an excursion the move is deterministic: (k, l) -> (k+1, l-1) if
    l > 1, else back to the origin.  From the origin an interval length tau
    is drawn; tau = 1 is the self-loop, otherwise the excursion starts at
    (1, tau - 1).
    """
    if not state.is_origin:
        if state.residual > 1:
            return ChainState(state.age + 1, state.residual - 1)
        return ORIGIN
    tau = sample_p_interval(params, rng)
    if tau == 1:
        return ORIGIN
    return ChainState(1, tau - 1)


def run_path(params: Params, n: int, rng: RngLike) -> list[ChainState]:
    """States at times 1..n: stationary start, then chain steps."""
    if n < 1:
        raise ParameterError(f"path length must be >= 1, got {n}")
    gen = as_generator(rng)
    states = [sample_stationary_state(params, gen)]
    for _ in range(n - 1):
        states.append(step(params, states[-1], gen))
    return states


def stationary_push_l1(params: Params, n_max: int) -> dict:
    """One exact kernel step applied to the invariant measure truncated at
    level n_max, and the L1 distance back to the full measure.

    The truncated measure is uniform within each level, and a single step
    keeps it so except at age 1 (refilled from the origin as mu_0 * p_m)
    and at the origin (refilled by the self-loop and by every age-(m-1)
    state).  The distance therefore reduces to

        |mu_0 p_1 + sum_{m<=N} mu_m - mu_0|   (origin deficit)
      + sum_{m<=N} |mu_0 p_m - mu_m|          (age-1 entries)
      + exp(-N^alpha)                         (levels beyond the truncation)

    (mass the step pushes from the origin to levels beyond N is dropped,
    which only enlarges the level term already counted above; the origin
    deficit itself equals the dropped mass and is bounded by
    exp(-N^alpha)/N).  Returns the exactly computable part and a rigorous
    upper bound on the total.
    """
    logs = _level_log_mu(params, 2, n_max)
    mu = np.exp(logs)
    p = np.exp(logs - LOG_MU0)
    origin_new = MU0 * p1(params) + float(mu.sum())
    exact = abs(origin_new - MU0) + float(np.abs(MU0 * p - mu).sum())
    tail = math.exp(-(float(n_max) ** params.alpha))
    return {
        "exact_part": exact,
        "tail_mass": tail,
        "l1_upper": exact + tail,
    }
