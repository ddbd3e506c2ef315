"""Signed reward paths and their boundary decomposition.

A path carries X_t = s * phi(A_t, B_t) where phi(k, l) = (k+l)^(-beta) for
k^2 <= k+l (zero otherwise, zero at the origin) and s is a random sign
chosen once per excursion.  The running sum splits at the first and last
renewal inside [1, n] into

    S_n = S'_n + S~_n + S''_n,

with the two primed terms owned by the incomplete excursions overhanging
the window.  Because phi vanishes at renewals the three segments overlap
only in zeros and the identity is exact.

Everything about an excursion's contribution reduces to integer counts of
reward-carrying ages; the counts are implemented exactly (integer floor
square roots), and the roughly-sqrt(tau) size of a full excursion's reward
falls out of them rather than being assumed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .chain import (
    RngLike,
    as_generator,
    interval_alias,
    sample_stationary_levels,
    stationary_level_from_uniform,
)
from .errors import ParameterError
from .measure import MU0, Params

_TAU_VAR_GUESS = 14.0  # rough Var(tau) upper bound for draw budgeting


def phi(params: Params, k: int, l: int) -> float:
    """Reward shape (k+l)^(-beta) on the early ages k^2 <= k+l, else 0."""
    k, l = int(k), int(l)
    if k == 0 and l == 0:
        return 0.0
    if k < 1 or l < 1:
        raise ParameterError(f"invalid state ({k}, {l})")
    level = k + l
    if k * k <= level:
        return float(level) ** (-params.beta)
    return 0.0


def excursion_reward_magnitude(params: Params, tau: int) -> float:
    """Total |reward| of a full excursion of length tau.

    Exactly count(tau) * tau^(-beta) with
    count(tau) = #{k : 1 <= k <= tau-1, k^2 <= tau} = min(isqrt(tau), tau-1);
    a length-1 excursion never leaves the origin and earns nothing.
    """
    tau = int(tau)
    if tau < 1:
        raise ParameterError(f"interval length must be >= 1, got {tau}")
    count = min(math.isqrt(tau), tau - 1)
    if count == 0:
        return 0.0
    return count * float(tau) ** (-params.beta)


def s_prime_count(a: int, b: int, n: int) -> int:
    """Nonzero terms of the leading boundary sum given (A_1, B_1) = (a, b).

    Counts ages j in [a, a+b-1] with j^2 <= a+b, i.e.
    (min(isqrt(a+b), a+b-1) - a + 1)^+, provided the excursion ends inside
    the window (1 + b <= n); otherwise the whole window sits inside one
    excursion and the sum is reassigned to the trailing term.
    """
    a, b, n = int(a), int(b), int(n)
    if a < 1 or b < 1:
        raise ParameterError("ages and residuals must be >= 1")
    if 1 + b > n:
        return 0
    tau = a + b
    return max(0, min(math.isqrt(tau), tau - 1) - a + 1)


def s_double_prime_count(a: int, b: int, n: int) -> int:
    """Nonzero terms of the trailing boundary sum given (A_n, B_n) = (a, b).

    Counts ages j in [max(1, a-n+1), min(a, isqrt(a+b))]; the lower end
    handles windows lying entirely inside one excursion (a >= n).
    """
    a, b, n = int(a), int(b), int(n)
    if a < 1 or b < 1:
        raise ParameterError("ages and residuals must be >= 1")
    return max(0, min(a, math.isqrt(a + b)) - max(a - n, 0))


def _floor_sqrt(arr: np.ndarray) -> np.ndarray:
    """Exact floor square root of an int64 array (float sqrt, corrected)."""
    s = np.sqrt(arr.astype(np.float64)).astype(np.int64)
    s -= s * s > arr
    s += (s + 1) * (s + 1) <= arr
    return s


def _s_prime_count_arr(a, b, n):
    tau = a + b
    return np.maximum(np.minimum(_floor_sqrt(tau), tau - 1) - a + 1, 0)


def _s_double_prime_count_arr(a, b, n):
    tau = a + b
    return np.maximum(
        np.minimum(a, _floor_sqrt(tau)) - np.maximum(a - n, 0), 0
    )


def reward_magnitudes(params: Params, tau: np.ndarray) -> np.ndarray:
    """Vectorized |reward| of full excursions (tau >= 1)."""
    tau = np.asarray(tau, dtype=np.int64)
    count = np.minimum(_floor_sqrt(tau), tau - 1).astype(np.float64)
    return count * tau.astype(np.float64) ** (-params.beta)


@lru_cache(maxsize=32)
def _reward_table(params: Params) -> np.ndarray:
    """Reward magnitudes for tau = 0..K-1 (index = tau), K = alias table size."""
    k = interval_alias(params).K
    tab = np.zeros(k)
    tab[1:] = reward_magnitudes(params, np.arange(1, k))
    tab.setflags(write=False)
    return tab


@dataclass
class SignedPath:
    """Materialized path on times 1..n.

    ages/residuals are the state components per time (both zero at
    renewals); signs maps each excursion's start time (the renewal opening
    it, possibly <= 0 for the excursion straddling time 1) to its sign.
    """

    params: Params
    n: int
    ages: np.ndarray
    residuals: np.ndarray
    x: np.ndarray
    signs: dict

    def state(self, t: int):
        from .chain import ChainState

        return ChainState(int(self.ages[t - 1]), int(self.residuals[t - 1]))


@dataclass(frozen=True)
class SumDecomposition:
    """Split of S_n at the first/last renewal inside the window."""

    s_prime: float
    s_tilde: float
    s_double_prime: float
    s_total: float
    interior_renewal: bool


def _draw_taus_until(params, gen, needed: int) -> np.ndarray:
    """Interval draws whose cumulative sum first reaches `needed`."""
    alias = interval_alias(params)
    blocks = []
    covered = 0
    remaining = needed
    while True:
        budget = int(
            remaining * MU0
            + 6.0 * math.sqrt(max(remaining, 1) * _TAU_VAR_GUESS) * MU0
            + 16
        )
        taus = alias.draw(gen, budget)
        cum = np.cumsum(taus)
        if covered + cum[-1] >= needed:
            stop = int(np.searchsorted(cum, needed - covered))
            blocks.append(taus[: stop + 1])
            return np.concatenate(blocks)
        blocks.append(taus)
        covered += int(cum[-1])
        remaining = needed - covered


def generate_path(params: Params, n: int, rng: RngLike) -> SignedPath:
    """Sample a signed path: stationary chain states plus one fresh
    equiprobable sign per excursion (including the one covering time 1)."""
    if n < 1:
        raise ParameterError(f"path length must be >= 1, got {n}")
    gen = as_generator(rng)

    tau0, age0 = sample_stationary_levels(params, gen, 1)
    tau0, age0 = int(tau0[0]), int(age0[0])
    first_renewal = 1 if tau0 == 0 else 1 + (tau0 - age0)  # 1 + B_1

    if first_renewal <= n:
        taus = _draw_taus_until(params, gen, n - first_renewal + 1)
        renewals = first_renewal + np.concatenate(
            ([0], np.cumsum(taus[:-1]))
        ).astype(np.int64)
    else:
        taus = np.empty(0, dtype=np.int64)
        renewals = np.empty(0, dtype=np.int64)

    # excursion table: opening renewal time + length (straddler first)
    if tau0 == 0:
        exc_start, exc_tau = renewals, taus
    else:
        exc_start = np.concatenate(([1 - age0], renewals))
        exc_tau = np.concatenate(([tau0], taus))

    signs = np.where(gen.random(exc_start.size) < 0.5, 1.0, -1.0)

    ages = np.zeros(n, dtype=np.int64)
    levels = np.zeros(n, dtype=np.int64)
    sgn = np.zeros(n)
    seg_lo = np.maximum(1, exc_start + 1)
    seg_hi = np.minimum(n, exc_start + exc_tau - 1)
    seg_len = np.maximum(seg_hi - seg_lo + 1, 0)
    keep = seg_len > 0
    lo, ln = seg_lo[keep], seg_len[keep]
    if ln.size:
        total = int(ln.sum())
        offsets = np.concatenate(([0], np.cumsum(ln[:-1])))
        within = np.arange(total) - np.repeat(offsets, ln)
        times = np.repeat(lo, ln) + within
        ages[times - 1] = np.repeat(lo - exc_start[keep], ln) + within
        levels[times - 1] = np.repeat(exc_tau[keep], ln)
        sgn[times - 1] = np.repeat(signs[keep], ln)

    inside = ages > 0
    residuals = np.where(inside, levels - ages, 0)
    x = np.zeros(n)
    hit = inside & (ages * ages <= levels)
    x[hit] = sgn[hit] * levels[hit].astype(np.float64) ** (-params.beta)

    sign_map = dict(
        zip(exc_start.tolist(), np.where(signs > 0.0, 1, -1).tolist())
    )
    return SignedPath(
        params=params, n=n, ages=ages, residuals=residuals, x=x, signs=sign_map
    )


def decompose(path: SignedPath) -> SumDecomposition:
    """Split the path sum at its first and last renewal.

    The total is an independent direct summation of the per-time values;
    with no renewal in the window everything is assigned to the trailing
    term, and a single renewal leaves the middle term empty.
    """
    x = path.x
    s_total = float(x.sum())
    renewal_pos = np.flatnonzero(path.ages == 0)
    if renewal_pos.size == 0:
        return SumDecomposition(0.0, 0.0, s_total, s_total, False)
    t1 = int(renewal_pos[0]) + 1
    t2 = int(renewal_pos[-1]) + 1
    s_prime = float(x[:t1].sum())
    s_tilde = float(x[t1 - 1 : t2].sum())
    s_double_prime = float(x[t2 - 1 :].sum())
    return SumDecomposition(s_prime, s_tilde, s_double_prime, s_total, True)


def iter_sums(
    params: Params,
    n: int,
    reps: int,
    rng: RngLike,
    with_rewards: bool = True,
    chunk: int = 1 << 16,
) -> Iterator[dict]:
    """Stream excursion-level path statistics for `reps` stationary paths.

    Yields dict chunks with the decomposition terms and end states; the
    per-time values are never materialized, so horizons up to ~1e4 with
    millions of paths stay affordable.  With with_rewards=False the middle
    term is skipped (no per-excursion sign draws), which roughly halves the
    cost of boundary-only studies.  The draw layout is a pure function of
    (generator state, n, reps, with_rewards, chunk); callers wanting
    bit-reproducibility must hold all of these fixed, as the public
    front ends do.
    """
    if n < 1 or reps < 0:
        raise ParameterError("need n >= 1 and reps >= 0")
    gen = as_generator(rng)
    alias = interval_alias(params)
    r_tab = _reward_table(params) if with_rewards else None
    beta = params.beta
    done = 0
    while done < reps:
        c = min(chunk, reps - done)
        done += c
        yield _roll_chunk(params, n, c, gen, alias, r_tab, beta, with_rewards)


_BLOCK = 64  # excursions drawn per path per vectorized round


def _roll_chunk(params, n, c, gen, alias, r_tab, beta, with_rewards):
    u0 = gen.random(c)
    tau1 = stationary_level_from_uniform(u0, params.alpha)
    origin = tau1 == 0
    a1 = np.zeros(c, dtype=np.int64)
    exc = ~origin
    if np.any(exc):
        span = (tau1[exc] - 1).astype(np.float64)
        a = 1 + np.floor(gen.random(int(exc.sum())) * span).astype(np.int64)
        a1[exc] = np.minimum(a, tau1[exc] - 1)
    b1 = np.where(origin, 0, tau1 - a1)
    sign0 = np.where(gen.random(c) < 0.5, 1.0, -1.0)

    pow1 = np.ones(c)
    if np.any(exc):
        pow1[exc] = tau1[exc].astype(np.float64) ** (-beta)

    s_prime = np.zeros(c)
    s_tilde = np.zeros(c)
    s_dprime = np.zeros(c)
    an = np.zeros(c, dtype=np.int64)
    bn = np.zeros(c, dtype=np.int64)

    no_renew = exc & (b1 >= n)  # first renewal 1 + b1 would land past n
    if np.any(no_renew):
        an[no_renew] = a1[no_renew] + (n - 1)
        bn[no_renew] = b1[no_renew] - (n - 1)
        cnt = _s_double_prime_count_arr(an[no_renew], bn[no_renew], n)
        s_dprime[no_renew] = sign0[no_renew] * cnt * pow1[no_renew]

    pmask = exc & ~no_renew
    if np.any(pmask):
        cnt = _s_prime_count_arr(a1[pmask], b1[pmask], n)
        s_prime[pmask] = sign0[pmask] * cnt * pow1[pmask]

    t = np.where(origin, 1, 1 + b1)
    idx = np.flatnonzero(~no_renew & (t <= n - 1))
    t = t[idx]
    kk = alias.K
    while idx.size:
        m = idx.size
        u1 = gen.random((m, _BLOCK))
        u2 = gen.random((m, _BLOCK))
        j = (u1 * kk).astype(np.int64)
        tau = np.where(u2 < alias._accept[j], j, alias._alias[j]) + 1
        bucket = tau == kk
        if np.any(bucket):
            tau[bucket] = alias._tail_draw(gen, int(bucket.sum()))
        pos = np.cumsum(tau, axis=1)
        pos += t[:, None]
        if with_rewards:
            sgn = np.copysign(1.0, gen.random((m, _BLOCK)) - 0.5)
            rm = r_tab[np.minimum(tau, r_tab.size - 1)]
            if np.any(bucket):
                rm[bucket] = reward_magnitudes(params, tau[bucket])
            contrib = sgn * rm
            contrib[pos > n] = 0.0  # beyond the horizon or past a crossing
            s_tilde[idx] += contrib.sum(axis=1)
        crossed = pos[:, -1] > n
        if np.any(crossed):
            rows = np.flatnonzero(crossed)
            kstar = (pos[rows] > n).argmax(axis=1)
            pos_c = pos[rows, kstar]
            tau_c = tau[rows, kstar]
            t_prev = pos_c - tau_c
            ac = n - t_prev
            bc = pos_c - n
            ended = ac > 0  # ac == 0 means the path ended at a renewal at n
            if np.any(ended):
                sub = idx[rows[ended]]
                aa, bb, tt = ac[ended], bc[ended], tau_c[ended]
                if with_rewards:
                    sc = sgn[rows[ended], kstar[ended]]
                else:
                    sc = np.where(
                        gen.random(int(ended.sum())) < 0.5, 1.0, -1.0
                    )
                cnt = _s_double_prime_count_arr(aa, bb, n)
                s_dprime[sub] = sc * cnt * tt.astype(np.float64) ** (-beta)
                an[sub] = aa
                bn[sub] = bb
        alive = pos[:, -1] <= n - 1
        idx = idx[alive]
        t = pos[alive, -1]

    out = {
        "s_prime": s_prime,
        "s_dprime": s_dprime,
        "a1": a1,
        "b1": b1,
        "an": an,
        "bn": bn,
        "interior": ~no_renew,
    }
    if with_rewards:
        out["s_tilde"] = s_tilde
        out["s_total"] = s_prime + s_tilde + s_dprime
    return out
