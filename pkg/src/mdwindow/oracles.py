"""Three evaluation routes for tail probabilities and deviation rates.

* Monte Carlo with Wilson confidence intervals, for probabilities the
  sampler can actually resolve.
* Exact finite enumeration of the trailing boundary term's law: given the
  end state (A_n, B_n) the magnitude of S''_n is deterministic and the sign
  is a fair coin, so its tail is a single sum over the invariant measure.
* Closed-form log-domain certificates for horizons up to 1e12 and beyond,
  where the dichotomy between scale exponents inside and outside the
  anomalous window actually shows: a lower bound pinning one rare end
  state, and an upper bound from the exact interval tail.

Only log-scale magnitudes are ever manipulated, so astronomically small
probabilities stay exact to float precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from .chain import RngLike, RngStream, as_generator, interval_alias
from .composite import WindowSet
from .errors import (
    BracketEmptyError,
    ParameterError,
    PrecisionError,
    WindowBoundaryError,
)
from .measure import (
    Params,
    _level_log_mu,
    log_mu,
    window_from_params,
)
from .paths import (
    SignedPath,
    _floor_sqrt,
    decompose,
    iter_sums,
    s_double_prime_count,
)

_TARGETS = ("total", "tilde", "boundary", "dprime")


def _worker_cap() -> int:
    import os

    return max(os.cpu_count() or 1, 1)


@dataclass(frozen=True)
class RateQuery:
    """Deviation event at horizon n: the chosen component of the sum,
    divided by sqrt(n), exceeding c * n^gamma (threshold c * n^(gamma+1/2)
    in plain sum units)."""

    n: int
    gamma: float
    c: float

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"horizon must be >= 1, got {self.n}")
        if not 0.0 < self.gamma < 0.5:
            raise ParameterError(f"gamma must lie in (0, 0.5), got {self.gamma}")
        if not self.c > 0.0:
            raise ParameterError(f"threshold coefficient must be > 0, got {self.c}")

    @property
    def threshold(self) -> float:
        return self.c * float(self.n) ** (self.gamma + 0.5)


@dataclass(frozen=True)
class TailEstimate:
    """Monte Carlo tail probability with a two-sided Wilson interval."""

    p_hat: float
    ci_low: float
    ci_high: float
    reps: int
    hits: int
    confidence: float


@dataclass(frozen=True)
class RateCertificate:
    """Exact log-probability bound at one (n, gamma, c) and its rate.

    kind "case2_lower": the event {A_n = a_n, B_n = b_n} with
    a_n + b_n = c_n forces |S''_n| above the threshold, so
    log P >= log(1/4) + log mu_(c_n).
    kind "case1_upper": both boundary terms are dominated by the exact
    interval tail, log P <= log 2 - k^alpha.
    """

    kind: str
    n: int
    gamma: float
    c: float
    log_prob: float
    rate: float
    c_n: Optional[int] = None
    a_n: Optional[int] = None
    b_n: Optional[int] = None


def wilson_interval(hits: int, reps: int, confidence: float) -> tuple[float, float]:
    """Two-sided Wilson score interval; at zero hits the upper end is the
    exact one-sided bound 1 - (1-confidence)^(1/reps) (rule of three,
    generalized to the stated confidence)."""
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    if not 0.0 < confidence < 1.0:
        raise ParameterError("confidence must lie in (0, 1)")
    if hits == 0:
        return 0.0, 1.0 - (1.0 - confidence) ** (1.0 / reps)
    z = float(norm.ppf(0.5 + 0.5 * confidence))
    p = hits / reps
    denom = 1.0 + z * z / reps
    center = (p + z * z / (2.0 * reps)) / denom
    spread = (
        z * math.sqrt((p * (1.0 - p) + z * z / (4.0 * reps)) / reps) / denom
    )
    return max(0.0, center - spread), min(1.0, center + spread)


def _component(chunk: dict, target: str) -> np.ndarray:
    if target == "total":
        return chunk["s_total"]
    if target == "tilde":
        return chunk["s_tilde"]
    if target == "boundary":
        return chunk["s_prime"] + chunk["s_dprime"]
    if target == "dprime":
        return chunk["s_dprime"]
    raise ParameterError(f"unknown target {target!r}; choose from {_TARGETS}")


def mc_tail_curve(
    params: Params,
    n: int,
    thresholds: dict,
    reps: int,
    confidence: float,
    rng: RngStream,
    shards: int = 1,
) -> dict:
    """Exceedance estimates for several targets and thresholds from one
    shared set of simulated paths.

    thresholds maps target name -> array of sum-unit thresholds.  Work is
    split over `shards` child streams and hit counts merged, so the result
    is a pure function of (seed, stream_id, shards).
    """
    for target in thresholds:
        if target not in _TARGETS:
            raise ParameterError(f"unknown target {target!r}")
    if shards < 1 or reps < shards:
        raise ParameterError("need 1 <= shards <= reps")
    with_rewards = any(t in ("total", "tilde") for t in thresholds)
    xs = {t: np.atleast_1d(np.asarray(v, dtype=np.float64)) for t, v in thresholds.items()}
    base = reps // shards
    extra = reps % shards

    def run_shard(s: int) -> dict:
        r = base + (1 if s < extra else 0)
        local = {t: np.zeros(v.size, dtype=np.int64) for t, v in xs.items()}
        if r == 0:
            return local
        gen = rng.shard(s)
        for chunk in iter_sums(params, n, r, gen, with_rewards=with_rewards):
            for target, v in xs.items():
                comp = _component(chunk, target)
                local[target] += (comp[None, :] > v[:, None]).sum(axis=1)
        return local

    # shards are independent streams and the merge is order-fixed, so the
    # totals do not depend on scheduling; numpy releases the GIL on the
    # heavy ops, making threads worthwhile.
    hits = {t: np.zeros(v.size, dtype=np.int64) for t, v in xs.items()}
    if shards > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(shards, _worker_cap())) as pool:
            for local in pool.map(run_shard, range(shards)):
                for target in xs:
                    hits[target] += local[target]
    else:
        for target, local in run_shard(0).items():
            hits[target] += local
    out = {}
    for target, v in xs.items():
        ests = []
        for i in range(v.size):
            h = int(hits[target][i])
            lo, hi = wilson_interval(h, reps, confidence)
            ests.append(
                TailEstimate(
                    p_hat=h / reps,
                    ci_low=lo,
                    ci_high=hi,
                    reps=reps,
                    hits=h,
                    confidence=confidence,
                )
            )
        out[target] = ests
    return out


def mc_tail(
    params: Params,
    query: RateQuery,
    target: str,
    reps: int,
    confidence: float,
    rng: RngStream,
    shards: int = 1,
) -> TailEstimate:
    """Monte Carlo exceedance probability of one deviation event."""
    curve = mc_tail_curve(
        params,
        query.n,
        {target: np.array([query.threshold])},
        reps,
        confidence,
        rng,
        shards,
    )
    return curve[target][0]


def boundary_sum_sup(params: Params, n: int) -> float:
    """Deterministic supremum of |S'_n + S''_n| over every configuration.

    Within one excursion |sum| <= min(n, sqrt(tau)) tau^(-beta) <= n^(1-2b)
    (the scalar bound below).  When both boundary terms are present the
    window contains a renewal, so the two overhang lengths satisfy
    B_1 + A_n <= n - 1 and |S'| + |S''| <= B_1^(1-2b) + A_n^(1-2b), which
    is maximized at the even split.  The overall sup is the larger of the
    two regimes.
    """
    b = params.beta
    single = float(n) ** (1.0 - 2.0 * b)
    if n < 2:
        return single
    split = 2.0 ** (2.0 * b) * float(n - 1) ** (1.0 - 2.0 * b)
    return max(single, split)


def boundary_tail_exact(
    params: Params, n: int, x: float, rel_tail: float = 1e-6
) -> float:
    """log P[S''_n > x] by exact enumeration over end states.

    Given (A_n, B_n) = (a, b) the magnitude of S''_n is
    count(a, b, n) * (a+b)^(-beta) and the sign is a fair coin, so

        P[|S''_n| > x] = sum_tau mu_tau * #{(a, b) : a+b = tau, count > x tau^beta}

    and the signed tail is half of that.  The count is unimodal in the age,
    so the qualifying ages per level form one interval and each level is
    O(1).  The level cut N is raised until the neglected size-biased mass
    exp(-N^alpha) is below rel_tail times the accumulated sum; if that
    cannot be certified the requested point is unreachable.
    """
    if x <= 0.0:
        raise ParameterError(f"threshold must be > 0, got {x}")
    if n < 1:
        raise ParameterError(f"horizon must be >= 1, got {n}")
    beta = params.beta
    # attained maximum of |S''| is n^(1-2 beta) (at tau = n^2, age n)
    if x >= float(n) ** (1.0 - 2.0 * beta):
        return -math.inf

    cap = 1 << 24
    n_levels = 1 << 12
    while True:
        total = _dprime_abs_tail_sum(params, n, x, n_levels)
        neglected = math.exp(-(float(n_levels) ** params.alpha))
        if total > 0.0 and neglected <= rel_tail * total:
            return math.log(0.5 * total)
        if n_levels >= cap:
            raise PrecisionError(
                f"P[S'' > {x}] at n={n} is below the best rigorous remainder "
                f"bound {neglected:.3e}; the point is unreachable"
            )
        n_levels <<= 1


def _dprime_abs_tail_sum(params: Params, n: int, x: float, n_max: int) -> float:
    """sum over levels tau <= n_max of mu_tau * #qualifying (a, b) pairs."""
    beta = params.beta
    total = 0.0
    chunk = 1 << 21
    for lo in range(2, n_max + 1, chunk):
        hi = min(lo + chunk - 1, n_max)
        taus = np.arange(lo, hi + 1, dtype=np.int64)
        s = _floor_sqrt(taus)
        q = x * taus.astype(np.float64) ** beta
        top = np.minimum(s, n).astype(np.float64)
        qual = top > q
        if not np.any(qual):
            # q grows with the level; once it clears the age cap n no
            # later level can qualify either
            if float(q[0]) > n:
                break
            continue
        qf = np.floor(q).astype(np.int64)
        lo_age = qf + 1
        hi_age = np.minimum(taus - 1, n + s - qf - 1)
        pairs = np.where(qual, np.maximum(hi_age - lo_age + 1, 0), 0)
        mu = np.exp(_level_log_mu(params, lo, hi))
        total += float((mu * pairs).sum())
    return total


def rate_transform(log_p_value: float, n: int, gamma: float) -> float:
    """Normalized rate log P / n^(2 gamma)."""
    if n < 1:
        raise ParameterError(f"horizon must be >= 1, got {n}")
    return log_p_value / float(n) ** (2.0 * gamma)


def gaussian_reference(c: float) -> float:
    """Normal-approximation rate -c^2/2 that holds outside the windows."""
    if not c > 0.0:
        raise ParameterError(f"threshold coefficient must be > 0, got {c}")
    return -0.5 * c * c


def case1_upper(params: Params, query: RateQuery) -> RateCertificate:
    """Closed-form upper certificate for gamma below the window.

    Both boundary terms are bounded by (A+B)^(1/2-beta) of their own
    excursion, so the union bound plus the exact interval tail gives
    log P <= log 2 - floor(x^(1/(1/2-beta)))^alpha at x = c n^(gamma+1/2)/2.
    The rate sinks to -infinity along growing n: the exponent
    (gamma+1/2) alpha/(1/2-beta) beats 2 gamma exactly when gamma < u.
    """
    window = window_from_params(params)
    if not query.gamma < window.u:
        raise ParameterError(
            f"gamma={query.gamma} is not below the window start u={window.u}"
        )
    half_exponent = 1.0 / (0.5 - params.beta)
    x = 0.5 * query.threshold
    k = math.floor(x ** half_exponent)
    if k < 1:
        raise ParameterError(
            f"horizon n={query.n} too small: the tail cutoff is below 1"
        )
    log_prob = math.log(2.0) - float(k) ** params.alpha
    return RateCertificate(
        kind="case1_upper",
        n=query.n,
        gamma=query.gamma,
        c=query.c,
        log_prob=log_prob,
        rate=rate_transform(log_prob, query.n, query.gamma),
    )


def _case2_construction(params: Params, query: RateQuery):
    """Level and split for the lower certificate, or None if n is too small.

    The level bracket is n^((gamma+1/2)/(1/2-beta)) << c_n << n^(2 gamma /
    alpha) for gamma below alpha and << n^2 above; c_n sits at the
    log-space midpoint.  The split a_n = ceil(sqrt(c_n)) + 1 is the
    smallest age making sqrt(a_n + b_n) < a_n true.
    """
    a, b = params.alpha, params.beta
    lo_exp = (query.gamma + 0.5) / (0.5 - b)
    hi_exp = min(2.0 * query.gamma / a, 2.0)
    log_n = math.log(float(query.n))
    c_n = round(math.exp(0.5 * (lo_exp + hi_exp) * log_n))
    if c_n < 4:
        return None
    # smallest age with sqrt(a_n + b_n) < a_n: isqrt(c_n) + 1 squares past c_n
    a_n = math.isqrt(c_n) + 1
    b_n = c_n - a_n
    if b_n < 1 or not a_n < query.n:
        return None
    count = s_double_prime_count(a_n, b_n, query.n)
    if count < 1:
        return None
    # certified magnitude must beat the threshold; compare in log domain
    log_mag = math.log(count) - b * math.log(c_n)
    log_thr = math.log(query.c) + (query.gamma + 0.5) * log_n
    if not log_mag > log_thr:
        return None
    return c_n, a_n, b_n


def case2_certificate(params: Params, query: RateQuery) -> RateCertificate:
    """Closed-form lower certificate for gamma strictly inside the window.

    Pins the end state (A_n, B_n) = (a_n, b_n): conditionally the trailing
    boundary magnitude is deterministic and above the threshold, the sign
    is a fair coin, and the leading term is conditionally independent and
    symmetric, so P >= mu_(c_n) / 4.  The rate climbs to 0 along n.
    """
    window = window_from_params(params)
    if not window.u < query.gamma < window.v:
        raise ParameterError(
            f"gamma={query.gamma} is not strictly inside the window "
            f"({window.u}, {window.v})"
        )
    built = _case2_construction(params, query)
    if built is None:
        min_n = _case2_min_n(params, query.gamma, query.c)
        raise BracketEmptyError(
            f"horizon n={query.n} too small for the level bracket to "
            f"separate; minimal usable n is {min_n}",
            min_n=min_n,
        )
    c_n, a_n, b_n = built
    log_prob = math.log(0.25) + log_mu(params, c_n)
    return RateCertificate(
        kind="case2_lower",
        n=query.n,
        gamma=query.gamma,
        c=query.c,
        log_prob=log_prob,
        rate=rate_transform(log_prob, query.n, query.gamma),
        c_n=c_n,
        a_n=a_n,
        b_n=b_n,
    )


def _case2_min_n(params: Params, gamma: float, c: float) -> int:
    """Smallest horizon at which the lower certificate exists."""
    lo, hi = 1, 2
    while _case2_construction(params, RateQuery(hi, gamma, c)) is None:
        lo, hi = hi, hi * 2
        if hi > 1 << 40:
            raise PrecisionError("no usable horizon below 2^40")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _case2_construction(params, RateQuery(mid, gamma, c)) is None:
            lo = mid
        else:
            hi = mid
    return hi


def predicted_rate(windows: WindowSet, gamma: float, c: float) -> float:
    """Limit rate claimed for the process built from `windows`: 0 inside
    any window, -c^2/2 in the interior of the complement, undefined (error)
    exactly on window endpoints."""
    if not c > 0.0:
        raise ParameterError(f"threshold coefficient must be > 0, got {c}")
    if not 0.0 < gamma < 0.5:
        raise ParameterError(f"gamma must lie in (0, 0.5), got {gamma}")
    where = windows.locate(gamma)
    if where == "boundary":
        raise WindowBoundaryError(
            f"gamma={gamma} sits on a window endpoint; the dichotomy is "
            "stated on open sets only"
        )
    return 0.0 if where == "inside" else gaussian_reference(c)


def autocovariance_exact(params: Params, k: int, tol: float = 1e-12) -> float:
    """Exact lag-k autocovariance of the per-time values.

    Cross-excursion pairs vanish by sign independence; within one excursion
    at level tau both ages must carry reward, leaving
    (isqrt(tau) - k)^+ admissible ages, each of stationary weight mu_tau:

        r(k) = sum_tau mu_tau tau^(-2 beta) (isqrt(tau) - k)^+ .

    Levels below (k+1)^2 contribute nothing.  Truncation picks N from the
    exact size-biased tail so the remainder stays under tol.
    """
    if k < 0:
        raise ParameterError(f"lag must be >= 0, got {k}")
    if tol <= 0.0:
        raise ParameterError("tol must be positive")
    a, b = params.alpha, params.beta
    N = 1 << 10

    def rem(N):
        # per-term (isqrt - k) tau^(-2b) <= sqrt(tau) tau^(-2b) and
        # mu_tau = Delta(tau)/(tau-1): tail <= exp(-N^a) * 2 N^(-1/2-2b)
        return 2.0 * math.exp(-(float(N) ** a)) * float(N) ** (-0.5 - 2.0 * b)

    start = max((k + 1) * (k + 1), 2)
    while rem(max(N, start)) >= tol:
        N <<= 1
        if N > 1 << 26:
            raise PrecisionError(f"lag-{k} autocovariance needs too many terms")
    N = max(N, start)
    total = 0.0
    chunk = 1 << 22
    for lo in range(start, N + 1, chunk):
        hi = min(lo + chunk - 1, N)
        taus = np.arange(lo, hi + 1, dtype=np.int64)
        counts = np.maximum(_floor_sqrt(taus) - k, 0).astype(np.float64)
        mu = np.exp(_level_log_mu(params, lo, hi))
        total += float(
            (mu * counts * taus.astype(np.float64) ** (-2.0 * b)).sum()
        )
    return total


def autocovariance_bound(params: Params, k: int) -> float:
    """Stretched-exponential dominance bound for k >= 1.

    Any contributing level needs tau >= (k+1)^2; bounding the count by
    tau - 1 leaves the exact interval tail exp(-((k+1)^2 - 1)^alpha).
    """
    if k < 1:
        raise ParameterError(f"bound holds for lags >= 1, got {k}")
    return math.exp(-(float((k + 1) * (k + 1) - 1) ** params.alpha))


def conditioned_dprime_exceedance(
    params: Params,
    n: int,
    a: int,
    b: int,
    threshold: float,
    reps: int,
    rng: RngLike,
) -> TailEstimate:
    """Empirical P[S''_n > threshold] given (A_n, B_n) = (a, b).

    Direct rejection on the end state has probability mu_(a+b), hopeless
    for certificate-sized levels, so the conditioning is structural: the
    final excursion is imposed (its interior law is deterministic anyway)
    and the prefix before the renewal at n - a is generated backward from
    that renewal.  Reversing time maps the chain onto itself with age and
    residual swapped, and the invariant measure is symmetric under that
    swap, so the backward prefix is again a plain interval roll.  The paths
    are materialized and pushed through the standard decomposition, making
    this an end-to-end check of the certificate's event rather than a
    restatement of the count formula.
    """
    if not (1 <= n - a <= n - 1):
        raise ParameterError("need 1 <= n - a <= n - 1 for an interior renewal")
    gen = as_generator(rng)
    alias = interval_alias(params)
    tau = a + b
    hits = 0
    r = n - a
    for _ in range(reps):
        ages = np.zeros(n, dtype=np.int64)
        levels = np.zeros(n, dtype=np.int64)
        sgn = np.zeros(n)
        # imposed final excursion: ages 1..a at times r+1..n
        ages[r : n] = np.arange(1, a + 1)
        levels[r : n] = tau
        sgn[r : n] = 1.0 if gen.random() < 0.5 else -1.0
        # backward prefix: renewal at r, intervals rolled toward time 1
        edge = r
        while edge > 1:
            t_back = int(alias.draw(gen, 1)[0])
            s = 1.0 if gen.random() < 0.5 else -1.0
            lo = max(1, edge - t_back + 1)
            if t_back > 1 and lo <= edge - 1:
                span = np.arange(lo, edge)
                ages[span - 1] = span - (edge - t_back)
                levels[span - 1] = t_back
                sgn[span - 1] = s
            edge -= t_back
        x = np.zeros(n)
        inside = ages > 0
        hit = inside & (ages * ages <= levels)
        x[hit] = sgn[hit] * levels[hit].astype(np.float64) ** (-params.beta)
        path = SignedPath(
            params=params,
            n=n,
            ages=ages,
            residuals=np.where(inside, levels - ages, 0),
            x=x,
            signs={},
        )
        if decompose(path).s_double_prime > threshold:
            hits += 1
    lo, hi = wilson_interval(hits, reps, 0.99)
    return TailEstimate(
        p_hat=hits / reps,
        ci_low=lo,
        ci_high=hi,
        reps=reps,
        hits=hits,
        confidence=0.99,
    )
