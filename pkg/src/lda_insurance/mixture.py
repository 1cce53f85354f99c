"""Closed-form annual loss laws for Poisson frequency with Lévy severities.

Given N = n events, the annual loss is a sum of n Lévy(gamma, edge) losses,
which is again Lévy with scale n^2 gamma on ``[n * edge, inf)``. The annual
loss is therefore a Poisson-weighted mixture of Lévy laws plus an atom at
zero. Two independent cells give a doubly indexed mixture with scales
``(n sqrt(gamma1) + m sqrt(gamma2))^2``.

Throughout, ``delta`` passed to the builders is the *support edge* of the
severity. The S(0) location of the n-fold sum is kept in
``MixtureDist.delta_tilde``; the support edge of each component is
``delta_tilde - gamma_tilde``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .special import erfc, erfcinv
from .stable import levy_cdf, levy_pdf

__all__ = [
    "TruncationRule",
    "MixtureDist",
    "SeriesTruncationError",
    "build_mixture",
    "build_mixture_two_risks",
    "ilp_mitigated_mixture",
    "mixture_pdf",
    "mixture_cdf",
    "mixture_quantile",
    "mixture_median_series",
    "mixture_tail_series",
    "median_weight_peak",
    "levy_partial_moments",
    "mixture_partial_moment",
    "analytic_expected_claim",
    "analytic_claim_variance",
    "analytic_scr",
    "analytic_es_mcr",
]

C_HALF = math.sin(math.pi / 4) * math.gamma(0.5) / math.pi


class SeriesTruncationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncationRule:
    rel_cutoff: float = math.exp(-37)
    hard_cap: int = 10_000

    def __post_init__(self):
        if not 0.0 < self.rel_cutoff < 1.0:
            raise ValueError("rel_cutoff must lie in (0, 1)")
        if self.hard_cap < 1:
            raise ValueError("hard_cap must be at least 1")


@dataclass(frozen=True, eq=False)
class MixtureDist:
    """Truncated Poisson-Lévy mixture.

    Component arrays are sorted by increasing weight so that sums
    accumulate the smallest terms first.
    """

    lam: tuple
    gamma: tuple
    delta: tuple
    n_lower: int
    n_upper: int
    index: np.ndarray  # (k,) for one cell, (k, 2) for two
    weights: np.ndarray
    gamma_tilde: np.ndarray
    delta_tilde: np.ndarray
    atom_at_zero: float
    tail_bound: float
    peak_index: int = 0
    edges: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", self.delta_tilde - self.gamma_tilde)

    @property
    def n_risks(self) -> int:
        return len(self.lam)

    @property
    def n_terms(self) -> int:
        return self.weights.size


def _log_poisson(n, lam):
    n = np.asarray(n, dtype=float)
    lg = np.vectorize(math.lgamma, otypes=[float])(n + 1.0) if n.ndim else math.lgamma(float(n) + 1.0)
    return -lam + n * math.log(lam) - lg


def _poisson_range(lam, log_floor, hard_cap):
    """Indices n >= 1 whose log Poisson weight is at least ``log_floor``."""
    peak = max(1, int(math.floor(lam)))
    lo = peak
    while lo > 1 and _log_poisson(lo - 1, lam) >= log_floor:
        lo -= 1
    hi = peak
    while _log_poisson(hi + 1, lam) >= log_floor:
        hi += 1
        if hi > hard_cap:
            raise SeriesTruncationError("series truncation failed: hard cap reached before cutoff")
    return lo, hi


def _poisson_mass_outside(lam, lo, hi):
    """P(1 <= N < lo) + P(N > hi)."""
    below = sum(math.exp(_log_poisson(n, lam)) for n in range(1, lo))
    above = 0.0
    n = hi + 1
    while True:
        t = math.exp(_log_poisson(n, lam))
        above += t
        if t < 1e-300 or (n > lam and t < 1e-18 * max(above, 1e-300)):
            break
        n += 1
    return below + above


def median_weight_peak(lam: float) -> int:
    """Index n >= 1 maximising lam^n n^2 / n!, found by hill climbing.

    Consecutive terms have ratio lam (n+1) / n^2, so exact ties occur
    (lam = 1/2 gives W_1 = W_2); ties go to the smaller index.
    """
    ratio = lambda n: lam * (n + 1) / (n * n)  # W_{n+1} / W_n
    n = max(1, int(math.floor(lam)))
    while True:
        if ratio(n) > 1.0 + 1e-12:
            n += 1
        elif n > 1 and ratio(n - 1) <= 1.0 + 1e-12:
            n -= 1
        else:
            return n


def build_mixture(lam: float, gamma: float, delta: float = 0.0, rule: TruncationRule = TruncationRule()):
    """Annual loss law for Poisson(lam) counts and Lévy(gamma) losses on ``[delta, inf)``."""
    if not (lam > 0 and gamma > 0):
        raise ValueError("lam and gamma must be positive")
    peak = max(1, int(math.floor(lam)))
    log_floor = _log_poisson(peak, lam) + math.log(rule.rel_cutoff)
    lo, hi = _poisson_range(lam, log_floor, rule.hard_cap)
    n = np.arange(lo, hi + 1)
    w = np.exp(_log_poisson(n, lam))
    order = np.argsort(w, kind="stable")
    n, w = n[order], w[order]
    nf = n.astype(float)
    gamma_tilde = nf**2 * gamma
    # S(0) location of the sum: n * delta0 + tan(pi/4) (n^2 gamma - n gamma), delta0 = delta + gamma
    delta_tilde = nf * (delta + gamma) + (gamma_tilde - nf * gamma)
    return MixtureDist(
        lam=(lam,),
        gamma=(gamma,),
        delta=(delta,),
        n_lower=lo,
        n_upper=hi,
        index=n,
        weights=w,
        gamma_tilde=gamma_tilde,
        delta_tilde=delta_tilde,
        atom_at_zero=math.exp(-lam),
        tail_bound=_poisson_mass_outside(lam, lo, hi),
        peak_index=median_weight_peak(lam),
    )


def build_mixture_two_risks(lam1, gamma1, delta1, lam2, gamma2, delta2, rule: TruncationRule = TruncationRule()):
    """Annual loss law of two independent Poisson-Lévy cells added together."""
    if not (lam1 > 0 and lam2 > 0 and gamma1 > 0 and gamma2 > 0):
        raise ValueError("intensities and scales must be positive")
    mode1, mode2 = int(math.floor(lam1)), int(math.floor(lam2))
    log_max = max(
        _log_poisson(max(mode1, 1), lam1) + _log_poisson(mode2, lam2),
        _log_poisson(mode1, lam1) + _log_poisson(max(mode2, 1), lam2),
    )
    log_floor = log_max + math.log(rule.rel_cutoff)

    def upper(lam, other_best):
        k = max(int(math.floor(lam)), 0)
        while _log_poisson(k + 1, lam) + other_best >= log_floor:
            k += 1
            if k > rule.hard_cap:
                raise SeriesTruncationError("series truncation failed: hard cap reached before cutoff")
        return k

    hi1 = upper(lam1, _log_poisson(mode2, lam2))
    hi2 = upper(lam2, _log_poisson(mode1, lam1))
    nn, mm = np.meshgrid(np.arange(hi1 + 1), np.arange(hi2 + 1), indexing="ij")
    nn, mm = nn.ravel(), mm.ravel()
    logw = _log_poisson(nn, lam1) + _log_poisson(mm, lam2)
    keep = (logw >= log_floor) & ((nn + mm) > 0)
    nn, mm, w = nn[keep], mm[keep], np.exp(logw[keep])
    order = np.argsort(w, kind="stable")
    nn, mm, w = nn[order], mm[order], w[order]
    nf, mf = nn.astype(float), mm.astype(float)
    gamma_tilde = (nf * math.sqrt(gamma1) + mf * math.sqrt(gamma2)) ** 2
    delta_tilde = (
        nf * (delta1 + gamma1) + mf * (delta2 + gamma2) + (gamma_tilde - nf * gamma1 - mf * gamma2)
    )
    atom = math.exp(-lam1 - lam2)
    return MixtureDist(
        lam=(lam1, lam2),
        gamma=(gamma1, gamma2),
        delta=(delta1, delta2),
        n_lower=int((nn + mm).min()),
        n_upper=int((nn + mm).max()),
        index=np.column_stack((nn, mm)),
        weights=w,
        gamma_tilde=gamma_tilde,
        delta_tilde=delta_tilde,
        atom_at_zero=atom,
        tail_bound=max(0.0, 1.0 - atom - math.fsum(w)),
        peak_index=0,
    )


def ilp_mitigated_mixture(lam, gamma, delta, tcl, rule: TruncationRule = TruncationRule()):
    """Bank's annual loss under a per-event cap when every loss exceeds the cap.

    With ``delta >= tcl`` each retained loss is ``X - tcl``, a Lévy law on
    ``[delta - tcl, inf)``. Otherwise no closed form exists; a warning is
    issued and None returned so callers can fall back to simulation.
    """
    if delta < tcl:
        warnings.warn(
            "closed form requires delta >= tcl; use Monte Carlo instead", RuntimeWarning, stacklevel=2
        )
        return None
    return build_mixture(lam, gamma, delta - tcl, rule)


def _accumulate(dist, z, fn):
    z = np.asarray(z, dtype=float)
    total = np.zeros(z.shape)
    for w, g, e in zip(dist.weights, dist.gamma_tilde, dist.edges):
        total += w * fn(z, g, e)
    return total


def mixture_pdf(dist: MixtureDist, z):
    """Density of the continuous part (the atom at zero is excluded)."""
    out = _accumulate(dist, z, levy_pdf)
    return float(out) if out.ndim == 0 else out


def mixture_cdf(dist: MixtureDist, z):
    """P(Z <= z), including the atom ``exp(-lambda)`` at zero."""
    z = np.asarray(z, dtype=float)
    out = _accumulate(dist, z, levy_cdf) + np.where(z >= 0, dist.atom_at_zero, 0.0)
    return float(out) if out.ndim == 0 else out


def mixture_quantile(dist: MixtureDist, q: float, rel_tol: float = 1e-9) -> float:
    """Smallest z with cdf(z) >= q, by bisection."""
    if q <= dist.atom_at_zero:
        raise ValueError("quantile inside zero atom")
    if q >= 1.0 - dist.tail_bound:
        raise ValueError("quantile beyond the truncated series")
    lo = min(0.0, float(dist.edges.min()))
    hi = max(float(dist.edges.max()), 0.0) + float(dist.gamma_tilde.max())
    while mixture_cdf(dist, hi) < q:
        hi = 2.0 * hi + 1.0
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mixture_cdf(dist, mid) >= q:
            hi = mid
        else:
            lo = mid
        if hi - lo <= rel_tol * abs(hi):
            break
    return hi


def mixture_median_series(dist: MixtureDist):
    """Sum of component medians weighted by the Poisson mixing weights.

    Returns ``(value, terms)`` where ``terms`` holds ``lambda^n n^2 / n!``
    over the retained indices (ascending n) and ``value`` is
    ``exp(-lambda) (erfcinv(1/2))^2 |gamma| / 2 * sum(terms)``.
    This is a mixture-of-medians diagnostic; the median of the annual loss
    itself is ``mixture_quantile(dist, 0.5)``.
    """
    if dist.n_risks != 1:
        raise ValueError("median series is defined for a single risk cell")
    lam, gamma = dist.lam[0], dist.gamma[0]
    n = np.arange(dist.n_lower, dist.n_upper + 1)
    terms = np.exp(n * math.log(lam) + 2 * np.log(n) - np.array([math.lgamma(k + 1) for k in n]))
    coeff = 0.5 * math.exp(-lam) * erfcinv(0.5) ** 2 * abs(gamma)
    return coeff * math.fsum(sorted(terms)), terms


def mixture_tail_series(dist: MixtureDist, z: float):
    """Tail series ``z^-1.5 exp(-lambda) c_{1/2} sum lambda^n/n! sqrt(gamma_n)``.

    Kept in the exponent as originally displayed; note that the Lévy tail
    probability decays like ``z^-0.5`` (the ``-1.5`` power belongs to the
    density), so this is a diagnostic rather than a tail probability.
    """
    if dist.n_risks != 1:
        raise ValueError("tail series is defined for a single risk cell")
    terms = dist.weights * math.exp(dist.lam[0]) * np.sqrt(dist.gamma_tilde)
    return z**-1.5 * math.exp(-dist.lam[0]) * C_HALF * math.fsum(terms), terms


def levy_partial_moments(upper, gamma, edge=0.0):
    """``E[X^k; X <= upper]`` for k = 0, 1, 2 and X ~ Lévy(gamma) on ``[edge, inf)``.

    Closed forms, with ``y = upper - edge``::

        F   = erfc(sqrt(gamma / 2y))
        m1  = sqrt(2 gamma y / pi) exp(-gamma / 2y) - gamma F
        m2  = 2/3 * (sqrt(gamma / 2 pi) y^1.5 exp(-gamma / 2y) - gamma m1 / 2)

    and the moments about zero follow by expanding ``(edge + Y)^k``.
    """
    gamma = np.asarray(gamma, dtype=float)
    edge = np.asarray(edge, dtype=float)
    y = np.asarray(upper, dtype=float) - edge
    pos = y > 0
    ys = np.where(pos, y, 1.0)
    F = np.where(pos, erfc(np.sqrt(gamma / (2 * ys))), 0.0)
    e = np.where(pos, np.exp(-gamma / (2 * ys)), 0.0)
    m1 = np.where(pos, np.sqrt(2 * gamma * ys / math.pi) * e - gamma * F, 0.0)
    with np.errstate(over="ignore", invalid="ignore"):
        m2 = np.where(pos, (2.0 / 3.0) * (np.sqrt(gamma / (2 * math.pi)) * ys**1.5 * e - 0.5 * gamma * m1), 0.0)
    return F, edge * F + m1, edge**2 * F + 2 * edge * m1 + m2


def mixture_partial_moment(dist: MixtureDist, upper: float, k: int = 1) -> float:
    """``E[Z^k; 0 < Z <= upper]`` over the Lévy components of the annual loss."""
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1 or 2")
    moments = levy_partial_moments(upper, dist.gamma_tilde, dist.edges)[k]
    return math.fsum(dist.weights * moments)


def _single(dist):
    if dist.n_risks != 1:
        raise ValueError("claim moments are defined for a single risk cell")
    return dist.lam[0], dist.gamma[0], dist.delta[0]


def _capped_severity_moments(gamma, edge, tcl):
    """E[min(X, tcl)] and E[min(X, tcl)^2] for one Lévy loss."""
    if tcl <= edge:
        return tcl, tcl * tcl
    F, M1, M2 = (float(v) for v in levy_partial_moments(tcl, gamma, edge))
    return M1 + tcl * (1.0 - F), M2 + tcl * tcl * (1.0 - F)


def analytic_expected_claim(dist: MixtureDist, tcl: float) -> float:
    """Expected annual claim under a per-event cap ``tcl``.

    The claims process is compound Poisson with capped severities, so the
    mean is ``lambda * E[min(X, tcl)]``. Infinite when ``tcl`` is infinite.
    """
    lam, gamma, edge = _single(dist)
    if tcl <= 0:
        return 0.0
    if math.isinf(tcl):
        return math.inf
    return lam * _capped_severity_moments(gamma, edge, tcl)[0]


def analytic_claim_variance(dist: MixtureDist, tcl: float) -> float:
    lam, gamma, edge = _single(dist)
    if tcl <= 0:
        return 0.0
    if math.isinf(tcl):
        return math.inf
    return lam * _capped_severity_moments(gamma, edge, tcl)[1]


def analytic_scr(dist: MixtureDist, tcl: float) -> float:
    """Expected annual claim plus three standard deviations, per-event cap ``tcl``."""
    mean = analytic_expected_claim(dist, tcl)
    var = analytic_claim_variance(dist, tcl)
    if var < 0:
        raise ArithmeticError(
            f"negative claim variance {var!r} (second moment {var / dist.lam[0]!r}, mean {mean!r})"
        )
    return mean + 3.0 * math.sqrt(var)


def analytic_es_mcr(dist: MixtureDist, tcl: float, var_q: float) -> float:
    """Tail approximation of ``E[Z; var_q <= Z <= tcl] / P(Z > var_q)``.

    Each component density is replaced by its power-law tail
    ``sqrt(gamma_n) c_{1/2} z^-1.5``, which integrates against z to
    ``2 c_{1/2} sqrt(gamma_n) (sqrt(tcl) - sqrt(var_q))``. Accurate only
    when ``var_q`` sits deep in the tail.
    """
    if var_q >= tcl:
        raise ValueError("var_q must be below the cover limit")
    survival = 1.0 - mixture_cdf(dist, var_q)
    body = 2.0 * C_HALF * (math.sqrt(tcl) - math.sqrt(var_q))
    return math.fsum(dist.weights * np.sqrt(dist.gamma_tilde)) * body / survival
