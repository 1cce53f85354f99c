"""Empirical risk measures on simulated annual totals.

VaR is the ceil(q n)-th order statistic (no interpolation), ES the mean of
values at or above VaR, SCR the mean plus three unbiased standard
deviations. The comparative ratios express residual bank VaR and insurer
MCR as fractions of the uninsured VaR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

__all__ = [
    "RiskReport",
    "empirical_var",
    "empirical_es",
    "empirical_scr",
    "mcr",
    "comparative_metrics",
    "fair_premium",
    "basel_cap",
    "risk_report",
    "ks_distance",
]

BASEL_FLOOR = 0.8


def _sample(values):
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    return x


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")


def _rank(q, n):
    # ceil(q n) with a guard against 0.95 * 100 = 95.00000000000001
    k = math.ceil(q * n - 1e-9 * max(1.0, q * n))
    return min(max(k, 1), n)


def empirical_var(values, q: float = 0.95) -> float:
    _check_q(q)
    x = _sample(values)
    k = _rank(q, x.size)
    return float(np.partition(x, k - 1)[k - 1])


def empirical_es(values, q: float = 0.95) -> float:
    x = _sample(values)
    v = empirical_var(x, q)
    tail = x[x >= v]
    if tail.size == 0:
        raise ValueError("no exceedances of VaR")
    # mean of the excesses keeps ES >= VaR under rounding
    return float(v + (tail - v).mean())


def empirical_scr(claims) -> float:
    x = _sample(claims)
    if x.size < 2:
        raise ValueError("SCR needs at least two annual claims")
    return float(x.mean() + 3.0 * x.std(ddof=1))


def mcr(claims, q: float = 0.95, measure: str = "var") -> float:
    if measure == "var":
        return empirical_var(claims, q)
    if measure == "es":
        return empirical_es(claims, q)
    raise ValueError(f"measure must be 'var' or 'es', got {measure!r}")


def comparative_metrics(gross_var: float, mitigated_var: float, claims_mcr: float):
    """``(pct_var, pct_var_mit, pct_mcr)`` relative to the uninsured VaR."""
    if not gross_var > 0:
        raise ValueError("zero gross VaR")
    pct_var = mitigated_var / gross_var
    return pct_var, 1.0 - pct_var, claims_mcr / gross_var


def fair_premium(claims=None, loading: float = 0.0, *, dist=None, tcl=None, alpha=None) -> float:
    """Expected annual claim times ``1 + loading``.

    Pass either an annual claims sample or a mixture ``dist`` with ``tcl``.
    Uncapped claims with ``alpha <= 1`` have no mean; ``math.inf`` is returned.
    """
    if loading < 0:
        raise ValueError("loading must be non-negative")
    uncapped = tcl is None or math.isinf(tcl)
    if alpha is not None and alpha <= 1.0 and uncapped:
        return math.inf
    if dist is not None:
        from .mixture import analytic_expected_claim

        if uncapped:
            return math.inf
        return analytic_expected_claim(dist, tcl) * (1.0 + loading)
    return float(_sample(claims).mean()) * (1.0 + loading)


def basel_cap(gross_var: float, mitigated_var: float) -> float:
    """Insurance may cut capital by at most 20%."""
    if gross_var < 0 or mitigated_var < 0:
        raise ValueError("VaR values must be non-negative")
    return max(mitigated_var, BASEL_FLOOR * gross_var)


@dataclass
class RiskReport:
    var_q: float
    es_q: float
    scr: float
    mcr: float
    q_bank: float = 0.95
    q_insurer: float = 0.95
    pct_var: float = math.nan
    pct_var_mit: float = math.nan
    pct_mcr: float = math.nan
    es_divergent: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


def risk_report(gross, retained, claimed, q_bank=0.95, q_insurer=0.95, alpha=None) -> RiskReport:
    """Bank-side measures on ``retained`` and insurer-side measures on ``claimed``."""
    v_gross = empirical_var(gross, q_bank)
    v_ret = empirical_var(retained, q_bank)
    m = mcr(claimed, q_insurer)
    pv, pvm, pm = comparative_metrics(v_gross, v_ret, m)
    return RiskReport(
        var_q=v_ret,
        es_q=empirical_es(retained, q_bank),
        scr=empirical_scr(claimed),
        mcr=m,
        q_bank=q_bank,
        q_insurer=q_insurer,
        pct_var=pv,
        pct_var_mit=pvm,
        pct_mcr=pm,
        es_divergent=alpha is not None and alpha <= 1.0,
    )


def ks_distance(sample, cdf) -> float:
    """Sup distance between the empirical cdf of ``sample`` and ``cdf``.

    Ties are handled by comparing both one-sided limits at each distinct
    value, so samples with an atom (e.g. loss-free years) are scored
    correctly when ``cdf`` is right-continuous with the same atom.
    """
    x = _sample(sample)
    u, counts = np.unique(x, return_counts=True)
    upper = np.cumsum(counts) / x.size
    lower = upper - counts / x.size
    F = np.asarray(cdf(u), dtype=float)
    # left limits: evaluate just below each point
    F_left = np.asarray(cdf(np.nextafter(u, -np.inf)), dtype=float)
    return float(max(np.abs(upper - F).max(), np.abs(lower - F_left).max()))
