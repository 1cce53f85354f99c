"""Insurance structures that split each gross loss into retained and claimed parts.

Every function accepts a single :class:`~lda_insurance.lda.YearOutcome`
or a :class:`~lda_insurance.lda.YearBatch` and returns the same kind with
``retained`` and ``claimed`` filled. The deductible is zero throughout.
Annual caps (ALP, CLP, ALP2) consume events in arrival-time order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .lda import YearBatch, YearOutcome

__all__ = [
    "NoInsurance",
    "ILP",
    "ALP",
    "CLP",
    "ALP2",
    "HLP",
    "BLP",
    "PolicySpec",
    "BandDraws",
    "POLICY_KINDS",
    "apply_ilp",
    "apply_alp",
    "apply_clp",
    "apply_alp2",
    "apply_hlp",
    "apply_blp",
    "apply_policy",
    "beta_band_params",
    "beta_band_ppf",
    "band_index",
    "log_band_widths",
    "policy_from_dict",
    "policy_to_dict",
]


def _check_limit(name, value, strict=False):
    if math.isnan(value) or value < 0 or (strict and value == 0):
        raise ValueError(f"{name} must be {'positive' if strict else 'non-negative'}, got {value}")


@dataclass(frozen=True)
class NoInsurance:
    kind = "NONE"


@dataclass(frozen=True)
class ILP:
    tcl: float
    kind = "ILP"

    def __post_init__(self):
        _check_limit("tcl", self.tcl)


@dataclass(frozen=True)
class ALP:
    acl: float
    kind = "ALP"

    def __post_init__(self):
        _check_limit("acl", self.acl)


@dataclass(frozen=True)
class CLP:
    tcl: float
    acl: float
    kind = "CLP"

    def __post_init__(self):
        _check_limit("tcl", self.tcl)
        _check_limit("acl", self.acl)


@dataclass(frozen=True)
class ALP2:
    acl: float
    kind = "ALP2"

    def __post_init__(self):
        _check_limit("acl", self.acl)


@dataclass(frozen=True)
class HLP:
    tcl: float
    kind = "HLP"

    def __post_init__(self):
        _check_limit("tcl", self.tcl)


@dataclass(frozen=True)
class BLP:
    tcl: float
    bands: int = 3
    scale: str = "linear"
    kind = "BLP"

    def __post_init__(self):
        _check_limit("tcl", self.tcl, strict=True)
        if int(self.bands) != self.bands or self.bands < 2:
            raise ValueError(f"BLP needs an integer band count >= 2, got {self.bands}")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"band scale must be 'linear' or 'log', got {self.scale!r}")


PolicySpec = Union[NoInsurance, ILP, ALP, CLP, ALP2, HLP, BLP]
POLICY_KINDS = {cls.kind: cls for cls in (NoInsurance, ILP, ALP, CLP, ALP2, HLP, BLP)}


@dataclass
class BandDraws:
    bands: np.ndarray
    deltas: np.ndarray


def _as_batch(data):
    if isinstance(data, YearBatch):
        return data, False
    if isinstance(data, YearOutcome):
        return YearBatch(counts=[len(data)], times=data.times, gross=data.gross), True
    raise TypeError(f"expected YearOutcome or YearBatch, got {type(data).__name__}")


def _finish(batch, claimed, single):
    out = batch.with_split(claimed)
    return out.year(0) if single else out


def _exclusive_cumsum_by_year(values, counts, chunk_years=200_000):
    """Sum of earlier events in the same year, for every event.

    Years are laid out as rows of a zero-padded matrix so each row's prefix
    sum starts from zero; no cross-year cancellation.
    """
    out = np.empty_like(values)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    for y0 in range(0, counts.size, chunk_years):
        y1 = min(y0 + chunk_years, counts.size)
        c = counts[y0:y1]
        lo, hi = offsets[y0], offsets[y1]
        if hi == lo:
            continue
        width = int(c.max())
        rows = np.repeat(np.arange(y1 - y0), c)
        cols = np.arange(hi - lo) - np.repeat(offsets[y0:y1] - lo, c)
        mat = np.zeros((y1 - y0, width + 1))
        mat[rows, cols + 1] = values[lo:hi]
        np.cumsum(mat, axis=1, out=mat)
        out[lo:hi] = mat[rows, cols]
    return out


def _capped_by_year(nominal, counts, acl):
    prior = _exclusive_cumsum_by_year(nominal, counts)
    return np.clip(acl - prior, 0.0, nominal)


def apply_ilp(data, tcl: float):
    """Per-event cap: claim ``min(X, tcl)``."""
    _check_limit("tcl", tcl)
    batch, single = _as_batch(data)
    return _finish(batch, np.minimum(batch.gross, tcl), single)


def apply_alp(data, acl: float):
    """Annual cap: losses are paid in full, in time order, until ``acl`` is used up."""
    _check_limit("acl", acl)
    batch, single = _as_batch(data)
    return _finish(batch, _capped_by_year(batch.gross, batch.counts, acl), single)


def apply_clp(data, tcl: float, acl: float):
    """Per-event cap ``tcl`` on claims, with paid claims capped at ``acl`` per year."""
    _check_limit("tcl", tcl)
    _check_limit("acl", acl)
    batch, single = _as_batch(data)
    nominal = np.minimum(batch.gross, tcl)
    return _finish(batch, _capped_by_year(nominal, batch.counts, acl), single)


def apply_alp2(pair, acl: float):
    """Shared annual cap over two risk cells.

    Returns ``(first, second, combined_retained, combined_claimed)``; the
    combined totals are per year (floats for single years). Events from
    both cells are merged by arrival time, ties going to the first cell.
    """
    _check_limit("acl", acl)
    first, second = pair
    b1, single = _as_batch(first)
    b2, _ = _as_batch(second)
    if b1.n_years != b2.n_years:
        raise ValueError("both cells must cover the same number of years")
    year = np.concatenate((b1.year_index, b2.year_index))
    times = np.concatenate((b1.times, b2.times))
    cell = np.concatenate((np.zeros(b1.gross.size, np.int8), np.ones(b2.gross.size, np.int8)))
    order = np.lexsort((cell, times, year))
    merged = np.concatenate((b1.gross, b2.gross))[order]
    paid = np.empty_like(merged)
    paid[order] = _capped_by_year(merged, b1.counts + b2.counts, acl)
    out1 = b1.with_split(paid[: b1.gross.size])
    out2 = b2.with_split(paid[b1.gross.size :])
    claimed = out1.annual("claimed") + out2.annual("claimed")
    retained = out1.annual("retained") + out2.annual("retained")
    if single:
        return out1.year(0), out2.year(0), float(retained[0]), float(claimed[0])
    return out1, out2, retained, claimed


def apply_hlp(data, tcl: float):
    """Haircut cap: an event at time t (years) is covered up to ``t * tcl``."""
    _check_limit("tcl", tcl)
    batch, single = _as_batch(data)
    if batch.times is None or batch.times.shape != batch.gross.shape:
        raise ValueError("HLP needs event times")
    return _finish(batch, np.minimum(batch.gross, batch.times * tcl), single)


def beta_band_params(d, D: int):
    """Beta law parameters for the compensated share in band ``d`` of ``D``.

    Low bands get a Beta skewed toward full payment, high bands toward
    small payment. For D=2 the lower band's first parameter is infinite,
    i.e. the share is degenerate at one.
    """
    if D < 2:
        raise ValueError("band count must be at least 2")
    d_arr = np.asarray(d)
    if np.any((d_arr < 1) | (d_arr > D)):
        raise ValueError(f"band index must lie in 1..{D}")
    up = math.ceil((D + 1) / 2)
    down = math.floor((D + 1) / 2)
    d_f = d_arr.astype(float)
    with np.errstate(divide="ignore"):
        a_slope = 2.0 / (D - up) if D != up else math.inf
        b_slope = 2.0 / (D - down)
    a = np.where(d_arr >= up, 1.0, (up - d_f) * a_slope)
    b = np.where(d_arr <= down, 1.0, (d_f - down) * b_slope)
    if a.ndim == 0:
        return float(a), float(b)
    return a, b


def beta_band_ppf(u, a, b):
    """Inverse cdf of the band Beta laws, which always have a == 1 or b == 1.

    Drawing by inversion lets runs at different TCL share one set of
    uniforms per event.
    """
    u, a, b = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (u, a, b)))
    if np.any((a != 1.0) & (b != 1.0)):
        raise ValueError("band Beta laws have a == 1 or b == 1")
    with np.errstate(divide="ignore"):
        # Beta(a, 1): u^(1/a); Beta(1, b): 1 - (1 - u)^(1/b); a = inf is the point mass at one
        out = np.where(b == 1.0, u ** (1.0 / a), 1.0 - (1.0 - u) ** (1.0 / b))
    return out


def log_band_widths(D: int) -> np.ndarray:
    """Fractions of the cover limit taken by each log-scale band (they sum to one)."""
    i = np.arange(1, D + 1)
    l = 1.0 / D
    return (np.exp(i * l) - np.exp((i - 1) * l)) / (math.e - 1.0)


def band_index(x, tcl: float, D: int, scale: str = "linear"):
    """Band holding each loss, plus the band's lower edge and width (currency)."""
    x = np.asarray(x, dtype=float)
    if scale == "linear":
        width = tcl / D
        with np.errstate(over="ignore"):
            # clamp in floating point so an overflowing ratio cannot wrap on the cast
            d = np.minimum(D, np.floor(x / width) + 1).astype(np.int64)
        return d, (d - 1) * width, np.full(x.shape, width)
    widths = log_band_widths(D) * tcl
    upper = np.cumsum(widths)
    # band i covers (upper[i-2], upper[i-1]]; anything above the (D-1)th edge is band D
    d = np.minimum(np.searchsorted(upper[:-1], x, side="left") + 1, D)
    lower = np.concatenate(([0.0], upper))[d - 1]
    return d, lower, widths[d - 1]


def apply_blp(data, tcl: float, bands: int = 3, scale: str = "linear", rng=None, deltas=None):
    """Banded cover with Beta-distributed payment on the active band.

    Completed lower bands are paid in full; the part of the loss inside the
    active band is paid at a random share drawn from
    :func:`beta_band_params`. Pass ``deltas`` to fix the shares instead of
    drawing them. Returns ``(outcome, BandDraws)``.
    """
    spec = BLP(tcl, bands, scale)
    batch, single = _as_batch(data)
    d, lower, width = band_index(batch.gross, spec.tcl, spec.bands, spec.scale)
    if deltas is None:
        if rng is None:
            raise ValueError("BLP needs an rng unless deltas are given")
        a, b = beta_band_params(d, spec.bands) if d.size else (np.zeros(0), np.zeros(0))
        deltas = beta_band_ppf(rng.random(d.shape), a, b)
    else:
        deltas = np.broadcast_to(np.asarray(deltas, dtype=float), d.shape).copy()
    cover = lower + deltas * np.minimum(width, batch.gross - lower)
    claimed = np.minimum(batch.gross, cover)
    return _finish(batch, claimed, single), BandDraws(d, deltas)


def apply_policy(spec: PolicySpec, data, rng=None):
    """Dispatch on the policy kind. ALP2 expects a pair of outcomes."""
    if isinstance(spec, NoInsurance):
        batch, single = _as_batch(data)
        return _finish(batch, np.zeros_like(batch.gross), single)
    if isinstance(spec, ILP):
        return apply_ilp(data, spec.tcl)
    if isinstance(spec, ALP):
        return apply_alp(data, spec.acl)
    if isinstance(spec, CLP):
        return apply_clp(data, spec.tcl, spec.acl)
    if isinstance(spec, ALP2):
        return apply_alp2(data, spec.acl)
    if isinstance(spec, HLP):
        return apply_hlp(data, spec.tcl)
    if isinstance(spec, BLP):
        return apply_blp(data, spec.tcl, spec.bands, spec.scale, rng=rng)[0]
    raise TypeError(f"unknown policy {spec!r}")


def policy_to_dict(spec: PolicySpec) -> dict:
    out = {"kind": spec.kind}
    out.update({k: getattr(spec, k) for k in spec.__dataclass_fields__})
    return out


def policy_from_dict(d: dict) -> PolicySpec:
    d = dict(d)
    kind = str(d.pop("kind")).upper()
    if kind not in POLICY_KINDS:
        raise ValueError(f"unknown policy kind {kind!r}")
    cls = POLICY_KINDS[kind]
    conv = {"tcl": float, "acl": float, "bands": int, "scale": str}
    return cls(**{k: conv.get(k, lambda v: v)(v) for k, v in d.items()})
