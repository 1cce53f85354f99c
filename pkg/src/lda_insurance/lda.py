"""Compound Poisson loss years.

A simulated year is a set of events with arrival times in [0, 1) and
gross severities. Counts are Poisson(lambda); given the count, arrival
times are the sorted uniforms, i.e. the order statistics of a
homogeneous Poisson process on the year.

Large runs use :class:`YearBatch`, a flat (CSR-style) store of many
years; :class:`YearOutcome` is the single-year view.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .stable import StableParams, sample_stable

__all__ = [
    "RiskModel",
    "YearOutcome",
    "YearBatch",
    "simulate_year",
    "simulate_years",
    "simulate_portfolio_year",
    "simulate_portfolio_years",
    "annual_loss",
]


@dataclass(frozen=True)
class RiskModel:
    lam: float
    severity: StableParams
    label: str = "cell"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Poisson intensity must be positive, got {self.lam}")


@dataclass
class YearOutcome:
    times: np.ndarray
    gross: np.ndarray
    retained: np.ndarray = None
    claimed: np.ndarray = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.gross = np.asarray(self.gross, dtype=float)
        if self.times.shape != self.gross.shape:
            raise ValueError("times and gross must have the same length")
        if self.retained is None:
            self.retained = self.gross.copy()
        if self.claimed is None:
            self.claimed = np.zeros_like(self.gross)

    def __len__(self):
        return self.gross.size

    @classmethod
    def from_losses(cls, gross, times=None):
        """Year built from losses listed in arrival order; times default to an even spread."""
        gross = np.asarray(gross, dtype=float)
        if times is None:
            times = (np.arange(gross.size) + 0.5) / max(gross.size, 1)
        return cls(times=times, gross=gross)


@dataclass
class YearBatch:
    """Many simulated years stored as flat event arrays plus per-year counts."""

    counts: np.ndarray
    times: np.ndarray
    gross: np.ndarray
    retained: np.ndarray = None
    claimed: np.ndarray = None
    _year_index: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.retained is None:
            self.retained = self.gross.copy()
        if self.claimed is None:
            self.claimed = np.zeros_like(self.gross)

    @property
    def n_years(self) -> int:
        return self.counts.size

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.counts)))

    @property
    def year_index(self) -> np.ndarray:
        if self._year_index is None:
            self._year_index = np.repeat(np.arange(self.n_years), self.counts)
        return self._year_index

    def with_split(self, claimed) -> "YearBatch":
        claimed = np.asarray(claimed, dtype=float)
        return replace(self, retained=self.gross - claimed, claimed=claimed)

    def annual(self, which: str = "gross") -> np.ndarray:
        values = getattr(self, which)
        return np.bincount(self.year_index, weights=values, minlength=self.n_years)

    def year(self, i: int) -> YearOutcome:
        lo, hi = self.offsets[i], self.offsets[i + 1]
        return YearOutcome(
            self.times[lo:hi].copy(),
            self.gross[lo:hi].copy(),
            self.retained[lo:hi].copy(),
            self.claimed[lo:hi].copy(),
        )

    @classmethod
    def from_years(cls, years) -> "YearBatch":
        years = list(years)
        cat = lambda name: np.concatenate([getattr(y, name) for y in years]) if years else np.zeros(0)
        return cls(
            counts=np.array([len(y) for y in years], dtype=np.int64),
            times=cat("times"),
            gross=cat("gross"),
            retained=cat("retained"),
            claimed=cat("claimed"),
        )


def simulate_years(model: RiskModel, n_years: int, rng: np.random.Generator) -> YearBatch:
    counts = rng.poisson(model.lam, n_years).astype(np.int64)
    total = int(counts.sum())
    times = rng.random(total)
    year_idx = np.repeat(np.arange(n_years), counts)
    times = times[np.lexsort((times, year_idx))]
    gross = sample_stable(model.severity, rng, total) if total else np.zeros(0)
    batch = YearBatch(counts=counts, times=times, gross=gross)
    batch._year_index = year_idx
    return batch


def simulate_year(model: RiskModel, rng: np.random.Generator) -> YearOutcome:
    return simulate_years(model, 1, rng).year(0)


def simulate_portfolio_years(models, n_years: int, rng: np.random.Generator) -> list:
    """One independent batch per risk cell, each on its own child stream of ``rng``."""
    models = list(models)
    if not models:
        raise ValueError("need at least one risk cell")
    return [simulate_years(m, n_years, child) for m, child in zip(models, rng.spawn(len(models)))]


def simulate_portfolio_year(models, rng: np.random.Generator) -> list:
    return [b.year(0) for b in simulate_portfolio_years(models, 1, rng)]


def annual_loss(outcome, which: str = "gross"):
    """Total of ``which`` (gross, retained or claimed) for a year, or per year for a batch."""
    if which not in ("gross", "retained", "claimed"):
        raise ValueError(f"unknown series {which!r}")
    if isinstance(outcome, YearBatch):
        return outcome.annual(which)
    return float(np.sum(getattr(outcome, which)))
