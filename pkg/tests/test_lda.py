import math

import numpy as np
import pytest
from scipy import stats

from lda_insurance.lda import (
    RiskModel,
    YearBatch,
    YearOutcome,
    annual_loss,
    simulate_portfolio_year,
    simulate_portfolio_years,
    simulate_year,
    simulate_years,
)
from lda_insurance.stable import StableParams, levy_params

SEV = StableParams(1.5, 0.8, 1.0, 5.0, truncated=True)


def test_risk_model_requires_positive_intensity():
    with pytest.raises(ValueError):
        RiskModel(0.0, SEV)


def test_tiny_intensity_gives_empty_years():
    b = simulate_years(RiskModel(1e-9, SEV), 10_000, np.random.default_rng(0))
    assert np.mean(b.counts == 0) >= 0.999
    assert np.all(b.annual() == 0.0)


def test_empty_year_fraction_and_mean_count():
    b1 = simulate_years(RiskModel(1.0, SEV), 1_000_000, np.random.default_rng(1))
    assert abs(np.mean(b1.counts == 0) - math.exp(-1)) < 0.002
    b10 = simulate_years(RiskModel(10.0, SEV), 1_000_000, np.random.default_rng(2))
    assert abs(b10.counts.mean() - 10.0) < 0.02


@pytest.mark.parametrize("lam", [1.0, 10.0])
def test_counts_pass_chi_square(lam):
    counts = simulate_years(RiskModel(lam, SEV), 1_000_000, np.random.default_rng(3)).counts
    k_max = int(lam + 6 * math.sqrt(lam))
    observed = np.bincount(np.minimum(counts, k_max), minlength=k_max + 1)
    pmf = stats.poisson.pmf(np.arange(k_max), lam)
    expected = counts.size * np.append(pmf, 1 - pmf.sum())
    assert stats.chisquare(observed, expected).pvalue > 1e-3


def test_event_times_are_uniform_and_sorted_within_year():
    b = simulate_years(RiskModel(3.0, SEV), 100_000, np.random.default_rng(4))
    assert stats.kstest(b.times, "uniform").statistic < 0.005
    assert np.all((b.times >= 0) & (b.times < 1))
    same_year = np.diff(b.year_index) == 0
    assert np.all(np.diff(b.times)[same_year] > 0)


def test_fixed_seed_reproduces_years():
    m = RiskModel(2.0, SEV)
    a = simulate_years(m, 1000, np.random.default_rng(9))
    b = simulate_years(m, 1000, np.random.default_rng(9))
    assert np.array_equal(a.counts, b.counts) and np.array_equal(a.gross, b.gross)
    assert np.array_equal(a.times, b.times)


def test_single_year_view():
    y = simulate_year(RiskModel(5.0, SEV), np.random.default_rng(5))
    assert isinstance(y, YearOutcome)
    assert np.array_equal(y.retained, y.gross) and np.all(y.claimed == 0)


def test_annual_loss():
    assert annual_loss(YearOutcome.from_losses([])) == 0.0
    y = YearOutcome.from_losses([6, 10, 8, 2, 5])
    assert annual_loss(y) == 31.0
    assert annual_loss(y, "retained") == 31.0 and annual_loss(y, "claimed") == 0.0
    with pytest.raises(ValueError):
        annual_loss(y, "net")


def test_year_outcome_validates_lengths():
    with pytest.raises(ValueError):
        YearOutcome(times=[0.1, 0.2], gross=[1.0])


def test_batch_round_trip_and_annual_sums():
    years = [YearOutcome.from_losses(v) for v in ([1.0, 2.0], [], [4.0])]
    b = YearBatch.from_years(years)
    assert b.n_years == 3
    assert np.array_equal(b.annual(), [3.0, 0.0, 4.0])
    assert np.array_equal(b.year(0).gross, [1.0, 2.0]) and len(b.year(1)) == 0


def test_portfolio_streams():
    models = [RiskModel(1.0, levy_params(1.0)), RiskModel(1.0, levy_params(1.0))]
    cells = simulate_portfolio_years(models, 1_000_000, np.random.default_rng(6))
    total = cells[0].counts + cells[1].counts
    assert abs(total.mean() - 2.0) < 0.01
    # independent streams
    assert abs(np.corrcoef(cells[0].counts, cells[1].counts)[0, 1]) < 0.005
    assert len(simulate_portfolio_year(models, np.random.default_rng(7))) == 2
    with pytest.raises(ValueError):
        simulate_portfolio_years([], 10, np.random.default_rng(0))


def test_single_cell_portfolio_matches_single_cell_in_law():
    m = RiskModel(2.0, levy_params(1.0))
    a = simulate_portfolio_years([m], 50_000, np.random.default_rng(8))[0].annual()
    b = simulate_years(m, 50_000, np.random.default_rng(18)).annual()
    assert stats.ks_2samp(a, b).statistic < 0.012
