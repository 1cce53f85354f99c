import io
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from lda_insurance.experiment import (
    CSV_HEADER,
    CalibrationError,
    CellResult,
    SweepConfig,
    calibrate_tcl_max,
    derive_acl,
    load_config,
    optimum_insurance_point,
    poisson_percentile,
    read_sweep_csv,
    risk_equality_point,
    run_row,
    run_sweep,
    sweep_to_csv,
    tcl_grid,
)
from lda_insurance.lda import RiskModel, simulate_years
from lda_insurance.mixture import build_mixture, mixture_quantile
from lda_insurance.policies import apply_ilp
from lda_insurance.risk import empirical_var
from lda_insurance.stable import levy_params

SMALL = SweepConfig(alphas=(1.5, 0.5), lambdas=(1.0,), tcl_strata=5, years_per_cell=5000, pilot_years=5000)


def test_poisson_percentile_against_scipy():
    for lam in (0.3, 1.0, 2.5, 10.0, 40.0):
        for p in (0.1, 0.5, 0.7, 0.95):
            assert poisson_percentile(lam, p) == int(stats.poisson.ppf(p, lam))


def test_derive_acl():
    assert derive_acl(10.0, 10.0) == 120.0
    assert derive_acl(10.0, 1.0) == 10.0
    assert derive_acl(0.0, 10.0) == 0.0
    with pytest.raises(ValueError):
        derive_acl(-1.0, 1.0)


def test_interpolated_percentile_convention():
    # Poisson(1): cdf(0) = e^-1, cdf(1) = 2 e^-1, so 0.7 sits at (0.7 - e^-1) / e^-1
    e = math.exp(-1.0)
    assert poisson_percentile(1.0, 0.7, "interpolated") == pytest.approx((0.7 - e) / e)
    assert derive_acl(10.0, 1.0, 0.7, "interpolated") < 10.0
    for lam in (0.5, 3.0, 10.0):
        k = poisson_percentile(lam, 0.7)
        assert k - 1 < poisson_percentile(lam, 0.7, "interpolated") <= k
    with pytest.raises(ValueError):
        poisson_percentile(1.0, 0.7, "nearest")
    with pytest.raises(ValueError):
        SweepConfig(acl_convention="nearest")


def test_config_validation():
    with pytest.raises(ValueError):
        SweepConfig(tcl_strata=1)
    with pytest.raises(ValueError):
        SweepConfig(years_per_cell=10)
    with pytest.raises(ValueError):
        SweepConfig(acl_percentile=1.0)
    with pytest.raises(ValueError):
        SweepConfig(policies=("ILP", "XYZ"))
    d = SweepConfig()
    assert d.alphas[0] == 2.0 and d.alphas[-1] == 0.25 and len(d.alphas) == 14
    assert (d.beta, d.gamma, d.delta, d.tcl_strata) == (0.8, 1e4, 0.0, 51)


def test_calibration_is_the_var_of_the_annual_maximum():
    model = RiskModel(2.0, levy_params(1.0))
    top = calibrate_tcl_max(model, 0.95, 20_000, np.random.default_rng(1))
    batch = simulate_years(model, 20_000, np.random.default_rng(1))
    assert empirical_var(apply_ilp(batch, top).annual("retained"), 0.95) == 0.0
    below = np.nextafter(top, 0)
    assert empirical_var(apply_ilp(batch, below).annual("retained"), 0.95) > 0.0
    with pytest.raises(CalibrationError):
        calibrate_tcl_max(model, 0.95, 20_000, np.random.default_rng(1), ceiling=1.0)


def test_tcl_grid_shape():
    g = tcl_grid(1.5, 1.0, 6, SMALL)
    assert g[0] == 0.0 and len(g) == 6 and np.all(np.diff(g) > 0)
    assert np.allclose(np.diff(g), g[1])
    two = tcl_grid(1.5, 1.0, 2, SMALL)
    assert two[0] == 0.0 and two[1] == g[-1]


def test_row_contents():
    cells = run_row(SMALL, 0)
    assert len(cells) == len(SMALL.policies) * SMALL.tcl_strata
    assert not any(c.error for c in cells)
    for c in cells:
        if c.tcl == 0.0:
            assert c.pct_var == 1.0 and c.pct_mcr == 0.0
        assert 0.0 <= c.pct_var <= 1.0
        assert c.var_capped == max(c.var_mitigated, 0.8 * c.var_gross)
    # the top stratum is calibrated on an independent pilot, so only nearly zero
    ilp_top = [c for c in cells if c.policy == "ILP"][-1]
    assert ilp_top.pct_var < 0.25


def test_keys_unique_and_ordering():
    cells = run_sweep(SMALL)
    keys = [(c.alpha, c.lam, c.policy, c.tcl) for c in cells]
    assert len(set(keys)) == len(keys)
    assert [c.alpha for c in cells][:1] == [1.5]


def test_levy_row_gross_var_matches_analytic_quantile():
    cfg = SweepConfig(alphas=(0.5,), lambdas=(1.0,), beta=1.0, gamma=1.0, delta=1.0, truncated=True,
                      policies=("ILP",), tcl_strata=2, years_per_cell=1_000_000, pilot_years=10_000)
    # delta = 1 = gamma puts the Lévy support edge at zero
    cell = run_row(cfg, 0)[0]
    assert cell.var_gross == pytest.approx(mixture_quantile(build_mixture(1.0, 1.0), 0.95), rel=0.01)


def test_alp_and_clp_coincide_when_acl_at_most_tcl():
    cells = run_sweep(replace(SMALL, policies=("ALP", "CLP")))
    alp = [c for c in cells if c.policy == "ALP"]
    clp = [c for c in cells if c.policy == "CLP"]
    for a, c in zip(alp, clp):
        assert a.acl <= a.tcl
        assert (a.pct_var, a.pct_mcr) == (c.pct_var, c.pct_mcr)


def test_failed_cells_are_recorded_not_raised():
    bad = replace(SMALL, tcl_ceiling=1e-6)
    cells = run_row(bad, 0)
    assert all(c.error.startswith("CalibrationError") for c in cells)
    assert all(math.isnan(c.pct_var) for c in cells)


def test_csv_round_trip_and_format():
    cells = run_sweep(SMALL)
    text = sweep_to_csv(cells)
    lines = text.splitlines()
    assert lines[0].split(",") == CSV_HEADER
    assert len(lines) == len(cells) + 1
    rows = read_sweep_csv(io.StringIO(text))
    assert rows[3]["pct_var"] == cells[3].pct_var  # 17 significant digits round-trip
    with pytest.raises(ValueError):
        read_sweep_csv(io.StringIO("a,b\n1,2\n"))


def test_sweep_is_schedule_independent():
    a = sweep_to_csv(run_sweep(SMALL))
    b = sweep_to_csv(run_sweep(replace(SMALL, workers=2)))
    assert a == b
    # a row does not depend on which other rows run
    single = run_sweep(replace(SMALL, alphas=(0.5,)))
    both = run_sweep(SMALL)
    assert sweep_to_csv(single).splitlines()[1:] == sweep_to_csv(both).splitlines()[1 + len(single):]


def test_runtime_column_off_by_default():
    cells = run_row(SMALL, 0)
    assert all(c.runtime_ms == 0.0 for c in cells)
    timed = run_row(replace(SMALL, record_runtime=True), 0)
    assert any(c.runtime_ms > 0 for c in timed)


def _cells(tcls, pv, pm):
    return [dict(tcl=t, pct_var=a, pct_var_mit=1 - a, pct_mcr=b) for t, a, b in zip(tcls, pv, pm)]


def test_risk_equality_point():
    r = risk_equality_point(_cells([0, 1, 2, 3], [1.0, 0.8, 0.4, 0.1], [0.0, 0.2, 0.6, 0.9]))
    assert r.status == "crossing"
    # gap 1, 0.6, -0.2 -> crossing three quarters of the way from 1 to 2
    assert r.tcl == pytest.approx(1.75)
    assert r.value == pytest.approx(0.5)
    # complete transfer: equality where mitigation reaches one half
    full = _cells([0, 1, 2], [1.0, 0.6, 0.2], [0.0, 0.4, 0.8])
    assert risk_equality_point(full).tcl == pytest.approx(1.25)
    assert risk_equality_point(_cells([0, 1], [1.0, 0.9], [0.0, 0.05])).status == "none"


def test_optimum_insurance_point():
    cells = _cells([0, 1, 2, 3], [1.0, 0.9, 0.6, 0.3], [0.0, 0.2, 0.3, 0.5])
    # mitigation - mcr: 0, -0.1, 0.1, 0.2 -> crossing halfway between 1 and 2
    r = optimum_insurance_point(cells)
    assert r.status == "crossing" and r.tcl == pytest.approx(1.5)
    same = _cells([0, 1, 2], [1.0, 0.7, 0.3], [0.0, 0.3, 0.7])
    assert optimum_insurance_point(same).status == "degenerate"
    # zero claims: mitigation leads from the origin on
    zero = _cells([0, 1, 2], [1.0, 0.7, 0.3], [0.0, 0.0, 0.0])
    assert optimum_insurance_point(zero) == (0.0, 0.0, "crossing")
    behind = _cells([0, 1, 2], [1.0, 0.7, 0.3], [0.0, 0.5, 0.9])
    assert optimum_insurance_point(behind).status == "none"
    immediate = _cells([0, 1, 2], [1.0, 0.7, 0.3], [0.0, 0.1, 0.2])
    assert optimum_insurance_point(immediate) == (0.0, 0.0, "crossing")


def test_load_config(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text(
        "[sweep]\nalphas = 2.0, 1.0\nlambdas = 10\npolicies = ilp alp\ntcl_strata = 7\n"
        "years_per_cell = 2000\ntruncated = yes\n\n[policy.blp]\nbands = 4\nscale = log\n\n[policy.ilp]\n"
    )
    cfg = load_config(str(path), {"tcl_strata": 9, "workers": None})
    assert cfg.alphas == (2.0, 1.0) and cfg.lambdas == (10.0,)
    assert cfg.policies == ("ILP", "ALP") and cfg.tcl_strata == 9
    assert cfg.blp_bands == 4 and cfg.blp_scale == "log" and cfg.workers == 1
    path.write_text("[sweep]\nfoo = 1\n")
    with pytest.raises(ValueError):
        load_config(str(path))
    path.write_text("[other]\n")
    with pytest.raises(ValueError):
        load_config(str(path))


def test_cell_result_csv_row_formatting():
    c = CellResult(2.0, 1.0, "ILP", 0.1, math.nan, 1 / 3, 0, 0, 0, 0, 0, 1, 0, 0, 7, 1000)
    row = c.csv_row()
    assert row[:5] == ["2", "1", "ILP", "0.10000000000000001", "nan"]
    assert row[5] == "0.33333333333333331" and row[14] == "7"
