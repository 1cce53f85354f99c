"""Grid studies over tail index and cover limit.

Each (alpha, lambda) pair is a *row*. A row simulates its gross years once
and reuses them for every policy and every TCL stratum, so surfaces are
pathwise comparable along TCL. Random streams are derived from the master
seed and the row's (alpha, lambda) values only, which makes output
independent of how rows are scheduled across workers or which other rows
are in the grid.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

from .lda import RiskModel, simulate_years
from .policies import apply_alp, apply_alp2, apply_blp, apply_clp, apply_hlp, apply_ilp
from .risk import basel_cap, comparative_metrics, empirical_es, empirical_scr, empirical_var, mcr
from .stable import StableParams

__all__ = [
    "SweepConfig",
    "CellResult",
    "CalibrationError",
    "CSV_HEADER",
    "DEFAULT_ALPHAS",
    "SWEEP_POLICIES",
    "derive_acl",
    "poisson_percentile",
    "calibrate_tcl_max",
    "tcl_grid",
    "run_row",
    "run_sweep",
    "sweep_to_csv",
    "read_sweep_csv",
    "risk_equality_point",
    "optimum_insurance_point",
    "PointResult",
    "load_config",
]

DEFAULT_ALPHAS = (2.0, 1.9, 1.8, 1.7, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0, 0.75, 0.5, 0.25)
SWEEP_POLICIES = ("ILP", "ALP", "CLP", "ALP2", "HLP", "BLP")
CSV_HEADER = (
    "alpha,lambda,policy,tcl,acl,var_gross,var_mitigated,var_capped,es_mitigated,"
    "mcr,scr,pct_var,pct_var_mit,pct_mcr,seed,years,runtime_ms"
).split(",")

# spawn_key layout: (alpha bits, lambda bits, STREAM_*, ...)
STREAM_GROSS, STREAM_SECOND, STREAM_PILOT, STREAM_BLP = 0, 1, 2, 3


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    alphas: tuple = DEFAULT_ALPHAS
    beta: float = 0.8
    gamma: float = 1e4
    delta: float = 0.0
    truncated: bool = True
    lambdas: tuple = (1.0, 10.0)
    policies: tuple = SWEEP_POLICIES
    tcl_strata: int = 51
    years_per_cell: int = 100_000
    pilot_years: int = 100_000
    master_seed: int = 20240101
    acl_percentile: float = 0.70
    acl_convention: str = "inverse_cdf"
    q_bank: float = 0.95
    q_mcr: float = 0.95
    blp_bands: int = 3
    blp_scale: str = "linear"
    tcl_ceiling: float = 1e300
    workers: int = 1
    record_runtime: bool = False

    def __post_init__(self):
        if self.tcl_strata < 2:
            raise ValueError("tcl_strata must be at least 2")
        if self.years_per_cell < 1000 or self.pilot_years < 1000:
            raise ValueError("years_per_cell and pilot_years must be at least 1000")
        for name in ("acl_percentile", "q_bank", "q_mcr"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.acl_convention not in ACL_CONVENTIONS:
            raise ValueError(f"acl_convention must be one of {ACL_CONVENTIONS}")
        unknown = set(self.policies) - set(SWEEP_POLICIES)
        if unknown:
            raise ValueError(f"unknown policies: {sorted(unknown)}")
        if not self.alphas or not self.lambdas:
            raise ValueError("alphas and lambdas must be non-empty")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def severity(self, alpha: float) -> StableParams:
        return StableParams(alpha, self.beta, self.gamma, self.delta, self.truncated)

    def rows(self):
        return [(a, lam) for a in self.alphas for lam in self.lambdas]


@dataclass
class CellResult:
    alpha: float
    lam: float
    policy: str
    tcl: float
    acl: float
    var_gross: float
    var_mitigated: float
    var_capped: float
    es_mitigated: float
    mcr: float
    scr: float
    pct_var: float
    pct_var_mit: float
    pct_mcr: float
    seed: int
    years: int
    runtime_ms: float = 0.0
    error: str = ""

    def csv_row(self):
        vals = [
            self.alpha, self.lam, self.policy, self.tcl, self.acl, self.var_gross, self.var_mitigated,
            self.var_capped, self.es_mitigated, self.mcr, self.scr, self.pct_var, self.pct_var_mit,
            self.pct_mcr, self.seed, self.years, self.runtime_ms,
        ]
        return [v if isinstance(v, str) else (str(v) if isinstance(v, int) else format(v, ".17g")) for v in vals]


ACL_CONVENTIONS = ("inverse_cdf", "interpolated")


def poisson_percentile(lam: float, p: float, convention: str = "inverse_cdf"):
    """Percentile ``p`` of Poisson(lam).

    ``inverse_cdf``: smallest k with cdf(k) >= p (an integer).
    ``interpolated``: linear in the cdf between k - 1 and that k, with
    cdf(-1) = 0, so the result can be fractional.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("percentile must lie in (0, 1)")
    if convention not in ACL_CONVENTIONS:
        raise ValueError(f"convention must be one of {ACL_CONVENTIONS}, got {convention!r}")
    k, term = 0, math.exp(-lam)
    prev, cdf = 0.0, term
    while cdf < p:
        k += 1
        term *= lam / k
        prev, cdf = cdf, cdf + term
    if convention == "inverse_cdf":
        return k
    return k - 1 + (p - prev) / (cdf - prev)


def derive_acl(tcl: float, lam: float, percentile: float = 0.70, convention: str = "inverse_cdf") -> float:
    """Annual cap as TCL times a percentile of the yearly loss count."""
    if tcl < 0:
        raise ValueError("tcl must be non-negative")
    return tcl * poisson_percentile(lam, percentile, convention)


def _float_key(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def _row_seq(cfg: SweepConfig, alpha: float, lam: float, *sub):
    return np.random.SeedSequence(cfg.master_seed, spawn_key=(_float_key(alpha), _float_key(lam), *sub))


def calibrate_tcl_max(model: RiskModel, q: float, pilot_years: int, rng, ceiling: float = 1e300) -> float:
    """Smallest TCL making the per-event-capped retained VaR at ``q`` zero.

    The retained annual loss is zero exactly when every loss in the year
    is at most TCL, so the answer is the VaR of the annual maximum loss.
    """
    batch = simulate_years(model, pilot_years, rng)
    yearly_max = np.zeros(batch.n_years)
    if batch.gross.size:
        np.maximum.at(yearly_max, batch.year_index, batch.gross)
    tcl_max = empirical_var(yearly_max, q)
    if not (math.isfinite(tcl_max) and tcl_max <= ceiling):
        raise CalibrationError(f"TCL_max {tcl_max!r} not found below ceiling {ceiling!r}")
    if tcl_max <= 0:
        raise CalibrationError("pilot VaR of the annual maximum is zero; nothing to insure")
    return tcl_max


def tcl_grid(alpha: float, lam: float, strata: int = 51, cfg: SweepConfig = None):
    """Equally spaced TCL values from 0 to the calibrated full-mitigation limit."""
    cfg = cfg or SweepConfig()
    if strata < 2:
        raise ValueError("strata must be at least 2")
    rng = np.random.default_rng(_row_seq(cfg, alpha, lam, STREAM_PILOT))
    top = calibrate_tcl_max(RiskModel(lam, cfg.severity(alpha)), cfg.q_bank, cfg.pilot_years, rng, cfg.tcl_ceiling)
    return np.linspace(0.0, top, strata)


def _cell(cfg, alpha, lam, policy, tcl, acl, gross, retained, claimed, seed, years, t0):
    v_gross = empirical_var(gross, cfg.q_bank)
    v_mit = empirical_var(retained, cfg.q_bank)
    m = mcr(claimed, cfg.q_mcr)
    pv, pvm, pm = comparative_metrics(v_gross, v_mit, m)
    return CellResult(
        alpha=alpha, lam=lam, policy=policy, tcl=float(tcl), acl=float(acl),
        var_gross=v_gross, var_mitigated=v_mit, var_capped=basel_cap(v_gross, v_mit),
        es_mitigated=empirical_es(retained, cfg.q_bank), mcr=m, scr=empirical_scr(claimed),
        pct_var=pv, pct_var_mit=pvm, pct_mcr=pm, seed=seed, years=years,
        runtime_ms=round((time.perf_counter() - t0) * 1e3, 3) if cfg.record_runtime else 0.0,
    )


def _failed(alpha, lam, policy, tcl, acl, seed, years, exc):
    nan = math.nan
    return CellResult(alpha, lam, policy, float(tcl), float(acl), nan, nan, nan, nan, nan, nan,
                      nan, nan, nan, seed, years, 0.0, f"{type(exc).__name__}: {exc}")


def run_row(cfg: SweepConfig, row: int):
    """All policy x TCL cells for one (alpha, lambda) row, in a fixed order."""
    alpha, lam = cfg.rows()[row]
    seed = int(_row_seq(cfg, alpha, lam).generate_state(1)[0])
    n = cfg.years_per_cell
    try:
        grid = tcl_grid(alpha, lam, cfg.tcl_strata, cfg)
        model = RiskModel(lam, cfg.severity(alpha))
        batch = simulate_years(model, n, np.random.default_rng(_row_seq(cfg, alpha, lam, STREAM_GROSS)))
        gross = batch.annual("gross")
        second = None
        if "ALP2" in cfg.policies:
            second = simulate_years(model, n, np.random.default_rng(_row_seq(cfg, alpha, lam, STREAM_SECOND)))
    except Exception as exc:  # noqa: BLE001 - recorded per cell
        grid = np.full(cfg.tcl_strata, math.nan)
        return [_failed(alpha, lam, p, t, math.nan, seed, n, exc) for p in cfg.policies for t in grid]

    out = []
    for p_idx, policy in enumerate(cfg.policies):
        for s, tcl in enumerate(grid):
            t0 = time.perf_counter()
            acl = math.nan
            try:
                g = gross
                if policy == "ILP":
                    res = apply_ilp(batch, tcl)
                elif policy == "HLP":
                    res = apply_hlp(batch, tcl)
                elif policy == "ALP":
                    acl = derive_acl(tcl, lam, cfg.acl_percentile, cfg.acl_convention)
                    res = apply_alp(batch, acl)
                elif policy == "CLP":
                    acl = derive_acl(tcl, lam, cfg.acl_percentile, cfg.acl_convention)
                    res = apply_clp(batch, tcl, acl)
                elif policy == "BLP":
                    if tcl == 0:
                        res = apply_ilp(batch, 0.0)
                    else:
                        rng = np.random.default_rng(_row_seq(cfg, alpha, lam, STREAM_BLP))
                        res = apply_blp(batch, tcl, cfg.blp_bands, cfg.blp_scale, rng=rng)[0]
                if policy == "ALP2":
                    # the shared cap covers two cells, so the frequency percentile uses 2 lambda
                    acl = derive_acl(tcl, 2 * lam, cfg.acl_percentile, cfg.acl_convention)
                    _, _, retained, claimed = apply_alp2((batch, second), acl)
                    g = gross + second.annual("gross")
                else:
                    retained, claimed = res.annual("retained"), res.annual("claimed")
                out.append(_cell(cfg, alpha, lam, policy, tcl, acl, g, retained, claimed, seed, n, t0))
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                out.append(_failed(alpha, lam, policy, tcl, acl, seed, n, exc))
    return out


def _run_row_args(args):
    return run_row(*args)


def run_sweep(cfg: SweepConfig):
    """Every row of the grid; results ordered by (alpha, lambda, policy, TCL)."""
    rows = range(len(cfg.rows()))
    if cfg.workers == 1:
        chunks = [run_row(cfg, r) for r in rows]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_row_args, [(cfg, r) for r in rows]))
    return [cell for chunk in chunks for cell in chunk]


def sweep_to_csv(cells, stream=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for c in cells:
        writer.writerow(c.csv_row())
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_sweep_csv(path_or_file):
    """Rows of a sweep CSV as dicts with float values (policy stays a string)."""
    fh = open(path_or_file, newline="") if isinstance(path_or_file, str) else path_or_file
    try:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError("not a sweep CSV (header mismatch)")
        return [{k: (v if k == "policy" else float(v)) for k, v in r.items()} for r in reader]
    finally:
        if fh is not path_or_file:
            fh.close()


class PointResult(NamedTuple):
    tcl: float
    value: float
    status: str  # "crossing", "degenerate" or "none"


def _row_arrays(cells, a_key, b_key):
    rows = sorted(cells, key=lambda c: _get(c, "tcl"))
    t = np.array([_get(c, "tcl") for c in rows])
    a = np.array([_get(c, a_key) for c in rows])
    b = np.array([_get(c, b_key) for c in rows])
    return t, a, b


def _get(cell, key):
    return cell[key] if isinstance(cell, dict) else getattr(cell, key)


def _first_crossing(t, a, b, sign_from, tol):
    g = a - b
    if np.all(np.abs(g) <= tol):
        return PointResult(math.nan, math.nan, "degenerate")
    for i in range(len(g) - 1):
        g0, g1 = g[i], g[i + 1]
        if t[i] == 0 and abs(g0) <= tol:
            # curves share the uninsured origin; leaving it on the far side is a crossing at 0
            if sign_from * g1 < -tol:
                return PointResult(float(t[i]), float(a[i]), "crossing")
            continue
        if sign_from * g0 > tol and sign_from * g1 <= tol:
            w = g0 / (g0 - g1)
            return PointResult(float(t[i] + w * (t[i + 1] - t[i])), float(a[i] + w * (a[i + 1] - a[i])), "crossing")
    return PointResult(math.nan, math.nan, "none")


def risk_equality_point(cells, tol: float = 1e-12) -> PointResult:
    """TCL where the bank's residual %VaR meets the insurer's %MCR."""
    t, a, b = _row_arrays(cells, "pct_var", "pct_mcr")
    return _first_crossing(t, a, b, +1, tol)


def optimum_insurance_point(cells, tol: float = 1e-9) -> PointResult:
    """TCL where %VaR mitigation overtakes %MCR; ``degenerate`` when the curves coincide."""
    t, a, b = _row_arrays(cells, "pct_var_mit", "pct_mcr")
    return _first_crossing(t, a, b, -1, tol)


def _parse_value(name, raw, target):
    raw = raw.strip()
    if name in ("alphas", "lambdas"):
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if name == "policies":
        return tuple(x.upper() for x in raw.replace(",", " ").split())
    if isinstance(target, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(target, int):
        return int(float(raw)) if float(raw).is_integer() else int(raw)
    if isinstance(target, float):
        return float(raw)
    return raw


def load_config(path=None, overrides=None) -> SweepConfig:
    """Read ``[sweep]`` and ``[policy.blp]`` sections; ``overrides`` (a dict) wins."""
    defaults = SweepConfig()
    values = {}
    if path is not None:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_file(fh)
        known = {f.name for f in fields(SweepConfig)}
        for section in parser.sections():
            if section == "sweep":
                for k, v in parser.items(section):
                    if k not in known:
                        raise ValueError(f"unknown sweep key {k!r}")
                    values[k] = _parse_value(k, v, getattr(defaults, k))
            elif section.lower() == "policy.blp":
                for k, v in parser.items(section):
                    if k not in ("bands", "scale"):
                        raise ValueError(f"unknown BLP key {k!r}")
                    name = "blp_" + k
                    values[name] = _parse_value(name, v, getattr(defaults, name))
            elif section.lower().startswith("policy."):
                if parser.items(section):
                    raise ValueError(f"section [{section}] takes no keys")
            else:
                raise ValueError(f"unknown section [{section}]")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return replace(defaults, **values)
