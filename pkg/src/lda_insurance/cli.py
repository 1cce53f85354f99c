"""Command line entry point: ``lda-insurance {simulate,analytic,sweep,points}``.

Exit codes: 0 success, 1 configuration error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import collections
import math
import sys

import numpy as np

from . import experiment as ex
from .lda import RiskModel, simulate_years
from .mixture import (
    analytic_es_mcr,
    analytic_expected_claim,
    analytic_scr,
    build_mixture,
    mixture_cdf,
    mixture_pdf,
    mixture_quantile,
)
from .policies import apply_alp2, apply_policy, policy_from_dict
from .risk import risk_report
from .stable import StableParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lda-insurance", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="one severity model and policy -> risk report")
    s.add_argument("--alpha", type=float, default=0.5)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=0.0, help="S(0) location")
    s.add_argument("--no-truncate", action="store_true", help="allow negative losses")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--policy", default="ILP", help="NONE, ILP, ALP, CLP, ALP2, HLP or BLP")
    s.add_argument("--tcl", type=float)
    s.add_argument("--acl", type=float)
    s.add_argument("--bands", type=int, default=3)
    s.add_argument("--scale", default="linear")
    s.add_argument("--years", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--q", type=float, default=0.95)

    a = sub.add_parser("analytic", help="Poisson-Lévy mixture values")
    a.add_argument("--lam", type=float, required=True)
    a.add_argument("--gamma", type=float, required=True)
    a.add_argument("--edge", type=float, default=0.0, help="lower support edge of each loss")
    a.add_argument("--cdf", type=_floats, default=())
    a.add_argument("--pdf", type=_floats, default=())
    a.add_argument("--quantile", type=_floats, default=())
    a.add_argument("--tcl", type=float, help="per-event cap for expected claim and SCR")
    a.add_argument("--es-var", type=float, help="VaR level for the tail ES approximation (needs --tcl)")

    w = sub.add_parser("sweep", help="alpha x TCL grid -> CSV")
    w.add_argument("--config", help="INI file with [sweep] and [policy.*] sections")
    w.add_argument("--alphas", type=_floats, help="comma-separated, e.g. 2,1.3,0.5")
    w.add_argument("--lambdas", type=_floats, help="comma-separated")
    w.add_argument("--policies", type=lambda t: tuple(x.upper() for x in t.replace(",", " ").split()),
                   help="comma-separated subset of ILP,ALP,CLP,ALP2,HLP,BLP")
    w.add_argument("--strata", dest="tcl_strata", type=int)
    w.add_argument("--years", dest="years_per_cell", type=int)
    w.add_argument("--full", action="store_true", help="1,000,000 years per cell")
    w.add_argument("--seed", dest="master_seed", type=int)
    w.add_argument("--workers", type=int)
    w.add_argument("--record-runtime", action="store_true", default=None,
                   help="fill runtime_ms (output is then no longer reproducible)")
    w.add_argument("-o", "--output", help="CSV path (default stdout)")

    t = sub.add_parser("points", help="risk-equality and optimum points from a sweep CSV")
    t.add_argument("csv")
    return p


def _cmd_simulate(args):
    try:
        sev = StableParams(args.alpha, args.beta, args.gamma, args.delta, not args.no_truncate)
        model = RiskModel(args.lam, sev)
        raw = {"kind": args.policy}
        kind = args.policy.upper()
        if kind in ("ILP", "CLP", "HLP", "BLP"):
            raw["tcl"] = args.tcl
        if kind in ("ALP", "CLP", "ALP2"):
            raw["acl"] = args.acl
        if kind == "BLP":
            raw.update(bands=args.bands, scale=args.scale)
        if any(v is None for v in raw.values()):
            raise ConfigError(f"policy {kind} needs " + " and ".join(f"--{k}" for k, v in raw.items() if v is None))
        spec = policy_from_dict(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    rng = np.random.default_rng(args.seed)
    if kind == "ALP2":
        b1, b2 = (simulate_years(model, args.years, r) for r in rng.spawn(2))
        _, _, retained, claimed = apply_alp2((b1, b2), spec.acl)
        gross = b1.annual() + b2.annual()
    else:
        batch = simulate_years(model, args.years, rng)
        out = apply_policy(spec, batch, rng)
        gross, retained, claimed = out.annual(), out.annual("retained"), out.annual("claimed")
    rep = risk_report(gross, retained, claimed, args.q, args.q, alpha=args.alpha)
    for k, v in rep.as_dict().items():
        print(f"{k} = {v}")


def _cmd_analytic(args):
    try:
        dist = build_mixture(args.lam, args.gamma, args.edge)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"atom_at_zero = {dist.atom_at_zero!r}")
    print(f"terms = {dist.n_lower}..{dist.n_upper} (tail bound {dist.tail_bound:.3g})")
    for z in args.cdf:
        print(f"cdf({z!r}) = {mixture_cdf(dist, z)!r}")
    for z in args.pdf:
        print(f"pdf({z!r}) = {mixture_pdf(dist, z)!r}")
    for q in args.quantile:
        print(f"quantile({q!r}) = {mixture_quantile(dist, q)!r}")
    if args.tcl is not None:
        print(f"expected_claim = {analytic_expected_claim(dist, args.tcl)!r}")
        print(f"scr = {analytic_scr(dist, args.tcl)!r}")
        if args.es_var is not None:
            print(f"es_mcr = {analytic_es_mcr(dist, args.tcl, args.es_var)!r}")


def _cmd_sweep(args):
    overrides = {
        k: getattr(args, k)
        for k in ("alphas", "lambdas", "policies", "tcl_strata", "years_per_cell", "master_seed", "workers", "record_runtime")
    }
    if args.full:
        overrides["years_per_cell"] = 1_000_000
    try:
        cfg = ex.load_config(args.config, overrides)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cells = ex.run_sweep(cfg)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            ex.sweep_to_csv(cells, fh)
    else:
        ex.sweep_to_csv(cells, sys.stdout)
    failed = [c for c in cells if c.error]
    for c in failed:
        print(f"cell alpha={c.alpha} lambda={c.lam} policy={c.policy} tcl={c.tcl}: {c.error}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def _cmd_points(args):
    try:
        rows = ex.read_sweep_csv(args.csv)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc
    groups = collections.OrderedDict()
    for r in rows:
        groups.setdefault((r["alpha"], r["lambda"], r["policy"]), []).append(r)
    print("alpha,lambda,policy,equality_tcl,equality_status,optimum_tcl,optimum_pct_var_mit,optimum_status")
    for (alpha, lam, policy), cells in groups.items():
        if any(math.isnan(c["pct_var"]) for c in cells):
            print(f"{alpha!r},{lam!r},{policy},nan,failed,nan,nan,failed")
            continue
        eq = ex.risk_equality_point(cells)
        opt = ex.optimum_insurance_point(cells)
        print(f"{alpha!r},{lam!r},{policy},{eq.tcl!r},{eq.status},{opt.tcl!r},{opt.value!r},{opt.status}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"simulate": _cmd_simulate, "analytic": _cmd_analytic, "sweep": _cmd_sweep, "points": _cmd_points}
    try:
        return handler[args.command](args) or EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
