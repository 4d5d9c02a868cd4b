"""Command-line front end.

Exit codes: 0 success, 1 failed check or violated bound, 2 invalid input
or domain error, 3 no crossing of the exponent curves.
"""

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import acceptance, exponents, mc
from .exceptions import DomainError, NoCrossingError
from .graph import BARTLETT, DIRECT, build_graph, sample_bartlett, sample_direct, write_edge_list
from .params import appendix_b_params, build_params, derived_constants, solve_p_C

COMMANDS = ("params", "optimize", "asymptotics", "sample", "mc", "verify-all")
EXPERIMENTS = ("red", "blue", "cgf", "bartlett", "mean-shift", "norm", "projection")
FORMATS = ("human", "json", "csv")


@dataclass
class RunConfig:
    command: str
    C: float = 2.0
    ell: int = 100
    D: float = 100.0
    p_override: Optional[float] = None
    K: float = 0.0
    r: int = 3
    n: int = 10
    trials: int = 100_000
    seed: int = 0
    output_format: str = "human"
    output_path: Optional[str] = None
    experiment: str = "red"
    b: float = -1.0
    d: Optional[int] = None
    u: tuple = (0.25, 0.5, 1.0, 2.0)
    sampler: str = DIRECT
    model: str = DIRECT
    only: Optional[tuple] = None

    def validate(self):
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.output_format not in FORMATS:
            raise DomainError(f"--format must be one of {FORMATS}")
        if not self.C >= 1.0:
            raise DomainError(f"--C must satisfy C >= 1 (got {self.C})")
        if self.ell < 1:
            raise DomainError(f"--ell must be >= 1 (got {self.ell})")
        if not (self.D > 0 and math.isfinite(self.D)):
            raise DomainError(f"--D must be finite and > 0 (got {self.D})")
        if self.p_override is not None and not 0 < self.p_override < 0.5:
            raise DomainError(f"--p must lie in (0, 1/2) (got {self.p_override})")
        if self.trials < 1:
            raise DomainError(f"--trials must be >= 1 (got {self.trials})")
        if self.seed < 0:
            raise DomainError(f"--seed must be >= 0 (got {self.seed})")
        if self.d is not None and self.d < 1:
            raise DomainError(f"--d must be >= 1 (got {self.d})")
        if self.command == "optimize":
            if not self.C > 1.0:
                raise DomainError("optimize requires --C > 1")
            if self.D < 10:
                raise DomainError(f"optimize requires --D >= 10 (got {self.D})")
        if self.command == "asymptotics" and not self.C >= 100:
            raise DomainError("asymptotics requires --C >= 100")
        if self.command == "sample" and self.n < 1:
            raise DomainError(f"--n must be >= 1 (got {self.n})")
        if self.command == "mc":
            if self.experiment not in EXPERIMENTS:
                raise DomainError(f"--experiment must be one of {EXPERIMENTS}")
            if self.experiment in ("red", "blue", "bartlett") and self.r < 2:
                raise DomainError(f"--r must be >= 2 for {self.experiment} (got {self.r})")
            if self.experiment == "cgf" and any(u < 0 for u in self.u):
                raise DomainError("--u values must be non-negative")
        return self

    def model_params(self):
        D = self.D if self.d is None else math.sqrt(self.d) / self.ell
        return build_params(self.C, self.ell, D, self.p_override)


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _dump(doc):
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def _kv_table(pairs):
    width = max(len(k) for k, _ in pairs)
    lines = []
    for k, v in pairs:
        if isinstance(v, float):
            v = f"{v:.12g}"
        lines.append(f"{k:<{width}}  {v}")
    return "\n".join(lines) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def cmd_params(cfg, out):
    params = cfg.model_params()
    consts = derived_constants(params)
    doc = {"params": params, "p_C": solve_p_C(cfg.C), "derived": consts}
    if cfg.output_format == "json":
        out.write(_dump(doc))
    else:
        pairs = [(k, v) for k, v in dataclasses.asdict(params).items()]
        pairs += list(dataclasses.asdict(consts).items())
        if cfg.output_format == "csv":
            out.write(_csv(["name", "value"], pairs + [("p_C", doc["p_C"])]))
        else:
            # p_C always shown with 12 decimals, trailing zeros kept
            out.write(_kv_table(pairs + [("p_C", f"{doc['p_C']:.12f}")]))
    return 0


def cmd_optimize(cfg, out):
    if cfg.D < 50:
        print(f"warning: D={cfg.D} < 50; dropped O(1/D) terms are large", file=sys.stderr)
    report = exponents.eta_report(cfg.C, cfg.D, cfg.K)
    if cfg.output_format == "json":
        out.write(_dump({"report": report, "dropped_terms": list(exponents.DROPPED_TERMS)}))
    elif cfg.output_format == "csv":
        lo = min(report.p_star_hms, report.p_star_new)
        hi = max(report.p_star_hms, report.p_star_new)
        pad = max(0.05, 2 * (hi - lo))
        ps = np.linspace(max(lo - pad, exponents.P_MIN), min(hi + pad, exponents.P_MAX), 201)
        pts = exponents.curve_sweep(cfg.C, cfg.D, cfg.K, ps)
        out.write(_csv(["p", "rho_red_hms", "rho_red_new", "rho_blue"],
                       [(pt.p, pt.rho_red_hms, pt.rho_red_new, pt.rho_blue) for pt in pts]))
    else:
        pairs = [(k, v) for k, v in dataclasses.asdict(report).items() if k != "dropped_terms"]
        out.write(_kv_table(pairs))
        out.write("dropped terms:\n" + "".join(f"  - {t}\n" for t in exponents.DROPPED_TERMS))
    return 0


def cmd_asymptotics(cfg, out):
    chain = exponents.asymptotic_exponent_chain(cfg.C)
    p, D = appendix_b_params(cfg.C)
    eta = exponents.asymptotic_eta(cfg.C)
    rows = [(k, link.exact, link.asymptotic, link.ratio) for k, link in chain.items()]
    if cfg.output_format == "json":
        out.write(_dump({"C": cfg.C, "p": p, "D": D, "eta_asymptotic": eta,
                         "chain": {k: {"exact": e, "asymptotic": a, "ratio": r} for k, e, a, r in rows}}))
    elif cfg.output_format == "csv":
        out.write(_csv(["link", "exact", "asymptotic", "ratio"], rows))
    else:
        out.write(_kv_table([("C", cfg.C), ("p", p), ("D", D), ("eta_asymptotic", eta)]))
        for k, e, a, r in rows:
            out.write(f"{k:<12} exact={e:.6g} asymptotic={a:.6g} ratio={r:.4f}\n")
    return 0


def cmd_sample(cfg, out):
    params = cfg.model_params()
    rng = np.random.default_rng(cfg.seed)
    if cfg.model == BARTLETT:
        vs = sample_bartlett(params, cfg.n, rng)
    else:
        vs = sample_direct(params, cfg.n, rng)
    g = build_graph(vs, params)
    if cfg.output_format == "json":
        from .graph import edge_list
        out.write(_dump({"n": cfg.n, "d": params.d, "p": params.p, "model": cfg.model,
                         "seed": cfg.seed, "edges": edge_list(g)}))
    elif cfg.output_format == "csv":
        from .graph import edge_list
        out.write(_csv(["i", "j"], edge_list(g)))
    else:
        write_edge_list(g, out)
    return 0


def _mc_records(cfg):
    params = cfg.model_params()
    exp = cfg.experiment
    records = []
    if exp in ("red", "blue"):
        variants = (mc.HMS_RED, mc.NEW_RED) if exp == "red" else (mc.BLUE,)
        if not all(mc.in_mc_range(params, cfg.r, cfg.trials, v) for v in variants):
            for v in variants:
                records.append(mc.make_record(exp, params, None, {"name": v, "note": "out of MC range"},
                                              mc.INCONCLUSIVE, cfg.seed, 0.0))
            return records
        with mc.Timer() as t:
            red, blue = mc.estimate_cliques(params, cfg.r, cfg.trials, cfg.seed, cfg.sampler)
        est = red if exp == "red" else blue
        for v in variants:
            cmp = mc.compare_to_bound(est, params, cfg.r, v, cfg.K)
            bound = {"name": v, "value": cmp.bound_value, "log_value": cmp.log_bound,
                     "K": cfg.K, "r": cfg.r, "notes": list(cmp.notes)}
            records.append(mc.make_record(exp, params, est, bound, cmp.verdict, cfg.seed, t.ms))
    elif exp == "cgf":
        with mc.Timer() as t:
            rep = mc.verify_cgf_empirical(cfg.b, cfg.u, cfg.trials, cfg.seed)
        records.append(mc.make_record(exp, {"b": cfg.b}, rep["rows"], {"name": "quadratic CGF bound"},
                                      "Pass" if rep["passed"] else "Fail", cfg.seed, t.ms))
    elif exp == "bartlett":
        with mc.Timer() as t:
            rep = mc.bartlett_equivalence(params, cfg.r, cfg.trials, cfg.seed)
        est = {k: rep[k] for k in ("max_abs_z", "ks_statistic", "ks_pvalue", "patterns")}
        records.append(mc.make_record(exp, params, est, {"name": "pattern z <= 4, KS p >= 1e-3"},
                                      "Equivalent" if rep["passed"] else "NotEquivalent", cfg.seed, t.ms))
    elif exp == "mean-shift":
        with mc.Timer() as t:
            rep = mc.verify_mean_shift(params, cfg.trials, cfg.seed)
        records.append(mc.make_record(exp, params, rep, {"name": "-a/(p sqrt d)", "value": rep["target"]},
                                      "Pass" if rep["passed"] else "Fail", cfg.seed, t.ms))
    elif exp == "norm":
        delta = 0.1
        with mc.Timer() as t:
            rep = mc.verify_norm_concentration(params.d, delta, cfg.trials, cfg.seed)
        records.append(mc.make_record(exp, {"d": params.d, "delta": delta}, rep,
                                      {"name": "1 - 2 exp(-delta^2 d / 10)", "value": rep["bound"]},
                                      "Pass" if rep["passed"] else "Fail", cfg.seed, t.ms))
    elif exp == "projection":
        s = min(5, params.d)
        with mc.Timer() as t:
            rep = mc.verify_projection_tail(cfg.C, cfg.ell, params.d, s, params.p, cfg.trials, cfg.seed)
        records.append(mc.make_record(exp, {"C": cfg.C, "ell": cfg.ell, "d": params.d, "s": s, "p": params.p},
                                      rep, {"name": "(p/10)^(10 C ell)", "log10_value": rep["log10_bound"]},
                                      "Pass" if rep["passed"] else "Fail", cfg.seed, t.ms))
    return records


_FAILING = {mc.VIOLATED, "Fail", "NotEquivalent"}


def cmd_mc(cfg, out):
    records = _mc_records(cfg)
    if cfg.output_format == "json":
        mc.write_records([_jsonable(r) for r in records], out)
    elif cfg.output_format == "csv":
        rows = []
        for r in records:
            est = r["estimate"] if isinstance(r["estimate"], dict) else {}
            bnd = r["bound"] if isinstance(r["bound"], dict) else {}
            rows.append((r["experiment"], bnd.get("name", ""), r["verdict"], est.get("p_hat", ""),
                         est.get("ci_low", ""), est.get("ci_high", ""), bnd.get("value", ""), r["seed"]))
        out.write(_csv(["experiment", "bound", "verdict", "p_hat", "ci_low", "ci_high", "bound_value", "seed"], rows))
    else:
        for r in records:
            est = r["estimate"]
            bnd = r["bound"] or {}
            line = f"{r['experiment']:<10} {bnd.get('name', ''):<28} verdict={r['verdict']}"
            if hasattr(est, "p_hat"):
                line += f" p_hat={est.p_hat:.6g} CI99=[{est.ci_low:.6g}, {est.ci_high:.6g}] bound={bnd.get('value', float('nan')):.6g}"
            line += f" seed={r['seed']} wall_ms={r['wall_time_ms']:.0f}"
            out.write(line + "\n")
    return 1 if any(r["verdict"] in _FAILING for r in records) else 0


def cmd_verify_all(cfg, out):
    results = []
    for num, name, _, _ in acceptance.CRITERIA:
        if cfg.only is not None and num not in cfg.only:
            continue
        res = acceptance.run_criterion(num, cfg.seed)
        results.append(res)
        if cfg.output_format == "human":
            out.write(f"{res.line()}  ({res.runtime_s:.1f} s, limit {res.runtime_limit_s:g} s)\n")
            out.flush()
    all_ok = all(r.passed for r in results)
    if cfg.output_format == "json":
        out.write(_dump({"seed": cfg.seed, "all_passed": all_ok, "criteria": [r.as_dict() for r in results]}))
    elif cfg.output_format == "csv":
        out.write(_csv(["criterion", "name", "passed"], [(r.number, r.name, r.passed) for r in results]))
    else:
        out.write(f"{sum(r.passed for r in results)}/{len(results)} criteria passed\n")
        for r in results:
            if not r.passed:
                out.write(f"criterion {r.number} diagnostics:\n{_dump(r.details)}")
    return 0 if all_ok else 1


HANDLERS = {"params": cmd_params, "optimize": cmd_optimize, "asymptotics": cmd_asymptotics,
            "sample": cmd_sample, "mc": cmd_mc, "verify-all": cmd_verify_all}

HELP = {
    "params": "solve p_C, c_p and the derived constants kappa, Lambda, beta_quad, beta'_quad, lambda_C",
    "optimize": "red/blue exponent curves, max-min crossing, eta vs eps_hms and the lambda_C beta_quad / D^2 shift",
    "asymptotics": "large-C parameter choice p = p_C + 1/C, D = 4aC/(1-p), and the asymptotic correction chain",
    "sample": "draw one Gaussian random graph G(n, d, p) and print its edge list",
    "mc": "Monte Carlo: clique probabilities vs bounds, CGF bound, Bartlett equivalence, mean shift, concentration",
    "verify-all": "run every acceptance criterion with fixed seeds and print a pass/fail table",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ramsey-gauss", description="Gaussian random graph Ramsey bounds toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name], description=HELP[name])
        sp.add_argument("--format", dest="output_format", choices=FORMATS, default="human")
        sp.add_argument("--output", dest="output_path", default=None, help="write to this file instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        if name == "verify-all":
            sp.add_argument("--only", type=lambda s: tuple(int(x) for x in s.split(",")),
                            default=None, help="comma-separated criterion numbers")
            continue
        sp.add_argument("--C", type=float, required=name in ("params", "optimize", "asymptotics"),
                        default=2.0, help="clique-size ratio (>= 1)")
        if name == "asymptotics":
            continue
        sp.add_argument("--D", type=float, default=100.0, help="dimension scale, d = D^2 ell^2")
        sp.add_argument("--K", type=float, default=0.0, help="unspecified constant K(p); 0 = leading order")
        if name == "optimize":
            continue
        sp.add_argument("--ell", type=int, default=100)
        sp.add_argument("--p", dest="p_override", type=float, default=None, help="use this p instead of p_C")
        if name == "sample":
            sp.add_argument("--n", type=int, default=10)
            sp.add_argument("--model", choices=(DIRECT, BARTLETT), default=DIRECT)
        if name == "mc":
            sp.add_argument("--experiment", choices=EXPERIMENTS, default="red")
            sp.add_argument("--r", type=int, default=3)
            sp.add_argument("--trials", type=int, default=100_000)
            sp.add_argument("--d", type=int, default=None, help="dimension; overrides --D via D = sqrt(d)/ell")
            sp.add_argument("--b", type=float, default=-1.0, help="cutoff for the cgf experiment")
            sp.add_argument("--u", type=lambda s: tuple(float(x) for x in s.split(",")),
                            default=(0.25, 0.5, 1.0, 2.0), help="comma-separated u grid for the cgf experiment")
            sp.add_argument("--sampler", choices=(DIRECT, BARTLETT), default=DIRECT)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
    try:
        cfg.validate()
        buf = io.StringIO()
        code = HANDLERS[cfg.command](cfg, buf if cfg.output_path else _StdoutProxy())
        if cfg.output_path:
            with open(cfg.output_path, "w") as fh:
                fh.write(buf.getvalue())
        return code
    except NoCrossingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


class _StdoutProxy:
    """Resolve sys.stdout at write time so captured streams work."""

    def write(self, s):
        return sys.stdout.write(s)

    def flush(self):
        sys.stdout.flush()


if __name__ == "__main__":
    sys.exit(main())
